import asyncio
import typing
import weakref

T = typing.TypeVar('T')


class _PointStream:
    """Async iterator fed by an event; buffers values emitted while nobody awaits."""

    def __init__(self) -> None:
        self.pending = asyncio.Queue()  # type: asyncio.Queue

    def push(self, value):
        self.pending.put_nowait(value)

    def __aiter__(self):
        return self

    async def __anext__(self):
        return await self.pending.get()


class EventInstance(typing.Generic[T]):
    def __init__(self) -> None:
        self._handlers = []  # type: typing.List[weakref.ref]

    def _live_handlers(self, remove=None) -> typing.List[typing.Callable[[T], typing.Any]]:
        """Drops collected handlers (and at most one `remove`), returns the callables still alive."""
        kept = []  # type: typing.List[weakref.ref]
        result = []
        for handler_ref in self._handlers:
            handler = handler_ref()
            if handler is None:
                continue
            if remove is not None and handler == remove:
                remove = None
                continue
            kept.append(handler_ref)
            result.append(handler)

        self._handlers = kept

        if remove is not None:
            raise KeyError(remove)

        return result

    @property
    def has_subscribers(self):
        return bool(self._live_handlers())

    def __call__(self, arg: T):
        for handler in self._live_handlers():
            handler(arg)

    def __aiter__(self):
        stream = _PointStream()
        self.__iadd__(stream.push)
        return stream

    def __iadd__(self, other: typing.Callable[[T], typing.Any]):
        try:
            handler_ref = weakref.WeakMethod(other)  # type: ignore
        except TypeError:  # plain function, not a bound method
            handler_ref = weakref.ref(other)  # type: ignore

        self._handlers.append(handler_ref)
        return self

    def __isub__(self, other: typing.Callable[[T], typing.Any]):
        self._live_handlers(other)
        return self


class Event(typing.Generic[T]):
    """Class-level declaration of a per-instance notification channel.

    Handlers are held by weak reference; a handler that goes out of scope silently unsubscribes."""

    def __init__(self):
        self._attribute = "__evt_%x" % abs(id(self))

    def __get__(self, instance, owner) -> EventInstance[T]:
        if not instance:
            return self  # type: ignore  # noqa

        try:
            event = getattr(instance, self._attribute)
        except AttributeError:
            event = EventInstance()  # type: EventInstance[T]
            setattr(instance, self._attribute, event)

        return event
