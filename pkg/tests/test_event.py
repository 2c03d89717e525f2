import asyncio

import pytest

from hcm_modem.event import Event, EventInstance


class PointSource:
    on_point = Event()


def test_descriptor():
    assert isinstance(PointSource.on_point, Event)

    first, second = PointSource(), PointSource()
    assert isinstance(first.on_point, EventInstance)
    assert first.on_point is first.on_point
    assert first.on_point is not second.on_point


def test_async_iteration():
    source = PointSource()
    received = []

    async def consumer():
        async for value in source.on_point:
            received.append(value)
            if len(received) == 2:
                break

    async def run():
        task = asyncio.ensure_future(consumer())
        await asyncio.sleep(0)
        assert source.on_point.has_subscribers

        # Both arrive before the consumer runs again; the stream buffers them
        source.on_point(14.0)
        source.on_point(14.5)
        await asyncio.wait_for(task, 1)

    asyncio.run(run())
    assert received == [14.0, 14.5]


def test_with_func_handler():
    source = PointSource()
    received = None

    def handler(arg):
        nonlocal received
        assert received is None
        received = arg

    source.on_point += handler
    assert source.on_point.has_subscribers

    source.on_point(0.25)
    assert received == 0.25

    del handler
    assert not source.on_point.has_subscribers


def test_with_handler_remove():
    source = PointSource()
    received = []

    def handler(arg):
        received.append(arg)

    source.on_point += handler
    source.on_point += handler

    source.on_point(1)
    assert received == [1, 1]

    source.on_point -= handler
    assert source.on_point.has_subscribers

    source.on_point -= handler
    assert not source.on_point.has_subscribers

    with pytest.raises(KeyError):
        source.on_point -= handler


def test_with_method_handler():
    class Collector:
        def __init__(self):
            self.values = []

        def handler(self, arg):
            self.values.append(arg)

    source = PointSource()
    collector = Collector()
    source.on_point += collector.handler

    source.on_point('flagged')
    assert collector.values == ['flagged']

    del collector
    assert not source.on_point.has_subscribers
