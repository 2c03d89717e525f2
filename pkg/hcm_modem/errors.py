class ModemError(Exception):
    """Base class for all errors raised by hcm_modem.

    `error_code` doubles as the process exit code when the error escapes to the command line."""

    error_code = 2
    msg = "Modem error"

    def __init__(self, detail: str = None) -> None:
        super().__init__(detail)
        self.detail = detail

    def __str__(self):
        if self.detail:
            return "%s: %s" % (self.msg, self.detail)
        return self.msg


class InvalidOrderError(ModemError, ValueError):
    msg = "Hadamard order must be a power of two not smaller than 2"


class InvalidLengthError(ModemError, ValueError):
    msg = "Invalid vector length"


class ReservedSlotError(ModemError, ValueError):
    msg = "Component 0 of an HCM data vector is reserved and must be zero"


class AmplitudeRangeError(ModemError, ValueError):
    msg = "HCM data amplitudes must lie in [0, 1]"


class BitCountError(ModemError, ValueError):
    msg = "Wrong number of bits for this mapper"


class InvalidPermutationError(ModemError, ValueError):
    msg = "Not a permutation"


class CyclicPrefixError(ModemError, ValueError):
    msg = "Cyclic prefix length out of range"


class ZeroSignalError(ModemError, ValueError):
    msg = "Cannot normalize the power of an all-zero signal"


class InvalidParameterError(ModemError, ValueError):
    msg = "Invalid parameter"


class ConfigError(ModemError):
    error_code = 1
    msg = "Could not parse configuration"


class SpecError(ModemError):
    error_code = 2
    msg = "Invalid sweep specification"


class StopRuleUnreachable(ModemError):
    error_code = 3
    msg = "Stop rule error target not reached within the bit budget"

    def __init__(self, flagged: list) -> None:
        super().__init__("%i point(s) flagged at %s dBm" % (
            len(flagged), ", ".join("%g" % power for power in flagged)))
        self.flagged = flagged


class UnsupportedFeature(NotImplementedError):
    def __init__(self, feature):
        super().__init__("hcm_modem does not support %s." % feature)
