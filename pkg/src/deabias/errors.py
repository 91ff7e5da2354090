"""Exception hierarchy shared by every module."""


class ModelError(Exception):
    """Base class for all model and validation failures."""


class ValidationError(ModelError, ValueError):
    pass


class MissingKeyError(ValidationError, KeyError):
    def __init__(self, section, key):
        self.section = section
        self.key = key
        super().__init__(f"missing key '{key}' in section [{section}]")

    def __str__(self):
        return self.args[0]


class DomainError(ModelError, ValueError):
    pass


class LockupError(ModelError):
    """Gent chain-extension limit reached."""


class BreakdownError(ModelError):
    """Electric field in the film exceeds the breakdown field."""


class SlackError(ModelError):
    """Maxwell pressure exceeds the meridional stress; the film wrinkles."""


class ContactError(ModelError):
    """The moving part reached the magnet (gap below the admissible floor)."""


class SnapThroughError(ModelError):
    def __init__(self, message, last_stable_voltage=None):
        super().__init__(message)
        self.last_stable_voltage = last_stable_voltage


class PullInError(SnapThroughError):
    pass


class NoFeasibleOffsetError(ModelError):
    pass


class StabilityGuardError(ModelError):
    pass
