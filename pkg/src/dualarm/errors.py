"""Exception types shared across the harness."""


class HarnessError(Exception):
    """Base class for all harness errors."""


class WrongArity(HarnessError):
    """A raw action vector does not have exactly 16 components."""


class NonFinite(HarnessError):
    """A raw action vector contains NaN or infinity."""


class NonNormalizable(HarnessError):
    """Quaternion norm too close to zero to renormalize."""


class UnknownTask(HarnessError):
    """Task id is not present in the registry."""


class PlacementFailure(HarnessError):
    """Rejection sampling could not place objects without overlap."""


class AlreadyHolding(HarnessError):
    """Attach requested on an arm that already holds an object."""


class UnknownActor(HarnessError):
    """A skill call names an object that is not in the scene."""


class SchemaError(HarnessError):
    """Skill call violates the parameter schema."""


class UnsupportedTask(HarnessError):
    """No oracle plan is implemented for the task."""


class RecordingExhausted(HarnessError):
    """Replay recording has no entry for the requested round."""


class MissingPrediction(HarnessError):
    """A scene target object is absent from the prediction set."""


class DuplicatePrediction(HarnessError):
    """A scene target object appears more than once in the predictions."""


class RemoteBackendError(HarnessError):
    """Remote model request failed after retries."""


class RegistryError(HarnessError):
    """Task registry file is missing required entries."""
