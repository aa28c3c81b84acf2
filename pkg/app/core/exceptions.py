from typing import Any, Optional


class ConfigurationSpaceError(ValueError):
    """Base class for every domain error raised by the library"""


class InvalidConfigurationError(ConfigurationSpaceError):
    pass


class PermutationError(ConfigurationSpaceError):
    pass


class ShapeMismatchError(ConfigurationSpaceError):
    pass


class UnknownDescriptorError(ConfigurationSpaceError):
    pass


class SectionApplicabilityError(ConfigurationSpaceError):
    pass


class SectionViolationError(ConfigurationSpaceError):
    """A section rule produced a point that is not a valid addition"""

    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class BoundaryError(ConfigurationSpaceError):
    pass


class WindingError(ConfigurationSpaceError):
    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step


class NearZeroVectorError(WindingError):
    pass


class UndersampledError(WindingError):
    pass


class NonIntegralError(WindingError):
    pass


class LoopConstructionError(ConfigurationSpaceError):
    pass


class HomotopyFailureError(ConfigurationSpaceError):
    def __init__(self, message: str, witness: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness


class PointMapError(ConfigurationSpaceError):
    pass


class LabelError(ConfigurationSpaceError, IndexError):
    """A point label or slot outside the configuration"""


class ParameterError(ConfigurationSpaceError):
    pass


class RegistryError(ConfigurationSpaceError):
    pass
