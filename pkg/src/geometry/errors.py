class GeometryError(Exception):
    """Base class for every failure raised by the chart-level geometry code."""


class DimensionMismatchError(GeometryError, ValueError):
    pass


class OutOfChartError(GeometryError):
    """A trajectory, arrow or value left the declared chart."""


class DegenerateStructureError(GeometryError):
    pass


class FactorizationError(GeometryError):
    """pi-sharp does not factor through the anchor within tolerance."""


class NonCommutingFrameError(GeometryError):
    pass


class NonComposableError(GeometryError):
    pass


class FibrationMismatchError(GeometryError):
    pass


class ConsistencyError(GeometryError):
    """Two independent computations that must agree did not."""


class ConfigError(GeometryError):
    pass
