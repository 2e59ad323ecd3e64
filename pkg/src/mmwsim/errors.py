"""Exception types shared across the simulator."""


class MmwsimError(Exception):
    """Base class for all simulator errors."""


class MeshParseError(MmwsimError):
    """Raised when an OBJ file cannot be parsed. Carries the offending line number."""

    def __init__(self, path, line_no, message):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class EmptyMeshError(MmwsimError):
    """Raised when a mesh file contains no usable triangles."""


class SceneError(MmwsimError):
    """Raised when a scene violates its geometric invariants."""


class ConfigError(MmwsimError):
    """Raised on schema violations in a configuration document."""


class DimensionMismatchError(MmwsimError):
    """Raised when two gridded inputs do not share dims/extents."""


class DegenerateCloudError(MmwsimError):
    """Raised when a point cloud is too degenerate for box fitting."""


class UnambiguousRangeError(MmwsimError):
    """Raised when a propagation path exceeds the FMCW unambiguous range."""


class FileFormatError(MmwsimError):
    """Raised when a binary heat-map/depth-map file is malformed."""
