from typing import Optional, Sequence


class FaultContactError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class MeshError(FaultContactError, ValueError):
    exit_code = 2


class MeshParseError(MeshError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvertedCellError(MeshError):
    def __init__(self, cell_id: int, min_det: float):
        super().__init__(f"cell {cell_id} has non-positive Jacobian determinant ({min_det:.3e})")
        self.cell_id = cell_id
        self.min_det = min_det


class DegenerateFaceError(MeshError):
    def __init__(self, face_id: int, area: float):
        super().__init__(f"face {face_id} is degenerate (area {area:.3e})")
        self.face_id = face_id
        self.area = area


class ManifoldError(MeshError):
    def __init__(self, edge: Sequence[int], count: int):
        super().__init__(
            f"fault selection is not a manifold: edge ({edge[0]}, {edge[1]}) is shared by {count} selected faces"
        )
        self.edge = tuple(edge)
        self.count = count


class GridAlignmentError(MeshError):
    def __init__(self, axis: str, coordinate: float, nearest: float):
        super().__init__(
            f"fault plane {axis}={coordinate!r} does not coincide with a grid plane (nearest {axis}={nearest!r})"
        )
        self.axis = axis
        self.coordinate = coordinate
        self.nearest = nearest


class ElementError(FaultContactError, ValueError):
    pass


class SingularBlockError(FaultContactError, RuntimeError):
    exit_code = 3

    def __init__(self, face_ids: Sequence[int]):
        ids = ", ".join(str(int(f)) for f in face_ids)
        super().__init__(f"bubble block of fault face(s) {ids} is singular (degenerate geometry or non-positive penalty)")
        self.face_ids = [int(f) for f in face_ids]


class LinearSolverError(FaultContactError, RuntimeError):
    exit_code = 3

    def __init__(self, message: str, residual: Optional[float] = None):
        if residual is not None:
            message = f"{message} (achieved relative residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class NonConvergenceError(FaultContactError, RuntimeError):
    exit_code = 3

    def __init__(self, message: str, residual: float, step: Optional[int] = None, snapshot=None):
        prefix = f"step {step}: " if step is not None else ""
        super().__init__(f"{prefix}{message} (last residual {residual:.6e})")
        self.residual = residual
        self.step = step
        self.snapshot = snapshot


class AnalyticDomainError(FaultContactError, ValueError):
    pass


class ConfigError(FaultContactError, ValueError):
    exit_code = 2

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class InconsistentStateError(FaultContactError, ValueError):
    """A contact state whose tangent is undefined, e.g. slip with zero trial traction."""
