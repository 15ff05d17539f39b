from typing import ClassVar, Dict, List, Tuple

from pydantic import BaseModel, Field, field_validator


class StepReport(BaseModel):
    step: int
    label: float
    uzawa: int = 0
    newton: int = 0
    krylov: int = 0
    residual: float = 0.0
    converged: bool = False
    states: Dict[str, int] = Field(default_factory=dict)  # stick/slip/open counts

    @field_validator("uzawa", "newton", "krylov")
    def nonnegative(cls, v):
        if v < 0:
            raise ValueError("Iteration counts must be non-negative")
        return v


class SolveReport(BaseModel):
    variant: str
    symmetric: bool
    steps: List[StepReport] = Field(default_factory=list)
    final_states: List[str] = Field(default_factory=list)

    @property
    def total_uzawa(self) -> int:
        return sum(s.uzawa for s in self.steps)

    @property
    def total_newton(self) -> int:
        return sum(s.newton for s in self.steps)

    @property
    def total_krylov(self) -> int:
        return sum(s.krylov for s in self.steps)

    @property
    def converged(self) -> bool:
        return bool(self.steps) and all(s.converged for s in self.steps)

    def summary(self) -> str:
        return (
            f"{self.variant}{' (symmetric)' if self.symmetric else ''}: "
            f"{len(self.steps)} step(s), uzawa={self.total_uzawa}, newton={self.total_newton}, "
            f"krylov={self.total_krylov}, converged={self.converged}"
        )


class FaultProfileRecord(BaseModel):
    face: int
    x: float
    y: float
    z: float
    xi: float
    t_N: float
    t_1: float
    t_2: float
    g_N: float
    dg_T1: float
    dg_T2: float
    state: str

    @field_validator("state")
    def known_state(cls, v):
        if v not in ("stick", "slip", "open"):
            raise ValueError(f"Unknown contact state '{v}'")
        return v

    COLUMNS: ClassVar[Tuple[str, ...]] = ("face", "x", "y", "z", "xi", "t_N", "t_1", "t_2", "g_N", "dg_T1", "dg_T2", "state")

    def row(self):
        return [getattr(self, c) for c in self.COLUMNS]


class InfSupRecord(BaseModel):
    level: int
    kind: str
    h: float
    beta_enriched: float
    beta_plain: float

    COLUMNS: ClassVar[Tuple[str, ...]] = ("level", "kind", "h", "beta_enriched", "beta_plain")

    def row(self):
        return [getattr(self, c) for c in self.COLUMNS]
