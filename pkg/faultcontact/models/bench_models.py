import math
from typing import ClassVar, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from faultcontact.core.settings import DEG


class InclinedFaultParams(BaseModel):
    """Bounded fault in a slab under uniform far-field compression along an inclined direction."""

    model_config = ConfigDict(extra="forbid")

    E: float = 1e5
    nu: float = 0.4
    angle_deg: float = 20.0
    half_length: float = 1.0
    friction_angle_deg: float = 30.0
    sigma: float = 1.0
    domain_factor: float = 20.0  # slab half-width in units of the half-length
    growth: float = 1.3

    @field_validator("angle_deg")
    def inclination_range(cls, v):
        if not 0.0 < v < 90.0:
            raise ValueError("Inclination must lie strictly between 0 and 90 degrees")
        return v

    @field_validator("half_length", "E", "sigma")
    def positive(cls, v):
        if not v > 0:
            raise ValueError("Lengths, moduli and loads must be positive")
        return v

    @field_validator("domain_factor")
    def slab_contains_fault(cls, v):
        if v < 2.0:
            raise ValueError("The slab must extend at least two half-lengths from the fault center")
        return v

    @property
    def angle(self) -> float:
        return self.angle_deg * DEG

    @property
    def friction_angle(self) -> float:
        return self.friction_angle_deg * DEG

    @property
    def normal_traction(self) -> float:
        return -self.sigma * math.sin(self.angle) ** 2

    @property
    def slip_amplitude(self) -> float:
        """Peak slip at the fault center."""
        a = self.angle
        excess = self.sigma * math.sin(a) * (math.cos(a) - math.sin(a) * math.tan(self.friction_angle))
        return 4.0 * (1.0 - self.nu**2) / self.E * excess * self.half_length


class VerticalFaultParams(BaseModel):
    """Vertical fault offsetting a horizontal reservoir; lengths in m, stresses in MPa."""

    model_config = ConfigDict(extra="forbid")

    a: float = 75.0
    b: float = 150.0
    height: float = 4500.0
    width: float = 4500.0
    shear_modulus: float = 6500.0
    nu: float = 0.15
    friction_angle_deg: float = 30.0
    pressure: float = -25.0
    biot_alpha: float = 0.9
    initial_stress: float = -50.0
    refined_half_width: float = 300.0
    growth: float = 1.3

    @model_validator(mode="after")
    def nested_geometry(self):
        if not 0.0 < self.a < self.b < 0.5 * self.height:
            raise ValueError("Reservoir geometry needs 0 < a < b < H/2")
        if not self.b <= self.refined_half_width <= 0.5 * min(self.height, self.width):
            raise ValueError("Refined band must cover the reservoir and fit inside the domain")
        return self

    @property
    def E(self) -> float:
        return 2.0 * self.shear_modulus * (1.0 + self.nu)

    @property
    def C(self) -> float:
        return (1.0 - 2.0 * self.nu) * self.biot_alpha * self.pressure / (2.0 * math.pi * (1.0 - self.nu))

    @property
    def A(self) -> float:
        return self.shear_modulus / (2.0 * math.pi * (1.0 - self.nu))


class ErrorReport(BaseModel):
    """Profile errors over a refinement sequence and their fitted log-log rates."""

    case: str
    kind: str
    h: List[float]
    err_traction: List[float]
    err_slip: List[float]
    rate_traction: Optional[float] = None  # None when every error vanishes
    rate_slip: Optional[float] = None

    @field_validator("err_traction", "err_slip")
    def nonnegative_errors(cls, v):
        if any(e < 0 for e in v):
            raise ValueError("Errors must be non-negative")
        return v

    @field_validator("rate_traction", "rate_slip")
    def finite_rate(cls, v):
        if v is not None and not math.isfinite(v):
            raise ValueError("Convergence rates must be finite")
        return v

    @property
    def exact(self) -> bool:
        return self.rate_traction is None and self.rate_slip is None

    COLUMNS: ClassVar[Tuple[str, ...]] = ("case", "kind", "h", "err_traction", "err_slip", "rate_traction", "rate_slip")

    def rows(self):
        """One row per level; the fitted rates repeat on every row."""
        rate_t = "exact" if self.rate_traction is None else self.rate_traction
        rate_s = "exact" if self.rate_slip is None else self.rate_slip
        return [
            [self.case, self.kind, h, et, es, rate_t, rate_s]
            for h, et, es in zip(self.h, self.err_traction, self.err_slip)
        ]


class BenchRecord(BaseModel):
    case: str
    kind: str
    level: int
    h: float
    err_traction: Optional[float] = None
    err_slip: Optional[float] = None
    kkt_passed: bool
    uzawa: int
    newton: int
    krylov: int
    stick: int = 0
    slip: int = 0
    open: int = 0

    COLUMNS: ClassVar[Tuple[str, ...]] = (
        "case", "kind", "level", "h", "err_traction", "err_slip", "kkt_passed",
        "uzawa", "newton", "krylov", "stick", "slip", "open",
    )

    def row(self):
        return ["" if getattr(self, c) is None else getattr(self, c) for c in self.COLUMNS]


class SweepRecord(BaseModel):
    case: str
    factor: float
    variant: Literal["uzawa", "interleaved"]
    symmetric: bool
    converged: bool
    uzawa: int = 0
    newton: int = 0
    krylov: int = 0

    COLUMNS: ClassVar[Tuple[str, ...]] = ("case", "factor", "variant", "symmetric", "converged", "uzawa", "newton", "krylov")

    def row(self):
        return [getattr(self, c) for c in self.COLUMNS]
