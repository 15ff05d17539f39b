import math
from typing import Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from faultcontact.core import settings
from faultcontact.core.mesh_models import Mesh


class ElasticMaterial(BaseModel):
    model_config = ConfigDict(extra="forbid")

    E: float
    nu: float
    biot_alpha: float = 0.0
    # Voigt order xx, yy, zz, yz, xz, xy
    initial_stress: List[float] = Field(default_factory=lambda: [0.0] * 6)

    @field_validator("E")
    def positive_modulus(cls, v):
        if not v > 0:
            raise ValueError("Young's modulus must be positive")
        return v

    @field_validator("nu")
    def admissible_poisson(cls, v):
        if not -1.0 < v < 0.5:
            raise ValueError("Poisson ratio must lie in (-1, 0.5)")
        return v

    @field_validator("biot_alpha")
    def biot_range(cls, v):
        if not 0.0 <= v <= 1.0:
            raise ValueError("Biot coefficient must lie in [0, 1]")
        return v

    @field_validator("initial_stress", mode="before")
    def voigt_stress(cls, v):
        arr = np.asarray(v, dtype=float)
        if arr.shape == (3, 3):
            if np.max(np.abs(arr - arr.T)) > 1e-12 * max(1.0, np.max(np.abs(arr))):
                raise ValueError("Initial stress tensor must be symmetric")
            arr = np.array([arr[0, 0], arr[1, 1], arr[2, 2], arr[1, 2], arr[0, 2], arr[0, 1]])
        if arr.shape != (6,):
            raise ValueError("Initial stress must be a 3x3 tensor or 6 Voigt components")
        if not np.all(np.isfinite(arr)):
            raise ValueError("Initial stress must be finite")
        return arr.tolist()

    @property
    def lame(self):
        lam = self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu))
        mu = self.E / (2 * (1 + self.nu))
        return lam, mu

    @property
    def shear_modulus(self) -> float:
        return self.lame[1]


class FrictionParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cohesion: float = 0.0
    friction_angle: float = 0.0  # radians

    @field_validator("cohesion")
    def nonnegative_cohesion(cls, v):
        if v < 0:
            raise ValueError("Cohesion must be non-negative")
        return v

    @field_validator("friction_angle")
    def admissible_angle(cls, v):
        if not 0.0 <= v < math.pi / 2:
            raise ValueError("Friction angle must lie in [0, pi/2)")
        return v

    @classmethod
    def from_degrees(cls, cohesion: float, angle_deg: float) -> "FrictionParams":
        return cls(cohesion=cohesion, friction_angle=angle_deg * settings.DEG)

    @property
    def tan_phi(self) -> float:
        return math.tan(self.friction_angle)


class PenaltySettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scale: float = settings.DEFAULT_PENALTY_SCALE
    eps_N: Optional[float] = None  # explicit value overrides the scaled default
    eps_T_ratio: float = 1.0

    @field_validator("scale", "eps_T_ratio")
    def positive_factor(cls, v):
        if not v > 0:
            raise ValueError("Penalty factors must be positive")
        return v

    @field_validator("eps_N")
    def positive_penalty(cls, v):
        if v is not None and not v > 0:
            raise ValueError("Penalty parameter must be positive")
        return v


class PenaltyParams(BaseModel):
    """Per-face augmentation parameters."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    eps_N: np.ndarray
    eps_T: np.ndarray

    @field_validator("eps_N", "eps_T", mode="before")
    def positive_array(cls, v):
        arr = np.atleast_1d(np.asarray(v, dtype=float))
        if arr.size and not np.all(arr > 0):
            raise ValueError("Penalty parameters must be positive")
        return arr


class KrylovConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    method: Literal["auto", "direct", "gmres", "cg"] = "auto"
    rtol: float = settings.KRYLOV_RTOL
    max_iter: int = settings.KRYLOV_MAX_ITER
    restart: int = settings.GMRES_RESTART

    @field_validator("rtol")
    def positive_tol(cls, v):
        if not v > 0:
            raise ValueError("Tolerance must be positive")
        return v

    @field_validator("max_iter", "restart")
    def positive_count(cls, v):
        if v < 1:
            raise ValueError("Iteration limits must be at least 1")
        return v


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    variant: Literal["uzawa", "interleaved"] = "uzawa"
    symmetric: bool = False
    newton_rtol: float = settings.NEWTON_RTOL
    newton_atol: Optional[float] = None  # defaults to 1e-10 * E_ref * h_ref**2
    max_newton: int = settings.MAX_NEWTON
    max_uzawa: int = settings.MAX_UZAWA
    max_interleaved: int = settings.MAX_INTERLEAVED
    uzawa_traction_tol: float = settings.UZAWA_TRACTION_TOL
    line_search: bool = True
    max_backtracks: int = settings.MAX_BACKTRACKS
    krylov: KrylovConfig = Field(default_factory=KrylovConfig)

    @field_validator("newton_rtol", "uzawa_traction_tol")
    def positive_tol(cls, v):
        if not v > 0:
            raise ValueError("Tolerances must be positive")
        return v

    @field_validator("newton_atol")
    def positive_atol(cls, v):
        if v is not None and not v > 0:
            raise ValueError("Tolerances must be positive")
        return v

    @field_validator("max_newton", "max_uzawa", "max_interleaved")
    def positive_count(cls, v):
        if v < 1:
            raise ValueError("Iteration limits must be at least 1")
        return v

    @field_validator("max_backtracks")
    def non_negative_backtracks(cls, v):
        if v < 0:
            raise ValueError("Backtrack limit cannot be negative")
        return v

    @model_validator(mode="after")
    def cg_needs_symmetry(self):
        if self.krylov.method == "cg" and not self.symmetric:
            raise ValueError("CG requires the symmetric variant")
        return self


class DirichletCondition(BaseModel):
    model_config = ConfigDict(extra="forbid")

    set: str
    x: Optional[float] = None
    y: Optional[float] = None
    z: Optional[float] = None

    @model_validator(mode="after")
    def some_component(self):
        if self.x is None and self.y is None and self.z is None:
            raise ValueError(f"Dirichlet condition on '{self.set}' constrains no component")
        return self

    def components(self):
        return [(i, v) for i, v in enumerate((self.x, self.y, self.z)) if v is not None]


class NeumannCondition(BaseModel):
    model_config = ConfigDict(extra="forbid")

    set: str
    traction: List[float]

    @field_validator("traction")
    def three_components(cls, v):
        if len(v) != 3:
            raise ValueError("Traction must have three components")
        return v


class LoadStep(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: float = 0.0
    dirichlet: List[DirichletCondition] = Field(default_factory=list)
    neumann: List[NeumannCondition] = Field(default_factory=list)
    reservoir_pressure: Dict[int, float] = Field(default_factory=dict)  # region -> p
    fault_pressure: Dict[int, float] = Field(default_factory=dict)  # fault tag -> p


class ProblemDefinition(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = "problem"
    mesh: Mesh
    materials: Dict[int, ElasticMaterial]
    friction: FrictionParams = Field(default_factory=FrictionParams)
    penalty: PenaltySettings = Field(default_factory=PenaltySettings)
    steps: List[LoadStep]
    enriched: bool = True

    @field_validator("steps")
    def at_least_one_step(cls, v):
        if not v:
            raise ValueError("Load schedule needs at least one step")
        return v

    @model_validator(mode="after")
    def references_exist(self):
        regions = set(np.unique(self.mesh.cell_region).tolist())
        missing = regions - set(self.materials)
        if missing:
            raise ValueError(f"No material for region(s) {sorted(missing)}")
        for i, step in enumerate(self.steps):
            for bc in step.dirichlet:
                if bc.set not in self.mesh.node_sets:
                    raise ValueError(f"Step {i}: undefined node set '{bc.set}'")
            for load in step.neumann:
                if load.set not in self.mesh.face_sets:
                    raise ValueError(f"Step {i}: undefined face set '{load.set}'")
            for region in step.reservoir_pressure:
                if region not in self.materials:
                    raise ValueError(f"Step {i}: undefined region {region}")
        return self

    def material_arrays(self):
        """Per-cell E, nu, Biot coefficient."""
        regions = self.mesh.cell_region
        E = np.array([self.materials[int(r)].E for r in regions])
        nu = np.array([self.materials[int(r)].nu for r in regions])
        alpha = np.array([self.materials[int(r)].biot_alpha for r in regions])
        return E, nu, alpha

    @property
    def reference_modulus(self) -> float:
        return float(np.mean([m.E for m in self.materials.values()]))
