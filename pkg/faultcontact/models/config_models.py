from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from faultcontact.models.grid_models import FaultPlane, GridSpec
from faultcontact.models.problem_models import ElasticMaterial, LoadStep, PenaltySettings, SolverConfig


class MeshSource(BaseModel):
    """Either a mesh file in the text format or a structured-grid spec."""

    model_config = ConfigDict(extra="forbid")

    file: Optional[str] = None
    grid: Optional[GridSpec] = None

    @model_validator(mode="after")
    def exactly_one_source(self):
        if (self.file is None) == (self.grid is None):
            raise ValueError("Exactly one of 'file' and 'grid' must be given")
        return self


class FaultConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    planes: List[FaultPlane] = Field(default_factory=list)
    enriched: bool = True


class FrictionConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cohesion: float = 0.0
    friction_angle_deg: float = 0.0

    @field_validator("cohesion")
    def nonnegative_cohesion(cls, v):
        if v < 0:
            raise ValueError("Cohesion must be non-negative")
        return v

    @field_validator("friction_angle_deg")
    def admissible_angle(cls, v):
        if not 0.0 <= v < 90.0:
            raise ValueError("Friction angle must lie in [0, 90) degrees")
        return v


class OutputConfig(BaseModel):
    """Output file names, relative to the output directory; None disables a file."""

    model_config = ConfigDict(extra="forbid")

    profile: Optional[str] = "profile_step{step}.csv"
    fields: Optional[str] = "fields.vtk"
    report: Optional[str] = "report.csv"
    echo: Optional[str] = "effective_config.json"

    @field_validator("profile")
    def per_step_pattern(cls, v):
        if v is not None and "{step}" not in v:
            raise ValueError("Profile file name needs a '{step}' placeholder")
        return v


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "run"
    mesh: MeshSource
    fault: FaultConfig = Field(default_factory=FaultConfig)
    material: Dict[int, ElasticMaterial]
    friction: FrictionConfig = Field(default_factory=FrictionConfig)
    penalty: PenaltySettings = Field(default_factory=PenaltySettings)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    steps: Dict[int, LoadStep]
    output: OutputConfig = Field(default_factory=OutputConfig)

    @field_validator("material", "steps")
    def not_empty(cls, v):
        if not v:
            raise ValueError("Section must not be empty")
        return v

    @model_validator(mode="after")
    def faults_need_a_grid(self):
        if self.mesh.file is not None and self.fault.planes:
            raise ValueError("Fault planes can only be added to a grid mesh; mesh files carry their own faults")
        return self

    def ordered_steps(self) -> List[LoadStep]:
        return [self.steps[k] for k in sorted(self.steps)]
