from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

AXES = ("x", "y", "z")


class FaultPlane(BaseModel):
    model_config = ConfigDict(extra="forbid")

    axis: Literal["x", "y", "z"]
    coordinate: float
    # [[lo, hi], [lo, hi]] on the two in-plane axes, in x, y, z order; None = unbounded
    bounds: Optional[List[Optional[List[float]]]] = None
    tag: int = 0

    @field_validator("bounds")
    def two_ranges(cls, v):
        if v is None:
            return v
        if len(v) != 2:
            raise ValueError("Fault plane bounds need one range per in-plane axis")
        for rng in v:
            if rng is not None and (len(rng) != 2 or rng[0] > rng[1]):
                raise ValueError("Each bound must be an increasing [lo, hi] pair")
        return v

    @property
    def axis_index(self) -> int:
        return AXES.index(self.axis)

    @property
    def in_plane_axes(self):
        return [i for i in range(3) if i != self.axis_index]


class RegionBox(BaseModel):
    model_config = ConfigDict(extra="forbid")

    region: int
    lower: List[float]
    upper: List[float]

    @model_validator(mode="after")
    def ordered_corners(self):
        if len(self.lower) != 3 or len(self.upper) != 3:
            raise ValueError("Region box corners need three coordinates")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("Region box lower corner must not exceed the upper corner")
        return self


class GridSpec(BaseModel):
    """Structured-grid builder input; ``grid_lines`` overrides extents/divisions per axis."""

    model_config = ConfigDict(extra="forbid")

    extents: List[float] = Field(default_factory=lambda: [1.0, 1.0, 1.0])
    divisions: List[int] = Field(default_factory=lambda: [1, 1, 1])
    origin: List[float] = Field(default_factory=lambda: [0.0, 0.0, 0.0])
    grid_lines: Optional[List[Optional[List[float]]]] = None
    kind: Literal["hex8", "tet4", "wedge6"] = "hex8"
    fault_planes: List[FaultPlane] = Field(default_factory=list)
    region_boxes: List[RegionBox] = Field(default_factory=list)

    @field_validator("extents")
    def positive_extents(cls, v):
        if len(v) != 3 or any(e <= 0 for e in v):
            raise ValueError("Extents must be three positive lengths")
        return v

    @field_validator("divisions")
    def positive_divisions(cls, v):
        if len(v) != 3 or any(d < 1 for d in v):
            raise ValueError("Divisions must be three integers >= 1")
        return v

    @field_validator("origin")
    def three_coords(cls, v):
        if len(v) != 3:
            raise ValueError("Origin needs three coordinates")
        return v

    @field_validator("grid_lines")
    def increasing_lines(cls, v):
        if v is None:
            return v
        if len(v) != 3:
            raise ValueError("grid_lines needs one entry per axis")
        for lines in v:
            if lines is None:
                continue
            if len(lines) < 2 or any(b <= a for a, b in zip(lines, lines[1:])):
                raise ValueError("Grid lines must be strictly increasing with at least two entries")
        return v
