"""Scenario documents: validated run configuration.

A scenario is a YAML/JSON mapping with sections geometry, wave, grid,
basis, solver, outputs and (optionally) eval.  Unknown keys anywhere are
rejected.  The same models double as the request bodies of the HTTP
service, so the CLI and the service accept identical documents.
"""

from __future__ import annotations

import warnings
from typing import List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .geometry import build_surface
from .mrc import EscalationPlan, IncidentWave

__all__ = ["Scenario", "ScenarioError", "parse_scenario", "scenario_to_yaml"]


class ScenarioError(ValueError):
    """Configuration rejected; message names the offending field(s)."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


Vec3 = List[float]


def _check_vec3(v, where: str):
    if len(v) != 3:
        raise ValueError(f"{where} must have exactly 3 components")
    return [float(x) for x in v]


class GeometryModel(_Model):
    type: Literal["sphere", "ellipsoid", "cube", "dumbbell", "patches"]
    # sphere
    radius: Optional[float] = None
    # ellipsoid
    b: Optional[float] = None
    # cube
    half_side: Optional[float] = None
    # dumbbell
    sphere_radius: Optional[float] = None
    center_offset: Optional[float] = None
    neck_radius: Optional[float] = None
    neck_halfheight: Optional[float] = None
    trim: Optional[bool] = None
    # custom
    patches: Optional[list] = None

    _FIELDS_BY_TYPE = {
        "sphere": {"radius"},
        "ellipsoid": {"b"},
        "cube": {"half_side"},
        "dumbbell": {"sphere_radius", "center_offset", "neck_radius", "neck_halfheight", "trim"},
        "patches": {"patches"},
    }

    @model_validator(mode="after")
    def _only_matching_fields(self):
        allowed = self._FIELDS_BY_TYPE[self.type]
        for name in ("radius", "b", "half_side", "sphere_radius", "center_offset",
                     "neck_radius", "neck_halfheight", "trim", "patches"):
            if getattr(self, name) is not None and name not in allowed:
                raise ValueError(f"geometry.{name} does not apply to type {self.type!r}")
        if self.type == "ellipsoid" and self.b is None:
            raise ValueError("geometry.b is required for type 'ellipsoid'")
        if self.type == "patches" and not self.patches:
            raise ValueError("geometry.patches must be a non-empty list")
        return self

    def descriptor(self) -> dict:
        d = {"type": self.type}
        for name in self._FIELDS_BY_TYPE[self.type]:
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        return d

    def patch_count(self) -> int:
        if self.type == "cube":
            return 6
        if self.type == "dumbbell":
            return 3
        if self.type == "patches":
            return len(self.patches)
        return 1


class WaveModel(_Model):
    k: float = Field(gt=0)
    alpha: Vec3 = Field(default=[1.0, 0.0, 0.0])

    @field_validator("alpha")
    @classmethod
    def _normalize(cls, v):
        v = _check_vec3(v, "wave.alpha")
        n = float(np.linalg.norm(v))
        if n == 0:
            raise ValueError("wave.alpha must be a nonzero vector")
        if abs(n - 1.0) > 1e-12:
            warnings.warn(f"wave.alpha normalized from norm {n:.6g} to a unit vector")
            v = [x / n for x in v]
        return v


def _check_even(n, name):
    if n < 2 or n % 2:
        raise ValueError(f"{name} must be even and >= 2")


class GridModel(_Model):
    n1: int | List[int] = 20
    n2: int | List[int] = 10
    scheme: Literal["standard", "paper"] = "standard"

    @field_validator("n1")
    @classmethod
    def _even1(cls, v):
        for n in [v] if isinstance(v, int) else v:
            _check_even(n, "grid.n1")
        return v

    @field_validator("n2")
    @classmethod
    def _even2(cls, v):
        for n in [v] if isinstance(v, int) else v:
            _check_even(n, "grid.n2")
        return v


class BasisModel(_Model):
    L: int = Field(default=7, ge=0)
    L_start: int = Field(default=0, ge=0)
    L_max: Optional[int] = Field(default=None, ge=0)
    centers: List[Vec3] = Field(default=[[0.0, 0.0, 0.0]])
    center_sets: Optional[List[List[Vec3]]] = None

    @field_validator("centers")
    @classmethod
    def _vec3s(cls, v):
        if not v:
            raise ValueError("basis.centers must be non-empty")
        return [_check_vec3(c, "basis.centers[*]") for c in v]

    @field_validator("center_sets")
    @classmethod
    def _sets(cls, v):
        if v is None:
            return v
        if not v:
            raise ValueError("basis.center_sets must be non-empty when given")
        return [[_check_vec3(c, "basis.center_sets[*][*]") for c in s] for s in v]

    @model_validator(mode="after")
    def _ranges(self):
        if self.L_max is not None and self.L_start > self.L_max:
            raise ValueError("basis.L_start must not exceed basis.L_max")
        return self


class SolverModel(_Model):
    epsilon: float = Field(default=0.01, gt=0)
    rank_rtol: float = Field(default=0.0, ge=0, lt=1)
    epsilon_convention: Literal["norm", "norm_squared"] = "norm"
    equilibrate: bool = True
    precision: Literal["double", "extended"] = "double"


class OutputsModel(_Model):
    directory: str = "."
    sweep: str = "sweep.csv"
    coefficients: str = "coeffs.csv"
    field: str = "field.csv"
    farfield: str = "farfield.csv"


class FarfieldGridModel(_Model):
    n_theta: int = Field(default=10, ge=1)
    n_phi: int = Field(default=20, ge=1)


class EvalModel(_Model):
    field_points: Optional[List[Vec3]] = None
    farfield: Optional[FarfieldGridModel] = None

    @field_validator("field_points")
    @classmethod
    def _pts(cls, v):
        if v is None:
            return v
        return [_check_vec3(p, "eval.field_points[*]") for p in v]


class Scenario(_Model):
    geometry: GeometryModel
    wave: WaveModel
    grid: GridModel = GridModel()
    basis: BasisModel = BasisModel()
    solver: SolverModel = SolverModel()
    outputs: OutputsModel = OutputsModel()
    eval: Optional[EvalModel] = None

    @model_validator(mode="after")
    def _per_patch_lists_match(self):
        count = self.geometry.patch_count()
        for name in ("n1", "n2"):
            v = getattr(self.grid, name)
            if isinstance(v, list) and len(v) != count:
                raise ValueError(
                    f"grid.{name} lists {len(v)} entries but the geometry has {count} patches"
                )
        return self

    # ---- plumbing toward the solver layer ----

    def surface(self):
        return build_surface(self.geometry.descriptor())

    def incident_wave(self) -> IncidentWave:
        return IncidentWave(k=self.wave.k, alpha=np.asarray(self.wave.alpha))

    def center_sets(self) -> list:
        if self.basis.center_sets is not None:
            return [np.asarray(s, dtype=float) for s in self.basis.center_sets]
        return [np.asarray(self.basis.centers, dtype=float)]

    def sweep_L_values(self, L_range=None) -> list[int]:
        if L_range is not None:
            return list(L_range)
        if self.basis.L_max is not None:
            return list(range(self.basis.L_start, self.basis.L_max + 1))
        return list(range(self.basis.L_start, self.basis.L + 1))

    def escalation_plan(self, threads: int = 1) -> EscalationPlan:
        L_max = self.basis.L_max if self.basis.L_max is not None else self.basis.L
        n1 = self.grid.n1 if isinstance(self.grid.n1, int) else tuple(self.grid.n1)
        n2 = self.grid.n2 if isinstance(self.grid.n2, int) else tuple(self.grid.n2)
        return EscalationPlan(
            L_start=self.basis.L_start,
            L_max=L_max,
            center_sets=tuple(tuple(map(tuple, s)) for s in self.center_sets()),
            n1=n1,
            n2=n2,
            scheme=self.grid.scheme,
            rank_rtol=self.solver.rank_rtol,
            equilibrate=self.solver.equilibrate,
            precision=self.solver.precision,
            threads=threads,
            epsilon_convention=self.solver.epsilon_convention,
        )


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document (YAML or JSON)."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ScenarioError(f"scenario parse error: {e}") from e
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping of sections")
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        lines = []
        for err in e.errors():
            loc = ".".join(str(p) for p in err["loc"])
            lines.append(f"{loc}: {err['msg']}")
        raise ScenarioError("invalid scenario: " + "; ".join(lines)) from e


def scenario_to_yaml(sc: Scenario) -> str:
    return yaml.safe_dump(sc.model_dump(exclude_none=True), sort_keys=False)
