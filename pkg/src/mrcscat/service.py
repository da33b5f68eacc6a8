"""HTTP front end: the same scenario documents as the CLI, JSON in/out.

The service is computation-only — it returns tables and coefficient
records in the response body instead of writing CSV files.
"""

from __future__ import annotations

import math
from typing import List, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from .examples import builtin_scenarios
from .fields import incident, far_field_amplitude, scattered_field
from .mrc import adaptive_solve
from .runner import (
    VALIDATE_ERR_THRESHOLD,
    SweepInvariantError,
    coefficient_records,
    sweep_rows,
    validate_sphere_scenario,
)
from .scenario import Scenario

__all__ = ["create_app"]


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SolveRequest(_Model):
    scenario: Scenario
    threads: int = Field(default=1, ge=1)


class CoeffRecord(_Model):
    l: int
    m: int
    j: int
    re: float
    im: float


class HistoryEntry(_Model):
    J: int
    L: int
    residual_norm: float


class SolveResponse(_Model):
    converged: Optional[bool]
    L: int
    J: int
    rank: int
    residual_norm: float
    F_star: float
    history: List[HistoryEntry]
    coefficients: List[CoeffRecord]
    diagnostics: dict


class SweepRequest(_Model):
    scenario: Scenario
    L_values: Optional[List[int]] = None
    threads: int = Field(default=1, ge=1)


class SweepRowModel(_Model):
    L: int
    F_star: float
    err_c: Optional[float]
    rank: int
    wall_time: float


class SweepResponse(_Model):
    rows: List[SweepRowModel]


class ValidateSphereRequest(_Model):
    k: float = Field(default=1.0, gt=0)
    alpha: List[float] = Field(default=[1.0, 0.0, 0.0])
    n1: int = 20
    n2: int = 10
    threads: int = Field(default=1, ge=1)


class ValidateSphereResponse(_Model):
    rows: List[SweepRowModel]
    passed: bool
    threshold: float


class FieldEvalRequest(_Model):
    scenario: Scenario
    points: List[List[float]]
    threads: int = Field(default=1, ge=1)


class FieldValue(_Model):
    x: float
    y: float
    z: float
    u_re: float
    u_im: float
    v_re: float
    v_im: float


class FieldEvalResponse(_Model):
    converged: Optional[bool]
    values: List[FieldValue]


class FarfieldEvalRequest(_Model):
    scenario: Scenario
    n_theta: int = Field(default=10, ge=1)
    n_phi: int = Field(default=20, ge=1)
    threads: int = Field(default=1, ge=1)


class FarfieldValue(_Model):
    theta: float
    phi: float
    re: float
    im: float
    abs: float


class FarfieldEvalResponse(_Model):
    converged: Optional[bool]
    values: List[FarfieldValue]


def _plain(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.integer, int)) and not isinstance(v, bool):
            out[k] = int(v)
        elif isinstance(v, (np.floating, float)):
            out[k] = float(v)
        else:
            out[k] = v
    return out


def _solve(scenario: Scenario, threads: int):
    return adaptive_solve(
        scenario.surface(),
        scenario.incident_wave(),
        scenario.solver.epsilon,
        scenario.escalation_plan(threads),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="mrcscat", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.get("/examples")
    def examples():
        return {name: sc.model_dump(exclude_none=True)
                for name, sc in builtin_scenarios().items()}

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest):
        sol = _solve(req.scenario, req.threads)
        return SolveResponse(
            converged=sol.converged,
            L=sol.basis.L,
            J=sol.basis.J,
            rank=int(sol.diagnostics["numerical_rank"]),
            residual_norm=sol.residual_norm,
            F_star=float(sol.F_star),
            history=[HistoryEntry(J=j, L=l, residual_norm=math.sqrt(f))
                     for j, l, f in sol.history],
            coefficients=[CoeffRecord(**rec) for rec in coefficient_records(sol)],
            diagnostics=_plain(sol.diagnostics),
        )

    def _rows(scenario: Scenario, L_values, threads: int) -> List[SweepRowModel]:
        try:
            return [
                SweepRowModel(L=r.L, F_star=r.F_star, err_c=r.err_c,
                              rank=r.rank, wall_time=r.wall_time)
                for r in sweep_rows(scenario, L_values, threads=threads)
            ]
        except SweepInvariantError as e:
            raise HTTPException(status_code=500, detail=str(e)) from e

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        L_values = req.scenario.sweep_L_values(req.L_values)
        return SweepResponse(rows=_rows(req.scenario, L_values, req.threads))

    @app.post("/validate-sphere", response_model=ValidateSphereResponse)
    def validate_sphere(req: ValidateSphereRequest):
        scenario = validate_sphere_scenario(k=req.k, alpha=req.alpha, n1=req.n1, n2=req.n2)
        rows = _rows(scenario, scenario.sweep_L_values(), req.threads)
        bad = [r for r in rows
               if r.L >= 4 and r.err_c is not None and r.err_c > VALIDATE_ERR_THRESHOLD]
        return ValidateSphereResponse(rows=rows, passed=not bad,
                                      threshold=VALIDATE_ERR_THRESHOLD)

    @app.post("/eval/field", response_model=FieldEvalResponse)
    def eval_field(req: FieldEvalRequest):
        for p in req.points:
            if len(p) != 3:
                raise HTTPException(status_code=422, detail="points must be 3-vectors")
        sol = _solve(req.scenario, req.threads)
        pts = np.asarray(req.points, dtype=float)
        v = np.asarray(scattered_field(sol, pts)).reshape(len(pts))
        u = np.asarray(incident(sol.wave, pts)).reshape(len(pts)) + v
        values = [
            FieldValue(x=p[0], y=p[1], z=p[2],
                       u_re=float(uu.real), u_im=float(uu.imag),
                       v_re=float(vv.real), v_im=float(vv.imag))
            for p, uu, vv in zip(pts, u, v)
        ]
        return FieldEvalResponse(converged=sol.converged, values=values)

    @app.post("/eval/farfield", response_model=FarfieldEvalResponse)
    def eval_farfield(req: FarfieldEvalRequest):
        sol = _solve(req.scenario, req.threads)
        values = []
        for i in range(req.n_theta):
            t = (i + 0.5) * math.pi / req.n_theta
            for jj in range(req.n_phi):
                p = jj * 2.0 * math.pi / req.n_phi
                d = (math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t))
                a = far_field_amplitude(sol, d)
                values.append(FarfieldValue(theta=t, phi=p, re=a.real, im=a.imag, abs=abs(a)))
        return FarfieldEvalResponse(converged=sol.converged, values=values)

    return app
