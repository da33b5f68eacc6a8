"""Built-in example scenarios for the four reference obstacles."""

from __future__ import annotations

from .scenario import Scenario

__all__ = ["builtin_scenarios", "builtin_scenario"]

_AXIS_CENTERS_02 = [
    [0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0], [-0.2, 0.0, 0.0],
    [0.0, 0.2, 0.0], [0.0, -0.2, 0.0],
    [0.0, 0.0, 0.2], [0.0, 0.0, -0.2],
]

_AXIS_CENTERS_05 = [
    [0.0, 0.0, 0.0],
    [0.5, 0.0, 0.0], [-0.5, 0.0, 0.0],
    [0.0, 0.5, 0.0], [0.0, -0.5, 0.0],
    [0.0, 0.0, 0.5], [0.0, 0.0, -0.5],
]

_Z_CENTERS_11 = [[0.0, 0.0, z] for z in
                 (0.0, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3, 0.4, -0.4, 0.5, -0.5)]


def builtin_scenarios() -> dict[str, Scenario]:
    """The four reference scenarios, keyed by obstacle name."""
    sphere = Scenario.model_validate({
        "geometry": {"type": "sphere", "radius": 1.0},
        "wave": {"k": 1.0, "alpha": [1.0, 0.0, 0.0]},
        "grid": {"n1": 20, "n2": 10, "scheme": "standard"},
        "basis": {"L": 7},
        "solver": {"epsilon": 0.02},
    })
    ellipsoid = Scenario.model_validate({
        "geometry": {"type": "ellipsoid", "b": 2.0},
        "wave": {"k": 1.0, "alpha": [1.0, 0.0, 0.0]},
        "grid": {"n1": 20, "n2": 10, "scheme": "paper"},
        "basis": {"L": 4, "L_max": 4, "centers": _AXIS_CENTERS_05},
        "solver": {"epsilon": 0.01},
    })
    cube = Scenario.model_validate({
        "geometry": {"type": "cube", "half_side": 1.0},
        "wave": {"k": 1.0, "alpha": [1.0, 0.0, 0.0]},
        "grid": {"n1": 10, "n2": 10, "scheme": "paper"},
        "basis": {"L": 8, "centers": _AXIS_CENTERS_02},
        "solver": {"epsilon": 0.01, "precision": "extended"},
    })
    dumbbell = Scenario.model_validate({
        # trim: the neck cylinder lies inside the two balls; only the outer
        # union boundary should carry quadrature weight, otherwise the
        # residual has a fictitious floor at the swallowed interior nodes
        "geometry": {"type": "dumbbell", "trim": True},
        "wave": {"k": 1.0, "alpha": [1.0, 0.0, 0.0]},
        "grid": {"n1": 20, "n2": 10, "scheme": "paper"},
        "basis": {"L": 7, "centers": _Z_CENTERS_11},
        "solver": {"epsilon": 0.01, "precision": "extended"},
    })
    return {"sphere": sphere, "ellipsoid": ellipsoid, "cube": cube, "dumbbell": dumbbell}


def builtin_scenario(name: str) -> Scenario:
    table = builtin_scenarios()
    try:
        return table[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {sorted(table)}") from None
