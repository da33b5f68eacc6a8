"""Scenario-driven command line front end.

Subcommands: solve, sweep, validate-sphere, eval, examples, serve.
Exit codes: 0 converged / checks passed, 2 not converged (best-effort
results still written), 1 error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import runner
from .examples import builtin_scenario, builtin_scenarios
from .runner import EXIT_ERROR, EXIT_OK
from .scenario import Scenario, ScenarioError, parse_scenario, scenario_to_yaml

__all__ = ["main", "parse_L_range"]


def parse_L_range(text: str) -> list[int]:
    """'3' -> [3]; '0..7' or '0-7' -> [0..7]; '0,2,5' -> [0,2,5].

    A descending endpoint pair gives the empty range.
    """
    text = text.strip()
    if "," in text:
        return [_nonneg(part) for part in text.split(",") if part.strip()]
    for sep in ("..", "-", ":"):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return list(range(_nonneg(lo), _nonneg(hi) + 1))
    return [_nonneg(text)]


def _nonneg(s: str) -> int:
    n = int(s)
    if n < 0:
        raise ValueError(f"L values must be >= 0, got {n}")
    return n


def _load_scenario(args) -> Scenario:
    path = Path(args.scenario)
    sc = parse_scenario(path.read_text())
    if getattr(args, "scheme", None):
        sc.grid.scheme = args.scheme
    return sc


def _threads(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def _common_flags(p, scenario_required=True):
    if scenario_required:
        p.add_argument("--scenario", required=True, help="scenario document (YAML/JSON)")
    else:
        p.add_argument("--scenario", help="scenario document (YAML/JSON)")
    p.add_argument("--threads", type=int, default=None,
                   help="assembly threads (default: all cores; results are thread-count-invariant)")
    p.add_argument("--paper-format", action="store_true",
                   help="print CSV numbers with 4 decimals instead of 17 significant digits")
    p.add_argument("--scheme", choices=["standard", "paper"], default=None,
                   help="override the scenario's quadrature scheme")
    p.add_argument("--outdir", default=None, help="override the scenario's output directory")


def _cmd_solve(args) -> int:
    sc = _load_scenario(args)
    sol, path, code = runner.run_solve(sc, threads=_threads(args),
                                       paper_format=args.paper_format, directory=args.outdir)
    status = "converged" if sol.converged else "not converged"
    print(f"{status}: L={sol.basis.L} J={sol.basis.J} "
          f"residual={sol.residual_norm:.6g} rank={sol.diagnostics['numerical_rank']}")
    print(f"coefficients written to {path}")
    return code


def _cmd_sweep(args) -> int:
    sc = _load_scenario(args)
    L_values = parse_L_range(args.L) if args.L else sc.sweep_L_values()
    rows, path = runner.run_sweep(sc, L_values, threads=_threads(args),
                                  paper_format=args.paper_format, directory=args.outdir)
    print(f"{len(rows)} rows written to {path}")
    return EXIT_OK


def _cmd_validate_sphere(args) -> int:
    sc = None
    if args.scenario:
        sc = _load_scenario(args)
    rows, path, code = runner.run_validate_sphere(sc, threads=_threads(args),
                                                  paper_format=args.paper_format,
                                                  directory=args.outdir)
    print(f"{'L':>3} {'sqrt_F':>12} {'err_c':>12} {'rank':>5}")
    for r in rows:
        print(f"{r.L:>3} {r.F_star:>12.6g} {r.err_c:>12.6g} {r.rank:>5}")
    verdict = "ok" if code == EXIT_OK else f"err(c) above {runner.VALIDATE_ERR_THRESHOLD} at L>=4"
    print(f"table written to {path}; {verdict}")
    return code


def _cmd_eval(args) -> int:
    sc = _load_scenario(args)
    sol, paths, code = runner.run_eval(sc, threads=_threads(args),
                                       paper_format=args.paper_format, directory=args.outdir)
    status = "converged" if sol.converged else "not converged"
    written = ", ".join(str(p) for p in paths.values())
    print(f"{status}: residual={sol.residual_norm:.6g}; wrote {written}")
    return code


def _cmd_examples(args) -> int:
    table = builtin_scenarios()
    if args.name:
        print(scenario_to_yaml(builtin_scenario(args.name)), end="")
        return EXIT_OK
    if args.write:
        outdir = Path(args.write)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, sc in table.items():
            (outdir / f"{name}.yaml").write_text(scenario_to_yaml(sc))
        print(f"wrote {', '.join(n + '.yaml' for n in table)} to {outdir}")
        return EXIT_OK
    for name, sc in table.items():
        print(f"# {name}")
        print(scenario_to_yaml(sc), end="")
        print("---")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="mrcscat",
                                 description="Obstacle scattering by boundary-residual "
                                             "minimization over outgoing wave expansions")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="adaptive solve of one scenario")
    _common_flags(p)
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("sweep", help="residual table over a range of L")
    _common_flags(p)
    p.add_argument("--L", default=None, help="L range, e.g. 0..7 or 3 or 0,2,4")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("validate-sphere", help="reproduce the analytic-sphere table")
    _common_flags(p, scenario_required=False)
    p.set_defaults(fn=_cmd_validate_sphere)

    p = sub.add_parser("eval", help="solve, then tabulate near and far fields")
    _common_flags(p)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("examples", help="emit the built-in example scenarios")
    p.add_argument("--name", choices=sorted(builtin_scenarios()), default=None)
    p.add_argument("--write", default=None, metavar="DIR",
                   help="write one YAML file per example into DIR")
    p.set_defaults(fn=_cmd_examples)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=_cmd_serve)

    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (ScenarioError, runner.SweepInvariantError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, KeyError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
