"""Command-line interface: experiments and exports over the library pipeline.

Every command is deterministic for a fixed set of flags, writes files
atomically (temp + rename), and renders floating-point values with 17
significant digits so that output files round-trip exactly.  Exit codes:
0 success, 2 usage problem, 3 numerical failure.
"""

import argparse
import os
import sys
import tempfile

import numpy as np
import scipy.io
import scipy.sparse as sp

from . import factor as factor_mod
from . import fem as fem_mod
from . import kron as kron_mod
from . import krylov as krylov_mod
from . import spectrum as spectrum_mod
from . import tableau as tableau_mod
from .errors import NumericalError

USAGE_EXIT = 2
NUMERICAL_EXIT = 3


# ---------------------------------------------------------------------------
# formatting and atomic output
# ---------------------------------------------------------------------------

def _fmt(x):
    """17-significant-digit rendering; exact for binary64 round trips."""
    return format(float(x), ".17g")


def _to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _json_text(obj, indent=0):
    """Minimal JSON serializer emitting floats with 17 significant digits."""
    pad = " " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{pad}  "{k}": {_json_text(v, indent + 2)}' for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        flat = all(not isinstance(v, (dict, list)) for v in obj)
        if flat:
            return "[" + ", ".join(_json_text(v) for v in obj) + "]"
        items = ",\n".join(f"{pad}  {_json_text(v, indent + 2)}" for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, float):
        return _fmt(obj)
    if isinstance(obj, int):
        return str(obj)
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render_json(obj):
    return _json_text(_to_jsonable(obj)) + "\n"


def _render_csv(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            _fmt(v) if isinstance(v, (float, np.floating)) else str(v)
            for v in row))
    return "\n".join(lines) + "\n"


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text):
    out = getattr(args, "out", None)
    if out:
        _write_atomic(out, text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# shared argument plumbing
# ---------------------------------------------------------------------------

def _add_grid_args(p, bc_default="full"):
    p.add_argument("--n-side", type=int, required=True,
                   help="nodes per side of the square grid (n = n_side^2)")
    p.add_argument("--bc", choices=["full", "dirichlet"], default=bc_default,
                   help="boundary handling: keep all nodes or restrict to "
                        "the interior")
    p.add_argument("--tau-rule", default="matched",
                   help="time-step rule: 'matched' (tau^(2q-1) = h^2), "
                        "'c<C>' (tau = C h^2), or 'explicit:<value>'")


def _bc_mode(args):
    return "dirichlet_interior" if args.bc == "dirichlet" else "full"


def _build_system(args):
    grid = fem_mod.assemble_q1(args.n_side, bc_mode=_bc_mode(args))
    return kron_mod.stage_system_from_grid(args.stages, grid, args.tau_rule)


def _parse_eps_list(text):
    eps = [float(tok) for tok in text.split(",") if tok.strip()]
    if not eps or any(e <= 0.0 for e in eps):
        raise ValueError("eps list must contain positive values")
    return eps


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_tableau(args):
    tab = tableau_mod.radau_tableau(args.stages)
    if args.format == "json":
        payload = {"q": tab.q, "A": [list(map(float, row)) for row in tab.A],
                   "b": list(map(float, tab.b)), "c": list(map(float, tab.c))}
        _emit(args, _render_json(payload))
    elif args.format == "csv":
        rows = [["c"] + list(tab.c), ["b"] + list(tab.b)]
        rows += [[f"A{i + 1}"] + list(tab.A[i]) for i in range(tab.q)]
        _emit(args, _render_csv(["row"] + [f"col{j + 1}" for j in range(tab.q)],
                                rows))
    else:
        lines = [f"q = {tab.q}", "c | A", "-" * 40]
        for i in range(tab.q):
            lines.append(_fmt(tab.c[i]) + " | "
                         + "  ".join(_fmt(v) for v in tab.A[i]))
        lines.append("-" * 40)
        lines.append("b:  " + "  ".join(_fmt(v) for v in tab.b))
        rep = tableau_mod.verify_order_conditions(tab)
        lines.append(f"max order-condition residual: {_fmt(rep.max_residual)}")
        _emit(args, "\n".join(lines) + "\n")
    return 0


def _cmd_factor(args):
    fact = factor_mod.factorize(args.stages)
    payload = {
        "q": fact.q,
        "Ainv": fact.Ainv, "L": fact.L, "U": fact.U, "Uhat": fact.Uhat,
        "Linv": fact.Linv, "Lambda": fact.Lambda, "T": fact.T,
        "Tinv": fact.Tinv,
        "norms": {
            "uhat_2": float(np.linalg.norm(fact.Uhat, 2)),
            "uhat_fro": float(np.linalg.norm(fact.Uhat, "fro")),
        },
    }
    _emit(args, _render_json(payload))
    return 0


def _cmd_fem(args):
    grid = fem_mod.assemble_q1(args.n_side, bc_mode=_bc_mode(args))
    if args.emit == "stencils":
        payload = {
            "n_side": grid.n_side, "h": grid.h, "bc_mode": grid.bc_mode,
            "stiffness_stencil": fem_mod.STIFFNESS_STENCIL,
            "mass_stencil_over_h2": fem_mod.MASS_STENCIL,
        }
        _emit(args, _render_json(payload))
    elif args.emit == "eigs":
        tau = kron_mod.tau_from_rule(args.tau_rule, grid.h, args.stages)
        mu = fem_mod.zt_eigenvalues(grid, tau)
        _emit(args, _render_csv(["index", "mu"],
                                [(i, m) for i, m in enumerate(mu)]))
    else:   # matrix-market
        prefix = args.out or f"q1_{grid.bc_mode}_{grid.n_side}"
        for name, mat in (("M", grid.M), ("K", grid.K)):
            path = f"{prefix}_{name}.mtx"
            scipy.io.mmwrite(path, sp.coo_matrix(mat))
            print(f"wrote {path}")
    return 0


def _cmd_solve(args):
    system = _build_system(args)
    prec = kron_mod.build_preconditioner(system)
    # deterministic manufactured solution: entries sin(1), sin(2), ...
    x_true = np.sin(np.arange(1, system.dim + 1, dtype=float))
    rhs = kron_mod.stage_apply(system, x_true)
    report = krylov_mod.gmres(system, prec, rhs, tol=args.tol,
                              max_iter=args.max_iter, restart=args.restart)
    err = float(np.linalg.norm(report.solution - x_true)
                / np.linalg.norm(x_true))
    payload = {
        "q": system.q, "n": system.n, "tau": system.tau,
        "h": system.grid.h, "bc_mode": system.grid.bc_mode,
        "solver_kind": prec.solver_kind,
        "converged": bool(report.converged),
        "iterations": int(report.iterations),
        "final_residual": report.final_residual,
        "solution_error": err,
        "residual_history": list(map(float, report.residual_history)),
    }
    _emit(args, _render_json(payload))
    return 0 if report.converged else NUMERICAL_EXIT


def _cmd_spectrum(args):
    system = _build_system(args)
    mode = "dense_oracle" if args.mode == "dense" else "structured"
    report = spectrum_mod.preconditioned_spectrum(system, mode=mode)
    rows = []
    if mode == "structured":
        for j, m in enumerate(report.mu):
            rows.append((1.0, 0.0, 0, float(m)))
            for i in range(system.q - 1):
                lam = 1.0 + report.branches[j, i]
                rows.append((float(lam.real), float(lam.imag), i + 1, float(m)))
    else:
        for lam in report.eigenvalues:
            rows.append((float(lam.real), float(lam.imag), -1, float("nan")))
    _emit(args, _render_csv(["re", "im", "branch_index", "mu"], rows))
    return 0


def _cmd_radius(args):
    grid_spec = (args.mu_min, args.mu_max, args.points)
    est = spectrum_mod.radius_estimate(args.stages, grid_spec)
    _emit(args, _render_json({"q": est.q, "radius": est.radius,
                              "mu_star": est.mu_star}))
    return 0


def _cmd_test1(args):
    eps_list = _parse_eps_list(args.eps)
    system = _build_system(args)
    report = spectrum_mod.preconditioned_spectrum(system, mode="structured")
    rows = spectrum_mod.test1_counts(report, eps_list)
    if args.format == "json":
        payload = {
            "q": system.q, "n": system.n, "dim": system.dim,
            "tau": system.tau, "h": system.grid.h,
            "counts": [{"eps": e, "N": N, "r": r} for e, N, r in rows],
        }
        _emit(args, _render_json(payload))
    else:
        _emit(args, _render_csv(["eps", "N", "r"], rows))
    return 0


def _cmd_test2(args):
    system = _build_system(args)
    E1, E2 = spectrum_mod.test2_vectors(system)
    rows = [(i, float(a), float(b)) for i, (a, b) in enumerate(zip(E1, E2))]
    _emit(args, _render_csv(["index", "E1", "E2"], rows))
    return 0


def _cmd_distribution(args):
    n_sides = [int(tok) for tok in args.n_sides.split(",") if tok.strip()]
    if len(n_sides) < 2:
        raise ValueError("--n-sides needs at least two comma-separated sizes")
    if args.rule == "matched":
        tau_rule = "matched"
    else:
        tau_rule = f"c{args.constant}"
    systems = []
    for n_side in n_sides:
        grid = fem_mod.assemble_q1(n_side, bc_mode=_bc_mode(args))
        systems.append(kron_mod.stage_system_from_grid(
            args.stages, grid, tau_rule))
    summary = spectrum_mod.distribution_check(systems, args.rule, eps=args.eps)
    payload = {
        "rule": summary.rule, "eps": summary.eps,
        "rows": [{"h": h, "tau": t, "value": v} for h, t, v in summary.rows],
        "satisfied": summary.satisfied,
    }
    _emit(args, _render_json(payload))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="radaukron",
        description="Radau IIA stage systems, Kronecker preconditioning, and "
                    "spectral analysis of the preconditioned operator.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tableau", help="emit Runge-Kutta coefficients")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--format", choices=["json", "csv", "pretty"],
                   default="pretty")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_tableau)

    p = sub.add_parser("factor", help="emit the triangular factorization")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--format", choices=["json"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_factor)

    p = sub.add_parser("fem", help="assemble grid operators and exports")
    p.add_argument("--n-side", type=int, required=True)
    p.add_argument("--bc", choices=["full", "dirichlet"], default="full")
    p.add_argument("--emit", choices=["stencils", "eigs", "matrix-market"],
                   default="stencils")
    p.add_argument("--stages", type=int, default=2,
                   help="stage count used only to resolve --tau-rule")
    p.add_argument("--tau-rule", default="explicit:1",
                   help="tau for --emit eigs (eigenvalues of tau M^-1 K)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_fem)

    p = sub.add_parser("solve", help="GMRES solve of a manufactured system")
    p.add_argument("--stages", type=int, required=True)
    _add_grid_args(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--restart", type=int, default=None)
    p.add_argument("--report", choices=["json"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("spectrum", help="eigenvalues of the preconditioned "
                                        "operator")
    p.add_argument("--stages", type=int, required=True)
    _add_grid_args(p)
    p.add_argument("--mode", choices=["structured", "dense"],
                   default="structured")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("radius", help="cluster radius sup_mu max |branch|")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--mu-min", type=float, default=spectrum_mod.DEFAULT_MU_GRID[0])
    p.add_argument("--mu-max", type=float, default=spectrum_mod.DEFAULT_MU_GRID[1])
    p.add_argument("--points", type=int, default=spectrum_mod.DEFAULT_MU_GRID[2])
    p.add_argument("--out")
    p.set_defaults(func=_cmd_radius)

    p = sub.add_parser("test1", help="count eigenvalues within eps of 1")
    p.add_argument("--stages", type=int, required=True)
    _add_grid_args(p)
    p.add_argument("--eps", required=True,
                   help="comma-separated radii, e.g. 0.2,0.1,0.05")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_test1)

    p = sub.add_parser("test2", help="sorted eigenvalue magnitudes vs the "
                                     "symbol prediction")
    p.add_argument("--stages", type=int, required=True)
    _add_grid_args(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_test2)

    p = sub.add_parser("distribution", help="distribution law across a "
                                            "refinement series")
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--rule", choices=["matched", "c_constant"], required=True)
    p.add_argument("--n-sides", required=True,
                   help="comma-separated grid sizes, coarse to fine")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--constant", type=float, default=10.0,
                   help="C in tau = C h^2 (c_constant rule only)")
    p.add_argument("--bc", choices=["full", "dirichlet"], default="full")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_distribution)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT


if __name__ == "__main__":
    sys.exit(main())
