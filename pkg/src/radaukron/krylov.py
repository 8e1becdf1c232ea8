"""Right-preconditioned GMRES and the implicit time stepping built on it.

Right preconditioning keeps the Givens-rotation residual estimate equal to
the true unpreconditioned residual, so the recorded history is directly
meaningful.  The Arnoldi loop uses modified Gram-Schmidt with a single
conditional reorthogonalization pass, which is enough to hold orthogonality
at the tolerances used here.
"""

from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from .kron import assemble_rhs, build_preconditioner, prec_apply, stage_apply

_REORTH_THRESHOLD = 1e-8


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one GMRES solve."""

    converged: bool
    iterations: int
    residual_history: np.ndarray   # relative residual after each iteration
    final_residual: float          # explicitly recomputed |b - A x| / |b|
    solution: np.ndarray


def gmres(system, prec_state, rhs, tol=1e-10, max_iter=200, restart=None,
          x0=None):
    """Solve the stage system with right-preconditioned GMRES.

    prec_state=None runs unpreconditioned.  The residual history tracks the
    true system residual (a property of right preconditioning).
    Non-convergence is reported through the SolveReport, never raised.
    """
    apply_prec = None if prec_state is None else \
        (lambda v: prec_apply(prec_state, v))
    return gmres_operator(lambda v: stage_apply(system, v), rhs,
                          apply_prec=apply_prec, tol=tol, max_iter=max_iter,
                          restart=restart, x0=x0)


def gmres_operator(apply_A, b, apply_prec=None, tol=1e-10, max_iter=200,
                   restart=None, x0=None):
    """Generic GMRES on vector callables apply_A and (optional) apply_prec."""
    b = np.asarray(b, dtype=float)
    norm_b = float(np.linalg.norm(b))
    if apply_prec is None:
        apply_prec = lambda v: v
    if norm_b == 0.0:
        x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float).copy()
        return SolveReport(converged=True, iterations=0,
                           residual_history=np.array([0.0]),
                           final_residual=0.0, solution=x)

    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float).copy()
    history: List[float] = []
    total = 0
    converged = False
    cycle_len = max_iter if restart is None else min(restart, max_iter)

    while total < max_iter and not converged:
        steps = min(cycle_len, max_iter - total)
        x, took, converged, seg = _gmres_cycle(
            apply_A, apply_prec, b, x, norm_b, tol, steps)
        history.extend(seg)
        total += took
        if took == 0:
            break

    final = float(np.linalg.norm(b - apply_A(x)) / norm_b)
    converged = converged or final <= tol
    return SolveReport(converged=converged, iterations=total,
                       residual_history=np.array(history),
                       final_residual=final, solution=x)


def _gmres_cycle(apply_A, apply_prec, b, x0, norm_b, tol, steps):
    """One Arnoldi cycle; returns (x, iterations, converged, residual_history)."""
    r0 = b - apply_A(x0)
    beta = float(np.linalg.norm(r0))
    if beta / norm_b <= tol:
        return x0, 0, True, []
    if steps == 0:
        return x0, 0, False, []

    V = [r0 / beta]
    H = np.zeros((steps + 1, steps))
    cs = np.zeros(steps)
    sn = np.zeros(steps)
    g = np.zeros(steps + 1)
    g[0] = beta
    history = []
    k = 0
    converged = False

    for j in range(steps):
        w = apply_A(apply_prec(V[j]))
        for i in range(j + 1):
            H[i, j] = V[i] @ w
            w = w - H[i, j] * V[i]
        # one conditional reorthogonalization pass
        corr = np.array([Vi @ w for Vi in V[:j + 1]])
        if np.linalg.norm(corr) > _REORTH_THRESHOLD * np.linalg.norm(w):
            for i in range(j + 1):
                w = w - corr[i] * V[i]
                H[i, j] += corr[i]
        h_next = float(np.linalg.norm(w))
        H[j + 1, j] = h_next

        # apply the accumulated Givens rotations to the new column
        for i in range(j):
            t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
            H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
            H[i, j] = t
        denom = float(np.hypot(H[j, j], H[j + 1, j]))
        if denom == 0.0:        # zero projected column: nothing new to add
            k = j
            break
        cs[j] = H[j, j] / denom
        sn[j] = H[j + 1, j] / denom
        H[j, j] = denom
        H[j + 1, j] = 0.0
        g[j + 1] = -sn[j] * g[j]
        g[j] = cs[j] * g[j]

        rel = abs(g[j + 1]) / norm_b
        history.append(rel)
        k = j + 1
        if rel <= tol:
            converged = True
            break
        if h_next == 0.0:
            # happy breakdown: the Krylov space became invariant, so the
            # projected solve below is exact
            converged = True
            break
        if k < steps:
            V.append(w / h_next)

    if k == 0:
        return x0, 0, converged, history

    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        y[i] = (g[i] - H[i, i + 1:k] @ y[i + 1:k]) / H[i, i]
    update = np.zeros_like(b)
    for i in range(k):
        update += y[i] * V[i]
    x = x0 + apply_prec(update)
    return x, k, converged, history


@dataclass(frozen=True)
class StepReport:
    """State and solver diagnostics after one implicit step."""

    t: float
    u: np.ndarray
    stages: np.ndarray       # stage derivative vectors, shape (q, n)
    solve: SolveReport


def _retimed(system, tau):
    """The same stage system with a different step size (factors are reused)."""
    if tau is None or tau == system.tau:
        return system
    if tau <= 0.0:
        raise ValueError(f"time step must be positive, got {tau}")
    return replace(system, tau=float(tau))


def _step(system, prec_state, u_n, f_eval, t_n, tol, max_iter):
    """One implicit step; returns a StepReport."""
    tab = system.tableau
    q, n, tau = system.q, system.n, system.tau
    u_n = np.asarray(u_n, dtype=float)
    if f_eval is None:
        G = np.zeros((q, n))
    else:
        G = np.stack([np.asarray(f_eval(t_n + ci * tau), dtype=float)
                      for ci in tab.c])
    rhs = assemble_rhs(system, G, u_n)
    rep = gmres(system, prec_state, rhs, tol=tol, max_iter=max_iter)
    stages = rep.solution.reshape(q, n)
    u_next = u_n + tau * (tab.b @ stages)
    return StepReport(t=t_n + tau, u=u_next, stages=stages, solve=rep)


def irk_step(system, u_n, f_eval=None, t_n=0.0, tau=None, prec_state=None,
             tol=1e-12, max_iter=200):
    """Advance M u' = -K u + g(t) by one implicit step; returns u_{n+1}.

    f_eval(t) must return the length-n source vector g(t) (None means
    g = 0).  tau defaults to the step size the system was built with; passing
    a different value re-times the system (and requires prec_state=None so
    the preconditioner is rebuilt to match).
    """
    sys_t = _retimed(system, tau)
    if prec_state is None:
        prec_state = build_preconditioner(sys_t)
    elif sys_t is not system:
        raise ValueError(
            "a preconditioner built for a different time step cannot be "
            "reused; pass prec_state=None to rebuild")
    return _step(sys_t, prec_state, u_n, f_eval, t_n, tol, max_iter).u


def integrate(system, u0, t0, t_end, steps, f_eval=None, tol=1e-12,
              max_iter=200, solver_kind=None):
    """Integrate M u' = -K u + g over [t0, t_end] with uniform steps.

    The step size is (t_end - t0)/steps; the system is re-timed to it if
    needed and the preconditioner is built once.  Returns
    (u_final, [StepReport per step]).
    """
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    tau = (float(t_end) - float(t0)) / steps
    sys_t = _retimed(system, tau)
    prec_state = build_preconditioner(sys_t, solver_kind=solver_kind)
    u = np.asarray(u0, dtype=float).copy()
    t = float(t0)
    reports = []
    for _ in range(steps):
        rep = _step(sys_t, prec_state, u, f_eval, t, tol, max_iter)
        reports.append(rep)
        u, t = rep.u, rep.t
    return u, reports
