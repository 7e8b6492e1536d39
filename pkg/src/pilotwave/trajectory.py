"""Bohmian trajectories: closed forms and the guidance-equation oracle.

The closed forms scale the initial position by ``sqrt(g_minus(t)/g_minus(t0))``
and, for coherent states, add the displacement
``alpha sqrt(2 g_minus/omegaI) (cos theta - 1)``.  The oracle integrates
``q' = (1/M) dS/dq`` together with ``theta' = 1/(2 M |f|^2)`` and never
touches the closed forms.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError, PilotWaveError
from .invariant import InvariantFrame
from .wavefunction import QuantumState, quantum_potential

CLOSED_FORM = "closed-form"
GUIDANCE_ODE = "guidance-ode"


@dataclass(eq=False)
class TrajectoryPath:
    """Samples ``(t, q, p = M q', S, Q)`` of one trajectory.

    ``Q`` is NaN where the trajectory sits on a node of ``R``.  A failed
    ensemble member carries empty arrays and an ``error`` message.
    """

    state: QuantumState
    q0: float
    method: str
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray = field(repr=False)
    S: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def samples(self):
        return list(zip(self.t, self.q, self.p, self.S, self.Q))


def output_times(t0: float, t_end: float, dt: float) -> np.ndarray:
    """Uniform grid ``t0, t0 + dt, ...`` not exceeding ``t_end``."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    n = int(math.floor((t_end - t0) / dt + 1e-9))
    return t0 + dt * np.arange(n + 1)


def closed_form_eigen(frame: InvariantFrame, q0, t):
    """``q0 sqrt(g_minus(t) / g_minus(t0))``."""
    return q0 * np.sqrt(frame.g_minus(t) / frame.g_minus(frame.t0))


def closed_form_coherent(frame: InvariantFrame, alpha, q0, t):
    if isinstance(alpha, complex):
        raise TypeError("closed_form_coherent needs a real alpha")
    gm = frame.g_minus(t)
    return (closed_form_eigen(frame, q0, t)
            + alpha * np.sqrt(2.0 * gm / frame.omegaI) * (np.cos(frame.theta(t)) - 1.0))


def _fill_path(state, q0, method, t, q):
    model = state.frame.model
    p = model.M(t) * state.dSdq(q, t)
    S = state.S(q, t)
    Q = np.array([float(quantum_potential(state, qi, ti, on_node="nan")) for qi, ti in zip(q, t)])
    return TrajectoryPath(state, float(q0), method, t, q, p, S, Q)


def closed_form_path(state: QuantumState, q0, times) -> TrajectoryPath:
    times = np.asarray(times, dtype=float)
    if state.alpha is None:
        q = closed_form_eigen(state.frame, q0, times)
    else:
        q = closed_form_coherent(state.frame, state.alpha, q0, times)
    return _fill_path(state, q0, CLOSED_FORM, times, np.asarray(q, dtype=float))


def guidance_integrate(state: QuantumState, q0, t_span, rtol=1e-10, dt_out=None, t_eval=None) -> TrajectoryPath:
    """Integrate the guidance equation from ``q0`` at ``t_span[0]``.

    Samples are taken from the dense output at ``t_eval`` (or on a uniform
    grid of spacing ``dt_out``; default 200 intervals).
    """
    if not 1e-12 <= rtol <= 1e-6:
        raise ValueError(f"rtol must lie in [1e-12, 1e-6], got {rtol}")
    t_start, t_stop = map(float, t_span)
    if t_eval is None:
        t_eval = output_times(t_start, t_stop, dt_out if dt_out else (t_stop - t_start) / 200)
    t_eval = np.asarray(t_eval, dtype=float)
    frame = state.frame
    model = frame.model

    def rhs(t, y):
        q, th = y
        return [float(state.dSdq(q, t, theta=th)) / float(model.M(t)), float(frame.theta_rate(t))]

    scale = max(abs(q0), float(state.width(t_start)))
    y0 = [float(q0), float(frame.theta(t_start))]
    sol = solve_ivp(rhs, (t_start, t_stop), y0, method="DOP853", rtol=rtol,
                    atol=[1e-2 * rtol * scale, 1e-2 * rtol], dense_output=True)
    if sol.status != 0:
        raise IntegrationError(f"guidance integration failed: {sol.message}", t_last=float(sol.t[-1]))
    q = sol.sol(t_eval)[0]
    if t_eval.size and t_eval[0] == t_start:
        q[0] = q0
    return _fill_path(state, q0, GUIDANCE_ODE, t_eval, q)


@dataclass(frozen=True)
class NewtonianResidual:
    """Normalized Newtonian residual plus the time windows skipped at nodes."""

    value: float
    excluded: tuple = ()

    def __float__(self):
        return self.value


def _d1(y, h):
    return (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * h)


def _d2(y, h):
    return (-y[:-4] + 16 * y[1:-3] - 30 * y[2:-2] + 16 * y[3:-1] - y[4:]) / (12 * h * h)


def newtonian_residual(path: TrajectoryPath, dq_widths: float = 0.1) -> NewtonianResidual:
    """``max |d/dt(M q') + d/dq(V + Q)|`` over interior samples.

    Velocities and accelerations come from 4th-order differences of the
    sampled ``q`` alone, so the check is independent of the guidance law.
    The normalization is ``max|dV/dq|`` along the path, floored at the force
    ``M w^2`` exerts over one natural width.
    """
    t, q = np.asarray(path.t), np.asarray(path.q)
    if t.size < 5:
        raise ValueError("need at least 5 samples for 4th-order differences")
    h = t[1] - t[0]
    if not np.allclose(np.diff(t), h, rtol=1e-9, atol=1e-12):
        raise ValueError("newtonian_residual needs uniformly spaced samples")
    state, model = path.state, path.state.frame.model
    ti, qi = t[2:-2], q[2:-2]
    qdot, qddot = _d1(q, h), _d2(q, h)
    M = model.M(ti)
    lhs = model.Mdot(ti) * qdot + M * qddot
    grad_v = model.potential_gradient(qi, ti)

    grad_q = np.empty_like(qi)
    for j, (tt, qq) in enumerate(zip(ti, qi)):
        dq = dq_widths * float(state.width(tt))
        stencil = quantum_potential(state, qq + dq * np.array([-2.0, -1.0, 1.0, 2.0]), tt, on_node="nan")
        grad_q[j] = (stencil[0] - 8 * stencil[1] + 8 * stencil[2] - stencil[3]) / (12 * dq)

    bad = ~np.isfinite(grad_q)
    excluded = []
    if bad.any():
        edges = np.flatnonzero(np.diff(np.concatenate([[0], bad.astype(int), [0]])))
        excluded = [(float(ti[a]), float(ti[b - 1])) for a, b in zip(edges[::2], edges[1::2])]
    good = ~bad
    if not good.any():
        return NewtonianResidual(float("nan"), tuple(excluded))
    floor = np.max(M * model.omega(ti) ** 2 * state.width(ti))
    scale = max(float(np.max(np.abs(grad_v[good]))), float(floor))
    value = float(np.max(np.abs(lhs + grad_v + grad_q)[good]) / scale)
    return NewtonianResidual(value, tuple(excluded))


def ensemble_run(state: QuantumState, q0_list, t_span, method=GUIDANCE_ODE, rtol=1e-10,
                 dt_out=None, workers: int | None = None):
    """One trajectory per initial position, returned sorted by ``q0``.

    A failing member is returned with empty samples and its error message;
    the others are unaffected.
    """
    q0_list = [float(x) for x in q0_list]
    if not q0_list:
        raise ValueError("q0_list must not be empty")
    if not all(math.isfinite(x) for x in q0_list):
        raise ValueError("q0_list entries must be finite")
    if method not in (GUIDANCE_ODE, CLOSED_FORM):
        raise ValueError(f"unknown method {method!r}")
    t_start, t_stop = map(float, t_span)
    times = output_times(t_start, t_stop, dt_out if dt_out else (t_stop - t_start) / 200)

    def one(q0):
        try:
            if method == CLOSED_FORM:
                return closed_form_path(state, q0, times)
            return guidance_integrate(state, q0, (t_start, t_stop), rtol=rtol, t_eval=times)
        except PilotWaveError as exc:
            empty = np.empty(0)
            return TrajectoryPath(state, q0, method, empty, empty, empty, empty, empty, error=str(exc))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            paths = list(pool.map(one, q0_list))
    else:
        paths = [one(x) for x in q0_list]
    return sorted(paths, key=lambda p: p.q0)
