"""Lewis-Riesenfeld invariant built from a classical mode.

For a mode ``f`` and scale ``omegaI`` the invariant is

    I = (g_minus p^2 + g_zero (pq + qp) + g_plus q^2) / 2

with ``g_minus = 2 omegaI |f|^2``, ``g_zero = -(M/2) d(g_minus)/dt`` and
``g_plus = (omegaI^2 + g_zero^2) / g_minus``.  The accumulated phase
``theta(t) = int_{t0}^{t} dt' / (2 M |f|^2)`` is obtained by quadrature.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp

from .classical import ClassicalMode, OscillatorModel
from .errors import IntegrationError, ModelError, QuadratureError

THETA_ABS_TOL = 1e-10
_RECENT_LIMIT = 8192


class _PhaseAccumulator:
    """Caches theta at checkpoints ``t0 + k h`` and integrates the remainder."""

    def __init__(self, rate, t0, step):
        self.rate = rate
        self.t0 = t0
        self.step = step
        self._checkpoints = {0: 0.0}
        self._recent = {}
        self._lock = threading.Lock()

    def _integral(self, a, b):
        value, err = quad(self.rate, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
        if not err <= THETA_ABS_TOL:
            raise QuadratureError(f"theta quadrature on [{a}, {b}] reached only {err:.2e}")
        return value

    def _checkpoint(self, k):
        cache = self._checkpoints
        if k in cache:
            return cache[k]
        with self._lock:
            direction = 1 if k > 0 else -1
            j = 0
            while j + direction in cache and j != k:
                j += direction
            while j != k:
                nxt = j + direction
                ta, tb = self.t0 + j * self.step, self.t0 + nxt * self.step
                cache[nxt] = cache[j] + self._integral(ta, tb)
                j = nxt
            return cache[k]

    def __call__(self, t):
        hit = self._recent.get(t)
        if hit is not None:
            return hit
        k = int(math.trunc((t - self.t0) / self.step))
        tk = self.t0 + k * self.step
        value = self._checkpoint(k) + (self._integral(tk, t) if t != tk else 0.0)
        if len(self._recent) >= _RECENT_LIMIT:
            self._recent.clear()
        self._recent[t] = value
        return value


@dataclass(frozen=True, eq=False)
class InvariantFrame:
    mode: ClassicalMode
    omegaI: float
    t0: float
    _phase: _PhaseAccumulator = field(repr=False)

    @property
    def model(self) -> OscillatorModel:
        return self.mode.model

    def g_minus(self, t):
        return 2.0 * self.omegaI * np.abs(self.mode.f(t)) ** 2

    def g_minus_dot(self, t):
        f, fdot, _ = self.mode.evaluate(t)
        return 4.0 * self.omegaI * np.real(np.conj(f) * fdot)

    def g_zero(self, t):
        return -0.5 * self.model.M(t) * self.g_minus_dot(t)

    def g_plus(self, t):
        return (self.omegaI**2 + self.g_zero(t) ** 2) / self.g_minus(t)

    def theta_rate(self, t):
        """``d theta/dt = 1 / (2 M |f|^2)``."""
        return 1.0 / (2.0 * self.model.M(t) * np.abs(self.mode.f(t)) ** 2)

    def theta(self, t):
        """Accumulated phase from ``t0``; scalar or array input."""
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            return self._phase(float(t_arr))
        return np.array([self._phase(float(x)) for x in t_arr.ravel()]).reshape(t_arr.shape)


def build_frame(mode: ClassicalMode, omegaI=None, t0=None) -> InvariantFrame:
    """Invariant frame keyed on ``(mode, omegaI)``.

    ``omegaI`` defaults to ``omega(t0)``, ``t0`` to the mode's start time.
    """
    if t0 is None:
        t0 = mode.t0
    if omegaI is None:
        omegaI = float(mode.model.omega(t0))
    if not (math.isfinite(omegaI) and omegaI > 0):
        raise ModelError(f"omegaI must be positive, got {omegaI}")
    w_ref = float(mode.model.omega(t0))
    step = 1.0 / w_ref if w_ref > 0 else 1.0

    model = mode.model

    def rate(t):
        return 1.0 / (2.0 * float(model.M(t)) * abs(complex(mode.f(t))) ** 2)

    return InvariantFrame(mode, float(omegaI), float(t0), _PhaseAccumulator(rate, float(t0), step))


def theta(frame: InvariantFrame, t):
    return frame.theta(t)


def reconstruct_mode(frame: InvariantFrame, t):
    """``sqrt(g_minus / 2 omegaI) e^{-i theta}`` times the constant phase of ``f(t0)``."""
    anchor = np.exp(1j * np.angle(frame.mode.f(frame.t0)))
    return anchor * np.sqrt(frame.g_minus(t) / (2.0 * frame.omegaI)) * np.exp(-1j * frame.theta(t))


@dataclass(frozen=True)
class PhasePoint:
    t: float
    q: float
    p: float


def invariant_value(frame: InvariantFrame, point: PhasePoint) -> float:
    """Classical value of the invariant at a phase-space point."""
    t, q, p = point.t, point.q, point.p
    return 0.5 * float(frame.g_minus(t) * p**2 + 2.0 * frame.g_zero(t) * q * p + frame.g_plus(t) * q**2)


def classical_flow(model: OscillatorModel, q0, p0, t_span, t_eval=None, rtol=1e-10):
    """Hamilton's equations ``q' = p/M``, ``p' = -M w^2 q`` sampled at ``t_eval``."""
    t_start, t_stop = map(float, t_span)
    if t_eval is None:
        t_eval = np.linspace(t_start, t_stop, 201)

    def rhs(t, y):
        return [y[1] / model.M(t), -model.M(t) * model.omega(t) ** 2 * y[0]]

    scale = max(abs(q0), abs(p0), 1.0)
    sol = solve_ivp(rhs, (t_start, t_stop), [q0, p0], method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=1e-3 * rtol * scale)
    if sol.status != 0:
        raise IntegrationError(f"classical flow failed: {sol.message}", t_last=float(sol.t[-1]))
    return [PhasePoint(float(t), float(q), float(p)) for t, q, p in zip(sol.t, sol.y[0], sol.y[1])]
