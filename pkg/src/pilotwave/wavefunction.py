"""Exact invariant eigenstates and coherent states, and their field quantities.

With ``k = sqrt(omegaI / g_minus)`` and ``x = k q`` the eigenstates are

    psi_n = sqrt(k) h_n(x) exp(-i g_zero q^2 / (2 g_minus) - i (n + 1/2) theta)

where ``h_n`` is the normalized Hermite function.  The coherent state of
real amplitude ``alpha`` is a Gaussian centered at ``x = sqrt(2) alpha cos(theta)``.
``hbar = 1`` throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import NodeProximityError, StencilError
from .invariant import InvariantFrame

NODE_REL_EPS = 1e-10


def hermite(n: int, x):
    """Physicists' Hermite polynomial by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    h_prev, h = np.ones_like(x), 2.0 * x
    if n == 0:
        return h_prev
    for k in range(1, n):
        h_prev, h = h, 2.0 * x * h - 2.0 * k * h_prev
    return h


def hermite_function(n: int, x):
    """``H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi))`` via the normalized recurrence."""
    x = np.asarray(x, dtype=float)
    h_prev = np.zeros_like(x)
    h = np.pi**-0.25 * np.exp(-0.5 * x**2)
    for k in range(n):
        h_prev, h = h, math.sqrt(2.0 / (k + 1)) * x * h - math.sqrt(k / (k + 1)) * h_prev
    return h


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Eigenstate ``|n>`` or real coherent state ``|alpha>`` of a frame's invariant."""

    frame: InvariantFrame
    n: int | None = None
    alpha: float | None = None

    def __post_init__(self):
        if (self.n is None) == (self.alpha is None):
            raise ValueError("exactly one of n and alpha must be given")
        if self.n is not None and (int(self.n) != self.n or self.n < 0):
            raise ValueError(f"n must be a non-negative integer, got {self.n!r}")
        if self.alpha is not None:
            if isinstance(self.alpha, complex) or np.iscomplexobj(self.alpha):
                raise TypeError("complex alpha is not supported; pass a real amplitude")
            if not math.isfinite(self.alpha):
                raise ValueError(f"alpha must be finite, got {self.alpha!r}")

    @property
    def kind(self) -> str:
        return "eigenstate" if self.n is not None else "coherent"

    # --- local frame data -------------------------------------------------
    def _local(self, t, theta=None):
        fr = self.frame
        gm = fr.g_minus(t)
        g0 = fr.g_zero(t)
        th = fr.theta(t) if theta is None else theta
        k = np.sqrt(fr.omegaI / gm)
        return gm, g0, th, k

    def width(self, t):
        """Natural length ``sqrt(g_minus / omegaI)``."""
        return np.sqrt(self.frame.g_minus(t) / self.frame.omegaI)

    def center(self, t):
        """Peak of ``R``: zero for eigenstates, the displaced origin for coherent states."""
        if self.alpha is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return math.sqrt(2.0) * self.alpha * np.cos(self.frame.theta(t)) * self.width(t)

    # --- evaluators ---------------------------------------------------------
    def amplitude(self, q, t):
        """Signed real amplitude; ``R = |amplitude|``."""
        q = np.asarray(q, dtype=float)
        gm, _, th, k = self._local(t)
        x = k * q
        if self.alpha is None:
            return np.sqrt(k) * hermite_function(self.n, x)
        xc = math.sqrt(2.0) * self.alpha * np.cos(th)
        return np.sqrt(k) * np.pi**-0.25 * np.exp(-0.5 * (x - xc) ** 2)

    def R(self, q, t):
        return np.abs(self.amplitude(q, t))

    def R_expanded(self, q, t):
        """Amplitude assembled term by term from the expanded exponent (coherent only)."""
        if self.alpha is None:
            return self.R(q, t)
        q = np.asarray(q, dtype=float)
        gm, _, th, _ = self._local(t)
        a, wI = self.alpha, self.frame.omegaI
        expo = (-0.5 * a**2 - wI * q**2 / (2.0 * gm) - 0.5 * a**2 * np.cos(2.0 * th)
                + a * q * np.sqrt(2.0 * wI / gm) * np.cos(th))
        return (wI / (np.pi * gm)) ** 0.25 * np.exp(expo)

    def S(self, q, t, theta=None):
        q = np.asarray(q, dtype=float)
        gm, g0, th, _ = self._local(t, theta)
        quad_part = -g0 / (2.0 * gm) * q**2
        if self.alpha is None:
            return quad_part - (self.n + 0.5) * th
        a, wI = self.alpha, self.frame.omegaI
        return (quad_part - 0.5 * th + 0.5 * a**2 * np.sin(2.0 * th)
                - a * q * np.sqrt(2.0 * wI / gm) * np.sin(th))

    def dSdq(self, q, t, theta=None):
        """Analytic phase gradient; depends on ``n`` not at all."""
        q = np.asarray(q, dtype=float)
        fr = self.frame
        gm = fr.g_minus(t)
        grad = -fr.g_zero(t) / gm * q
        if self.alpha is None:
            return grad
        th = fr.theta(t) if theta is None else theta
        return grad - self.alpha * np.sqrt(2.0 * fr.omegaI / gm) * np.sin(th)

    def psi(self, q, t, phase_scale=1.0):
        """``amplitude * e^{i S}``; ``phase_scale`` exists for sensitivity controls."""
        return self.amplitude(q, t) * np.exp(1j * phase_scale * self.S(q, t))

    def node_threshold(self, t):
        return NODE_REL_EPS * (self.frame.omegaI / (np.pi * self.frame.g_minus(t))) ** 0.25


def eigenstate(frame: InvariantFrame, n: int) -> QuantumState:
    return QuantumState(frame, n=int(n))


def coherent(frame: InvariantFrame, alpha: float) -> QuantumState:
    return QuantumState(frame, alpha=alpha)


def eigenstate_R(state: QuantumState, q, t):
    if state.n is None:
        raise ValueError("eigenstate_R needs an eigenstate")
    return state.R(q, t)


def eigenstate_S(state: QuantumState, q, t):
    if state.n is None:
        raise ValueError("eigenstate_S needs an eigenstate")
    return state.S(q, t)


def coherent_RS(state: QuantumState, q, t):
    if state.alpha is None:
        raise ValueError("coherent_RS needs a coherent state")
    return state.R(q, t), state.S(q, t)


def _second_derivative(fn, q, h):
    return (-fn(q + 2 * h) + 16 * fn(q + h) - 30 * fn(q) + 16 * fn(q - h) - fn(q - 2 * h)) / (12 * h * h)


def _first_derivative(fn, x, h):
    return (-fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)


def quantum_potential(state: QuantumState, q, t, method: str = "auto", on_node: str = "raise"):
    """``Q = -R''/(2 M R)`` at fixed ``t``.

    ``method``: ``"analytic"`` uses ``h_n'' = (x^2 - 2n - 1) h_n`` (or the
    Gaussian for coherent states), ``"fd"`` a 5-point stencil with step
    ``1e-4`` natural widths, ``"auto"`` analytic for ``n <= 1`` and coherent
    states, stencil otherwise.  Points with ``R <= eps_node`` raise
    :class:`NodeProximityError`, or yield NaN when ``on_node="nan"``.
    """
    if method not in ("auto", "analytic", "fd"):
        raise ValueError(f"unknown method {method!r}")
    if on_node not in ("raise", "nan"):
        raise ValueError(f"unknown on_node {on_node!r}")
    q = np.asarray(q, dtype=float)
    t = float(t)
    R = state.R(q, t)
    at_node = R <= state.node_threshold(t)
    if np.any(at_node) and on_node == "raise":
        raise NodeProximityError(f"R vanishes at q={q[at_node] if q.ndim else q} (t={t}); Q is unbounded there")

    M = state.frame.model.M(t)
    gm = state.frame.g_minus(t)
    k = math.sqrt(state.frame.omegaI / gm)
    if method == "auto":
        method = "analytic" if state.alpha is not None or state.n <= 1 else "fd"
    if method == "analytic":
        x = k * q
        if state.alpha is None:
            ratio = k**2 * (x**2 - 2 * state.n - 1)
        else:
            xc = math.sqrt(2.0) * state.alpha * math.cos(state.frame.theta(t))
            ratio = k**2 * ((x - xc) ** 2 - 1.0)
    else:
        h = 1e-4 / k
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = _second_derivative(lambda y: state.R(y, t), q, h) / R
    Q = -ratio / (2.0 * M)
    return np.where(at_node, np.nan, Q) if np.any(at_node) else Q


@dataclass(frozen=True)
class FieldSample:
    t: float
    q: float
    R: float
    S: float
    dSdq: float
    Q: float
    V: float


def field_sample(state: QuantumState, q: float, t: float) -> FieldSample:
    return FieldSample(
        t=float(t),
        q=float(q),
        R=float(state.R(q, t)),
        S=float(state.S(q, t)),
        dSdq=float(state.dSdq(q, t)),
        Q=float(quantum_potential(state, q, t, on_node="nan")),
        V=float(state.frame.model.potential(q, t)),
    )


def normalization(state: QuantumState, t: float, widths: float = 10.0) -> float:
    """``int R^2 dq`` over ``center +- widths`` natural widths."""
    c = float(state.center(t))
    w = float(state.width(t))
    value, err = quad(lambda y: float(state.R(y, t)) ** 2, c - widths * w, c + widths * w,
                      points=[c], epsabs=1e-13, epsrel=1e-12, limit=200)
    return value


def natural_grid(state: QuantumState, times, n_q: int = 21, span: float = 3.0):
    """``(q, t)`` points spanning ``center +- span`` natural widths at each time."""
    pts = []
    offsets = np.linspace(-span, span, n_q)
    for t in np.atleast_1d(np.asarray(times, dtype=float)):
        c, w = float(state.center(t)), float(state.width(t))
        pts.extend((c + o * w, t) for o in offsets)
    return np.array(pts)


def _evaluate_on_points(fn, points):
    return np.array([fn(q, t) for q, t in points])


def schrodinger_residual(state: QuantumState, points, dq: float = 1e-3, dt: float = 1e-3,
                         psi=None, tol: float = 1e-5) -> float:
    """Normalized Schrodinger residual ``max|i psi_t - H psi| / max|H psi|``.

    Derivatives are 4th-order central differences.  A stencil-error
    estimate (4th-order stencil at ``h`` vs ``2h``) above ``tol`` raises
    :class:`StencilError`.
    """
    psi = state.psi if psi is None else psi
    model = state.frame.model
    lhs, rhs, est = [], [], []
    for q, t in np.asarray(points, dtype=float):
        p_t = _first_derivative(lambda s: psi(q, s), t, dt)
        p_qq = _second_derivative(lambda y: psi(y, t), q, dq)
        p_qq2 = _second_derivative(lambda y: psi(y, t), q, 2 * dq)
        M = model.M(t)
        val = psi(q, t)
        lhs.append(1j * p_t)
        rhs.append(-p_qq / (2 * M) + model.potential(q, t) * val)
        est.append(abs(p_qq - p_qq2) / (15 * 2 * M))
    lhs, rhs = np.array(lhs), np.array(rhs)
    scale = np.max(np.abs(rhs))
    if np.max(est) / scale > tol:
        raise StencilError(f"stencil error estimate {np.max(est) / scale:.2e} exceeds {tol:.1e}; refine dq")
    return float(np.max(np.abs(lhs - rhs)) / scale)


def continuity_residual(state: QuantumState, points, dq: float = 1e-3, dt: float = 1e-3) -> float:
    """``max|d_t rho + d_q(rho v)|`` over ``max(rho) * max(theta')``, ``rho = R^2``, ``v = S_q / M``."""
    model = state.frame.model
    fr = state.frame

    def rho(q, t):
        return float(state.R(q, t)) ** 2

    def flux(q, t):
        return rho(q, t) * float(state.dSdq(q, t)) / float(model.M(t))

    res, rho_max, rate_max = [], 0.0, 0.0
    for q, t in np.asarray(points, dtype=float):
        d_t = _first_derivative(lambda s: rho(q, s), t, dt)
        d_q = _first_derivative(lambda y: flux(y, t), q, dq)
        res.append(abs(d_t + d_q))
        rho_max = max(rho_max, rho(q, t))
        rate_max = max(rate_max, float(fr.theta_rate(t)))
    return float(max(res) / (rho_max * rate_max))
