"""Oscillator models and complex classical mode functions.

A mode ``f(t)`` solves ``d/dt[M f'] + M w^2 f = 0`` and is normalized so that
``i M (f' f* - f f'*) = 1``.  Every invariant frame, wavefunction and
trajectory downstream is expressed through one such mode.
"""

from __future__ import annotations

import cmath
import enum
import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BogoliubovError, IntegrationError, ModelError, WronskianError

WRONSKIAN_TOL = 1e-12
BOGOLIUBOV_TOL = 1e-9


class Family(str, enum.Enum):
    STATIC = "static"
    DAMPED = "damped"
    CUSTOM = "custom-parametric"

    @classmethod
    def _missing_(cls, value):
        return cls.CUSTOM if value == "custom" else None


class ModeSource(str, enum.Enum):
    ANALYTIC_STATIC = "analytic-static"
    ANALYTIC_DAMPED = "analytic-damped"
    NUMERIC = "numeric"
    COMBINED = "combined"


@dataclass(frozen=True)
class OscillatorModel:
    """Mass and frequency profiles of ``H = p^2/2M(t) + M(t) w(t)^2 q^2/2``.

    The custom family is ``M = m e^{2 gamma t} (1 + a sin(nu t))`` and
    ``w = omega0 (1 + b sin(mu t))``; static and damped are its special cases
    with ``a = b = 0``.
    """

    family: Family
    m: float
    omega0: float
    gamma: float = 0.0
    a: float = 0.0
    nu: float = 0.0
    b: float = 0.0
    mu: float = 0.0

    def M(self, t):
        t = np.asarray(t, dtype=float)
        return self.m * np.exp(2.0 * self.gamma * t) * (1.0 + self.a * np.sin(self.nu * t))

    def Mdot(self, t):
        t = np.asarray(t, dtype=float)
        env = self.m * np.exp(2.0 * self.gamma * t)
        return env * (
            2.0 * self.gamma * (1.0 + self.a * np.sin(self.nu * t))
            + self.a * self.nu * np.cos(self.nu * t)
        )

    def omega(self, t):
        t = np.asarray(t, dtype=float)
        return self.omega0 * (1.0 + self.b * np.sin(self.mu * t))

    def potential(self, q, t):
        return 0.5 * self.M(t) * self.omega(t) ** 2 * np.asarray(q) ** 2

    def potential_gradient(self, q, t):
        return self.M(t) * self.omega(t) ** 2 * np.asarray(q)

    @property
    def damped_frequency(self) -> float:
        """``Omega = sqrt(omega0^2 - gamma^2)``."""
        return math.sqrt(self.omega0**2 - self.gamma**2)


def make_model(family, m=1.0, omega0=1.0, gamma=0.0, *, a=0.0, nu=0.0, b=0.0, mu=0.0):
    """Build a validated :class:`OscillatorModel`.

    ``family`` is a :class:`Family` or its string value.  The static family
    ignores ``gamma``; only the custom family uses the drive coefficients.
    """
    try:
        family = Family(family)
    except ValueError:
        raise ModelError(f"unknown oscillator family {family!r}") from None
    values = dict(m=m, omega0=omega0, gamma=gamma, a=a, nu=nu, b=b, mu=mu)
    for name, value in values.items():
        if not math.isfinite(value):
            raise ModelError(f"{name} must be finite, got {value!r}")
    if m <= 0:
        raise ModelError(f"mass m must be positive, got {m}")
    if omega0 <= 0:
        raise ModelError(f"omega0 must be positive, got {omega0}")
    if gamma < 0:
        raise ModelError(f"gamma must be non-negative, got {gamma}")

    if family is Family.STATIC:
        return OscillatorModel(Family.STATIC, float(m), float(omega0))
    if family is Family.DAMPED:
        if not omega0 > gamma:
            raise ModelError(
                f"damped oscillator must be underdamped (omega0 > gamma), got omega0={omega0}, gamma={gamma}"
            )
        return OscillatorModel(Family.DAMPED, float(m), float(omega0), float(gamma))

    if abs(a) >= 1.0:
        raise ModelError(f"|a| must be < 1 to keep M(t) positive, got a={a}")
    if abs(b) > 1.0:
        raise ModelError(f"|b| must be <= 1 to keep omega(t) non-negative, got b={b}")
    return OscillatorModel(Family.CUSTOM, float(m), float(omega0), float(gamma), float(a), float(nu), float(b), float(mu))


@dataclass(frozen=True)
class BogoliubovParams:
    """Coefficients of ``F = u f + v* f*`` with ``|u|^2 - |v|^2 = 1``."""

    u: complex
    v: complex

    def __post_init__(self):
        defect = abs(self.u) ** 2 - abs(self.v) ** 2 - 1.0
        if not abs(defect) <= BOGOLIUBOV_TOL * max(1.0, abs(self.u) ** 2):
            raise BogoliubovError(f"|u|^2 - |v|^2 = {1.0 + defect!r}, expected 1")

    @classmethod
    def from_squeeze(cls, sigma, theta_u=0.0, theta_v=0.0):
        if sigma < 0:
            raise BogoliubovError(f"sigma must be non-negative, got {sigma}")
        return cls(math.cosh(sigma) * cmath.exp(1j * theta_u), math.sinh(sigma) * cmath.exp(1j * theta_v))

    @classmethod
    def identity(cls):
        return cls(1.0 + 0j, 0j)

    @property
    def sigma(self) -> float:
        return math.acosh(max(abs(self.u), 1.0))

    @property
    def theta_u(self) -> float:
        return cmath.phase(self.u)

    @property
    def theta_v(self) -> float:
        return cmath.phase(self.v) if self.v != 0 else 0.0

    def matrix(self) -> np.ndarray:
        """Action on the column ``(f, f*)``."""
        u, v = complex(self.u), complex(self.v)
        return np.array([[u, v.conjugate()], [v, u.conjugate()]])

    def then(self, outer: "BogoliubovParams") -> "BogoliubovParams":
        """Composition ``outer o self``: apply ``self`` first, then ``outer``."""
        prod = outer.matrix() @ self.matrix()
        return BogoliubovParams(complex(prod[0, 0]), complex(prod[1, 0]))


def wronskian(M, f, fdot):
    """``i M (f' f* - f f'*)``; equals one for a normalized mode."""
    return 1j * M * (fdot * np.conj(f) - f * np.conj(fdot))


@dataclass(frozen=True, eq=False)
class ClassicalMode:
    """A normalized complex solution of the mode equation.

    ``evaluate(t)`` returns ``(f, f', f'')`` as complex arrays broadcast
    against ``t``.
    """

    model: OscillatorModel
    t0: float
    source: ModeSource
    evaluate: Callable = field(repr=False)

    def f(self, t):
        return self.evaluate(t)[0]

    def fdot(self, t):
        return self.evaluate(t)[1]

    def fddot(self, t):
        return self.evaluate(t)[2]

    def wronskian(self, t):
        f, fdot, _ = self.evaluate(t)
        return wronskian(self.model.M(t), f, fdot)


def analytic_mode(model: OscillatorModel, t0=0.0) -> ClassicalMode:
    """Closed-form modes for the static and damped families.

    static: ``f = e^{-i w0 t} / sqrt(2 m w0)``;
    damped: ``f = e^{-(gamma + i Omega) t} / sqrt(2 m Omega)``.
    Both are anchored at ``t = 0`` regardless of ``t0``.
    """
    if model.family is Family.STATIC:
        rate = 1j * model.omega0
        amp = 1.0 / math.sqrt(2.0 * model.m * model.omega0)
        source = ModeSource.ANALYTIC_STATIC
    elif model.family is Family.DAMPED:
        big_omega = model.damped_frequency
        rate = model.gamma + 1j * big_omega
        amp = 1.0 / math.sqrt(2.0 * model.m * big_omega)
        source = ModeSource.ANALYTIC_DAMPED
    else:
        raise ModelError("no closed-form mode for the custom-parametric family; use numeric_mode")

    def evaluate(t):
        f = amp * np.exp(-rate * np.asarray(t, dtype=float))
        return f, -rate * f, rate**2 * f

    return ClassicalMode(model, float(t0), source, evaluate)


def default_initial_mode_data(model: OscillatorModel, t0=0.0):
    """Instantaneous-vacuum data ``f0 = 1/sqrt(2 M w)``, ``f0' = -i w f0`` at ``t0``."""
    w = float(model.omega(t0))
    if w <= 0.0:
        raise ModelError(f"omega(t0) = {w} leaves no frequency scale for the default mode")
    f0 = 1.0 / math.sqrt(2.0 * float(model.M(t0)) * w)
    return complex(f0), -1j * w * f0


class _Branch:
    """One integration direction away from ``t0``, extended by doubling."""

    def __init__(self, owner, direction):
        self.owner = owner
        self.direction = direction
        self.segments = []  # (t_lo, t_hi, OdeSolution)
        self.reach = 0.0  # distance covered from t0
        self.y_end = np.array([owner.f0, owner.fdot0], dtype=complex)

    def extend(self, distance):
        owner = self.owner
        while self.reach < distance:
            new_reach = max(distance, 2.0 * self.reach, 1.0)
            a = owner.t0 + self.direction * self.reach
            b = owner.t0 + self.direction * new_reach
            sol = solve_ivp(owner.rhs, (a, b), self.y_end, method="DOP853",
                            rtol=owner.rtol, atol=owner.atol, dense_output=True)
            if sol.status != 0:
                raise IntegrationError(f"mode integration failed: {sol.message}", t_last=float(sol.t[-1]))
            self.segments.append((min(a, b), max(a, b), sol.sol))
            self.reach = new_reach
            self.y_end = sol.y[:, -1]

    def evaluate(self, t, out):
        bounds = np.array([seg[1] if self.direction > 0 else seg[0] for seg in self.segments])
        dist = np.abs(t - self.owner.t0)
        seg_dist = np.abs(bounds - self.owner.t0)
        idx = np.clip(np.searchsorted(seg_dist, dist, side="left"), 0, len(self.segments) - 1)
        for k in np.unique(idx):
            sel = idx == k
            out[:, sel] = self.segments[k][2](t[sel])


class _ModeIntegrator:
    """Adaptive DOP853 integration of the mode equation on both sides of ``t0``."""

    def __init__(self, model, t0, f0, fdot0, rtol, atol, t_end):
        self.model = model
        self.t0 = t0
        self.f0, self.fdot0 = f0, fdot0
        self.rtol = rtol
        self.atol = atol
        self._forward = _Branch(self, 1)
        self._backward = _Branch(self, -1)
        self._lock = threading.Lock()
        self._forward.extend(t_end - t0)

    def rhs(self, t, y):
        M = self.model.M(t)
        return np.array([y[1], -(self.model.Mdot(t) / M) * y[1] - self.model.omega(t) ** 2 * y[0]])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        out = np.empty((2, flat.size), dtype=complex)
        ahead = flat >= self.t0
        for branch, sel in ((self._forward, ahead), (self._backward, ~ahead)):
            if not sel.any():
                continue
            need = float(np.max(np.abs(flat[sel] - self.t0)))
            if need > branch.reach:
                with self._lock:
                    branch.extend(need)
            sub = np.empty((2, int(sel.sum())), dtype=complex)
            branch.evaluate(flat[sel], sub)
            out[:, sel] = sub
        f = out[0].reshape(t.shape)
        fdot = out[1].reshape(t.shape)
        M = self.model.M(t)
        fddot = -(self.model.Mdot(t) / M) * fdot - self.model.omega(t) ** 2 * f
        return f, fdot, fddot


def numeric_mode(model: OscillatorModel, t0=0.0, f0=None, fdot0=None, rtol=1e-10, *, atol=None, t_end=None):
    """Integrate the mode equation from normalized initial data.

    ``f0``/``fdot0`` default to :func:`default_initial_mode_data`.  The
    solution is dense on ``[t0, t_end]`` and extended automatically (in
    either direction) when queried outside.
    """
    if not 1e-13 <= rtol <= 1e-6:
        raise ValueError(f"rtol must lie in [1e-13, 1e-6], got {rtol}")
    if f0 is None or fdot0 is None:
        f0, fdot0 = default_initial_mode_data(model, t0)
    f0, fdot0 = complex(f0), complex(fdot0)
    w0 = complex(wronskian(float(model.M(t0)), f0, fdot0))
    if abs(w0 - 1.0) > WRONSKIAN_TOL:
        raise WronskianError(f"initial data has Wronskian {w0!r}, expected 1")
    # one decade below rtol: local error control alone lets the Wronskian drift past 10*rtol
    step_rtol = 0.1 * rtol
    if atol is None:
        atol = 1e-2 * step_rtol * abs(f0)
    if t_end is None:
        t_end = t0 + 20.0 / float(model.omega(t0) or model.omega0)
    integrator = _ModeIntegrator(model, float(t0), f0, fdot0, step_rtol, atol, float(t_end))
    return ClassicalMode(model, float(t0), ModeSource.NUMERIC, integrator)


def combine_mode(mode_f: ClassicalMode, params: BogoliubovParams) -> ClassicalMode:
    """The mode ``F = u f + v* f*`` (and likewise for its derivatives)."""
    u = complex(params.u)
    vc = complex(params.v).conjugate()
    # re-checked here so a params object built without validation still fails loudly
    if abs(abs(u) ** 2 - abs(vc) ** 2 - 1.0) > BOGOLIUBOV_TOL * max(1.0, abs(u) ** 2):
        raise BogoliubovError("|u|^2 - |v|^2 must equal 1")
    inner = mode_f.evaluate

    def evaluate(t):
        return tuple(u * x + vc * np.conj(x) for x in inner(t))

    return ClassicalMode(mode_f.model, mode_f.t0, ModeSource.COMBINED, evaluate)


def mode_residual(mode: ClassicalMode, t):
    """Pointwise ``|M f'' + M' f' + M w^2 f| / max(1, |M w^2 f|)``."""
    f, fdot, fddot = mode.evaluate(t)
    model = mode.model
    stiff = model.M(t) * model.omega(t) ** 2 * f
    res = model.M(t) * fddot + model.Mdot(t) * fdot + stiff
    return np.abs(res) / np.maximum(1.0, np.abs(stiff))
