"""Ladder-operator algebra on a truncated Fock space.

Used to check the operator statements numerically: the squeezing operator
``S`` realizes ``S^dag b S = u b + v* b^dag``, squeezed number states are
eigenvectors of ``b_F^dag b_F``, and displaced squeezed states are
``S^dag D(alpha) |0>``.

Phase convention
----------------
With ``u = cosh(sigma) e^{i theta_u}`` and ``v = sinh(sigma) e^{i theta_v}``
the relation ``S^dag b S = u b + v* b^dag`` holds for

    S = exp(i theta_u n) exp[(sigma/2) e^{-i(theta_u + theta_v)} b^dag^2 - h.c.]

(``convention="verified"``, the default).  The variant with the generator
phase ``e^{+i(theta_v - theta_u)}`` (``convention="alternate"``) instead gives
``u b + v b^dag``; the two coincide only when ``v`` is real.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .classical import BogoliubovParams
from .errors import TruncationError

CONVENTIONS = ("verified", "alternate")


@dataclass(frozen=True)
class FockSpace:
    dim: int

    def __post_init__(self):
        if self.dim < 2:
            raise TruncationError(f"Fock dimension must be >= 2, got {self.dim}", required_dim=2)

    @cached_property
    def b(self) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, self.dim, dtype=float)), 1).astype(complex)

    @cached_property
    def bdag(self) -> np.ndarray:
        return self.b.conj().T

    @cached_property
    def number(self) -> np.ndarray:
        return np.diag(np.arange(self.dim, dtype=float)).astype(complex)

    def basis(self, n: int) -> "StateVector":
        amps = np.zeros(self.dim, dtype=complex)
        amps[n] = 1.0
        return StateVector(self.dim, amps)

    def projector(self, k: int) -> np.ndarray:
        """Columns selecting the first ``k`` Fock states."""
        return np.eye(self.dim, k, dtype=complex)


@dataclass(frozen=True, eq=False)
class StateVector:
    dim: int
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def expectation(self, op: np.ndarray) -> complex:
        a = self.amplitudes
        return complex(np.vdot(a, op @ a))

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def squeeze_budget(sigma: float) -> int:
    return math.ceil(16.0 * math.exp(2.0 * sigma))


def _check_squeeze_budget(space: FockSpace, params: BogoliubovParams):
    need = squeeze_budget(params.sigma)
    if space.dim < need:
        raise TruncationError(
            f"squeezing with sigma={params.sigma:.4g} needs dim >= {need}, got {space.dim}",
            required_dim=need,
        )


def squeeze_matrix(space: FockSpace, params: BogoliubovParams, convention: str = "verified") -> np.ndarray:
    """Truncated squeezing operator as a dense ``dim x dim`` matrix."""
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    _check_squeeze_budget(space, params)
    sigma, tu, tv = params.sigma, params.theta_u, params.theta_v
    if sigma == 0.0:
        generator_phase = 0.0
    elif convention == "verified":
        generator_phase = -(tu + tv)
    else:
        generator_phase = tv - tu
    xi = 0.5 * sigma * cmath.exp(1j * generator_phase)
    b, bdag = space.b, space.bdag
    squeeze = expm(xi * (bdag @ bdag) - xi.conjugate() * (b @ b))
    rotation = np.exp(1j * tu * np.arange(space.dim))
    return rotation[:, None] * squeeze


def unitarity_defect(S: np.ndarray, block: int | None = None) -> float:
    """``||S^dag S - 1||`` on the leading ``block`` basis states (default half)."""
    n = S.shape[0]
    block = n // 2 if block is None else block
    gram = (S.conj().T @ S)[:block, :block]
    return float(np.linalg.norm(gram - np.eye(block), 2))


def transformed_annihilator(space: FockSpace, params: BogoliubovParams) -> np.ndarray:
    """``b_F = u b + v* b^dag``."""
    return complex(params.u) * space.b + complex(params.v).conjugate() * space.bdag


def bogoliubov_residual(space: FockSpace, params: BogoliubovParams, k: int | None = None,
                        convention: str = "verified") -> float:
    """Spectral norm of ``(S^dag b S - u b - v* b^dag) P_k``.

    ``k`` defaults to a quarter of the space.  Truncation error enters
    through the tails of the squeezed states ``S|j>``, ``j < k``, beyond
    ``dim``.
    """
    k = space.dim // 4 if k is None else k
    S = squeeze_matrix(space, params, convention)
    diff = S.conj().T @ space.b @ S - transformed_annihilator(space, params)
    return float(np.linalg.norm(diff @ space.projector(k), 2))


def displacement_matrix(space: FockSpace, alpha: complex) -> np.ndarray:
    alpha = complex(alpha)
    return expm(alpha * space.bdag - alpha.conjugate() * space.b)


def displaced_squeezed_state(space: FockSpace, params: BogoliubovParams, alpha: complex = 0.0,
                             convention: str = "verified") -> StateVector:
    """``S^dag D(alpha) |0>``, the coherent state of the transformed ladder pair."""
    need = math.ceil(16.0 * (abs(alpha) ** 2 + math.exp(2.0 * params.sigma)))
    if space.dim < need:
        raise TruncationError(
            f"|alpha|^2 + e^(2 sigma) budget needs dim >= {need}, got {space.dim}", required_dim=need
        )
    vac = space.basis(0).amplitudes
    displaced = displacement_matrix(space, alpha) @ vac
    amps = squeeze_matrix(space, params, convention).conj().T @ displaced
    return StateVector(space.dim, amps)


def squeezed_number_state(space: FockSpace, params: BogoliubovParams, n: int,
                          convention: str = "verified") -> StateVector:
    """``S^dag |n>``, the n-th eigenstate of ``b_F^dag b_F``."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if n > space.dim // 8:
        raise TruncationError(f"n={n} exceeds dim/8 = {space.dim // 8}", required_dim=8 * n)
    S = squeeze_matrix(space, params, convention)
    return StateVector(space.dim, S.conj().T @ space.basis(n).amplitudes)


def transformed_number(space: FockSpace, params: BogoliubovParams, state: StateVector) -> float:
    """``<b_F^dag b_F>`` in ``state``."""
    bf = transformed_annihilator(space, params)
    return float(np.real(state.expectation(bf.conj().T @ bf)))


def eigen_defect(space: FockSpace, params: BogoliubovParams, state: StateVector, n: int,
                 block: int | None = None) -> float:
    """``||P (b_F^dag b_F - n) psi||`` on the leading ``block`` states (default half)."""
    block = space.dim // 2 if block is None else block
    bf = transformed_annihilator(space, params)
    vec = (bf.conj().T @ bf - n * np.eye(space.dim)) @ state.amplitudes
    return float(np.linalg.norm(vec[:block]))
