import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pilotwave.classical import BogoliubovParams, analytic_mode, combine_mode, make_model
from pilotwave.errors import TruncationError
from pilotwave.fock import (FockSpace, bogoliubov_residual, displaced_squeezed_state, eigen_defect,
                            squeeze_matrix, squeezed_number_state, transformed_number, unitarity_defect)
from pilotwave.invariant import build_frame
from pilotwave.wavefunction import coherent, hermite_function


def test_ladder_structure():
    space = FockSpace(10)
    b = space.b
    for i in range(9):
        assert b[i, i + 1] == pytest.approx(math.sqrt(i + 1))
    assert np.count_nonzero(b) == 9
    assert np.array_equal(space.bdag, b.conj().T)
    comm = b @ space.bdag - space.bdag @ b
    assert np.max(np.abs(np.diag(comm)[:-1] - 1)) < 1e-14


def test_identity_squeeze():
    space = FockSpace(32)
    assert np.allclose(squeeze_matrix(space, BogoliubovParams.identity()), np.eye(32), atol=1e-15)
    assert bogoliubov_residual(space, BogoliubovParams.identity()) < 1e-12


def test_unitarity_on_retained_block():
    S = squeeze_matrix(FockSpace(64), BogoliubovParams.from_squeeze(0.5))
    assert unitarity_defect(S, 32) < 1e-8


def test_squeezed_vacuum_parity():
    space = FockSpace(64)
    vac = squeezed_number_state(space, BogoliubovParams.from_squeeze(0.5), 0).amplitudes
    assert np.max(np.abs(vac[1::2])) < 1e-10


def test_truncation_budget_enforced():
    with pytest.raises(TruncationError) as info:
        squeeze_matrix(FockSpace(32), BogoliubovParams.from_squeeze(1.0))
    assert info.value.required_dim == math.ceil(16 * math.exp(2.0))


@pytest.mark.parametrize("sigma,dim", [(0.25, 64), (0.5, 128), (1.0, 512)])
def test_bogoliubov_residual_converged(sigma, dim):
    assert bogoliubov_residual(FockSpace(dim), BogoliubovParams.from_squeeze(sigma), k=16) < 1e-6


def test_bogoliubov_residual_complex_phase():
    params = BogoliubovParams.from_squeeze(1.0, 0.0, math.pi / 3)
    assert bogoliubov_residual(FockSpace(512), params, k=16) < 1e-6
    # the alternate generator phase realizes u b + v b^dag instead, visible once v is complex
    assert bogoliubov_residual(FockSpace(512), params, k=16, convention="alternate") > 1.0


# Stated truncations: the squeezed tails of S|j>, j < 16, do not fit (see decisions ledger); left failing.
def test_bogoliubov_residual_sigma_half_dim_64():
    assert bogoliubov_residual(FockSpace(64), BogoliubovParams.from_squeeze(0.5), k=16) < 1e-6


def test_bogoliubov_residual_complex_v_dim_128():
    params = BogoliubovParams.from_squeeze(1.0, 0.0, math.pi / 3)
    assert bogoliubov_residual(FockSpace(128), params, k=16) < 1e-6


def test_coherent_amplitudes():
    space = FockSpace(64)
    state = displaced_squeezed_state(space, BogoliubovParams.identity(), 1.0)
    expected = [math.exp(-0.5) / math.sqrt(math.factorial(n)) for n in range(11)]
    assert np.allclose(state.amplitudes[:11], expected, atol=1e-8)
    vac = displaced_squeezed_state(space, BogoliubovParams.identity(), 0.0)
    assert np.allclose(vac.amplitudes, space.basis(0).amplitudes, atol=1e-15)


def test_displaced_squeezed_quanta():
    space = FockSpace(128)
    params = BogoliubovParams.from_squeeze(0.5)
    real = displaced_squeezed_state(space, params, 1.0)
    # S^dag D(alpha)|0> with real alpha holds e^{-2 sigma} alpha^2 + sinh^2 sigma quanta
    assert real.expectation(space.number).real == pytest.approx(math.exp(-1) + math.sinh(0.5) ** 2, rel=1e-9)
    imag = displaced_squeezed_state(space, params, 1j)
    assert imag.expectation(space.number).real > 1.0
    assert imag.expectation(space.number).real == pytest.approx(math.exp(1) + math.sinh(0.5) ** 2, rel=1e-9)


def test_displaced_budget():
    with pytest.raises(TruncationError):
        displaced_squeezed_state(FockSpace(64), BogoliubovParams.from_squeeze(0.5), 2.0)


def test_number_state_identity_squeeze():
    space = FockSpace(32)
    st_ = squeezed_number_state(space, BogoliubovParams.identity(), 3)
    assert np.allclose(st_.amplitudes, space.basis(3).amplitudes)


@pytest.mark.parametrize("n,dim", [(0, 64), (2, 128), (1, 128)])
def test_transformed_number(n, dim):
    space = FockSpace(dim)
    params = BogoliubovParams.from_squeeze(0.5)
    st_ = squeezed_number_state(space, params, n)
    tol = 1e-6 if n == 0 else 1e-5
    assert transformed_number(space, params, st_) == pytest.approx(n, abs=tol)
    assert eigen_defect(space, params, st_, n) < 1e-5


def test_number_state_needs_room():
    with pytest.raises(TruncationError):
        squeezed_number_state(FockSpace(64), BogoliubovParams.from_squeeze(0.1), 9)


def test_mode_picture_vacuum_matches_wavefunction():
    # the frame built from F = u f + v* f* has ladder operator u* b - v b^dag: Fock params (u*, -v*)
    params = BogoliubovParams.from_squeeze(0.4, 0.3, 1.1)
    model = make_model("static")
    fr = build_frame(combine_mode(analytic_mode(model), params), 1.0)
    q = np.linspace(-3, 3, 13)
    psi = coherent(fr, 0.0).psi(q, 0.0)
    space = FockSpace(128)
    mapped = BogoliubovParams(np.conj(params.u), -np.conj(params.v))
    amps = squeezed_number_state(space, mapped, 0).amplitudes
    basis = np.array([hermite_function(n, q) for n in range(space.dim)])
    fock_psi = amps @ basis
    ratio = psi / fock_psi
    assert np.allclose(ratio, ratio[6], atol=1e-8)
    assert abs(abs(ratio[6]) - 1) < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(0, 0.4), st.floats(-3, 3), st.floats(0, 0.4), st.floats(-3, 3))
def test_squeeze_composition(s1, v1, s2, v2):
    space = FockSpace(128)
    p1 = BogoliubovParams.from_squeeze(s1, 0.0, v1)
    p2 = BogoliubovParams.from_squeeze(s2, 0.0, v2)
    vac = space.basis(0).amplitudes
    product = squeeze_matrix(space, p2) @ squeeze_matrix(space, p1) @ vac
    composed = squeeze_matrix(space, p1.then(p2)) @ vac
    assert abs(abs(np.vdot(composed, product)) - 1) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 0.5), st.floats(-3, 3), st.floats(-3, 3))
def test_residual_property(sigma, tu, tv):
    params = BogoliubovParams.from_squeeze(sigma, tu, tv)
    assert bogoliubov_residual(FockSpace(128), params, k=16) < 1e-6
