import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pilotwave.classical import (BogoliubovParams, Family, analytic_mode, combine_mode,
                                 default_initial_mode_data, make_model, mode_residual, numeric_mode,
                                 wronskian)
from pilotwave.errors import BogoliubovError, IntegrationError, ModelError, WronskianError

from conftest import CUSTOM


def test_static_model_is_constant():
    model = make_model("static")
    t = np.linspace(-3, 7, 11)
    assert np.all(model.M(t) == 1.0)
    assert np.all(model.omega(t) == 1.0)


def test_damped_mass_growth():
    model = make_model("damped", 1.0, 1.0, 0.1)
    assert model.M(2.0) == pytest.approx(1.4918246976412703, rel=1e-14)
    assert np.all(model.omega(np.linspace(0, 5, 6)) == 1.0)


@pytest.mark.parametrize("kwargs", [
    dict(family="damped", omega0=0.5, gamma=0.5),
    dict(family="damped", omega0=0.5, gamma=0.7),
    dict(family="static", m=0.0),
    dict(family="static", omega0=-1.0),
    dict(family="static", m=float("nan")),
    dict(family="custom", a=1.0),
    dict(family="custom", b=1.5),
    dict(family="quartic"),
])
def test_invalid_models_rejected(kwargs):
    with pytest.raises(ModelError):
        make_model(**kwargs)


def test_custom_alias():
    assert make_model("custom").family is Family.CUSTOM


@pytest.mark.parametrize("t", [0.0, 0.7, 3.3, 11.0])
def test_mass_derivative_matches_finite_difference(t):
    model = make_model("custom", **CUSTOM)
    h = 1e-5
    fd = (model.M(t + h) - model.M(t - h)) / (2 * h)
    assert model.Mdot(t) == pytest.approx(fd, rel=1e-6)


def test_static_analytic_mode_initial_data():
    mode = analytic_mode(make_model("static"))
    f, fdot, _ = mode.evaluate(0.0)
    assert f == pytest.approx(1 / math.sqrt(2))
    assert fdot == pytest.approx(-1j / math.sqrt(2))
    assert mode.wronskian(0.0) == pytest.approx(1.0, abs=1e-15)


def test_damped_analytic_mode_amplitude():
    model = make_model("damped", 1.0, 1.0, 0.6)
    assert model.damped_frequency == pytest.approx(0.8)
    assert analytic_mode(model).f(0.0) == pytest.approx(1 / math.sqrt(1.6), rel=1e-15)


def test_damped_mode_equation_residual():
    model = make_model("damped", 1.0, 1.0, 0.1)
    mode = analytic_mode(model)
    t = np.linspace(0, 30, 101)
    f, fdot, fddot = mode.evaluate(t)
    assert np.max(np.abs(fddot + 0.2 * fdot + f)) < 1e-14


def test_analytic_mode_rejects_custom():
    with pytest.raises(ModelError):
        analytic_mode(make_model("custom", **CUSTOM))


def test_default_initial_data():
    f0, fdot0 = default_initial_mode_data(make_model("static"))
    assert f0 == pytest.approx(1 / math.sqrt(2))
    assert fdot0 == pytest.approx(-1j / math.sqrt(2))
    model = make_model("static", m=2.0, omega0=3.0)
    f0, fdot0 = default_initial_mode_data(model)
    assert f0 == pytest.approx(1 / math.sqrt(12), rel=1e-15)
    assert wronskian(2.0, f0, fdot0) == pytest.approx(1.0, abs=1e-14)


def test_default_initial_data_needs_frequency():
    # b = -1 makes omega vanish at mu t = -pi/2
    model = make_model("custom", b=-1.0, mu=1.0)
    with pytest.raises(ModelError):
        default_initial_mode_data(model, math.pi / 2)


def test_numeric_static_matches_analytic():
    model = make_model("static")
    mode = numeric_mode(model, 0.0, 1 / math.sqrt(2), -1j / math.sqrt(2))
    assert abs(mode.f(10.0) - cmath.exp(-10j) / math.sqrt(2)) < 1e-9


def test_numeric_damped_matches_analytic():
    model = make_model("damped", 1.0, 1.0, 0.1)
    exact = analytic_mode(model)
    f0, fdot0, _ = exact.evaluate(0.0)
    mode = numeric_mode(model, 0.0, f0, fdot0)
    assert abs(mode.f(5.0) - exact.f(5.0)) < 1e-9


def test_numeric_rejects_zero_wronskian():
    with pytest.raises(WronskianError):
        numeric_mode(make_model("static"), 0.0, 1.0, 0.0)


def test_numeric_mode_extends_both_directions():
    model = make_model("static")
    mode = numeric_mode(model, 1.0, t_end=2.0)
    exact = analytic_mode(model)
    phase = mode.f(1.0) / exact.f(1.0)
    for t in (-4.0, 0.5, 9.0, 40.0):
        assert abs(mode.f(t) - phase * exact.f(t)) < 1e-8


def test_numeric_rtol_range():
    with pytest.raises(ValueError):
        numeric_mode(make_model("static"), rtol=1e-3)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_numeric_failure_reports_last_time(monkeypatch):
    import pilotwave.classical as classical

    real = classical.solve_ivp

    def poisoned(fun, span, y0, **kw):
        return real(lambda t, y: fun(t, y) if t < 3.5 else fun(t, y) * np.nan, span, y0, **kw)

    monkeypatch.setattr(classical, "solve_ivp", poisoned)
    with pytest.raises(IntegrationError) as info:
        numeric_mode(make_model("static"), 0.0, t_end=10.0)
    assert info.value.t_last is not None and 0.0 < info.value.t_last <= 3.5 + 1e-9


@pytest.mark.parametrize("make", ["static", "damped", "custom"])
def test_wronskian_conserved(make):
    model = make_model(make, **(CUSTOM if make == "custom" else {}))
    mode = numeric_mode(model, 0.0, t_end=25.0) if make == "custom" else analytic_mode(model)
    t = np.linspace(0, 25, 400)
    assert np.max(np.abs(mode.wronskian(t) - 1)) < 1e-9
    assert np.min(np.abs(mode.f(t))) > 0
    assert np.max(mode_residual(mode, np.linspace(0, 25, 100))) < 1e-7


def test_combine_identity():
    mode = analytic_mode(make_model("static"))
    same = combine_mode(mode, BogoliubovParams.identity())
    t = np.linspace(0, 5, 7)
    assert np.array_equal(same.f(t), mode.f(t))


def test_combine_squeezed_static():
    mode = analytic_mode(make_model("static"))
    big = combine_mode(mode, BogoliubovParams.from_squeeze(0.5))
    for t in (0.0, 1.0, 2.0):
        assert abs(big.wronskian(t) - 1) < 1e-12
    assert abs(big.f(0.0)) ** 2 == pytest.approx(math.exp(1.0) / 2, rel=1e-14)


def test_bogoliubov_validation():
    with pytest.raises(BogoliubovError):
        BogoliubovParams(1.0, 0.5)
    p = BogoliubovParams.from_squeeze(0.7, 0.3, -1.1)
    assert p.sigma == pytest.approx(0.7)
    assert p.theta_u == pytest.approx(0.3)
    assert p.theta_v == pytest.approx(-1.1)
    assert BogoliubovParams.identity().theta_v == 0.0


params = st.builds(BogoliubovParams.from_squeeze, st.floats(0, 1.2), st.floats(-3, 3), st.floats(-3, 3))


@settings(max_examples=40, deadline=None)
@given(params, params, st.floats(0, 10))
def test_superposition_closure(p1, p2, t):
    mode = analytic_mode(make_model("damped", 1.0, 1.0, 0.1))
    twice = combine_mode(combine_mode(mode, p1), p2)
    once = combine_mode(mode, p1.then(p2))
    a, b = np.array(twice.evaluate(t)), np.array(once.evaluate(t))
    assert np.max(np.abs(a - b)) <= 1e-10 * max(1.0, np.max(np.abs(b)))


@settings(max_examples=40, deadline=None)
@given(params, st.floats(0, 20))
def test_combined_wronskian_property(p, t):
    mode = combine_mode(analytic_mode(make_model("static", 1.3, 0.8)), p)
    assert abs(mode.wronskian(t) - 1) < 1e-9 * max(1.0, abs(p.u) ** 2)
