import math

import pytest

from pilotwave.classical import BogoliubovParams, analytic_mode, combine_mode, make_model, numeric_mode
from pilotwave.invariant import build_frame

CUSTOM = dict(gamma=0.05, a=0.2, nu=1.3, b=0.3, mu=0.7)


def preset_frame(name, sigma=0.5, gamma=0.1):
    """Frames for the four analytic presets plus a driven custom profile."""
    if name == "static":
        model = make_model("static")
        return build_frame(analytic_mode(model), 1.0)
    if name == "static-squeezed":
        model = make_model("static")
        return build_frame(combine_mode(analytic_mode(model), BogoliubovParams.from_squeeze(sigma)), 1.0)
    if name == "damped":
        model = make_model("damped", gamma=gamma)
        return build_frame(analytic_mode(model), model.damped_frequency)
    if name == "damped-squeezed":
        model = make_model("damped", gamma=gamma)
        mode = combine_mode(analytic_mode(model), BogoliubovParams.from_squeeze(sigma))
        return build_frame(mode, model.damped_frequency)
    if name == "custom":
        model = make_model("custom", **CUSTOM)
        return build_frame(numeric_mode(model, 0.0, t_end=25.0))
    raise KeyError(name)


PRESETS = ("static", "static-squeezed", "damped", "damped-squeezed")
ALL_FRAMES = PRESETS + ("custom",)


@pytest.fixture(scope="session")
def frames():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = preset_frame(name)
        return cache[name]

    return get


SQRT2 = math.sqrt(2.0)
