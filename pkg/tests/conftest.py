import numpy as np
import pytest

from cosshell.geometry import make_chart

CATALOG = ("plate", "cylinder", "sphere")


def catalog_chart(name, derivative_mode="closed-form"):
    if name == "plate":
        return make_chart("plate", derivative_mode=derivative_mode)
    if name == "cylinder":
        return make_chart("cylinder", radius=2.0, x1_min=0.0, x1_max=1.2,
                          x2_min=0.0, x2_max=1.0, derivative_mode=derivative_mode)
    if name == "sphere":
        return make_chart("sphere", radius=1.0, x1_min=0.0, x1_max=1.0,
                          x2_min=-0.6, x2_max=0.6, derivative_mode=derivative_mode)
    raise ValueError(name)


def interior_points(chart, n=3, margin=0.25):
    fr = np.linspace(margin, 1.0 - margin, n)
    return [(chart.x1_min + f * chart.extents[0],
             chart.x2_min + (1.0 - f) * chart.extents[1]) for f in fr]


@pytest.fixture(params=CATALOG)
def chart(request):
    return catalog_chart(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def saddle_chart():
    """Negative-Gauss-curvature graph z = x1^2 - x2^2 (exact under quintic splines)."""
    from cosshell.geometry import _spline_chart_from_samples
    xs = np.linspace(-0.5, 0.5, 13)
    f = xs[:, None] ** 2 - xs[None, :] ** 2
    xx1 = np.broadcast_to(xs[:, None], f.shape)
    xx2 = np.broadcast_to(xs[None, :], f.shape)
    return _spline_chart_from_samples(xs, xs, (xx1, xx2 + 0 * f, f), "saddle")
