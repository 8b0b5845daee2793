import math

import pytest

from isoprofile.quadrature import QuadratureError, adaptive_simpson


def test_cubic_is_exact():
    assert adaptive_simpson(lambda x: x**3 - 2 * x, 0.0, 2.0) == pytest.approx(0.0, abs=1e-14)


def test_sine_integral():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, rel=1e-12)


def test_reversed_and_empty_intervals():
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1), rel=1e-12)
    assert adaptive_simpson(math.exp, 0.5, 0.5) == 0.0


def test_bitwise_deterministic():
    f = lambda x: math.exp(-x * x) * math.cos(7 * x)
    assert adaptive_simpson(f, 0.0, 3.0) == adaptive_simpson(f, 0.0, 3.0)


def test_nonconvergence_raises():
    with pytest.raises(QuadratureError):
        adaptive_simpson(lambda x: 1.0 / x if x else 0.0, 0.0, 1.0, max_depth=10)


def test_infinite_limits_rejected():
    with pytest.raises(ValueError):
        adaptive_simpson(math.exp, 0.0, math.inf)
