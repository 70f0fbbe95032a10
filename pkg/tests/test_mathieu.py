import math

import numpy as np
import pytest
from scipy.special import mathieu_a, mathieu_b

from hillspec.mathieu import characteristic_values, count_below, forward_pivots


def _scipy_values(q, count):
    # -y'' + 2q cos(pi x) y = lam y on period 2 is Mathieu's equation in z = pi x / 2
    # with parameter 4q/pi^2; the period-pi solutions have even orders
    qs = 4 * q / math.pi ** 2
    vals = [mathieu_a(0, qs)]
    r = 1
    while len(vals) < count + 2:
        vals += [mathieu_b(2 * r, qs), mathieu_a(2 * r, qs)]
        r += 1
    return np.sort(np.array(vals) * math.pi ** 2 / 4)[:count]


@pytest.mark.parametrize("q", [0.5, 5.0, 20.0])
def test_against_scipy(q):
    ours = characteristic_values(q, 10)
    ref = _scipy_values(q, 10)
    np.testing.assert_allclose(ours, ref, rtol=1e-10, atol=1e-9)


def test_zero_coupling_is_free_spectrum():
    vals = characteristic_values(0.0, 7)
    expected = [0] + [k * k * math.pi ** 2 for k in (1, 1, 2, 2, 3, 3)]
    np.testing.assert_allclose(vals, expected, atol=1e-12)


def test_sturm_count_is_monotone():
    a = [k * k * math.pi ** 2 for k in range(20)]
    b = [math.sqrt(2) * 5] + [5.0] * 18
    counts = [count_below(a, b, lam) for lam in np.linspace(-20, 400, 200)]
    assert counts == sorted(counts)
    assert len(forward_pivots(a, b, 0.0)) == 20
