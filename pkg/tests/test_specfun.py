import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ntdeig import specfun
from ntdeig.specfun import bessel01, bessel_j0, bessel_j1, bessel_y0, bessel_y1, hankel1

J01 = 2.404825557695773

# mpmath at 40 digits: x -> (J0, J1, Y0, Y1)
FROZEN = {
    0.001: (0.9999997500000156, 0.0004999999375000026, -4.471416611375923, -636.6221672311394),
    0.5: (0.9384698072408129, 0.2422684576748739, -0.44451873350670656, -1.471472392670243),
    1.9999: (0.22394845194430277, 0.5767312529177935, 0.510364966587098, -0.10708882173811195),
    2.0: (0.22389077914123567, 0.5767248077568734, 0.5103756726497451, -0.10703243154093754),
    2.0001: (0.2238331069828847, 0.5767183585928753, 0.5103863730734735, -0.10697604336047924),
    7.3: (0.2882169476350144, 0.08257043049325784, 0.0627738863740376, -0.2845943718680721),
    24.9999: (0.09625424774461633, -0.12536037705410588, -0.127259314647986, -0.09881763464187114),
    25.0: (0.09626678327595811, -0.1253502495802899, -0.12724943226800614, -0.09882996478323741),
    25.0001: (0.09627931779449196, -0.12534012089548935, -0.12723954865506393, -0.09884229388856683),
    50.0: (0.055812327669251816, -0.09751182812517514, -0.09806499547007708, -0.05679566856201477),
    123.4: (-0.07152553671926015, -0.006850999885654373, -0.0065611390519846385, 0.07149953939206484),
    500.0: (-0.034100556880732, 0.010472613470372294, 0.010506708739831373, 0.03411108062913713),
    999.9: (0.025134918974209743, 0.0022304980404026314, 0.0022179290498905335, -0.025133813041543007),
    3999.0: (-0.006464441428912312, 0.010834584646608176, 0.010835392819144626, 0.0064657962422129305),
}


def _modulus_err(got, want):
    # error relative to sqrt(J^2 + Y^2) of the same order; well defined through zeros
    j0, j1, y0, y1 = want
    g0, g1, gy0, gy1 = got
    m0 = math.hypot(j0, y0)
    m1 = math.hypot(j1, y1)
    return max(abs(g0 - j0) / m0, abs(gy0 - y0) / m0, abs(g1 - j1) / m1, abs(gy1 - y1) / m1)


@pytest.mark.parametrize("x", sorted(FROZEN))
def test_frozen_values(x):
    j0, y0, j1, y1 = (float(a[0]) for a in bessel01(np.array([x])))
    got = (j0, j1, y0, y1)
    assert _modulus_err(got, FROZEN[x]) <= 5e-15


def test_frozen_values_regenerate():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    for x, vals in FROZEN.items():
        ref = (mp.besselj(0, x), mp.besselj(1, x), mp.bessely(0, x), mp.bessely(1, x))
        assert all(float(r) == v for r, v in zip(ref, vals))


def test_dense_sweep_against_mpmath():
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    xs = np.concatenate([np.geomspace(1e-3, 4000, 150), np.linspace(1.5, 30, 60)])
    J0, Y0, J1, Y1 = bessel01(xs)
    worst = 0.0
    for i, x in enumerate(xs):
        want = tuple(float(f(n, x)) for f, n in
                     ((mp.besselj, 0), (mp.besselj, 1), (mp.bessely, 0), (mp.bessely, 1)))
        worst = max(worst, _modulus_err((J0[i], J1[i], Y0[i], Y1[i]), want))
    assert worst <= 5e-15


def test_j0_at_zero():
    assert bessel_j0(0.0) == 1.0
    assert bessel_j1(0.0) == 0.0


def test_j0_first_zero():
    assert abs(bessel_j0(J01)) < 1e-15
    # the root bracket of J0 on (2, 3) by bisection on the implementation itself
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if bessel_j0(lo) * bessel_j0(mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert abs(lo - J01) < 1e-14


@pytest.mark.parametrize("x", [0.5, 5.0, 50.0, 500.0])
def test_wronskian_points(x):
    w = bessel_j1(x) * bessel_y0(x) - bessel_j0(x) * bessel_y1(x)
    assert abs(w - 2.0 / (math.pi * x)) <= 1e-13 * max(1.0, 2.0 / (math.pi * x))


def test_wronskian_log_sweep():
    xs = np.geomspace(1e-3, 4e3, 100)
    J0, Y0, J1, Y1 = bessel01(xs)
    w = J1 * Y0 - J0 * Y1
    target = 2.0 / (np.pi * xs)
    assert np.max(np.abs(w - target) / np.maximum(target, 1.0)) <= 1e-13
    # relative to the exact value as well, for the large-x tail
    assert np.max(np.abs(w / target - 1.0)) <= 1e-13


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.05, max_value=3000.0))
def test_derivative_recurrence(x):
    h = 1e-8
    fd = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h)
    assert abs(fd + bessel_j1(x)) <= 1e-6


@pytest.mark.parametrize("x0", [specfun._SERIES_MAX, specfun._ASYMP_MIN])
def test_regime_continuity(x0):
    below = np.array([np.nextafter(x0, 0.0)])
    at = np.array([x0])
    for a, b in zip(bessel01(below), bessel01(at)):
        assert abs(a[0] - b[0]) <= 1e-13


def test_y_domain():
    for fn in (bessel_y0, bessel_y1, hankel1):
        with pytest.raises(ValueError):
            fn(0.0)
        with pytest.raises(ValueError):
            fn(-1.0)


def test_hankel_pair():
    for x in (0.3, 4.0, 77.7):
        h = hankel1(x)
        assert h.h0.real == bessel_j0(x)
        assert h.h0.imag == bessel_y0(x)
        assert h.h1 == complex(bessel_j1(x), bessel_y1(x))
    big = hankel1(1000.0)
    assert abs(abs(big.h0) / math.sqrt(2 / (math.pi * 1000.0)) - 1) < 1e-3
    at_zero = hankel1(J01).h0
    assert abs(at_zero.real) <= 1e-14 * abs(at_zero)


def test_vectorized_matches_scalar():
    xs = np.array([0.1, 1.0, 3.0, 30.0, 300.0])
    J0, Y0, J1, Y1 = bessel01(xs)
    for i, x in enumerate(xs):
        assert J0[i] == bessel_j0(x) and Y1[i] == bessel_y1(x)
    arr = bessel_j0(xs.reshape(5, 1))
    assert arr.shape == (5, 1)
