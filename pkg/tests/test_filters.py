from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualshear.filters import (
    PROFILE_DEPTH, DirectionalWindow, FilterBank, GeneratorInfo, IndexingBug, InvalidSystem,
    WindowRejected, build_window, conic_floor, filter_G, frame_multiplier, l1_diagnostic,
    partition_identity_residual, theta_profile, theta_profiles,
)
from dualshear.grid import FourierGrid
from dualshear.index import ShearParam, inv, parabolic, shear_matrix, shear_set, to_array, transpose

ZERO = ShearParam(0, 0)
HALF = ShearParam.from_value(Fraction(1, 2))


@pytest.fixture(scope="module")
def window():
    return build_window(4)


@pytest.fixture(scope="module")
def gen():
    return GeneratorInfo.build(4)


@pytest.fixture(scope="module")
def bank128():
    return FilterBank.build(FourierGrid(128), jmax=6)


class ZeroWindow(DirectionalWindow):
    def ghat(self, w1, w2):
        return np.zeros(np.broadcast(np.asarray(w1), np.asarray(w2)).shape, complex)

    def ghat_sq(self, a, b):
        return np.zeros(np.broadcast(np.asarray(a), np.asarray(b)).shape)


@pytest.fixture(scope="module")
def zero_window(window):
    return ZeroWindow(K=window.K, cmf=window.cmf, delta_g=window.delta_g)


def test_window_vanishes_on_axis(window):
    b = np.linspace(-5, 5, 41)
    assert np.abs(window.ghat(np.zeros_like(b), b)).max() < 1e-15


def test_conic_floor_against_brute_scan(window):
    a = np.linspace(0.5, 1.0, 301)
    lo = np.inf
    for ai in a:
        b = np.linspace(-ai, ai, 301)
        lo = min(lo, np.abs(window.ghat(np.full_like(b, ai), b)).min())
        lo = min(lo, np.abs(window.ghat(np.full_like(b, -ai), b)).min())
    assert window.delta_g > 1e-8
    assert window.delta_g == pytest.approx(lo, rel=2e-3)
    assert abs(window.ghat(0.75, 0.74)) >= window.delta_g


def test_window_decay_and_support(window):
    x1, x2, g = window.spatial(6)
    (a1, b1), (a2, b2) = window.support_box
    assert x1.min() >= a1 and x1.max() <= b1 and x2.min() >= a2 and x2.max() <= b2
    # eta has K_g vanishing moments
    assert window.decay["alpha1"] == pytest.approx(4.0, abs=0.05)
    assert window.decay["beta1"] > 1.5


def test_window_spatial_matches_fourier(window):
    # Riemann-sum Fourier transform of the cascade samples vs the product formula
    x1, x2, g = window.spatial(9)
    h1, h2 = x1[1] - x1[0], x2[1] - x2[0]
    for w in [(0.7, 0.2), (-0.6, 0.5), (1.5, -1.0)]:
        ft = np.exp(-2j * np.pi * w[0] * x1) @ g @ np.exp(-2j * np.pi * w[1] * x2) * h1 * h2
        assert abs(ft) == pytest.approx(abs(window.ghat(*w)), abs=2e-3)


def test_rejected_window():
    class Flat(DirectionalWindow):
        def theta_sq(self, b):
            return np.zeros_like(np.asarray(b, float))

    w = build_window(2)
    assert conic_floor(Flat(K=2, cmf=w.cmf)) == 0.0
    with pytest.raises(WindowRejected):
        import dualshear.filters as F
        orig = F.DirectionalWindow
        F.DirectionalWindow = Flat
        try:
            build_window(2)
        finally:
            F.DirectionalWindow = orig


def loop_oracle(window, s, xi, jmax):
    total = 0.0
    ST_inv = to_array(inv(transpose(shear_matrix(s))))
    for j in range(s.j0, jmax + 1):
        e = to_array(inv(parabolic(j))) @ ST_inv @ xi
        total += abs(window.ghat(e[0], e[1])) ** 2
    return total


@pytest.mark.parametrize("s", [HALF, ShearParam.from_value(Fraction(-3, 4)), ShearParam(0, 1)])
def test_filter_matches_loop_oracle(window, gen, s):
    grid = FourierGrid(64)
    G, tail = filter_G(s, grid, 4, window, gen)
    for k1, k2 in [(5, 3), (-17, 9), (30, -31), (2, 0)]:
        xi = np.array([k1, k2]) / grid.cells
        assert G[k1 % 64, k2 % 64] == pytest.approx(loop_oracle(window, s, xi, 4), abs=1e-12)
    assert tail > 0


def test_filter_zero_window(zero_window, gen):
    grid = FourierGrid(32)
    G0, _ = filter_G(ZERO, grid, 3, zero_window, gen)
    w1, w2 = grid.omega
    np.testing.assert_array_equal(G0, gen.phi0_sq(w1, w2))
    G, _ = filter_G(HALF, grid, 3, zero_window, gen)
    assert not G.any()


def test_filter_nonnegative_and_monotone(window, gen):
    grid = FourierGrid(64)
    for s in shear_set(4):
        a, _ = filter_G(s, grid, 3, window, gen)
        b, _ = filter_G(s, grid, 4, window, gen)
        assert a.min() >= 0.0
        assert np.all(b >= a)


def test_theta_examples(window, gen):
    assert theta_profile(window, 0.0, 0.0, None, 6, gen) == pytest.approx(1.0, abs=1e-14)
    b = np.linspace(-3, 3, 13)
    assert theta_profile(window, np.zeros_like(b), b, 0, 6).max() < 1e-30
    with pytest.raises(ValueError):
        theta_profile(window, 0.0, 0.0, None, 6)


@given(st.floats(-4, 4), st.floats(-4, 4))
def test_theta_difference_two_terms(w1, w2):
    window = build_window(4)
    diff = theta_profile(window, w1, w2, 2, 5) - theta_profile(window, w1, w2, 0, 5)
    xi = np.array([w1, w2])
    expected = sum(abs(window.ghat(*(to_array(inv(parabolic(i))) @ xi))) ** 2 for i in (-1, -2))
    assert diff == pytest.approx(expected, abs=1e-12)


def test_theta_matches_G0(window, gen):
    grid = FourierGrid(64)
    G0, _ = filter_G(ZERO, grid, 4, window, gen)
    np.testing.assert_allclose(theta_profiles(None, grid, 4, window, gen), G0, atol=1e-14)
    with pytest.raises(ValueError):
        theta_profiles(3, grid, -4, window)


def test_partition_identity(bank128):
    assert partition_identity_residual(bank128) < 1e-11


def test_partition_identity_single_scale():
    bank = FilterBank.build(FourierGrid(64), jmax=0)
    assert all(s.j0 == 0 for s in bank.shears)
    assert partition_identity_residual(bank) < 1e-12


def test_partition_identity_zero_window(zero_window):
    bank = FilterBank.build(FourierGrid(32), jmax=3, window=zero_window)
    assert partition_identity_residual(bank) == 0.0


def test_partition_identity_detects_indexing_bug():
    bank = FilterBank.build(FourierGrid(32), jmax=3)
    s = bank.shears[1]
    bank.G[s] = np.roll(bank.G[s], 1, axis=1)
    with pytest.raises(IndexingBug):
        partition_identity_residual(bank)


def test_frame_multiplier(bank128):
    rep = frame_multiplier(bank128)
    assert rep.A_hat > 0
    assert rep.A_hat >= rep.lower_bound_cert
    assert rep.B_hat >= rep.A_hat and rep.ratio == rep.B_hat / rep.A_hat
    assert rep.lower_bound_cert == pytest.approx(min(rep.delta_phi ** 2, rep.delta_g) ** 2)
    grid = bank128.grid
    np.testing.assert_allclose(grid.rotate(rep.W), rep.W, atol=1e-14)


def test_frame_multiplier_zero_window(zero_window):
    bank = FilterBank.build(FourierGrid(32), jmax=3, window=zero_window)
    assert bank.W[0, 0] == pytest.approx(2.0, abs=1e-14)
    with pytest.raises(InvalidSystem):
        frame_multiplier(bank)  # phi_hat vanishes at nonzero integers


def test_partial_bank_refuses_multiplier():
    bank = FilterBank.build(FourierGrid(32), jmax=3, only=[ZERO])
    assert not bank.complete
    with pytest.raises(InvalidSystem):
        frame_multiplier(bank)


def test_delta_phi(gen):
    xi = np.linspace(-0.5, 0.5, 2001)
    assert gen.delta_phi == pytest.approx(np.abs(gen.cmf.phi_hat(xi, PROFILE_DEPTH)).min())


def test_l1_diagnostic_bounded(window, gen):
    grid = FourierGrid(128, 4)
    for p in range(5):
        v = np.array([l1_diagnostic(window, gen, grid, j, 0, p, 12) for j in range(9)])
        assert v.max() / v.min() <= 4.0
        assert np.polyfit(np.arange(9), np.log(v), 1)[0] < 0.02
