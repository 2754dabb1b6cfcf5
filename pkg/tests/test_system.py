import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualshear.filters import InvalidSystem, frame_multiplier
from dualshear.grid import ShapeError
from dualshear.index import DomainError, LambdaIndex, ShearParam
from dualshear.onb import OnbElementSpec, element_fourier
from dualshear.system import (
    CoefficientTable, DualizableSystem, WraparoundWarning, analyze, element_center,
    element_fourier_system, element_spatial, support_extent, synthesize_dual, weighted_energy,
)

ZERO = ShearParam(0, 0)
HALF = ShearParam.from_value(Fraction(1, 2))
ONE = ShearParam.from_value(1)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def random_lambda(sys, rng, cone=None):
    layout = sys.layout()
    (c, s, j, p), shape = layout[rng.integers(len(layout))]
    m = (int(rng.integers(shape[0])), int(rng.integers(shape[1])))
    return LambdaIndex(c if cone is None else cone, j, s, m, p)


def test_zero_signal(sys64):
    t = analyze(np.zeros((64, 64)), sys64)
    assert t.count == sum(a * b for _, (a, b) in sys64.layout())
    assert not t.flat().any()
    assert not synthesize_dual(t, sys64).any()


def test_table_count_matches_layout(sys64):
    t = analyze(np.ones((64, 64)), sys64)
    # two cones, each shear a complete basis of N^2 elements
    assert t.count == 2 * len(sys64.shears) * 64 ** 2
    assert [k for k, _ in sys64.layout()] == t.keys()


def test_shape_error(sys64):
    with pytest.raises(ShapeError):
        analyze(np.zeros((32, 32)), sys64)
    t = analyze(np.zeros((64, 64)), sys64)
    t.grid = {"N": 32, "coarse_log2": 1}
    with pytest.raises(ShapeError):
        synthesize_dual(t, sys64)


def test_pure_exponential(sys64, rng):
    grid = sys64.grid
    k0 = (5, -9)
    x1, x2 = np.meshgrid(np.arange(64) / 64, np.arange(64) / 64, indexing="ij")
    f = np.exp(2j * np.pi * (k0[0] * x1 + k0[1] * x2))
    t = analyze(f, sys64)
    idx = (k0[0] % 64, k0[1] % 64)
    for _ in range(6):
        lam = random_lambda(sys64, rng, cone=0)
        E = element_fourier(OnbElementSpec("phi" if lam.j == -1 else "psi", lam.scale, lam.s,
                                           lam.m, lam.p), grid, sys64.cmf)
        expected = np.conj(sys64.bank.G[lam.s][idx]) * np.conj(E[idx])
        got = t.slices[(0, lam.s, lam.j, lam.p)][lam.m]
        assert got == pytest.approx(expected, abs=1e-14)


def circular_convolution(a, b):
    # direct sum, no FFT: (a * b)[x] = sum_y a[y] b[x - y]
    N = a.shape[0]
    out = np.zeros_like(b, dtype=complex)
    for y1 in range(N):
        for y2 in range(N):
            if a[y1, y2] != 0:
                out += a[y1, y2] * np.roll(np.roll(b, y1, axis=0), y2, axis=1)
    return out / N ** 2


def test_brute_force_spatial_oracle(sys64, rng):
    grid = sys64.grid
    f = rng.standard_normal(grid.shape)
    t = analyze(f, sys64)
    for _ in range(5):
        lam = random_lambda(sys64, rng, cone=0)
        kernel = grid.spatial(sys64.bank.G[lam.s])
        kernel[np.abs(kernel) < 1e-14 * np.abs(kernel).max()] = 0
        spec = OnbElementSpec("phi" if lam.j == -1 else "psi", lam.scale, lam.s, lam.m, lam.p)
        psi = grid.spatial(element_fourier(spec, grid, sys64.cmf))
        elem = circular_convolution(kernel, psi)
        oracle = np.vdot(elem, f) * grid.cell_area
        assert t.slices[(0, lam.s, lam.j, lam.p)][lam.m] == pytest.approx(oracle, abs=1e-10)


def test_round_trip_128(sys128, rng):
    f = rng.standard_normal((128, 128))
    assert rel(synthesize_dual(analyze(f, sys128), sys128), f) <= 1e-10


def test_complex_round_trip(sys64, rng):
    f = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    g = synthesize_dual(analyze(f, sys64), sys64, real=False)
    assert rel(g, f) <= 1e-10


def test_synthesis_linearity(sys64, rng):
    c1 = analyze(rng.standard_normal((64, 64)), sys64)
    c2 = analyze(rng.standard_normal((64, 64)), sys64)
    a, b = 0.7, -2.5
    lhs = synthesize_dual(c1.scaled(a) + c2.scaled(b), sys64)
    rhs = a * synthesize_dual(c1, sys64) + b * synthesize_dual(c2, sys64)
    assert np.abs(lhs - rhs).max() < 1e-12


def test_weighted_parseval_and_frame_bounds(sys64, rng):
    rep = frame_multiplier(sys64.bank)
    grid = sys64.grid
    for _ in range(100):
        f = rng.standard_normal((64, 64))
        e = analyze(f, sys64).energy()
        assert e == pytest.approx(weighted_energy(f, sys64), rel=1e-8)
        norm = np.sum(f ** 2) * grid.cell_area
        assert rep.A_hat * norm * (1 - 1e-12) <= e <= rep.B_hat * norm * (1 + 1e-12)


def test_cone_symmetry(sys64, rng):
    grid = sys64.grid
    f = rng.standard_normal((64, 64))
    a = analyze(f, sys64)
    b = analyze(grid.rotate(f), sys64)
    # quarter turn: cone 1 of f o R is cone 0 of f
    for key in a.keys():
        if key[0] == 0:
            np.testing.assert_allclose(b.slices[(1,) + key[1:]], a.slices[key], atol=1e-10)
    # cone 0 of f o R is cone 1 of f o R o R, i.e. of f(-x)
    c = analyze(grid.rotate(grid.rotate(f)), sys64)
    for key in b.keys():
        if key[0] == 0:
            np.testing.assert_allclose(b.slices[key], c.slices[(1,) + key[1:]], atol=1e-10)


def test_partial_system_has_no_dual():
    sys = DualizableSystem.build(32, only=[ZERO])
    t = analyze(np.ones((32, 32)), sys)
    with pytest.raises(InvalidSystem):
        synthesize_dual(t, sys)


def test_truncated_system(rng):
    sys = DualizableSystem.build(32, J=2, P=1)
    t = analyze(rng.standard_normal((32, 32)), sys)
    assert all(j <= 2 and p <= 1 for _, _, j, p in t.keys())
    with pytest.raises(DomainError):
        element_fourier_system(LambdaIndex(0, 3, ZERO, (0, 0), 0), sys)
    with pytest.raises(DomainError):
        element_fourier_system(LambdaIndex(0, 1, ZERO, (0, 0), 2), sys)


def test_element_paths_agree(sys64, rng):
    for _ in range(20):
        lam = random_lambda(sys64, rng)
        a = element_fourier_system(lam, sys64, path="filter")
        b = element_fourier_system(lam, sys64, path="theta")
        assert rel(b, a) <= 1e-10
    with pytest.raises(ValueError):
        element_fourier_system(lam, sys64, path="other")
    with pytest.raises(ValueError):
        element_fourier_system(lam, sys64, which="other")


def test_element_matches_coefficients(sys64, rng):
    grid = sys64.grid
    f = rng.standard_normal(grid.shape)
    t = analyze(f, sys64)
    F = grid.fourier(f)
    for _ in range(10):
        lam = random_lambda(sys64, rng)
        E = element_fourier_system(lam, sys64)
        assert np.vdot(E, F) == pytest.approx(t.slices[(lam.cone, lam.s, lam.j, lam.p)][lam.m],
                                              abs=1e-13)


def test_dual_elements_reconstruct(sys64, rng):
    # f = sum over lambda of <f, psi> dual_psi, checked on a random sparse table
    grid = sys64.grid
    t = analyze(np.zeros(grid.shape), sys64)
    flat = t.flat()
    pos = rng.choice(flat.size, 4, replace=False)
    vals = rng.standard_normal(4)
    flat[pos] = vals
    g = synthesize_dual(t.with_flat(flat), sys64)
    direct = sum(v * element_spatial(t.index_of(int(p)), "dual", sys64) for p, v in zip(pos, vals))
    assert np.abs(g - direct).max() < 1e-12


@pytest.mark.parametrize("s, m, shift", [
    (ZERO, (1, 0), (8, 0)), (ZERO, (0, 1), (0, 16)), (HALF, (1, 0), (8, 0)),
    (ONE, (0, 1), (-16, 16)),
])
def test_translation_covariance(s, m, shift):
    sys = DualizableSystem.build(64, 1)
    j = 2
    a = element_spatial(LambdaIndex(0, j, s, (2, 1), 0), "primal", sys)
    b = element_spatial(LambdaIndex(0, j, s, (2 + m[0], 1 + m[1]), 0), "primal", sys)
    assert np.abs(np.roll(a, shift, axis=(0, 1)) - b).max() < 1e-10


def test_index_of_round_trip(sys64):
    t = analyze(np.zeros((64, 64)), sys64)
    pos = 0
    for key, shape in sys64.layout()[:3]:
        lam = t.index_of(pos + shape[1] + 1)
        assert (lam.cone, lam.s, lam.j, lam.p) == key and lam.m == (1, 1)
        pos += shape[0] * shape[1]
    with pytest.raises(IndexError):
        t.index_of(t.count)


@pytest.fixture(scope="module")
def support_systems():
    return {v: DualizableSystem.build(512, 5, only=[ShearParam.from_value(v)])
            for v in (0, 1, -1)}


def test_support_coarse_element(support_systems):
    sys = support_systems[0]
    rep = support_extent(LambdaIndex(0, -1, ZERO, (8, 8), 0), sys)
    L = sys.cmf.support
    assert not rep.wraps
    assert L <= rep.c <= 2 * L
    assert rep.center == (0.25, 0.25)


def test_support_sheared_box(support_systems):
    c0 = support_extent(LambdaIndex(0, -1, ZERO, (8, 8), 0), support_systems[0],
                        threshold=1e-4).c
    for v, m in ((1, (16, 8)), (-1, (0, 8))):
        s = ShearParam.from_value(v)
        rep = support_extent(LambdaIndex(0, -1, s, m, 0), support_systems[v], threshold=1e-4)
        assert not rep.wraps
        assert abs(rep.c - c0) <= 0.1 * c0


def test_support_cap_and_warning(support_systems):
    sys = support_systems[0]
    cap = support_extent(LambdaIndex(0, 0, ZERO, (8, 8), 0), sys).c
    rep = support_extent(LambdaIndex(0, 2, ZERO, (32, 16), 0), sys, cap=cap)
    assert rep.within_cap
    with pytest.warns(WraparoundWarning):
        rep = support_extent(LambdaIndex(0, -1, ONE, (8, 8), 0), support_systems[1])
    assert rep.wraps and rep.within_cap is None
    with pytest.raises(ValueError):
        support_extent(LambdaIndex(0, -1, ZERO, (8, 8), 0), sys, threshold=1.5)


def test_support_cone_one(support_systems):
    sys = support_systems[0]
    a = support_extent(LambdaIndex(0, 0, ZERO, (8, 8), 0), sys)
    b = support_extent(LambdaIndex(1, 0, ZERO, (8, 8), 0), sys)
    assert b.c == pytest.approx(a.c)


def test_element_center():
    sys = DualizableSystem.build(64, 1)
    lam = LambdaIndex(0, 2, HALF, (4, 2), 3)
    # (A_2 S_1/2)^{-1} D_3 m / cells with D_3 = diag(1, 1/4)
    y2 = 2 * 0.25 / 2
    y1 = (4 / 4) - 0.5 * y2
    np.testing.assert_allclose(element_center(lam, sys), np.array([y1, y2]) / 2)


@given(st.integers(0, 2 ** 31), st.floats(-3, 3), st.floats(-3, 3))
def test_analysis_linearity(seed, a, b):
    sys = _small()
    rng = np.random.default_rng(seed)
    f, g = rng.standard_normal((2, 16, 16))
    lhs = analyze(a * f + b * g, sys).flat()
    rhs = a * analyze(f, sys).flat() + b * analyze(g, sys).flat()
    assert np.abs(lhs - rhs).max() < 1e-12


_SMALL = {}


def _small():
    if not _SMALL:
        _SMALL["sys"] = DualizableSystem.build(16)
    return _SMALL["sys"]


@given(st.integers(0, 2 ** 31))
def test_round_trip_property(seed):
    sys = _small()
    f = np.random.default_rng(seed).standard_normal((16, 16))
    assert rel(synthesize_dual(analyze(f, sys), sys), f) <= 1e-12


def test_real_signal_real_coefficients(sys64, rng):
    t = analyze(rng.standard_normal((64, 64)), sys64)
    flat = t.flat()
    assert np.abs(flat.imag).max() <= 1e-12 * np.abs(flat).max()


def test_filters_even_in_frequency(sys64):
    grid = sys64.grid
    for s in sys64.shears:
        G = sys64.bank.G[s]
        np.testing.assert_array_equal(grid.even_max(G), G)
