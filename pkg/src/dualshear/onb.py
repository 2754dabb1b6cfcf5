"""Tensor atoms and the sheared shearlet-type wavelet bases on the torus.

For each shear s the basis is built from a periodic wavelet decomposition
along x1 (coarse space at scale j0(s), details j0..finest), each x1 band
split along x2 starting at scale floor(j/2) with detail levels indexed by p.
The shear itself acts as an exact unitary: every row at height x2 is
shifted along x1 by ``s * x2`` through its Fourier phase. Both ingredients
are exact, so every Psi_s is an orthonormal basis of the grid to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .generators import MirrorFilter
from .grid import FourierGrid
from .index import DomainError, ShearParam, floor_half, matrices, to_array


class ResolutionError(ValueError):
    """An atom asks for a level finer than the grid resolves."""


@dataclass(frozen=True)
class TensorAtomSpec:
    kind: str  # "phi" or "psi"
    p: int

    def __post_init__(self):
        if self.kind not in ("phi", "psi"):
            raise ValueError("kind must be 'phi' or 'psi'")
        if self.p < 0:
            raise ValueError("p must be nonnegative")


@dataclass(frozen=True)
class OnbElementSpec:
    kind: str  # "phi" (coarse, j == j0) or "psi"
    j: int
    s: ShearParam
    m: tuple[int, int]
    p: int

    def __post_init__(self):
        if self.kind == "phi" and self.j != self.s.j0:
            raise DomainError("phi-type elements live only at j = j0(s)")
        if self.j < self.s.j0:
            raise DomainError(f"j={self.j} below j0={self.s.j0}")


def x2_level(scale: int, p: int) -> int:
    """Dyadic level of the x2 factor of an element at x1 scale ``scale``."""
    return floor_half(scale) + max(p - 1, 0)


# --- 1-D factors --------------------------------------------------------------

def factor_1d(cmf: MirrorFilter, kind: str, arg, depth: int) -> np.ndarray:
    """phi_hat_1 or psi_hat_1 at ``arg`` with the grid's product depth."""
    if kind == "phi":
        return cmf.phi_hat(arg, depth)
    return cmf.psi_hat(arg, depth - 1)


def depth_for(grid: FourierGrid, level: int) -> int:
    """m0 factors a level-``level`` factor keeps on this grid (coarse count)."""
    r = grid.levels - level
    if r < 0:
        raise ResolutionError(f"level {level} is finer than the grid resolves")
    return r


@lru_cache(maxsize=256)
def _response(K: int, N: int, coarse_log2: int, kind: str, level: int) -> np.ndarray:
    """Fourier coefficients of the L2-normalized 1-D element at m = 0."""
    grid = FourierGrid(N, coarse_log2)
    cmf = MirrorFilter.daubechies(K)
    r = depth_for(grid, level)
    if kind == "psi" and r < 1:
        raise ResolutionError(f"detail level {level} is finer than the grid resolves")
    arg = grid.k / (grid.cells * 2.0 ** level)
    out = factor_1d(cmf, kind, arg, r) / np.sqrt(grid.cells * 2.0 ** level)
    out.setflags(write=False)
    return out


def response(cmf: MirrorFilter, grid: FourierGrid, kind: str, level: int) -> np.ndarray:
    return _response(cmf.K, grid.N, grid.coarse_log2, kind, level)


# --- atoms and elements -------------------------------------------------------

def atom_fourier(spec: TensorAtomSpec, grid: FourierGrid, cmf: MirrorFilter,
                 depth: int | None = None, w1=None, w2=None) -> np.ndarray:
    """phi^p_hat or psi^p_hat at generator frequencies (default: the grid).

    ``psi^p_hat(w) = psi_1_hat(w1) * 2**(-(p-1)/2) * psi_1_hat(w2 / 2**(p-1))``
    for p > 0; the x1 factor is phi_1_hat for phi-type atoms and the x2
    factor is phi_1_hat for p = 0. Product depths follow the grid (each
    factor keeps the m0 terms the lattice resolves) unless ``depth`` is given.
    """
    if w1 is None:
        w1, w2 = grid.omega
    w1 = np.asarray(w1, float)
    w2 = np.asarray(w2, float)
    lvl2 = max(spec.p - 1, 0)
    d1 = depth_for(grid, 0) if depth is None else depth
    d2 = depth_for(grid, lvl2) if depth is None else depth
    f1 = factor_1d(cmf, spec.kind, w1, d1)
    if spec.p == 0:
        f2 = factor_1d(cmf, "phi", w2, d2)
    else:
        if d2 < 1:
            raise ResolutionError(f"p={spec.p} is finer than the grid resolves")
        f2 = 2.0 ** (-lvl2 / 2) * factor_1d(cmf, "psi", w2 / 2.0 ** lvl2, d2)
    return f1 * f2


def element_closed_form(spec: OnbElementSpec, grid: FourierGrid, cmf: MirrorFilter,
                        e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """``|det A_j|^{-1/2} atom(e) exp(-2 pi i <D_p m, e>) / cells`` at given points e.

    ``e`` is the frequency already mapped by the element's matrix; product
    depths follow the levels the element lives on.
    """
    lvl2 = x2_level(spec.j, spec.p)
    r1 = depth_for(grid, spec.j)
    if spec.kind == "psi" and r1 < 1:
        raise ResolutionError(f"scale j={spec.j} is finer than the grid resolves")
    f1 = factor_1d(cmf, spec.kind, e1, r1)
    if spec.p == 0:
        f2 = factor_1d(cmf, "phi", e2, depth_for(grid, lvl2))
    else:
        r2 = depth_for(grid, lvl2)
        if r2 < 1:
            raise ResolutionError(f"p={spec.p} at j={spec.j} is finer than the grid")
        dp = spec.p - 1
        f2 = 2.0 ** (-dp / 2) * factor_1d(cmf, "psi", e2 / 2.0 ** dp, r2)
    D = to_array(matrices(spec.j, 0, spec.p).D)
    phase = np.exp(-2j * np.pi * (D[0, 0] * spec.m[0] * e1 + D[1, 1] * spec.m[1] * e2))
    detA = 2.0 ** (spec.j + floor_half(spec.j))
    return f1 * f2 * phase / np.sqrt(detA) / grid.cells


def element_fourier_unsheared(spec: OnbElementSpec, grid: FourierGrid,
                              cmf: MirrorFilter) -> np.ndarray:
    """Closed form of the element with the shear left out (``A_j^{-T} w``)."""
    w1, w2 = grid.omega
    return element_closed_form(spec, grid, cmf, w1 / 2.0 ** spec.j,
                               w2 / 2.0 ** floor_half(spec.j))


def x2_extent(spec: OnbElementSpec, grid: FourierGrid, cmf: MirrorFilter) -> tuple[float, float]:
    """Interval of torus heights x2 covered by the element (before wrapping)."""
    dp = max(spec.p - 1, 0)
    lo = spec.m[1] * 2.0 ** -dp
    hi = lo + cmf.support * (1.0 if spec.p == 0 else 2.0 ** -dp)
    scale = grid.cells * 2.0 ** floor_half(spec.j)
    return lo / scale, hi / scale


def straddles_seam(spec: OnbElementSpec, grid: FourierGrid, cmf: MirrorFilter) -> bool:
    """True when the element crosses the row x2 = 0 where the grid shear wraps."""
    lo, hi = x2_extent(spec, grid, cmf)
    return bool(np.floor(lo) + 1 < hi - 1e-12)


def shear_compose(F: np.ndarray, s, grid: FourierGrid) -> np.ndarray:
    """Fourier coefficients of ``f o S_s``, i.e. ``f(x1 + s x2, x2)``.

    Each row at height ``x2 = i/N``, i in [0, N), is translated along x1
    through its Fourier phase; this is unitary on the grid for any s.
    """
    return _row_shift(F, float(s.value if isinstance(s, ShearParam) else s), grid, +1)


def shear_compose_inv(F: np.ndarray, s, grid: FourierGrid) -> np.ndarray:
    """Fourier coefficients of ``f o S_s^{-1}``; adjoint of :func:`shear_compose`."""
    return _row_shift(F, float(s.value if isinstance(s, ShearParam) else s), grid, -1)


@lru_cache(maxsize=128)
def _shift_phase(N: int, s: float) -> np.ndarray:
    k = np.fft.fftfreq(N, 1.0 / N)
    out = np.exp(2j * np.pi * s * np.outer(k, np.arange(N) / N))
    # the Nyquist column moves by the nearest whole pixel so real rows stay real
    out[N // 2] = (-1.0) ** np.rint(s * np.arange(N))
    out.setflags(write=False)
    return out


def _row_shift(F, s, grid, sign):
    if s == 0.0:
        return F
    rows = np.fft.ifft(F, axis=1)
    phase = _shift_phase(grid.N, s)
    rows *= phase if sign > 0 else phase.conj()
    return np.fft.fft(rows, axis=1)


def element_fourier(spec: OnbElementSpec, grid: FourierGrid, cmf: MirrorFilter) -> np.ndarray:
    """Fourier coefficients of the unit-norm element ``psi_{j,s,m,p}`` on the torus.

    Equals ``|det A_j|^{-1/2} atom((A_j S_s)^{-T} w) exp(-2 pi i <D_p m, (A_j S_s)^{-T} w>)``
    (divided by the cell count for the torus normalization) whenever the
    element does not straddle the row x2 = 0, where the grid shear wraps.
    """
    F = element_fourier_unsheared(spec, grid, cmf)
    return shear_compose(F, spec.s, grid)


# --- the basis as a fast transform -------------------------------------------

@dataclass(frozen=True)
class Band:
    j: int  # -1 for the coarse x1 band
    p: int
    level1: int
    level2: int
    kind1: str
    kind2: str

    @property
    def key(self) -> tuple[int, int]:
        return (self.j, self.p)


class ShearletTypeBasis:
    """Fast analysis/synthesis with the orthonormal basis Psi_s on a grid."""

    def __init__(self, s: ShearParam, grid: FourierGrid, cmf: MirrorFilter):
        if s.j0 > grid.finest_scale:
            raise DomainError(f"shear {s} needs scale {s.j0} > finest {grid.finest_scale}")
        self.s = s
        self.grid = grid
        self.cmf = cmf
        self.bands = list(self._bands())

    def _x1(self):
        yield (-1, self.s.j0, "phi")
        for j in range(self.s.j0, self.grid.finest_scale + 1):
            yield (j, j, "psi")

    def _bands(self):
        L = self.grid.levels
        for j, lvl1, kind1 in self._x1():
            base = floor_half(lvl1)
            yield Band(j, 0, lvl1, base, kind1, "phi")
            for p in range(1, L - base + 1):
                yield Band(j, p, lvl1, base + p - 1, kind1, "psi")

    def shape(self, band: Band) -> tuple[int, int]:
        c = self.grid.cells
        return (c * 2 ** band.level1, c * 2 ** band.level2)

    @property
    def size(self) -> int:
        return sum(a * b for a, b in map(self.shape, self.bands))

    def _resp(self, kind, level):
        return response(self.cmf, self.grid, kind, level)

    def analyze(self, H: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
        """Inner products of h (given by Fourier coefficients H) with all elements."""
        N = self.grid.N
        Hs = shear_compose_inv(H, self.s, self.grid)
        out = {}
        x1_cache = {}
        for band in self.bands:
            key1 = (band.j, band.level1)
            if key1 not in x1_cache:
                n1 = self.grid.cells * 2 ** band.level1
                B1 = self._resp(band.kind1, band.level1)
                Z = (Hs * np.conj(B1)[:, None]).reshape(N // n1, n1, N).sum(axis=0)
                x1_cache = {key1: np.fft.ifft(Z, axis=0) * n1}
            Z = x1_cache[key1]
            n1 = Z.shape[0]
            n2 = self.grid.cells * 2 ** band.level2
            B2 = self._resp(band.kind2, band.level2)
            Y = (Z * np.conj(B2)[None, :]).reshape(n1, N // n2, n2).sum(axis=1)
            out[band.key] = np.fft.ifft(Y, axis=1) * n2
        return out

    def synthesize(self, coeffs: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
        """Fourier coefficients of ``sum c_lambda psi_lambda``; missing bands are zero."""
        N = self.grid.N
        acc = np.zeros((N, N), dtype=complex)
        by_x1: dict = {}
        for band in self.bands:
            c = coeffs.get(band.key)
            if c is None:
                continue
            n1, n2 = c.shape
            B2 = self._resp(band.kind2, band.level2)
            Y = (B2.reshape(1, N // n2, n2) * np.fft.fft(c, axis=1)[:, None, :]).reshape(n1, N)
            key1 = (band.j, band.level1, band.kind1)
            by_x1[key1] = by_x1.get(key1, 0) + Y
        for (j, lvl1, kind1), Y in by_x1.items():
            n1 = Y.shape[0]
            B1 = self._resp(kind1, lvl1)
            acc += (B1.reshape(N // n1, n1, 1) * np.fft.fft(Y, axis=0)[None]).reshape(N, N)
        return shear_compose(acc, self.s, self.grid)

    def element(self, j: int, m: tuple[int, int], p: int) -> np.ndarray:
        kind = "phi" if j == -1 else "psi"
        jj = self.s.j0 if j == -1 else j
        return element_fourier(OnbElementSpec(kind, jj, self.s, m, p), self.grid, self.cmf)


# --- verification -------------------------------------------------------------

def gram_check(s: ShearParam, grid: FourierGrid, cmf: MirrorFilter,
               J: int, M: int, P: int) -> tuple[float, float, int]:
    """Worst deviations of a finite subsystem's Gram matrix from the identity.

    Returns ``(max off-diagonal, max diagonal deviation, element count)``.
    """
    basis = ShearletTypeBasis(s, grid, cmf)
    specs = []
    for band in basis.bands:
        if band.p > P or (band.j != -1 and band.j > J):
            continue
        n1, n2 = basis.shape(band)
        ms = {(m1 % n1, m2 % n2) for m1 in range(-M, M + 1) for m2 in range(-M, M + 1)}
        specs += [(band.j, m, band.p) for m in sorted(ms)]
    if len(specs) > 10_000:
        raise ValueError(f"subsystem of {len(specs)} elements is too large")
    E = np.stack([basis.element(j, m, p).ravel() for j, m, p in specs])
    G = E.conj() @ E.T
    diag = np.abs(np.diag(G).real - 1.0).max()
    off = np.abs(G - np.diag(np.diag(G))).max()
    return float(off), float(diag), len(specs)


def parseval_ratio(f: np.ndarray, s: ShearParam, grid: FourierGrid, cmf: MirrorFilter,
                   J: int | None = None, P: int | None = None) -> float:
    """Energy captured by the subsystem j <= J, p <= P relative to ``||f||^2``."""
    basis = ShearletTypeBasis(s, grid, cmf)
    coeffs = basis.analyze(grid.fourier(f))
    total = np.sum(np.abs(f) ** 2) * grid.cell_area
    kept = 0.0
    for (j, p), c in coeffs.items():
        if (J is None or j <= J) and (P is None or p <= P):
            kept += float(np.sum(np.abs(c) ** 2))
    return kept / total
