"""Compactly supported 1-D scaling/wavelet pairs, realized in the Fourier domain.

The pair comes from a Daubechies conjugate-mirror filter with K vanishing
moments. Fourier transforms are truncated infinite products of the filter's
symbol; the linear-phase part of the dropped tail factors is folded back in
closed form so deep profiles converge quadratically in the depth.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

MAX_ORDER = 12


class ConfigurationError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class GeneratorRejected(ValueError):
    """The support condition inf |phi_hat| > 0 on [-1/2, 1/2] fails."""


class FitDegenerateWarning(UserWarning):
    pass


@lru_cache(maxsize=None)
def daubechies_filter(K: int) -> tuple[float, ...]:
    """Minimum-phase Daubechies low-pass filter of length 2K, ``sum(h) == sqrt(2)``.

    Built by spectral factorization of the Daubechies polynomial.
    """
    if not isinstance(K, (int, np.integer)) or not 1 <= K <= MAX_ORDER:
        raise ConfigurationError(f"order K={K} outside supported range 1..{MAX_ORDER}")
    # P(y) = sum_k C(K-1+k, k) y^k with y = (2 - z - 1/z) / 4
    coeffs = [comb(K - 1 + k, k) for k in range(K)]
    y_roots = np.roots(coeffs[::-1]) if K > 1 else np.array([])
    z_roots = []
    for y in y_roots:
        # z^2 - (2 - 4y) z + 1 = 0; keep the root inside the unit circle
        b = 2.0 - 4.0 * y
        disc = np.sqrt(b * b - 4.0 + 0j)
        pair = ((b + disc) / 2.0, (b - disc) / 2.0)
        z_roots.append(min(pair, key=abs))
    poly = np.array([1.0 + 0j])
    for _ in range(K):
        poly = np.convolve(poly, [1.0, 1.0])
    for z in z_roots:
        poly = np.convolve(poly, [1.0, -z])
    h = np.real(poly)
    h = h * np.sqrt(2.0) / h.sum()
    return tuple(float(v) for v in h[::-1])


@dataclass(frozen=True)
class MirrorFilter:
    """Conjugate-mirror pair (h, g) with symbols normalized so ``m0(0) == 1``."""

    K: int
    h: np.ndarray = field(repr=False)
    g: np.ndarray = field(repr=False)

    @classmethod
    def daubechies(cls, K: int) -> "MirrorFilter":
        h = np.array(daubechies_filter(K))
        n = np.arange(h.size)
        g = (-1.0) ** n * h[::-1]
        return cls(K=K, h=h, g=g)

    @property
    def length(self) -> int:
        return self.h.size

    @property
    def support(self) -> float:
        """Spatial support length of phi_1 and psi_1."""
        return float(self.h.size - 1)

    @property
    def center(self) -> float:
        """First moment of h; the linear-phase slope of m0 at 0."""
        return float(np.dot(np.arange(self.h.size), self.h) / np.sqrt(2.0))

    def _symbol(self, taps: np.ndarray, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        # Horner in z = exp(-2 pi i u)
        z = np.exp(-2j * np.pi * u)
        acc = np.zeros(u.shape, dtype=complex)
        for c in taps[::-1]:
            acc = acc * z + c
        return acc / np.sqrt(2.0)

    def m0(self, u) -> np.ndarray:
        return self._symbol(self.h, u)

    def m1(self, u) -> np.ndarray:
        return self._symbol(self.g, u)

    def phi_hat(self, w, depth: int | None = None, tail_phase: bool = False) -> np.ndarray:
        """``prod_{r=1}^{depth} m0(w / 2**r)``.

        With ``tail_phase`` the linear phase of the omitted factors
        ``r > depth`` is included exactly, which is what deep profiles use.
        """
        w = np.asarray(w, dtype=float)
        depth = 24 if depth is None else depth
        out = np.ones(w.shape, dtype=complex)
        for r in range(1, depth + 1):
            out *= self.m0(w / 2.0 ** r)
        if tail_phase:
            out *= np.exp(-2j * np.pi * self.center * w * 2.0 ** -depth)
        return out

    def psi_hat(self, w, depth: int | None = None, tail_phase: bool = False) -> np.ndarray:
        """``m1(w/2) * phi_hat(w/2, depth)``; depth counts the m0 factors."""
        w = np.asarray(w, dtype=float)
        return self.m1(w / 2.0) * self.phi_hat(w / 2.0, depth, tail_phase)


@dataclass
class FourierProfile1D:
    xi: np.ndarray
    values: np.ndarray
    support_radius: float
    meta: dict = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return self.meta.get("kind", "")


@dataclass(frozen=True)
class DecayParams:
    rho: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.rho < 2.0 / 13.0:
            raise ConfigurationError(f"rho={self.rho} outside (0, 2/13)")
        if self.alpha < 6.0 / self.rho + 1.0:
            raise ConfigurationError(f"alpha={self.alpha} below 6/rho + 1")
        if not self.beta > self.alpha + 1.0:
            raise ConfigurationError(f"beta={self.beta} not above alpha + 1")

    @classmethod
    def minimal(cls, rho: float = 0.15) -> "DecayParams":
        alpha = 6.0 / rho + 1.0
        return cls(rho=rho, alpha=alpha, beta=alpha + 1.0 + 1e-9)


def frequency_samples(extent: float, count: int) -> np.ndarray:
    """Uniform centered samples on ``[-extent, extent]`` including 0."""
    half = count // 2
    return np.linspace(-extent, extent, 2 * half + 1)


def build_generators(K: int, T: int = 24, grid=None,
                     tol_stop: float = 1e-10, tol_fail: float = 1e-8):
    """Sampled ``(phi_hat_1, psi_hat_1)`` for the order-K Daubechies pair.

    ``grid`` is an array of frequency samples (cycles per unit length) or a
    ``(extent, count)`` pair; default covers [-64, 64]. The product depth
    grows until consecutive depths differ by less than ``tol_stop`` or T is
    reached; a final difference above ``tol_fail`` raises ConvergenceError.
    """
    if T < 1:
        raise ConfigurationError("truncation depth T must be positive")
    cmf = MirrorFilter.daubechies(K)
    if grid is None:
        grid = (64.0, 8192)
    xi = frequency_samples(*grid) if isinstance(grid, tuple) else np.asarray(grid, float)

    prev = cmf.phi_hat(xi, 0, tail_phase=True)
    diff = np.inf
    depth = 0
    for depth in range(1, T + 1):
        cur = cmf.phi_hat(xi, depth, tail_phase=True)
        diff = float(np.max(np.abs(cur - prev)))
        prev = cur
        if diff < tol_stop:
            break
    if diff > tol_fail:
        raise ConvergenceError(
            f"product not converged at depth {depth}: consecutive difference {diff:.2e}"
        )
    phi = prev
    psi = cmf.m1(xi / 2.0) * cmf.phi_hat(xi / 2.0, depth, tail_phase=True)
    meta = dict(K=K, T=depth, converged_diff=diff)
    return (
        FourierProfile1D(xi, phi, cmf.support, dict(meta, kind="scaling")),
        FourierProfile1D(xi, psi, cmf.support, dict(meta, kind="wavelet")),
    )


def support_floor(profile: FourierProfile1D, reject_below: float = 1e-8) -> float:
    """``inf |phi_hat|`` over the samples in [-1/2, 1/2]."""
    inside = np.abs(profile.xi) <= 0.5 + 1e-12
    if not inside.any():
        raise ValueError("profile samples do not cover [-1/2, 1/2]")
    delta = float(np.min(np.abs(profile.values[inside])))
    if delta <= reject_below:
        raise GeneratorRejected(f"support condition violated: delta={delta:.3e}")
    return delta


@dataclass
class DecayFit:
    alpha_hat: float
    beta_hat: float
    const_origin: float
    const_tail: float
    d_alpha_hat: float
    d_beta_hat: float
    degenerate: bool
    meets_params: bool
    params: DecayParams | None = None


def _slope(x, y):
    A = np.vstack([np.log(x), np.ones_like(x)]).T
    slope, icpt = np.linalg.lstsq(A, np.log(y), rcond=None)[0]
    return float(slope), float(np.exp(icpt))


def _origin_fit(xi, mag, lo, hi):
    sel = (np.abs(xi) >= lo) & (np.abs(xi) <= hi) & (mag > 1e-14)
    if sel.sum() < 3:
        return np.nan, np.nan
    return _slope(np.abs(xi[sel]), mag[sel])


def _tail_fit(xi, mag, lo, nbins=24):
    ax = np.abs(xi)
    hi = ax.max()
    if hi <= lo * 2:
        return np.nan, np.nan
    edges = np.geomspace(lo, hi, nbins + 1)
    xs, ys = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (ax >= a) & (ax < b)
        if sel.any() and mag[sel].max() > 1e-14:
            k = np.argmax(np.where(sel, mag, -1.0))
            xs.append(ax[k])
            ys.append(mag[k])
    if len(xs) < 3:
        return np.nan, np.nan
    slope, c = _slope(np.array(xs), np.array(ys))
    return -slope, c


def decay_fit(profile: FourierProfile1D, params: DecayParams | None = None,
              origin_window=(1e-3, 1e-2), tail_start: float = 4.0) -> DecayFit:
    """Log-log fits of |psi_hat| near 0 (alpha) and of its tail envelope (beta).

    The same fits are applied to a centered finite-difference derivative.
    """
    xi = np.asarray(profile.xi, float)
    mag = np.abs(profile.values)
    lo, hi = origin_window
    window = (np.abs(xi) >= lo) & (np.abs(xi) <= hi)
    degenerate = not window.any() or mag[window].max() < 1e-14
    if degenerate:
        warnings.warn("fit window has no dynamic range above 1e-14", FitDegenerateWarning)
    a_hat, c0 = _origin_fit(xi, mag, lo, hi)
    b_hat, c1 = _tail_fit(xi, mag, tail_start)
    dmag = np.abs(np.gradient(profile.values, xi))
    da, _ = _origin_fit(xi, dmag, lo, hi)
    db, _ = _tail_fit(xi, dmag, tail_start)
    meets = False
    if params is not None and not degenerate:
        meets = bool(a_hat >= params.alpha and b_hat >= params.beta)
    return DecayFit(a_hat, b_hat, c0, c1, da, db, degenerate, meets, params)


def log_symmetric_samples(lo: float, hi: float, count: int) -> np.ndarray:
    """Sorted samples ``±geomspace(lo, hi)`` plus the gaps filled uniformly."""
    pos = np.geomspace(lo, hi, count)
    return np.concatenate([-pos[::-1], [0.0], pos])



def cascade(cmf: MirrorFilter, kind: str, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Samples of phi_1 or psi_1 at spacing ``2**-levels`` on their support.

    This is the inverse transform of the depth-``levels`` product (an
    iterated filter bank), supported exactly on ``[0, 2K - 1]``.
    """
    seq = np.array([1.0])
    for i in range(levels):
        taps = cmf.g if (kind == "psi" and i == levels - 1) else cmf.h
        up = np.zeros((taps.size - 1) * 2 ** i + 1)
        up[:: 2 ** i] = taps
        seq = np.convolve(seq, up)
    x = np.arange(seq.size) / 2.0 ** levels
    return x, seq * 2.0 ** (levels / 2)
