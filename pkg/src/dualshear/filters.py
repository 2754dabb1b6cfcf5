"""Directional window, shear filters G_s, Theta profiles and the dual denominator.

The window is separable, ``g_hat(w) = eta_hat(w1) * theta_hat(w2)``, with
eta a Daubechies wavelet (its spectrum sits on 1/2 < |w1| < 1) and theta a
dilated Daubechies scaling function wide enough to cover |w2| < 1. Only
``|g_hat|^2`` enters the filters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .generators import (
    DecayFit,
    FourierProfile1D,
    MirrorFilter,
    cascade,
    decay_fit,
    log_symmetric_samples,
    support_floor,
)
from .grid import FourierGrid
from .index import ShearParam, ceil_half, floor_half, k_for, shear_set

PROFILE_DEPTH = 40
W_FLOOR = 1e-12  # relative to max W; below this the dual is treated as undefined


class WindowRejected(ValueError):
    pass


class InvalidSystem(ValueError):
    """The dual denominator vanishes somewhere, so no closed-form dual exists."""


class IndexingBug(AssertionError):
    pass


def _on_unique(func, x: np.ndarray) -> np.ndarray:
    # arguments land on a coarse dyadic lattice; evaluate once per value
    vals, inv = np.unique(x, return_inverse=True)
    return func(vals)[inv].reshape(x.shape)


@dataclass
class DirectionalWindow:
    K: int
    cmf: MirrorFilter = field(repr=False)
    delta_g: float = 0.0
    support_box: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))
    decay: dict = field(default_factory=dict, repr=False)

    def eta_sq(self, a) -> np.ndarray:
        return np.abs(self.cmf.psi_hat(a, PROFILE_DEPTH)) ** 2

    def theta_sq(self, b) -> np.ndarray:
        return np.abs(self.cmf.phi_hat(np.asarray(b, float) / 2.0, PROFILE_DEPTH)) ** 2

    def ghat(self, w1, w2) -> np.ndarray:
        c = self.cmf
        return c.psi_hat(w1, PROFILE_DEPTH, True) * c.phi_hat(np.asarray(w2, float) / 2.0,
                                                               PROFILE_DEPTH, True)

    def ghat_sq(self, a, b) -> np.ndarray:
        """``|g_hat(a, b)|^2`` with per-value caching of both 1-D factors."""
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        return _on_unique(self.eta_sq, a) * _on_unique(self.theta_sq, b)

    def spatial(self, levels: int = 6):
        """``(x1, x2, g)`` samples; g is zero outside its support box by construction."""
        x1, eta = cascade(self.cmf, "psi", levels)
        x2, phi = cascade(self.cmf, "phi", levels)
        # theta(x) = 2 phi(2x)
        return x1, x2 / 2.0, np.outer(eta, 2.0 * phi)


def conic_floor(window: DirectionalWindow, samples: int = 2001) -> float:
    """Scan of ``inf |g_hat|`` over ``{|w2/w1| < 1, 1/2 < |w1| < 1}``."""
    a = np.linspace(0.5, 1.0, samples)
    b = np.linspace(0.0, 1.0, samples)
    eta = np.sqrt(window.eta_sq(a))
    th = np.sqrt(window.theta_sq(b))
    # min over |b| < a of theta: cumulative minimum up to a; theta_sq is even
    cummin = np.minimum.accumulate(th)
    idx = np.clip(np.searchsorted(b, a, side="right") - 1, 0, samples - 1)
    return float(np.min(eta * cummin[idx]))


def build_window(K_g: int = 4, cone_samples: int = 2001) -> DirectionalWindow:
    """Separable window of order ``K_g``; validates the conic floor and compact support."""
    cmf = MirrorFilter.daubechies(K_g)
    w = DirectionalWindow(K=K_g, cmf=cmf)
    w.delta_g = conic_floor(w, cone_samples)
    if w.delta_g <= 1e-8:
        raise WindowRejected(f"conic support floor {w.delta_g:.3e} is not positive")
    L = cmf.support
    w.support_box = ((0.0, L), (0.0, L / 2.0))
    xi = log_symmetric_samples(1e-4, 256.0, 4000)
    eta_prof = FourierProfile1D(xi, cmf.psi_hat(xi, PROFILE_DEPTH, True), L, {"kind": "wavelet"})
    th_prof = FourierProfile1D(xi, cmf.phi_hat(xi / 2, PROFILE_DEPTH, True), L / 2,
                               {"kind": "scaling"})
    fe = decay_fit(eta_prof)
    ft = decay_fit(th_prof)
    w.decay = {"alpha1": fe.alpha_hat, "beta1": fe.beta_hat, "beta2": ft.beta_hat}
    return w


@dataclass
class GeneratorInfo:
    """Order-K scaling profile data shared by the filters."""

    K: int
    cmf: MirrorFilter = field(repr=False)
    delta_phi: float = 0.0

    @classmethod
    def build(cls, K: int) -> "GeneratorInfo":
        cmf = MirrorFilter.daubechies(K)
        xi = np.linspace(-0.5, 0.5, 2001)
        prof = FourierProfile1D(xi, cmf.phi_hat(xi, PROFILE_DEPTH, True), cmf.support)
        return cls(K=K, cmf=cmf, delta_phi=support_floor(prof))

    def phi_sq(self, w) -> np.ndarray:
        return _on_unique(lambda v: np.abs(self.cmf.phi_hat(v, PROFILE_DEPTH)) ** 2,
                          np.asarray(w, float))

    def phi0_sq(self, w1, w2) -> np.ndarray:
        """``|phi^0_hat(w)|^2 = |phi_1_hat(w1) phi_1_hat(w2)|^2``."""
        return self.phi_sq(w1) * self.phi_sq(w2)


# --- filters ------------------------------------------------------------------

def dilate_term(window: DirectionalWindow, grid: FourierGrid, j: int, s: ShearParam) -> np.ndarray:
    """``|g_hat(A_j^{-1} S_s^{-T} w)|^2`` on the grid, made even in k (see ``even_max``).

    Arguments are formed from integers: ``(k2 2^t - q k1) / (cells 2^(floor(j/2)+t))``.
    """
    k1, k2 = np.meshgrid(grid.k, grid.k, indexing="ij")
    a = k1 / (grid.cells * 2.0 ** j)
    b = (k2 * 2 ** s.t - s.q * k1) / (grid.cells * 2.0 ** (floor_half(j) + s.t))
    return grid.even_max(window.ghat_sq(a, b))


def dilate_term_k(window: DirectionalWindow, grid: FourierGrid, j: int, k: int) -> np.ndarray:
    """``|g_hat(S_k^{-T} A_j^{-1} w)|^2`` on the grid, from the integer shear k."""
    k1, k2 = np.meshgrid(grid.k, grid.k, indexing="ij")
    a = k1 / (grid.cells * 2.0 ** j)
    b = (k2 * 2 ** ceil_half(j) - k * k1) / (grid.cells * 2.0 ** j)
    return grid.even_max(window.ghat_sq(a, b))


def filter_G(s: ShearParam, grid: FourierGrid, jmax: int, window: DirectionalWindow,
             gen: GeneratorInfo) -> tuple[np.ndarray, float]:
    """Truncated ``G_s_hat`` and the sup of its last summand (the tail estimate)."""
    w1, w2 = grid.omega
    G = gen.phi0_sq(w1, w2) if s.value == 0 else np.zeros(grid.shape)
    last = 0.0
    for j in range(s.j0, jmax + 1):
        term = dilate_term(window, grid, j, s)
        G = G + term
        last = float(term.max())
    return G, last


def theta_profile(window: DirectionalWindow, w1, w2, ell: int | None, jmax: int,
                  gen: GeneratorInfo | None = None, base: int = 0, term=None) -> np.ndarray:
    """Theta_hat (``ell is None``) or Theta_ell_hat at the points ``(w1, w2)``.

    Sums ``|g_hat(A_{base+i}^{-1} A_base w)|^2`` for i from ``-ell`` to
    ``jmax``; the full profile starts at ``i = -base`` and adds
    ``|phi0_hat(A_base w)|^2``. With ``base = 0`` the dilations are the A_i
    themselves. A nonzero base gives the relative dilations seen by an
    element at scale ``base``; they differ from A_i when base is odd.
    ``term`` post-processes each summand, e.g. :meth:`FourierGrid.even_max`.
    """
    term = (lambda v: v) if term is None else term
    w1 = np.asarray(w1, float)
    w2 = np.asarray(w2, float)
    out = np.zeros(np.broadcast(w1, w2).shape)
    if ell is None:
        if gen is None:
            raise ValueError("Theta needs the generator's phi profile")
        out = out + gen.phi0_sq(w1 * 2.0 ** base, w2 * 2.0 ** floor_half(base))
        start = -base
    else:
        start = -ell
    for i in range(start, jmax + 1):
        a = w1 / 2.0 ** i
        b = w2 * 2.0 ** (floor_half(base) - floor_half(base + i))
        out = out + term(window.ghat_sq(a, b))
    return out


def theta_profiles(ell: int | None, grid: FourierGrid, jmax: int,
                   window: DirectionalWindow, gen: GeneratorInfo | None = None) -> np.ndarray:
    if ell is not None and jmax < -ell:
        raise ValueError("jmax must be at least -ell")
    w1, w2 = grid.omega
    return theta_profile(window, w1, w2, ell, jmax, gen, term=grid.even_max)


# --- the bank -----------------------------------------------------------------

@dataclass
class FilterBank:
    grid: FourierGrid
    jmax: int
    window: DirectionalWindow = field(repr=False)
    gen: GeneratorInfo = field(repr=False)
    shears: list[ShearParam] = field(default_factory=list)
    G: dict[ShearParam, np.ndarray] = field(default_factory=dict, repr=False)
    tails: dict[ShearParam, float] = field(default_factory=dict, repr=False)
    _W: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def build(cls, grid: FourierGrid, jmax: int | None = None, K: int = 4, K_g: int = 4,
              window: DirectionalWindow | None = None,
              only: list[ShearParam] | None = None) -> "FilterBank":
        """Bank over ``shear_set(jmax)``; ``only`` keeps a subset (no valid dual then)."""
        jmax = grid.finest_scale if jmax is None else jmax
        window = build_window(K_g) if window is None else window
        gen = GeneratorInfo.build(K)
        shears = shear_set(jmax)
        if only is not None:
            shears = [s for s in shears if s in set(only)]
        bank = cls(grid=grid, jmax=jmax, window=window, gen=gen, shears=shears)
        for s in bank.shears:
            bank.G[s], bank.tails[s] = filter_G(s, grid, jmax, window, gen)
        return bank

    @property
    def complete(self) -> bool:
        return self.shears == shear_set(self.jmax)

    @property
    def W(self) -> np.ndarray:
        """``sum_s |G_s|^2 + |G_s o R|^2``, computed once."""
        if self._W is None:
            W = np.zeros(self.grid.shape)
            for G in self.G.values():
                W += G ** 2 + self.grid.rotate(G) ** 2
            self._W = W
        return self._W


def partition_identity_residual(bank: FilterBank, tol: float = 1e-9) -> float:
    """``sup |sum_s G_s - (|phi0|^2 + sum_j sum_|k| |g_hat(S_k^{-T} A_j^{-1} w)|^2)|``."""
    grid = bank.grid
    lhs = sum(bank.G.values())
    w1, w2 = grid.omega
    rhs = bank.gen.phi0_sq(w1, w2)
    for j in range(0, bank.jmax + 1):
        for k in range(-(2 ** ceil_half(j)), 2 ** ceil_half(j) + 1):
            rhs = rhs + dilate_term_k(bank.window, grid, j, k)
    res = float(np.max(np.abs(lhs - rhs)))
    if res > tol:
        raise IndexingBug(f"partition identity residual {res:.3e}")
    return res


@dataclass
class FrameReport:
    W: np.ndarray = field(repr=False)
    A_hat: float = 0.0
    B_hat: float = 0.0
    lower_bound_cert: float = 0.0
    delta_phi: float = 0.0
    delta_g: float = 0.0

    @property
    def ratio(self) -> float:
        return self.B_hat / self.A_hat


def frame_multiplier(bank: FilterBank) -> FrameReport:
    if not bank.complete:
        raise InvalidSystem("a partial bank has no frame multiplier")
    W = bank.W
    A, B = float(W.min()), float(W.max())
    # zeros of W show up as rounding-level values, not exact zeros
    if A <= W_FLOOR * B:
        raise InvalidSystem(f"dual denominator has min {A:.3e}")
    dphi, dg = bank.gen.delta_phi, bank.window.delta_g
    cert = min(dphi ** 2, dg) ** 2
    return FrameReport(W, A, B, cert, dphi, dg)


def l1_diagnostic(window: DirectionalWindow, gen: GeneratorInfo, grid: FourierGrid,
                  j: int, j0: int, p: int, jmax: int) -> float:
    """``||Theta_{j-j0} * psi^p||_1`` in the scaled coordinates of scale j."""
    from .onb import TensorAtomSpec, atom_fourier

    w1, w2 = grid.omega
    theta = theta_profile(window, w1, w2, j - j0, jmax - j, base=j)
    atom = atom_fourier(TensorAtomSpec("psi", p), grid, gen.cmf, depth=PROFILE_DEPTH)
    F = theta * atom / grid.cells
    f = grid.spatial(F)
    # generator-unit measure on a torus of side ``cells``
    return float(np.sum(np.abs(f)) * grid.cell_area * grid.cells)


__all__ = [
    "DecayFit", "DirectionalWindow", "FilterBank", "FrameReport", "GeneratorInfo",
    "InvalidSystem", "IndexingBug", "WindowRejected", "build_window", "conic_floor",
    "dilate_term", "dilate_term_k", "filter_G", "frame_multiplier", "k_for",
    "l1_diagnostic", "partition_identity_residual", "theta_profile", "theta_profiles",
]
