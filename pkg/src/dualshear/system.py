"""The dualizable shearlet system: analysis, closed-form dual synthesis and elements.

Cone 1 is handled by rotating the spectrum, so one filter bank serves both
cones. Each cone and shear contributes one orthonormal-basis pass over the
filtered signal; the dual divides the accumulated synthesis by W.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .filters import FilterBank, InvalidSystem, frame_multiplier, theta_profile
from .generators import MirrorFilter
from .grid import FourierGrid, ShapeError
from .index import DomainError, LambdaIndex, ShearParam, floor_half, k_for
from .onb import (
    OnbElementSpec,
    ShearletTypeBasis,
    element_closed_form,
    element_fourier,
    straddles_seam,
)

TIE_BREAK_VERSION = "magnitude-desc/lex(cone,s,j,p,m)/v1"

Key = tuple[int, ShearParam, int, int]


class WraparoundWarning(UserWarning):
    pass


@dataclass
class CoefficientTable:
    """Dense coefficient slices keyed by ``(cone, s, j, p)`` in lexicographic order.

    Shears are ordered by value, ``j = -1`` (coarse) precedes the detail
    scales, and within a slice m runs row-major over ``(m1, m2)``.
    """

    slices: dict[Key, np.ndarray]
    grid: dict = field(default_factory=dict)
    truncation: dict = field(default_factory=dict)

    def keys(self) -> list[Key]:
        return sorted(self.slices, key=lambda k: (k[0], k[1].value, k[2], k[3]))

    @property
    def count(self) -> int:
        return sum(a.size for a in self.slices.values())

    def energy(self) -> float:
        return float(sum(np.sum(np.abs(a) ** 2) for a in self.slices.values()))

    def flat(self) -> np.ndarray:
        return np.concatenate([self.slices[k].ravel() for k in self.keys()])

    def with_flat(self, vec: np.ndarray) -> "CoefficientTable":
        out, pos = {}, 0
        for k in self.keys():
            a = self.slices[k]
            out[k] = np.asarray(vec[pos:pos + a.size]).reshape(a.shape)
            pos += a.size
        return CoefficientTable(out, dict(self.grid), dict(self.truncation))

    def scaled(self, a: complex) -> "CoefficientTable":
        return self.with_flat(a * self.flat())

    def __add__(self, other: "CoefficientTable") -> "CoefficientTable":
        return self.with_flat(self.flat() + other.flat())

    def index_of(self, position: int) -> LambdaIndex:
        """LambdaIndex of the entry at ``position`` in :meth:`flat` order."""
        for cone, s, j, p in self.keys():
            a = self.slices[(cone, s, j, p)]
            if position < a.size:
                m = np.unravel_index(position, a.shape)
                return LambdaIndex(cone, j, s, (int(m[0]), int(m[1])), p)
            position -= a.size
        raise IndexError("position beyond the table")


@dataclass
class DualizableSystem:
    """Filter bank plus the orthonormal bases Psi_s on one grid.

    ``J`` and ``P`` restrict which bands are analyzed. The default keeps the
    complete bases, the setting under which the dual reconstructs exactly.
    """

    grid: FourierGrid
    bank: FilterBank
    cmf: MirrorFilter = field(repr=False)
    J: int | None = None
    P: int | None = None
    bases: dict[ShearParam, ShearletTypeBasis] = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, N: int, coarse_log2: int = 1, K: int = 4, K_g: int = 4,
              jmax: int | None = None, J: int | None = None, P: int | None = None,
              bank: FilterBank | None = None,
              only: list[ShearParam] | None = None) -> "DualizableSystem":
        """``only`` restricts the shears; such a system has primal elements but no dual."""
        grid = FourierGrid(N, coarse_log2)
        if bank is None:
            bank = FilterBank.build(grid, jmax=jmax, K=K, K_g=K_g, only=only)
        elif bank.grid != grid:
            raise ShapeError("bank grid does not match the system grid")
        if bank.complete:
            frame_multiplier(bank)
        cmf = MirrorFilter.daubechies(bank.gen.K)
        bases = {s: ShearletTypeBasis(s, grid, cmf) for s in bank.shears}
        return cls(grid=grid, bank=bank, cmf=cmf, J=J, P=P, bases=bases)

    @property
    def shears(self) -> list[ShearParam]:
        return self.bank.shears

    def keeps(self, j: int, p: int) -> bool:
        return (self.J is None or j <= self.J) and (self.P is None or p <= self.P)

    def meta(self) -> dict:
        return {
            "grid": self.grid.spec(),
            "truncation": {"J": self.J, "P": self.P, "jmax": self.bank.jmax},
            "K": self.bank.gen.K,
            "K_g": self.bank.window.K,
        }

    def layout(self) -> list[tuple[Key, tuple[int, int]]]:
        out = []
        for cone in (0, 1):
            for s in self.shears:
                basis = self.bases[s]
                for band in sorted(basis.bands, key=lambda b: b.key):
                    if self.keeps(band.j, band.p):
                        out.append(((cone, s, band.j, band.p), basis.shape(band)))
        return out

    def check_lambda(self, lam: LambdaIndex) -> None:
        if lam.s not in self.bases:
            raise DomainError(f"shear {lam.s} not in the system")
        keys = {b.key for b in self.bases[lam.s].bands}
        if (lam.j, lam.p) not in keys or not self.keeps(lam.j, lam.p):
            raise DomainError(f"index {lam} outside the truncation")


def analyze(f: np.ndarray, sys: DualizableSystem) -> CoefficientTable:
    """``<f, psi^cone_lambda>`` for every index in the truncation."""
    grid = sys.grid
    grid.check(f)
    F = grid.fourier(f)
    spectra = (F, grid.rotate_inv(F))
    slices: dict[Key, np.ndarray] = {}
    for cone, Fc in enumerate(spectra):
        for s in sys.shears:
            coeffs = sys.bases[s].analyze(sys.bank.G[s] * Fc)
            for (j, p), c in coeffs.items():
                if sys.keeps(j, p):
                    slices[(cone, s, j, p)] = c
    meta = sys.meta()
    return CoefficientTable(slices, meta["grid"], meta["truncation"])


def synthesize_dual(coeffs: CoefficientTable, sys: DualizableSystem,
                    real: bool = True) -> np.ndarray:
    """``sum_lambda c_lambda dual_psi_lambda`` on the grid."""
    grid = sys.grid
    if coeffs.grid and coeffs.grid != grid.spec():
        raise ShapeError(f"coefficients on grid {coeffs.grid}, system on {grid.spec()}")
    if not sys.bank.complete:
        raise InvalidSystem("the dual needs the full shear set")
    groups: dict = {}
    for (cone, s, j, p), c in coeffs.slices.items():
        if c.any():
            groups.setdefault((cone, s), {})[(j, p)] = c
    acc = [np.zeros(grid.shape, complex), np.zeros(grid.shape, complex)]
    for s in sys.shears:
        for cone in (0, 1):
            part = groups.get((cone, s))
            if part:
                acc[cone] += sys.bank.G[s] * sys.bases[s].synthesize(part)
    F = (acc[0] + grid.rotate(acc[1])) / sys.bank.W
    f = grid.spatial(F)
    return f.real if real else f


def weighted_energy(f: np.ndarray, sys: DualizableSystem) -> float:
    """``sum W |f_hat|^2`` in the torus normalization (equals the coefficient energy)."""
    F = sys.grid.fourier(f)
    return float(np.sum(sys.bank.W * np.abs(F) ** 2))


def _onb_spec(lam: LambdaIndex) -> OnbElementSpec:
    kind = "phi" if lam.j == -1 else "psi"
    return OnbElementSpec(kind, lam.scale, lam.s, lam.m, lam.p)


def element_fourier_system(lam: LambdaIndex, sys: DualizableSystem, which: str = "primal",
                           path: str = "filter") -> np.ndarray:
    """Fourier coefficients of ``psi^cone_lambda`` (or its dual).

    ``path="filter"`` multiplies the orthonormal element by G_s.
    ``path="theta"`` uses the Theta form: the element's integer shear
    k, the matrix ``S_k A_j`` and the relative dilation profile at scale j.
    """
    sys.check_lambda(lam)
    grid = sys.grid
    spec = _onb_spec(lam)
    if path == "filter":
        F = sys.bank.G[lam.s] * element_fourier(spec, grid, sys.cmf)
    elif path == "theta":
        F = _theta_form(spec, sys)
    else:
        raise ValueError(f"unknown path {path!r}")
    if which == "dual":
        F = F / sys.bank.W
    elif which != "primal":
        raise ValueError(f"unknown element kind {which!r}")
    return grid.rotate(F) if lam.cone == 1 else F


def _theta_form(spec: OnbElementSpec, sys: DualizableSystem) -> np.ndarray:
    grid, bank = sys.grid, sys.bank
    j, s = spec.j, spec.s
    k = k_for(s, j)
    w1, w2 = grid.omega
    # e = (S_k A_j)^{-T} w
    e1 = w1 / 2.0 ** j
    e2 = w2 / 2.0 ** floor_half(j) - k * e1
    ell = None if s.value == 0 else j - s.j0
    theta = theta_profile(bank.window, e1, e2, ell, bank.jmax - j, bank.gen, base=j,
                          term=grid.even_max)
    if straddles_seam(spec, grid, sys.cmf):
        # the grid shear tears elements crossing x2 = 0; use its own realization
        atom = element_fourier(spec, grid, sys.cmf)
    else:
        atom = element_closed_form(spec, grid, sys.cmf, e1, e2)
        if s.value.denominator > 1:
            # the grid shear moves the Nyquist column by whole pixels
            nyq = grid.N // 2
            atom[nyq] = element_fourier(spec, grid, sys.cmf)[nyq]
    return theta * atom


def element_spatial(lam: LambdaIndex, which: str, sys: DualizableSystem,
                    path: str = "filter") -> np.ndarray:
    """Grid samples of the primal or dual element (real part)."""
    F = element_fourier_system(lam, sys, which, path)
    return sys.grid.spatial(F).real


@dataclass
class SupportReport:
    c: float
    cap: float | None
    within_cap: bool | None
    wraps: bool
    threshold: float
    center: tuple[float, float]


def element_center(lam: LambdaIndex, sys: DualizableSystem) -> np.ndarray:
    """Torus position ``(A_j S_s)^{-1} D_p m`` of the element's anchor."""
    from .index import matrices, to_array

    M = matrices(lam.scale, lam.s, lam.p)
    A = to_array(M.AS)
    D = to_array(M.D)
    y = np.linalg.solve(A, D @ np.asarray(lam.m, float))
    return y / sys.grid.cells


def support_extent(lam: LambdaIndex, sys: DualizableSystem, threshold: float = 1e-6,
                   cap: float | None = None, margin: float = 0.02) -> SupportReport:
    """Smallest ``c`` with the above-threshold samples inside ``S_s^{-1} A_j0^{-1} [-c, c]^2``.

    ``c`` is in generator units around the element's anchor. With ``cap``
    given, the report checks ``c <= cap``; elements whose above-threshold set
    reaches the far side of the torus raise a WraparoundWarning and skip it.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    from .index import matrices, to_array

    grid = sys.grid
    f = np.abs(element_spatial(lam, "primal", sys))
    if lam.cone == 1:
        f = grid.rotate_inv(f)
        lam = LambdaIndex(0, lam.j, lam.s, lam.m, lam.p)
    mask = f >= threshold * f.max()
    center = element_center(lam, sys)
    i1, i2 = np.nonzero(mask)
    x = np.stack([i1, i2]).astype(float) / grid.N
    # unwrap around the peak; the anchor sits at a corner of the support
    peak = np.array(np.unravel_index(np.argmax(f), f.shape), float) / grid.N
    d = (x - peak[:, None] + 0.5) % 1.0 - 0.5
    wraps = bool(np.any(np.abs(d) > 0.5 - margin))
    d = d + ((peak - center + 0.5) % 1.0 - 0.5)[:, None]
    AS = to_array(matrices(lam.s.j0, lam.s, 0).AS)
    y = AS @ d * grid.cells
    c = float(np.max(np.abs(y)))
    within = None
    if wraps:
        warnings.warn(f"element {lam} wraps around the torus; cap not checked",
                      WraparoundWarning)
    elif cap is not None:
        within = bool(c <= cap)
    return SupportReport(c, cap, within, wraps, threshold, (float(center[0]), float(center[1])))
