"""N-term approximation, rate fits and coefficient-decay diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .index import DomainError, ShearParam
from .onb import ShearletTypeBasis
from .system import CoefficientTable, DualizableSystem, TIE_BREAK_VERSION, analyze, synthesize_dual


class FitError(ValueError):
    pass


class DegenerateProbeWarning(UserWarning):
    pass


def rel_error(f: np.ndarray, g: np.ndarray) -> float:
    """Relative L2 error on the torus grid."""
    return float(np.linalg.norm(f - g) / np.linalg.norm(f))


def selection_order(values: np.ndarray) -> np.ndarray:
    """Magnitude descending; ties keep the lexicographic storage order."""
    return np.argsort(-np.abs(values), kind="stable")


def keep_largest(table: CoefficientTable, n: int, order: np.ndarray | None = None
                 ) -> CoefficientTable:
    flat = table.flat()
    if not 1 <= n <= flat.size:
        raise DomainError(f"N={n} outside 1..{flat.size}")
    if order is None:
        order = selection_order(flat)
    kept = np.zeros_like(flat)
    kept[order[:n]] = flat[order[:n]]
    return table.with_flat(kept)


def nterm_approx(f: np.ndarray, n: int, sys: DualizableSystem,
                 table: CoefficientTable | None = None) -> tuple[np.ndarray, float]:
    """Dual-frame reconstruction from the n largest coefficients."""
    table = analyze(f, sys) if table is None else table
    f_n = synthesize_dual(keep_largest(table, n), sys)
    return f_n, rel_error(f, f_n)


@dataclass
class RateCurve:
    points: list[tuple[int, float]]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        ns = [n for n, _ in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("term counts must increase strictly")
        errs = [e for _, e in self.points]
        if any(b > a + 1e-12 for a, b in zip(errs, errs[1:])):
            raise ValueError("errors must not increase with N")

    @property
    def n(self) -> np.ndarray:
        return np.array([p[0] for p in self.points], float)

    @property
    def err(self) -> np.ndarray:
        return np.array([p[1] for p in self.points], float)

    def to_csv(self) -> str:
        rows = ["N,rel_l2_error"] + [f"{n},{e:.17e}" for n, e in self.points]
        return "\n".join(rows) + "\n"


def nterm_curve(f: np.ndarray, budgets, sys: DualizableSystem) -> RateCurve:
    """Shearlet N-term curve from one analysis and one fixed selection order."""
    table = analyze(f, sys)
    order = selection_order(table.flat())
    pts = []
    for n in sorted(budgets):
        f_n = synthesize_dual(keep_largest(table, n, order), sys)
        pts.append((int(n), rel_error(f, f_n)))
    return RateCurve(pts, {"system": sys.meta(), "tie_break": TIE_BREAK_VERSION,
                           "norm": "relative L2 on the torus grid"})


def tensor_curve(f: np.ndarray, budgets, sys: DualizableSystem) -> RateCurve:
    """Baseline: N-term approximation in the unsheared basis Psi_0 alone."""
    grid = sys.grid
    basis = ShearletTypeBasis(ShearParam(0, 0), grid, sys.cmf)
    coeffs = basis.analyze(grid.fourier(f))
    keys = sorted(coeffs)
    flat = np.concatenate([coeffs[k].ravel() for k in keys])
    order = selection_order(flat)
    pts = []
    for n in sorted(budgets):
        kept = np.zeros_like(flat)
        kept[order[:n]] = flat[order[:n]]
        part, pos = {}, 0
        for k in keys:
            size = coeffs[k].size
            part[k] = kept[pos:pos + size].reshape(coeffs[k].shape)
            pos += size
        f_n = grid.spatial(basis.synthesize(part)).real
        pts.append((int(n), rel_error(f, f_n)))
    return RateCurve(pts, {"baseline": "Psi_0 orthonormal basis", "tie_break": TIE_BREAK_VERSION})


@dataclass
class RateFit:
    slope: float
    log_corrected_slope: float
    gap_to_benchmark: float
    gap_to_tensor_reference: float
    degenerate: bool


def _lsq_slope(x, y) -> float:
    A = np.vstack([x, np.ones_like(x)]).T
    return float(np.linalg.lstsq(A, y, rcond=None)[0][0])


def rate_fit(curve: RateCurve) -> RateFit:
    """Log-log slope of err against N, with and without a log N factor divided out.

    Gaps are reported against the N^-1 benchmark and the N^-1/2 tensor reference.
    """
    n, err = curve.n, curve.err
    if n.size < 5 or np.log10(n[-1] / n[0]) < 1.5:
        raise FitError("need at least 5 points over 1.5 decades of N")
    if np.any(err <= 0):
        raise FitError("errors must be positive for a log-log fit")
    x = np.log(n)
    slope = _lsq_slope(x, np.log(err))
    corrected = _lsq_slope(x, np.log(err / np.log(n)))
    degenerate = bool(np.ptp(np.log(err)) < 1e-9)
    return RateFit(slope, corrected, slope + 1.0, slope + 0.5, degenerate)


@dataclass
class DecayReport:
    scales: list[int]
    M_j: list[float]
    j_slope: float
    levels: list[int]
    M_p: list[float]
    p_slope: float
    degenerate: bool


def decay_probe(f: np.ndarray, sys: DualizableSystem, table: CoefficientTable | None = None,
                j_range: tuple[int, int] | None = None, p_range: tuple[int, int] | None = None,
                floor: float = 1e-12) -> DecayReport:
    """Maxima of |coefficient| per scale j and per level p, with log2 slopes.

    Only detail scales enter ``M_j``; coarse slices are left out. Maxima at
    or below ``floor * ||f||`` are treated as zero and excluded from the fits.
    """
    table = analyze(f, sys) if table is None else table
    by_j: dict[int, float] = {}
    by_p: dict[int, float] = {}
    for (cone, s, j, p), c in table.slices.items():
        m = float(np.abs(c).max()) if c.size else 0.0
        if j >= 0:
            by_j[j] = max(by_j.get(j, 0.0), m)
        by_p[p] = max(by_p.get(p, 0.0), m)
    scale = floor * max(float(np.sqrt(np.mean(np.abs(f) ** 2))), 1e-300)

    def fit(d, rng):
        keys = sorted(k for k in d if rng is None or rng[0] <= k <= rng[1])
        live = [k for k in keys if d[k] > scale]
        if len(live) < 2:
            return keys, [d[k] for k in keys], float("nan"), True
        return keys, [d[k] for k in keys], _lsq_slope(np.array(live, float),
                                                       np.log2([d[k] for k in live])), False

    js, mj, sj, dj = fit(by_j, j_range)
    ps, mp, sp, dp = fit(by_p, p_range)
    degenerate = dj or dp
    if degenerate:
        warnings.warn("decay probe has no coefficients above the floor", DegenerateProbeWarning)
    return DecayReport(js, mj, sj, ps, mp, sp, degenerate)


def default_budgets(lo: int = 6, hi: int = 14) -> list[int]:
    return [2 ** e for e in range(lo, hi + 1)]
