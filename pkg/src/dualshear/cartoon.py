"""Cartoon-like phantoms ``f0 + f1 * chi_B`` with a star-shaped C^2 region B.

The boundary radius is a short trigonometric series in the polar angle, so
curvature has a closed form and membership is an exact radius comparison.
Smooth parts are sums of compactly supported ``(1 - rho^2)^3`` bumps; f1 may
also carry a constant, which only matters on B.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class Bump:
    """``amp * (1 - |x - c|^2 / radius^2)^3`` inside the disk, zero outside (C^2)."""

    cx: float
    cy: float
    radius: float
    amp: float

    def __call__(self, x1, x2) -> np.ndarray:
        u = 1.0 - ((x1 - self.cx) ** 2 + (x2 - self.cy) ** 2) / self.radius ** 2
        return self.amp * np.where(u > 0, u, 0.0) ** 3

    def derivatives(self, x1, x2) -> list[np.ndarray]:
        """Function, gradient and Hessian entries, in closed form."""
        R2 = self.radius ** 2
        d1, d2 = x1 - self.cx, x2 - self.cy
        u = 1.0 - (d1 ** 2 + d2 ** 2) / R2
        inside = u > 0
        u = np.where(inside, u, 0.0)
        a = self.amp
        # d/dx u^3 = 3u^2 * (-2 d / R2)
        g1 = a * 3 * u ** 2 * (-2 * d1 / R2)
        g2 = a * 3 * u ** 2 * (-2 * d2 / R2)
        h11 = a * (6 * u * (2 * d1 / R2) ** 2 - 6 * u ** 2 / R2)
        h22 = a * (6 * u * (2 * d2 / R2) ** 2 - 6 * u ** 2 / R2)
        h12 = a * 6 * u * (2 * d1 / R2) * (2 * d2 / R2)
        return [a * u ** 3, g1, g2, h11, h22, h12]

    def inside_unit_square(self) -> bool:
        r = self.radius
        return r > 0 and r <= self.cx <= 1 - r and r <= self.cy <= 1 - r


@dataclass
class CartoonSpec:
    center: tuple[float, float] = (0.5, 0.5)
    # r(theta) = r0 + sum a_n cos(n theta) + b_n sin(n theta)
    r0: float = 0.25
    harmonics: list[tuple[int, float, float]] = field(default_factory=list)
    f0: list[Bump] = field(default_factory=list)
    f1: list[Bump] = field(default_factory=list)
    f1_const: float = 1.0

    def radius(self, theta, order: int = 0) -> np.ndarray:
        """r, r' or r'' at the angles ``theta``."""
        theta = np.asarray(theta, float)
        out = np.full(theta.shape, self.r0 if order == 0 else 0.0)
        for n, a, b in self.harmonics:
            c, s = np.cos(n * theta), np.sin(n * theta)
            if order == 0:
                out = out + a * c + b * s
            elif order == 1:
                out = out + n * (-a * s + b * c)
            else:
                out = out - n * n * (a * c + b * s)
        return out

    def smooth(self, bumps: list[Bump], x1, x2) -> np.ndarray:
        out = np.zeros(np.broadcast(x1, x2).shape)
        for b in bumps:
            out = out + b(x1, x2)
        return out

    def inside(self, x1, x2) -> np.ndarray:
        d1, d2 = x1 - self.center[0], x2 - self.center[1]
        return np.hypot(d1, d2) < self.radius(np.arctan2(d2, d1))


def c2_norm(bumps: list[Bump], samples: int = 801) -> float:
    """Grid maximum over [0,1]^2 of |f| and its first and second partials."""
    if not bumps:
        return 0.0
    x = np.linspace(0.0, 1.0, samples)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    parts = [sum(p) for p in zip(*(b.derivatives(x1, x2) for b in bumps))]
    return float(max(np.abs(p).max() for p in parts))


@dataclass
class CurvatureReport:
    max_curvature: float
    min_radius: float
    f0_c2: float
    f1_c2: float


def curvature_report(spec: CartoonSpec, samples: int = 20000) -> CurvatureReport:
    theta = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    r, r1, r2 = (spec.radius(theta, k) for k in range(3))
    kappa = (r ** 2 + 2 * r1 ** 2 - r * r2) / (r ** 2 + r1 ** 2) ** 1.5
    return CurvatureReport(
        max_curvature=float(np.max(np.abs(kappa))),
        min_radius=float(r.min()),
        f0_c2=c2_norm(spec.f0),
        f1_c2=abs(spec.f1_const) + c2_norm(spec.f1),
    )


def validate(spec: CartoonSpec, safety: float = 2.0) -> CurvatureReport:
    """Check positivity of r, support inside [0,1]^2 and C^2 norms at most 1.

    Bump norms are grid estimates, so they count ``safety`` times; the
    constant part of f1 is exact.
    """
    rep = curvature_report(spec)
    if rep.min_radius <= 0:
        raise SpecError("radius function is not positive")
    theta = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
    r = spec.radius(theta)
    bx = spec.center[0] + r * np.cos(theta)
    by = spec.center[1] + r * np.sin(theta)
    if bx.min() < 0 or bx.max() > 1 or by.min() < 0 or by.max() > 1:
        raise SpecError("region B leaks outside [0,1]^2")
    for b in spec.f0 + spec.f1:
        if not b.inside_unit_square():
            raise SpecError(f"bump {b} leaks outside [0,1]^2")
    if safety * c2_norm(spec.f0) > 1:
        raise SpecError(f"f0 C2 norm estimate {rep.f0_c2:.3g} exceeds the bound")
    if abs(spec.f1_const) + safety * c2_norm(spec.f1) > 1:
        raise SpecError(f"f1 C2 norm estimate {rep.f1_c2:.3g} exceeds the bound")
    return rep


def pixel_centers(N: int) -> tuple[np.ndarray, np.ndarray]:
    x = (np.arange(N) + 0.5) / N
    return np.meshgrid(x, x, indexing="ij")


def generate(spec: CartoonSpec, N: int, check: bool = True) -> np.ndarray:
    """Samples of ``f0 + f1 chi_B`` at pixel centers; no antialiasing."""
    if check:
        validate(spec)
    x1, x2 = pixel_centers(N)
    f1 = spec.f1_const + spec.smooth(spec.f1, x1, x2)
    return spec.smooth(spec.f0, x1, x2) + np.where(spec.inside(x1, x2), f1, 0.0)


def default_spec() -> CartoonSpec:
    """The benchmark phantom: a wobbly star-shaped region on a gentle background."""
    return CartoonSpec(
        center=(0.5, 0.5),
        r0=0.3,
        harmonics=[(2, 0.03, 0.0), (3, 0.0, 0.04)],
        f0=[Bump(0.3, 0.3, 0.25, 0.004), Bump(0.72, 0.7, 0.2, -0.003)],
        f1=[Bump(0.55, 0.45, 0.2, 0.0005)],
        f1_const=0.8,
    )


# --- key-value spec files -----------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def parse_spec(text: str) -> CartoonSpec:
    """Read a spec from ``key = value`` lines.

    Keys: ``center`` (two numbers), ``r0``, ``harmonic`` (n a b, repeatable),
    ``f0_bump`` / ``f1_bump`` (cx cy radius amp, repeatable), ``f1_const``.
    """
    spec = CartoonSpec(harmonics=[], f0=[], f1=[])
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected key = value")
        key, val = (t.strip() for t in line.split("=", 1))
        try:
            nums = _floats(val)
            if key == "center" and len(nums) == 2:
                spec.center = (nums[0], nums[1])
            elif key == "r0" and len(nums) == 1:
                spec.r0 = nums[0]
            elif key == "f1_const" and len(nums) == 1:
                spec.f1_const = nums[0]
            elif key == "harmonic" and len(nums) == 3 and nums[0] == int(nums[0]) and nums[0] > 0:
                spec.harmonics.append((int(nums[0]), nums[1], nums[2]))
            elif key in ("f0_bump", "f1_bump") and len(nums) == 4:
                getattr(spec, key[:2]).append(Bump(*nums))
            else:
                raise SpecError(f"line {lineno}: bad entry {key!r}")
        except ValueError as exc:
            raise SpecError(f"line {lineno}: {exc}") from exc
    return spec


def format_spec(spec: CartoonSpec) -> str:
    lines = [f"center = {spec.center[0]!r} {spec.center[1]!r}", f"r0 = {spec.r0!r}"]
    lines += [f"harmonic = {n} {a!r} {b!r}" for n, a, b in spec.harmonics]
    lines += [f"f0_bump = {b.cx!r} {b.cy!r} {b.radius!r} {b.amp!r}" for b in spec.f0]
    lines += [f"f1_bump = {b.cx!r} {b.cy!r} {b.radius!r} {b.amp!r}" for b in spec.f1]
    lines.append(f"f1_const = {spec.f1_const!r}")
    return "\n".join(lines) + "\n"


def load_spec(path) -> CartoonSpec:
    return parse_spec(Path(path).read_text())
