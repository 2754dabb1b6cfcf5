"""Periodized N x N pixel grid on the unit torus and its integer frequency lattice."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class FourierGrid:
    """Square grid of side N on [0, 1)^2.

    ``coarse_log2`` fixes how many generator unit cells fit along one side of
    the torus (``cells = 2**coarse_log2``): integer frequency k corresponds to
    generator frequency ``k / cells``.

    Arrays in frequency are kept in FFT order; index i stands for the
    centered integer frequency ``fftfreq(N) * N``.
    """

    N: int
    coarse_log2: int = 1

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1):
            raise ShapeError(f"N={self.N} is not a power of two")
        if not 0 <= self.coarse_log2 < self.log2N:
            raise ShapeError(f"coarse_log2={self.coarse_log2} must lie in [0, log2 N)")

    @property
    def log2N(self) -> int:
        return self.N.bit_length() - 1

    @property
    def cells(self) -> int:
        return 2 ** self.coarse_log2

    @property
    def levels(self) -> int:
        """Number of dyadic levels between the coarse cells and the pixels."""
        return self.log2N - self.coarse_log2

    @property
    def finest_scale(self) -> int:
        return self.levels - 1

    @property
    def cell_area(self) -> float:
        return 1.0 / self.N ** 2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @cached_property
    def k(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.N) * self.N).astype(int)

    @cached_property
    def omega(self) -> tuple[np.ndarray, np.ndarray]:
        """Generator-unit frequencies as two N x N arrays (ij indexing)."""
        w = self.k / self.cells
        return np.meshgrid(w, w, indexing="ij")

    def check(self, f: np.ndarray) -> None:
        if np.shape(f) != self.shape:
            raise ShapeError(f"array shape {np.shape(f)} does not match grid {self.shape}")

    # Fourier coefficients on the torus: fhat(k) = integral f(x) exp(-2 pi i k.x) dx
    def fourier(self, f: np.ndarray) -> np.ndarray:
        self.check(f)
        return np.fft.fft2(f) / self.N ** 2

    def spatial(self, F: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(F) * self.N ** 2

    def ortho(self, f: np.ndarray) -> np.ndarray:
        """Unitary DFT (the spectrum used in the weighted energy identity)."""
        return np.fft.fft2(f, norm="ortho")

    @cached_property
    def _rot_index(self):
        i1, i2 = np.meshgrid(np.arange(self.N), np.arange(self.N), indexing="ij")
        return i1, i2

    def rotate(self, A: np.ndarray) -> np.ndarray:
        """``A o R`` with R the quarter turn ``(x1, x2) -> (-x2, x1)``.

        Works for spatial and frequency arrays alike: R maps the lattice
        Z_N^2 onto itself.
        """
        i1, i2 = self._rot_index
        return A[(-i2) % self.N, i1]

    def rotate_inv(self, A: np.ndarray) -> np.ndarray:
        """``A o R^{-1}`` with ``R^{-1}(x1, x2) = (x2, -x1)``."""
        i1, i2 = self._rot_index
        return A[i2, (-i1) % self.N]

    def even_max(self, A: np.ndarray) -> np.ndarray:
        """``max(A(k), A(-k))`` on the lattice.

        Multipliers evaluated at centered frequencies are even except on the
        Nyquist lines, where the sample at -N/2 also stands for +N/2. Taking
        the larger value keeps them even without lowering either side.
        """
        n = (-np.arange(self.N)) % self.N
        return np.maximum(A, A[np.ix_(n, n)])

    def spec(self) -> dict:
        return {"N": self.N, "coarse_log2": self.coarse_log2}
