"""Spectral grids and fields on the d-dimensional torus.

A field is represented by its Fourier coefficients u_j on the mode set
{-K, ..., K-1}^d, stored in lexicographic order of the shifted index j + K
per axis (array position p corresponds to mode j = p - K along each axis).
Collocation values live on the points x_j = pi*j/K with the same ordering.
numpy's FFT routines use the 0..2K-1 ordering instead; the bijection between
the two is one fftshift/ifftshift pair and is confined to the two conversion
helpers below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Mode = tuple[int, ...]

__all__ = [
    "Mode",
    "Grid",
    "SpectralField",
    "PlaneWaveSpec",
    "as_mode",
    "mod_reduce",
    "trig_interpolate",
    "sobolev_norm",
    "project_away",
]


def as_mode(j: int | Sequence[int], d: int) -> Mode:
    """Normalize a mode index to a length-d tuple of ints."""
    if isinstance(j, (int, np.integer)):
        if d != 1:
            raise ValueError(f"scalar mode index for d={d}")
        return (int(j),)
    t = tuple(int(c) for c in j)
    if len(t) != d:
        raise ValueError(f"mode index {t} has length {len(t)}, expected {d}")
    return t


@dataclass(frozen=True)
class Grid:
    """Fourier collocation grid with modes {-K, ..., K-1}^d."""

    K: int
    d: int = 1

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")

    @property
    def n_axis(self) -> int:
        return 2 * self.K

    @property
    def shape(self) -> tuple[int, ...]:
        return (2 * self.K,) * self.d

    @property
    def size(self) -> int:
        return (2 * self.K) ** self.d

    @cached_property
    def axis_modes(self) -> np.ndarray:
        """Mode numbers along one axis, in storage order: -K, ..., K-1."""
        return np.arange(-self.K, self.K)

    @cached_property
    def mode_norm2(self) -> np.ndarray:
        """|j|^2 for every mode, shaped like the coefficient array (int64)."""
        axes = np.ix_(*[self.axis_modes**2 for _ in range(self.d)])
        out = np.zeros(self.shape, dtype=np.int64)
        for a in axes:
            out = out + a
        return out

    def sobolev_weights(self, s: float) -> np.ndarray:
        """max-style H^s weights: |j|^(2s) off the origin, 1 at j = 0."""
        n2 = self.mode_norm2.astype(float)
        w = np.ones(self.shape)
        nz = n2 > 0
        w[nz] = np.power(n2[nz], s)
        return w

    def index_of(self, j: int | Sequence[int]) -> tuple[int, ...]:
        """Array position of mode j (shifted by +K per axis)."""
        m = as_mode(j, self.d)
        for c in m:
            if not -self.K <= c < self.K:
                raise IndexError(f"mode {m} outside {{-K, ..., K-1}}^d with K={self.K}")
        return tuple(c + self.K for c in m)

    def modes(self) -> Iterable[Mode]:
        """All modes in storage (lexicographic shifted) order."""
        for pos in np.ndindex(*self.shape):
            yield tuple(p - self.K for p in pos)

    def nonzero_modes(self) -> tuple[Mode, ...]:
        """Modes with j != 0, in storage order."""
        return tuple(m for m in self.modes() if any(m))

    def collocation_axis(self) -> np.ndarray:
        """Collocation points along one axis: x_j = pi*j/K, j = -K..K-1."""
        return math.pi * self.axis_modes / self.K


def mod_reduce(v: int | Sequence[int], grid: Grid) -> Mode:
    """Reduce an integer vector entrywise into {-K, ..., K-1} modulo 2K."""
    m = as_mode(v, grid.d)
    K = grid.K
    return tuple((c + K) % (2 * K) - K for c in m)


def _coeffs_to_values(coeffs: np.ndarray) -> np.ndarray:
    # shifted coeffs -> shifted values; u(x_q) = sum_j u_j e^{i j.x_q}
    std = np.fft.ifftshift(coeffs)
    vals = np.fft.ifftn(std) * coeffs.size
    return np.fft.fftshift(vals)


def _values_to_coeffs(values: np.ndarray) -> np.ndarray:
    std = np.fft.ifftshift(values)
    coeffs = np.fft.fftn(std) / values.size
    return np.fft.fftshift(coeffs)


@dataclass(frozen=True)
class SpectralField:
    """Immutable Fourier-coefficient representation of a grid function."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise ValueError(f"coefficient shape {c.shape} != grid shape {self.grid.shape}")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def from_modes(cls, grid: Grid, amplitudes: dict) -> "SpectralField":
        c = np.zeros(grid.shape, dtype=np.complex128)
        for j, a in amplitudes.items():
            c[grid.index_of(j)] = a
        return cls(grid, c)

    def coeff(self, j: int | Sequence[int]) -> complex:
        return complex(self.coeffs[self.grid.index_of(j)])

    def values(self) -> np.ndarray:
        """Collocation values u(x_j), same shifted ordering as the modes."""
        return _coeffs_to_values(self.coeffs)

    def mass(self) -> float:
        """Discrete L2 mass sum_j |u_j|^2 (Parseval: (2K)^-d sum_x |u(x)|^2)."""
        return float(np.sum(np.abs(self.coeffs) ** 2))


def trig_interpolate(values: np.ndarray, grid: Grid) -> SpectralField:
    """Trigonometric interpolation of collocation values.

    Over-resolved signals alias: the coefficient at j collects every
    continuous mode k with k = j (mod 2K) entrywise.
    """
    v = np.asarray(values, dtype=np.complex128)
    if v.shape != grid.shape:
        raise ValueError(f"value shape {v.shape} != grid shape {grid.shape}")
    return SpectralField(grid, _values_to_coeffs(v))


def sobolev_norm(f: SpectralField, s: float) -> float:
    """H^s norm: (|u_0|^2 + sum_{j != 0} |j|^(2s) |u_j|^2)^(1/2).

    s = 0 gives the square root of the discrete mass.
    """
    w = f.grid.sobolev_weights(s)
    return math.sqrt(float(np.sum(w * np.abs(f.coeffs) ** 2)))


def project_away(f: SpectralField, ell: int | Sequence[int]) -> SpectralField:
    """Remove the carrier coefficient at ell and shift the spectrum by ell.

    The result has coefficient u_{mod(j+ell)} at index j for j != 0 and zero
    at the origin, so its H^s norm measures everything away from the carrier.
    """
    grid = f.grid
    lv = np.array(as_mode(ell, grid.d))
    K = grid.K
    idx = np.indices(grid.shape)  # shape (d, 2K, ..., 2K), entries are positions
    src = tuple((idx[a] + lv[a]) % (2 * K) for a in range(grid.d))
    out = f.coeffs[src]
    out[(K,) * grid.d] = 0.0
    return SpectralField(grid, out)


@dataclass(frozen=True)
class PlaneWaveSpec:
    """Plane wave rho * e^{i(ell.x - omega t)} advanced exactly by the splitting."""

    rho: float
    ell: Mode
    lam: float

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        if self.lam not in (-1.0, 1.0):
            raise ValueError("lam must be -1 or +1")
        object.__setattr__(self, "ell", tuple(int(c) for c in self.ell))

    @property
    def omega(self) -> float:
        """Nonlinear dispersion relation |ell|^2 + lam * rho^2."""
        return float(sum(c * c for c in self.ell)) + self.lam * self.rho**2

    def field(self, grid: Grid, t: float = 0.0) -> SpectralField:
        """The plane wave at time t as a spectral field on `grid`."""
        c = np.zeros(grid.shape, dtype=np.complex128)
        c[grid.index_of(self.ell)] = self.rho * np.exp(-1j * self.omega * t)
        return SpectralField(grid, c)
