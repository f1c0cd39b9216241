"""Variable chain u -> v -> w -> xi around a plane wave, and its inverse.

Relative to a carrier mode ell with amplitude rho, the chain is

    v_j = u_{ell+j mod 2K}          (recentering)
    w_j = v_j * exp(-i*theta)       (theta = polar angle of v_0, w_0 := 0)
    xi_j = S00_j w_j + S01_j conj(w_{-j mod 2K})

where the symplectic matrices S_j diagonalize the per-mode linearized
propagation blocks: with their eigenvalues lambda± = Re(alpha) ±
i*sgn(Im(alpha))*sqrt(1 - Re(alpha)^2),

    S_j^{-1} = [[beta, lambda- - conj(alpha)], [lambda+ - alpha, conj(beta)]]
               / sqrt(|beta|^2 - |lambda+ - alpha|^2)

and S_j is its adjugate (det = 1).  Under linear stability the normalizer
|beta|^2 - |lambda+ - alpha|^2 = 2q(|Im alpha| - q) with q = sqrt(1 - Re^2)
is positive for rho > 0.  In xi variables one split step acts diagonally,
xi_j -> exp(-i*omega_j*h)*xi_j, up to terms quadratic in the perturbation.

The zero-mode polar data (theta, a) is retained so the chain is exactly
invertible; the carrier modulus is recomputed on inversion from the mass
budget a = sqrt(rho^2 - sum|w_j|^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainError,
    MassDeficitError,
    NotLinearlyStableError,
    ZeroCarrierModeError,
)
from .spectral import Grid, Mode, SpectralField, as_mode, mod_reduce
from .stability import FrequencyTable, _shift_array, build_frequency_table

__all__ = [
    "DiagonalizerSet",
    "XiField",
    "build_diagonalizers",
    "u_to_xi",
    "xi_to_u",
]


def _negation_index(grid: Grid) -> tuple[np.ndarray, ...]:
    """Per-axis index arrays realizing j -> mod_reduce(-j) in storage order."""
    idx = np.arange(grid.n_axis)
    neg = (grid.n_axis - idx) % grid.n_axis
    return np.ix_(*([neg] * grid.d))


@dataclass(frozen=True)
class DiagonalizerSet:
    """Per-mode symplectic diagonalizers S_j and their inverses.

    Both matrices have the conjugate-swap row structure
    [[a, b], [conj(b), conj(a)]], so only the first rows are stored:
    S_j = [[s00, s01], ...], S_j^{-1} = [[t00, t01], ...].  The origin slot
    holds the identity.  degenerate_coupling marks the rho = 0 limit where
    the linear part is already diagonal and S_j := identity by convention.
    """

    table: FrequencyTable
    s00: np.ndarray
    s01: np.ndarray
    t00: np.ndarray
    t01: np.ndarray
    degenerate_coupling: bool

    def __post_init__(self):
        for name in ("s00", "s01", "t00", "t01"):
            getattr(self, name).flags.writeable = False

    @property
    def grid(self) -> Grid:
        return self.table.grid

    @property
    def ell(self) -> Mode:
        return self.table.ell

    @property
    def h(self) -> float:
        return self.table.h

    @property
    def rho(self) -> float:
        return self.table.rho

    @property
    def lam(self) -> int:
        return self.table.lam

    def S(self, j: int | tuple) -> np.ndarray:
        idx = self.grid.index_of(mod_reduce(as_mode(j, self.grid.d), self.grid))
        a, b = complex(self.s00[idx]), complex(self.s01[idx])
        return np.array([[a, b], [np.conj(b), np.conj(a)]], dtype=np.complex128)

    def S_inv(self, j: int | tuple) -> np.ndarray:
        idx = self.grid.index_of(mod_reduce(as_mode(j, self.grid.d), self.grid))
        a, b = complex(self.t00[idx]), complex(self.t01[idx])
        return np.array([[a, b], [np.conj(b), np.conj(a)]], dtype=np.complex128)

    def propagation_matrix(self, j: int | tuple) -> np.ndarray:
        """Full per-mode step matrix on (w_j, conj(w_{-j})), integer shift included."""
        grid = self.grid
        jm = mod_reduce(as_mode(j, grid.d), grid)
        idx = grid.index_of(jm)
        alpha = complex(self.table.alpha[idx])
        beta = complex(self.table.beta[idx])
        shift = int(_shift_array(self.ell, grid)[idx])
        phase = np.exp(-1j * shift * self.h)
        block = np.array(
            [[alpha, beta], [np.conj(beta), np.conj(alpha)]], dtype=np.complex128
        )
        return phase * block

    def entry_bound(self) -> float:
        """Largest entry modulus over all modes (compare with the stability margin bound)."""
        return float(
            max(
                np.max(np.abs(self.s00)),
                np.max(np.abs(self.s01)),
                np.max(np.abs(self.t00)),
                np.max(np.abs(self.t01)),
            )
        )


def build_diagonalizers(
    h: float, rho: float, lam: int, ell: int | tuple, grid: Grid
) -> DiagonalizerSet:
    """Assemble S_j, S_j^{-1} for all nonzero modes from the frequency table.

    Requires linear stability: every 1 - Re(alpha_j)^2 must be positive and
    every normalizer 2q(|Im alpha| - q) positive; otherwise
    NotLinearlyStableError names the offending mode.  rho = 0 degenerates the
    coupling (beta = 0) and yields identity matrices with the
    degenerate_coupling flag set.
    """
    table = build_frequency_table(h, rho, lam, ell, grid)
    origin = grid.index_of((0,) * grid.d)

    ident = np.ones(grid.shape, dtype=np.complex128)
    zeros = np.zeros(grid.shape, dtype=np.complex128)
    if rho == 0.0:
        return DiagonalizerSet(
            table=table,
            s00=ident,
            s01=zeros.copy(),
            t00=ident.copy(),
            t01=zeros.copy(),
            degenerate_coupling=True,
        )

    zmask = np.ones(grid.shape, dtype=bool)
    zmask[origin] = False

    alpha = table.alpha
    beta = table.beta
    # q^2 = 1 - Re(alpha)^2 = (1 - R)(1 + R) with each factor in half-angle
    # form; the direct 1 - R*R loses ~eps/q^2 relative accuracy as the
    # stability margin shrinks with h
    nh = table.n * table.h
    hl = table.h * table.lam * table.rho * table.rho
    sn = np.sin(nh)
    q2 = (2.0 * np.sin(0.5 * nh) ** 2 + hl * sn) * (
        2.0 * np.cos(0.5 * nh) ** 2 - hl * sn
    )
    bad = zmask & (q2 <= 0.0)
    if np.any(bad):
        j = _first_mode(grid, bad)
        raise NotLinearlyStableError(
            f"mode {j}: eigenvalues off the unit circle (1 - Re(alpha)^2 = "
            f"{float(q2[grid.index_of(j)])})"
        )
    q = np.sqrt(np.where(zmask, q2, 1.0))
    im = alpha.imag
    # |im| - q = |beta|^2 / (|im| + q) exactly (the block has det 1); the
    # quotient form avoids the ~rho^4 cancellation in the rho -> 0 limit
    gap = np.abs(beta) ** 2 / (np.abs(im) + q)
    norm = 2.0 * q * gap
    bad = zmask & (norm <= 0.0)
    if np.any(bad):
        j = _first_mode(grid, bad)
        raise NotLinearlyStableError(
            f"mode {j}: diagonalizer normalizer "
            f"{float(norm[grid.index_of(j)])} <= 0"
        )

    sg = np.where(im >= 0.0, 1.0, -1.0)
    rn = np.sqrt(np.where(zmask, norm, 1.0))

    # lam_minus - conj(alpha) = i*sg*(|im| - q), written through `gap`
    t00 = beta / rn
    t01 = 1j * sg * gap / rn
    s00 = np.conj(beta) / rn
    s01 = -t01

    s00[origin] = 1.0
    s01[origin] = 0.0
    t00_arr = t00.copy()
    t00_arr[origin] = 1.0
    t01_arr = t01.copy()
    t01_arr[origin] = 0.0

    return DiagonalizerSet(
        table=table,
        s00=s00,
        s01=s01,
        t00=t00_arr,
        t01=t01_arr,
        degenerate_coupling=False,
    )


def _first_mode(grid: Grid, mask: np.ndarray) -> Mode:
    flat = int(np.argmax(mask.reshape(-1)))
    idx = np.unravel_index(flat, grid.shape)
    return tuple(int(i) - grid.K for i in idx)


@dataclass(frozen=True)
class XiField:
    """Diagonalized perturbation variables plus the retained zero-mode polar data.

    xi is stored on the full grid (origin slot zero); theta and a are the
    polar angle and modulus of the recentered carrier coefficient, so the
    transform chain is exactly invertible.
    """

    ctx: DiagonalizerSet
    xi: np.ndarray
    theta: float
    a: float

    def __post_init__(self):
        self.xi.flags.writeable = False

    @property
    def grid(self) -> Grid:
        return self.ctx.grid

    @property
    def ell(self) -> Mode:
        return self.ctx.ell

    def sobolev_norm(self, s: float) -> float:
        w = self.grid.sobolev_weights(s)
        return float(math.sqrt(np.sum(w * np.abs(self.xi) ** 2)))


def u_to_xi(u: SpectralField, ctx: DiagonalizerSet) -> XiField:
    """Transform a field near the plane wave into diagonalized variables.

    The field's mass must match the context's rho^2 budget (the inverse
    recomputes the carrier modulus from that budget).
    """
    grid = ctx.grid
    if u.grid != grid:
        raise DomainError("field grid does not match the diagonalizer grid")
    mass2 = float(np.sum(np.abs(u.coeffs) ** 2))
    rho2 = ctx.rho * ctx.rho
    if abs(mass2 - rho2) > 1e-6 * max(rho2, 1.0):
        raise DomainError(
            f"field mass {mass2} does not match the context budget rho^2 = {rho2}"
        )

    shift = tuple(-c for c in ctx.ell)
    v = np.roll(u.coeffs, shift, axis=tuple(range(grid.d)))
    origin = grid.index_of((0,) * grid.d)
    v0 = complex(v[origin])
    a = abs(v0)
    if a == 0.0:
        raise ZeroCarrierModeError(
            "carrier coefficient is zero; polar angle undefined"
        )
    theta = math.atan2(v0.imag, v0.real)
    w = v * np.exp(-1j * theta)
    w[origin] = 0.0

    neg = _negation_index(grid)
    xi = ctx.s00 * w + ctx.s01 * np.conj(w[neg])
    xi[origin] = 0.0
    return XiField(ctx=ctx, xi=xi, theta=theta, a=a)


def xi_to_u(xi: XiField) -> SpectralField:
    """Invert the transform chain; exact inverse of u_to_xi.

    The carrier modulus is recomputed from a = sqrt(rho^2 - sum|w_j|^2);
    MassDeficitError if the non-carrier block exceeds the budget.
    """
    ctx = xi.ctx
    grid = ctx.grid
    origin = grid.index_of((0,) * grid.d)

    neg = _negation_index(grid)
    w = ctx.t00 * xi.xi + ctx.t01 * np.conj(xi.xi[neg])
    w[origin] = 0.0

    rho2 = ctx.rho * ctx.rho
    rad = rho2 - float(np.sum(np.abs(w) ** 2))
    if rad < 0.0:
        raise MassDeficitError(
            f"non-carrier mass exceeds the budget rho^2 = {rho2} by {-rad}"
        )
    a = math.sqrt(rad)

    v = w * np.exp(1j * xi.theta)
    v[origin] = a * np.exp(1j * xi.theta)
    u = np.roll(v, tuple(ctx.ell), axis=tuple(range(grid.d)))
    return SpectralField(grid, u)
