"""Frequency apparatus and assumption checkers for plane-wave stability.

Per nonzero relative mode j the linearized split-step map couples the pair
(w_j, conj(w_{-j})) through a 2x2 matrix with entries

    alpha_j = (1 - i*h*lam*rho^2) * exp(-i*n(j)*h)
    beta_j  = -i*h*lam*rho^2 * exp(-i*n(j)*h)

where n(j) is an integer combination of mod-reduced mode norms.  Linear
stability requires every eigenvalue pair to stay on the unit circle, which
reduces to (cos(n(j)h) - h*lam*rho^2*sin(n(j)h))^2 <= 1 - c1*h^2 with a
positive margin c1.  The numerical frequencies omega_j are the eigenvalue
phases; the modified frequencies varpi_j (carrier mode 0 only) are h-dependent
surrogates built from mu_n = tan(n*h)/h that admit a non-resonance analysis.

The non-resonance checker enumerates signed integer combinations of frequency
classes and verifies a small-divisor lower bound plus the absence of complete
resonances.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._serialize import dumps
from .errors import (
    DegenerateSignError,
    DomainError,
    NegativeDiscriminantError,
    UnstableModeError,
)
from .spectral import Grid, Mode, as_mode, mod_reduce

__all__ = [
    "LinearStabilityReport",
    "FrequencyTable",
    "ModeEntry",
    "ComboWitness",
    "ResonanceReport",
    "n_of_j",
    "mode_matrix",
    "check_assumption1",
    "omega",
    "growth_factor",
    "cfl_max_h",
    "mu",
    "varpi",
    "build_frequency_table",
    "check_assumption2",
]

_TWO_PI = 2.0 * math.pi

# Tolerance for detecting complete resonances: h*(k.varpi) within this
# fraction of 2*pi from a multiple of 2*pi.  Exact equality is measure-zero
# in floating point; false positives only add checks.
_RESONANCE_TOL = 1e-9 * _TWO_PI


def _check_lambda(lam: int) -> int:
    if lam not in (-1, 1):
        raise DomainError(f"lambda must be +1 or -1, got {lam!r}")
    return int(lam)


def _shifted_norm2(ell: Mode, grid: Grid, sign: int) -> np.ndarray:
    """|mod_reduce(ell + sign*j)|^2 for every j in the grid, int64."""
    total = np.zeros(grid.shape, dtype=np.int64)
    for axis in range(grid.d):
        v = (ell[axis] + sign * grid.axis_modes + grid.K) % grid.n_axis - grid.K
        sq = (v.astype(np.int64)) ** 2
        shape = [1] * grid.d
        shape[axis] = grid.n_axis
        total = total + sq.reshape(shape)
    return total


def _n_array(ell: Mode, grid: Grid) -> np.ndarray:
    """n(j) over the whole grid (value 0 at the origin slot), int64."""
    plus = _shifted_norm2(ell, grid, +1)
    minus = _shifted_norm2(ell, grid, -1)
    ell2 = sum(c * c for c in ell)
    return (plus + minus) // 2 - ell2


def _shift_array(ell: Mode, grid: Grid) -> np.ndarray:
    """Integer frequency shift (|ell+j|^2 - |ell-j|^2)/2, mod-reduced, int64."""
    plus = _shifted_norm2(ell, grid, +1)
    minus = _shifted_norm2(ell, grid, -1)
    return (plus - minus) // 2


def n_of_j(j: int | tuple, ell: int | tuple, grid: Grid) -> int:
    """Integer coupling index n(j) = (|ell+j|^2 + |ell-j|^2)/2 - |ell|^2.

    Norms are taken on mod-2K-reduced representatives; the combination is
    always an even sum halved, hence exactly integer.
    """
    jm = mod_reduce(as_mode(j, grid.d), grid)
    em = mod_reduce(as_mode(ell, grid.d), grid)
    if all(c == 0 for c in jm):
        raise DomainError("n(j) is defined for nonzero modes only")
    plus = sum(c * c for c in mod_reduce(tuple(e + x for e, x in zip(em, jm)), grid))
    minus = sum(c * c for c in mod_reduce(tuple(e - x for e, x in zip(em, jm)), grid))
    ell2 = sum(c * c for c in em)
    return (plus + minus) // 2 - ell2


def mode_matrix(
    j: int | tuple, ell: int | tuple, h: float, rho: float, lam: int, grid: Grid
) -> tuple[complex, complex]:
    """Entries (alpha_j, beta_j) of the per-mode linearized propagation matrix.

    The full 2x2 block acting on (w_j, conj(w_{-j})) is
    [[alpha, beta], [conj(beta), conj(alpha)]]; |alpha|^2 - |beta|^2 = 1.
    """
    lam = _check_lambda(lam)
    n = n_of_j(j, ell, grid)
    hl = h * lam * rho * rho
    phase = cmath.exp(-1j * n * h)
    return (1.0 - 1j * hl) * phase, -1j * hl * phase


@dataclass(frozen=True)
class LinearStabilityReport:
    """Certified linear-stability margin over all nonzero modes."""

    holds: bool
    c1_certified: float
    worst_j: Mode

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "c1_certified": self.c1_certified,
            "worst_j": list(self.worst_j),
        }

    def to_json(self) -> str:
        return dumps(self.as_dict())


def _stability_arrays(
    ell: Mode, h: float, rho: float, lam: int, grid: Grid
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(n, R, g) over the full grid: R = Re(alpha)·e^{+inh}, g = -Im(alpha)·e^{+inh}."""
    n = _n_array(ell, grid)
    nh = n * h
    hl = h * lam * rho * rho
    r = np.cos(nh) - hl * np.sin(nh)
    g = np.sin(nh) + hl * np.cos(nh)
    return n, r, g


def check_assumption1(
    h: float, rho: float, lam: int, ell: int | tuple, grid: Grid
) -> LinearStabilityReport:
    """Largest certified c1 with (cos(nh) - h*lam*rho^2*sin(nh))^2 <= 1 - c1*h^2.

    holds iff the certified margin is strictly positive; worst_j is the first
    mode (in lexicographic storage order) attaining the maximal left-hand side.
    """
    lam = _check_lambda(lam)
    ell = mod_reduce(as_mode(ell, grid.d), grid)
    _, r, _ = _stability_arrays(ell, h, rho, lam, grid)
    r2 = r * r
    r2_flat = r2.reshape(-1).copy()
    r2_flat[np.ravel_multi_index(grid.index_of((0,) * grid.d), grid.shape)] = -np.inf
    worst_flat = int(np.argmax(r2_flat))
    worst_idx = np.unravel_index(worst_flat, grid.shape)
    worst_j = tuple(int(i) - grid.K for i in worst_idx)
    c1 = float((1.0 - r2_flat[worst_flat]) / (h * h))
    return LinearStabilityReport(holds=c1 > 0.0, c1_certified=c1, worst_j=worst_j)


def omega(
    j: int | tuple, ell: int | tuple, h: float, rho: float, lam: int, grid: Grid
) -> float:
    """Numerical frequency: eigenvalue phase of the per-mode propagation matrix.

    omega_j = (|ell+j|^2 - |ell-j|^2)/2 + arccos(R)/(h*sgn(G)) with
    R = cos(nh) - h*lam*rho^2*sin(nh) and G = sin(nh) + h*lam*rho^2*cos(nh),
    all norms mod-reduced.
    """
    lam = _check_lambda(lam)
    jm = mod_reduce(as_mode(j, grid.d), grid)
    em = mod_reduce(as_mode(ell, grid.d), grid)
    n = n_of_j(jm, em, grid)
    nh = n * h
    hl = h * lam * rho * rho
    r = math.cos(nh) - hl * math.sin(nh)
    if abs(r) > 1.0:
        raise UnstableModeError(
            f"mode {jm}: |cos(nh) - h*lam*rho^2*sin(nh)| = {abs(r)} > 1, "
            "eigenvalues off the unit circle"
        )
    g = math.sin(nh) + hl * math.cos(nh)
    if g == 0.0:
        raise DegenerateSignError(
            f"mode {jm}: sin(nh) + h*lam*rho^2*cos(nh) = 0, frequency branch undefined"
        )
    plus = sum(c * c for c in mod_reduce(tuple(e + x for e, x in zip(em, jm)), grid))
    minus = sum(c * c for c in mod_reduce(tuple(e - x for e, x in zip(em, jm)), grid))
    shift = (plus - minus) // 2
    sgn = 1.0 if g > 0.0 else -1.0
    return shift + math.acos(r) / (h * sgn)


def growth_factor(
    j: int | tuple, ell: int | tuple, h: float, rho: float, lam: int, grid: Grid
) -> float:
    """Spectral radius of the per-mode propagation matrix (1 when stable).

    Eigenvalues have product 1 and trace 2R; on the unit circle both have
    modulus 1, off it the dominant one has modulus |R| + sqrt(R^2 - 1).
    """
    lam = _check_lambda(lam)
    n = n_of_j(j, ell, grid)
    nh = n * h
    hl = h * lam * rho * rho
    r = math.cos(nh) - hl * math.sin(nh)
    return max(1.0, abs(r) + math.sqrt(max(0.0, r * r - 1.0)))


def cfl_max_h(d: int, K: int, rho0: float, N: int) -> float:
    """Largest step size with d*h*K^2 + 2*h*rho0^2 <= pi/(N+1)."""
    if K < 1:
        raise DomainError(f"K must be >= 1, got {K}")
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    if d < 1:
        raise DomainError(f"d must be >= 1, got {d}")
    return math.pi / ((N + 1) * (d * K * K + 2.0 * rho0 * rho0))


def mu(n: int, h: float) -> float:
    """mu_n = tan(n*h)/h, defined for n*h in (0, pi/2).

    Under the CFL restriction n*h stays below pi/2 for all coupling indices,
    and n <= mu_n <= C*n.
    """
    if n < 1 or n != int(n):
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if h <= 0.0 or not math.isfinite(h):
        raise DomainError(f"h must be positive and finite, got {h!r}")
    theta = n * h
    if theta >= math.pi / 2.0:
        raise DomainError(f"n*h = {theta} outside (0, pi/2); tan branch invalid")
    return math.tan(theta) / h


def varpi(j: int | tuple, h: float, sigma: float, lam: int, grid: Grid) -> float:
    """Modified frequency |j|^2 - mu + sqrt(mu^2 + 2*lam*sigma*mu), carrier mode 0.

    sigma is the squared plane-wave amplitude rho^2; sigma = 0 gives |j|^2.
    """
    lam = _check_lambda(lam)
    jm = mod_reduce(as_mode(j, grid.d), grid)
    if all(c == 0 for c in jm):
        raise DomainError("varpi is defined for nonzero modes only")
    if sigma < 0.0:
        raise DomainError(f"sigma = rho^2 must be nonnegative, got {sigma}")
    n = sum(c * c for c in jm)
    m = mu(n, h)
    rad = m * m + 2.0 * lam * sigma * m
    if rad < 0.0:
        raise NegativeDiscriminantError(
            f"mode {jm}: mu^2 + 2*lam*sigma*mu = {rad} < 0"
        )
    return n - m + math.sqrt(rad)


@dataclass(frozen=True)
class ModeEntry:
    """Per-mode slice of a FrequencyTable."""

    j: Mode
    n: int
    alpha: complex
    beta: complex
    omega: float
    varpi: float
    growth: float
    status: str


@dataclass(frozen=True)
class FrequencyTable:
    """Per-mode frequency data on the full grid (origin slot is a placeholder).

    Arrays are indexed like SpectralField coefficients (shifted lexicographic
    order).  omega is NaN wherever omega_status != "ok"; varpi is NaN wherever
    the modified frequency is unavailable (carrier != 0, tan branch out of
    domain, or negative discriminant).  eps_hat = max_j |varpi_j - omega_j| is
    populated only when the carrier is 0 and every nonzero mode has a valid
    omega and varpi; otherwise None.
    """

    grid: Grid
    ell: Mode
    h: float
    rho: float
    lam: int
    n: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    omega: np.ndarray
    omega_status: np.ndarray
    growth: np.ndarray
    varpi: np.ndarray
    eps_hat: float | None

    def __post_init__(self):
        for name in ("n", "alpha", "beta", "omega", "omega_status", "growth", "varpi"):
            getattr(self, name).flags.writeable = False

    def entry(self, j: int | tuple) -> ModeEntry:
        jm = mod_reduce(as_mode(j, self.grid.d), self.grid)
        idx = self.grid.index_of(jm)
        return ModeEntry(
            j=jm,
            n=int(self.n[idx]),
            alpha=complex(self.alpha[idx]),
            beta=complex(self.beta[idx]),
            omega=float(self.omega[idx]),
            varpi=float(self.varpi[idx]),
            growth=float(self.growth[idx]),
            status=str(self.omega_status[idx]),
        )

    def max_growth(self) -> float:
        return float(np.max(self.growth))


def build_frequency_table(
    h: float, rho: float, lam: int, ell: int | tuple, grid: Grid
) -> FrequencyTable:
    """Assemble n, alpha, beta, omega, growth, varpi and eps_hat for all modes.

    Per-mode omega failures are flagged in omega_status ("unstable" when the
    arccos argument leaves [-1, 1], "degenerate-sign" when the branch sign
    vanishes) with NaN entries rather than raised.
    """
    lam = _check_lambda(lam)
    if h <= 0.0 or not math.isfinite(h):
        raise DomainError(f"h must be positive and finite, got {h!r}")
    if rho < 0.0:
        raise DomainError(f"rho must be nonnegative, got {rho}")
    ell = mod_reduce(as_mode(ell, grid.d), grid)
    origin = grid.index_of((0,) * grid.d)

    n, r, g = _stability_arrays(ell, h, rho, lam, grid)
    hl = h * lam * rho * rho
    phase = np.exp(-1j * h * n)
    alpha = (1.0 - 1j * hl) * phase
    beta = (-1j * hl) * phase

    status = np.full(grid.shape, "ok", dtype="<U15")
    status[np.abs(r) > 1.0] = "unstable"
    status[(np.abs(r) <= 1.0) & (g == 0.0)] = "degenerate-sign"

    shift = _shift_array(ell, grid).astype(np.float64)
    sgn = np.where(g > 0.0, 1.0, -1.0)
    om = shift + np.arccos(np.clip(r, -1.0, 1.0)) / (h * sgn)
    om[status != "ok"] = np.nan

    growth = np.maximum(1.0, np.abs(r) + np.sqrt(np.maximum(0.0, r * r - 1.0)))
    growth_arr = growth.copy()
    growth_arr[origin] = 1.0

    vp = np.full(grid.shape, np.nan)
    if ell == (0,) * grid.d:
        sigma = rho * rho
        nn = n.astype(np.float64)
        valid = (n >= 1) & (nn * h < math.pi / 2.0)
        with np.errstate(all="ignore"):
            m = np.tan(nn * h) / h
            rad = m * m + 2.0 * lam * sigma * m
            vals = nn - m + np.sqrt(np.maximum(rad, 0.0))
        valid &= rad >= 0.0
        vp[valid] = vals[valid]
    vp[origin] = np.nan

    n_arr = n.copy()
    n_arr[origin] = 0
    alpha_arr = alpha.copy()
    alpha_arr[origin] = 1.0
    beta_arr = beta.copy()
    beta_arr[origin] = 0.0
    om[origin] = np.nan
    status[origin] = "excluded"

    zmask = np.ones(grid.shape, dtype=bool)
    zmask[origin] = False
    eps_hat: float | None = None
    if (
        ell == (0,) * grid.d
        and bool(np.all(status[zmask] == "ok"))
        and bool(np.all(np.isfinite(vp[zmask])))
    ):
        eps_hat = float(np.max(np.abs(vp[zmask] - om[zmask])))

    return FrequencyTable(
        grid=grid,
        ell=ell,
        h=float(h),
        rho=float(rho),
        lam=lam,
        n=n_arr,
        alpha=alpha_arr,
        beta=beta_arr,
        omega=om,
        omega_status=status,
        growth=growth_arr,
        varpi=vp,
        eps_hat=eps_hat,
    )


@dataclass(frozen=True)
class ComboWitness:
    """One combination vector, recorded as ((class representative, coefficient), ...).

    l is the support-class member of maximal modulus, the binding index for
    the small-divisor inequality lhs = |l|^4 / prod |j_rep|^(2|k_j|) <= rhs.
    kind is "small-divisor" (part (b)) or "complete-resonance" (part (c)).
    """

    k: tuple[tuple[Mode, int], ...]
    delta: float
    l: Mode
    lhs: float
    rhs: float
    kind: str

    def as_dict(self) -> dict:
        return {
            "k": [[list(mode), coeff] for mode, coeff in self.k],
            "delta": self.delta,
            "l": list(self.l),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "kind": self.kind,
        }


_HEADER = (
    "non-resonance check over frequency classes (class-support reading: "
    "at most one nonzero coefficient per class of equal frequency value); "
    "inequalities use the class-maximal modulus for l and class-representative "
    "moduli in the product"
)


@dataclass(frozen=True)
class ResonanceReport:
    """Verdict and witnesses for the non-resonance assumption, parts (a)-(c).

    part_a_ok: the frequency surrogate error bound max|varpi - omega| <= eps_hat
    (trivially true when the check runs on omega itself, eps_hat = 0).
    part_b_ok: no small-divisor inequality violation found.
    part_c_verdict: no complete resonance with a nonzero class combination.
    witnesses holds every violation found (one per combination vector when
    exhaustive, the first one otherwise); tightest is the non-violating
    small-divisor combination with minimal margin rhs - lhs.
    """

    holds: bool
    N: int
    c2: float
    delta2: float
    s2: float
    eps_hat: float
    freq_source: str
    header: str
    part_a_ok: bool
    part_b_ok: bool
    part_c_verdict: bool
    tightest: ComboWitness | None
    witnesses: tuple[ComboWitness, ...]
    n_vectors: int
    n_small_divisors: int
    n_violations: int

    def as_dict(self) -> dict:
        return {
            "holds": self.holds,
            "N": self.N,
            "c2": self.c2,
            "delta2": self.delta2,
            "s2": self.s2,
            "eps_hat": self.eps_hat,
            "freq_source": self.freq_source,
            "header": self.header,
            "part_a_ok": self.part_a_ok,
            "part_b_ok": self.part_b_ok,
            "part_c_verdict": self.part_c_verdict,
            "tightest": None if self.tightest is None else self.tightest.as_dict(),
            "witnesses": [w.as_dict() for w in self.witnesses],
            "n_vectors": self.n_vectors,
            "n_small_divisors": self.n_small_divisors,
            "n_violations": self.n_violations,
        }

    def to_json(self) -> str:
        return dumps(self.as_dict())


class _FrequencyClasses:
    """Nonzero modes grouped by exact frequency value, in deterministic order.

    Classes are sorted by (representative |j|^2, representative tuple); the
    representative is the member of smallest modulus (lexicographic tie-break),
    max_mode the member of maximal modulus (same tie-break).
    """

    def __init__(self, table: FrequencyTable, freqs: np.ndarray):
        groups: dict[float, list[Mode]] = {}
        for j in table.grid.modes():
            if all(c == 0 for c in j):
                continue
            val = float(freqs[table.grid.index_of(j)])
            groups.setdefault(val, []).append(j)

        def mod2(m: Mode) -> int:
            return sum(c * c for c in m)

        items = []
        for val, members in groups.items():
            rep = min(members, key=lambda m: (mod2(m), m))
            mx = max(mod2(m) for m in members)
            max_mode = min((m for m in members if mod2(m) == mx), key=tuple)
            items.append((rep, val, mod2(rep), mx, max_mode, tuple(members)))
        items.sort(key=lambda it: (it[2], it[0]))
        self.reps = [it[0] for it in items]
        self.freqs = [it[1] for it in items]
        self.rep_mod2 = [it[2] for it in items]
        self.max_mod2 = [it[3] for it in items]
        self.max_mode = [it[4] for it in items]
        self.members = [it[5] for it in items]

    def __len__(self) -> int:
        return len(self.reps)

    def class_of(self) -> dict[Mode, int]:
        lookup: dict[Mode, int] = {}
        for c, members in enumerate(self.members):
            for m in members:
                lookup[m] = c
        return lookup


def check_assumption2(
    table: FrequencyTable,
    N: int,
    c2: float,
    delta2: float,
    s2: float,
    eps_hat: float = 0.0,
    exhaustive: bool = False,
) -> ResonanceReport:
    """Check the non-resonance assumption over all class combinations of order <= N+1.

    eps_hat selects the frequency family: 0 runs the check on the numerical
    frequencies omega themselves (parts (b)/(c) only, part (a) trivial); a
    positive value runs it on the modified frequencies varpi (carrier 0 only)
    and additionally verifies part (a), max_j |varpi_j - omega_j| <= eps_hat.

    For every signed integer vector k supported on class representatives with
    0 < sum|k_j| <= N+1: delta = |exp(i*h*(k.freq)) - 1|/h; if delta <= delta2
    the small-divisor bound lhs <= c2 * delta^(N/s2) must hold, with
    lhs = (max support-class modulus)^4 / prod(rep modulus)^(2|k_j|); and if
    h*(k.freq) lies within 1e-9*2*pi of a multiple of 2*pi the vector is a
    complete resonance, which always violates part (c) because the enumerated
    class combination is nonzero.  Enumeration stops at the first violation
    unless exhaustive is set, in which case every violation is recorded.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if c2 <= 0.0 or delta2 <= 0.0 or s2 <= 0.0:
        raise DomainError("c2, delta2 and s2 must be positive")
    if eps_hat < 0.0:
        raise DomainError(f"eps_hat must be nonnegative, got {eps_hat}")

    origin = table.grid.index_of((0,) * table.grid.d)
    zmask = np.ones(table.grid.shape, dtype=bool)
    zmask[origin] = False

    part_a_ok = True
    if eps_hat == 0.0:
        if not bool(np.all(table.omega_status[zmask] == "ok")):
            raise DomainError(
                "frequency table has flagged modes; numerical frequencies "
                "are not defined for the non-resonance check"
            )
        freqs = table.omega
        freq_source = "omega"
    else:
        if table.ell != (0,) * table.grid.d:
            raise DomainError(
                "modified frequencies exist only for carrier mode 0; "
                "run with eps_hat = 0 to check the numerical frequencies"
            )
        if table.eps_hat is None:
            raise DomainError(
                "modified frequencies are incomplete for these parameters"
            )
        freqs = table.varpi
        freq_source = "varpi"
        part_a_ok = table.eps_hat <= eps_hat

    classes = _FrequencyClasses(table, freqs)
    ncls = len(classes)
    exponent = N / s2

    n_vectors = 0
    n_small = 0
    violations: list[ComboWitness] = []
    tightest: ComboWitness | None = None
    tightest_margin = math.inf
    part_b_ok = True
    part_c_ok = True
    stop = False

    kvec = [0] * ncls

    def make_witness(delta: float, lhs: float, rhs: float, kind: str) -> ComboWitness:
        support = tuple(
            (classes.reps[c], kvec[c]) for c in range(ncls) if kvec[c] != 0
        )
        lmax = max((c for c in range(ncls) if kvec[c] != 0),
                   key=lambda c: classes.max_mod2[c])
        return ComboWitness(
            k=support,
            delta=delta,
            l=classes.max_mode[lmax],
            lhs=lhs,
            rhs=rhs,
            kind=kind,
        )

    def evaluate(dot: float, denom: float, num_mod2: int) -> None:
        nonlocal n_vectors, n_small, part_b_ok, part_c_ok, tightest
        nonlocal tightest_margin, stop
        n_vectors += 1
        theta = table.h * dot
        lhs = float(num_mod2) ** 2 / denom
        if abs(math.remainder(theta, _TWO_PI)) <= _RESONANCE_TOL:
            part_c_ok = False
            delta = 2.0 * abs(math.sin(0.5 * theta)) / table.h
            violations.append(make_witness(delta, lhs, math.nan, "complete-resonance"))
            if not exhaustive:
                stop = True
                return
        delta = 2.0 * abs(math.sin(0.5 * theta)) / table.h
        if delta <= delta2:
            n_small += 1
            rhs = c2 * delta**exponent
            if lhs > rhs:
                part_b_ok = False
                violations.append(make_witness(delta, lhs, rhs, "small-divisor"))
                if not exhaustive:
                    stop = True
            else:
                margin = rhs - lhs
                if margin < tightest_margin:
                    tightest_margin = margin
                    tightest = make_witness(delta, lhs, rhs, "small-divisor")

    def recurse(c: int, remaining: int, dot: float, denom: float, num_mod2: int) -> None:
        if stop:
            return
        if c == ncls:
            if remaining == 0:
                evaluate(dot, denom, num_mod2)
            return
        recurse(c + 1, remaining, dot, denom, num_mod2)
        if stop:
            return
        freq = classes.freqs[c]
        rep2 = float(classes.rep_mod2[c])
        top2 = classes.max_mod2[c]
        for mag in range(1, remaining + 1):
            d2 = denom * rep2**mag
            nm = num_mod2 if num_mod2 >= top2 else top2
            for sign in (+1, -1):
                kvec[c] = sign * mag
                recurse(c + 1, remaining - mag, dot + sign * mag * freq, d2, nm)
                kvec[c] = 0
                if stop:
                    return

    # outer loop over the exact total norm keeps the enumeration ordered by
    # combination size, so short-circuit witnesses are minimal-order ones
    for total in range(1, N + 2):
        if stop:
            break
        recurse(0, total, 0.0, 1.0, 0)

    holds = part_a_ok and part_b_ok and part_c_ok
    return ResonanceReport(
        holds=holds,
        N=N,
        c2=float(c2),
        delta2=float(delta2),
        s2=float(s2),
        eps_hat=float(eps_hat),
        freq_source=freq_source,
        header=_HEADER,
        part_a_ok=part_a_ok,
        part_b_ok=part_b_ok,
        part_c_verdict=part_c_ok,
        tightest=tightest,
        witnesses=tuple(violations),
        n_vectors=n_vectors,
        n_small_divisors=n_small,
        n_violations=len(violations),
    )
