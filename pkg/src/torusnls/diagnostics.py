"""Trajectory observables: orbital distance, super-actions, instability
detection, and file emission.

The super-actions I_m = sum_{n(l)=m} |xi_l|^2 collect the diagonalized
actions over modes with equal coupling index n(l); near-conservation of the
weighted deviation D = sum_m max(1,m)^s |I_m - I_m(0)| is the long-time
stability diagnostic.  Orbital distance is the H^s norm of the field with
the carrier mode removed.

File emission writes three artifacts per run id: a series CSV
(t, mass, orbital_distance, D), a long-format spectrum CSV of per-mode
magnitudes inside configured time windows, and a JSON metadata sidecar.
All floats are written with 17 significant digits.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ._serialize import dumps, format_float
from .errors import (
    BlowUpError,
    ClassSetMismatchError,
    DomainError,
    NotLinearlyStableError,
    ZeroCarrierModeError,
)
from .spectral import Grid, SpectralField, as_mode, mod_reduce, project_away, sobolev_norm
from .transforms import DiagonalizerSet, XiField, build_diagonalizers, u_to_xi

__all__ = [
    "SuperActionSet",
    "InstabilityReport",
    "TrajectoryDiagnostics",
    "TrajectoryRecorder",
    "super_actions",
    "weighted_deviation",
    "detect_instability",
    "default_snapshot_windows",
    "emit",
]


@dataclass(frozen=True)
class SuperActionSet:
    """Per-class action sums I_m, keyed by the coupling index m = n(j).

    Classes are sorted ascending; the values partition the total action,
    sum_m I_m = sum_j |xi_j|^2.
    """

    ms: tuple[int, ...]
    values: tuple[float, ...]

    def total(self) -> float:
        return float(sum(self.values))

    def as_dict(self) -> dict:
        return {str(m): v for m, v in zip(self.ms, self.values)}


def super_actions(xi: XiField) -> SuperActionSet:
    """Group |xi_j|^2 over nonzero modes by the coupling index n(j)."""
    grid = xi.grid
    origin = grid.index_of((0,) * grid.d)
    zmask = np.ones(grid.shape, dtype=bool)
    zmask[origin] = False
    labels = xi.ctx.table.n[zmask]
    weights = (np.abs(xi.xi) ** 2)[zmask]
    ms, inverse = np.unique(labels, return_inverse=True)
    sums = np.bincount(inverse, weights=weights)
    return SuperActionSet(
        ms=tuple(int(m) for m in ms),
        values=tuple(float(v) for v in sums),
    )


def weighted_deviation(now: SuperActionSet, initial: SuperActionSet, s: float) -> float:
    """D = sum_m max(1, m)^s |I_m - I_m(0)|."""
    if now.ms != initial.ms:
        raise ClassSetMismatchError(
            f"class sets differ: {now.ms} vs {initial.ms}"
        )
    return float(
        sum(
            float(max(1, m)) ** s * abs(a - b)
            for m, a, b in zip(now.ms, now.values, initial.values)
        )
    )


@dataclass(frozen=True)
class InstabilityReport:
    """Threshold verdict with onset time and fitted exponential growth rate.

    onset_time is the first sample time where the distance exceeds twice
    epsilon (NaN if never); growth_rate is the least-squares slope of
    log(distance) per unit time over samples with distance in
    [2*epsilon, 50*epsilon] (NaN when fewer than two samples fall there).
    """

    verdict: bool
    onset_time: float
    growth_rate: float
    threshold_factor: float
    epsilon: float

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "onset_time": self.onset_time,
            "growth_rate": self.growth_rate,
            "threshold_factor": self.threshold_factor,
            "epsilon": self.epsilon,
        }


def detect_instability(
    times, distances, epsilon: float, threshold_factor: float
) -> InstabilityReport:
    """Flag orbital-distance growth beyond threshold_factor * epsilon.

    Raising threshold_factor never flips a false verdict to true.
    """
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(distances, dtype=np.float64)
    if t.size == 0 or t.shape != v.shape:
        raise DomainError("need a nonempty series of equal-length times and distances")
    if epsilon <= 0.0 or threshold_factor <= 0.0:
        raise DomainError("epsilon and threshold_factor must be positive")

    verdict = bool(np.nanmax(v) > threshold_factor * epsilon)

    crossed = np.flatnonzero(v > 2.0 * epsilon)
    onset = float(t[crossed[0]]) if crossed.size else math.nan

    window = (v >= 2.0 * epsilon) & (v <= 50.0 * epsilon)
    if np.count_nonzero(window) >= 2:
        rate = float(np.polyfit(t[window], np.log(v[window]), 1)[0])
    else:
        rate = math.nan
    return InstabilityReport(
        verdict=verdict,
        onset_time=onset,
        growth_rate=rate,
        threshold_factor=float(threshold_factor),
        epsilon=float(epsilon),
    )


@dataclass(frozen=True)
class TrajectoryDiagnostics:
    """Sampled observables of one trajectory plus run metadata.

    deviation is NaN throughout when the diagonalizing transform is
    unavailable (linearly unstable parameters) and at samples where the
    transform failed; metadata["transform_ok"] records which.
    """

    grid: Grid
    times: np.ndarray
    mass: np.ndarray
    orbital_distance: np.ndarray
    deviation: np.ndarray
    snapshots: tuple[tuple[float, np.ndarray], ...]
    metadata: dict

    def __post_init__(self):
        for name in ("times", "mass", "orbital_distance", "deviation"):
            getattr(self, name).flags.writeable = False


class TrajectoryRecorder:
    """Observer callback accumulating diagnostics during integration.

    Samples arrive at the integrator's cadence; each records time, mass,
    orbital distance, super-action deviation (relative to the first sample),
    and a mode-magnitude snapshot when the time falls inside one of the
    snapshot windows.  Non-finite field values raise BlowUpError.  Pass the
    instance as the observer to integrate(), then call finalize().
    """

    def __init__(
        self,
        grid: Grid,
        ell: int | tuple,
        h: float,
        rho: float,
        lam: int,
        s: float,
        snapshot_windows: tuple[tuple[float, float], ...] = (),
        metadata: dict | None = None,
    ):
        self.grid = grid
        self.ell = mod_reduce(as_mode(ell, grid.d), grid)
        self.h = float(h)
        self.rho = float(rho)
        self.lam = int(lam)
        self.s = float(s)
        self.windows = tuple((float(a), float(b)) for a, b in snapshot_windows)
        self.metadata = dict(metadata or {})

        self._ctx: DiagonalizerSet | None
        try:
            self._ctx = build_diagonalizers(h, rho, lam, self.ell, grid)
            self.transform_ok = True
        except NotLinearlyStableError:
            self._ctx = None
            self.transform_ok = False

        self._sa0: SuperActionSet | None = None
        self._times: list[float] = []
        self._mass: list[float] = []
        self._orbital: list[float] = []
        self._deviation: list[float] = []
        self._snapshots: list[tuple[float, np.ndarray]] = []

    def __call__(self, n: int, u: SpectralField) -> None:
        t = n * self.h
        if not np.all(np.isfinite(u.coeffs)):
            raise BlowUpError(n, t)
        self._times.append(t)
        self._mass.append(u.mass())
        self._orbital.append(sobolev_norm(project_away(u, self.ell), self.s))
        self._deviation.append(self._deviation_of(u))
        if any(lo <= t <= hi for lo, hi in self.windows):
            self._snapshots.append((t, np.abs(u.coeffs)))

    def _deviation_of(self, u: SpectralField) -> float:
        if self._ctx is None:
            return math.nan
        try:
            sa = super_actions(u_to_xi(u, self._ctx))
        except (ZeroCarrierModeError, DomainError):
            return math.nan
        if self._sa0 is None:
            self._sa0 = sa
        return weighted_deviation(sa, self._sa0, self.s)

    def finalize(self) -> TrajectoryDiagnostics:
        meta = dict(self.metadata)
        meta.setdefault("h", self.h)
        meta.setdefault("K", self.grid.K)
        meta.setdefault("d", self.grid.d)
        meta.setdefault("ell", list(self.ell))
        meta.setdefault("lambda", self.lam)
        meta.setdefault("rho", self.rho)
        meta.setdefault("s", self.s)
        meta["transform_ok"] = self.transform_ok
        meta["snapshot_windows"] = [list(w) for w in self.windows]
        return TrajectoryDiagnostics(
            grid=self.grid,
            times=np.asarray(self._times, dtype=np.float64),
            mass=np.asarray(self._mass, dtype=np.float64),
            orbital_distance=np.asarray(self._orbital, dtype=np.float64),
            deviation=np.asarray(self._deviation, dtype=np.float64),
            snapshots=tuple(self._snapshots),
            metadata=meta,
        )


def default_snapshot_windows(horizon: float, width: float = 200.0) -> tuple:
    """Two windows of the given width at the start and end of the horizon."""
    if horizon <= 2.0 * width:
        return ((0.0, float(horizon)),)
    return ((0.0, width), (float(horizon) - width, float(horizon)))


def _mode_columns(grid: Grid) -> list[str]:
    if grid.d == 1:
        return ["j"]
    return [f"j{i + 1}" for i in range(grid.d)]


def emit(diag: TrajectoryDiagnostics, path: str, fmt: str = "csv") -> None:
    """Write <runid>_series.csv, <runid>_spectrum.csv and <runid>_meta.json.

    path is the output directory (created if missing); the run id comes from
    diag.metadata["runid"] (default "run").  Files are comma-separated with
    LF line endings; floats carry 17 significant digits so a parse recovers
    them bit-exactly.  An empty trajectory produces header-only CSVs.
    """
    if fmt != "csv":
        raise DomainError(f"unsupported emission format {fmt!r}")
    runid = str(diag.metadata.get("runid", "run"))
    os.makedirs(path, exist_ok=True)

    series_path = os.path.join(path, f"{runid}_series.csv")
    with open(series_path, "w", newline="\n") as fh:
        fh.write("t,mass,orbital_distance,D\n")
        for i in range(diag.times.size):
            fh.write(
                ",".join(
                    format_float(float(x))
                    for x in (
                        diag.times[i],
                        diag.mass[i],
                        diag.orbital_distance[i],
                        diag.deviation[i],
                    )
                )
                + "\n"
            )

    grid = diag.grid
    modes = list(grid.modes())
    spectrum_path = os.path.join(path, f"{runid}_spectrum.csv")
    with open(spectrum_path, "w", newline="\n") as fh:
        fh.write("t," + ",".join(_mode_columns(grid)) + ",abs_uj\n")
        for t, mags in diag.snapshots:
            flat = mags.reshape(-1)
            ts = format_float(float(t))
            for pos, j in enumerate(modes):
                cols = [ts] + [str(c) for c in j] + [format_float(float(flat[pos]))]
                fh.write(",".join(cols) + "\n")

    meta_path = os.path.join(path, f"{runid}_meta.json")
    with open(meta_path, "w", newline="\n") as fh:
        fh.write(dumps(diag.metadata) + "\n")
