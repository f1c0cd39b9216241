"""Command-line harness: assumption checks, simulations, parameter sweeps,
and the three preset long-time experiments.

Subcommands: check, simulate, sweep, figures.  Configuration comes from an
optional JSON file (--config) overridden by flags; every run is fully
reproducible from config plus seed (counter-based PRNG).  Exit codes:
0 ok, 1 assumption failed, 2 config error, 3 blow-up.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from ._serialize import dumps, format_float
from .diagnostics import (
    TrajectoryRecorder,
    default_snapshot_windows,
    detect_instability,
    emit,
)
from .errors import BlowUpError, ConfigError, MassDeficitError, ObserverError, TorusNLSError
from .integrator import StepScheme, StepVariant, integrate
from .spectral import Grid, Mode, SpectralField, mod_reduce
from .stability import (
    _shifted_norm2,
    build_frequency_table,
    cfl_max_h,
    check_assumption1,
    check_assumption2,
)

__all__ = [
    "RunConfig",
    "random_initial_datum",
    "cmd_check",
    "cmd_simulate",
    "cmd_sweep",
    "cmd_figures",
    "main",
    "entrypoint",
]

_SCHEMES = tuple(v.value for v in StepVariant)

# Threshold factor for the instability verdict; matches the orbital-distance
# envelope 10*epsilon used by the stable-run criterion.
_THRESHOLD_FACTOR = 10.0

_CONFIG_KEYS = {
    "d", "K", "ell", "lambda", "rho2", "h", "scheme", "steps", "horizon",
    "s", "epsilon", "seed", "N", "c2", "delta2", "s2", "out", "cadence",
    "exhaustive",
}


@dataclass(frozen=True)
class RunConfig:
    """Fully validated experiment configuration.

    rho2 is the squared plane-wave amplitude; n_steps is resolved from the
    horizon (n_steps = round(horizon / h)) when only the horizon is given.
    s2 defaults to 5N when not set.
    """

    d: int = 1
    K: int = 16
    ell: Mode = (0,)
    lam: int = -1
    rho2: float = 0.4
    h: float = 0.04
    scheme: str = StepVariant.LIE_TROTTER.value
    n_steps: int = 250000
    s: float = 5.0
    epsilon: float = 0.01
    seed: int = 1
    N: int = 5
    c2: float = 8.0
    delta2: float = 0.1
    s2: float = 25.0
    out: str = "out"
    cadence: int | None = None
    exhaustive: bool = False

    @property
    def rho(self) -> float:
        return math.sqrt(self.rho2)

    @property
    def horizon(self) -> float:
        return self.n_steps * self.h

    def grid(self) -> Grid:
        return Grid(K=self.K, d=self.d)

    def step_scheme(self) -> StepScheme:
        return StepScheme(variant=StepVariant(self.scheme), h=self.h)

    def __post_init__(self):
        if self.d < 1 or self.K < 1:
            raise ConfigError(f"d and K must be positive, got d={self.d} K={self.K}")
        if self.lam not in (-1, 1):
            raise ConfigError(f"lambda must be +1 or -1, got {self.lam}")
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ConfigError(f"h must be positive and finite, got {self.h}")
        if self.rho2 <= 0.0:
            raise ConfigError(f"rho2 must be positive, got {self.rho2}")
        if len(self.ell) != self.d:
            raise ConfigError(f"ell {self.ell} does not have d={self.d} components")
        if self.n_steps < 0:
            raise ConfigError(f"steps must be >= 0, got {self.n_steps}")
        if self.s < 0.0:
            raise ConfigError(f"s must be nonnegative, got {self.s}")
        if self.epsilon < 0.0:
            raise ConfigError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.epsilon >= self.rho:
            raise ConfigError(
                f"epsilon = {self.epsilon} must stay below rho = {self.rho} "
                "(carrier mass budget)"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be nonnegative, got {self.seed}")
        if self.N < 1:
            raise ConfigError(f"N must be >= 1, got {self.N}")
        if self.c2 <= 0.0 or self.delta2 <= 0.0 or self.s2 <= 0.0:
            raise ConfigError("c2, delta2 and s2 must be positive")
        if self.cadence is not None and self.cadence < 1:
            raise ConfigError(f"cadence must be >= 1, got {self.cadence}")
        if self.scheme not in _SCHEMES:
            raise ConfigError(
                f"scheme must be one of {', '.join(_SCHEMES)}, got {self.scheme!r}"
            )


def _parse_ell(raw, d: int, K: int) -> Mode:
    if isinstance(raw, int):
        comps = [raw]
    elif isinstance(raw, (list, tuple)):
        comps = [int(c) for c in raw]
    elif isinstance(raw, str):
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        try:
            comps = [int(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"cannot parse ell from {raw!r}") from exc
    else:
        raise ConfigError(f"cannot parse ell from {raw!r}")
    if len(comps) == 1 and d > 1 and comps[0] == 0:
        comps = [0] * d
    if len(comps) != d:
        raise ConfigError(f"ell {comps} does not have d={d} components")
    return mod_reduce(tuple(comps), Grid(K=K, d=d))


def build_config(file_values: dict | None, overrides: dict) -> RunConfig:
    """Merge defaults, config-file values, and flag overrides into a RunConfig."""
    merged: dict = {
        "d": 1, "K": 16, "ell": "0", "lambda": -1, "rho2": 0.4, "h": 0.04,
        "scheme": StepVariant.LIE_TROTTER.value, "steps": None, "horizon": None,
        "s": 5.0, "epsilon": 0.01, "seed": 1, "N": 5, "c2": 8.0, "delta2": 0.1,
        "s2": None, "out": "out", "cadence": None, "exhaustive": False,
    }
    if file_values is not None:
        unknown = set(file_values) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})

    try:
        d = int(merged["d"])
        K = int(merged["K"])
        h = float(merged["h"])
        n = int(merged["N"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid numeric config value: {exc}") from exc
    if d < 1 or K < 1 or not (h > 0.0 and math.isfinite(h)):
        raise ConfigError(f"invalid d={d}, K={K}, or h={h}")

    steps = merged["steps"]
    horizon = merged["horizon"]
    if steps is not None and horizon is not None:
        raise ConfigError("give either steps or horizon, not both")
    if steps is None:
        horizon = 1e4 if horizon is None else float(horizon)
        steps = round(horizon / h)
    s2 = merged["s2"]
    if s2 is None:
        s2 = 5.0 * n

    try:
        return RunConfig(
            d=d,
            K=K,
            ell=_parse_ell(merged["ell"], d, K),
            lam=int(merged["lambda"]),
            rho2=float(merged["rho2"]),
            h=h,
            scheme=str(merged["scheme"]),
            n_steps=int(steps),
            s=float(merged["s"]),
            epsilon=float(merged["epsilon"]),
            seed=int(merged["seed"]),
            N=n,
            c2=float(merged["c2"]),
            delta2=float(merged["delta2"]),
            s2=float(s2),
            out=str(merged["out"]),
            cadence=None if merged["cadence"] is None else int(merged["cadence"]),
            exhaustive=bool(merged["exhaustive"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {exc}") from exc


def random_initial_datum(config: RunConfig) -> SpectralField:
    """Random field with carrier mass rho and non-carrier H^s distance epsilon.

    Draws i.i.d. complex standard normals per mode from a counter-based
    Philox stream (real/imaginary pairs in grid storage order), zeros the
    carrier slot, damps each coefficient by |j - ell|^-(s+1) (mod-reduced
    offset), rescales the non-carrier block so the recentered H^s norm is
    exactly epsilon, and sets the carrier coefficient to the positive real
    number restoring total mass rho^2.  Bit-reproducible for a given seed.
    """
    grid = config.grid()
    rng = np.random.Generator(np.random.Philox(config.seed))
    pairs = rng.standard_normal(grid.shape + (2,))
    c = pairs[..., 0] + 1j * pairs[..., 1]

    carrier = grid.index_of(config.ell)
    c[carrier] = 0.0

    if config.epsilon == 0.0:
        c[...] = 0.0
    else:
        dist2 = _shifted_norm2(config.ell, grid, -1).astype(np.float64)
        dist2[carrier] = 1.0
        c *= dist2 ** (-(config.s + 1.0) / 2.0)
        norm_s = math.sqrt(float(np.sum(dist2**config.s * np.abs(c) ** 2)))
        c *= config.epsilon / norm_s

    rad = config.rho2 - float(np.sum(np.abs(c) ** 2))
    if rad < 0.0:
        raise MassDeficitError(
            f"non-carrier mass exceeds the budget rho^2 = {config.rho2}"
        )
    c[carrier] = math.sqrt(rad)
    return SpectralField(grid, c)


def _check_payload(config: RunConfig) -> tuple[dict, bool]:
    grid = config.grid()
    # the certified step bound is only defined for order N >= 2
    cfl = cfl_max_h(config.d, config.K, config.rho, config.N) if config.N >= 2 else None
    a1 = check_assumption1(config.h, config.rho, config.lam, config.ell, grid)
    table = build_frequency_table(config.h, config.rho, config.lam, config.ell, grid)
    payload: dict = {
        "parameters": {
            "d": config.d,
            "K": config.K,
            "ell": list(config.ell),
            "lambda": config.lam,
            "rho2": config.rho2,
            "h": config.h,
            "N": config.N,
            "c2": config.c2,
            "delta2": config.delta2,
            "s2": config.s2,
        },
        "cfl_max_h": cfl,
        "cfl_satisfied": None if cfl is None else config.h <= cfl,
        "assumption1": a1.as_dict(),
        "max_growth": table.max_growth(),
    }
    if a1.holds:
        a2 = check_assumption2(
            table,
            N=config.N,
            c2=config.c2,
            delta2=config.delta2,
            s2=config.s2,
            eps_hat=0.0,
            exhaustive=config.exhaustive,
        )
        payload["assumption2"] = a2.as_dict()
        ok = a2.holds
    else:
        payload["assumption2"] = "skipped"
        ok = False
    return payload, ok


def cmd_check(config: RunConfig) -> int:
    """Run CFL, linear-stability, and non-resonance checks; print a JSON report."""
    payload, ok = _check_payload(config)
    print(dumps(payload))
    return 0 if ok else 1


def _run_id(config: RunConfig) -> str:
    return f"nls_{config.scheme}_h{config.h:g}_K{config.K}_seed{config.seed}"


def cmd_simulate(config: RunConfig, runid: str | None = None) -> int:
    """Integrate a random initial datum and emit trajectory diagnostics."""
    grid = config.grid()
    datum = random_initial_datum(config)
    recorder = TrajectoryRecorder(
        grid=grid,
        ell=config.ell,
        h=config.h,
        rho=config.rho,
        lam=config.lam,
        s=config.s,
        snapshot_windows=default_snapshot_windows(config.horizon),
        metadata={
            "runid": runid or _run_id(config),
            "scheme": config.scheme,
            "epsilon": config.epsilon,
            "seed": config.seed,
            "n_steps": config.n_steps,
            "cadence": config.cadence,
            "version": __version__,
        },
    )
    blown_up: BlowUpError | None = None
    try:
        integrate(
            datum,
            config.step_scheme(),
            config.lam,
            config.n_steps,
            observer=recorder,
            cadence=config.cadence,
        )
    except ObserverError as exc:
        if isinstance(exc.cause, BlowUpError):
            blown_up = exc.cause
        else:
            raise

    diag = recorder.finalize()
    if blown_up is not None:
        diag.metadata["blow_up_step"] = blown_up.step
        diag.metadata["blow_up_time"] = blown_up.time
    if diag.times.size and config.epsilon > 0.0:
        inst = detect_instability(
            diag.times, diag.orbital_distance, config.epsilon, _THRESHOLD_FACTOR
        )
        diag.metadata["instability"] = inst.as_dict()
    emit(diag, config.out)

    runid = diag.metadata["runid"]
    if blown_up is not None:
        print(
            f"{runid}: blow-up at step {blown_up.step} "
            f"(t = {format_float(blown_up.time)}); partial output in {config.out}"
        )
        return 3
    if diag.times.size:
        print(
            f"{runid}: {config.n_steps} steps done; "
            f"max orbital distance {format_float(float(np.max(diag.orbital_distance)))} "
            f"(epsilon = {format_float(config.epsilon)}); output in {config.out}"
        )
    else:
        print(f"{runid}: no samples recorded; output in {config.out}")
    return 0


def _parse_axis(raw, name: str) -> list[float]:
    if raw is None:
        return []
    if isinstance(raw, (int, float)):
        return [float(raw)]
    if isinstance(raw, (list, tuple)):
        return [float(v) for v in raw]
    try:
        return [float(p) for p in str(raw).split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse {name} axis from {raw!r}") from exc


def cmd_sweep(config: RunConfig, h_axis, rho2_axis) -> int:
    """Run the assumption checks over a grid of (h, rho2) points concurrently.

    Writes <out>/sweep_summary.csv with one row per grid point
    (h, rho, assumption1, c1, assumption2, max_growth); per-point failures
    are recorded in the row and the sweep continues.
    """
    hs = _parse_axis(h_axis, "h") if h_axis is not None else [config.h]
    rho2s = _parse_axis(rho2_axis, "rho2") if rho2_axis is not None else [config.rho2]
    points = [(h, r2) for h in hs for r2 in rho2s]

    def one(point: tuple[float, float]) -> dict:
        h, rho2 = point
        row = {
            "h": h,
            "rho": math.sqrt(rho2) if rho2 >= 0.0 else math.nan,
            "assumption1": "error",
            "c1": math.nan,
            "assumption2": "error",
            "max_growth": math.nan,
        }
        try:
            cfg = replace(config, h=h, rho2=rho2)
            payload, _ = _check_payload(cfg)
            row["assumption1"] = payload["assumption1"]["holds"]
            row["c1"] = payload["assumption1"]["c1_certified"]
            a2 = payload["assumption2"]
            row["assumption2"] = (
                "skipped" if a2 == "skipped" else a2["holds"]
            )
            row["max_growth"] = payload["max_growth"]
        except TorusNLSError:
            pass
        return row

    if points:
        with ThreadPoolExecutor(max_workers=min(8, len(points))) as pool:
            rows = list(pool.map(one, points))
    else:
        rows = []

    os.makedirs(config.out, exist_ok=True)
    out_path = os.path.join(config.out, "sweep_summary.csv")

    def cell(v) -> str:
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return format_float(v)
        return str(v)

    with open(out_path, "w", newline="\n") as fh:
        fh.write("h,rho,assumption1,c1,assumption2,max_growth\n")
        for row in rows:
            fh.write(
                ",".join(
                    cell(row[k])
                    for k in ("h", "rho", "assumption1", "c1", "assumption2", "max_growth")
                )
                + "\n"
            )
    print(f"sweep: {len(rows)} points -> {out_path}")
    return 0


_FIGURE_PRESETS = {
    "fig1": {"h": 0.04},
    "fig2": {"h": 0.044},
    "fig3": {"h": 0.042},
}


def cmd_figures(config: RunConfig, which: str) -> int:
    """Run one of the three preset long-time experiments (fig1/fig2/fig3)."""
    if which not in _FIGURE_PRESETS:
        raise ConfigError(f"unknown figure preset {which!r}")
    preset = _FIGURE_PRESETS[which]
    cfg = replace(config, h=preset["h"], n_steps=round(1e4 / preset["h"]))
    return cmd_simulate(cfg, runid=which)


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--h", help="time step (comma list in sweep)")
    p.add_argument("--rho2", help="squared carrier amplitude (comma list in sweep)")
    p.add_argument("--K", type=int, help="modes per axis half-width")
    p.add_argument("--d", type=int, help="spatial dimension")
    p.add_argument("--ell", help="carrier mode, comma-separated components")
    p.add_argument("--lambda", dest="lam", type=int, choices=(-1, 1),
                   help="nonlinearity sign: +1 defocusing, -1 focusing")
    p.add_argument("--scheme", choices=_SCHEMES, help="splitting variant")
    p.add_argument("--steps", type=int, help="number of time steps")
    p.add_argument("--horizon", type=float, help="final time T; steps = round(T/h)")
    p.add_argument("--s", type=float, help="Sobolev exponent")
    p.add_argument("--epsilon", type=float, help="initial orbital distance")
    p.add_argument("--seed", type=int, help="PRNG seed")
    p.add_argument("--N", type=int, help="non-resonance order bound")
    p.add_argument("--c2", type=float, help="non-resonance constant c2")
    p.add_argument("--delta2", type=float, help="small-divisor threshold delta2")
    p.add_argument("--s2", type=float, help="non-resonance exponent s2 (default 5N)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--cadence", type=int, help="observer cadence in steps")
    p.add_argument("--exhaustive", action="store_const", const=True, default=None,
                   help="keep enumerating after the first violation")


def _config_from_args(args: argparse.Namespace, sweep: bool = False) -> RunConfig:
    file_values = None
    if args.config is not None:
        try:
            with open(args.config) as fh:
                file_values = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"cannot parse config file {args.config}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object")

    overrides = {
        "K": args.K, "d": args.d, "ell": args.ell, "lambda": args.lam,
        "scheme": args.scheme, "steps": args.steps, "horizon": args.horizon,
        "s": args.s, "epsilon": args.epsilon, "seed": args.seed, "N": args.N,
        "c2": args.c2, "delta2": args.delta2, "s2": args.s2, "out": args.out,
        "cadence": args.cadence, "exhaustive": args.exhaustive,
    }
    if sweep:
        # axis flags may be comma lists; the base config keeps its defaults
        if args.h is not None and "," not in args.h and args.h.strip():
            try:
                overrides["h"] = float(args.h)
            except ValueError as exc:
                raise ConfigError(f"cannot parse --h {args.h!r}") from exc
        if args.rho2 is not None and "," not in args.rho2 and args.rho2.strip():
            try:
                overrides["rho2"] = float(args.rho2)
            except ValueError as exc:
                raise ConfigError(f"cannot parse --rho2 {args.rho2!r}") from exc
    else:
        if args.h is not None:
            try:
                overrides["h"] = float(args.h)
            except ValueError as exc:
                raise ConfigError(f"cannot parse --h {args.h!r}") from exc
        if args.rho2 is not None:
            try:
                overrides["rho2"] = float(args.rho2)
            except ValueError as exc:
                raise ConfigError(f"cannot parse --rho2 {args.rho2!r}") from exc
    return build_config(file_values, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="torusnls",
        description=(
            "Split-step Fourier simulation and plane-wave stability analysis "
            "for the cubic nonlinear Schrodinger equation on a torus."
        ),
    )
    parser.add_argument("--version", action="version", version=f"torusnls {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="run CFL, linear-stability and non-resonance checks")
    _add_common_flags(p_check)
    p_sim = sub.add_parser("simulate", help="integrate a random datum and emit diagnostics")
    _add_common_flags(p_sim)
    p_sweep = sub.add_parser("sweep", help="assumption checks over an (h, rho2) grid")
    _add_common_flags(p_sweep)
    p_fig = sub.add_parser("figures", help="preset long-time experiments")
    p_fig.add_argument("which", choices=sorted(_FIGURE_PRESETS))
    _add_common_flags(p_fig)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags, matching the config-error code
        return int(exc.code or 0)

    try:
        if args.command == "check":
            return cmd_check(_config_from_args(args))
        if args.command == "simulate":
            return cmd_simulate(_config_from_args(args))
        if args.command == "sweep":
            return cmd_sweep(_config_from_args(args, sweep=True), args.h, args.rho2)
        if args.command == "figures":
            return cmd_figures(_config_from_args(args), args.which)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
