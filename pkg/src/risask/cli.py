"""Command-line front end: analytical sweeps, Monte-Carlo sweeps, and
constellation optimization, all emitting CSV for external plotting.

Flags may also come from a plain ``key = value`` config file (``#``
comments allowed); explicit flags override file values.  Exit status is 0
on success (including flagged non-convergence), 2 on usage errors, and 1
on internal errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass

from .channel import ChannelParams, Scenario, clt_moments
from .constellation import Side, snr_inverse, snr_scale, traditional_equispaced
from .montecarlo import McConfig, simulate_sep
from .optimize import OptimizerConfig, optimize
from .sep import pep_context, sep_union_bound

SWEEP_HEADER = "snr_db,scenario,side,M,L,mode,sep_bound_raw,sep_bound,sep_mc,ci95_low,ci95_high"
OPTIMIZE_HEADER = ("snr_db,scenario,side,M,L,mode,index,amplitude,energy,gamma,"
                   "amplitude_norm,objective,kkt_residual,converged")

_SEED_STRIDE = 0x9E3779B97F4A7C15


class UsageError(Exception):
    """Invalid flag or config value; maps to exit status 2."""


@dataclass(frozen=True)
class SweepSpec:
    """One fully resolved experiment: link parameters plus the SNR grid."""

    command: str
    scenario: Scenario
    side: Side
    size: int
    num_elements: int
    k1: float
    k2: float
    sigma_h2: float
    sigma_n2: float
    sigma_hd2: float | None
    snr_db_min: float
    snr_db_max: float
    snr_db_step: float
    mode: str
    trials: int
    seed: int
    threads: int | None
    out: str

    def snr_db_points(self) -> list[float]:
        n = int(math.floor((self.snr_db_max - self.snr_db_min) / self.snr_db_step + 1e-9)) + 1
        return [self.snr_db_min + i * self.snr_db_step for i in range(n)]

    def channel_params(self) -> ChannelParams:
        return ChannelParams.from_rician(
            self.num_elements, self.k1, self.k2, self.sigma_h2, self.sigma_n2,
            self.sigma_hd2,
        )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risask",
        description="SEP analysis and ASK design for RIS-assisted noncoherent links",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "bound": "closed-form union-bound sweep",
        "simulate": "Monte-Carlo sweep with the bound columns for comparison",
        "optimize": "per-SNR-point SEP-optimal constellations",
    }
    for name, help_text in descriptions.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="key = value file supplying flag defaults")
        sp.add_argument("--scenario", choices=["blocked", "unblocked"])
        sp.add_argument("--side", choices=["one", "two"])
        sp.add_argument("--M", type=int, dest="size", help="number of symbols")
        sp.add_argument("--L", type=int, dest="num_elements", help="RIS elements")
        sp.add_argument("--K1", type=float, dest="k1", help="Rician factor, hop 1")
        sp.add_argument("--K2", type=float, dest="k2", help="Rician factor, hop 2")
        sp.add_argument("--sigma-h2", type=float, dest="sigma_h2")
        sp.add_argument("--sigma-n2", type=float, dest="sigma_n2")
        sp.add_argument("--sigma-hd2", type=float, dest="sigma_hd2",
                        help="direct-path variance (default: sigma_h2 squared)")
        sp.add_argument("--snr-db-min", type=float, dest="snr_db_min")
        sp.add_argument("--snr-db-max", type=float, dest="snr_db_max")
        sp.add_argument("--snr-db-step", type=float, dest="snr_db_step")
        sp.add_argument("--mode", choices=["traditional", "optimal"])
        sp.add_argument("--trials", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out", help="output CSV path, or - for stdout")
    return parser


def _read_config(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise UsageError(f"{path}:{lineno}: expected 'key = value'")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    return values


_FIELDS = {
    # name -> (parser, default)
    "scenario": (str, "blocked"),
    "side": (str, "one"),
    "size": (int, 4),
    "num_elements": (int, 32),
    "k1": (float, 0.0),
    "k2": (float, 0.0),
    "sigma_h2": (float, 1.0),
    "sigma_n2": (float, 1.0),
    "sigma_hd2": (float, None),
    "snr_db_min": (float, 0.0),
    "snr_db_max": (float, 30.0),
    "snr_db_step": (float, 1.0),
    "mode": (str, "traditional"),
    "trials": (int, 100000),
    "seed": (int, 1),
    "threads": (int, None),
    "out": (str, "-"),
}

_CONFIG_ALIASES = {"m": "size", "l": "num_elements"}


def _resolve(args: argparse.Namespace) -> SweepSpec:
    config = _read_config(args.config) if args.config else {}
    unknown = set()
    values = {}
    for key, raw in config.items():
        key = _CONFIG_ALIASES.get(key.lower(), key)
        if key not in _FIELDS:
            unknown.add(key)
            continue
        values[key] = raw
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    resolved = {}
    for name, (parse, default) in _FIELDS.items():
        cli_value = getattr(args, name, None)
        if cli_value is not None:
            resolved[name] = cli_value
        elif name in values:
            try:
                resolved[name] = parse(values[name])
            except ValueError as exc:
                raise UsageError(f"config value for {name}: {exc}") from exc
        else:
            resolved[name] = default

    if resolved["scenario"] not in ("blocked", "unblocked"):
        raise UsageError("scenario must be blocked or unblocked")
    if resolved["side"] not in ("one", "two"):
        raise UsageError("side must be one or two")
    if resolved["mode"] not in ("traditional", "optimal"):
        raise UsageError("mode must be traditional or optimal")
    if args.command == "optimize" and getattr(args, "mode", None) is None and "mode" not in values:
        resolved["mode"] = "optimal"
    if resolved["size"] < 2:
        raise UsageError("M must be at least 2")
    if resolved["side"] == "two" and resolved["size"] % 2:
        raise UsageError("two-sided constellations need an even M")
    if resolved["num_elements"] < 2:
        raise UsageError("L must be at least 2")
    if resolved["k1"] < 0 or resolved["k2"] < 0:
        raise UsageError("Rician factors must be nonnegative")
    if resolved["sigma_h2"] <= 0 or resolved["sigma_n2"] <= 0:
        raise UsageError("sigma-h2 and sigma-n2 must be positive")
    if resolved["sigma_hd2"] is not None and resolved["sigma_hd2"] < 0:
        raise UsageError("sigma-hd2 must be nonnegative")
    if resolved["snr_db_step"] <= 0:
        raise UsageError("snr-db-step must be positive")
    if resolved["snr_db_min"] > resolved["snr_db_max"]:
        raise UsageError("snr-db-min must not exceed snr-db-max")
    if resolved["trials"] < 1:
        raise UsageError("trials must be at least 1")

    return SweepSpec(
        command=args.command,
        scenario=Scenario(resolved["scenario"]),
        side=Side(resolved["side"]),
        size=resolved["size"],
        num_elements=resolved["num_elements"],
        k1=resolved["k1"],
        k2=resolved["k2"],
        sigma_h2=resolved["sigma_h2"],
        sigma_n2=resolved["sigma_n2"],
        sigma_hd2=resolved["sigma_hd2"],
        snr_db_min=resolved["snr_db_min"],
        snr_db_max=resolved["snr_db_max"],
        snr_db_step=resolved["snr_db_step"],
        mode=resolved["mode"],
        trials=resolved["trials"],
        seed=resolved["seed"],
        threads=resolved["threads"],
        out=resolved["out"],
    )


def _fmt(x) -> str:
    return repr(float(x))


def _point_constellation(spec: SweepSpec, gamma_av, params, moments):
    """(constellation, optimizer result or None) at one sweep point."""
    scale = snr_scale(moments, params, spec.scenario)
    if spec.mode == "traditional":
        return traditional_equispaced(spec.side, spec.size, gamma_av / scale), None
    if spec.scenario is Scenario.UNBLOCKED:
        rho = params.sigma_hd2 / (params.sigma_h2 * params.sigma_h2)
    else:
        rho = None
    result = optimize(spec.side, spec.scenario, spec.size, gamma_av, moments,
                      OptimizerConfig(), rho=rho)
    return snr_inverse(result.alloc, moments, params), result


def _sweep_rows(spec: SweepSpec, with_mc: bool) -> list[str]:
    params = spec.channel_params()
    moments = clt_moments(params)
    rows = []
    for i, db in enumerate(spec.snr_db_points()):
        gamma_av = 10.0 ** (db / 10.0)
        c, _ = _point_constellation(spec, gamma_av, params, moments)
        report = sep_union_bound(pep_context(c, moments, params, spec.scenario))
        if with_mc:
            seed = (spec.seed + _SEED_STRIDE * (i + 1)) % (1 << 64)
            est = simulate_sep(c, params, spec.scenario,
                               McConfig(trials=spec.trials, seed=seed,
                                        threads=spec.threads))
            mc = f"{_fmt(est.sep)},{_fmt(est.ci95_low)},{_fmt(est.ci95_high)}"
        else:
            mc = ",,"
        rows.append(
            f"{_fmt(db)},{spec.scenario.value},{spec.side.value},{spec.size},"
            f"{spec.num_elements},{spec.mode},{_fmt(report.sep_upper)},"
            f"{_fmt(report.sep_display)},{mc}"
        )
    return rows


def _optimize_rows(spec: SweepSpec) -> list[str]:
    params = spec.channel_params()
    moments = clt_moments(params)
    rows = []
    for db in spec.snr_db_points():
        gamma_av = 10.0 ** (db / 10.0)
        c, result = _point_constellation(spec, gamma_av, params, moments)
        if result is None:
            report = sep_union_bound(pep_context(c, moments, params, spec.scenario))
            objective, kkt, conv = _fmt(report.sep_upper), "", ""
        else:
            objective = _fmt(result.objective)
            kkt = _fmt(result.kkt_residual)
            conv = "true" if result.converged else "false"
        amps = c.amplitudes
        energies = c.symbol_energies
        scale = snr_scale(moments, params, spec.scenario)
        for idx in range(c.size):
            gamma = scale * energies[idx]
            norm = math.copysign(math.sqrt(gamma / gamma_av), amps[idx])
            rows.append(
                f"{_fmt(db)},{spec.scenario.value},{spec.side.value},{spec.size},"
                f"{spec.num_elements},{spec.mode},{idx + 1},{_fmt(amps[idx])},"
                f"{_fmt(energies[idx])},{_fmt(gamma)},{_fmt(norm)},"
                f"{objective},{kkt},{conv}"
            )
    return rows


def _emit(out: str, header: str, rows: list[str]) -> None:
    text = header + "\n" + "".join(row + "\n" for row in rows)
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def run(spec: SweepSpec) -> None:
    if spec.command == "bound":
        _emit(spec.out, SWEEP_HEADER, _sweep_rows(spec, with_mc=False))
    elif spec.command == "simulate":
        _emit(spec.out, SWEEP_HEADER, _sweep_rows(spec, with_mc=True))
    elif spec.command == "optimize":
        _emit(spec.out, OPTIMIZE_HEADER, _optimize_rows(spec))
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown command {spec.command}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = _resolve(args)
        run(spec)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
