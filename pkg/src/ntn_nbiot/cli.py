"""Command-line front end.

Every subcommand computes all of its series in memory first and only then
writes them, one CSV per series plus ``manifest.json``. A failing run
therefore leaves no partial output behind.

Exit codes: 0 success, 2 configuration error, 3 infeasible scenario,
4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .access import (
    RachLimits,
    coverage_plan,
    periodic_passes,
    precompensation_schedule,
    required_update_period,
    residual_error_check,
    scheduling_offset,
)
from .config import ConfigError, ScenarioConfig, apply_settings, load_config, with_pathloss
from .doppler import DegenerateProfileError, delay_profile, doppler_profile
from .fading import MODELS, draw_ensemble, estimated_k_factor, tap_power_db
from .link_budget import BANDWIDTHS, link_budget_profile, satellite_antenna_gain
from .orbit import (
    EmptyPassError,
    PassGeometry,
    elevation_deg,
    nadir_angle_deg,
    orbital_period,
    pass_geometry,
)
from .phy import (
    ChannelModel,
    Direction,
    PerformanceTables,
    TableError,
    effective_capacity,
    load_tables,
    phy_rate_profile,
    rap_repetitions,
    sync_windows,
)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO = 0, 2, 3, 4


class Table:
    """One output series: header names (with unit suffixes) and rows."""

    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[list] = []

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError("row width does not match header")
        self.rows.append(list(values))

    def extend_columns(self, *arrays) -> None:
        for values in zip(*arrays):
            self.add(*values)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return "%.9g" % (v + 0.0)  # + 0.0 drops negative zero
    return str(value)


def _tag(alpha: float) -> str:
    return f"a{alpha:g}"


class Run:
    def __init__(self, config: ScenarioConfig, tables: PerformanceTables):
        self.config = config
        self.tables = tables
        self.outputs: dict[str, Table] = {}
        self._geometry: dict[float, PassGeometry] = {}

    def geometry(self, alpha: float) -> PassGeometry:
        if alpha not in self._geometry:
            scenario = next(s for s in self.config.scenarios() if s.alpha_max == alpha)
            self._geometry[alpha] = pass_geometry(scenario)
        return self._geometry[alpha]

    def emit(self, name: str, table: Table) -> None:
        self.outputs[name] = table

    # -- subcommands --------------------------------------------------------

    def geometry_cmd(self) -> None:
        for a in self.config.alpha_max:
            g = self.geometry(a)
            tab = Table(["t_s", "gamma_rad", "alpha_deg", "beta_deg", "d_m"])
            tab.extend_columns(g.t, g.gamma, g.alpha, g.beta, g.d)
            self.emit(f"geometry_{_tag(a)}.csv", tab)

    def doppler_cmd(self) -> None:
        for a in self.config.alpha_max:
            p = doppler_profile(self.geometry(a))
            tab = Table(["t_s", "f_offset_hz", "f_rate_hz_per_s"])
            tab.extend_columns(p.t, p.f_offset, p.f_rate)
            self.emit(f"doppler_{_tag(a)}.csv", tab)

    def delay_cmd(self) -> None:
        for a in self.config.alpha_max:
            g = self.geometry(a)
            p = delay_profile(g)
            t_k = [scheduling_offset(d, g.scenario.earth.c) for d in g.d]
            tab = Table(["t_s", "tau_ms", "tau_rate_us_per_s", "t_k_ms"])
            tab.extend_columns(p.t, p.tau * 1e3, p.tau_rate * 1e6, t_k)
            self.emit(f"delay_{_tag(a)}.csv", tab)

    def antenna_map_cmd(self) -> None:
        cfg = self.config
        r_e = cfg.earth.r_e
        rho = r_e / cfg.orbit.radius(cfg.earth)
        n = int(math.floor(cfg.map_extent_km / cfg.map_step_km + 1e-9))
        axis = np.arange(-n, n + 1) * cfg.map_step_km
        tab = Table(["x_km", "y_km", "gamma_rad", "alpha_deg", "beta_deg", "gain_db"])
        for x in axis:
            for y in axis:
                gamma = math.acos(math.cos(x * 1e3 / r_e) * math.cos(y * 1e3 / r_e))
                alpha = elevation_deg(gamma, rho)
                if alpha < 0:
                    continue
                beta = nadir_angle_deg(alpha, rho)
                tab.add(float(x), float(y), gamma, alpha, beta, satellite_antenna_gain(beta, cfg.antenna))
        self.emit("antenna_map.csv", tab)

    def link_budget_cmd(self) -> None:
        for a in self.config.alpha_max:
            g = self.geometry(a)
            lb = link_budget_profile(g, self.config.link, self.config.antenna)
            cols = ["t_s", "d_m", "beta_deg", "path_loss_db", "sat_gain_db", "snr_dl_db"]
            cols += [f"snr_ul_{bw}_db" for bw in BANDWIDTHS]
            cols += ["ul3750_minus_dl_db"]
            tab = Table(cols)
            tab.extend_columns(
                lb.t, g.d, g.beta, lb.path_loss, lb.antenna_gain, lb.snr_dl,
                *(lb.snr_ul[bw] for bw in BANDWIDTHS),
                lb.snr_ul[3_750] - lb.snr_dl,
            )
            self.emit(f"link_budget_{_tag(a)}.csv", tab)

    def phy_rate_cmd(self) -> None:
        for a in self.config.alpha_max:
            lb = link_budget_profile(self.geometry(a), self.config.link, self.config.antenna)
            rp = phy_rate_profile(lb, self.config.payload_bits, self.tables.mcs)
            eff = effective_capacity(Direction.DL, rp.rate, self.tables.overhead)
            tab = Table(["t_s", "snr_dl_db", "i_tbs_idx", "repetitions_count", "rate_bps", "rate_after_overhead_bps"])
            tab.extend_columns(rp.t, lb.snr_dl, rp.i_tbs, rp.repetitions, rp.rate, eff)
            self.emit(f"phy_rate_{_tag(a)}.csv", tab)

    def sync_windows_cmd(self) -> None:
        cfg = self.config
        tab = Table(["alpha_max_deg", "model_label", "mib_flag", "start_s", "end_s", "duration_s"])
        for a in cfg.alpha_max:
            lb = link_budget_profile(self.geometry(a), cfg.link, cfg.antenna)
            for model in (ChannelModel.LOS, ChannelModel.NCU, ChannelModel.NDH):
                curves = [None] if self.tables.mib is None else [None, self.tables.mib]
                for mib in curves:
                    for start, end in sync_windows(lb, self.tables.cell_search, model, mib, cfg.doppler_case):
                        tab.add(a, model.value, mib is not None, start, end, end - start)
        self.emit("sync_windows.csv", tab)

    def rach_cmd(self) -> None:
        cfg = self.config
        limits = Table(["format_idx", "ta_max_us", "freq_tolerance_hz"])
        for fmt in (0, 1):
            lim = RachLimits(fmt)
            limits.add(fmt, lim.ta_max * 1e6, lim.freq_tolerance)
        self.emit("rach_limits.csv", limits)
        models = (ChannelModel.AWGN, ChannelModel.NCU, ChannelModel.NDH)
        for a in cfg.alpha_max:
            lb = link_budget_profile(self.geometry(a), cfg.link, cfg.antenna)
            cols = ["t_s", "snr_ul_3750_db"]
            for m in models:
                cols += [f"reps_{m.value}_count", f"failure_{m.value}_pct"]
            tab = Table(cols)
            for t, snr in zip(lb.t, lb.snr_ul[3_750]):
                row = [t, snr]
                for m in models:
                    req = rap_repetitions(float(snr), m, self.tables.rap)
                    row += [math.nan, math.nan] if req is None else [req.repetitions, req.failure_pct]
                tab.add(*row)
            self.emit(f"rach_{_tag(a)}.csv", tab)

    def compensation_cmd(self) -> None:
        cfg = self.config
        limits = RachLimits(cfg.rach_format)
        summary = Table([
            "alpha_max_deg", "update_period_s", "max_freq_residual_hz", "max_time_residual_us",
            "compliant_flag", "required_period_freq_s", "required_period_time_s",
            "peak_f_rate_hz_per_s", "peak_tau_rate_us_per_s", "max_t_k_ms",
        ])
        for a in cfg.alpha_max:
            g = self.geometry(a)
            dop, dly = doppler_profile(g), delay_profile(g)
            sched = precompensation_schedule(dop, dly, cfg.update_period, cfg.timing)
            tab = Table(["t_s", "freq_advance_hz", "time_advance_us"])
            for c in sched:
                tab.add(c.t, c.freq_advance, c.time_advance * 1e6)
            self.emit(f"compensation_{_tag(a)}.csv", tab)
            rep = residual_error_check(sched, dop, dly, limits)
            req = required_update_period(dop, dly, limits, cfg.timing)
            summary.add(
                a, cfg.update_period, rep.max_freq_residual, rep.max_time_residual * 1e6,
                rep.compliant, req.freq, req.time, dop.peak_rate, dly.peak_rate * 1e6,
                scheduling_offset(float(g.d.max()), g.scenario.earth.c),
            )
        self.emit("compensation_summary.csv", summary)

    def coverage_cmd(self) -> None:
        cfg = self.config
        revisit = orbital_period(cfg.orbit, cfg.earth)
        summary = Table(["alpha_max_deg", "passes_count", "pass_duration_s", "revisit_s", "max_gap_s", "duty_cycle_ratio"])
        for a in cfg.alpha_max:
            g = self.geometry(a)
            start, end = float(g.t[0]), float(g.t[-1])
            if end <= start:
                raise DegenerateProfileError(f"pass at alpha_max={a} has no duration")
            passes = periodic_passes(start, end, revisit, cfg.coverage_passes)
            plan = coverage_plan(passes, (start, start + cfg.coverage_passes * revisit))
            tab = Table(["start_s", "end_s", "duration_s", "mode_label"])
            for s in plan.segments:
                tab.add(s.start, s.end, s.duration, s.mode.value)
            self.emit(f"coverage_{_tag(a)}.csv", tab)
            summary.add(a, len(passes), end - start, revisit, plan.max_gap, plan.duty_cycle)
        self.emit("coverage_summary.csv", summary)

    def fading_stats_cmd(self) -> None:
        cfg = self.config
        tab = Table([
            "model_label", "tap_idx", "delay_ns", "table_gain_db", "mean_power_db",
            "k_estimate_ratio", "k_stderr_ratio", "realizations_count",
        ])
        for name, factory in MODELS.items():
            spec = factory(cfg.fading_k_factor, cfg.fading_k_in_db)
            ens = draw_ensemble(spec, cfg.fading_realizations, cfg.seed)
            power = tap_power_db(ens)
            try:
                est = estimated_k_factor(ens[:, 0])
                k, k_err = est.k, est.stderr
            except ValueError:
                k = k_err = math.nan
            for i, (delay, gain) in enumerate(zip(spec.tap_delays, spec.tap_gains)):
                tab.add(
                    name, i, delay, gain, power[i],
                    k if i == 0 else math.nan, k_err if i == 0 else math.nan,
                    cfg.fading_realizations,
                )
        self.emit("fading_stats.csv", tab)

    def tables_cmd(self) -> None:
        t = self.tables
        mcs = Table(["i_tbs_idx", "tbs_bits", "repetitions_count", "required_snr_db"])
        for i, tbs in enumerate(t.mcs.tbs_bits):
            for j, r in enumerate(t.mcs.repetitions):
                mcs.add(i, tbs, r, t.mcs.snr_db[i, j])
        self.emit("table_mcs.csv", mcs)
        cs = Table(["model_label", "snr_db", "doppler_case_label", "frames_count"])
        for (m, s, c), n in sorted(t.cell_search.frames.items(), key=lambda kv: (kv[0][0].value, kv[0][1], kv[0][2].value)):
            cs.add(m.value, s, c.value, n)
        self.emit("table_cell_search.csv", cs)
        rap = Table(["snr_db", "model_label", "repetitions_count", "failure_pct"])
        for (s, m), req in sorted(t.rap.entries.items(), key=lambda kv: (kv[0][1].value, kv[0][0])):
            rap.add(s, m.value, req.repetitions, req.failure_pct)
        self.emit("table_rap.csv", rap)
        ovh = Table(["direction_label", "component_label", "overhead_pct"])
        for direction, parts, total in (("DL", t.overhead.dl, t.overhead.dl_total), ("UL", t.overhead.ul, t.overhead.ul_total)):
            for name, pct in parts.items():
                ovh.add(direction, name, pct)
            ovh.add(direction, "Total", total)
        self.emit("table_overhead.csv", ovh)


SUBCOMMANDS: dict[str, Callable[[Run], None]] = {
    "geometry": Run.geometry_cmd,
    "doppler": Run.doppler_cmd,
    "delay": Run.delay_cmd,
    "antenna-map": Run.antenna_map_cmd,
    "link-budget": Run.link_budget_cmd,
    "phy-rate": Run.phy_rate_cmd,
    "sync-windows": Run.sync_windows_cmd,
    "rach": Run.rach_cmd,
    "compensation": Run.compensation_cmd,
    "coverage": Run.coverage_cmd,
    "fading-stats": Run.fading_stats_cmd,
}


def _report(run: Run) -> None:
    for fn in SUBCOMMANDS.values():
        fn(run)
    run.tables_cmd()


def write_outputs(out_dir: str, run: Run, command: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name in sorted(run.outputs):
        tab = run.outputs[name]
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            fh.write(",".join(tab.columns) + "\n")
            for row in tab.rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        written.append(name)
    manifest = {
        "tool": "ntn_nbiot",
        "version": __version__,
        "command": command,
        "seed": run.config.seed,
        "config": run.config.flat(),
        "files": written,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return written


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ntn-nbiot",
        description="Link-level NB-IoT over LEO: geometry, Doppler, delay, link budget and access outputs.",
    )
    parser.add_argument("command", choices=[*SUBCOMMANDS, "report"])
    parser.add_argument("--config", help="flat key = value scenario file")
    parser.add_argument("--out", help="output directory (default: run.out or ./out)")
    parser.add_argument("--seed", type=int, help="RNG seed for fading statistics")
    parser.add_argument("--alpha-max", help="comma-separated peak elevations in degrees")
    parser.add_argument("--pathloss", choices=["free_space", "paper_exponent"])
    parser.add_argument("--tables", help="directory with CSV table overrides")
    return parser


def _resolve_config(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if args.alpha_max is not None:
        overrides["pass.alpha_max"] = args.alpha_max
    if args.seed is not None:
        overrides["run.seed"] = str(args.seed)
    if args.out is not None:
        overrides["run.out"] = args.out
    if args.tables is not None:
        overrides["tables.dir"] = args.tables
    if overrides:
        config = apply_settings(config, overrides, "command line")
    if args.pathloss is not None:
        config = with_pathloss(config, args.pathloss)
    return config


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _resolve_config(args)
        scenarios = config.scenarios()
        tables = load_tables(config.tables_dir)
    except (ConfigError, TableError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for s in scenarios:
        if s.alpha_max < s.alpha_min:
            print(
                f"infeasible scenario: alpha_max={s.alpha_max} is below alpha_min={s.alpha_min}",
                file=sys.stderr,
            )
            return EXIT_INFEASIBLE

    run = Run(config, tables)
    try:
        if args.command == "report":
            _report(run)
        else:
            SUBCOMMANDS[args.command](run)
    except (EmptyPassError, DegenerateProfileError) as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE

    try:
        written = write_outputs(config.out, run, args.command)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"wrote {len(written)} files to {config.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
