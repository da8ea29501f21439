"""
Command line interface.

Subcommands::

    timeseries    selected GEO-LLO link, distances and SNR per time step
    snr-elements  SNR versus number of RIS elements
    misalign      SNR versus a common phase error on every element
    validate      parse a scenario file and report problems

Exit status: 0 ok, 1 usage error, 2 scenario validation error,
3 runtime/numerical error.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from .config import (ScenarioError, dumps_scenario, load_default_scenario,
                     parse_scenario)
from .geometry import DegenerateGeometryError
from .linkbudget import optimal_transmit_power, snr
from .linkselect import evaluate_arrays, selected_geometry
from .orbital import KeplerSolverError
from .ris import AREA_MODES, apply_misalignment, effective_area

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

TIMESERIES_COLUMNS = ["t_s", "geo_id", "llo_id", "visible_count", "d_er_km", "d_rm_km",
                      "phi_opt_deg", "a_eff_m2", "p_r_w", "snr_db", "feasible", "outage"]
SNR_ELEMENTS_COLUMNS = ["case", "d_er_km", "d_rm_km", "phi_opt_deg", "area_mode", "m",
                        "a_eff_m2", "p_r_w", "snr_db", "feasible"]
MISALIGN_COLUMNS = ["delta_deg", "phi_opt_deg", "a_eff_m2", "p_r_w", "snr_db", "feasible"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """12 significant digits, no thousands separators."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def parse_m_list(text: str) -> list:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"--m-list expects comma-separated integers, got {text!r}") from None
    if not values or any(m < 1 for m in values):
        raise UsageError(f"--m-list needs one or more integers >= 1, got {text!r}")
    return values


def parse_delta_grid(text: str) -> list:
    """``start:stop:step`` in degrees, stop included when it lands on the grid."""
    try:
        start, stop, step = (float(tok) for tok in text.split(":"))
    except ValueError:
        raise UsageError(f"--delta-grid expects start:stop:step in degrees, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError(f"--delta-grid needs step > 0 and stop >= start, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    grid = [start + i * step for i in range(count)]
    if grid[0] < -180.0 or grid[-1] > 180.0:
        raise UsageError(f"--delta-grid must stay within [-180, 180] degrees, got {text!r}")
    return grid


def parse_float_list(text: str, flag: str) -> list:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects comma-separated numbers, got {text!r}") from None
    if any(not v > 0 for v in values):
        raise UsageError(f"{flag} values must be > 0, got {text!r}")
    return values


# --- CSV output -----------------------------------------------------------

def write_csv(path, header, rows) -> None:
    """Write rows atomically; nothing is left behind if writing fails."""
    if path in (None, "-"):
        _write_rows(sys.stdout, header, rows)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".partial-", suffix=".csv", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            _write_rows(fh, header, rows)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_rows(fh, header, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


# --- commands ---------------------------------------------------------------

def timeseries_rows(scenario, workers=1):
    cols = evaluate_arrays(scenario, workers)
    for i in range(len(cols["times"])):
        if cols["outage"][i]:
            yield [cols["times"][i], None, None, int(cols["visible_count"][i]),
                   None, None, None, None, None, None, False, True]
            continue
        yield [cols["times"][i], int(cols["sel_geo"][i]), int(cols["sel_llo"][i]),
               int(cols["visible_count"][i]), cols["d_er"][i], cols["d_rm"][i],
               math.degrees(cols["phi"][i]), cols["a_eff"][i], cols["p_r"][i],
               cols["snr_db"][i], bool(cols["feasible"][i]), False]


def _reference_geometry(scenario, at):
    if not 0 <= at <= scenario.duration:
        raise UsageError(f"--at {at} s lies outside the scenario horizon [0, {scenario.duration}] s")
    link, geom = selected_geometry(scenario, at)
    if geom is None:
        raise RuntimeError(f"no visible GEO-LLO link at t = {at} s")
    return geom


def _optimal_budget(scenario):
    return replace(scenario.budget, transmit_power=optimal_transmit_power(scenario.budget))


def snr_elements_rows(scenario, m_list, at=0.0, area_mode=None, extra_d_rm=()):
    """Rows sorted by (case, M); case 0 is the selected link at ``at``."""
    geom = _reference_geometry(scenario, at)
    budget = _optimal_budget(scenario)
    mode = area_mode or scenario.ris.area_mode
    cases = [(geom.d_er, geom.d_rm)] + [(geom.d_er, d) for d in extra_d_rm]
    rows = []
    for case, (d_er, d_rm) in enumerate(cases):
        for m in sorted(set(m_list)):
            ris = replace(scenario.ris, num_elements=m, area_mode=mode)
            a_eff = effective_area(ris.configuration(geom.phi_opt), geom.phi_opt)
            res = snr(budget, a_eff, d_er, d_rm)
            rows.append([case, d_er, d_rm, math.degrees(geom.phi_opt), mode, m, a_eff,
                         res.received_power, res.snr_db, res.feasible])
    return rows


def misalignment_rows(scenario, deltas_deg, at=0.0, area_mode=None):
    geom = _reference_geometry(scenario, at)
    budget = _optimal_budget(scenario)
    ris = scenario.ris if area_mode is None else replace(scenario.ris, area_mode=area_mode)
    aligned = ris.configuration(geom.phi_opt)
    rows = []
    for delta in deltas_deg:
        config = apply_misalignment(aligned, math.radians(delta))
        a_eff = effective_area(config, geom.phi_opt)
        res = snr(budget, a_eff, geom.d_er, geom.d_rm)
        rows.append([delta, math.degrees(geom.phi_opt), a_eff, res.received_power,
                     res.snr_db, res.feasible])
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cislunar-ris",
                     description="Earth -> GEO-mounted RIS -> lunar orbit link simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, sweep=False):
        p.add_argument("--scenario", help="scenario file (default: bundled paper.cfg)")
        p.add_argument("--out", help="output CSV path, '-' for stdout")
        if sweep:
            p.add_argument("--at", type=float, default=0.0,
                           help="reference epoch in seconds (default 0)")
            p.add_argument("--area-mode", choices=AREA_MODES)

    p = sub.add_parser("timeseries", help="per-step selected link and SNR")
    common(p)
    p.add_argument("--area-mode", choices=AREA_MODES)
    p.add_argument("--workers", type=int, default=1,
                   help="threads for step evaluation; output does not depend on it")

    p = sub.add_parser("snr-elements", help="SNR versus number of RIS elements")
    common(p, sweep=True)
    p.add_argument("--m-list", default="1,10,100,1000,10000")
    p.add_argument("--d-rm-km", default="",
                   help="extra GEO-LLO distances (km) evaluated as further cases")

    p = sub.add_parser("misalign", help="SNR versus RIS phase misalignment")
    common(p, sweep=True)
    p.add_argument("--delta-grid", default="-180:180:1",
                   help="start:stop:step in degrees")

    p = sub.add_parser("validate", help="parse and check a scenario file")
    p.add_argument("--scenario")
    p.add_argument("--dump", action="store_true", help="print the canonical scenario text")
    return parser


def _load(args):
    if args.scenario:
        return parse_scenario(args.scenario)
    return load_default_scenario()


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = _load(args)
    except ScenarioError as exc:
        print(f"cislunar-ris: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"cislunar-ris: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    try:
        if args.command == "validate":
            if args.dump:
                sys.stdout.write(dumps_scenario(scenario))
            else:
                print(f"ok: {len(scenario.geo_elements)} GEO, {len(scenario.llo_elements)} LLO, "
                      f"{scenario.num_steps} steps")
            return EXIT_OK
        if args.area_mode:
            scenario = replace(scenario, ris=replace(scenario.ris, area_mode=args.area_mode))
        if args.command == "timeseries":
            if args.workers < 1:
                raise UsageError("--workers must be >= 1")
            out = args.out or scenario.output
            write_csv(out, TIMESERIES_COLUMNS, timeseries_rows(scenario, args.workers))
        elif args.command == "snr-elements":
            m_list = parse_m_list(args.m_list)
            extra = parse_float_list(args.d_rm_km, "--d-rm-km") if args.d_rm_km else ()
            write_csv(args.out, SNR_ELEMENTS_COLUMNS,
                      snr_elements_rows(scenario, m_list, args.at, extra_d_rm=extra))
        elif args.command == "misalign":
            grid = parse_delta_grid(args.delta_grid)
            write_csv(args.out, MISALIGN_COLUMNS, misalignment_rows(scenario, grid, args.at))
    except UsageError as exc:
        print(f"cislunar-ris: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        if isinstance(exc, DegenerateGeometryError):
            print(f"cislunar-ris: numerical error: {exc}", file=sys.stderr)
            return EXIT_RUNTIME
        print(f"cislunar-ris: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (KeplerSolverError, RuntimeError, OSError, ArithmeticError) as exc:
        print(f"cislunar-ris: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
