#!/usr/bin/env python3
"""
crossover-optim: evaluate, compare, sweep and search crossover designs for
two-response trials under proportional and Markov-type error covariance.

Commands:
    eval      one design under one scenario (JSON)
    compare   several designs under one scenario (JSON)
    sweep     RD / efficiency over (case, r, rho) grids (CSV + aggregate CSV)
    search    exhaustive or sampled search of binary p = t designs (JSON)
    fixtures  write the named fixture designs as design files
"""

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from crossover_optim import config as cfg
from crossover_optim.covmodels import (Kernel, MarkovScenario, ProportionalScenario, case_scenario,
                                       load_scenario)
from crossover_optim.designs import classify, fixture_designs, format_design, load_design, save_design
from crossover_optim.efficiency import kernel_family, rd_terms, sweep, univariate_upper_bound
from crossover_optim.errors import CrossoverError, InvalidInputError
from crossover_optim.infomat import info_markov, info_proportional
from crossover_optim.matlib import Tolerance
from crossover_optim.search import enumerate_binary, rank_by_trace, sample_binary
from logger import create_logger

COMMANDS = ("eval", "compare", "sweep", "search", "fixtures")
SWEEP_HEADER = ["structure", "case", "design", "t", "n", "p", "r", "rho", "sigma11", "sigma22",
                "trace", "upper_bound", "rd"]
AGG_HEADER = ["design", "case", "r", "min_rd", "max_rd"]
PROPORTIONAL_KERNELS = ["Mat05", "Mat15", "MatInf"]
SAMPLE_FROM_CONFIG = object()  # non-str sentinel: argparse would pass a str const through type=int

# treatment shades for the preview grid
SHADES = [235, 190, 145, 100, 60, 30]


# --- FORMATTING ---

def fmt(value):
    """12 significant digits, '.' decimal; None becomes an empty cell."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return f"{float(value):.12g}"


def write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path


def emit_json(payload, out, logger):
    text = json.dumps(payload, indent=2) + "\n"
    if out:
        path = write_text(out, text)
        logger.save_output_copy(path)
        print(f"Wrote {path}")
    else:
        sys.stdout.write(text)


# --- DESIGN PREVIEW ---

def render_design_image(design, cell=28, margin=24):
    """Grayscale grid: rows are periods, columns are subjects, cells hold 1-based labels."""
    width = margin + design.n * cell + 4
    height = margin + design.p * cell + 4
    image = Image.new('L', (width, height), 255)
    draw = ImageDraw.Draw(image)
    font = ImageFont.load_default()

    for j in range(design.n):
        draw.text((margin + j * cell + cell // 3, 4), str(j + 1), fill=0, font=font)
    for i in range(design.p):
        draw.text((4, margin + i * cell + cell // 3), str(i + 1), fill=0, font=font)
        for j in range(design.n):
            label = int(design.assignment[i, j])
            x0 = margin + j * cell
            y0 = margin + i * cell
            shade = SHADES[label % len(SHADES)]
            draw.rectangle([x0, y0, x0 + cell - 1, y0 + cell - 1], fill=shade, outline=0)
            draw.text((x0 + cell // 3, y0 + cell // 3), str(label + 1), fill=0 if shade > 120 else 255, font=font)
    return image


# --- INPUT RESOLUTION ---

def build_parser():
    parser = argparse.ArgumentParser(
        description='Evaluate and search crossover designs for two-response trials',
        epilog=f'Configuration is read from {cfg.CONFIG_FILE} when present'
    )
    parser.add_argument('command', choices=COMMANDS, help='What to run')
    parser.add_argument('-d', '--design', action='append', default=[],
                        help='Design file (repeatable)')
    parser.add_argument('-s', '--scenario', type=str,
                        help='Scenario JSON file')
    parser.add_argument('-c', '--case', action='append', default=[],
                        help='Markov case 1-7 (repeatable for sweep)')
    parser.add_argument('--r', type=float,
                        help='Kernel correlation between consecutive periods')
    parser.add_argument('--rho', type=float,
                        help='Same-period cross-correlation for --case')
    parser.add_argument('--sigma11', type=float, default=1.0,
                        help='Variance of response 1 for --case (default: 1)')
    parser.add_argument('--sigma22', type=float, default=1.0,
                        help='Variance of response 2 for --case (default: 1)')
    parser.add_argument('-k', '--kernel', action='append', default=[],
                        help='Kernel family Mat05/Mat15/MatInf: a one-response proportional scenario '
                             '(eval/compare/search) or the proportional sweep cases')
    parser.add_argument('--structure', choices=('markov', 'proportional'), default='markov',
                        help='Sweep structure (default: markov)')
    parser.add_argument('--r-grid', type=str,
                        help='r grid a:b:step (default from config)')
    parser.add_argument('--rho-grid', type=str,
                        help='rho magnitudes a:b:step, used with both signs (default from config)')
    parser.add_argument('-o', '--out', type=str,
                        help='Output file (directory for fixtures)')
    parser.add_argument('--seed', type=int, default=0,
                        help='Seed for sampled search (default: 0)')
    parser.add_argument('--sample', type=int, nargs='?', const=SAMPLE_FROM_CONFIG,
                        help='Sample this many designs instead of enumerating (no value: sample_count from config)')
    parser.add_argument('-f', '--fixtures', choices=('p3', 'p4', 'gene'),
                        help='Use a named fixture design set')
    parser.add_argument('--tol', type=float,
                        help='Relative equality tolerance (eq_tol)')
    parser.add_argument('--t', type=int, help='Treatments for search')
    parser.add_argument('--n', type=int, help='Subjects for search')
    parser.add_argument('--log-dir', type=str,
                        help='Base log directory (default from config)')
    parser.add_argument('--config', type=str,
                        help=f'Configuration file (default: {cfg.CONFIG_FILE})')
    return parser


def resolve_tolerance(args, config):
    tol = cfg.get_tolerance(config)
    if args.tol is not None:
        tol = Tolerance(rank_tol=tol.rank_tol, eq_tol=args.tol)
    return tol


def resolve_scenario(args):
    if args.scenario:
        return load_scenario(args.scenario)
    if args.case:
        if len(args.case) != 1:
            raise InvalidInputError("exactly one --case is needed to build a scenario")
        if args.r is None or args.rho is None:
            raise InvalidInputError("--case needs --r and --rho")
        return case_scenario(int(args.case[0]), args.r, args.rho, args.sigma11, args.sigma22)
    if args.kernel:
        if len(args.kernel) != 1:
            raise InvalidInputError("exactly one --kernel is needed to build a scenario")
        if args.r is None:
            raise InvalidInputError("--kernel needs --r")
        return ProportionalScenario(np.eye(1), Kernel(args.kernel[0], args.r))
    raise InvalidInputError("no scenario: give --scenario, --case with --r/--rho, or --kernel with --r")


def resolve_designs(args):
    """(id, Design) pairs from --fixtures then --design, in command-line order."""
    designs = []
    if args.fixtures:
        designs.extend(fixture_designs(args.fixtures).items())
    for path in args.design:
        d = load_design(path)
        designs.append((d.label(), d))
    return designs


def parse_case(value):
    try:
        case = int(value)
    except (TypeError, ValueError):
        raise InvalidInputError(f"case must be an integer 1-7, got {value!r}") from None
    if case < 1 or case > 7:
        raise InvalidInputError(f"case must be an integer 1-7, got {case}")
    return case


# --- EVALUATION ---

def evaluate(d, scenario, tol):
    """Trace, bound and RD for one design; u and RD only for binary designs with p = t >= 3."""
    flags = classify(d)
    in_class = flags.binary and d.p == d.t and d.t >= 3
    result = {"design": d.label(), "t": d.t, "n": d.n, "p": d.p}
    if isinstance(scenario, MarkovScenario):
        info = info_markov(d, scenario, tol=tol)
        trace = info.trace
        u = rd = None
        if in_class:
            trace, u, rd = rd_terms(d, scenario, tol)
    else:
        info = info_proportional(d, scenario, tol=tol)
        trace = info.trace
        u = rd = None
        if in_class:
            gamma_trace = float(np.trace(scenario.gamma_inverse(tol)))
            u = gamma_trace * univariate_upper_bound(scenario.v(d.p), d.n, d.p, tol)
            rd = 1.0 - trace / u
            if -tol.eq_tol <= rd < 0.0:
                rd = 0.0
    result.update({
        "structure": info.structure,
        "trace": trace,
        "u": u,
        "rd": rd,
        "complete_symmetric": info.is_completely_symmetric(tol),
        "flags": flags.to_dict(),
    })
    if not isinstance(scenario, MarkovScenario) and u is not None:
        result["efficiency"] = trace / u
    return result, flags


def cmd_eval(args, config, tol, logger, profile):
    designs = resolve_designs(args)
    if len(designs) != 1:
        raise InvalidInputError(f"eval needs exactly one design, got {len(designs)}")
    _, d = designs[0]
    scenario = resolve_scenario(args)
    logger.log_scenario(scenario)

    _t0 = time.perf_counter()
    result, flags = evaluate(d, scenario, tol)
    profile['evaluation'] = time.perf_counter() - _t0
    logger.log_design(d, flags)
    result["scenario"] = scenario.describe()

    _t0 = time.perf_counter()
    logger.save_design_preview(render_design_image(d), f"{d.label()}_preview.png")
    profile['preview_save'] = time.perf_counter() - _t0

    emit_json(result, args.out, logger)
    logger.log_success("Design evaluated", f"{d.label()}: trace={fmt(result['trace'])} rd={fmt(result['rd'])}")
    return 0


def cmd_compare(args, config, tol, logger, profile):
    designs = resolve_designs(args)
    if not designs:
        raise InvalidInputError("compare needs at least one design")
    scenario = resolve_scenario(args)
    logger.log_scenario(scenario)

    _t0 = time.perf_counter()
    rows = []
    for design_id, d in designs:
        result, flags = evaluate(d, scenario, tol)
        result["design"] = design_id
        logger.log_design(d, flags)
        rows.append(result)
    profile['evaluation'] = time.perf_counter() - _t0

    emit_json({"scenario": scenario.describe(), "designs": rows}, args.out, logger)
    logger.log_success("Designs compared", f"{len(rows)} design(s)")
    return 0


def write_sweep(result, out):
    """Cell CSV at `out`, aggregates at '<stem>_agg.csv' beside it."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for row in result.rows:
            trace = f"ERR:{row.error}" if row.error else fmt(row.trace)
            writer.writerow([row.structure, row.case, row.design, row.t, row.n, row.p,
                             fmt(row.r), fmt(row.rho), fmt(row.sigma11), fmt(row.sigma22),
                             trace, fmt(row.upper_bound), fmt(row.rd)])
    agg_path = out.with_name(f"{out.stem}_agg.csv")
    with open(agg_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(AGG_HEADER)
        for agg in result.aggregates:
            writer.writerow([agg.design, agg.case, fmt(agg.r), fmt(agg.min_rd), fmt(agg.max_rd)])
    return out, agg_path


def cmd_sweep(args, config, tol, logger, profile):
    designs = resolve_designs(args)
    if not designs:
        raise InvalidInputError("sweep needs at least one design (--design or --fixtures)")
    if args.r_grid:
        r_grid = cfg.parse_grid(args.r_grid)
    elif args.fixtures == "gene":
        # gene sweeps also cover r = 0.01 and 0.99
        r_grid = cfg.with_endpoints(cfg.get_r_grid(config))
    else:
        r_grid = cfg.get_r_grid(config)
    if args.structure == "proportional":
        cases = [kernel_family(k) for k in (args.kernel or PROPORTIONAL_KERNELS)]
        rho_grid = []
    else:
        if args.case:
            cases = [parse_case(c) for c in args.case]
        else:
            cases = [5, 6, 7] if args.fixtures == "gene" else list(range(1, 8))
        rho_grid = cfg.mirror_signs(cfg.parse_grid(args.rho_grid)) if args.rho_grid else cfg.get_rho_grid(config)
    logger.log(f"Sweep designs: {[design_id for design_id, _ in designs]}")
    logger.log(f"Sweep cases: {cases}; r grid: {len(r_grid)} values; rho grid: {len(rho_grid)} values")

    _t0 = time.perf_counter()
    result = sweep(designs, cases, r_grid, rho_grid, structure=args.structure,
                   sigma11=args.sigma11, sigma22=args.sigma22,
                   threads=cfg.get_thread_limit(config), tol=tol, logger=logger)
    profile['sweep'] = time.perf_counter() - _t0

    out, agg_path = write_sweep(result, args.out or "sweep.csv")
    logger.save_output_copy(out)
    logger.save_output_copy(agg_path)
    print(f"Wrote {out} and {agg_path}")
    logger.log_success("Sweep written", f"{len(result.rows)} cells, {len(result.errors)} error cells")
    return 0


def cmd_search(args, config, tol, logger, profile):
    if args.t is None or args.n is None:
        raise InvalidInputError("search needs --t and --n")
    scenario = resolve_scenario(args)
    logger.log_scenario(scenario)
    if args.sample is not None:
        count = int(config["sample_count"]) if args.sample is SAMPLE_FROM_CONFIG else args.sample
        designs = sample_binary(args.t, args.n, count, args.seed, include_fixtures=True)
        logger.log(f"Sampling {count} designs with seed {args.seed}")
    else:
        designs = enumerate_binary(args.t, args.n, cap=int(config["enumeration_cap"]))
        logger.log(f"Enumerating all binary designs for t={args.t}, n={args.n}")

    _t0 = time.perf_counter()
    report = rank_by_trace(designs, scenario, top=int(config["search_top"]),
                           chunk_size=int(config["chunk_size"]), threads=cfg.get_thread_limit(config),
                           tol=tol, logger=logger)
    profile['search'] = time.perf_counter() - _t0
    report.seed = args.seed
    report.extra["mode"] = "sample" if args.sample is not None else "exhaustive"
    report.extra["scenario"] = scenario.describe()

    emit_json(report.to_dict(), args.out, logger)
    logger.log_success("Search finished", f"{report.evaluated} designs, oa_rank={report.oa_rank}")
    return 0


def cmd_fixtures(args, config, tol, logger, profile):
    out_dir = Path(args.out or "fixtures")
    written = []
    for set_name, suffix in (("p3", "t3"), ("p4", "t4"), ("gene", "gene")):
        for design_id, d in fixture_designs(set_name).items():
            path = save_design(d, out_dir / f"{design_id}_{suffix}.txt")
            written.append(path)
            logger.log(f"Fixture written: {path}")
    print(f"Wrote {len(written)} design files to {out_dir}")
    logger.log_success("Fixtures written", ", ".join(p.name for p in written))
    return 0


HANDLERS = {
    "eval": cmd_eval,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "search": cmd_search,
    "fixtures": cmd_fixtures,
}


def _log_profiling_summary(profile, logger):
    """Write a concise profiling summary of major steps to the log."""
    def ms(sec):
        return int(sec * 1000)

    logger.log("=== Profiling Summary ===")
    for step in ('config_load', 'evaluation', 'preview_save', 'sweep', 'search'):
        if step in profile:
            logger.log(f"{step.replace('_', ' ').capitalize()}: {ms(profile[step])} ms")
    if 'start' in profile and 'end' in profile:
        logger.log(f"Total runtime: {ms(profile['end'] - profile['start'])} ms")


def main(argv=None):
    _profile = {'start': time.perf_counter()}
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        _t0 = time.perf_counter()
        config = cfg.load_config(args.config)
        _profile['config_load'] = time.perf_counter() - _t0
    except CrossoverError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        return e.exit_code

    try:
        logger = create_logger(args.log_dir or config["log_dir"])
    except OSError as e:
        print(f"ERROR: cannot create log directory: {e}", file=sys.stderr)
        return 2
    logger.log_command("crossover-optim.py", sys.argv[1:] if argv is None else argv)
    logger.log(f"Configuration: {json.dumps(config, sort_keys=True)}")

    try:
        tol = resolve_tolerance(args, config)
        return HANDLERS[args.command](args, config, tol, logger, _profile)
    except CrossoverError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        logger.log_error(f"{args.command} failed", e)
        return e.exit_code
    except OSError as e:
        print(f"ERROR: {e}", file=sys.stderr)
        logger.log_error(f"{args.command} could not write its output", e)
        return 2
    finally:
        _profile['end'] = time.perf_counter()
        _log_profiling_summary(_profile, logger)


if __name__ == "__main__":
    sys.exit(main())
