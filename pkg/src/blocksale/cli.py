"""Command-line harness: simulate, solve, bench, calibrate.

Gap figures follow the benchmark convention: for lower-bound algorithms
gap = 100 * (reference - value) / reference, for the upper bound
gap = 100 * (ub - reference) / reference, with the exact optimum as reference
when it is available and the best lower bound otherwise. Gaps below 0.01% and
times below 0.01 s print as "<eps".
"""

from __future__ import annotations

import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import click
import numpy as np

from . import bounds as bounds_mod
from . import dp, local_search, prices
from .model import (
    Instance,
    PenaltyFunction,
    PenaltyPrototype,
    ValidationError,
    calibrate_eta,
    instance_from_json,
    make_instance,
)

EXIT_VALIDATION = 2
EXIT_DNC_TIME = 3
EXIT_DNC_MEMORY = 4

LB_ALGS = ("fs", "us", "ils", "ts1", "ts2", "exact")
DEFAULT_CELLS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4))
LARGE_CELLS = ((1, 5), (1, 6), (2, 5), (3, 5))


@dataclass
class BenchReport:
    instance_id: str
    algorithm: str
    value: float | None
    reference_value: float | None
    gap_pct: float | None
    wall_ms: float | None
    status: str  # optimal | heuristic | dnc


def fmt_gap(gap: float | None) -> str:
    if gap is None:
        return "DNC"
    if gap == 0.0:
        return "0"
    if abs(gap) < 0.01:
        return "<eps"
    return f"{gap:.2f}"


def fmt_time(seconds: float | None) -> str:
    if seconds is None:
        return "DNC"
    if seconds < 0.01:
        return "<eps"
    return f"{seconds:.2f}"


def _parse_cells(text: str | None, large: bool):
    if text:
        cells = []
        for part in text.split(","):
            a, b = part.split(":")
            cells.append((int(a), int(b)))
        return cells
    cells = list(DEFAULT_CELLS)
    if large:
        cells += list(LARGE_CELLS)
    return cells


def _run_algorithm(inst: Instance, alg: str, *, grain, lam, radius, time_limit,
                   memory_budget, max_iterations, x_needed=True):
    """Dispatch one algorithm; returns (value, x, status, wall_s)."""
    start = time.perf_counter()
    if alg in ("fs", "fire-sale"):
        sched = local_search.fire_sale(inst)
        status = "heuristic"
    elif alg in ("us", "uniform"):
        sched = local_search.uniform_sale(inst)
        status = "heuristic"
    elif alg == "ils":
        cfg = local_search.IlsConfig(
            max_iterations=max_iterations, time_limit=time_limit
        )
        res = local_search.ils(inst, config=cfg)
        return res.schedule.value, res.schedule.x, res.status, time.perf_counter() - start
    elif alg in ("ts1", "two-step"):
        res = dp.solve_two_step(
            inst, P=grain, lam=lam, time_limit=time_limit, memory_budget=memory_budget
        )
        sched = res.schedule
        status = "heuristic"
    elif alg in ("ts2", "two-step-continuous"):
        cont = bounds_mod.continuous_first_stage(inst)
        P = grain if grain is not None else dp.auto_grain(inst.T, inst.N)
        r = radius if radius is not None else max(1, lam * P)
        sched = dp.solve_bounded(
            inst, cont.x, r, time_limit=time_limit, memory_budget=memory_budget
        )
        status = "heuristic"
    elif alg in ("coarse",):
        P = grain if grain is not None else dp.auto_grain(inst.T, inst.N)
        sched = dp.solve_coarse(
            inst, P, time_limit=time_limit, memory_budget=memory_budget
        )
        status = "heuristic"
    elif alg == "exact":
        sched = dp.solve_exact(
            inst, time_limit=time_limit, memory_budget=memory_budget
        )
        status = "optimal"
    elif alg in ("ub", "upper-bound"):
        report = bounds_mod.upper_bound(inst)
        return report.ub, None, "heuristic", time.perf_counter() - start
    else:
        raise ValidationError(f"unknown algorithm '{alg}'")
    return sched.value, sched.x, status, time.perf_counter() - start


@click.group()
def main():
    """Large block sale solvers and benchmark harness."""


@main.command()
@click.option("--mu", type=float, default=0.0)
@click.option("--sigma", type=float, default=0.10)
@click.option("--p0", type=float, default=prices.DEFAULT_P0)
@click.option("--steps", type=int, default=prices.DEFAULT_T_MAX)
@click.option("--dt", type=float, default=None, help="Defaults to 1/steps.")
@click.option("--paths", "-R", "n_paths", type=int, default=prices.DEFAULT_PATHS)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def simulate(mu, sigma, p0, steps, dt, n_paths, seed, out):
    """Simulate a GBM batch and write the averaged price path as CSV."""
    batch = prices.build_batch(mu=mu, sigma=sigma, p0=p0, T_max=steps, dt=dt,
                               R=n_paths, seed=seed)
    prices.write_prices_csv(out, batch.averaged)
    click.echo(f"wrote {steps} averaged prices ({n_paths} paths) to {out}")


@main.command()
@click.option("--instance", "instance_path", type=click.Path(exists=True), required=True)
@click.option("--alg", required=True,
              type=click.Choice(["exact", "coarse", "two-step", "two-step-continuous",
                                 "ils", "fire-sale", "uniform", "upper-bound"]))
@click.option("--grain", type=int, default=None)
@click.option("--lambda", "lam", type=int, default=5)
@click.option("--radius", type=int, default=None)
@click.option("--time-limit", type=float, default=None, help="Seconds.")
@click.option("--memory-limit", type=int, default=None, help="Bytes.")
@click.option("--max-iterations", type=int, default=200_000)
def solve(instance_path, alg, grain, lam, radius, time_limit, memory_limit,
          max_iterations):
    """Solve one instance file, print a result JSON object on stdout."""
    try:
        with open(instance_path) as fh:
            inst = instance_from_json(fh.read())
    except ValidationError as exc:
        click.echo(f"validation error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    try:
        value, x, status, wall = _run_algorithm(
            inst, alg, grain=grain, lam=lam, radius=radius, time_limit=time_limit,
            memory_budget=memory_limit, max_iterations=max_iterations,
        )
    except dp.TimeLimitExceeded as exc:
        click.echo(json.dumps({"algorithm": alg, "status": "dnc", "reason": str(exc)}))
        sys.exit(EXIT_DNC_TIME)
    except dp.MemoryBudgetError as exc:
        click.echo(json.dumps({"algorithm": alg, "status": "dnc", "reason": str(exc)}))
        sys.exit(EXIT_DNC_MEMORY)
    except (ValidationError, dp.InfeasibleFunnelError, ValueError) as exc:
        click.echo(f"validation error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)

    doc = {
        "algorithm": alg,
        "x": None if x is None else [int(v) for v in x],
        "value": value,
        "wall_ms": wall * 1000.0,
        "status": status,
    }
    click.echo(json.dumps(doc))


def _cell_instance(a: int, b: int, prototype: PenaltyPrototype, mode: str, seed: int):
    """Instance for the (T, N) = (10^a, 10^b) cell under the given price mode."""
    T, N = 10**a, 10**b
    if mode == "cst":
        vec = np.full(T, 100.0)
    else:
        if mode == "avg":
            mu, sigma = 0.0, 0.25
        else:
            mu, sigma = (float(v) for v in mode.split("/"))
        T_max = max(T, prices.DEFAULT_T_MAX)
        batch = prices.build_batch(mu=mu, sigma=sigma, T_max=T_max, seed=seed)
        vec = prices.subsample(batch.averaged, T)
    return make_instance(T, N, vec, prototype=prototype)


def _bench_cell(args):
    """One (cell, prototype, mode) bench task; safe to run in a worker."""
    (a, b, proto_name, mode, algs, seed, time_limit, memory_budget) = args
    prototype = PenaltyPrototype(proto_name)
    inst = _cell_instance(a, b, prototype, mode, seed)
    instance_id = f"T1e{a}_N1e{b}_{proto_name}_{mode}"

    runs = {}
    for alg in algs:
        try:
            value, _, status, wall = _run_algorithm(
                inst, alg, grain=100, lam=5, radius=None, time_limit=time_limit,
                memory_budget=memory_budget, max_iterations=200_000,
            )
            if alg == "ils":
                status = "heuristic"
        except (dp.TimeLimitExceeded, dp.MemoryBudgetError):
            runs[alg] = (None, "dnc", None)
            continue
        if alg == "exact":
            status = "optimal"
        runs[alg] = (value, status, wall)

    ref = None
    if "exact" in runs and runs["exact"][0] is not None:
        ref = runs["exact"][0]
    else:
        lbs = [runs[a_][0] for a_ in runs if a_ in LB_ALGS and runs[a_][0] is not None]
        if lbs:
            ref = max(lbs)

    reports = []
    for alg in algs:
        value, status, wall = runs[alg]
        gap = None
        if value is not None and ref:
            if alg == "ub":
                gap = 100.0 * (value - ref) / ref
            else:
                gap = 100.0 * (ref - value) / ref
        reports.append(
            BenchReport(
                instance_id=instance_id,
                algorithm=alg,
                value=value,
                reference_value=ref,
                gap_pct=gap,
                wall_ms=None if wall is None else wall * 1000.0,
                status=status,
            )
        )
    return (a, b, proto_name, mode), reports


def _write_bench_outputs(prefix, keyed_reports, algs):
    csv_path = f"{prefix}.csv"
    md_path = f"{prefix}.md"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["instance_id", "algorithm", "value", "reference_value",
                        "gap_pct", "wall_ms", "status"],
        )
        writer.writeheader()
        for _, reports in keyed_reports:
            for rep in reports:
                writer.writerow(asdict(rep))

    groups: dict[tuple[str, str], list] = {}
    for (a, b, proto, mode), reports in keyed_reports:
        groups.setdefault((proto, mode), []).append(((a, b), reports))

    lines = []
    for (proto, mode), items in groups.items():
        lines.append(f"## Quality ({mode.upper()}, {proto})")
        lines.append("")
        header = "| T | N | " + " | ".join(alg.upper() for alg in algs) + " |"
        lines.append(header)
        lines.append("|" + "---|" * (len(algs) + 2))
        for (a, b), reports in items:
            by_alg = {r.algorithm: r for r in reports}
            row = [f"10^{a}", f"10^{b}"]
            for alg in algs:
                rep = by_alg.get(alg)
                row.append("DNC" if rep is None or rep.status == "dnc" else fmt_gap(rep.gap_pct))
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
        lines.append(f"## CPU seconds ({mode.upper()}, {proto})")
        lines.append("")
        lines.append(header)
        lines.append("|" + "---|" * (len(algs) + 2))
        for (a, b), reports in items:
            by_alg = {r.algorithm: r for r in reports}
            row = [f"10^{a}", f"10^{b}"]
            for alg in algs:
                rep = by_alg.get(alg)
                row.append(
                    "DNC" if rep is None or rep.wall_ms is None else fmt_time(rep.wall_ms / 1000.0)
                )
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
    with open(md_path, "w") as fh:
        fh.write("\n".join(lines))
    return csv_path, md_path


@main.command()
@click.option("--cells", default=None,
              help="Comma list of a:b exponent pairs, e.g. '1:2,1:3'. "
                   "Default caps at (10^2, 10^4).")
@click.option("--prototypes", default="arctan",
              help="Comma list of rational,sqrt,arctan or 'all'.")
@click.option("--price-modes", default="cst",
              help="Comma list of cst, avg, or mu/sigma pairs like '0/0.25'.")
@click.option("--algs", default="fs,us,ils,ts1,exact,ub")
@click.option("--time-limit", type=float, default=600.0)
@click.option("--memory-limit", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--workers", type=int, default=1)
@click.option("--large", is_flag=True, help="Extend the default grid past (10^2, 10^4).")
@click.option("--out", required=True, help="Output prefix for .csv and .md files.")
def bench(cells, prototypes, price_modes, algs, time_limit, memory_limit, seed,
          workers, large, out):
    """Run the benchmark grid and emit CSV plus markdown tables."""
    cell_list = _parse_cells(cells, large)
    proto_list = (
        [p.value for p in PenaltyPrototype]
        if prototypes == "all"
        else [s.strip() for s in prototypes.split(",") if s.strip()]
    )
    mode_list = [s.strip() for s in price_modes.split(",") if s.strip()]
    alg_list = [s.strip() for s in algs.split(",") if s.strip()]

    tasks = [
        (a, b, proto, mode, alg_list, seed, time_limit, memory_limit)
        for (a, b) in cell_list
        for proto in proto_list
        for mode in mode_list
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            keyed = list(pool.map(_bench_cell, tasks))
        click.echo("note: concurrent cells share CPUs; timings may be unreliable", err=True)
    else:
        keyed = [_bench_cell(t) for t in tasks]
    csv_path, md_path = _write_bench_outputs(out, keyed, alg_list)
    click.echo(f"wrote {csv_path} and {md_path}")


def _calibration_gaps(T, N, prototype, eta, time_limit):
    """FS and US gaps against the exact optimum, constant prices p = 100."""
    p = np.full(T, 100.0)
    g = PenaltyFunction(prototype, eta)
    inst = Instance(T=T, N=N, p=p, c=0.9 * p, g=g)
    try:
        opt = dp.solve_exact(inst, time_limit=time_limit).value
    except (dp.TimeLimitExceeded, dp.MemoryBudgetError):
        return None, None
    fs = local_search.fire_sale(inst).value
    us = local_search.uniform_sale(inst).value
    return 100.0 * (opt - fs) / opt, 100.0 * (opt - us) / opt


@main.command()
@click.option("--prototypes", default="all")
@click.option("--h-values", "--H", "h_values", default="0.75,0.99")
@click.option("--include-uncalibrated/--no-uncalibrated", default=True,
              help="Also emit the eta = 1 baseline table.")
@click.option("--cells", default=None)
@click.option("--large", is_flag=True)
@click.option("--time-limit", type=float, default=600.0)
@click.option("--out", required=True, help="Output prefix for .csv and .md files.")
def calibrate(prototypes, h_values, include_uncalibrated, cells, large, time_limit, out):
    """Fire-sale / uniform-sale gap tables per calibration threshold."""
    cell_list = _parse_cells(cells, large)
    proto_list = (
        list(PenaltyPrototype)
        if prototypes == "all"
        else [PenaltyPrototype(s.strip()) for s in prototypes.split(",")]
    )
    etas: list[tuple[str, float | None]] = [
        (f"eta_{h}", float(h)) for h in h_values.split(",") if h.strip()
    ]
    if include_uncalibrated:
        etas.append(("eta_1", None))

    rows = []
    lines = []
    for label, H in etas:
        lines.append(f"## {label}")
        lines.append("")
        header = "| T | N | " + " | ".join(
            f"{p.value} FS | {p.value} US" for p in proto_list
        ) + " |"
        lines.append(header)
        lines.append("|" + "---|" * (2 + 2 * len(proto_list)))
        for a, b in cell_list:
            T, N = 10**a, 10**b
            cols = [f"10^{a}", f"10^{b}"]
            for proto in proto_list:
                eta = 1.0 if H is None else calibrate_eta(proto, float(N), H)
                fs_gap, us_gap = _calibration_gaps(T, N, proto, eta, time_limit)
                rows.append({
                    "eta": label, "T": T, "N": N, "prototype": proto.value,
                    "fs_gap_pct": fs_gap, "us_gap_pct": us_gap,
                })
                cols.append(fmt_gap(fs_gap) if fs_gap is not None else "DNC")
                cols.append(fmt_gap(us_gap) if us_gap is not None else "DNC")
            lines.append("| " + " | ".join(cols) + " |")
        lines.append("")

    with open(f"{out}.csv", "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["eta", "T", "N", "prototype", "fs_gap_pct", "us_gap_pct"]
        )
        writer.writeheader()
        writer.writerows(rows)
    with open(f"{out}.md", "w") as fh:
        fh.write("\n".join(lines))
    click.echo(f"wrote {out}.csv and {out}.md")


if __name__ == "__main__":
    main()
