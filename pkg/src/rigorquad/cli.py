"""Command-line campaign runner.

Modes:

* ``part1``: first time derivative of the slope at both amplitude endpoints,
  with a sign-change verdict;
* ``part2``: the 41 two-variable terms and their total, with a ``>= 30``
  verdict;
* ``single-term``: only the terms given with ``--terms`` (no headline verdicts);
* ``suite``: ``part1`` followed by ``part2``.

Exit codes: 0 all verdicts pass, 2 sign or lower-bound verdict failed,
3 an enclosure misses its reference, 4 a cell could not be resolved,
1 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone

from . import __version__, muskat
from .interval import Interval, fsum_bounds
from .quad import REL_BASES, CellUnresolvable
from .reference import (
    SECOND_DERIVATIVE_LOWER_BOUND,
    SECOND_DERIVATIVE_REFERENCE,
    SIGN_REFERENCES,
    decimal_interval,
    reference_table,
)
from .report import EnclosureReport, Entry, Total, emit_report

log = logging.getLogger("rigorquad")

EXIT_OK, EXIT_USAGE, EXIT_SIGN, EXIT_DISJOINT, EXIT_UNRESOLVABLE = 0, 1, 2, 3, 4
MODES = ("part1", "part2", "single-term", "suite")
AMPLITUDES = tuple(SIGN_REFERENCES)
# Slowest terms go first so the pool stays busy at the end of the run.
LONGEST_FIRST = ("B47", "B55")
DEPTH_FLAGS = {
    "nonsingular": "depth_nonsingular",
    "singular": "depth_singular",
    "singular-first": "depth_singular_first",
    "singular-center": "depth_singular_center",
    "singular-second": "depth_singular_second",
    "singular-second-special": "depth_singular_second_special",
}
REGION_ALIASES = {**{v: k for k, v in muskat.REGION_TAXONOMY.items()}, "singular": "singular",
                  "bounded": "bounded-region"}


@dataclass
class CampaignConfig:
    mode: str = "part1"
    delta: float | None = None
    abs_tol: float | None = None
    rel_tol: float | None = None
    rel_basis: str = "midpoint"
    depths: dict[str, int] = field(default_factory=dict)
    terms: tuple[str, ...] | None = None
    regions: tuple[str, ...] | None = None
    amplitude: str | None = None
    workers: int = 1
    time_budget: float | None = None
    output_path: str | None = None
    output_format: str = "json"
    reference_check: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        for name in ("abs_tol", "rel_tol", "delta"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        unknown = set(self.depths) - set(DEPTH_FLAGS)
        if unknown:
            raise ValueError(f"unknown region classes {sorted(unknown)}")
        if self.terms is not None:
            for t in self.terms:
                muskat.get_term(t)
        if self.regions is not None:
            self.regions = tuple(REGION_ALIASES.get(r, r) for r in self.regions)
            known = set(REGION_ALIASES.values())
            bad = [r for r in self.regions if r not in known]
            if bad:
                raise ValueError(f"unknown regions {bad}")
        if self.mode == "single-term" and not self.terms:
            raise ValueError("single-term mode needs --terms")
        if self.rel_basis not in REL_BASES:
            raise ValueError(f"rel basis must be one of {REL_BASES}")
        if self.output_format not in ("json", "csv"):
            raise ValueError("output format must be json or csv")

    def plan(self, arity: int) -> muskat.PlanConfig:
        base = muskat.PlanConfig.one_d() if arity == 1 else muskat.PlanConfig.two_d()
        over = {DEPTH_FLAGS[k]: v for k, v in self.depths.items()}
        for name in ("delta", "abs_tol", "rel_tol"):
            if getattr(self, name) is not None:
                over[name] = getattr(self, name)
        return replace(base, rel_basis=self.rel_basis, **over)

    def echo(self) -> dict:
        d = asdict(self)
        d["terms"] = None if self.terms is None else list(self.terms)
        d["regions"] = None if self.regions is None else list(self.regions)
        return d


# ---------------------------------------------------------------------------
# task execution


@dataclass(frozen=True)
class Task:
    quantity: str
    term: str
    entry_index: int
    params: muskat.CurveParams
    plan: muskat.PlanConfig


def _run_task(task: Task):
    """Worker body: integrate one region piece; errors are returned, not raised."""
    spec = muskat.get_term(task.term)
    entry = muskat.region_plan(spec.arity, task.term, task.plan)[task.entry_index]
    start = time.perf_counter()
    try:
        result = muskat.integrate_entry(task.term, entry, task.params, task.plan)
        return result, None, time.perf_counter() - start
    except CellUnresolvable as exc:
        return None, str(exc), time.perf_counter() - start


def _tasks_for(quantity, terms, params, plan, regions) -> list[tuple[Task, str]]:
    out = []
    for term in terms:
        spec = muskat.get_term(term)
        for i, e in enumerate(muskat.region_plan(spec.arity, term, plan)):
            if regions is None or e.column in regions:
                out.append((Task(quantity, term, i, params, plan), e.column))
    return out


def execute(tasks: list[Task], workers: int, deadline: float | None) -> dict[int, tuple]:
    """Run tasks, returning ``index -> (result, error, seconds)``.

    No task is started after ``deadline``; tasks already running finish.
    Submission order is longest-first, but the returned mapping is keyed by
    position, so the reduction order never depends on scheduling.
    """
    order = sorted(range(len(tasks)), key=lambda i: tasks[i].term not in LONGEST_FIRST)
    done: dict[int, tuple] = {}

    def expired():
        return deadline is not None and time.monotonic() >= deadline

    def record(i, outcome):
        done[i] = outcome
        t = tasks[i]
        log.info("[%d/%d] %s %s piece %d: %s (%.1f s)", len(done), len(tasks), t.quantity, t.term,
                 t.entry_index, outcome[0].enclosure if outcome[1] is None else "unresolvable", outcome[2])

    if workers == 1:
        for i in order:
            if expired():
                break
            record(i, _run_task(tasks[i]))
        return done
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = {}
        queue = list(order)
        while queue or pending:
            while queue and len(pending) < workers and not expired():
                i = queue.pop(0)
                pending[pool.submit(_run_task, tasks[i])] = i
            if not pending:
                break
            finished, _ = wait(pending, return_when=FIRST_COMPLETED)
            for fut in finished:
                record(pending.pop(fut), fut.result())
    return done


def _reduce(quantity_tasks, outcomes, offset, reference, check):
    """Group finished tasks into entries, in plan order."""
    entries: dict[tuple, list] = {}
    for k, (task, column) in enumerate(quantity_tasks):
        entries.setdefault((task.quantity, task.term, column), []).append(outcomes.get(offset + k))
    out = []
    for (quantity, term, column), parts in entries.items():
        e = Entry(quantity, term, column)
        if any(p is None for p in parts):
            e.status = "not-run"
        elif any(p[1] is not None for p in parts):
            e.status = "unresolvable"
            e.error = "; ".join(p[1] for p in parts if p[1] is not None)
            e.wall_time = sum(p[2] for p in parts)
        else:
            res = muskat.combine([p[0] for p in parts])
            e.enclosure = res.enclosure
            e.cells_evaluated = res.cells_evaluated
            e.cells_rejected_then_split = res.cells_rejected_then_split
            e.fallbacks_used = res.fallbacks_used
            e.max_depth_reached = res.max_depth_reached
            e.wall_time = sum(p[2] for p in parts)
        ref = reference.get((term, column))
        if ref is not None:
            e.reference = ref
            if check and e.enclosure is not None:
                e.verdict = "intersects" if e.enclosure.intersects(ref) else "disjoint"
        out.append(e)
    return out


def _sum(entries: list[Entry]) -> Interval | None:
    if not entries or any(e.enclosure is None for e in entries):
        return None
    return Interval(*fsum_bounds([e.enclosure.lo for e in entries], [e.enclosure.hi for e in entries]))


def _verdict(ok: bool | None) -> str:
    return "not-checked" if ok is None else ("pass" if ok else "fail")


# ---------------------------------------------------------------------------
# campaigns


def _selected(config: CampaignConfig, arity: int) -> list[str]:
    pool = muskat.ONE_D_TERMS if arity == 1 else muskat.TWO_D_TERMS
    if config.terms is None:
        return list(pool)
    return [t for t in config.terms if t in pool]


def _part1_jobs(config):
    terms = _selected(config, 1)
    plan = config.plan(1)
    regions = None if config.regions is None else [r for r in config.regions if r in ("singular", "nonsingular")]
    jobs = []
    for a in AMPLITUDES:
        params = muskat.CurveParams.at(a)
        jobs.append((f"dtx@A={a}", _tasks_for(f"dtx@A={a}", terms, params, plan, regions)))
    complete = terms == list(muskat.ONE_D_TERMS) and config.regions is None
    return jobs, complete


def _part2_jobs(config):
    terms = _selected(config, 2)
    amplitude = config.amplitude
    if amplitude is None:
        params = muskat.CurveParams()
    else:
        lo, _, hi = amplitude.partition(",")
        params = muskat.CurveParams(A=decimal_interval(lo, hi or None))
    plan = config.plan(2)
    regions = None
    if config.regions is not None:
        regions = [r for r in config.regions if r in muskat.REGION_TAXONOMY]
    jobs = [("dttx", _tasks_for("dttx", terms, params, plan, regions))]
    complete = terms == list(muskat.TWO_D_TERMS) and config.regions is None
    return jobs, complete


def _failed(entries) -> bool:
    return any(e.status == "unresolvable" for e in entries)


def _part1_totals(entries, complete, check) -> list[Total]:
    totals = []
    signs = {}
    for a in AMPLITUDES:
        name = f"dtx@A={a}"
        mine = [e for e in entries if e.quantity == name]
        enc = _sum(mine) if complete else None
        ref = SIGN_REFERENCES[a]
        checks = {}
        if enc is not None:
            signs[a] = enc.is_positive() if a == AMPLITUDES[0] else enc.is_negative()
            if check:
                checks["reference"] = "intersects" if enc.intersects(ref) else "disjoint"
        elif complete and _failed(mine):
            # an unresolvable cell means the sign cannot be established
            signs[a] = False
        if a in signs:
            checks["sign"] = _verdict(signs[a])
        totals.append(Total(name, enc, enc is not None, checks, ref))
    sign_change = all(signs.values()) if len(signs) == len(AMPLITUDES) else None
    totals.append(Total("sign-change", None, sign_change is not None, {"sign-change": _verdict(sign_change)}))
    return totals


def _part2_totals(entries, complete, check) -> list[Total]:
    done = [e for e in entries if e.enclosure is not None]
    everything = complete and len(done) == len(entries)
    enc = _sum(done) if done else None
    ok = enc.lo >= SECOND_DERIVATIVE_LOWER_BOUND if everything else None
    if complete and _failed(entries):
        ok = False
    checks = {"ge-30": _verdict(ok)}
    if check and everything:
        checks["reference"] = "intersects" if enc.intersects(SECOND_DERIVATIVE_REFERENCE) else "disjoint"
    return [Total("dttx", enc, everything, checks, SECOND_DERIVATIVE_REFERENCE)]


def run(config: CampaignConfig) -> EnclosureReport:
    """Run the campaign described by ``config``."""
    wanted = {"part1": (1,), "part2": (2,), "suite": (1, 2), "single-term": (1, 2)}[config.mode]
    headline = config.mode != "single-term"
    groups = []
    if 1 in wanted and _selected(config, 1):
        jobs, complete = _part1_jobs(config)
        groups.append((1, jobs, complete and headline))
    if 2 in wanted and _selected(config, 2):
        jobs, complete = _part2_jobs(config)
        groups.append((2, jobs, complete and headline))

    validate = sorted({t.term for _, jobs, _ in groups for _, ts in jobs for t, _ in ts})
    for term in validate:
        problems = muskat.validate_orders(term)
        if problems:
            raise ValueError("; ".join(problems))

    flat = [t for _, jobs, _ in groups for _, ts in jobs for t, _ in ts]
    deadline = None if config.time_budget is None else time.monotonic() + config.time_budget
    log.info("running %d region tasks on %d worker(s)", len(flat), config.workers)
    outcomes = execute(flat, config.workers, deadline)

    reference = reference_table()
    report = EnclosureReport(config.mode, config.echo(), timestamp=datetime.now(timezone.utc).isoformat(),
                             version=__version__)
    offset = 0
    for arity, jobs, complete in groups:
        group_entries = []
        for _, ts in jobs:
            group_entries += _reduce(ts, outcomes, offset, reference if arity == 2 else {},
                                     config.reference_check)
            offset += len(ts)
        report.entries += group_entries
        if arity == 1:
            report.totals += _part1_totals(group_entries, complete, config.reference_check)
        else:
            report.totals += _part2_totals(group_entries, complete, config.reference_check)
    return report


def run_part1(config: CampaignConfig) -> EnclosureReport:
    return run(replace(config, mode="part1"))


def run_part2(config: CampaignConfig) -> EnclosureReport:
    return run(replace(config, mode="part2"))


def exit_code(report: EnclosureReport) -> int:
    if any(e.status == "unresolvable" for e in report.entries):
        return EXIT_UNRESOLVABLE
    verdicts = [e.verdict for e in report.entries]
    verdicts += [v for t in report.totals for k, v in t.checks.items() if k == "reference"]
    if "disjoint" in verdicts:
        return EXIT_DISJOINT
    if any(v == "fail" for t in report.totals for k, v in t.checks.items() if k != "reference"):
        return EXIT_SIGN
    return EXIT_OK


# ---------------------------------------------------------------------------
# command line


def _fmt(x: Interval | None) -> str:
    return "-" if x is None else f"[{x.lo:.10g}, {x.hi:.10g}]"


def summary(report: EnclosureReport) -> str:
    lines = []
    for e in report.entries:
        extra = "" if e.status == "done" else f" ({e.status})"
        ref = "" if e.verdict == "not-checked" else f" ref {_fmt(e.reference)} {e.verdict}"
        lines.append(f"{e.quantity:14} {e.term:4} {e.region:20} {_fmt(e.enclosure)}{ref}{extra}")
    for t in report.totals:
        checks = " ".join(f"{k}={v}" for k, v in t.checks.items())
        lines.append(f"TOTAL {t.name:14} {_fmt(t.enclosure)} {checks}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rigorquad", description="Rigorous enclosures of the Muskat integrals.")
    p.add_argument("--config", help="JSON file with default values for any option below")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--delta", type=float, help="width of the singular strips")
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--rel-basis", choices=REL_BASES, help="scale of the relative acceptance test")
    for name in DEPTH_FLAGS:
        p.add_argument(f"--max-depth-{name}", type=int, metavar="N")
    p.add_argument("--terms", help="comma-separated term ids, e.g. B23,B47")
    p.add_argument("--regions", help="comma-separated region columns or classes")
    p.add_argument("--amplitude", help="amplitude for the two-variable terms: 'lo,hi' or a single decimal")
    p.add_argument("--workers", type=int, help="worker processes (default: $RIGORQUAD_WORKERS or all cores)")
    p.add_argument("--budget-secs", type=float, help="stop starting new tasks after this many seconds")
    p.add_argument("--out", help="report path")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--check-refs", action=argparse.BooleanOptionalAction, default=None,
                   help="compare against the reference enclosures")
    p.add_argument("--manifest", action="store_true", help="print the term registry as JSON and exit")
    p.add_argument("-q", "--quiet", action="store_true")
    return p


def _csv(value):
    if value is None or isinstance(value, (list, tuple)):
        return value
    return [v.strip() for v in str(value).split(",") if v.strip()]


def config_from_args(args: argparse.Namespace) -> CampaignConfig:
    file_opts = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_opts = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(file_opts, dict):
            raise ValueError("config file must hold a JSON object")
        file_opts = {k.replace("-", "_"): v for k, v in file_opts.items()}

    def pick(name, default=None):
        v = getattr(args, name, None)
        return file_opts.get(name, default) if v is None else v

    depths = dict(file_opts.get("depths", {}))
    for name in DEPTH_FLAGS:
        v = getattr(args, "max_depth_" + name.replace("-", "_"))
        if v is None:
            v = file_opts.get("max_depth_" + name.replace("-", "_"))
        if v is not None:
            depths[name] = int(v)
    workers = pick("workers")
    if workers is None:
        workers = os.environ.get("RIGORQUAD_WORKERS") or os.cpu_count() or 1
    terms = _csv(pick("terms"))
    regions = _csv(pick("regions"))
    budget = pick("budget_secs")
    known = {f.name for f in fields(CampaignConfig)} | {"budget_secs", "out", "format", "check_refs", "depths",
                                                           "config"}
    known |= {"max_depth_" + n.replace("-", "_") for n in DEPTH_FLAGS}
    stray = set(file_opts) - known
    if stray:
        raise ValueError(f"unknown config keys {sorted(stray)}")
    return CampaignConfig(
        mode=pick("mode", "part1"),
        delta=pick("delta"),
        abs_tol=pick("abs_tol"),
        rel_tol=pick("rel_tol"),
        rel_basis=pick("rel_basis", "midpoint"),
        depths=depths,
        terms=None if terms is None else tuple(terms),
        regions=None if regions is None else tuple(regions),
        amplitude=pick("amplitude"),
        workers=int(workers),
        time_budget=None if budget is None else float(budget),
        output_path=pick("out", file_opts.get("output_path")),
        output_format=pick("format", file_opts.get("output_format", "json")),
        reference_check=bool(pick("check_refs", file_opts.get("reference_check", False))),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(asctime)s %(levelname)s %(message)s")
    if args.manifest:
        print(json.dumps(muskat.manifest(), indent=2))
        return EXIT_OK
    try:
        config = config_from_args(args)
    except (ValueError, muskat.UnknownTerm) as exc:
        print(f"rigorquad: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = run(config)
    if not args.quiet:
        print(summary(report))
    if config.output_path:
        try:
            emit_report(report, config.output_path, config.output_format)
        except OSError as exc:
            print(f"rigorquad: {exc}", file=sys.stderr)
            return EXIT_USAGE
    for e in report.entries:
        if e.error:
            print(f"rigorquad: unresolvable cell in {e.term} {e.region}: {e.error}", file=sys.stderr)
    return exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
