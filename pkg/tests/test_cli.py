import csv
import io
import json
import struct

import pytest

from rigorquad import cli, muskat
from rigorquad.cli import CampaignConfig, exit_code, main, run
from rigorquad.interval import Interval
from rigorquad.quad import CellUnresolvable
from rigorquad.reference import REGION_COLUMNS
from rigorquad.report import SCHEMA, EnclosureReport, emit_report, load_report

FAST = ["--mode", "single-term", "--terms", "B11", "--regions", "singularity-center",
        "--max-depth-singular-center", "2", "--workers", "1", "-q"]


def small(**kw) -> CampaignConfig:
    base = dict(mode="single-term", terms=("B11",), regions=("singularity-center",),
                depths={"singular-center": 2}, workers=1)
    return CampaignConfig(**{**base, **kw})


def bits(x: float) -> bytes:
    return struct.pack("<d", x)


def strip_timing(d: dict) -> dict:
    d = dict(d, timestamp="")
    d["entries"] = [dict(e, wall_time=0.0) for e in d["entries"]]
    d["config"] = dict(d["config"], workers=None)
    return d


# ---------------------------------------------------------------------------
# configuration


def test_flags_override_config_file_and_env(tmp_path, monkeypatch):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"mode": "part2", "abs_tol": 1e-3, "workers": 3, "max_depth_nonsingular": 6}))
    monkeypatch.setenv("RIGORQUAD_WORKERS", "5")
    parse = cli.build_parser().parse_args
    cfg = cli.config_from_args(parse(["--config", str(path), "--abs-tol", "1e-5"]))
    assert cfg.mode == "part2" and cfg.abs_tol == 1e-5 and cfg.workers == 3
    assert cfg.depths == {"nonsingular": 6}
    assert cfg.plan(2).depth_nonsingular == 6 and cfg.plan(2).abs_tol == 1e-5
    cfg = cli.config_from_args(parse(["--config", str(path), "--workers", "2"]))
    assert cfg.workers == 2


def test_env_is_the_workers_fallback(monkeypatch):
    monkeypatch.setenv("RIGORQUAD_WORKERS", "5")
    assert cli.config_from_args(cli.build_parser().parse_args([])).workers == 5


@pytest.mark.parametrize("argv", [
    ["--abs-tol", "0"],
    ["--terms", "B99"],
    ["--mode", "single-term"],
    ["--regions", "nowhere"],
    ["--workers", "0"],
])
def test_usage_errors_exit_1(argv, capsys):
    assert main(argv + ["-q"]) == cli.EXIT_USAGE
    assert "rigorquad:" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text('{"colour": "blue"}')
    assert main(["--config", str(path), "-q"]) == cli.EXIT_USAGE


def test_unwritable_output_exits_1(tmp_path):
    assert main(FAST + ["--out", str(tmp_path / "missing" / "r.json")]) == cli.EXIT_USAGE


def test_region_aliases():
    assert small(regions=("singular-center", "bounded")).regions == ("singularity-center", "bounded-region")


# ---------------------------------------------------------------------------
# exit codes


def test_exit_ok_single_term(tmp_path):
    out = tmp_path / "r.json"
    assert main(FAST + ["--check-refs", "--out", str(out)]) == cli.EXIT_OK
    report = load_report(out)
    (entry,) = report.entries
    assert entry.verdict == "intersects" and entry.enclosure is not None


def test_exit_sign_failure_with_loose_tolerance():
    report = run(CampaignConfig(mode="part1", workers=1, abs_tol=1.0, rel_tol=1.0))
    assert report.total("sign-change").checks["sign-change"] == "fail"
    assert exit_code(report) == cli.EXIT_SIGN


def test_exit_disjoint(monkeypatch):
    monkeypatch.setattr(cli, "reference_table", lambda: {("B11", "singularity-center"): Interval(1e3, 2e3)})
    report = run(small(reference_check=True))
    assert report.entries[0].verdict == "disjoint"
    assert exit_code(report) == cli.EXIT_DISJOINT


def test_exit_unresolvable(monkeypatch, capsys):
    def boom(term, entry, p, cfg):
        raise CellUnresolvable("denominator encloses zero", Interval(0, 1e-3), Interval(-1e-3, 1e-3), term)

    monkeypatch.setattr(muskat, "integrate_entry", boom)
    assert main(FAST) == cli.EXIT_UNRESOLVABLE
    err = capsys.readouterr().err
    assert "unresolvable cell in B11" in err and "denominator encloses zero" in err


def test_unresolvable_fails_the_headline_verdict(monkeypatch):
    real = muskat.integrate_entry

    def flaky(term, entry, p, cfg):
        if term == "A3" and entry.column == "singular":
            raise CellUnresolvable("stuck", Interval(0, 1e-3))
        return real(term, entry, p, cfg)

    monkeypatch.setattr(muskat, "integrate_entry", flaky)
    report = run(CampaignConfig(mode="part1", workers=1, depths={"nonsingular": 2, "singular": 2}))
    assert report.total("sign-change").checks["sign-change"] == "fail"
    assert all(t.enclosure is None for t in report.totals)
    assert exit_code(report) == cli.EXIT_UNRESOLVABLE


# ---------------------------------------------------------------------------
# budget


def test_zero_budget_runs_nothing():
    report = run(CampaignConfig(mode="part2", workers=1, time_budget=0.0, reference_check=True))
    assert report.entries and all(e.status == "not-run" for e in report.entries)
    assert all(e.verdict == "not-checked" and e.enclosure is None for e in report.entries)
    (total,) = report.totals
    assert total.enclosure is None and not total.complete and total.checks["ge-30"] == "not-checked"
    assert exit_code(report) == cli.EXIT_OK


def test_budget_stops_between_tasks():
    report = run(small(regions=("singularity-center", "singularity-y-axis"), terms=("B11", "B12"),
                       depths={"singular-center": 2, "singular-first": 2}, time_budget=1e-9))
    done = [e for e in report.entries if e.status == "done"]
    assert len(done) <= 1
    assert all(e.enclosure is None for e in report.entries if e.status == "not-run")


# ---------------------------------------------------------------------------
# reports


def test_json_round_trip_is_bit_exact(tmp_path):
    report = run(small(reference_check=True))
    path = emit_report(report, tmp_path / "r.json")
    back = load_report(path)
    assert back.to_json() == report.to_json()
    for a, b in zip(report.entries, back.entries):
        assert bits(a.enclosure.lo) == bits(b.enclosure.lo) and bits(a.enclosure.hi) == bits(b.enclosure.hi)
    assert json.loads(path.read_text())["schema"] == SCHEMA


def test_json_handles_unbounded_endpoints(tmp_path):
    report = run(small())
    report.entries[0].enclosure = Interval(-float("inf"), 1.0)
    back = load_report(emit_report(report, tmp_path / "r.json"))
    assert back.entries[0].enclosure == Interval(-float("inf"), 1.0)


def test_unknown_schema_rejected():
    with pytest.raises(ValueError):
        EnclosureReport.from_json({"schema": "other/9"})


def test_csv_layout(tmp_path):
    report = run(small())
    text = emit_report(report, tmp_path / "r.csv", "csv").read_text()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["term", "bounded-region", "singularity-center", "singularity-y-axis", "singularity-z-axis"]
    assert tuple(rows[0][1:]) == REGION_COLUMNS
    assert rows[1][0] == "B11" and rows[1][2].startswith("[") and rows[1][1] == ""
    lo, hi = (float(v) for v in rows[1][2].strip("[]").split(","))
    assert Interval(lo, hi) == report.entries[0].enclosure


def test_empty_report_is_header_only_csv():
    text = EnclosureReport("single-term", {}).to_csv()
    assert text == "term," + ",".join(REGION_COLUMNS) + "\n"


def test_manifest_flag(capsys):
    assert main(["--manifest"]) == cli.EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data == muskat.manifest()


def test_reruns_are_identical():
    a = strip_timing(run(small()).to_json())
    b = strip_timing(run(small()).to_json())
    assert a == b


def test_worker_count_does_not_change_results():
    cfg = small(terms=("B11", "B71"), regions=("singularity-center", "singularity-y-axis"),
                depths={"singular-center": 2, "singular-first": 2})
    one = strip_timing(run(cfg).to_json())
    many = strip_timing(run(CampaignConfig(**{**cfg.__dict__, "workers": 3})).to_json())
    assert one == many


def test_part1_sign_definite_at_loose_abs_tol():
    # expected red: per-cell acceptance at 1e-3 leaves totals far wider than the quantity
    report = run(CampaignConfig(mode="part1", workers=1, abs_tol=1e-3))
    assert report.total("sign-change").checks["sign-change"] == "pass"
