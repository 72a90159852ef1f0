import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from patchcert.certifiers import Analyzer, BudgetMode, costcert_mink, strategy2_mink
from patchcert.cli import main
from patchcert.errors import (
    DuplicateIdError,
    EmptyDatasetError,
    LabelRangeError,
    LengthMismatchError,
    MalformedRecordError,
    UnknownProfileError,
)
from patchcert.geometry import PatchSpec, build_patch_regions
from patchcert.io import (
    REPORT_COLUMNS,
    RunConfig,
    emit_report,
    gen_synthetic,
    load_votes,
    native_config,
    parse_report,
    render_percent,
    save_votes,
)
from patchcert.metrics import DatasetReport, sweep
from patchcert.votes import clean_level, vote_confidence

FIG2 = native_config("figure2")


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_jsonl_example(tmp_path):
    p = write(tmp_path / "v.jsonl", '{"id":"s1","true_label":0,"mutant_labels":[0,0,0,0,1]}\n')
    data = load_votes(p, FIG2)
    assert len(data) == 1 and vote_confidence(data[0]) == {0: 4, 1: 1}


def test_load_errors(tmp_path):
    cfg = RunConfig()
    header = "id,true_label," + ",".join(f"m{i}" for i in range(224)) + "\n"
    row = "a,0," + ",".join(["0"] * 223) + "\n"
    with pytest.raises(LengthMismatchError):
        load_votes(write(tmp_path / "short.csv", header + row), cfg)
    with pytest.raises(EmptyDatasetError):
        load_votes(write(tmp_path / "empty.jsonl", ""), cfg)
    with pytest.raises(EmptyDatasetError):
        load_votes(write(tmp_path / "empty.csv", ""), cfg)
    with pytest.raises(MalformedRecordError) as exc:
        load_votes(write(tmp_path / "bad.jsonl",
                         '{"id":"a","true_label":0,"mutant_labels":[0,0,0,0,0]}\n{oops\n'), FIG2)
    assert exc.value.line_no == 2
    with pytest.raises(LabelRangeError):
        load_votes(write(tmp_path / "range.jsonl",
                         '{"id":"a","true_label":0,"mutant_labels":[0,0,0,0,9]}\n'), FIG2)
    with pytest.raises(DuplicateIdError):
        rec = '{"id":"a","true_label":0,"mutant_labels":[0,0,0,0,1]}\n'
        load_votes(write(tmp_path / "dup.jsonl", rec + rec), FIG2)
    with pytest.raises(MalformedRecordError):
        load_votes(write(tmp_path / "field.jsonl", '{"id":"a","mutant_labels":[0,0,0,0,1]}\n'), FIG2)
    # each failure is its own type
    kinds = {LengthMismatchError, EmptyDatasetError, MalformedRecordError, LabelRangeError,
             DuplicateIdError}
    assert len(kinds) == 5 and not any(issubclass(a, b) for a in kinds for b in kinds if a is not b)


@pytest.mark.parametrize("suffix", [".jsonl", ".csv"])
def test_round_trip(tmp_path, suffix):
    cfg = RunConfig(image_width=30, image_height=30, band_width=4, num_labels=50)
    data = gen_synthetic("random", cfg, seed=3, count=25)
    path = tmp_path / f"votes{suffix}"
    save_votes(data, path)
    back = load_votes(path, cfg)
    assert [s.sample_id for s in back] == [s.sample_id for s in data]
    assert list(back) == list(data)
    np.testing.assert_array_equal(back.label_matrix, data.label_matrix)


def test_synthetic_profiles():
    a = gen_synthetic("random", RunConfig(num_labels=100), seed=9, count=5)
    b = gen_synthetic("random", RunConfig(num_labels=100), seed=9, count=5)
    assert list(a) == list(b)
    with pytest.raises(UnknownProfileError):
        gen_synthetic("figure9")

    fig = gen_synthetic("figure45")
    s = fig[0]
    assert vote_confidence(s) == {0: 9, 1: 4, 2: 4}
    patch = PatchSpec(3)
    assert costcert_mink(s, fig.scheme, patch, 3) == 2
    assert strategy2_mink(s, fig.scheme, patch, 3) == 3

    wc = gen_synthetic("well_classified", count=2, seed=0)
    assert costcert_mink(wc[0], wc.scheme, PatchSpec(96), 1000) == 2
    assert strategy2_mink(wc[0], wc.scheme, PatchSpec(96), 1000) == 1000


@pytest.mark.parametrize("width", [17, 18, 25, 40])
def test_figure45_is_scheme_parameterized(width):
    cfg = native_config("figure45", image_width=width, image_height=width)
    s = gen_synthetic("figure45", cfg)[0]
    hits = []
    for region in build_patch_regions(cfg.scheme, PatchSpec(3)):
        cl = clean_level(s, region, cfg.scheme, 3)
        # exactly three overlapped mutants, all voting the true label
        if cl.overlap_count == 3 and vote_confidence(s)[0] - cl.alpha[0] == 3:
            hits.append(region)
    assert hits
    if width == 17:
        cl = clean_level(s, build_patch_regions(cfg.scheme, PatchSpec(3))[0], cfg.scheme, 3)
        assert dict(cl.alpha) == {0: 6, 1: 4, 2: 4}


def test_render_percent():
    assert render_percent(Fraction(1, 2)) == "50.0"
    assert render_percent(Fraction(1, 3)) == "33.3"
    assert render_percent(Fraction(2, 3)) == "66.7"
    assert render_percent(Fraction(1, 1000)) == "0.1"  # 0.1 exactly
    assert render_percent(Fraction(1, 2000)) == "0.1"  # 0.05 rounds half up
    assert render_percent(Fraction(1)) == "100.0"


def test_emit_report_shapes(fig45):
    text = emit_report(DatasetReport())
    assert text.count("\n") == 1 and text.startswith(",".join(REPORT_COLUMNS))
    data, _ = fig45
    rep = sweep(data, [Analyzer.COSTCERT, Analyzer.STRATEGY2], [3], [1, 2])
    rows = {(r["analyzer"], r["k"]): r for r in _csv_rows(emit_report(rep))}
    assert rows[("costcert", "2")]["cert_acc"] == "100.0"
    assert rows[("strategy2", "2")]["cert_acc"] == "0.0"
    assert rows[("costcert", "1")]["cert_acc"] == "0.0"
    assert rows[("costcert", "2")]["mean_mink"] == "2.00"
    md = emit_report(rep, "markdown")
    assert md.splitlines()[0].startswith("| analyzer | patch_side | k |")
    assert len(md.splitlines()) == 2 + 4


def _csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_report_reparses_exactly():
    cfg = RunConfig(image_width=20, image_height=20, band_width=3, num_labels=7)
    data = gen_synthetic("random", cfg, seed=2, count=33)
    rep = sweep(data, list(Analyzer), [2, 5, 9], [1, 2, 4], BudgetMode.PER_PATCH)
    back = parse_report(emit_report(rep))
    assert back.rows == rep.rows
    assert emit_report(back) == emit_report(rep)


# ------------------------------------------------------------------ CLI

def run(argv, capsys):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_cli_figure45_flow(tmp_path, capsys):
    votes = tmp_path / "f.jsonl"
    assert run(["synth", "--profile", "figure45", "--out", votes], capsys)[0] == 0
    geo = ["--width", 17, "--height", 17, "--band", 1, "--wrap", "--labels", 3, "--patch", 3]
    code, out = run(["mink", *geo, "--votes", votes, "--analyzer", "costcert,strategy2"], capsys)
    assert code == 0
    minks = {r["analyzer"]: r["mink"] for r in map(json.loads, out.out.splitlines())}
    assert minks == {"costcert": 2, "strategy2": 3}
    code, out = run(["certify", *geo, "--votes", votes, "--k", "1,2", "--analyzer", "costcert"],
                    capsys)
    assert [json.loads(l)["certified"] for l in out.out.splitlines()] == [False, True]
    code, out = run(["oracle", *geo, "--votes", votes, "--k", "1,2"], capsys)
    assert code == 0 and json.loads(out.out.splitlines()[-1])["mismatches"] == 0
    report = tmp_path / "r.csv"
    code, _ = run(["sweep", *geo, "--votes", votes, "--k", "1,2", "--out", report], capsys)
    assert code == 0
    code, out = run(["report", "--in", report, "--format", "markdown"], capsys)
    assert code == 0 and "| costcert | 3 | 2 | 100.0 |" in out.out


def test_cli_exit_codes(tmp_path, capsys):
    assert run(["bogus"], capsys)[0] == 1
    assert run(["mink", "--analyzer", "nope", "--votes", "x"], capsys)[0] == 1
    assert run(["mink"], capsys)[0] == 1  # --votes missing
    assert run(["mink", "--band", 500], capsys)[0] == 1
    assert run(["mink", "--votes", tmp_path / "missing.jsonl"], capsys)[0] == 2
    bad = write(tmp_path / "bad.jsonl", '{"id":"a","true_label":0,"mutant_labels":[0]}\n')
    assert run(["mink", "--votes", bad], capsys)[0] == 2
    big = tmp_path / "big.jsonl"
    gen_cfg = RunConfig(image_width=10, image_height=10, band_width=1, num_labels=8)
    save_votes(gen_synthetic("random", gen_cfg, seed=0, count=1), big)
    code, _ = run(["oracle", "--width", 10, "--height", 10, "--band", 1, "--labels", 8,
                   "--patch", 2, "--k", 1, "--votes", big], capsys)
    assert code == 3


def test_cli_synth_deterministic(tmp_path, capsys):
    args = ["synth", "--profile", "random", "--width", 20, "--height", 20, "--band", 2,
            "--labels", 10, "--count", 5, "--seed", 42]
    a = run(args, capsys)[1].out
    b = run(args, capsys)[1].out
    assert a == b and len(a.splitlines()) == 5
