"""Vote-table files, run configuration, synthetic scenarios and reports.

Vote files are JSON Lines (``{"id", "true_label", "mutant_labels"}`` per
line) or CSV with header ``id,true_label,m0,m1,...``. The format is picked from
the file suffix.
"""
from __future__ import annotations

import csv
import io as _stdio
import json
from dataclasses import asdict, dataclass, field, fields, replace
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import numpy as np

from .certifiers import Analyzer, BudgetMode
from .errors import (
    DuplicateIdError,
    EmptyDatasetError,
    LabelRangeError,
    LengthMismatchError,
    MalformedRecordError,
    UnknownProfileError,
    VoteDataError,
)
from .geometry import AblationScheme, PatchSpec, build_patch_regions, overlapping_ablations
from .metrics import DatasetReport, ReportRow
from .votes import SampleVotes, VoteTable


@dataclass
class RunConfig:
    image_width: int = 224
    image_height: int = 224
    band_width: int = 19
    wrap: bool = True
    num_labels: int = 1000
    patch_sides: list[int] = field(default_factory=lambda: list(range(16, 113, 16)))
    k_values: list[int] = field(default_factory=lambda: [1, 2, 3, 5, 10])
    budget_mode: BudgetMode = BudgetMode.GLOBAL
    analyzers: list[Analyzer] = field(
        default_factory=lambda: [Analyzer.COSTCERT, Analyzer.STRATEGY2, Analyzer.STRATEGY1]
    )
    seed: int = 0

    def __post_init__(self):
        self.budget_mode = BudgetMode(self.budget_mode)
        self.analyzers = [Analyzer(a) for a in self.analyzers]
        self.scheme  # validates geometry

    @property
    def scheme(self) -> AblationScheme:
        return AblationScheme(self.image_width, self.image_height, self.band_width, self.wrap)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> RunConfig:
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["budget_mode"] = self.budget_mode.value
        d["analyzers"] = [a.value for a in self.analyzers]
        return d


# ---------------------------------------------------------------- vote files

def _record_to_sample(rec, line_no: int, config: RunConfig) -> SampleVotes:
    try:
        sid = rec["id"]
        y0 = rec["true_label"]
        labels = rec["mutant_labels"]
    except (KeyError, TypeError) as exc:
        raise MalformedRecordError(line_no, f"missing field {exc}") from None
    if not isinstance(sid, str) or isinstance(y0, bool) or not isinstance(y0, int):
        raise MalformedRecordError(line_no, "id must be a string and true_label an integer")
    if not isinstance(labels, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) for v in labels
    ):
        raise MalformedRecordError(line_no, "mutant_labels must be a list of integers")
    n = config.scheme.num_ablations
    if len(labels) != n:
        raise LengthMismatchError(
            f"line {line_no}: {len(labels)} mutant labels, scheme has {n} ablation regions"
        )
    L = config.num_labels
    if not 0 <= y0 < L or any(not 0 <= v < L for v in labels):
        raise LabelRangeError(f"line {line_no}: label outside [0, {L})")
    return SampleVotes(sid, y0, labels)


def _iter_jsonl(path: Path):
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecordError(line_no, exc.msg) from None


def _iter_csv(path: Path, num_mutants: int):
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            return
        if header[:2] != ["id", "true_label"]:
            raise MalformedRecordError(1, "header must start with id,true_label")
        width = len(header)
        for line_no, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) - 2 != num_mutants:
                raise LengthMismatchError(
                    f"line {line_no}: {len(row) - 2} mutant labels, "
                    f"scheme has {num_mutants} ablation regions"
                )
            if len(row) != width:
                raise MalformedRecordError(line_no, f"{len(row)} columns, header has {width}")
            try:
                yield line_no, {
                    "id": row[0],
                    "true_label": int(row[1]),
                    "mutant_labels": [int(v) for v in row[2:]],
                }
            except ValueError:
                raise MalformedRecordError(line_no, "non-integer label") from None


def load_votes(path, config: RunConfig) -> VoteTable:
    path = Path(path)
    records = _iter_csv(path, config.scheme.num_ablations) if path.suffix.lower() == ".csv" else _iter_jsonl(path)
    samples = []
    seen = set()
    for line_no, rec in records:
        sample = _record_to_sample(rec, line_no, config)
        if sample.sample_id in seen:
            raise DuplicateIdError(f"line {line_no}: duplicate id {sample.sample_id!r}")
        seen.add(sample.sample_id)
        samples.append(sample)
    if not samples:
        raise EmptyDatasetError(f"{path}: no records")
    return VoteTable(config.scheme, config.num_labels, samples)


def save_votes(dataset: VoteTable, path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        n = dataset.scheme.num_ablations
        with open(path, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["id", "true_label"] + [f"m{i}" for i in range(n)])
            for s in dataset:
                w.writerow([s.sample_id, s.true_label] + s.mutant_labels.tolist())
        return
    with open(path, "w", encoding="utf-8") as f:
        for s in dataset:
            rec = {"id": s.sample_id, "true_label": s.true_label,
                   "mutant_labels": s.mutant_labels.tolist()}
            f.write(json.dumps(rec, separators=(",", ":")) + "\n")


# ------------------------------------------------------- synthetic scenarios

PANDA, DOG, CAT = 0, 1, 2

PROFILES = ("figure2", "figure45", "well_classified", "random")

# geometry each figure is drawn with
NATIVE_CONFIGS = {
    "figure2": dict(image_width=5, image_height=5, band_width=1, wrap=False,
                    num_labels=2, patch_sides=[2], k_values=[1]),
    "figure45": dict(image_width=17, image_height=17, band_width=1, wrap=True,
                     num_labels=3, patch_sides=[3], k_values=[1, 2]),
}


def native_config(profile: str, **overrides) -> RunConfig:
    if profile not in PROFILES:
        raise UnknownProfileError(f"unknown profile {profile!r}; choose from {PROFILES}")
    base = RunConfig(**NATIVE_CONFIGS.get(profile, {}))
    return replace(base, **overrides) if overrides else base


def _figure2_layout(n: int) -> list[int]:
    # panda everywhere except the last mutant; two-label space, so cat is 1
    return [PANDA] * (n - 1) + [1]


def _figure45_layout(config: RunConfig) -> list[int]:
    scheme = config.scheme
    n = scheme.num_ablations
    side = config.patch_sides[0] if config.patch_sides else 3
    first = build_patch_regions(scheme, PatchSpec(side))[0]
    dirty = sorted(overlapping_ablations(scheme, first))
    if len(dirty) != 3 or n < 17:
        raise VoteDataError(
            "figure45 needs >= 17 ablation regions and a patch overlapping exactly 3 of them"
        )
    labels = [None] * n
    for i in dirty:
        labels[i] = PANDA
    rest = [i for i in range(n) if labels[i] is None]
    for j, i in enumerate(rest[:8]):
        labels[i] = DOG if j % 2 == 0 else CAT
    for i in rest[8:]:
        labels[i] = PANDA
    return labels


def gen_synthetic(profile: str, config: RunConfig | None = None, seed: int | None = None,
                  count: int = 1, peak: tuple[float, float] = (0.3, 1.0)) -> VoteTable:
    """Build a deterministic synthetic vote table.

    ``random`` draws, per sample, a true label and a peak probability from
    ``peak``; each mutant then votes the true label with that probability and
    a uniformly random label otherwise.
    """
    if profile not in PROFILES:
        raise UnknownProfileError(f"unknown profile {profile!r}; choose from {PROFILES}")
    config = config or native_config(profile)
    seed = config.seed if seed is None else seed
    scheme = config.scheme
    n, L = scheme.num_ablations, config.num_labels
    rng = np.random.default_rng(seed)

    if profile == "figure2":
        row = _figure2_layout(n)
        samples = [SampleVotes(f"figure2-{i}", PANDA, row) for i in range(count)]
    elif profile == "figure45":
        row = _figure45_layout(config)
        samples = [SampleVotes(f"figure45-{i}", PANDA, row) for i in range(count)]
    elif profile == "well_classified":
        ys = rng.integers(0, L, size=count)
        samples = [SampleVotes(f"wc-{i}", int(y), np.full(n, y, dtype=np.int32))
                   for i, y in enumerate(ys)]
    else:
        ys = rng.integers(0, L, size=count)
        ps = rng.uniform(peak[0], peak[1], size=count)
        hits = rng.random((count, n)) < ps[:, None]
        noise = rng.integers(0, L, size=(count, n))
        mat = np.where(hits, ys[:, None], noise).astype(np.int32)
        samples = [SampleVotes(f"rand-{i}", int(ys[i]), mat[i]) for i in range(count)]
    return VoteTable(scheme, L, samples)


# ------------------------------------------------------------------ reports

REPORT_COLUMNS = ["analyzer", "patch_side", "k", "clean_acc", "cert_acc",
                  "mean_mink", "median_mink"]
EXACT_COLUMNS = ["num_samples", "clean_count", "cert_count", "mink_total"]


def _round_half_up(x: Fraction, places: int) -> str:
    scale = 10 ** places
    scaled = x * scale
    q = (scaled.numerator * 2 + scaled.denominator) // (2 * scaled.denominator)
    if places == 0:
        return str(q)
    return f"{q // scale}.{q % scale:0{places}d}"


def render_percent(x: Fraction) -> str:
    return _round_half_up(Fraction(x) * 100, 1)


def _exact_decimal(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return str(Decimal(x.numerator) / Decimal(x.denominator))


def emit_report(report: DatasetReport, fmt: str = "csv") -> str:
    rows = [
        [r.analyzer, r.patch_side, r.k, render_percent(r.clean_acc), render_percent(r.cert_acc),
         _round_half_up(r.mean_mink, 2), _exact_decimal(r.median_mink)]
        for r in report.rows
    ]
    if fmt == "markdown":
        lines = ["| " + " | ".join(REPORT_COLUMNS) + " |",
                 "|" + "|".join("---" for _ in REPORT_COLUMNS) + "|"]
        lines += ["| " + " | ".join(str(v) for v in row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = _stdio.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS + EXACT_COLUMNS)
    for r, row in zip(report.rows, rows):
        w.writerow(row + [r.num_samples, r.clean_count, r.cert_count, r.mink_total])
    return buf.getvalue()


def parse_report(text: str) -> DatasetReport:
    """Rebuild a report from CSV, using the exact count columns only."""
    reader = csv.DictReader(_stdio.StringIO(text))
    missing = set(REPORT_COLUMNS + EXACT_COLUMNS) - set(reader.fieldnames or [])
    if missing:
        raise VoteDataError(f"report is missing columns {sorted(missing)}")
    report = DatasetReport()
    for rec in reader:
        report.rows.append(ReportRow(
            analyzer=Analyzer(rec["analyzer"]).value,
            patch_side=int(rec["patch_side"]),
            k=int(rec["k"]),
            num_samples=int(rec["num_samples"]),
            clean_count=int(rec["clean_count"]),
            cert_count=int(rec["cert_count"]),
            mink_total=int(rec["mink_total"]),
            median_mink=Fraction(rec["median_mink"]),
        ))
    return report
