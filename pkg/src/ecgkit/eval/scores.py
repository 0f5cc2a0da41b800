"""Score tables, significant-win counting and radar normalization."""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

from ..exceptions import FewerThanTwoModels, InvalidScoreTable
from .stats import PairedTTestResult, paired_ttest

SCORE_COLUMNS = ("dataset", "model", "metric", "seed", "value")


class ScoreRow(NamedTuple):
    dataset: str
    model: str
    metric: str
    seed: str
    value: float


class ScoreTable:
    """Per-seed scores keyed by (dataset, model, metric).

    Within every (dataset, metric) column all models must share one seed set,
    since significance is tested on seed-paired differences.
    """

    def __init__(self, rows: Iterable):
        cells: dict[tuple[str, str, str], dict[str, float]] = defaultdict(dict)
        for raw in rows:
            row = ScoreRow(str(raw[0]), str(raw[1]), str(raw[2]), str(raw[3]), float(raw[4]))
            if not math.isfinite(row.value):
                raise InvalidScoreTable(f"non-finite value in {row[:4]}")
            cell = cells[(row.dataset, row.model, row.metric)]
            if row.seed in cell:
                raise InvalidScoreTable(f"duplicate row {row[:4]}")
            cell[row.seed] = row.value
        if not cells:
            raise InvalidScoreTable("empty score table")
        self._cells = dict(cells)
        for (dataset, metric), models in self.columns().items():
            seed_sets = {frozenset(cells[(dataset, m, metric)]) for m in models}
            if len(seed_sets) > 1:
                raise InvalidScoreTable(
                    f"models in ({dataset}, {metric}) were scored on different seeds"
                )

    def columns(self) -> dict[tuple[str, str], list[str]]:
        """(dataset, metric) -> sorted model names."""
        out: dict[tuple[str, str], list[str]] = defaultdict(list)
        for dataset, model, metric in self._cells:
            out[(dataset, metric)].append(model)
        return {k: sorted(v) for k, v in sorted(out.items())}

    @property
    def models(self) -> list[str]:
        return sorted({m for _, m, _ in self._cells})

    def seeds(self, dataset: str, metric: str) -> list[str]:
        model = self.columns()[(dataset, metric)][0]
        return sorted(self._cells[(dataset, model, metric)], key=_seed_key)

    def values(self, dataset: str, model: str, metric: str) -> list[float]:
        cell = self._cells[(dataset, model, metric)]
        return [cell[s] for s in sorted(cell, key=_seed_key)]

    def mean(self, dataset: str, model: str, metric: str) -> float:
        vals = self.values(dataset, model, metric)
        return math.fsum(vals) / len(vals)

    def rows(self) -> list[ScoreRow]:
        out = []
        for (dataset, model, metric), cell in sorted(self._cells.items()):
            for seed in sorted(cell, key=_seed_key):
                out.append(ScoreRow(dataset, model, metric, seed, cell[seed]))
        return out

    def __len__(self):
        return sum(len(c) for c in self._cells.values())

    # ---- CSV

    @classmethod
    def read_csv(cls, path) -> "ScoreTable":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(SCORE_COLUMNS) - set(reader.fieldnames):
                raise InvalidScoreTable(f"{path}: expected columns {','.join(SCORE_COLUMNS)}")
            try:
                return cls([tuple(r[c] for c in SCORE_COLUMNS) for r in reader])
            except ValueError as exc:
                if isinstance(exc, InvalidScoreTable):
                    raise
                raise InvalidScoreTable(f"{path}: {exc}") from exc

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SCORE_COLUMNS)
        for r in self.rows():
            w.writerow([r.dataset, r.model, r.metric, r.seed, repr(r.value)])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def _seed_key(seed: str):
    try:
        return (0, int(seed), seed)
    except ValueError:
        return (1, 0, seed)


@dataclass(frozen=True)
class CellTest:
    dataset: str
    metric: str
    top: str
    runner_up: str
    result: PairedTTestResult
    significant: bool


@dataclass(frozen=True)
class WinReport:
    wins: dict[str, int]
    tests: tuple[CellTest, ...]

    def wins_csv(self) -> str:
        lines = ["model,wins"]
        for model, n in sorted(self.wins.items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"{model},{n}")
        return "\n".join(lines) + "\n"

    def tests_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dataset", "metric", "top", "runner_up", "mean_diff", "t", "p", "n",
                    "significant", "degenerate"])
        for c in self.tests:
            r = c.result
            w.writerow([c.dataset, c.metric, c.top, c.runner_up, repr(r.mean_diff), repr(r.t),
                        repr(r.p), r.n, int(c.significant), int(r.degenerate)])
        return buf.getvalue()


def rank_models(table: ScoreTable, dataset: str, metric: str) -> list[str]:
    """Models by descending mean; ties broken by name."""
    models = table.columns()[(dataset, metric)]
    return sorted(models, key=lambda m: (-table.mean(dataset, m, metric), m))


def count_significant_wins(table: ScoreTable, alpha: float = 0.05) -> WinReport:
    """Credit the top model of each (dataset, metric) when it beats the runner-up at ``p < alpha``."""
    wins = {m: 0 for m in table.models}
    tests = []
    for dataset, metric in table.columns():
        ranked = rank_models(table, dataset, metric)
        if len(ranked) < 2:
            raise FewerThanTwoModels(f"({dataset}, {metric}) has only {ranked}")
        top, second = ranked[0], ranked[1]
        res = paired_ttest(table.values(dataset, top, metric), table.values(dataset, second, metric))
        sig = res.p < alpha
        if sig:
            wins[top] += 1
        tests.append(CellTest(dataset, metric, top, second, res, sig))
    return WinReport(wins, tuple(tests))


class RadarPoint(NamedTuple):
    dataset: str
    metric: str
    model: str
    normalized: float
    constant: bool


def normalize_radar(table: ScoreTable) -> list[RadarPoint]:
    """Min-max scale each (dataset, metric) column of model means to [0, 1].

    A column whose means are all equal maps to 0.5 and is flagged.
    """
    out = []
    for (dataset, metric), models in table.columns().items():
        means = {m: table.mean(dataset, m, metric) for m in models}
        lo, hi = min(means.values()), max(means.values())
        for m in models:
            if hi > lo:
                out.append(RadarPoint(dataset, metric, m, (means[m] - lo) / (hi - lo), False))
            else:
                out.append(RadarPoint(dataset, metric, m, 0.5, True))
    return out


def radar_csv(points: Iterable[RadarPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["dataset", "metric", "model", "normalized"])
    for p in points:
        w.writerow([p.dataset, p.metric, p.model, repr(p.normalized)])
    return buf.getvalue()
