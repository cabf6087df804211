"""Component-wise and overall exact-match accuracy over predicted/gold DVQ pairs.

A pair is scored on three components (chart type, ordered x/y axes, and the
data-transformation clauses) plus overall equality. Unparsable predictions count
as failures on all four; an unparsable gold query is a fatal fixture error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .dvq import DvqError, decompose, parse_dvq, render_canonical


class GoldUnparsable(Exception):
    """A gold query failed to parse; the fixture corpus is corrupt."""


class EmptyCorpus(Exception):
    """No pairs to evaluate."""


@dataclass(frozen=True)
class MatchRecord:
    id: str
    vis_match: bool
    axis_match: bool
    data_match: bool
    overall_match: bool
    pred_parse_ok: bool
    gold_parse_ok: bool = True


@dataclass(frozen=True)
class EvalSummary:
    n: int
    n_c: int
    n_vis: int
    n_axis: int
    n_data: int
    acc: float
    vis_acc: float
    axis_acc: float
    data_acc: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "n_c": self.n_c,
            "n_vis": self.n_vis,
            "n_axis": self.n_axis,
            "n_data": self.n_data,
            "acc": self.acc,
            "vis_acc": self.vis_acc,
            "axis_acc": self.axis_acc,
            "data_acc": self.data_acc,
        }


def match_pair(pred: str, gold: str, pair_id: str = "") -> MatchRecord:
    """Score one prediction against its gold query."""
    try:
        gold_query = parse_dvq(gold)
    except DvqError as exc:
        raise GoldUnparsable(f"gold query {pair_id or gold!r} does not parse: {exc}") from exc
    try:
        pred_query = parse_dvq(pred)
    except DvqError:
        return MatchRecord(pair_id, False, False, False, False, pred_parse_ok=False)

    pred_parts = decompose(pred_query, fold_identifiers=True)
    gold_parts = decompose(gold_query, fold_identifiers=True)
    vis = pred_parts.vis == gold_parts.vis
    axis = pred_parts.axes == gold_parts.axes
    data = pred_parts.data == gold_parts.data
    overall = render_canonical(pred_query, fold_identifiers=True) == render_canonical(
        gold_query, fold_identifiers=True
    )
    return MatchRecord(pair_id, vis, axis, data, overall, pred_parse_ok=True)


def summarize(records: Iterable[MatchRecord]) -> EvalSummary:
    """Reduce match records to corpus-level counts and accuracies."""
    records = list(records)
    if not records:
        raise EmptyCorpus("no match records to summarize")
    n = len(records)
    n_c = sum(r.overall_match for r in records)
    n_vis = sum(r.vis_match for r in records)
    n_axis = sum(r.axis_match for r in records)
    n_data = sum(r.data_match for r in records)
    return EvalSummary(
        n=n,
        n_c=n_c,
        n_vis=n_vis,
        n_axis=n_axis,
        n_data=n_data,
        acc=n_c / n,
        vis_acc=n_vis / n,
        axis_acc=n_axis / n,
        data_acc=n_data / n,
    )


def evaluate_corpus(pairs: Sequence[tuple[str, str]]) -> EvalSummary:
    """Score a corpus of (pred, gold) pairs."""
    if not pairs:
        raise EmptyCorpus("no pairs to evaluate")
    records = [match_pair(pred, gold, pair_id=str(i)) for i, (pred, gold) in enumerate(pairs)]
    return summarize(records)
