"""The tomography pipeline: from ad logs to inferred sharing edges.

Stages: enumerate blocking configurations -> collate per-(advertiser,
persona, run) count-vector records -> chi-squared change flagging against the
pooled control -> run segmentation into cross-validation and holdout sets ->
per-advertiser grid-searched random forest -> holdout-gated mean-plus-sigma
information-gain rule -> precision/recall against the planted graph.

Flagging is deliberately conservative: a record whose table cannot support a
valid chi-squared test (too little co-occurring mass after low-expectancy
column collapsing, e.g. because the advertiser won few or no auctions for
that persona) is flagged False.  Not winning auctions is noise, not evidence.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError
from .forest import (
    ForestParams,
    HyperGrid,
    Sample,
    accuracy,
    cross_validate_grid,
    feature_importance,
    train_forest,
)
from .ecosim.types import BlockingConfig, DeliveredAd
from .rng import substream, substream_key
from .stattest import DegenerateTableError, StatConfig, TestResult, chi_square_independence, welch_t_test
from .textvec import Corpus, CountVector, cosine_similarity, merge_vectors, vectorize_tokens


class MissingControlError(ValueError):
    pass


@dataclass(frozen=True)
class VectorRecord:
    advertiser: str
    persona: str
    run: int
    vector: CountVector
    is_different_from_control: bool | None = None


@dataclass(frozen=True)
class AdvertiserReport:
    advertiser: str
    params: ForestParams
    cv_accuracy: float
    holdout_accuracy: float
    gains: dict[str, float]           # tracker id -> normalized information gain
    inferred: tuple[str, ...]         # tracker ids passing the mean + 1 sigma rule


@dataclass(frozen=True)
class H1Result:
    groups: tuple[str, ...]
    means: dict[tuple[str, str], float]
    tests: dict[tuple[str, str], TestResult]   # within-vs-across Welch tests


def enumerate_blocking_configs(trackers: Sequence[str]) -> list[BlockingConfig]:
    """All 2^k blocked-tracker subsets in ascending bitmask order; bit i
    corresponds to the i-th tracker in lexicographic order."""
    universe = tuple(sorted(trackers))
    if len(set(universe)) != len(universe):
        raise ConfigError("duplicate tracker ids")
    k = len(universe)
    out = []
    for mask in range(1 << k):
        blocked = tuple(universe[i] for i in range(k) if mask >> i & 1)
        out.append(BlockingConfig(blocked, mask))
    return out


def collate(adlog: Iterable[DeliveredAd], corpus: Corpus) -> list[VectorRecord]:
    """One record per (advertiser, persona, run) with all creative count
    vectors summed.  The grid is the full cross product of the advertisers,
    personas, and runs observed in the log, so advertisers that won nothing
    for some (persona, run) contribute an all-zero vector."""
    ads = list(adlog)
    advertisers = sorted({a.advertiser for a in ads})
    personas = sorted({a.persona for a in ads})
    runs = sorted({a.run for a in ads})
    merged: dict[tuple[str, str, int], CountVector] = {}
    for ad in ads:
        key = (ad.advertiser, ad.persona, ad.run)
        vec = vectorize_tokens(ad.tokens, corpus)
        merged[key] = merge_vectors([merged[key], vec]) if key in merged else vec
    empty = CountVector({}, corpus.size)
    return [
        VectorRecord(a, p, r, merged.get((a, p, r), empty))
        for a in advertisers for p in personas for r in runs
    ]


def flag_changes(records: Sequence[VectorRecord], control_records: Sequence[VectorRecord],
                 config: StatConfig = StatConfig()) -> list[VectorRecord]:
    """Flag each record whose count vector is statistically dependent on its
    source (persona vs pooled control) at the configured alpha.

    Controls are pooled per (advertiser, run) across all control personas.
    Records whose 2 x V table is degenerate are flagged False.
    """
    pooled: dict[tuple[str, int], CountVector] = {}
    for rec in control_records:
        key = (rec.advertiser, rec.run)
        pooled[key] = merge_vectors([pooled[key], rec.vector]) if key in pooled else rec.vector
    control_dense: dict[tuple[str, int], np.ndarray] = {
        key: vec.to_dense() for key, vec in pooled.items()}
    out = []
    for rec in records:
        key = (rec.advertiser, rec.run)
        if key not in control_dense:
            raise MissingControlError(
                f"no control record for advertiser {rec.advertiser!r} run {rec.run}")
        table = np.vstack([control_dense[key], rec.vector.to_dense()])
        try:
            result = chi_square_independence(table, config)
            flag = result.p_value < config.alpha
        except DegenerateTableError:
            flag = False
        out.append(replace(rec, is_different_from_control=flag))
    return out


def segment_records(records: Sequence[VectorRecord], runs: int, holdout_runs: int,
                    seed: int) -> tuple[list[VectorRecord], list[VectorRecord]]:
    """Split records by run index into (cross-validation, holdout) sets.

    The holdout runs are one seed-derived draw shared by every (advertiser,
    persona) pair, so each pair contributes exactly ``holdout_runs`` holdout
    records and ``runs - holdout_runs`` CV records.
    """
    if not 0 <= holdout_runs < runs:
        raise ConfigError(f"holdout_runs must be in [0, runs), got {holdout_runs}")
    per_pair: dict[tuple[str, str], set[int]] = {}
    for rec in records:
        per_pair.setdefault((rec.advertiser, rec.persona), set()).add(rec.run)
    expected = set(range(runs))
    for pair, seen in per_pair.items():
        if seen != expected:
            raise ConfigError(
                f"pair {pair} has records for runs {sorted(seen)}, expected 0..{runs - 1}")
    rng = substream(seed, "segment")
    holdout_set = set(int(r) for r in rng.permutation(runs)[:holdout_runs])
    cv = [r for r in records if r.run not in holdout_set]
    holdout = [r for r in records if r.run in holdout_set]
    return cv, holdout


def infer_relationships(gains, holdout_accuracy: float, accuracy_threshold: float,
                        tracker_ids: Sequence[str]) -> tuple[str, ...]:
    """Trackers whose gain strictly exceeds mean + 1 population sigma, gated
    on holdout accuracy.

    Strict inequality means a uniform gain vector (sigma 0) infers nothing,
    and any model below the accuracy threshold infers nothing.
    """
    if not 0.0 < accuracy_threshold <= 1.0:
        raise ConfigError(f"accuracy_threshold must be in (0, 1], got {accuracy_threshold}")
    gains = np.asarray(gains, dtype=float)
    if len(gains) != len(tracker_ids):
        raise ConfigError(f"{len(gains)} gains for {len(tracker_ids)} trackers")
    if holdout_accuracy < accuracy_threshold:
        return ()
    cutoff = float(gains.mean()) + float(gains.std(ddof=0))
    return tuple(t for t, g in zip(tracker_ids, gains) if g > cutoff)


def _to_samples(records: Sequence[VectorRecord], trackers: Sequence[str],
                blocking_by_persona: Mapping[str, Iterable[str]]) -> list[Sample]:
    samples = []
    for rec in records:
        if rec.is_different_from_control is None:
            raise ConfigError("flag stage required: records carry no "
                              "is_different_from_control flags")
        blocked = set(blocking_by_persona[rec.persona])
        features = tuple(1 if t in blocked else 0 for t in trackers)
        samples.append(Sample(features, rec.is_different_from_control, rec.persona))
    return samples


def run_inference(cv_records: Sequence[VectorRecord], holdout_records: Sequence[VectorRecord],
                  grid: HyperGrid, folds: int, seed: int, trackers: Sequence[str],
                  blocking_by_persona: Mapping[str, Iterable[str]],
                  accuracy_threshold: float = 0.6) -> list[AdvertiserReport]:
    """Fit one model per advertiser and apply the inference rule.

    Every advertiser appears in the output with its accuracies even when the
    holdout gate empties its inferred set.
    """
    trackers = tuple(sorted(trackers))
    by_advertiser: dict[str, list[VectorRecord]] = {}
    for rec in cv_records:
        by_advertiser.setdefault(rec.advertiser, []).append(rec)
    holdout_by_advertiser: dict[str, list[VectorRecord]] = {}
    for rec in holdout_records:
        holdout_by_advertiser.setdefault(rec.advertiser, []).append(rec)

    reports = []
    for advertiser in sorted(by_advertiser):
        cv_samples = _to_samples(by_advertiser[advertiser], trackers, blocking_by_persona)
        holdout_samples = _to_samples(
            holdout_by_advertiser.get(advertiser, []), trackers, blocking_by_persona)
        if not holdout_samples:
            raise ConfigError(f"advertiser {advertiser!r} has no holdout records")
        adv_seed = substream_key(seed, "infer", advertiser)
        params, cv_acc = cross_validate_grid(cv_samples, grid, folds, adv_seed)
        model = train_forest(cv_samples, params, adv_seed)
        holdout_acc = accuracy(model, holdout_samples)
        gains = feature_importance(model)
        inferred = infer_relationships(gains, holdout_acc, accuracy_threshold, trackers)
        reports.append(AdvertiserReport(
            advertiser=advertiser, params=params, cv_accuracy=cv_acc,
            holdout_accuracy=holdout_acc,
            gains={t: float(g) for t, g in zip(trackers, gains)},
            inferred=inferred))
    return reports


def evaluate(inferred: Iterable[tuple[str, str]],
             truth: Iterable[tuple[str, str]]) -> tuple[float, float]:
    """Precision and recall of inferred (tracker, advertiser) edges.

    An empty side scores 1.0 by convention: no inferences means no false
    positives, an empty truth set means nothing was missed.
    """
    inferred = set(inferred)
    truth = set(truth)
    hits = len(inferred & truth)
    precision = hits / len(inferred) if inferred else 1.0
    recall = hits / len(truth) if truth else 1.0
    return precision, recall


def h1_similarity_matrix(vectors: Mapping[tuple[str, int], CountVector]) -> H1Result:
    """Interest-dependence analysis over per-(group, run) document vectors.

    For each group pair the mean of the cosine-similarity distribution is
    reported (within-group distributions exclude self-pairs); each
    within-vs-across pair is Welch-tested two-sided.  A group needs at least
    three runs to carry two within-group pairs, the Welch minimum, so pairs
    involving a two-run group report a mean but no test.
    """
    groups = tuple(sorted({g for g, _ in vectors}))
    runs_by_group = {g: sorted(r for gg, r in vectors if gg == g) for g in groups}
    for g, runs in runs_by_group.items():
        if len(runs) < 2:
            raise ConfigError(f"group {g!r} has fewer than 2 runs")

    def dist(g1: str, g2: str) -> list[float]:
        if g1 == g2:
            runs = runs_by_group[g1]
            return [cosine_similarity(vectors[(g1, r)], vectors[(g1, s)])
                    for i, r in enumerate(runs) for s in runs[i + 1:]]
        return [cosine_similarity(vectors[(g1, r)], vectors[(g2, s)])
                for r in runs_by_group[g1] for s in runs_by_group[g2]]

    means: dict[tuple[str, str], float] = {}
    tests: dict[tuple[str, str], TestResult] = {}
    dists = {(g1, g2): dist(g1, g2) for g1 in groups for g2 in groups}
    for g1 in groups:
        for g2 in groups:
            means[(g1, g2)] = float(np.mean(dists[(g1, g2)]))
            if g1 != g2 and len(dists[(g1, g1)]) >= 2 and len(dists[(g1, g2)]) >= 2:
                tests[(g1, g2)] = welch_t_test(dists[(g1, g1)], dists[(g1, g2)])
    return H1Result(groups=groups, means=means, tests=tests)
