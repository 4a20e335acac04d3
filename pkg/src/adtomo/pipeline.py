"""Pipeline orchestration: stages, artifacts, and the full run.

Every stage reads and writes fixed-name artifacts under one output directory:

    adlog.jsonl       delivered creatives        (simulate)
    requestlog.jsonl  redirect chains            (simulate)
    bidlog.jsonl      client-side HB bids        (simulate)
    personas.json     persona manifest           (simulate)
    world.json        canonical static world     (simulate)
    corpus.json       token -> column order      (flag)
    records.jsonl     flagged vector records     (flag)
    report.json/.csv  inference report           (infer)
    sync_pairs.json   cookie-sync detection      (syncdetect)
    evaluation.json   precision/recall vs truth  (evaluate)
    h1_matrix.csv     similarity means + tests   (h1)

``run`` composes simulate -> flag -> infer -> syncdetect -> evaluate through
these same functions, so running stages individually over the emitted
intermediates reproduces its artifacts byte for byte.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

from .ecosim import SimConfig, build_world, run_simulation, sim_config_from_dict
from .ecosim.types import DeliveredAd, RequestLogEntry
from .errors import ConfigError
from .forest import HyperGrid
from .jsonio import read_json, read_jsonl, write_json, write_jsonl
from .stattest import StatConfig, StatError
from .syncdetect import detect_cookie_sync
from .textvec import Corpus, CountVector, vectorize_tokens
from .tomography import (
    VectorRecord,
    collate,
    evaluate,
    flag_changes,
    h1_similarity_matrix,
    run_inference,
    segment_records,
)

ARTIFACTS = ("adlog.jsonl", "requestlog.jsonl", "bidlog.jsonl", "personas.json",
             "world.json", "corpus.json", "records.jsonl", "report.json",
             "report.csv", "sync_pairs.json", "evaluation.json")


@dataclass(frozen=True)
class PipelineConfig:
    sim: SimConfig
    stats: StatConfig
    grid: HyperGrid
    folds: int
    holdout_runs: int
    accuracy_threshold: float
    seed: int
    output_dir: str
    resolved: dict  # the config document as loaded, with the effective seed

    def with_seed(self, seed: int) -> "PipelineConfig":
        resolved = dict(self.resolved)
        resolved["seed"] = seed
        return replace(self, seed=seed, resolved=resolved)


def _parse_grid(d: dict) -> HyperGrid:
    try:
        return HyperGrid(
            n_trees=tuple(d.get("n_trees", (50, 100, 200))),
            max_depth=tuple(d.get("max_depth", (3, 5, None))),
            features_per_split=tuple(d.get("features_per_split", ("sqrt", "all"))),
            min_leaf=tuple(d.get("min_leaf", (1, 2))),
        )
    except ValueError as e:
        raise ConfigError(str(e), "grid") from None


def load_pipeline_config(source) -> PipelineConfig:
    """Build a validated PipelineConfig from a dict or a JSON file path."""
    doc = read_json(source) if not isinstance(source, dict) else source
    if "sim" not in doc:
        raise ConfigError("missing required field", "sim")
    sim = sim_config_from_dict(doc["sim"])
    try:
        stats = StatConfig(**doc.get("stats", {}))
    except (TypeError, StatError) as e:
        raise ConfigError(str(e), "stats") from None
    grid = _parse_grid(doc.get("grid", {}))
    folds = doc.get("folds", 4)
    holdout_runs = doc.get("holdout_runs", 2)
    threshold = doc.get("accuracy_threshold", 0.6)
    seed = doc.get("seed", sim.seed)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer", "seed")
    if not isinstance(holdout_runs, int) or not 0 <= holdout_runs < sim.runs:
        raise ConfigError(
            f"holdout_runs must be in [0, runs={sim.runs}), got {holdout_runs}",
            "holdout_runs")
    cv_runs = sim.runs - holdout_runs
    if not isinstance(folds, int) or folds < 2:
        raise ConfigError(f"folds must be an integer >= 2, got {folds}", "folds")
    if cv_runs % folds != 0:
        raise ConfigError(
            f"folds must divide runs - holdout_runs = {cv_runs}, got {folds}", "folds")
    if not isinstance(threshold, (int, float)) or not 0 < threshold <= 1:
        raise ConfigError(f"accuracy_threshold must be in (0, 1], got {threshold}",
                          "accuracy_threshold")
    resolved = dict(doc)
    resolved["seed"] = seed
    return PipelineConfig(
        sim=sim, stats=stats, grid=grid, folds=folds, holdout_runs=holdout_runs,
        accuracy_threshold=float(threshold), seed=seed,
        output_dir=doc.get("output_dir", "out"), resolved=resolved)


# --------------------------------------------------------------------------
# artifact (de)serialization
# --------------------------------------------------------------------------

def _persona_manifest(cfg: PipelineConfig) -> list[dict]:
    return [{"id": p.id, "group": p.group, "blocked": list(p.blocking.blocked),
             "is_control": p.is_control} for p in cfg.sim.personas]


def _read_personas(out_dir: Path) -> list[dict]:
    return read_json(out_dir / "personas.json")


def _read_adlog(out_dir: Path) -> list[DeliveredAd]:
    return [DeliveredAd(r["run"], r["persona"], r["slot"], r["advertiser"],
                        tuple(r["tokens"]))
            for r in read_jsonl(out_dir / "adlog.jsonl")]


def _read_requestlog(out_dir: Path) -> list[RequestLogEntry]:
    return [RequestLogEntry(r["run"], r["persona"], r["chain_position"],
                            r["source_domain"], r["destination_domain"],
                            r["cookie_sent"], r["uid_param"])
            for r in read_jsonl(out_dir / "requestlog.jsonl")]


def _read_corpus(out_dir: Path) -> Corpus:
    tokens = read_json(out_dir / "corpus.json")["tokens"]
    return Corpus({t: i for i, t in enumerate(tokens)})


def _read_records(out_dir: Path, corpus: Corpus) -> list[VectorRecord]:
    index = corpus.word_index
    out = []
    for r in read_jsonl(out_dir / "records.jsonl"):
        try:
            counts = {index[token]: c for token, c in r["counts"].items()}
        except KeyError as exc:
            raise ConfigError(f"records.jsonl references token {exc.args[0]!r} "
                              "missing from corpus.json", "records") from None
        out.append(VectorRecord(
            r["advertiser"], r["persona"], r["run"],
            CountVector(counts, corpus.size), r["is_different_from_control"]))
    return out


# --------------------------------------------------------------------------
# stages
# --------------------------------------------------------------------------

def stage_simulate(cfg: PipelineConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    world = build_world(cfg.sim, cfg.seed)
    logs = run_simulation(world, cfg.sim.personas, cfg.sim.runs, cfg.seed)
    write_jsonl(out_dir / "adlog.jsonl",
                ({"run": a.run, "persona": a.persona, "slot": a.slot,
                  "advertiser": a.advertiser, "tokens": list(a.tokens)}
                 for a in logs.ads))
    write_jsonl(out_dir / "requestlog.jsonl",
                ({"run": e.run, "persona": e.persona, "chain_position": e.chain_position,
                  "source_domain": e.source_domain,
                  "destination_domain": e.destination_domain,
                  "cookie_sent": e.cookie_sent, "uid_param": e.uid_param}
                 for e in logs.requests))
    write_jsonl(out_dir / "bidlog.jsonl",
                ({"run": b.run, "persona": b.persona, "slot": b.slot,
                  "advertiser": b.advertiser, "bid": b.bid}
                 for b in logs.bids))
    write_json(out_dir / "personas.json", _persona_manifest(cfg))
    write_json(out_dir / "world.json", world.canonical_dict())


def stage_flag(cfg: PipelineConfig, out_dir: Path) -> None:
    ads = _read_adlog(out_dir)
    personas = _read_personas(out_dir)
    is_control = {p["id"]: p["is_control"] for p in personas}
    if not any(is_control.values()):
        raise ConfigError("flag stage requires at least one control persona",
                          "run.personas")
    tokens = sorted({t for a in ads for t in a.tokens})
    corpus = Corpus({t: i for i, t in enumerate(tokens)})
    write_json(out_dir / "corpus.json", {"tokens": tokens})
    records = collate(ads, corpus)
    persona_records = [r for r in records if not is_control.get(r.persona, False)]
    control_records = [r for r in records if is_control.get(r.persona, False)]
    flagged = flag_changes(persona_records, control_records, cfg.stats)
    token_of = {i: t for t, i in corpus.word_index.items()}
    write_jsonl(out_dir / "records.jsonl",
                ({"advertiser": r.advertiser, "persona": r.persona, "run": r.run,
                  "counts": {token_of[i]: r.vector.counts[i]
                             for i in sorted(r.vector.counts)},
                  "is_different_from_control": r.is_different_from_control}
                 for r in flagged))


def _report_meta(cfg: PipelineConfig) -> dict:
    return {
        "config": cfg.resolved,
        "notes": {
            "tests": "two-sided",
            "importances": "normalized to sum 1",
            "folds": cfg.folds,
            "inference_rule": "gain > mean + 1 population sigma, gated on holdout accuracy",
        },
    }


def stage_infer(cfg: PipelineConfig, out_dir: Path) -> None:
    corpus = _read_corpus(out_dir)
    records = _read_records(out_dir, corpus)
    if any(r.is_different_from_control is None for r in records):
        raise ConfigError("flag stage required: records carry no flags", "records")
    personas = _read_personas(out_dir)
    blocking = {p["id"]: tuple(p["blocked"]) for p in personas}
    trackers = list(cfg.sim.world.tracker_ids)
    cv, holdout = segment_records(records, cfg.sim.runs, cfg.holdout_runs, cfg.seed)
    reports = run_inference(cv, holdout, cfg.grid, cfg.folds, cfg.seed, trackers,
                            blocking, cfg.accuracy_threshold)
    truth = cfg.sim.world.graph.as_pairs()
    payload = _report_meta(cfg)
    payload["trackers"] = trackers
    payload["advertisers"] = [
        {"advertiser": r.advertiser,
         "params": {"n_trees": r.params.n_trees, "max_depth": r.params.max_depth,
                    "features_per_split": r.params.features_per_split,
                    "min_leaf": r.params.min_leaf},
         "cv_accuracy": r.cv_accuracy,
         "holdout_accuracy": r.holdout_accuracy,
         "gains": r.gains,
         "inferred": list(r.inferred)}
        for r in reports]
    write_json(out_dir / "report.json", payload)
    with (out_dir / "report.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["advertiser", "cv_accuracy", "holdout_accuracy", "tracker",
                         "gain", "inferred", "in_ground_truth"])
        for r in reports:
            for t in trackers:
                writer.writerow([
                    r.advertiser, repr(r.cv_accuracy), repr(r.holdout_accuracy), t,
                    repr(r.gains[t]), t in r.inferred, (t, r.advertiser) in truth])


def stage_syncdetect(cfg: PipelineConfig, out_dir: Path) -> None:
    report = detect_cookie_sync(_read_requestlog(out_dir))

    def rows(pairs):
        return [{"initiator": p.initiator, "receiver": p.receiver,
                 "evidence": [list(e) for e in p.evidence]} for p in pairs]

    write_json(out_dir / "sync_pairs.json",
               {"pairs": rows(report.pairs),
                "weak_candidates": rows(report.weak_candidates)})


def stage_evaluate(cfg: PipelineConfig, out_dir: Path) -> None:
    report = read_json(out_dir / "report.json")
    inferred = {(t, row["advertiser"])
                for row in report["advertisers"] for t in row["inferred"]}
    truth = cfg.sim.world.graph.as_pairs()
    precision, recall = evaluate(inferred, truth)
    write_json(out_dir / "evaluation.json", {
        "precision": precision,
        "recall": recall,
        "inferred_edges": sorted(list(e) for e in inferred),
        "true_edges": sorted(list(e) for e in truth),
    })


def stage_h1(cfg: PipelineConfig, out_dir: Path) -> None:
    ads = _read_adlog(out_dir)
    personas = _read_personas(out_dir)
    group_of = {p["id"]: p["group"] for p in personas}
    tokens = sorted({t for a in ads for t in a.tokens})
    corpus = Corpus({t: i for i, t in enumerate(tokens)})
    grouped: dict[tuple[str, int], list[str]] = {}
    for ad in ads:
        grouped.setdefault((group_of[ad.persona], ad.run), []).extend(ad.tokens)
    vectors = {key: vectorize_tokens(toks, corpus) for key, toks in grouped.items()}
    result = h1_similarity_matrix(vectors)
    with (out_dir / "h1_matrix.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["group_a", "group_b", "mean_similarity", "welch_t",
                         "welch_df", "welch_p"])
        for g1 in result.groups:
            for g2 in result.groups:
                test = result.tests.get((g1, g2))
                writer.writerow([
                    g1, g2, repr(result.means[(g1, g2)]),
                    "" if test is None else repr(test.statistic),
                    "" if test is None else repr(test.df),
                    "" if test is None else repr(test.p_value)])


def run_pipeline(cfg: PipelineConfig, out_dir: Path) -> None:
    """simulate -> flag -> infer -> syncdetect -> evaluate."""
    stage_simulate(cfg, out_dir)
    stage_flag(cfg, out_dir)
    stage_infer(cfg, out_dir)
    stage_syncdetect(cfg, out_dir)
    stage_evaluate(cfg, out_dir)
