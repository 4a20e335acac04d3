"""Simulation config parsing, validation, and world construction.

The canonical encoding is one JSON document:

    {"world": {"generic_pool": [...], "groups": [...], "websites": [...],
               "trackers": [...], "advertisers": [...], "edges": [...],
               "slots": [...], "sync_pairs": [...]},
     "run":   {"personas": ..., "runs": N, "seed": S}}

``run.personas`` is either an explicit list of persona objects or an
enumeration spec ``{"group": g, "controls": c}`` that creates one persona per
blocked-tracker combination (2^k of them, ids ``p-<bitmask>``) plus ``c``
unblocked control personas (ids ``ctrl-<i>``).

Every validation failure raises ConfigError carrying the offending field
path, e.g. ``world.trackers[1].observe_prob``.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError
from .types import (
    Advertiser,
    AuctionSlot,
    BlockingConfig,
    InterestGroup,
    Persona,
    SharingEdge,
    SharingGraph,
    TrackerOrg,
    Website,
    World,
)


@dataclass(frozen=True)
class SimConfig:
    world: World          # validated static world (seed 0 placeholder)
    personas: tuple[Persona, ...]
    runs: int
    seed: int


def _require(mapping, key, path, kind=None):
    if key not in mapping:
        raise ConfigError("missing required field", f"{path}.{key}")
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(f"expected {kind.__name__}, got {type(value).__name__}",
                          f"{path}.{key}")
    return value


def _probability(value, path):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError("expected a number", path)
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"probability out of [0, 1]: {value}", path)
    return float(value)


def _non_negative(value, path):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError("expected a number", path)
    if value < 0:
        raise ConfigError(f"must be non-negative, got {value}", path)
    return float(value)


def _unique_ids(items, path):
    seen = set()
    for i, item in enumerate(items):
        if item.id in seen:
            raise ConfigError(f"duplicate id {item.id!r}", f"{path}[{i}].id")
        seen.add(item.id)
    return seen


def _parse_world(w: dict, seed: int) -> World:
    pool = tuple(sorted(set(_require(w, "generic_pool", "world", list))))

    groups = []
    for i, g in enumerate(_require(w, "groups", "world", list)):
        path = f"world.groups[{i}]"
        vocab_raw = _require(g, "vocabulary", path, list)
        if not vocab_raw:
            raise ConfigError("vocabulary must be non-empty", f"{path}.vocabulary")
        vocab = tuple(sorted(set(vocab_raw)))
        overlap = len(set(vocab) & set(pool)) / len(vocab)
        groups.append(InterestGroup(_require(g, "id", path, str), vocab, overlap))
    groups.sort(key=lambda g: g.id)
    group_ids = _unique_ids(groups, "world.groups")

    websites = []
    for i, s in enumerate(_require(w, "websites", "world", list)):
        path = f"world.websites[{i}]"
        group = s.get("group")
        if group is not None and group not in group_ids:
            raise ConfigError(f"dangling group reference {group!r}", f"{path}.group")
        websites.append(Website(_require(s, "id", path, str), group))
    websites.sort(key=lambda s: s.id)
    site_ids = _unique_ids(websites, "world.websites")

    trackers = []
    for i, t in enumerate(_require(w, "trackers", "world", list)):
        path = f"world.trackers[{i}]"
        coverage = tuple(sorted(set(_require(t, "site_coverage", path, list))))
        for site in coverage:
            if site not in site_ids:
                raise ConfigError(f"dangling website reference {site!r}",
                                  f"{path}.site_coverage")
        trackers.append(TrackerOrg(
            _require(t, "id", path, str), coverage,
            _probability(t.get("observe_prob", 1.0), f"{path}.observe_prob")))
    trackers.sort(key=lambda t: t.id)
    tracker_ids = _unique_ids(trackers, "world.trackers")

    advertisers = []
    for i, a in enumerate(_require(w, "advertisers", "world", list)):
        path = f"world.advertisers[{i}]"
        length = _require(a, "creative_length", path, int)
        if length < 1:
            raise ConfigError(f"creative_length must be >= 1, got {length}",
                              f"{path}.creative_length")
        advertisers.append(Advertiser(
            _require(a, "id", path, str),
            _non_negative(_require(a, "base_bid", path), f"{path}.base_bid"),
            _non_negative(a.get("knowledge_boost", 0.0), f"{path}.knowledge_boost"),
            _non_negative(a.get("bid_noise_sd", 0.0), f"{path}.bid_noise_sd"),
            length))
    advertisers.sort(key=lambda a: a.id)
    advertiser_ids = _unique_ids(advertisers, "world.advertisers")

    overlap_ids = tracker_ids & advertiser_ids
    if overlap_ids:
        raise ConfigError(
            f"tracker and advertiser id spaces must be disjoint, both contain {sorted(overlap_ids)}",
            "world")

    edges = []
    edge_pairs = set()
    for i, e in enumerate(w.get("edges", [])):
        path = f"world.edges[{i}]"
        tracker = _require(e, "tracker", path, str)
        advertiser = _require(e, "advertiser", path, str)
        if tracker not in tracker_ids:
            raise ConfigError(f"dangling tracker reference {tracker!r}", f"{path}.tracker")
        if advertiser not in advertiser_ids:
            raise ConfigError(f"dangling advertiser reference {advertiser!r}",
                              f"{path}.advertiser")
        if (tracker, advertiser) in edge_pairs:
            raise ConfigError(f"duplicate edge {(tracker, advertiser)}", path)
        edge_pairs.add((tracker, advertiser))
        edges.append(SharingEdge(
            tracker, advertiser,
            _probability(e.get("reliability", 1.0), f"{path}.reliability")))
    edges.sort(key=lambda e: (e.tracker, e.advertiser))

    slots = []
    for i, s in enumerate(_require(w, "slots", "world", list)):
        path = f"world.slots[{i}]"
        website = _require(s, "website", path, str)
        if website not in site_ids:
            raise ConfigError(f"dangling website reference {website!r}", f"{path}.website")
        tiers = s.get("tiers")
        if tiers is not None:
            parsed_tiers = []
            for j, tier in enumerate(tiers):
                for aid in tier:
                    if aid not in advertiser_ids:
                        raise ConfigError(f"dangling advertiser reference {aid!r}",
                                          f"{path}.tiers[{j}]")
                parsed_tiers.append(tuple(tier))
            tiers = tuple(parsed_tiers)
        timeout = _non_negative(s.get("timeout", 1.0), f"{path}.timeout")
        if timeout <= 0:
            raise ConfigError("timeout must be positive", f"{path}.timeout")
        slots.append(AuctionSlot(
            _require(s, "id", path, str), website,
            _non_negative(_require(s, "floor_price", path), f"{path}.floor_price"),
            _require(s, "mechanism", path, str), timeout, tiers))
    slots.sort(key=lambda s: s.id)
    _unique_ids(slots, "world.slots")

    sync_pairs = []
    known_domains = tracker_ids | advertiser_ids
    for i, pair in enumerate(w.get("sync_pairs", [])):
        path = f"world.sync_pairs[{i}]"
        if len(pair) != 2:
            raise ConfigError("expected [initiator, receiver]", path)
        src, dst = pair
        if src == dst:
            raise ConfigError("initiator and receiver must differ", path)
        for d in (src, dst):
            if d not in known_domains:
                raise ConfigError(f"dangling domain reference {d!r}", path)
        sync_pairs.append((src, dst))
    sync_pairs.sort()

    return World(
        groups=tuple(groups), websites=tuple(websites), trackers=tuple(trackers),
        advertisers=tuple(advertisers), graph=SharingGraph(tuple(edges)),
        slots=tuple(slots), sync_pairs=tuple(sync_pairs), generic_pool=pool,
        seed=seed)


def make_blocking(blocked, tracker_ids: tuple[str, ...]) -> BlockingConfig:
    """BlockingConfig with the bitmask laid out over the lexicographic
    tracker universe."""
    blocked = tuple(sorted(set(blocked)))
    mask = 0
    for t in blocked:
        try:
            mask |= 1 << tracker_ids.index(t)
        except ValueError:
            raise ConfigError(f"dangling tracker reference {t!r}", "personas.blocked") from None
    return BlockingConfig(blocked, mask)


def enumerate_personas(world: World, group: str, controls: int) -> tuple[Persona, ...]:
    """One persona per blocked-tracker combination plus unblocked controls."""
    if group not in world.group_by_id:
        raise ConfigError(f"dangling group reference {group!r}", "run.personas.group")
    k = len(world.tracker_ids)
    width = max(k, 1)
    personas = []
    for mask in range(1 << k):
        blocked = tuple(world.tracker_ids[i] for i in range(k) if mask >> i & 1)
        personas.append(Persona(
            id=f"p-{mask:0{width}b}", group=group,
            blocking=BlockingConfig(blocked, mask), is_control=False))
    for c in range(controls):
        personas.append(Persona(
            id=f"ctrl-{c:03d}", group=group,
            blocking=BlockingConfig((), 0), is_control=True))
    return tuple(personas)


def _parse_personas(spec, world: World) -> tuple[Persona, ...]:
    if isinstance(spec, dict):
        group = _require(spec, "group", "run.personas", str)
        controls = spec.get("controls", 0)
        if not isinstance(controls, int) or controls < 0:
            raise ConfigError("controls must be a non-negative integer",
                              "run.personas.controls")
        return enumerate_personas(world, group, controls)
    if not isinstance(spec, list) or not spec:
        raise ConfigError("personas must be a non-empty list or an enumeration spec",
                          "run.personas")
    personas = []
    seen = set()
    for i, p in enumerate(spec):
        path = f"run.personas[{i}]"
        pid = _require(p, "id", path, str)
        if pid in seen:
            raise ConfigError(f"duplicate id {pid!r}", f"{path}.id")
        seen.add(pid)
        group = _require(p, "group", path, str)
        if group not in world.group_by_id:
            raise ConfigError(f"dangling group reference {group!r}", f"{path}.group")
        personas.append(Persona(
            id=pid, group=group,
            blocking=make_blocking(p.get("blocked", []), world.tracker_ids),
            is_control=bool(p.get("is_control", False))))
    return tuple(sorted(personas, key=lambda p: p.id))


def sim_config_from_dict(d: dict) -> SimConfig:
    """Parse and validate a full simulation config document."""
    world_section = _require(d, "world", "sim", dict)
    run_section = _require(d, "run", "sim", dict)
    runs = _require(run_section, "runs", "run", int)
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}", "run.runs")
    seed = run_section.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer", "run.seed")
    world = _parse_world(world_section, seed)
    personas = _parse_personas(_require(run_section, "personas", "run"), world)
    return SimConfig(world=world, personas=personas, runs=runs, seed=seed)


def build_world(config: SimConfig, seed: int) -> World:
    """World for the given stream seed.  The static content depends only on
    the config: identical configs give byte-identical canonical serializations
    for any seed."""
    w = config.world
    return World(
        groups=w.groups, websites=w.websites, trackers=w.trackers,
        advertisers=w.advertisers, graph=w.graph, slots=w.slots,
        sync_pairs=w.sync_pairs, generic_pool=w.generic_pool, seed=seed)
