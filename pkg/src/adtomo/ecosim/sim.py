"""Ad-delivery simulation: knowledge propagation, creative generation, and
the run x persona x slot auction loop.

Knowledge is resolved once per (run, persona, advertiser): the training crawl
happens once per run, so whether an advertiser learned a persona's interest
is fixed before the persona tours the ad-collection slots.  Each (run,
persona) pair owns a hash-derived random substream, which makes the outputs
independent of persona scheduling; logs are emitted in canonical
(run, persona, slot) order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..rng import substream
from .auctions import auction_hb, auction_rtb
from .types import (
    AdCreative,
    BidRecord,
    DeliveredAd,
    InterestGroup,
    Persona,
    RequestLogEntry,
    World,
)


@dataclass
class SimLogs:
    ads: list[DeliveredAd] = field(default_factory=list)
    requests: list[RequestLogEntry] = field(default_factory=list)
    bids: list[BidRecord] = field(default_factory=list)


def knowledge_state(advertiser: str, persona: Persona, world: World,
                    rng: np.random.Generator) -> bool:
    """True iff any sharing edge into the advertiser fires for this persona.

    An edge (t -> advertiser) fires when the persona does not block t, t
    covers at least one site the persona visited during training, the visit
    is observed (observe_prob draw), and the edge's reliability draw succeeds.
    Two draws are consumed per incoming edge regardless of outcome, so the
    stream position never depends on the blocking configuration.
    """
    if advertiser not in world.advertiser_by_id:
        raise ConfigError(f"unknown advertiser {advertiser!r}")
    if persona.group not in world.group_by_id:
        raise ConfigError(f"unknown group {persona.group!r}")
    visited = world.visited_sites(persona.group)
    blocked = set(persona.blocking.blocked)
    known = False
    for edge in world.graph.edges_into(advertiser):
        tracker = world.tracker_by_id[edge.tracker]
        obs_draw = rng.random()
        rel_draw = rng.random()
        if tracker.id in blocked:
            continue
        if not visited.intersection(tracker.site_coverage):
            continue
        if obs_draw < tracker.observe_prob and rel_draw < edge.reliability:
            known = True
    return known


def generate_creative(advertiser: str, known: bool, group: InterestGroup,
                      world: World, rng: np.random.Generator, *,
                      slot: str = "", run: int = 0) -> AdCreative:
    """Creative tokens drawn uniformly from the group vocabulary when the
    advertiser knows the persona's interest, from the generic pool otherwise."""
    adv = world.advertiser_by_id.get(advertiser)
    if adv is None:
        raise ConfigError(f"unknown advertiser {advertiser!r}")
    source = group.vocabulary if known else world.generic_pool
    if not source:
        raise ConfigError("empty vocabulary" if known else "empty generic pool")
    picks = rng.choice(len(source), size=adv.creative_length, replace=True)
    return AdCreative(advertiser, tuple(source[i] for i in picks), slot, run)


def _chain_entries(world: World, run: int, persona: Persona) -> list[RequestLogEntry]:
    """One redirect chain per (run, persona): collection-site tracker hops
    (cookie only) followed by the configured cookie-sync hops (cookie + uid).
    Emission is deterministic; sync events do not depend on blocking because
    all trackers are unblocked during ad collection."""
    entries = []
    pos = 0
    for slot in world.slots:
        for tracker in world.trackers:
            if slot.website in tracker.site_coverage:
                entries.append(RequestLogEntry(
                    run=run, persona=persona.id, chain_position=pos,
                    source_domain=slot.website, destination_domain=tracker.id,
                    cookie_sent=f"c:{tracker.id}", uid_param=None))
                pos += 1
    for src, dst in world.sync_pairs:
        entries.append(RequestLogEntry(
            run=run, persona=persona.id, chain_position=pos,
            source_domain=src, destination_domain=dst,
            cookie_sent=f"c:{dst}", uid_param=f"uid:{src}"))
        pos += 1
    return entries


def _validate_personas(world: World, personas) -> list[Persona]:
    if not personas:
        raise ConfigError("personas must be non-empty")
    seen = set()
    for p in personas:
        if p.id in seen:
            raise ConfigError(f"duplicate persona id {p.id!r}")
        seen.add(p.id)
        if p.group not in world.group_by_id:
            raise ConfigError(f"persona {p.id!r} references unknown group {p.group!r}")
        for t in p.blocking.blocked:
            if t not in world.tracker_by_id:
                raise ConfigError(f"persona {p.id!r} blocks unknown tracker {t!r}")
    return sorted(personas, key=lambda p: p.id)


def run_simulation(world: World, personas, runs: int, seed: int | None = None) -> SimLogs:
    """Simulate ``runs`` collection rounds for every persona.

    Per (run, persona): resolve knowledge per advertiser, emit the redirect
    chain, then auction every slot (bid = base + boost*known + N(0, sd),
    truncated at 0) and log the winner's creative.  Client-side HB slots also
    log all on-time bids; server-side HB suppresses the bid log.
    """
    if runs < 1:
        raise ConfigError(f"runs must be >= 1, got {runs}")
    if not world.slots:
        raise ConfigError("no ad-collection slots configured")
    if seed is None:
        seed = world.seed
    personas = _validate_personas(world, personas)
    advertisers = world.advertisers
    all_ids = tuple(a.id for a in advertisers)
    logs = SimLogs()
    for run in range(runs):
        for persona in personas:
            rng = substream(seed, "sim", run, persona.id)
            group = world.group_by_id[persona.group]
            known = {a.id: knowledge_state(a.id, persona, world, rng)
                     for a in advertisers}
            logs.requests.extend(_chain_entries(world, run, persona))
            for slot in world.slots:
                bid_of = {}
                for a in advertisers:
                    noise = rng.normal(0.0, a.bid_noise_sd)
                    boost = a.knowledge_boost if known[a.id] else 0.0
                    bid_of[a.id] = max(0.0, a.base_bid + boost + noise)
                if slot.mechanism == "rtb_waterfall":
                    tier_ids = slot.tiers if slot.tiers is not None else (all_ids,)
                    tiers = [[(aid, bid_of[aid]) for aid in tier] for tier in tier_ids]
                    outcome = auction_rtb(slot, tiers)
                else:
                    hb_bids = [(aid, bid_of[aid], 0.0) for aid in all_ids]
                    outcome, recorded = auction_hb(slot, hb_bids, slot.timeout)
                    if slot.mechanism == "hb_client":
                        logs.bids.extend(
                            BidRecord(run, persona.id, slot.id, aid, value)
                            for aid, value in recorded)
                if outcome.filled:
                    creative = generate_creative(
                        outcome.winner, known[outcome.winner], group, world, rng,
                        slot=slot.id, run=run)
                    logs.ads.append(DeliveredAd(
                        run, persona.id, slot.id, outcome.winner, creative.tokens))
    logs.ads.sort(key=lambda r: (r.run, r.persona, r.slot))
    logs.requests.sort(key=lambda r: (r.run, r.persona, r.chain_position))
    logs.bids.sort(key=lambda r: (r.run, r.persona, r.slot, r.advertiser))
    return logs
