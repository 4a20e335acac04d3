"""Cookie-sync detection over request logs.

A redirect hop evidences a sync partnership when the destination receives its
own cookie AND the request carries the source's user identifier as a
parameter: that is the full identifier-matching handshake.  Hops that carry a
cookie but no source uid are reported separately as weak candidates (the
looser any-cookie-in-a-redirect-chain reading), never merged into the main
result.

Identifier ownership is read from the structured forms ``c:<domain>`` and
``uid:<domain>`` the simulator emits; unstructured identifiers fall back to
HTTP semantics (a cookie is the destination's, a uid parameter the source's).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .ecosim.types import RequestLogEntry


class MalformedChainError(ValueError):
    pass


@dataclass(frozen=True)
class SyncPair:
    initiator: str
    receiver: str
    evidence: tuple[tuple[int, str, int], ...]  # (run, persona, chain position)


@dataclass(frozen=True)
class SyncReport:
    pairs: tuple[SyncPair, ...]
    weak_candidates: tuple[SyncPair, ...]

    def pair_keys(self) -> set[tuple[str, str]]:
        return {(p.initiator, p.receiver) for p in self.pairs}


def _owner(value: str | None, prefix: str) -> str | None:
    """Domain that owns a structured identifier, else None (unknown)."""
    if value is None:
        return None
    if value.startswith(prefix):
        return value[len(prefix):]
    return None


def _validate_chains(entries: list[RequestLogEntry]) -> None:
    chains: dict[tuple[int, str], list[int]] = {}
    for e in entries:
        if e.chain_position < 0:
            raise MalformedChainError(
                f"negative chain position in chain {(e.run, e.persona)}")
        chains.setdefault((e.run, e.persona), []).append(e.chain_position)
    for chain_id, positions in chains.items():
        if sorted(positions) != list(range(len(positions))):
            raise MalformedChainError(f"position gaps in chain {chain_id}")


def detect_cookie_sync(log: Iterable[RequestLogEntry]) -> SyncReport:
    """Scan redirect chains for cookie-sync hops.

    Order-invariant: chains are reconstructed per (run, persona) and read in
    position order regardless of how the log was shuffled.
    """
    entries = sorted(log, key=lambda e: (e.run, e.persona, e.chain_position))
    _validate_chains(entries)
    strict: dict[tuple[str, str], list[tuple[int, str, int]]] = {}
    weak: dict[tuple[str, str], list[tuple[int, str, int]]] = {}
    for e in entries:
        if e.cookie_sent is None or e.source_domain == e.destination_domain:
            continue
        cookie_owner = _owner(e.cookie_sent, "c:")
        if cookie_owner is not None and cookie_owner != e.destination_domain:
            continue  # someone else's cookie: not a delivery to its owner
        uid_owner = _owner(e.uid_param, "uid:")
        has_source_uid = e.uid_param is not None and uid_owner in (None, e.source_domain)
        bucket = strict if has_source_uid else weak
        bucket.setdefault((e.source_domain, e.destination_domain), []).append(
            (e.run, e.persona, e.chain_position))

    def as_pairs(found: dict) -> tuple[SyncPair, ...]:
        return tuple(SyncPair(src, dst, tuple(sorted(ev)))
                     for (src, dst), ev in sorted(found.items()))

    return SyncReport(pairs=as_pairs(strict), weak_candidates=as_pairs(weak))
