"""Ready-made pipeline configurations.

``small`` is the CI-scale deployment: 6 tracker organizations (64 enumerated
blocking personas plus 20 controls), 5 advertisers, 4 planted edges, 10 runs.
``empty`` is the same world with no planted edges (the false-positive
control), ``h1`` a three-interest-group world for the similarity analysis,
``mini`` a seconds-scale smoke config, and ``desk`` the full 10-organization
deployment shape (1,024 + 100 personas) for unhurried desk runs.

Vocabularies are small and concentrated while the generic pool is large and
diffuse; that asymmetry is what lets the chi-squared validity guard refuse to
read evidence into low-mass noise tables while targeted-versus-generic
differences light up.
"""

from __future__ import annotations

import copy

_SHARED_H1 = [f"shared-{i:02d}" for i in range(10)]


def _tokens(prefix: str, n: int) -> list[str]:
    return [f"{prefix}-{i:04d}" for i in range(n)]


def _slots(n_rtb: int, n_hb_client: int, n_hb_server: int, floor: float) -> list[dict]:
    slots = []
    mechanisms = (["rtb_waterfall"] * n_rtb + ["hb_client"] * n_hb_client
                  + ["hb_server"] * n_hb_server)
    for i, mech in enumerate(mechanisms, start=1):
        slots.append({"id": f"slot-{i:02d}", "website": f"collect-{i:02d}",
                      "floor_price": floor, "mechanism": mech, "timeout": 1.0})
    return slots


def _collect_sites(n: int) -> list[dict]:
    return [{"id": f"collect-{i:02d}", "group": None} for i in range(1, n + 1)]


def small_profile(seed: int = 7, edges: list[dict] | None = None) -> dict:
    """Planted-graph recovery world: t1..t4 each feed one advertiser."""
    if edges is None:
        edges = [
            {"tracker": "t1", "advertiser": "dsp-1", "reliability": 0.95},
            {"tracker": "t2", "advertiser": "dsp-2", "reliability": 0.95},
            {"tracker": "t3", "advertiser": "dsp-3", "reliability": 0.95},
            {"tracker": "t4", "advertiser": "dsp-4", "reliability": 0.95},
        ]
    group_sites = [{"id": f"news-{i}", "group": "g1"} for i in (1, 2, 3)]
    trackers = [{"id": f"t{i}", "site_coverage": ["news-1", "news-2", "news-3"],
                 "observe_prob": 1.0} for i in range(1, 7)]
    trackers[0]["site_coverage"] = ["news-1", "news-2", "news-3", "collect-01"]
    trackers[1]["site_coverage"] = ["news-1", "news-2", "news-3", "collect-01"]
    advertisers = [{"id": f"dsp-{i}", "base_bid": 1.0, "knowledge_boost": 0.15,
                    "bid_noise_sd": 0.5, "creative_length": 8} for i in range(1, 6)]
    return {
        "sim": {
            "world": {
                "generic_pool": _tokens("gen", 2500),
                "groups": [{"id": "g1", "vocabulary": _tokens("g1w", 40)}],
                "websites": group_sites + _collect_sites(10),
                "trackers": trackers,
                "advertisers": advertisers,
                "edges": edges,
                "slots": _slots(4, 4, 2, floor=0.2),
                "sync_pairs": [["t1", "t2"], ["t3", "t1"], ["t5", "t4"]],
            },
            "run": {"personas": {"group": "g1", "controls": 20}, "runs": 10},
        },
        "stats": {"alpha": 0.05, "min_expected": 5},
        "grid": {"n_trees": [50, 100], "max_depth": [3, None],
                 "features_per_split": ["sqrt", "all"], "min_leaf": [1]},
        "folds": 4,
        "holdout_runs": 2,
        "accuracy_threshold": 0.6,
        "seed": seed,
        "output_dir": "out",
    }


def empty_profile(seed: int = 7) -> dict:
    """The small world with no planted edges: every flag is noise."""
    return small_profile(seed=seed, edges=[])


def h1_profile(seed: int = 7) -> dict:
    """Three partially-overlapping interest groups, nine runs, no blocking."""
    pool = _tokens("gen", 400) + _SHARED_H1
    groups = []
    websites = _collect_sites(6)
    personas = []
    for gi in (1, 2, 3):
        gid = f"g{gi}"
        groups.append({"id": gid, "vocabulary": _tokens(f"{gid}w", 30) + _SHARED_H1})
        websites += [{"id": f"{gid}-site-{j}", "group": gid} for j in (1, 2)]
        personas += [{"id": f"{gid}-p{j:02d}", "group": gid, "blocked": [],
                      "is_control": False} for j in range(8)]
    group_sites = [w["id"] for w in websites if w["group"] is not None]
    advertisers = [{"id": f"adv-{i}", "base_bid": 1.0, "knowledge_boost": 0.15,
                    "bid_noise_sd": 0.5, "creative_length": 8} for i in range(1, 5)]
    return {
        "sim": {
            "world": {
                "generic_pool": pool,
                "groups": groups,
                "websites": websites,
                "trackers": [{"id": "tr-1", "site_coverage": group_sites,
                              "observe_prob": 1.0}],
                "advertisers": advertisers,
                "edges": [{"tracker": "tr-1", "advertiser": f"adv-{i}",
                           "reliability": 1.0} for i in (1, 2, 3)],
                "slots": _slots(0, 6, 0, floor=0.2),
                "sync_pairs": [],
            },
            "run": {"personas": personas, "runs": 9},
        },
        "stats": {"alpha": 0.05, "min_expected": 5},
        "grid": {"n_trees": [50], "max_depth": [3], "features_per_split": ["all"],
                 "min_leaf": [1]},
        "folds": 4,
        "holdout_runs": 1,
        "accuracy_threshold": 0.6,
        "seed": seed,
        "output_dir": "out",
    }


def mini_profile(seed: int = 7) -> dict:
    """Seconds-scale smoke config: 3 trackers, 8 + 6 personas, 6 runs."""
    cfg = small_profile(seed=seed)
    world = cfg["sim"]["world"]
    world["generic_pool"] = _tokens("gen", 400)
    world["groups"] = [{"id": "g1", "vocabulary": _tokens("g1w", 10)}]
    world["trackers"] = [{"id": f"t{i}", "site_coverage": ["news-1", "news-2", "news-3"],
                          "observe_prob": 1.0} for i in (1, 2, 3)]
    world["advertisers"] = [{"id": f"dsp-{i}", "base_bid": 1.0, "knowledge_boost": 0.15,
                             "bid_noise_sd": 0.5, "creative_length": 12}
                            for i in (1, 2)]
    world["edges"] = [{"tracker": "t1", "advertiser": "dsp-1", "reliability": 0.95}]
    world["slots"] = _slots(1, 2, 1, floor=0.2)
    world["websites"] = [w for w in world["websites"]
                         if w["group"] is not None or w["id"] <= "collect-04"]
    world["sync_pairs"] = [["t1", "t2"]]
    cfg["sim"]["run"] = {"personas": {"group": "g1", "controls": 6}, "runs": 6}
    cfg["grid"] = {"n_trees": [20], "max_depth": [3], "features_per_split": ["all"],
                   "min_leaf": [1]}
    cfg["holdout_runs"] = 2
    return cfg


_DESK_ORGS = ["33across", "adobe", "alphabet", "facebook", "gumgum",
              "indexexchange", "openx", "oracle", "pubmatic", "rubicon"]


def desk_profile(seed: int = 7) -> dict:
    """Deployment shape of the full study: 10 tracker organizations,
    2^10 + 100 personas, 9 advertisers, 10 runs, full default grid.
    Expect this to run for a while; it is not part of the test suite."""
    cfg = small_profile(seed=seed)
    world = cfg["sim"]["world"]
    world["generic_pool"] = _tokens("gen", 3000)
    world["groups"] = [{"id": "g1", "vocabulary": _tokens("g1w", 60)}]
    world["trackers"] = [{"id": org, "site_coverage": ["news-1", "news-2", "news-3"],
                          "observe_prob": 1.0} for org in _DESK_ORGS]
    world["advertisers"] = [{"id": f"dsp-{i:02d}", "base_bid": 1.0,
                             "knowledge_boost": 0.15, "bid_noise_sd": 0.5,
                             "creative_length": 8} for i in range(1, 10)]
    world["edges"] = [
        {"tracker": "alphabet", "advertiser": "dsp-01", "reliability": 0.95},
        {"tracker": "oracle", "advertiser": "dsp-01", "reliability": 0.95},
        {"tracker": "openx", "advertiser": "dsp-02", "reliability": 0.95},
        {"tracker": "gumgum", "advertiser": "dsp-03", "reliability": 0.95},
        {"tracker": "alphabet", "advertiser": "dsp-04", "reliability": 0.95},
        {"tracker": "alphabet", "advertiser": "dsp-05", "reliability": 0.95},
        {"tracker": "openx", "advertiser": "dsp-06", "reliability": 0.95},
        {"tracker": "facebook", "advertiser": "dsp-06", "reliability": 0.95},
        {"tracker": "alphabet", "advertiser": "dsp-07", "reliability": 0.95},
        {"tracker": "alphabet", "advertiser": "dsp-08", "reliability": 0.95},
        {"tracker": "alphabet", "advertiser": "dsp-09", "reliability": 0.95},
    ]
    world["sync_pairs"] = [["alphabet", "pubmatic"], ["oracle", "openx"]]
    cfg["sim"]["run"] = {"personas": {"group": "g1", "controls": 100}, "runs": 10}
    cfg["grid"] = {"n_trees": [50, 100, 200], "max_depth": [3, 5, None],
                   "features_per_split": ["sqrt", "all"], "min_leaf": [1, 2]}
    return cfg


PROFILES = {
    "small": small_profile,
    "empty": empty_profile,
    "h1": h1_profile,
    "mini": mini_profile,
    "desk": desk_profile,
}


def get_profile(name: str, seed: int = 7) -> dict:
    try:
        builder = PROFILES[name]
    except KeyError:
        raise KeyError(f"unknown profile {name!r}; have {sorted(PROFILES)}") from None
    return copy.deepcopy(builder(seed=seed))
