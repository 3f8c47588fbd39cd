"""Passive eavesdroppers: record traffic on tapped edges, attack at scenario end.

Adversaries never inject, drop, or modify; the engine hands them copies of
whatever crosses a tapped edge.  Their end-of-run conclusions are measured
against ground truth the engine keeps aside, so scenario results can report
recovery verdicts without giving the adversary code any extra powers.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .. import shamir, temporal, wnc
from .config import AdversaryConfig


@dataclass(frozen=True)
class TapRecord:
    tick: int
    edge: tuple[str, str]
    kind: str
    wire_bytes: int
    obj: object


@dataclass
class GroundTruth:
    """Engine-side answers used only to grade adversary conclusions."""

    keys: dict[str, str] = field(default_factory=dict)  # target drm -> key hex
    key_bits: int = 0
    spatial_policy: shamir.ThresholdPolicy | None = None
    temporal_params: temporal.TemporalParams | None = None
    mac_keys: dict[str, bytes] = field(default_factory=dict)
    mac_trunc_bits: int = 160
    wheat_ids: set[int] = field(default_factory=set)  # id() of wheat WcPackets
    chaff_ids: set[int] = field(default_factory=set)


class Adversary:
    def __init__(self, config: AdversaryConfig, seed: int):
        self.config = config
        self.rng = random.Random(seed)
        self.records: list[TapRecord] = []

    def observe(self, tick: int, edge: tuple[str, str], kind: str, wire_bytes: int, obj: object) -> None:
        self.records.append(TapRecord(tick, edge, kind, wire_bytes, obj))

    # -- strategy conclusions ------------------------------------------------

    def conclude(self, truth: GroundTruth) -> dict:
        base = {
            "name": self.config.name,
            "strategy": self.config.strategy,
            "taps": sorted("-".join(e) for e in self.config.taps),
            "packets_seen": len(self.records),
            "bytes_seen": sum(r.wire_bytes for r in self.records),
        }
        handler = {
            "record_only": self._conclude_record_only,
            "spatial_reconstruct": self._conclude_spatial,
            "temporal_guess": self._conclude_temporal,
            "winnow_attempt": self._conclude_winnow,
        }[self.config.strategy]
        base.update(handler(truth))
        return base

    def _conclude_record_only(self, truth: GroundTruth) -> dict:
        kinds: dict[str, int] = {}
        for r in self.records:
            kinds[r.kind] = kinds.get(r.kind, 0) + 1
        return {"kinds": dict(sorted(kinds.items()))}

    def _conclude_spatial(self, truth: GroundTruth) -> dict:
        policy = truth.spatial_policy
        bundles: dict[int, shamir.ShareBundle] = {}
        for r in self.records:
            if r.kind == "share_bundle":
                bundle = r.obj
                bundles.setdefault(bundle.x, bundle)
        out: dict = {"bundles_observed": len(bundles)}
        if policy is None:
            out["recovered"] = False
            return out
        if len(bundles) >= policy.t:
            key = shamir.reconstruct(list(bundles.values()), policy, truth.key_bits)
            recovered_hex = key.to_hex()
            out["recovered"] = recovered_hex in truth.keys.values()
            out["recovered_key"] = recovered_hex
        else:
            out["recovered"] = False
            if self.config.audit and policy.q <= shamir.MAX_AUDIT_PRIME:
                # What does the shortfall leave open?  Count consistent secrets
                # for the first chunk from the observed shares.
                points = sorted(
                    (s.x, s.y) for b in bundles.values() for s in b.shares if s.chunk_index == 0
                )
                counts = shamir.consistency_counts(policy, points)
                out["consistent_secret_count"] = sum(1 for c in counts if c > 0)
                out["posterior_uniform"] = len(set(counts)) == 1
        return out

    def _conclude_temporal(self, truth: GroundTruth) -> dict:
        header = next((r.obj for r in self.records if r.kind == "temporal_header"), None)
        packets = [r.obj for r in self.records if r.kind == "temporal_packet"]
        out: dict = {"temporal_packets_observed": len(packets)}
        if header is None or truth.temporal_params is None:
            out["recovered"] = False
            return out
        L, N = header
        if "prime_p" in self.config.knowledge:
            candidates = [truth.temporal_params.p]
        else:
            candidates = [p for p in self.config.candidate_primes if p > L]
        report = temporal.adversary_attack(packets, candidates, L, N)
        matches = [a for a in report.valid_decodes if a.key_hex in truth.keys.values()]
        out.update(
            candidates_tried=len(report.attempts),
            valid_decodes=len(report.valid_decodes),
            valid_decode_rate=round(report.valid_rate, 6),
            key_matches=len(matches),
            recovered="prime_p" in self.config.knowledge and bool(matches),
        )
        return out

    def _conclude_winnow(self, truth: GroundTruth) -> dict:
        packets = [r.obj for r in self.records if r.kind in ("wc_data", "wc_challenge")]
        out: dict = {"wc_packets_observed": len(packets)}
        if not packets:
            out["recovered"] = False
            return out
        if "mac_key" in self.config.knowledge and truth.mac_keys:
            key = next(iter(truth.mac_keys.values()))
        else:
            key = self.rng.randbytes(20)
        trunc = truth.mac_trunc_bits
        cfg = wnc.ChannelConfig(
            key=key, mac_truncation_bits=trunc, audit_mode=trunc < 64, rng_seed=0
        )
        accepted_wheat = accepted_chaff = 0
        for packet in packets:
            if wnc.verify(cfg, packet):
                if id(packet) in truth.wheat_ids:
                    accepted_wheat += 1
                else:
                    accepted_chaff += 1
        wheat_seen = sum(1 for p in packets if id(p) in truth.wheat_ids)
        chaff_seen = len(packets) - wheat_seen
        out.update(
            has_key="mac_key" in self.config.knowledge,
            wheat_seen=wheat_seen,
            chaff_seen=chaff_seen,
            accepted_wheat=accepted_wheat,
            accepted_chaff=accepted_chaff,
            recovered="mac_key" in self.config.knowledge and accepted_wheat == wheat_seen,
        )
        return out
