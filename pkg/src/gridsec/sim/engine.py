"""Deterministic discrete-event engine for key-exchange and transfer scenarios.

A single seeded generator drives every random choice (keys, split
randomness, chaff, payloads); events sit in a heap keyed by (tick,
insertion order).  Two runs of the same (scenario, seed) produce
byte-identical results, and adversary taps are observation-only: running
with or without them changes nothing outside the adversary reports.

Operation accounting follows the analytic cost model the schemes are
argued with: a node is charged the MAC cost of wheat it authenticates,
and chaff is free by construction.  The mechanically executed MAC-call
counts per node are reported alongside (winnowing checks arriving
packets, so a receiver's call count exceeds its wheat charge whenever
chaff flows).
"""

from __future__ import annotations

import heapq
import itertools
import json
import random
from dataclasses import dataclass, field
from typing import Callable

from .. import costmodel, sentinel, shamir, temporal, wnc
from ..keys import SecretKey
from ..opcount import OpCount
from ..sha1 import sha1
from .adversary import Adversary, GroundTruth
from .config import SCHEME_SPATIAL, Scenario
from .topology import ROLE_INFO, edge_key, edge_name


@dataclass(frozen=True)
class _Msg:
    kind: str
    obj: object
    wire_bytes: int


@dataclass
class _DrmState:
    name: str
    key: SecretKey | None = None
    grb_key: SecretKey | None = None
    bundles: list[shamir.ShareBundle] = field(default_factory=list)
    temporal_packets: list[temporal.TemporalPacket] = field(default_factory=list)
    auth_verdict: str | None = None
    winnower: wnc.Winnower | None = None
    mac_calls: wnc.MacCallCounter = field(default_factory=wnc.MacCallCounter)
    exchange_error: str | None = None


@dataclass
class ScenarioResult:
    name: str
    seed: int
    final_tick: int
    key_exchange: dict
    auth: dict
    transfer: dict
    node_ops: dict
    mac_calls: dict
    bytes_on_wire: dict
    adversaries: list
    integrity_alerts: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def summary_dict(self) -> dict:
        return {
            "schema": "gridsec.scenario-result/1",
            "name": self.name,
            "seed": self.seed,
            "final_tick": self.final_tick,
            "key_exchange": self.key_exchange,
            "auth": self.auth,
            "transfer": self.transfer,
            "node_ops": self.node_ops,
            "mac_calls": self.mac_calls,
            "bytes_on_wire": self.bytes_on_wire,
            "adversaries": self.adversaries,
            "integrity_alerts": self.integrity_alerts,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary_dict(), sort_keys=True, separators=(",", ":"))

    def events_jsonl(self) -> str:
        return "\n".join(json.dumps(e, sort_keys=True, separators=(",", ":")) for e in self.events)


class Engine:
    def __init__(self, scenario: Scenario, seed: int, with_taps: bool = True):
        self.scenario = scenario
        self.seed = seed
        self.rng = random.Random(seed)
        self.topology = scenario.topology
        self.queue: list[tuple[int, int, Callable[[int], None]]] = []
        self.counter = itertools.count()
        self.tick = 0
        self.events: list[dict] = []
        self.bytes_on_wire: dict[str, int] = {}
        self.node_ops: dict[str, OpCount] = {}
        self.grb_mac_calls = wnc.MacCallCounter()
        self.drms = {t: _DrmState(name=t) for t in scenario.targets}
        self.truth = GroundTruth()
        # Seeds are drawn whether or not taps attach, so disabling adversaries
        # cannot shift any other random choice (passivity check relies on it).
        adv_seeds = [self.rng.getrandbits(64) for _ in scenario.adversaries]
        self.adversaries = (
            [Adversary(cfg, seed=s) for cfg, s in zip(scenario.adversaries, adv_seeds)]
            if with_taps
            else []
        )
        self.transfer_report: dict = {}
        self.last_challenge: dict[str, wnc.WcPacket] = {}

    # -- event plumbing ------------------------------------------------------

    def _at(self, tick: int, fn: Callable[[int], None]) -> None:
        heapq.heappush(self.queue, (tick, next(self.counter), fn))

    def _drain(self) -> None:
        while self.queue:
            tick, _, fn = heapq.heappop(self.queue)
            self.tick = max(self.tick, tick)
            fn(tick)

    def _log(self, tick: int, ev: str, **fields) -> None:
        self.events.append({"tick": tick, "ev": ev, **fields})

    def _send(
        self,
        start_tick: int,
        route: list[str],
        msg: _Msg,
        on_deliver: Callable[[int, _Msg], None] | None,
    ) -> None:
        self._log(start_tick, "send", src=route[0], dst=route[-1], kind=msg.kind, bytes=msg.wire_bytes)

        def traverse(tick: int, hop: int) -> None:
            a, b = route[hop], route[hop + 1]
            arrive = tick + self.topology.latency(a, b)
            ename = edge_name(a, b)
            self.bytes_on_wire[ename] = self.bytes_on_wire.get(ename, 0) + msg.wire_bytes
            for adv in self.adversaries:
                if edge_key(a, b) in adv.config.taps:
                    adv.observe(arrive, edge_key(a, b), msg.kind, msg.wire_bytes, msg.obj)
            if hop + 1 == len(route) - 1:
                self._log(arrive, "deliver", dst=b, kind=msg.kind, bytes=msg.wire_bytes)
                if on_deliver is not None:
                    self._at(arrive, lambda t: on_deliver(t, msg))
            else:
                self._log(arrive, "hop", edge=ename, kind=msg.kind)
                self._at(arrive, lambda t: traverse(t, hop + 1))

        self._at(start_tick, lambda t: traverse(t, 0))

    def _charge_mac(self, node: str, message_bytes: int) -> None:
        cost = costmodel.analytic_cost(costmodel.HMAC_SHA1, 8 * message_bytes)
        self.node_ops[node] = self.node_ops.get(node, OpCount()) + cost.ops

    # -- phases ----------------------------------------------------------------

    def run(self) -> ScenarioResult:
        self._info_lookup()
        self._drain()
        kx_report: dict = {}
        for target in self.scenario.targets:
            key = SecretKey.generate(self.scenario.key_exchange.key_bits, self.rng)
            self.truth.keys[target] = key.to_hex()
            self.truth.key_bits = key.bits
            self._exchange_key(target, key)
            self._drain()
            drm = self.drms[target]
            kx_report[target] = {
                "scheme": self.scenario.key_exchange.scheme,
                "delivered": drm.key is not None,
                "key_match": drm.key is not None and drm.key.to_hex() == key.to_hex(),
                "error": drm.exchange_error,
            }
            drm.grb_key = key

        auth_report: dict = {}
        if "authenticate" in self.scenario.phases:
            for target in self.scenario.targets:
                auth_report[target] = self._authenticate(target)
                self._drain()

        if "transfer" in self.scenario.phases and self.scenario.transfer is not None:
            for target in self.scenario.targets:
                self._transfer(target)
                self._drain()

        integrity_alerts = self._run_sentinel_traces()
        adversary_reports = [adv.conclude(self.truth) for adv in self.adversaries]
        return ScenarioResult(
            name=self.scenario.name,
            seed=self.seed,
            final_tick=self.tick,
            key_exchange=kx_report,
            auth=auth_report,
            transfer=self.transfer_report,
            node_ops={n: ops.as_dict() for n, ops in sorted(self.node_ops.items())},
            mac_calls={
                self.topology.grb: self.grb_mac_calls.calls,
                **{t: d.mac_calls.calls for t, d in sorted(self.drms.items())},
            },
            bytes_on_wire=dict(sorted(self.bytes_on_wire.items())),
            adversaries=adversary_reports,
            integrity_alerts=integrity_alerts,
            events=self.events,
        )

    def _info_lookup(self) -> None:
        """Figure-1 flavor: the coordinator asks the information server for the
        resource registry before distributing anything."""
        grb = self.topology.grb
        registry = ",".join(self.topology.drms).encode()
        for info in sorted(n for n, r in self.topology.nodes.items() if r == ROLE_INFO):
            if not self.topology.has_edge(grb, info):
                continue

            def reply(tick: int, msg: _Msg, info=info) -> None:
                self._send(tick, [info, grb], _Msg("resource_list", self.topology.drms, 8 + len(registry)), None)

            self._send(self.tick, [grb, info], _Msg("resource_query", None, 8), reply)

    def _run_sentinel_traces(self) -> list[dict]:
        """Compromised DRMs get their stub tampered with while it is not
        running; the listener's unauthorized-change alerts land in the
        coordinator's queue."""
        watcher = sentinel.Sentinel()
        for drm_name in self.scenario.compromised_drms:
            artifact = f"stub:{drm_name}"
            watcher.register(artifact, b"stub-image:" + drm_name.encode())
            event = sentinel.ChangeEvent(
                tick=self.tick + 1,
                kind=sentinel.CONTENT_CHANGE,
                artifact_id=artifact,
                content=b"tampered:" + drm_name.encode(),
            )
            judged = watcher.on_event(event, sentinel.ProcessRegistry())
            self._log(event.tick, "integrity", artifact=artifact, judged=judged.judged)
            self.tick += 1
        return [
            {"tick": a.tick, "artifact": a.artifact_id, "kind": a.kind} for a in watcher.alerts
        ]

    def _exchange_key(self, target: str, key: SecretKey) -> None:
        kx = self.scenario.key_exchange
        routes = self.topology.paths[target]
        drm = self.drms[target]
        start = self.tick
        if kx.scheme == SCHEME_SPATIAL:
            policy = shamir.ThresholdPolicy(t=kx.threshold, n=len(routes), q=kx.prime)
            self.truth.spatial_policy = policy
            split_bundles = shamir.split(key, policy, seed=self.rng.getrandbits(64))

            def deliver(tick: int, msg: _Msg) -> None:
                drm.bundles.append(msg.obj)
                if len(drm.bundles) == policy.n:
                    try:
                        drm.key = shamir.reconstruct(drm.bundles, policy, key.bits)
                    except (shamir.MalformedSharesError, shamir.InsufficientSharesError) as exc:
                        drm.exchange_error = str(exc)

            for route, bundle in zip(routes, split_bundles):
                wire = len(shamir.encode_bundle(bundle))
                self._send(start, route, _Msg("share_bundle", bundle, wire), deliver)
        else:
            params = temporal.TemporalParams(p=kx.prime, L=key.bits, N=kx.parts)
            self.truth.temporal_params = params
            packets = temporal.temporal_send(key, params, seed=self.rng.getrandbits(64))
            route = routes[kx.route_index % len(routes)]
            header_wire = 6
            self._send(start, route, _Msg("temporal_header", (params.L, params.N), header_wire), None)

            def deliver(tick: int, msg: _Msg) -> None:
                drm.temporal_packets.append(msg.obj)
                if len(drm.temporal_packets) == params.N:
                    try:
                        drm.key = temporal.temporal_receive(drm.temporal_packets, params)
                    except (temporal.MalformedExchangeError, temporal.TamperError) as exc:
                        drm.exchange_error = str(exc)

            blob_len = len(temporal.encode_exchange(packets, params)) - header_wire
            per_packet = blob_len // len(packets)
            for i, packet in enumerate(packets):
                self._send(
                    start + (i + 1) * kx.interval_ticks, route, _Msg("temporal_packet", packet, per_packet), deliver
                )

    def _channel_config(self, target: str, seed: int) -> wnc.ChannelConfig:
        tr = self.scenario.transfer
        drm = self.drms[target]
        key_bytes = drm.grb_key.to_bytes() if drm.grb_key is not None else b"\x00"
        kwargs = {}
        if tr is not None:
            kwargs = dict(
                chaff_ratio=tr.chaff_ratio,
                mac_truncation_bits=tr.mac_truncation_bits,
                audit_mode=tr.audit_mode,
            )
            self.truth.mac_trunc_bits = tr.mac_truncation_bits
        self.truth.mac_keys[target] = key_bytes
        return wnc.ChannelConfig(key=key_bytes, rng_seed=seed, **kwargs)

    @staticmethod
    def _mirror_config(cfg: wnc.ChannelConfig, key_bytes: bytes) -> wnc.ChannelConfig:
        """Receiver-side config: the sender's parameters under the receiver's key."""
        return wnc.ChannelConfig(
            key=key_bytes,
            rng_seed=cfg.rng_seed,
            chaff_ratio=cfg.chaff_ratio,
            mac_truncation_bits=cfg.mac_truncation_bits,
            audit_mode=cfg.audit_mode,
        )

    def _authenticate(self, target: str) -> dict:
        drm = self.drms[target]
        cfg = self._channel_config(target, seed=self.rng.getrandbits(64))
        payload = b"challenge:" + target.encode()
        packet = wnc.make_wheat(cfg, seq=0, payload=payload, counter=self.grb_mac_calls)
        self.last_challenge[target] = packet
        self.truth.wheat_ids.add(id(packet))
        self._charge_mac(self.topology.grb, 4 + len(payload))
        route = self.topology.paths[target][0]
        verdict: dict = {"verdict": "pending"}

        drm_cfg = self._mirror_config(cfg, drm.key.to_bytes()) if drm.key is not None else None
        drm.winnower = wnc.Winnower(drm_cfg, drm.mac_calls) if drm_cfg else None

        def deliver(tick: int, msg: _Msg) -> None:
            if drm.winnower is None:
                drm.auth_verdict = "reject"
            else:
                accepted = drm.winnower.feed(msg.obj)
                drm.auth_verdict = "accept" if accepted else "reject"
                if accepted:
                    self._charge_mac(target, 4 + len(msg.obj.payload))
            verdict["verdict"] = drm.auth_verdict
            self._log(tick, "auth", drm=target, verdict=drm.auth_verdict)

        self._send(self.tick, route, _Msg("wc_challenge", packet, len(wnc.encode_packet(packet))), deliver)
        return verdict

    def replay_challenge(self, target: str, packet: wnc.WcPacket) -> str:
        """Feed a previously delivered packet to the DRM's session again (test hook)."""
        drm = self.drms[target]
        if drm.winnower is None:
            return "reject"
        return "accept" if drm.winnower.feed(packet) else "reject"

    def _transfer(self, target: str) -> None:
        tr = self.scenario.transfer
        drm = self.drms[target]
        payload = self.rng.randbytes(tr.payload_bytes)
        chunks = wnc.chunk_payload(payload, tr.chunk_bytes)
        cfg = self._channel_config(target, seed=self.rng.getrandbits(64))
        packets = wnc.transmit(cfg, chunks, counter=self.grb_mac_calls)
        wheat_seen = set()
        for p in packets:
            if p.seq not in wheat_seen and wnc.verify(cfg, p):
                self.truth.wheat_ids.add(id(p))
                wheat_seen.add(p.seq)
            else:
                self.truth.chaff_ids.add(id(p))
        for chunk in chunks:
            self._charge_mac(self.topology.grb, 4 + len(chunk))
            self._charge_mac(target, 4 + len(chunk))  # paper accounting: wheat only

        route = self.topology.paths[target][tr.route_index % len(self.topology.paths[target])]
        drm_cfg = self._mirror_config(cfg, drm.key.to_bytes() if drm.key else b"\x00")
        session = wnc.Winnower(drm_cfg, drm.mac_calls)
        delivered = {"count": 0}

        def deliver(tick: int, msg: _Msg) -> None:
            session.feed(msg.obj)
            delivered["count"] += 1
            if delivered["count"] == len(packets):
                self._finish_transfer(tick, target, payload, session, len(packets), route)

        for i, packet in enumerate(packets):
            self._send(
                self.tick + 1 + i, route, _Msg("wc_data", packet, len(wnc.encode_packet(packet))), deliver
            )

    def _finish_transfer(
        self,
        tick: int,
        target: str,
        payload: bytes,
        session: wnc.Winnower,
        packet_count: int,
        route: list[str],
    ) -> None:
        tr = self.scenario.transfer
        try:
            result = session.finish()
            received = b"".join(result.payloads)
            ok = received == payload
            rejected = result.rejected
            accepted = result.accepted_count
        except wnc.IncompleteStreamError as exc:
            received, ok = b"", False
            rejected = exc.result.rejected
            accepted = exc.result.accepted_count
        report = {
            "payload_bytes": len(payload),
            "packets_on_wire": packet_count,
            "wheat_accepted": accepted,
            "rejected": rejected,
            "conserved": accepted + rejected == packet_count,
            "payload_ok": ok,
            "result_returned": False,
        }
        self.transfer_report[target] = report
        if not (ok and tr.return_result):
            self._log(tick, "transfer_done", drm=target, ok=ok)
            return

        # Result return: the DRM sends back a digest of what it processed.
        drm = self.drms[target]
        result_payload = sha1(received)
        drm_cfg = session.config
        back = wnc.transmit(drm_cfg, [result_payload], counter=drm.mac_calls)
        for p in back:
            (self.truth.wheat_ids if wnc.verify(drm_cfg, p) else self.truth.chaff_ids).add(id(p))
        self._charge_mac(target, 4 + len(result_payload))
        self._charge_mac(self.topology.grb, 4 + len(result_payload))
        grb_session = wnc.Winnower(
            self._channel_config(target, seed=drm_cfg.rng_seed), self.grb_mac_calls
        )
        back_route = list(reversed(route))
        done = {"count": 0}

        def deliver(t: int, msg: _Msg) -> None:
            grb_session.feed(msg.obj)
            done["count"] += 1
            if done["count"] == len(back):
                try:
                    got = b"".join(grb_session.finish().payloads)
                except wnc.IncompleteStreamError:
                    got = b""
                report["result_returned"] = got == result_payload
                self._log(t, "transfer_done", drm=target, ok=report["payload_ok"])

        for i, packet in enumerate(back):
            self._send(tick + 1 + i, back_route, _Msg("wc_data", packet, len(wnc.encode_packet(packet))), deliver)


def run_scenario(scenario: Scenario, seed: int, with_taps: bool = True) -> ScenarioResult:
    """Execute the scenario's scripted phases under a deterministic event loop."""
    return Engine(scenario, seed, with_taps=with_taps).run()
