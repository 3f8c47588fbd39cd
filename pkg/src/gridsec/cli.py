"""Command-line entry point.

Subcommands: ``wc send|recv`` (winnowing-and-chaffing streams over files,
pipes, or a TCP loopback helper), ``keyx`` (both key-exchange schemes),
``sim run`` (scenario simulator), ``sentinel replay``, and ``bench``
(operation-count table plus optional wall-clock comparison).

Conventions: stdout carries data and machine-readable reports only,
diagnostics go to stderr; secrets (MAC keys, the temporal prime) come from
files or the environment, never argv; every randomized subcommand takes
``--seed`` and is bit-reproducible.  Exit codes: 0 success, 1 operational
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from . import costmodel, sentinel, shamir, temporal, wnc
from .keys import SecretKey
from .modmath import DEFAULT_PRIME
from .sim import ConfigError, load_scenario, run_scenario

STDIN = "-"


class CliError(Exception):
    """Operational failure: reported on stderr, exit status 1."""


def _read_input(path: str | None, listen: int | None = None) -> bytes:
    if listen is not None:
        with socket.create_server(("127.0.0.1", listen)) as server:
            conn, _ = server.accept()
            with conn:
                chunks = []
                while block := conn.recv(65536):
                    chunks.append(block)
                return b"".join(chunks)
    if path is None or path == STDIN:
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _write_output(data: bytes, path: str | None, connect: str | None = None) -> None:
    if connect is not None:
        host, _, port = connect.rpartition(":")
        with socket.create_connection((host or "127.0.0.1", int(port))) as conn:
            conn.sendall(data)
        return
    if path is None or path == STDIN:
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
        return
    Path(path).write_bytes(data)


def _read_key_file(path: str) -> bytes:
    try:
        key = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read key file: {exc}") from exc
    if not key:
        raise CliError(f"key file {path} is empty")
    return key


def _read_prime(args) -> int:
    if getattr(args, "prime_file", None):
        text = Path(args.prime_file).read_text().strip()
    elif os.environ.get("GRIDSEC_PRIME"):
        text = os.environ["GRIDSEC_PRIME"].strip()
    else:
        raise CliError("no prime given: use --prime-file or the GRIDSEC_PRIME environment variable")
    try:
        return int(text, 0)
    except ValueError as exc:
        raise CliError(f"prime is not an integer: {text!r}") from exc


def _channel_config(args) -> wnc.ChannelConfig:
    return wnc.ChannelConfig(
        key=_read_key_file(args.key_file),
        chaff_ratio=getattr(args, "chaff_ratio", 0.0),
        mac_truncation_bits=args.mac_bits,
        rng_seed=getattr(args, "seed", 0),
        chaff_payload=getattr(args, "chaff_payload", wnc.CHAFF_COMPLEMENT),
        audit_mode=args.audit,
    )


def _cmd_wc_send(args) -> int:
    config = _channel_config(args)
    data = _read_input(args.infile)
    chunks = wnc.chunk_payload(data, args.chunk_size)
    packets = wnc.transmit(config, chunks)
    _write_output(wnc.encode_stream(packets), args.outfile, args.connect)
    print(
        json.dumps(
            {
                "schema": "gridsec.wc-send/1",
                "payload_bytes": len(data),
                "wheat": len(chunks),
                "chaff": len(packets) - len(chunks),
            },
            sort_keys=True,
        ),
        file=sys.stderr,
    )
    return 0


def _cmd_wc_recv(args) -> int:
    config = _channel_config(args)
    raw = _read_input(args.infile, args.listen)
    packets = wnc.decode_stream(raw)
    try:
        result = wnc.winnow(config, packets)
    except wnc.IncompleteStreamError as exc:
        raise CliError(str(exc)) from exc
    _write_output(b"".join(result.payloads), args.outfile)
    print(
        json.dumps(
            {
                "schema": "gridsec.wc-recv/1",
                "accepted": result.accepted_count,
                "rejected": result.rejected,
            },
            sort_keys=True,
        ),
        file=sys.stderr,
    )
    return 0


def _parse_key(args) -> SecretKey:
    try:
        return SecretKey.from_hex(args.key, bits=args.bits)
    except ValueError as exc:
        raise CliError(f"bad key: {exc}") from exc


def _cmd_spatial_split(args) -> int:
    key = _parse_key(args)
    policy = shamir.ThresholdPolicy(t=args.threshold, n=args.shares, q=args.prime)
    bundles = shamir.split(key, policy, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for bundle in bundles:
        path = out_dir / f"bundle_{bundle.x:02d}.bin"
        path.write_bytes(shamir.encode_bundle(bundle))
        paths.append(str(path))
    print(
        json.dumps(
            {
                "schema": "gridsec.spatial-split/1",
                "key_bits": key.bits,
                "threshold": policy.t,
                "shares": policy.n,
                "bundles": paths,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_spatial_reconstruct(args) -> int:
    policy = shamir.ThresholdPolicy(t=args.threshold, n=max(args.threshold, len(args.bundles)), q=args.prime)
    bundles = [shamir.decode_bundle(Path(p).read_bytes()) for p in args.bundles]
    try:
        key = shamir.reconstruct(bundles, policy, key_bits=args.bits)
    except (shamir.InsufficientSharesError, shamir.MalformedSharesError) as exc:
        raise CliError(str(exc)) from exc
    print(key.to_hex())
    return 0


def _cmd_temporal_send(args) -> int:
    key = _parse_key(args)
    params = temporal.TemporalParams(p=_read_prime(args), L=key.bits, N=args.parts)
    packets = temporal.temporal_send(key, params, seed=args.seed)
    _write_output(temporal.encode_exchange(packets, params), args.outfile)
    return 0


def _cmd_temporal_receive(args) -> int:
    raw = _read_input(args.infile)
    L, N, packets = temporal.decode_exchange(raw)
    params = temporal.TemporalParams(p=_read_prime(args), L=L, N=N)
    try:
        key = temporal.temporal_receive(packets, params)
    except (temporal.MalformedExchangeError, temporal.TamperError) as exc:
        raise CliError(str(exc)) from exc
    print(key.to_hex())
    return 0


def _cmd_sim_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ConfigError as exc:
        raise CliError(str(exc)) from exc
    result = run_scenario(scenario, seed=args.seed)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "summary.json").write_text(result.to_json() + "\n")
        (out_dir / "events.jsonl").write_text(result.events_jsonl() + "\n")
    print(result.to_json())
    failures = [t for t, r in result.key_exchange.items() if not r["key_match"]]
    failures += [t for t, r in result.auth.items() if r["verdict"] != "accept"]
    return 1 if failures else 0


def _cmd_sentinel_replay(args) -> int:
    try:
        alerts = sentinel.replay_trace(Path(args.trace))
    except (sentinel.TraceParseError, OSError) as exc:
        raise CliError(str(exc)) from exc
    for alert in alerts:
        print(
            json.dumps(
                {"tick": alert.tick, "artifact": alert.artifact_id, "kind": alert.kind},
                sort_keys=True,
            )
        )
    print(json.dumps({"schema": "gridsec.sentinel-replay/1", "alerts": len(alerts)}), file=sys.stderr)
    return 0


_CSV_HEADER = "scheme,message_bits,xor32,shift32,gf8_mul,mul8,gf8_inv,bytes_transferred,median_throughput_MBps"


def _cmd_bench(args) -> int:
    schemes = [args.scheme] if args.scheme != "both" else list(costmodel.SCHEMES)
    wallclock = None
    if args.wallclock:
        wallclock = costmodel.wallclock_bench(
            args.size_mib * 2**20, args.ratio, args.trials, seed=args.seed
        )
    print(_CSV_HEADER)
    for scheme in schemes:
        report = costmodel.analytic_cost(scheme, args.bits)
        ops = report.ops
        message_bytes = -(-args.bits // 8)
        if scheme == costmodel.HMAC_SHA1:
            transferred = int(message_bytes * (1 + args.ratio))
            throughput = f"{wallclock.wnc_throughput_mbps:.3f}" if wallclock else ""
            if wallclock:
                transferred = wallclock.wnc_wire_bytes
        else:
            transferred = message_bytes
            throughput = f"{wallclock.baseline_throughput_mbps:.3f}" if wallclock else ""
            if wallclock:
                transferred = wallclock.baseline_wire_bytes
        print(
            f"{scheme},{args.bits},{ops.xor32},{ops.shift32},{ops.gf8_mul},"
            f"{ops.mul8},{ops.gf8_inv},{transferred},{throughput}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridsec",
        description="Encryptionless grid security toolkit: MAC-based winnowing and chaffing, "
        "split key distribution, cost models, grid simulator, and integrity sentinel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    wc = sub.add_parser("wc", help="winnowing-and-chaffing data transfer")
    wc_sub = wc.add_subparsers(dest="wc_command", required=True)

    def add_common_wc(p):
        p.add_argument("--key-file", required=True, help="file holding the MAC key bytes")
        p.add_argument("--mac-bits", type=int, default=160, help="MAC comparison width (default 160)")
        p.add_argument("--audit", action="store_true", help="allow truncation below 64 bits")
        p.add_argument("--in", dest="infile", default=None, help="input file (default stdin)")
        p.add_argument("--out", dest="outfile", default=None, help="output file (default stdout)")

    ws = wc_sub.add_parser("send", help="MAC a payload stream and inject chaff")
    add_common_wc(ws)
    ws.add_argument("--chaff-ratio", type=float, default=1.0)
    ws.add_argument("--seed", type=int, default=0)
    ws.add_argument("--chunk-size", type=int, default=wnc.MAX_PAYLOAD)
    ws.add_argument(
        "--chaff-payload",
        choices=[wnc.CHAFF_COMPLEMENT, wnc.CHAFF_RANDOM],
        default=wnc.CHAFF_COMPLEMENT,
    )
    ws.add_argument("--connect", default=None, help="send packets to HOST:PORT instead of stdout")
    ws.set_defaults(func=_cmd_wc_send)

    wr = wc_sub.add_parser("recv", help="winnow a packet stream back into the payload")
    add_common_wc(wr)
    wr.add_argument("--listen", type=int, default=None, help="accept one TCP connection on this port")
    wr.set_defaults(func=_cmd_wc_recv)

    keyx = sub.add_parser("keyx", help="split-distribution key exchange")
    keyx_sub = keyx.add_subparsers(dest="keyx_command", required=True)

    ss = keyx_sub.add_parser("spatial-split", help="threshold-split a key into path bundles")
    ss.add_argument("--key", required=True, help="key as hex")
    ss.add_argument("--bits", type=int, default=None, help="key bit length if not byte-aligned")
    ss.add_argument("--threshold", type=int, required=True)
    ss.add_argument("--shares", type=int, required=True)
    ss.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    ss.add_argument("--seed", type=int, default=0)
    ss.add_argument("--out-dir", required=True)
    ss.set_defaults(func=_cmd_spatial_split)

    sr = keyx_sub.add_parser("spatial-reconstruct", help="rebuild a key from share bundles")
    sr.add_argument("--bits", type=int, required=True, help="key bit length")
    sr.add_argument("--threshold", type=int, required=True)
    sr.add_argument("--prime", type=int, default=DEFAULT_PRIME)
    sr.add_argument("bundles", nargs="+", help="bundle files")
    sr.set_defaults(func=_cmd_spatial_reconstruct)

    ts = keyx_sub.add_parser("temporal-send", help="split a key over time under a pre-shared prime")
    ts.add_argument("--key", required=True, help="key as hex")
    ts.add_argument("--bits", type=int, default=None)
    ts.add_argument("--parts", type=int, required=True)
    ts.add_argument("--prime-file", default=None, help="file holding the pre-shared prime")
    ts.add_argument("--seed", type=int, default=0)
    ts.add_argument("--out", dest="outfile", default=None)
    ts.set_defaults(func=_cmd_temporal_send)

    tr = keyx_sub.add_parser("temporal-receive", help="recover a key from a temporal exchange")
    tr.add_argument("--prime-file", default=None)
    tr.add_argument("--in", dest="infile", default=None)
    tr.set_defaults(func=_cmd_temporal_receive)

    sim = sub.add_parser("sim", help="deterministic grid scenario simulator")
    sim_sub = sim.add_subparsers(dest="sim_command", required=True)
    run = sim_sub.add_parser("run", help="run a scenario config")
    run.add_argument("scenario", help="scenario YAML file")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", default=None, help="directory for summary.json and events.jsonl")
    run.set_defaults(func=_cmd_sim_run)

    sen = sub.add_parser("sentinel", help="stub integrity listener")
    sen_sub = sen.add_subparsers(dest="sentinel_command", required=True)
    rep = sen_sub.add_parser("replay", help="replay a change-event trace")
    rep.add_argument("trace", help="trace file")
    rep.set_defaults(func=_cmd_sentinel_replay)

    bench = sub.add_parser("bench", help="operation-count table and wall-clock comparison")
    bench.add_argument("--scheme", choices=[*costmodel.SCHEMES, "both"], default="both")
    bench.add_argument("--bits", type=int, default=512)
    bench.add_argument("--wallclock", action="store_true", help="also run the timed comparison")
    bench.add_argument("--size-mib", type=int, default=64)
    bench.add_argument("--ratio", type=float, default=1.0)
    bench.add_argument("--trials", type=int, default=5)
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, wnc.FrameError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
