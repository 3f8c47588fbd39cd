import hashlib
import hmac as stdhmac
import random

import numpy as np
import pytest

from gridsec import bench_engine as be
from gridsec.aes import aes128_encrypt_block


class TestKernelEquivalence:
    @pytest.mark.parametrize("mlen", [1, 20, 55, 56, 64, 119, 1024, 1028])
    def test_batch_hmac_matches_stdlib(self, mlen):
        rng = random.Random(mlen)
        n = 4
        msgs = np.frombuffer(rng.randbytes(n * mlen), np.uint8).reshape(n, mlen).copy()
        for key_len in (1, 20, 64, 80):
            key = rng.randbytes(key_len)
            got = be.batch_hmac_sha1(key, msgs)
            for i in range(n):
                assert (
                    got[i].tobytes() == stdhmac.new(key, msgs[i].tobytes(), hashlib.sha1).digest()
                )

    def test_batch_aes_matches_reference(self):
        rng = random.Random(2)
        key = rng.randbytes(16)
        data = np.frombuffer(rng.randbytes(16 * 32), np.uint8).copy()
        out = be.aes128_ecb(key, data)
        for i in range(32):
            block = data[16 * i : 16 * (i + 1)].tobytes()
            assert out[16 * i : 16 * (i + 1)].tobytes() == aes128_encrypt_block(key, block)

    def test_aes_rejects_ragged_input(self):
        with pytest.raises(ValueError):
            be.aes128_ecb(b"0" * 16, np.zeros(17, np.uint8))


class TestRunBench:
    def test_zero_length_stream_gives_empty_report(self):
        report = be.run_bench(0, 1.0, 5)
        assert report.empty
        assert report.wnc_throughput_mbps == 0.0

    def test_ratio_zero_is_pure_mac_cost(self):
        report = be.run_bench(256 * 1024, 0.0, 1, seed=3)
        assert report.winnow_mac_checks == 256  # one check per wheat packet
        assert report.wnc_wire_bytes == report.baseline_wire_bytes

    def test_small_run_reports_components(self):
        report = be.run_bench(1 << 20, 1.0, 2, seed=4)
        assert set(report.components_s) == {"wnc_send", "wnc_winnow", "baseline"}
        assert report.wnc_throughput_mbps > 0
        assert report.baseline_throughput_mbps > 0
        assert report.wnc_wire_bytes == 2 * report.baseline_wire_bytes
        # Winnowing checks every first arrival plus preceding chaff.
        n = 1024
        assert n <= report.winnow_mac_checks <= 2 * n

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError):
            be.run_bench(1024, 1.0, 0)
