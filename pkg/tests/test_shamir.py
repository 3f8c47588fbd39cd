import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridsec import shamir
from gridsec.keys import SecretKey
from gridsec.modmath import poly_eval


class TestPolicy:
    def test_valid_policy(self):
        p = shamir.ThresholdPolicy(t=3, n=5, q=31)
        assert p.chunk_bits == 4

    @pytest.mark.parametrize("t,n,q", [(0, 5, 31), (6, 5, 31), (3, 5, 33), (3, 5, 5), (3, 5, 4)])
    def test_invalid_policies(self, t, n, q):
        with pytest.raises(shamir.PolicyError):
            shamir.ThresholdPolicy(t=t, n=n, q=q)

    def test_share_at_zero_rejected(self):
        with pytest.raises(shamir.MalformedSharesError):
            shamir.Share(chunk_index=0, x=0, y=5)


class TestWorkedExample:
    # f(x) = 7 + 3x over GF(31)
    def test_forward_evaluation(self):
        coeffs = [7, 3]
        assert [poly_eval(coeffs, x, 31) for x in (1, 2, 3)] == [10, 13, 16]

    def test_reconstruct_from_two_shares(self):
        policy = shamir.ThresholdPolicy(t=2, n=3, q=31)
        shares = [shamir.Share(0, 1, 10), shamir.Share(0, 3, 16)]
        key = shamir.reconstruct(shares, policy, key_bits=4)
        assert key.value == 7

    def test_t_and_t_plus_one_shares_agree(self):
        policy = shamir.ThresholdPolicy(t=2, n=3, q=31)
        two = [shamir.Share(0, 1, 10), shamir.Share(0, 3, 16)]
        three = two + [shamir.Share(0, 2, 13)]
        assert shamir.reconstruct(two, policy, 4).value == shamir.reconstruct(three, policy, 4).value


class TestSplitReconstruct:
    def test_every_threshold_subset_reconstructs(self):
        rng = random.Random(1)
        for t, n in [(1, 3), (2, 3), (3, 5), (4, 6)]:
            policy = shamir.ThresholdPolicy(t=t, n=n, q=2305843009213693951)
            key = SecretKey.generate(64, rng)
            bundles = shamir.split(key, policy, seed=rng.getrandbits(64))
            for subset in itertools.combinations(bundles, t):
                assert shamir.reconstruct(list(subset), policy, key.bits).value == key.value

    def test_degenerate_threshold_single_bundle(self):
        policy = shamir.ThresholdPolicy(t=1, n=4, q=8191)
        key = SecretKey.generate(32, random.Random(2))
        for bundle in shamir.split(key, policy, seed=9):
            assert shamir.reconstruct([bundle], policy, key.bits).value == key.value

    @settings(max_examples=100, deadline=None)
    @given(
        bits=st.integers(16, 256),
        t=st.integers(1, 4),
        extra=st.integers(0, 3),
        seed=st.integers(0, 2**32),
    )
    def test_roundtrip_property(self, bits, t, extra, seed):
        rng = random.Random(seed)
        policy = shamir.ThresholdPolicy(t=t, n=t + extra, q=2305843009213693951)
        key = SecretKey.generate(bits, rng)
        bundles = shamir.split(key, policy, seed=seed)
        chosen = rng.sample(bundles, t)
        assert shamir.reconstruct(chosen, policy, key.bits).value == key.value

    def test_small_field_many_chunks(self):
        policy = shamir.ThresholdPolicy(t=2, n=4, q=13)  # 3-bit chunks
        key = SecretKey.generate(40, random.Random(3))
        bundles = shamir.split(key, policy, seed=5)
        assert len(bundles[0].shares) == -(-40 // 3)
        assert shamir.reconstruct(bundles[:2], policy, key.bits).value == key.value

    def test_insufficient_shares(self):
        policy = shamir.ThresholdPolicy(t=3, n=5, q=8191)
        key = SecretKey.generate(24, random.Random(4))
        bundles = shamir.split(key, policy, seed=6)
        with pytest.raises(shamir.InsufficientSharesError):
            shamir.reconstruct(bundles[:2], policy, key.bits)

    def test_duplicate_x_rejected(self):
        policy = shamir.ThresholdPolicy(t=2, n=3, q=31)
        shares = [shamir.Share(0, 1, 10), shamir.Share(0, 1, 10)]
        with pytest.raises(shamir.MalformedSharesError):
            shamir.reconstruct(shares, policy, 4)

    def test_key_length_bounds(self):
        policy = shamir.ThresholdPolicy(t=2, n=3)
        with pytest.raises(ValueError):
            shamir.split(SecretKey(3, 8), policy, seed=0)


def _counts_bruteforce_reference(policy, points):
    """Independent triple-loop enumeration (small cases only)."""
    q, t = policy.q, policy.t
    counts = [0] * q
    for coeff_tuple in itertools.product(range(q), repeat=t - 1):
        for a0 in range(q):
            coeffs = [a0, *coeff_tuple]
            if all(poly_eval(coeffs, x, q) == y for x, y in points):
                counts[a0] += 1
    return tuple(counts)


class TestSecrecyAudit:
    def test_uniform_posterior_below_threshold(self):
        policy = shamir.ThresholdPolicy(t=3, n=5, q=13)
        audit = shamir.secrecy_audit(policy, secret=7, seed=1)
        assert audit.counts == tuple([1] * 13)
        assert audit.uniform

    def test_threshold_subset_pins_secret(self):
        policy = shamir.ThresholdPolicy(t=3, n=5, q=13)
        audit = shamir.secrecy_audit(policy, secret=7, seed=1, subset_size=3)
        assert audit.counts[7] == 1
        assert sum(audit.counts) == 1

    def test_zero_shares_all_candidates_open(self):
        policy = shamir.ThresholdPolicy(t=1, n=3, q=13)
        audit = shamir.secrecy_audit(policy, secret=5, subset_size=0)
        assert audit.counts == tuple([1] * 13)

    def test_matches_reference_bruteforce(self):
        rng = random.Random(8)
        for t in (1, 2, 3):
            policy = shamir.ThresholdPolicy(t=t, n=4, q=13)
            secret = rng.randrange(13)
            for size in range(0, t + 1):
                audit = shamir.secrecy_audit(policy, secret, seed=9, subset_size=size)
                assert audit.counts == _counts_bruteforce_reference(policy, list(audit.subset))

    def test_large_q_refused(self):
        policy = shamir.ThresholdPolicy(t=2, n=3, q=8191)
        with pytest.raises(shamir.PolicyError):
            shamir.consistency_counts(policy, [(1, 1)])

    def test_chunks_use_independent_randomness(self):
        # Knowing every share of one chunk says nothing about another chunk:
        # its below-threshold posterior stays uniform, and the two chunk
        # polynomials differ (their shares are not translates of each other).
        policy = shamir.ThresholdPolicy(t=3, n=5, q=31)
        key = SecretKey.generate(20, random.Random(6))  # five 4-bit chunks
        bundles = shamir.split(key, policy, seed=13)
        for target_chunk in (1, 2):
            points = [(b.x, b.shares[target_chunk].y) for b in bundles[: policy.t - 1]]
            counts = shamir.consistency_counts(policy, points)
            assert counts == tuple([1] * 31)
        chunk0 = [b.shares[0].y for b in bundles]
        chunk1 = [b.shares[1].y for b in bundles]
        diffs = {(a - b) % 31 for a, b in zip(chunk0, chunk1)}
        assert len(diffs) > 1


class TestBundleSerialization:
    def test_roundtrip(self):
        policy = shamir.ThresholdPolicy(t=2, n=3, q=8191)
        key = SecretKey.generate(32, random.Random(5))
        for bundle in shamir.split(key, policy, seed=7):
            assert shamir.decode_bundle(shamir.encode_bundle(bundle)) == bundle

    def test_malformed_rejected(self):
        with pytest.raises(shamir.MalformedSharesError):
            shamir.decode_bundle(b"\x00\x00")
        with pytest.raises(shamir.MalformedSharesError):
            shamir.decode_bundle(b"\x00\x00\x00\x01" + b"\x00" * 7)
