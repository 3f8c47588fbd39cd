import pytest

from gridsec import costmodel
from gridsec.opcount import OpCount


def test_opcount_fieldwise_arithmetic():
    a = OpCount(xor32=1, shift32=2, gf8_mul=3, mul8=4, gf8_inv=5)
    b = OpCount(xor32=10, shift32=20, gf8_mul=30, mul8=40, gf8_inv=50)
    assert a + b == OpCount(xor32=11, shift32=22, gf8_mul=33, mul8=44, gf8_inv=55)
    assert a.scaled(3) == OpCount(xor32=3, shift32=6, gf8_mul=9, mul8=12, gf8_inv=15)
    assert a.total() == 15
    with pytest.raises(ValueError):
        OpCount(xor32=-1)
    with pytest.raises(ValueError):
        a.scaled(-2)


def test_hmac_unit_values():
    report = costmodel.analytic_cost(costmodel.HMAC_SHA1, 512)
    assert report.blocks == 1
    assert report.ops == OpCount(xor32=762, shift32=132)


def test_aes_unit_values():
    report = costmodel.analytic_cost(costmodel.AES128, 512)
    assert report.ops == OpCount(xor32=1214, shift32=132, gf8_mul=320, mul8=44, gf8_inv=68)


def test_sub_unit_messages_pad_to_one_unit():
    padded = costmodel.analytic_cost(costmodel.HMAC_SHA1, 100)
    full = costmodel.analytic_cost(costmodel.HMAC_SHA1, 512)
    assert (padded.blocks, padded.ops) == (full.blocks, full.ops)
    assert costmodel.analytic_cost(costmodel.HMAC_SHA1, 1).blocks == 1


@pytest.mark.parametrize("scheme", costmodel.SCHEMES)
@pytest.mark.parametrize("k", [1, 2, 3, 8, 1000])
def test_exact_linearity_in_units(scheme, k):
    unit = costmodel.analytic_cost(scheme, 512).ops
    scaled = costmodel.analytic_cost(scheme, k * 512).ops
    assert scaled == unit.scaled(k)


def test_partial_final_unit_rounds_up():
    assert costmodel.analytic_cost(costmodel.AES128, 513).blocks == 2


@pytest.mark.parametrize("bits", [1, 100, 512, 4096, 123456])
def test_aes_xor_exceeds_hmac_everywhere(bits):
    hmac = costmodel.analytic_cost(costmodel.HMAC_SHA1, bits)
    aes = costmodel.analytic_cost(costmodel.AES128, bits)
    assert aes.ops.xor32 > hmac.ops.xor32
    assert aes.ops.shift32 == hmac.ops.shift32


def test_channel_cost_volume_and_compute():
    report = costmodel.channel_cost(10, 1.0)
    assert report.transfer_blocks == 20.0
    assert report.compute.ops == costmodel.analytic_cost(costmodel.HMAC_SHA1, 10 * 512).ops


def test_channel_cost_invariant_under_chaff_ratio():
    base = costmodel.channel_cost(7, 0.0)
    for ratio in (0.5, 1.0, 3.0, 10.0):
        report = costmodel.channel_cost(7, ratio)
        assert report.compute.ops == base.compute.ops
        assert report.transfer_blocks == pytest.approx(7 * (1 + ratio))


def test_channel_cost_zero_wheat():
    report = costmodel.channel_cost(0, 3.0)
    assert report.compute.ops == OpCount()
    assert report.transfer_blocks == 0.0


def test_size_errors():
    with pytest.raises(costmodel.MessageSizeError):
        costmodel.analytic_cost(costmodel.HMAC_SHA1, 0)
    with pytest.raises(costmodel.MessageSizeError):
        costmodel.analytic_cost(costmodel.HMAC_SHA1, 1 << 64)
    # AES has no upper message bound.
    assert costmodel.analytic_cost(costmodel.AES128, 1 << 64).blocks == (1 << 64) // 512
    with pytest.raises(ValueError):
        costmodel.analytic_cost("rot13", 512)
    with pytest.raises(ValueError):
        costmodel.channel_cost(-1, 1.0)
    with pytest.raises(ValueError):
        costmodel.channel_cost(1, -0.5)
