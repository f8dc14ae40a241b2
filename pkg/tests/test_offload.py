import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridvocab.errors import ConfigError
from hybridvocab.offload import DEFAULT_HARDWARE, HardwareModel, breakeven_rows, simulate


def search_breakeven(hw, d, b, prompt, flops):
    """Oracle: exponential then binary search on the hidden predicate."""
    if not simulate(hw, 0, d, b, prompt, flops).hidden:
        return -1
    hi = 1
    while simulate(hw, hi, d, b, prompt, flops).hidden:
        hi *= 2
    lo = hi // 2  # hidden at lo, not at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if simulate(hw, mid, d, b, prompt, flops).hidden:
            lo = mid
        else:
            hi = mid
    return lo


def test_examples():
    hw = HardwareModel(link_bandwidth=1000, device_flops=1000, host_lookup_latency=0.001)
    tl = simulate(hw, 0, 4, 2, 3, 10)
    assert tl.transfer_time == 0 and tl.hidden
    tl = simulate(hw, 125, 4, 2, 2, 1000)  # 1000 bytes -> 1 s; prefill 2 s
    assert tl.transfer_time == 1 and tl.prefill_time == 2 and tl.exposed_latency == 0 and tl.hidden
    assert tl.embedding_time == Fraction(2) * Fraction(0.001)
    tl = simulate(hw, 250, 4, 2, 1, 500)  # transfer 2 s, prefill 0.5 s
    assert tl.exposed_latency == Fraction(3, 2) and not tl.hidden


def test_breakeven_examples():
    hw = HardwareModel(link_bandwidth=8, device_flops=1000, host_lookup_latency=1)
    assert breakeven_rows(hw, 4, 2, 1, 1000) == 1
    assert breakeven_rows(hw, 4, 2, 0, 1000) == 0
    hw1 = HardwareModel(link_bandwidth=1e9, device_flops=1e12, host_lookup_latency=1e-7)
    hw2 = HardwareModel(link_bandwidth=2e9, device_flops=1e12, host_lookup_latency=1e-7)
    assert breakeven_rows(hw2, 1024, 2, 512, 2e9) == 2 * breakeven_rows(hw1, 1024, 2, 512, 2e9)


def test_bad_hardware():
    for bad in (0, -1, float("inf"), float("nan")):
        with pytest.raises(ConfigError):
            HardwareModel(bad, 1, 1)
    with pytest.raises(ConfigError):
        simulate(DEFAULT_HARDWARE, -1, 4, 2, 1, 1)


@given(st.integers(0, 10**6), st.integers(1, 50))
def test_transfer_linear(n, k):
    hw = DEFAULT_HARDWARE
    base = simulate(hw, n, 2048, 2, 100, 1e9).transfer_time
    assert simulate(hw, k * n, 2048, 2, 100, 1e9).transfer_time == k * base
    assert simulate(hw, n, 4096, 2, 100, 1e9).transfer_time == 2 * base
    assert simulate(hw, n, 2048, 4, 100, 1e9).transfer_time == 2 * base


def test_embedding_never_on_device():
    from hybridvocab.subhead import memory_report
    assert memory_report(32000, 2048, 2, 3000).embedding_bytes_gpu == 0


@pytest.mark.parametrize("seed", range(50))
def test_breakeven_matches_search(seed):
    rng = random.Random(seed)
    hw = HardwareModel(rng.uniform(1e8, 1e11), rng.uniform(1e10, 1e14), rng.uniform(1e-9, 1e-5))
    args = (rng.choice([256, 1024, 2048, 4096]), rng.choice([2, 4]), rng.randint(0, 4096),
            rng.uniform(1e8, 1e10))
    n = breakeven_rows(hw, *args)
    assert n == search_breakeven(hw, *args)
    assert simulate(hw, n, *args).hidden and not simulate(hw, n + 1, *args).hidden
