import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import E1, make
from ehcost import (
    Certificate,
    InstanceError,
    MultiCycleInstance,
    lower_bound,
    lpcr,
    mc_lower_bound,
    mc_lpcr,
    mc_oracle,
    mc_random_drop,
    mc_wcr,
    mc_wcr_certificates,
    oracle_exhaustive,
    storage_sensitivity,
    wcr,
)


def mc(p_inv, arrivals, cycles, K, beta=0.2):
    gains = E1 / np.asarray(p_inv, dtype=float)
    n = len(gains) // cycles
    return MultiCycleInstance(cycles, n, K, 1.0, 1.0, 1.0, beta, gains, arrivals)


def random_mc(rng, cycles, n, K, high=1.0):
    return MultiCycleInstance(cycles, n, K, 1.0, 1.0, 1.0, 0.2, rng.exponential(size=cycles * n), high * rng.uniform(size=cycles * n))


class TestInstance:
    def test_slot_count_checked(self):
        with pytest.raises(InstanceError):
            mc([1, 2, 3], [0, 0, 0], 2, 1)

    def test_budget_checked(self):
        with pytest.raises(InstanceError):
            mc([1, 2], [0, 0], 1, 3)

    def test_cycle_view(self, rng):
        m = random_mc(rng, 3, 4, 1)
        inst = m.cycle_instance(1, 0.5)
        assert inst.initial_storage == 0.5
        np.testing.assert_array_equal(inst.gains, m.gains[4:8])


class TestMcLpcr:
    def test_single_cycle(self, rng):
        m = random_mc(rng, 1, 8, 3)
        assert mc_lpcr(m).drop_set == lpcr(m.flat(), 3).drop_set

    def test_drained_cycle_passes_nothing(self):
        # cycle 1 keeps its cheaper slot and spends all 1.0 units on it
        m = mc([5, 2, 1, 1], [0.5, 0.5, 0.0, 0.0], 2, 1)
        res = mc_lpcr(m)
        np.testing.assert_allclose(res.allocation.renew[:2].sum(), 1.0)
        np.testing.assert_allclose(res.allocation.renew[2:], 0.0)

    def test_leftover_carries(self):
        m = mc([5, 1, 2, 1], [3.0, 0.0, 0.0, 0.0], 2, 1)
        res = mc_lpcr(m)
        assert res.drops == (1, 3)
        np.testing.assert_allclose(res.allocation.renew, [0, 1, 0, 1])
        assert res.total_cost == pytest.approx(0.4)

    def test_drop_everything(self, rng):
        assert mc_lpcr(random_mc(rng, 3, 4, 4)).total_cost == 0.0


class TestMcWcr:
    def test_single_cycle(self, rng):
        m = random_mc(rng, 1, 8, 3)
        assert mc_wcr(m).drop_set == wcr(m.flat(), 3).drop_set

    def test_monotone_gains(self):
        m = MultiCycleInstance(3, 4, 2, 1, 1, 1, 0.2, np.arange(1, 13, dtype=float), np.full(12, 0.1))
        assert mc_wcr(m).drops == (1, 2, 5, 6, 9, 10)

    def test_certified_cycles_are_optimal(self, rng):
        for _ in range(20):
            base = random_mc(rng, 3, 4, 1)
            # every slot's own arrival covers its inversion power
            m = dataclasses.replace(base, arrivals=base.arrivals + base.flat().p_inv)
            res = mc_wcr(m)
            certs = mc_wcr_certificates(m, res)
            assert all(c is Certificate.NO_CONVENTIONAL for c in certs)
            assert res.total_cost == pytest.approx(mc_oracle(m).total_cost, rel=1e-9)


class TestMcOracle:
    def test_cross_product_size(self, rng):
        assert mc_oracle(random_mc(rng, 2, 3, 1)).candidates_examined == 9

    def test_no_drops(self, rng):
        m = random_mc(rng, 2, 3, 0)
        res = mc_oracle(m)
        assert res.candidates_examined == 1
        assert res.drops == ()

    def test_single_cycle_agrees(self, rng):
        m = random_mc(rng, 1, 7, 3)
        assert mc_oracle(m).total_cost == pytest.approx(oracle_exhaustive(m.flat(), 3).total_cost)

    def test_per_cycle_budget(self, rng):
        m = random_mc(rng, 3, 4, 2)
        res = mc_oracle(m)
        for j in range(3):
            assert sum(1 for s in res.drop_set if 4 * j < s <= 4 * (j + 1)) == 2


class TestMcBound:
    def test_sandwich(self, rng):
        for _ in range(40):
            m = random_mc(rng, int(rng.integers(1, 4)), 4, int(rng.integers(0, 5)))
            best = mc_oracle(m).total_cost
            bound, chi = mc_lower_bound(m)
            tol = 1e-7 * max(1.0, best)
            assert bound <= best + tol
            assert best <= min(mc_lpcr(m).total_cost, mc_wcr(m).total_cost) + tol
            for j in range(m.cycles):
                assert chi[m.cycle_slice(j)].sum() <= m.drops_per_cycle + 1e-9

    def test_single_cycle_equals_lower_bound(self, rng):
        m = random_mc(rng, 1, 9, 4)
        assert mc_lower_bound(m)[0] == pytest.approx(lower_bound(m.flat(), 4)[0])


class TestRandom:
    def test_per_cycle_count_and_repeatable(self, rng):
        m = random_mc(rng, 4, 6, 2)
        a = mc_random_drop(m, seed=5)
        assert a.drops == mc_random_drop(m, seed=5).drops
        for j in range(4):
            assert sum(1 for s in a.drop_set if 6 * j < s <= 6 * (j + 1)) == 2


class TestStorageSensitivity:
    def test_tight(self):
        inst = make([2.0], [0.0])
        v0, v1, ok = storage_sensitivity(inst, 0, 1.0)
        assert (v0, v1) == (pytest.approx(2.0), pytest.approx(1.2))
        assert v0 - v1 == pytest.approx(0.8)
        assert ok

    def test_zero_delta(self):
        v0, v1, ok = storage_sensitivity(make([2.0, 1.0], [0.5, 0.0]), 1, 0.0)
        assert v0 == v1 and ok

    def test_large_delta_saturates(self):
        inst = make([2.0, 1.0], [0.5, 0.0])
        v0, v1, ok = storage_sensitivity(inst, 0, 100.0)
        conv_at_s = oracle_exhaustive(inst, 0).allocation.conv.sum()
        assert v0 - v1 == pytest.approx(0.8 * conv_at_s)
        assert ok

    def test_negative_delta(self):
        with pytest.raises(ValueError):
            storage_sensitivity(make([1.0], [0.0]), 0, -1.0)

    @given(st.integers(0, 10_000), st.floats(0.0, 5.0))
    def test_bound_holds(self, seed, delta):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 7))
        inst = make(rng.exponential(size=n) + 0.05, rng.uniform(size=n), storage=float(rng.uniform()))
        v0, v1, ok = storage_sensitivity(inst, int(rng.integers(0, n + 1)), delta)
        assert ok
        assert v0 - v1 <= 0.8 * delta + 1e-7
        assert v1 <= v0 + 1e-12


def test_replace_budget_keeps_data(rng):
    m = random_mc(rng, 2, 5, 1)
    m2 = dataclasses.replace(m, drops_per_cycle=3)
    np.testing.assert_array_equal(m.gains, m2.gains)
