import math

import numpy as np
import pytest
from hypothesis import given
from numpy.testing import assert_allclose

from conftest import E1, make
from strategies import instance_and_drops, instances
from ehcost import (
    Allocation,
    Instance,
    InstanceError,
    channel_inversion_power,
    check_feasible,
    drop_budget,
    evaluate_drop_set,
    greedy_allocate,
    is_feasible,
    outage_indicator,
    total_cost,
    verify_greedy_kkt,
)
from ehcost.core import leftover_storage


def inst_with_gains(gains, rate=1.0, noise=1.0):
    return Instance(rate, noise, 1.0, 0.2, gains, np.zeros(len(gains)))


class TestChannelInversion:
    def test_unit_gain(self):
        assert channel_inversion_power(inst_with_gains([1.0]), 1) == pytest.approx(1.718282, abs=1e-6)

    def test_zero_rate(self):
        assert channel_inversion_power(inst_with_gains([0.3, 4.0], rate=0.0), 2) == 0.0

    def test_gain_two(self):
        assert channel_inversion_power(inst_with_gains([1.0, 2.0]), 2) == pytest.approx(0.859141, abs=1e-6)

    def test_slot_out_of_range(self):
        with pytest.raises(IndexError):
            channel_inversion_power(inst_with_gains([1.0]), 2)


class TestOutageIndicator:
    def setup_method(self):
        self.inst = make([2.0], [0.0])

    def test_exact_power(self):
        p = self.inst.p_inv[0]
        assert outage_indicator(self.inst, Allocation([p], [0.0]), 1) == 0

    def test_no_power(self):
        assert outage_indicator(self.inst, Allocation([0.0], [0.0]), 1) == 1

    def test_slightly_short(self):
        p = self.inst.p_inv[0]
        assert outage_indicator(self.inst, Allocation([0.5 * p], [0.49 * p]), 1) == 1


class TestDropBudget:
    @pytest.mark.parametrize("n, eps, want", [(200, 0.005, 1), (10, 0.0, 0), (10, 0.35, 3), (200, 0.3, 60)])
    def test_values(self, n, eps, want):
        assert drop_budget(n, eps) == want

    def test_rejects_one(self):
        with pytest.raises(ValueError):
            drop_budget(5, 1.0)


class TestTotalCost:
    def test_zero(self):
        inst = make([1.0, 2.0], [0.0, 0.0])
        assert total_cost(inst, Allocation([0, 0], [0, 0])) == 0.0

    def test_single(self):
        assert total_cost(make([3.0], [0.0]), Allocation([1.0], [2.0])) == pytest.approx(1.4)

    def test_three(self):
        inst = make([2, 1, 3], [1, 2, 0])
        assert total_cost(inst, Allocation([1, 0, 2], [1, 1, 1])) == pytest.approx(3.6)


class TestCheckFeasible:
    def test_prefix_violation(self):
        inst = make([2.0], [1.0])
        (v,) = check_feasible(inst, Allocation([0.0], [2.0]))
        assert (v.constraint, v.slot) == ("prefix-eh", 1)
        assert v.excess == pytest.approx(1.0)

    def test_outage_budget(self):
        inst = make([1.0, 2.0], [0.0, 0.0])
        names = [v.constraint for v in check_feasible(inst, Allocation([0, 0], [0, 0]))]
        assert names == ["outage-budget"]

    def test_negative_parts(self):
        inst = make([1.0], [5.0])
        names = {v.constraint for v in check_feasible(inst, Allocation([-1.0], [2.0]))}
        assert names == {"nonnegative-conv"}

    def test_explicit_budget(self):
        inst = make([1.0, 2.0], [0.0, 0.0])
        assert is_feasible(inst, Allocation([0, 0], [0, 0]), budget=2)

    @given(instance_and_drops())
    def test_greedy_output_feasible(self, case):
        inst, drops = case
        assert check_feasible(inst, greedy_allocate(inst, drops), budget=len(drops)) == []


class TestGreedy:
    def test_keep_all(self):
        inst = make([2, 1, 3], [1, 2, 0])
        alloc = greedy_allocate(inst, ())
        assert_allclose(alloc.renew, [1, 1, 1], atol=1e-12)
        assert_allclose(alloc.conv, [1, 0, 2], atol=1e-12)
        assert total_cost(inst, alloc) == pytest.approx(3.6)

    def test_drop_third(self):
        inst = make([2, 1, 3], [1, 2, 0])
        alloc = greedy_allocate(inst, {3})
        assert_allclose(alloc.renew, [1, 1, 0], atol=1e-12)
        assert_allclose(alloc.conv, [1, 0, 0], atol=1e-12)
        assert total_cost(inst, alloc) == pytest.approx(1.4)

    def test_drop_everything(self):
        inst = make([2, 1, 3], [1, 2, 0])
        res = evaluate_drop_set(inst, [1, 2, 3])
        assert res.total_cost == 0.0
        assert not res.allocation.total.any()

    def test_initial_storage_used_first(self):
        inst = make([2.0, 2.0], [0.0, 0.0], storage=3.0)
        alloc = greedy_allocate(inst, ())
        assert_allclose(alloc.renew, [2.0, 1.0])
        assert leftover_storage(inst, alloc) == 0.0

    def test_bad_slot(self):
        with pytest.raises(IndexError):
            greedy_allocate(make([1.0], [0.0]), {2})

    @given(instance_and_drops())
    def test_matches_scalar_recursion(self, case):
        inst, drops = case
        alloc = greedy_allocate(inst, drops)
        s = inst.initial_storage
        for k in range(inst.n_slots):
            s += inst.arrivals[k]
            need = 0.0 if k + 1 in drops else inst.p_inv[k]
            r = min(need, s)
            s -= r
            assert alloc.renew[k] == pytest.approx(r, abs=1e-9)
            assert alloc.conv[k] == pytest.approx(need - r, abs=1e-9)


class TestKKT:
    def test_greedy_example(self):
        inst = make([2, 1, 3], [1, 2, 0])
        assert verify_greedy_kkt(inst, (), greedy_allocate(inst, ()))

    def test_unused_renewables_rejected(self):
        inst = make([2, 1, 3], [1, 2, 0])
        alloc = Allocation(inst.p_inv, np.zeros(3))
        assert not verify_greedy_kkt(inst, (), alloc)

    def test_no_arrivals(self):
        inst = make([2, 1, 3], [0, 0, 0])
        assert verify_greedy_kkt(inst, (), greedy_allocate(inst, ()))

    def test_infeasible_rejected(self):
        inst = make([1.0], [0.5])
        assert not verify_greedy_kkt(inst, (), Allocation([0.0], [1.0]))

    def test_wasted_renewable_rejected(self):
        inst = make([1.0, 1.0], [2.0, 0.0])
        assert not verify_greedy_kkt(inst, (), Allocation([0.5, 1.0], [0.5, 0.0]))

    @given(instance_and_drops())
    def test_greedy_always_certified(self, case):
        inst, drops = case
        assert verify_greedy_kkt(inst, drops, greedy_allocate(inst, drops))


class TestInstance:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(gains=[1.0, -1.0]),
            dict(gains=[1.0, 0.0]),
            dict(arrivals=[1.0, -0.1]),
            dict(arrivals=[1.0, math.nan]),
            dict(price_conv=0.1),
            dict(noise=0.0),
            dict(epsilon=1.0),
            dict(initial_storage=-1.0),
            dict(gains=[]),
        ],
    )
    def test_rejects(self, kwargs):
        base = dict(rate=1, noise=1, price_conv=1, price_renew=0.2, gains=[1.0, 2.0], arrivals=[0.5, 0.5])
        base.update(kwargs)
        if "gains" in kwargs and not kwargs["gains"]:
            base["arrivals"] = []
        with pytest.raises(InstanceError):
            Instance(**base)

    def test_arrays_read_only(self):
        inst = make([1.0, 2.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            inst.gains[0] = 3.0

    def test_p_inv(self):
        inst = make([2.0, 0.5], [0, 0])
        assert_allclose(inst.p_inv, [2.0, 0.5])
        assert inst.p_inv[0] == pytest.approx(E1 / inst.gains[0])

    @given(instances())
    def test_digest_stable(self, inst):
        assert inst.digest() == inst.replace().digest()
        assert inst.digest() != inst.replace(initial_storage=inst.initial_storage + 1).digest()
