import numpy as np
import pytest
from hypothesis import given

from conftest import make, rayleigh
from strategies import instance_and_budget
from ehcost import (
    Certificate,
    Instance,
    certified_wcr,
    evaluate_drop_set,
    lower_bound,
    lpcr,
    oracle_exhaustive,
    random_drop,
    wcr,
    wcr_certificate,
)
from ehcost.heuristics import lpcr_order


class TestLpcr:
    @pytest.mark.parametrize("M", [0, 1, 3, 5])
    def test_no_arrivals(self, M):
        p = np.array([2.0, 0.5, 3.0, 1.5, 0.25])
        inst = make(p, np.zeros(5))
        res = lpcr(inst, M)
        assert set(res.drops) == set((np.argsort(-p)[:M] + 1).tolist())
        assert res.total_cost == pytest.approx(lower_bound(inst, M)[0], rel=1e-9)

    def test_zero_drops(self):
        res = lpcr(make([2, 1, 3], [1, 2, 0]), 0)
        assert res.drops == ()
        assert res.total_cost == pytest.approx(3.6)

    def test_example(self):
        res = lpcr(make([2, 1, 3], [1, 2, 0]), 1)
        assert res.drops == (3,)
        assert res.total_cost == pytest.approx(1.4)

    def test_reuses_chi(self):
        inst = make([2, 1, 3], [1, 2, 0])
        assert lpcr(inst, 1, chi=np.array([1.0, 0.0, 0.0])).drops == (1,)

    def test_order_ties(self):
        chi = np.array([0.5, 0.5 + 1e-12, 1.0, 0.0])
        p = np.array([1.0, 2.0, 0.1, 5.0])
        assert lpcr_order(chi, p).tolist() == [2, 1, 0, 3]

    def test_bad_budget(self):
        with pytest.raises(ValueError):
            lpcr(make([1, 2], [0, 0]), 3)


class TestWcr:
    def test_example(self):
        res = wcr(make([2, 1, 3], [1, 2, 0]), 1)
        assert res.drops == (3,)
        assert res.total_cost == pytest.approx(1.4)

    @pytest.mark.parametrize("M", [0, 2, 4])
    def test_increasing_gains(self, M):
        inst = Instance(1, 1, 1, 0.2, [0.1, 0.2, 0.4, 0.8, 1.6], [0.3] * 5)
        assert wcr(inst, M).drops == tuple(range(1, M + 1))

    def test_drop_all(self):
        assert wcr(make([2, 1, 3], [1, 2, 0]), 3).total_cost == 0.0

    def test_equal_gains_drop_earlier(self):
        assert wcr(make([1, 1, 1], [0, 0, 0]), 2).drops == (1, 2)


class TestRandomDrop:
    def test_zero(self):
        inst = make([2, 1, 3], [1, 2, 0])
        for seed in range(5):
            assert random_drop(inst, 0, seed).total_cost == pytest.approx(3.6)

    def test_repeatable(self, rng):
        inst = rayleigh(rng, 30)
        assert random_drop(inst, 7, seed=11).drops == random_drop(inst, 7, seed=11).drops

    def test_depends_on_seed_and_instance(self, rng):
        inst = rayleigh(rng, 30)
        assert len({random_drop(inst, 7, seed=s).drops for s in range(10)}) > 1
        other = inst.replace(initial_storage=0.5)
        assert any(random_drop(inst, 7, s).drops != random_drop(other, 7, s).drops for s in range(5))

    def test_size(self, rng):
        res = random_drop(rayleigh(rng, 12), 5, seed=3)
        assert len(res.drop_set) == 5

    def test_mean_not_better_than_wcr(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            inst = rayleigh(rng, 12)
            costs = [random_drop(inst, 4, seed=s).total_cost for s in range(1000)]
            assert np.mean(costs) >= wcr(inst, 4).total_cost


class TestCertificates:
    def test_no_conventional(self):
        inst = make([1.0, 2.0, 3.0], [100.0, 0.0, 0.0])
        res = certified_wcr(inst, 1)
        assert res.certificate is Certificate.NO_CONVENTIONAL

    def test_full_renewable_use(self):
        inst = make([1.0, 2.0, 3.0], [0.1, 0.2, 0.0])
        assert certified_wcr(inst, 1).certificate is Certificate.FULL_RENEWABLE_USE

    def test_non_decreasing(self):
        inst = Instance(1, 1, 1, 0.2, [0.5, 0.5, 1.0, 2.0], [0.0, 0.0, 0.0, 5.0])
        assert certified_wcr(inst, 1).certificate is Certificate.NON_DECREASING_CHANNEL

    def test_none(self):
        inst = make([1.0, 3.0, 2.0], [0.0, 5.0, 0.0])
        assert wcr_certificate(inst, wcr(inst, 1)) is None

    def test_string_value(self):
        assert str(Certificate.NO_CONVENTIONAL) == "NoConventional"

    @given(instance_and_budget(max_n=8))
    def test_certificates_are_sound(self, case):
        inst, M = case
        res = certified_wcr(inst, M)
        if res.certificate is not None:
            assert res.total_cost == pytest.approx(oracle_exhaustive(inst, M).total_cost, rel=1e-9, abs=1e-12)


@given(instance_and_budget(max_n=8))
def test_sandwich(case):
    inst, M = case
    bound, chi = lower_bound(inst, M)
    best = oracle_exhaustive(inst, M).total_cost
    tol = 1e-7 * max(1.0, best)
    assert bound <= best + tol
    assert best <= lpcr(inst, M).total_cost + tol
    assert best <= wcr(inst, M).total_cost + tol
    assert np.all((chi >= 0) & (chi <= 1))
    assert chi.sum() <= M + 1e-9


def test_evaluate_matches_result():
    inst = make([2, 1, 3], [1, 2, 0])
    res = wcr(inst, 1)
    assert evaluate_drop_set(inst, res.drop_set).total_cost == res.total_cost
