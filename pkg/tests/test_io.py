import numpy as np
import pytest

from conftest import rayleigh
from ehcost import MultiCycleInstance
from ehcost.io import (
    InstanceFormatError,
    format_instance,
    format_multicycle,
    parse_instance,
    parse_multicycle,
    read_instance,
    write_instance,
    write_multicycle,
    read_multicycle,
)

GOOD = """# three slots
3 1 1 1 0.2 0.34 0.5
1.0 0.5   # g T
2.0 0

0.5 1.25
"""


def test_parse():
    inst = parse_instance(GOOD)
    assert inst.n_slots == 3
    assert inst.drop_budget == 1
    assert inst.initial_storage == 0.5
    np.testing.assert_array_equal(inst.arrivals, [0.5, 0.0, 1.25])


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("3 1 1 1 0.2 0.34 0\n1 1\nnan 1\n1 1\n", 3, "non-finite"),
        ("2 1 1 1 0.2 0 0\n1 -1\n1 1\n", 2, "negative"),
        ("2 1 1 1 0.2 0\n", 1, "7 fields"),
        ("2 1 1 1 0.2 0 0\n1 1\n", 2, "expected 2"),
        ("2 1 1 1 0.2 0 0\n1 1\n1 1 1\n", 3, "'g T'"),
        ("2.5 1 1 1 0.2 0 0\n1 1\n1 1\n", 1, "integer"),
        ("1 1 1 1 0.2 0 0\n0 1\n", 2, "positive"),
        ("1 1 1 0.1 0.2 0 0\n1 1\n", 1, "price"),
        ("# only a comment\n", 1, "empty"),
        ("1 1 1 1 0.2 0 0\nx 1\n", 2, "not a number"),
    ],
)
def test_errors_carry_line(text, line, fragment):
    with pytest.raises(InstanceFormatError) as err:
        parse_instance(text, "f.txt")
    assert err.value.line == line
    assert f"f.txt:{line}:" in str(err.value)
    assert fragment in str(err.value)


def test_round_trip(tmp_path, rng):
    inst = rayleigh(rng, 9, storage=0.25, epsilon=0.3)
    path = tmp_path / "inst.txt"
    write_instance(path, inst)
    back = read_instance(path)
    assert back.digest() == inst.digest()
    assert format_instance(back) == format_instance(inst)


def test_multicycle_round_trip(tmp_path, rng):
    m = MultiCycleInstance(3, 4, 2, 1.0, 1.0, 1.0, 0.2, rng.exponential(size=12), rng.uniform(size=12))
    path = tmp_path / "mc.txt"
    write_multicycle(path, m)
    back = read_multicycle(path)
    assert (back.cycles, back.slots_per_cycle, back.drops_per_cycle) == (3, 4, 2)
    np.testing.assert_array_equal(back.gains, m.gains)
    assert format_multicycle(back) == format_multicycle(m)


def test_multicycle_errors():
    with pytest.raises(InstanceFormatError) as err:
        parse_multicycle("2 2 3 1 1 1 0.2\n" + "1 1\n" * 4)
    assert err.value.line == 1
    with pytest.raises(InstanceFormatError) as err:
        parse_multicycle("2 2 1 1 1 1 0.2\n" + "1 1\n" * 3)
    assert err.value.line == 4
