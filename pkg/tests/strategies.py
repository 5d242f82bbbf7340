"""Hypothesis strategies for small instances."""

import numpy as np
from hypothesis import strategies as st

from ehcost import Instance

gain = st.floats(0.05, 5.0, allow_nan=False)
arrival = st.floats(0.0, 3.0, allow_nan=False)


@st.composite
def instances(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    gains = draw(st.lists(gain, min_size=n, max_size=n))
    arrivals = draw(st.lists(arrival, min_size=n, max_size=n))
    beta = draw(st.sampled_from([0.1, 0.2, 0.5]))
    storage = draw(st.sampled_from([0.0, 0.0, 0.7]))
    return Instance(1.0, 1.0, 1.0, beta, np.array(gains), np.array(arrivals), initial_storage=storage)


@st.composite
def instance_and_drops(draw, min_n=1, max_n=8):
    inst = draw(instances(min_n, max_n))
    drops = draw(st.sets(st.integers(1, inst.n_slots), max_size=inst.n_slots))
    return inst, drops


@st.composite
def instance_and_budget(draw, min_n=1, max_n=8):
    inst = draw(instances(min_n, max_n))
    return inst, draw(st.integers(0, inst.n_slots))
