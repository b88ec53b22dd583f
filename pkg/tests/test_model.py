import json

import numpy as np
import pytest

from coflowsched.model import (
    Coflow,
    CoflowInstance,
    aggregate_loads,
    cumulative_load,
    effective_size,
    horizon,
    instance_from_dict,
    instance_to_dict,
)
from coflowsched.verify import (
    blocking_pair_fixture,
    counterexample_fixture,
    staggered_release_fixture,
)


def test_aggregate_loads_spanning_pair():
    cf = Coflow({(0, 0): 2.0, (1, 1): 2.0})
    loads = aggregate_loads(cf, 2)
    assert loads.source_loads.tolist() == [2.0, 2.0]
    assert loads.dest_loads.tolist() == [2.0, 2.0]


def test_aggregate_loads_single_flow():
    loads = aggregate_loads(Coflow({(0, 1): 5.0}), 2)
    assert loads.source_loads.tolist() == [5.0, 0.0]
    assert loads.dest_loads.tolist() == [0.0, 5.0]


def test_aggregate_loads_first_staggered_coflow():
    cf = staggered_release_fixture().coflows[0]
    loads = aggregate_loads(cf, 2)
    assert loads.source_loads.tolist() == [1.0, 0.0]
    assert loads.dest_loads.tolist() == [1.0, 0.0]


def test_empty_demand_rejected():
    with pytest.raises(ValueError):
        Coflow({})


def test_nonpositive_demand_rejected():
    with pytest.raises(ValueError):
        Coflow({(0, 0): 0.0})
    with pytest.raises(ValueError):
        Coflow({(0, 0): -1.0})


def test_weight_and_release_validation():
    with pytest.raises(ValueError):
        Coflow({(0, 0): 1.0}, weight=0.0)
    with pytest.raises(ValueError):
        Coflow({(0, 0): 1.0}, release=-1.0)


def test_out_of_range_port_rejected():
    with pytest.raises(ValueError):
        CoflowInstance(2, [Coflow({(0, 2): 1.0})])
    with pytest.raises(ValueError):
        aggregate_loads(Coflow({(3, 0): 1.0}), 2)


def test_effective_size_examples():
    assert effective_size(Coflow({(0, 0): 2.0, (1, 1): 2.0}), 2) == 2.0
    assert effective_size(Coflow({(0, 0): 3.0}), 2) == 3.0
    assert effective_size(Coflow({(0, 1): 5.0}), 2) == 5.0


def test_cumulative_load_blocking_fixture():
    inst = blocking_pair_fixture()
    loads, peak = cumulative_load(inst, [0, 1, 2], 3)
    assert peak == 5.0
    assert loads.source_loads.tolist() == [5.0, 5.0]


def test_cumulative_load_prefix_one_is_effective_size():
    inst = blocking_pair_fixture()
    for first in range(3):
        ordering = [first] + [k for k in range(3) if k != first]
        _, peak = cumulative_load(inst, ordering, 1)
        assert peak == effective_size(inst.coflows[first], inst.n_ports)


def test_cumulative_load_counterexample_prefix():
    inst = counterexample_fixture()
    _, peak = cumulative_load(inst, [0, 1], 2)
    assert peak == 3.0


def test_cumulative_load_argument_errors():
    inst = blocking_pair_fixture()
    with pytest.raises(ValueError):
        cumulative_load(inst, [0, 1, 2], 0)
    with pytest.raises(ValueError):
        cumulative_load(inst, [0, 1, 2], 4)
    with pytest.raises(ValueError):
        cumulative_load(inst, [0, 0, 2], 2)


def test_horizon_examples():
    assert horizon(staggered_release_fixture()) == 8.0
    assert horizon(CoflowInstance(2, [Coflow({(0, 1): 4.0})])) == 4.0
    assert horizon(blocking_pair_fixture()) == 10.0


def test_horizon_dominates_releases():
    inst = staggered_release_fixture()
    assert horizon(inst) >= max(cf.release for cf in inst.coflows)


def test_effective_size_bounds_total_demand():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, n * n + 1))
        pairs = rng.choice(n * n, size=m, replace=False)
        demands = {(int(p) // n, int(p) % n): float(rng.integers(1, 20)) for p in pairs}
        cf = Coflow(demands)
        w = effective_size(cf, n)
        assert w <= cf.total_demand + 1e-9
        assert cf.total_demand <= n * w + 1e-9


def test_cumulative_load_full_prefix_is_ordering_invariant():
    inst = staggered_release_fixture()
    _, base = cumulative_load(inst, [0, 1, 2, 3], 4)
    rng = np.random.default_rng(1)
    for _ in range(10):
        perm = list(rng.permutation(4))
        _, peak = cumulative_load(inst, perm, 4)
        assert peak == base


def test_cumulative_load_monotone_and_balanced():
    inst = blocking_pair_fixture()
    prev = 0.0
    for k in range(1, 4):
        loads, peak = cumulative_load(inst, [2, 0, 1], k)
        assert peak >= prev
        prev = peak
        assert abs(loads.source_loads.sum() - loads.dest_loads.sum()) < 1e-9


def test_instance_json_round_trip(tmp_path):
    inst = staggered_release_fixture()
    data = instance_to_dict(inst)
    text = json.dumps(data)
    back = instance_from_dict(json.loads(text))
    assert back.n_ports == inst.n_ports
    assert back.capacity == inst.capacity
    for a, b in zip(back.coflows, inst.coflows):
        assert a.demands == b.demands
        assert a.release == b.release
        assert a.weight == b.weight
