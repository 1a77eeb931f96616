import math

import numpy as np
import pytest

from hypermajority import stats as ST
from hypermajority.dynamics import Trajectory
from hypermajority.lattice import Configuration, LatticeGeometry


def test_estimate_of_constant_values():
    e = ST.Estimate.from_values([3.0] * 10)
    assert e.mean == 3.0 and e.std_err == 0.0 and e.replicas == 10


def test_estimate_edge_cases():
    assert math.isnan(ST.Estimate.from_values([]).mean)
    assert math.isnan(ST.Estimate.from_values([1.0]).std_err)


def test_estimate_comparison():
    a = ST.Estimate(1.0, 0.1, 10)
    b = ST.Estimate(0.5, 0.1, 10)
    assert a.above(b) and not b.above(a)
    assert not a.above(ST.Estimate(0.8, 0.1, 10))


def test_density_examples():
    g = LatticeGeometry.torus(6, 2)
    assert ST.density(Configuration.zeros(g)) == 0.0
    assert ST.density(Configuration.ones(g)) == 1.0
    checker = Configuration(g, (np.add.outer(np.arange(6), np.arange(6)) % 2).astype(np.uint8))
    assert ST.density(checker) == 0.5


def _traj(states, times, T):
    g = LatticeGeometry.torus(3, 1)
    cfgs = [Configuration(g, np.full(3, s, dtype=np.uint8)) for s in states]
    return Trajectory(times, cfgs, T)


def test_occupation_time_examples():
    assert ST.occupation_time(_traj([1], [0.0], 4.0), (0,)) == 1.0
    assert ST.occupation_time(_traj([0], [0.0], 4.0), (0,)) == 0.0
    assert ST.occupation_time(_traj([0, 1], [0.0, 2.0], 4.0), (1,)) == 0.5
    assert ST.occupation_time(_traj([1], [0.0], 0.0), (0,)) == 1.0


def test_map_replicas_keeps_order():
    assert ST.map_replicas(lambda k: k * k, 20, threads=4) == [k * k for k in range(20)]
    assert ST.map_replicas(lambda k: k, 0, threads=4) == []


def test_make_rule():
    with pytest.raises(ValueError):
        ST.make_rule("majority", None)
    with pytest.raises(ValueError):
        ST.make_rule("ising", 3)


def test_disagreement_at_time_zero():
    (e,) = ST.disagreement_probability("majority", 1, 3, 1, [0.0], 300, seed=1)
    assert abs(e.mean - 0.5) <= 3 * e.std_err


def test_disagreement_same_vertex_is_zero():
    est = ST.disagreement_probability("majority", 1, 3, 0, [0.0, 5.0], 10, seed=1)
    assert all(e.mean == 0.0 and e.std_err == 0.0 for e in est)


def test_disagreement_side_guard():
    with pytest.raises(ValueError):
        ST.disagreement_probability("voter", 1, None, 5, [1.0], 2, seed=0, side=50)


def test_disagreement_decreases():
    e10, e100 = ST.disagreement_probability("majority", 1, 3, 1, [10.0, 100.0], 150, seed=2)
    assert e10.above(e100)


def test_disagreement_deterministic_across_threads():
    a = ST.disagreement_probability("voter", 1, None, 2, [3.0], 8, seed=5, threads=1)
    b = ST.disagreement_probability("voter", 1, None, 2, [3.0], 8, seed=5, threads=3)
    assert np.array_equal(a[0].values, b[0].values)


def test_final_densities_invasion_n2():
    dens = ST.final_densities("majority", 1, 2, 100, 200.0, 10, seed=3)
    assert np.all(dens >= 0.99)


def test_extinction_single_vertex():
    res = ST.extinction_time(1, 10_000, seed=4)
    assert res.flagged == 0
    assert abs(res.estimate.mean - 1 / 9) <= 3 * res.estimate.std_err


def test_extinction_flags():
    tight = ST.extinction_time(6, 20, seed=5, margin=2)
    assert tight.flagged_fraction > 0.5
    assert all(r.flag in ("ok", "boundary", "cap") for r in tight.records)
    capped = ST.extinction_time(6, 5, seed=5, cap=0.01)
    assert {r.flag for r in capped.records} == {"cap"} and math.isnan(capped.estimate.mean)


def test_extinction_argument_checks():
    with pytest.raises(ValueError):
        ST.extinction_time(0, 5, seed=0)
    with pytest.raises(ValueError):
        ST.extinction_time(4, 5, seed=0, margin=1)


def test_extinction_grows_with_m():
    small = ST.extinction_time(4, 60, seed=6).estimate
    large = ST.extinction_time(10, 60, seed=6).estimate
    assert large.above(small)
