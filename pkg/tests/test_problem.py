import itertools

import numpy as np
import pytest

from dqanneal.problem import (
    MwisInstance,
    PenaltyBoundError,
    RawParams,
    brute_force_minimum,
    build_instance,
    ground_config,
    ising_energy,
    qubo_energy,
    qubo_ising_offset,
)


def test_subgraph_sizes():
    inst = build_instance(5)
    assert (inst.n0, inst.n1) == (2, 3)
    assert inst.n0 + inst.n1 == inst.N


@pytest.mark.parametrize("N,K,jzz", [
    # frozen from exact rational evaluation of the scaling recipe
    (5, 0.040348612007746934, 3.225871530019367),
    (7, 0.027795425667090215, 2.222244282083863),
])
def test_scaling_recipe(N, K, jzz):
    inst = build_instance(N)
    assert inst.K == pytest.approx(K, rel=1e-12)
    assert inst.j_zz == pytest.approx(jzz, rel=1e-12)


def test_effective_fields_consistent():
    inst = build_instance(5)
    assert inst.h0 == pytest.approx(inst.n1 * inst.j_zz - 2 * inst.W0 / inst.n0)
    assert inst.h1 == pytest.approx(inst.n0 * inst.j_zz - 2 * inst.W1 / inst.n1)
    assert inst.omega0 == pytest.approx(inst.W0 / inst.n0)
    assert inst.omega1 == pytest.approx(inst.W1 / inst.n1)


@pytest.mark.parametrize("N", [4, 2, 1, -3])
def test_bad_sizes_rejected(N):
    with pytest.raises(ValueError):
        build_instance(N)


def test_bad_raw_params_rejected():
    with pytest.raises(ValueError):
        RawParams(w0_prime=1.0, w1_prime=1.0)
    with pytest.raises(ValueError):
        RawParams(jzz_prime=-1.0)


def test_degrees_are_complete_bipartite():
    inst = build_instance(7)
    degree = np.zeros(inst.N, dtype=int)
    for i, j in inst.edges:
        degree[i] += 1
        degree[j] += 1
    assert list(degree[: inst.n0]) == [inst.n1] * inst.n0
    assert list(degree[inst.n0:]) == [inst.n0] * inst.n1


def test_qubo_empty_set_is_zero():
    inst = build_instance(5)
    assert qubo_energy(inst, np.zeros(5, dtype=int)) == 0.0


def test_qubo_g0_selected():
    inst = build_instance(5)
    bits = np.array([1, 1, 0, 0, 0])
    assert qubo_energy(inst, bits) == pytest.approx(-inst.W0)


def test_qubo_single_edge_penalty():
    inst = build_instance(5)
    bits = np.array([1, 0, 1, 0, 0])
    lam = inst.j_zz
    expected = -inst.omega0 - inst.omega1 + lam
    assert qubo_energy(inst, bits, lam) == pytest.approx(expected)


def test_qubo_penalty_bound_enforced():
    inst = build_instance(5)
    with pytest.raises(PenaltyBoundError):
        qubo_energy(inst, np.zeros(5, dtype=int), lam=0.1)


def test_ground_config_values():
    assert list(ground_config(build_instance(5))) == [1, 1, -1, -1, -1]
    assert list(ground_config(build_instance(3))) == [1, -1, -1]


@pytest.mark.parametrize("N", [3, 5, 7, 9, 11])
def test_ground_config_matches_brute_force(N):
    inst = build_instance(N)
    best, best_energy = brute_force_minimum(inst)
    assert np.array_equal(best, ground_config(inst))
    assert ising_energy(inst, ground_config(inst)) == pytest.approx(best_energy)


def test_single_flip_raises_energy():
    inst = build_instance(5)
    g = ground_config(inst)
    e0 = ising_energy(inst, g)
    for i in range(inst.N):
        flipped = g.copy()
        flipped[i] *= -1
        assert ising_energy(inst, flipped) > e0


@pytest.mark.parametrize("N", [3, 5, 7])
def test_qubo_ising_affine_relation(N):
    # ising(2x-1) = 4*qubo(x) + const over every configuration
    inst = build_instance(N)
    offset = qubo_ising_offset(inst)
    for bits in itertools.product((0, 1), repeat=N):
        bits = np.array(bits)
        lhs = ising_energy(inst, 2 * bits - 1)
        rhs = 4.0 * qubo_energy(inst, bits) + offset
        assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize("N", [3, 5, 7, 9, 11, 13])
def test_positivity_of_scaled_parameters(N):
    inst = build_instance(N)
    assert inst.K > 0
    assert inst.j_zz > 0
    assert inst.omega0 > 0
    assert inst.omega1 > 0


def test_json_round_trip():
    inst = build_instance(9)
    clone = MwisInstance.from_json(inst.to_json())
    assert clone == inst
