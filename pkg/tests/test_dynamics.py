import math

import numpy as np
import pytest

from dqanneal.dynamics import (
    DissipatorSpec,
    IntegrationError,
    IntegratorConfig,
    evolve_full_oracle,
    evolve_lindblad,
    evolve_unitary,
    gamma_rate,
    initial_state,
    thermal_occupation,
)
from dqanneal.hamiltonian import build_full, build_reduced, reduced_to_full_isometry
from dqanneal.liouville import ReducedLiouville
from dqanneal.problem import build_instance
from dqanneal.protocols import NSDQA, QA, SQS
from dqanneal.spinspace import local_channel_generator


@pytest.fixture(scope="module")
def inst5():
    return build_instance(5)


@pytest.fixture(scope="module")
def eng5(inst5):
    return ReducedLiouville(inst5, j_xx=0.7)


def coarse(**kw):
    kw.setdefault("grid_points", 3)
    return IntegratorConfig(**kw)


def test_rates_and_occupation():
    assert gamma_rate(5, 1400.0) == pytest.approx(1.0 / 7000.0)
    assert thermal_occupation(1.0) == pytest.approx(1.0 / (math.e - 1.0))
    spec = DissipatorSpec.gainloss(0.1, beta=1.0)
    assert spec.gamma_up / spec.gamma_down == pytest.approx(math.exp(-1.0))
    assert spec.gamma_down - spec.gamma_up == pytest.approx(0.1)


def test_dissipator_validation():
    with pytest.raises(ValueError):
        DissipatorSpec(kind="white-noise")
    with pytest.raises(ValueError):
        DissipatorSpec.dephasing(-0.1)
    with pytest.raises(ValueError):
        DissipatorSpec.gainloss(0.1, beta=-2.0)
    assert DissipatorSpec.none().channels() == []
    assert DissipatorSpec.dephasing(0.0).channels() == []


def test_dissipator_dict_round_trip():
    for spec in (DissipatorSpec.none(), DissipatorSpec.dephasing(0.02),
                 DissipatorSpec.gainloss(0.05, beta=2.0)):
        assert DissipatorSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("N", [3, 5, 7])
def test_initial_state_is_driver_ground(N):
    inst = build_instance(N)
    for opset in (build_reduced(inst), build_full(inst)):
        psi = initial_state(opset)
        assert np.linalg.norm(psi) == pytest.approx(1.0)
        assert np.allclose(opset.Hx @ psi, -N * psi, atol=1e-10)


def test_reduced_initial_state_maps_to_uniform_superposition(inst5):
    red = build_reduced(inst5)
    V = reduced_to_full_isometry(red.split)
    assert np.allclose(V @ initial_state(red), np.full(32, 2.0 ** -2.5), atol=1e-12)


# -- unitary evolution ------------------------------------------------------

def test_reduced_matches_full_oracle_unitary(inst5):
    proto = NSDQA(T=100.0, j_xx=0.7)
    red = build_reduced(inst5, j_xx=0.7)
    full = build_full(inst5, j_xx=0.7)
    V = reduced_to_full_isometry(red.split)
    cfg = coarse(rtol=1e-11, atol=1e-13)
    tr = evolve_unitary(red, proto, config=cfg)
    tf = evolve_unitary(full, proto, config=cfg)
    assert np.max(np.abs(V @ tr.final_state - tf.final_state)) < 1e-8


def test_sqs_discontinuities_are_resolved(inst5):
    red = build_reduced(inst5)
    proto = SQS(T=30.0, t_q=24.0, dT_q=6.0, B_q=0.6)
    tr = evolve_unitary(red, proto, config=coarse(grid_points=7))
    assert tr.times[-1] == pytest.approx(36.0)
    full = build_full(inst5)
    tf = evolve_unitary(full, proto, config=coarse(grid_points=7))
    V = reduced_to_full_isometry(red.split)
    assert np.max(np.abs(V @ tr.final_state - tf.final_state)) < 1e-8


def test_magnus_agrees_with_rk(inst5):
    red = build_reduced(inst5, j_xx=0.6)
    proto = SQS(T=30.0, t_q=25.0, dT_q=5.0, B_q=0.6)
    t_rk = evolve_unitary(red, proto, config=coarse(grid_points=5))
    t_mg = evolve_unitary(red, proto,
                          config=coarse(method="magnus", magnus_steps=3000,
                                        grid_points=5))
    assert np.allclose(t_mg.times, t_rk.times)
    assert np.max(np.abs(t_rk.final_state - t_mg.final_state)) < 1e-6


def test_unitary_norm_is_preserved(inst5):
    red = build_reduced(inst5)
    tr = evolve_unitary(red, QA(T=50.0), config=coarse(grid_points=9))
    for i in range(9):
        assert tr.norm_or_trace(i) == pytest.approx(1.0, abs=1e-7)
        assert tr.purity(i) == 1.0


def test_tolerance_halving_converges(inst5):
    red = build_reduced(inst5, j_xx=0.7)
    proto = NSDQA(T=40.0, j_xx=0.7)
    loose = evolve_unitary(red, proto, config=coarse(rtol=1e-6, atol=1e-8))
    tight = evolve_unitary(red, proto, config=coarse(rtol=1e-10, atol=1e-12))
    assert np.max(np.abs(loose.final_state - tight.final_state)) < 1e-4
    tighter = evolve_unitary(red, proto, config=coarse(rtol=1e-11, atol=1e-13))
    assert np.max(np.abs(tight.final_state - tighter.final_state)) < 1e-8


def test_bad_initial_state_rejected(inst5):
    red = build_reduced(inst5)
    with pytest.raises(ValueError):
        evolve_unitary(red, QA(T=1.0), psi0=np.ones(5, dtype=complex))


# -- reduced Liouville space ------------------------------------------------

def test_liouville_dimensions(eng5):
    # factor dims (n+1)(n+2)(n+3)/6 for n = 2, 1, 2
    assert eng5.factor_dims == [10, 4, 10]
    assert eng5.dim == 400
    assert eng5.pure_dim == 18


def test_from_pure_and_mixed_traces(inst5, eng5):
    psi = initial_state(build_reduced(inst5, j_xx=0.7))
    p = eng5.from_pure(psi)
    assert eng5.trace(p) == pytest.approx(1.0)
    assert eng5.purity(p) == pytest.approx(1.0)
    mixed = eng5.maximally_mixed()
    assert eng5.trace(mixed) == pytest.approx(1.0)
    assert eng5.purity(mixed) == pytest.approx(1.0 / 32.0)
    assert eng5.trace_distance_to_mixed(mixed) < 1e-12


def test_lindblad_without_bath_matches_unitary(inst5, eng5):
    proto = NSDQA(T=20.0, j_xx=0.7)
    red = build_reduced(inst5, j_xx=0.7)
    tu = evolve_unitary(red, proto, config=coarse())
    tl = evolve_lindblad(red, proto, DissipatorSpec.none(),
                         config=coarse(rtol=1e-10, atol=1e-12), liouville=eng5)
    rho = eng5.top_block(tl.final_state)
    psi = tu.final_state
    assert np.max(np.abs(rho - np.outer(psi, psi.conj()))) < 1e-7
    assert tl.purity(-1) == pytest.approx(1.0, abs=1e-7)


@pytest.mark.parametrize("spec", [
    DissipatorSpec.dephasing(0.02),
    DissipatorSpec.gainloss(0.02, beta=1.0),
])
def test_reduced_matches_full_oracle_lindblad(inst5, eng5, spec):
    proto = NSDQA(T=15.0, j_xx=0.7)
    red = build_reduced(inst5, j_xx=0.7)
    full = build_full(inst5, j_xx=0.7)
    V = reduced_to_full_isometry(red.split)
    cfg = coarse(rtol=1e-9, atol=1e-11)
    tl = evolve_lindblad(red, proto, spec, config=cfg, liouville=eng5)
    tf = evolve_full_oracle(full, proto, spec, config=cfg)
    top = eng5.top_block(tl.final_state)
    top_oracle = V.T @ tf.final_state @ V
    assert np.max(np.abs(top - top_oracle)) < 1e-6
    assert abs(tl.purity(-1) - tf.purity(-1)) < 1e-8
    assert abs(tl.norm_or_trace(-1) - 1.0) < 1e-8


def test_dephasing_relaxes_to_maximally_mixed(inst5):
    eng = ReducedLiouville(inst5, j_xx=0.0)
    red = build_reduced(inst5)
    tl = evolve_lindblad(red, QA(T=1.0), DissipatorSpec.dephasing(0.5),
                         frozen_time=0.5, duration=2000.0,
                         config=coarse(rtol=1e-8, atol=1e-10), liouville=eng)
    assert eng.trace_distance_to_mixed(tl.final_state) < 1e-4


def test_gainloss_stationary_state_obeys_detailed_balance():
    from scipy.linalg import null_space

    beta = 1.0
    spec = DissipatorSpec.gainloss(1.0, beta=beta)
    G = (spec.gamma_up * local_channel_generator(1, "plus")
         + spec.gamma_down * local_channel_generator(1, "minus"))
    v = null_space(G)[:, 0]
    # single-spin block coordinates: (up,up), (up,dn), (dn,up), (dn,dn)
    assert abs(v[1]) < 1e-12 and abs(v[2]) < 1e-12
    assert np.real(v[0] / v[3]) == pytest.approx(math.exp(-beta))


def test_lindblad_rejects_bad_inputs(inst5, eng5):
    red = build_reduced(inst5, j_xx=0.7)
    full = build_full(inst5, j_xx=0.7)
    with pytest.raises(ValueError):
        evolve_lindblad(full, QA(T=1.0), DissipatorSpec.none())
    with pytest.raises(ValueError):
        evolve_lindblad(red, QA(T=1.0), DissipatorSpec.none(),
                        frozen_time=0.5, liouville=eng5)
    bad = eng5.maximally_mixed() * 2.0
    with pytest.raises(ValueError):
        evolve_lindblad(red, QA(T=1.0), DissipatorSpec.none(), rho0=bad,
                        liouville=eng5)


def test_full_density_oracle_size_limit():
    inst = build_instance(11)
    full = build_full(inst)
    with pytest.raises(ValueError):
        evolve_full_oracle(full, QA(T=1.0), DissipatorSpec.dephasing(0.1))


def test_drift_guard_trips(inst5):
    red = build_reduced(inst5)
    with pytest.raises(IntegrationError):
        evolve_unitary(red, QA(T=200.0),
                       config=coarse(rtol=1e-3, atol=1e-3, drift_tol=1e-12))


def test_adiabatic_onset_very_long_anneal(inst5):
    """With min gap ~1e-4, the anneal becomes adiabatic around T ~ 1/gap^2."""
    from dqanneal.observables import trajectory_fidelities

    red = build_reduced(inst5)
    cfg = IntegratorConfig(method="magnus", magnus_steps=10000, grid_points=2,
                           drift_tol=1e-6)
    fid = trajectory_fidelities(evolve_unitary(red, QA(T=1e9), config=cfg))[-1, 0]
    assert fid > 0.99
    # an order of magnitude below the adiabatic scale the sweep still fails
    fid_fast = trajectory_fidelities(
        evolve_unitary(red, QA(T=1e6), config=cfg))[-1, 0]
    assert fid_fast < 0.1


def test_initial_state_has_zero_magnetization(inst5):
    from dqanneal.spinspace import collective_operator, embed
    red = build_reduced(inst5)
    psi = initial_state(red)
    Sz = sum(
        embed([collective_operator(n / 2.0, "Sz") if k == b else None
               for k, n in enumerate(red.split.sizes)],
              [n + 1 for n in red.split.sizes])
        for b, _ in enumerate(red.split.sizes))
    assert abs(psi.conj() @ (Sz @ psi)) < 1e-12
