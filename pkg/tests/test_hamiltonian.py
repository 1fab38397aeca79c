import itertools

import numpy as np
import pytest

from dqanneal.hamiltonian import (
    assemble,
    build_full,
    build_reduced,
    reduced_to_full_isometry,
    sector_operators,
)
from dqanneal.problem import build_instance, ground_config, ising_energy
from dqanneal.spinspace import symmetric_dimension


@pytest.fixture(scope="module")
def inst5():
    return build_instance(5)


@pytest.mark.parametrize("N", [3, 5, 7])
def test_hermiticity_and_dims(N):
    inst = build_instance(N)
    red = build_reduced(inst, j_xx=0.8)
    full = build_full(inst, j_xx=0.8)
    assert red.dim == symmetric_dimension(N)
    assert full.dim == 2 ** N
    for H in (red.Hx, red.Hz, red.Hc, full.Hx, full.Hz, full.Hc):
        assert np.max(np.abs(H - H.conj().T)) < 1e-12


@pytest.mark.parametrize("N", [5, 7])
def test_driver_ground_energy(N):
    inst = build_instance(N)
    assert np.linalg.eigvalsh(build_reduced(inst).Hx)[0] == pytest.approx(-N)
    assert np.linalg.eigvalsh(build_full(inst).Hx)[0] == pytest.approx(-N)


@pytest.mark.parametrize("N", [5, 7])
def test_problem_ground_energy_matches_classical(N):
    inst = build_instance(N)
    e_classical = ising_energy(inst, ground_config(inst))
    assert np.linalg.eigvalsh(build_reduced(inst).Hz)[0] == pytest.approx(e_classical)
    assert np.linalg.eigvalsh(build_full(inst).Hz)[0] == pytest.approx(e_classical)


def test_zero_jxx_gives_zero_catalyst(inst5):
    assert np.count_nonzero(build_reduced(inst5, j_xx=0.0).Hc) == 0


def test_full_hz_spectrum_is_classical_energies(inst5):
    hz = build_full(inst5).Hz
    assert np.allclose(hz, np.diag(np.diag(hz)))
    spectrum = np.sort(np.diag(hz))
    energies = np.sort([
        ising_energy(inst5, np.array(s))
        for s in itertools.product((1, -1), repeat=5)
    ])
    assert np.allclose(spectrum, energies, atol=1e-10)


def test_reduced_spectrum_subset_of_full(inst5):
    red = build_reduced(inst5, j_xx=0.5)
    full = build_full(inst5, j_xx=0.5)
    er = np.linalg.eigvalsh(assemble(red, 0.5, 0.5, 0.25))
    ef = np.linalg.eigvalsh(assemble(full, 0.5, 0.5, 0.25))
    assert len(er) == 18 and len(ef) == 32
    for e in er:
        assert np.min(np.abs(ef - e)) < 1e-9


def test_assemble_limits(inst5):
    red = build_reduced(inst5, j_xx=0.5)
    assert np.allclose(assemble(red, 1, 0, 0), red.Hx)
    assert np.allclose(assemble(red, 0, 1, 0), red.Hz)
    H = assemble(red, 0.5, 0.5, 0.25)
    assert np.allclose(H, 0.5 * red.Hx + 0.5 * red.Hz + 0.25 * red.Hc)
    assert np.max(np.abs(H - H.conj().T)) < 1e-12


def test_assemble_ground_at_b1_is_classical_optimum(inst5):
    red = build_reduced(inst5)
    e0 = np.linalg.eigvalsh(assemble(red, 0.0, 1.0, 0.0))[0]
    assert e0 == pytest.approx(ising_energy(inst5, ground_config(inst5)))


def test_full_oracle_size_limit():
    with pytest.raises(ValueError):
        build_full(build_instance(15))


def test_symmetric_subspace_is_invariant(inst5):
    red = build_reduced(inst5, j_xx=0.7)
    full = build_full(inst5, j_xx=0.7)
    V = reduced_to_full_isometry(red.split)
    assert np.allclose(V.T @ V, np.eye(red.dim), atol=1e-12)
    for Hr, Hf in ((red.Hx, full.Hx), (red.Hz, full.Hz), (red.Hc, full.Hc)):
        assert np.max(np.abs(Hf @ V - V @ Hr)) < 1e-10


def test_sector_operators_match_build_reduced(inst5):
    red = build_reduced(inst5, j_xx=0.3)
    hx, hz, hc = sector_operators(inst5, 0.3, (1.0, 0.5, 1.0))
    assert np.allclose(hx, red.Hx)
    assert np.allclose(hz, red.Hz)
    assert np.allclose(hc, red.Hc)
