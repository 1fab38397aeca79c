"""Maximum weighted independent set instances on complete bipartite graphs.

The instance family lives on K_{n0,n1} with n0 = (N-1)/2 and n1 = (N+1)/2
for odd N.  The heavier side G0 is the unique maximum weighted independent
set.  All couplings are rescaled by a size-dependent normalization K so that
problem and driver Hamiltonians keep comparable energy scales as N grows.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, asdict

import numpy as np

__all__ = [
    "RawParams",
    "MwisInstance",
    "build_instance",
    "qubo_energy",
    "ising_energy",
    "ground_config",
    "brute_force_minimum",
    "qubo_ising_offset",
]


class PenaltyBoundError(ValueError):
    """Penalty strength too weak to enforce the independent-set constraint."""


@dataclass(frozen=True)
class RawParams:
    """Dimensionless instance parameters, shared by every system size."""

    jzz_prime: float = 5.33
    w0_prime: float = 1.01
    w1_prime: float = 1.0
    e_scale: float = 15.0

    def __post_init__(self):
        if self.jzz_prime <= 0 or self.e_scale <= 0:
            raise ValueError("jzz_prime and e_scale must be positive")
        if not self.w0_prime > self.w1_prime > 0:
            raise ValueError("need w0_prime > w1_prime > 0 so G0 is the unique optimum")


@dataclass(frozen=True)
class MwisInstance:
    """Fully scaled problem data for one odd size N (energies in units of J).

    Sites are ordered G0 first (n0 sites), then G1 (n1 sites).  Edges are all
    pairs (i in G0, j in G1); within a side there are no edges, so the vertex
    degrees are c0 = n1 and c1 = n0.
    """

    N: int
    n0: int
    n1: int
    K: float
    j_zz: float
    omega0: float
    omega1: float
    W0: float
    W1: float
    h0: float
    h1: float
    raw: RawParams

    @property
    def edges(self):
        return [(i, self.n0 + j) for i in range(self.n0) for j in range(self.n1)]

    def site_weight(self, i: int) -> float:
        return self.omega0 if i < self.n0 else self.omega1

    def site_connectivity(self, i: int) -> int:
        return self.n1 if i < self.n0 else self.n0

    def to_json(self) -> str:
        record = asdict(self)
        record["raw"] = asdict(self.raw)
        return json.dumps(record, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "MwisInstance":
        record = json.loads(text)
        raw = RawParams(**record.pop("raw"))
        return cls(raw=raw, **record)


def build_instance(N: int, params: RawParams | None = None) -> MwisInstance:
    """Construct the scaled MWIS instance for odd N >= 3."""
    if N < 3 or N % 2 == 0:
        raise ValueError(f"N must be odd and >= 3, got {N}")
    if params is None:
        params = RawParams()
    n0 = (N - 1) // 2
    n1 = (N + 1) // 2
    K = (n0 + n1) / (4.0 * (n0 * n1 * params.jzz_prime - 1.0))
    scale = params.e_scale * K
    j_zz = scale * params.jzz_prime
    omega0 = scale * params.w0_prime / n0
    omega1 = scale * params.w1_prime / n1
    W0 = scale * params.w0_prime
    W1 = scale * params.w1_prime
    h0 = n1 * j_zz - 2.0 * W0 / n0
    h1 = n0 * j_zz - 2.0 * W1 / n1
    inst = MwisInstance(
        N=N, n0=n0, n1=n1, K=K, j_zz=j_zz,
        omega0=omega0, omega1=omega1, W0=W0, W1=W1, h0=h0, h1=h1,
        raw=params,
    )
    if K <= 0:
        raise ValueError("normalization K must be positive; check jzz_prime")
    return inst


def qubo_energy(instance: MwisInstance, bits, lam: float | None = None) -> float:
    """QUBO cost -sum w_i x_i + lam * sum_edges x_i x_j for a 0/1 assignment.

    lam defaults to j_zz, which satisfies the lam > 2 max_i w_i bound for the
    default parameters; a weaker penalty raises PenaltyBoundError since the
    minimizer is then no longer guaranteed to be an independent set.
    """
    bits = np.asarray(bits, dtype=int)
    if bits.shape != (instance.N,):
        raise ValueError(f"expected {instance.N} bits, got shape {bits.shape}")
    if not np.all((bits == 0) | (bits == 1)):
        raise ValueError("bits must be 0/1")
    if lam is None:
        lam = instance.j_zz
    bound = 2.0 * max(instance.omega0, instance.omega1)
    if lam <= bound:
        raise PenaltyBoundError(
            f"penalty lam={lam} must exceed 2*max weight = {bound}")
    weights = np.where(np.arange(instance.N) < instance.n0,
                       instance.omega0, instance.omega1)
    linear = -float(weights @ bits)
    penalty = float(np.sum(bits[: instance.n0])) * float(np.sum(bits[instance.n0:]))
    return linear + lam * penalty


def ising_energy(instance: MwisInstance, config) -> float:
    """Energy of a +-1 spin configuration under the MWIS Ising Hamiltonian.

    Implements sum_i (c_i j_zz - 2 w_i) s_i + j_zz sum_edges s_i s_j with the
    bipartite edge set; no 1/4 rescaling, matching the Hamiltonian used for
    the quantum dynamics.
    """
    s = np.asarray(config, dtype=int)
    if s.shape != (instance.N,):
        raise ValueError(f"expected {instance.N} spins, got shape {s.shape}")
    if not np.all(np.abs(s) == 1):
        raise ValueError("spins must be +-1")
    s0 = s[: instance.n0]
    s1 = s[instance.n0:]
    field = ((instance.n1 * instance.j_zz - 2.0 * instance.omega0) * np.sum(s0)
             + (instance.n0 * instance.j_zz - 2.0 * instance.omega1) * np.sum(s1))
    coupling = instance.j_zz * float(np.sum(s0)) * float(np.sum(s1))
    return float(field + coupling)


def ground_config(instance: MwisInstance) -> np.ndarray:
    """Analytic ground state: all G0 spins up, all G1 spins down."""
    s = np.ones(instance.N, dtype=int)
    s[instance.n0:] = -1
    return s


def brute_force_minimum(instance: MwisInstance):
    """Exhaustive Ising minimizer; only sensible for small N."""
    if instance.N > 21:
        raise ValueError("brute force limited to N <= 21")
    best_energy = np.inf
    best = None
    for values in itertools.product((-1, 1), repeat=instance.N):
        e = ising_energy(instance, values)
        if e < best_energy:
            best_energy = e
            best = np.array(values, dtype=int)
    return best, best_energy


def qubo_ising_offset(instance: MwisInstance, lam: float | None = None) -> float:
    """Constant by which 4*qubo_energy(x) and ising_energy(2x-1) differ.

    For lam = j_zz the two encodings describe the same cost landscape up to
    an overall factor 4 and this configuration-independent shift.
    """
    if lam is None:
        lam = instance.j_zz
    zeros = np.zeros(instance.N, dtype=int)
    return ising_energy(instance, 2 * zeros - 1) - 4.0 * qubo_energy(instance, zeros, lam)
