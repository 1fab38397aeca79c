"""Driver, problem, and catalyst Hamiltonians in reduced and full spaces.

The reduced space is the product of maximal-spin Dicke ladders of the three
subgraphs; the full 2^N space exists purely as a validation oracle.  Site
ordering in the full space is G0 first, then G1', then the two catalyst
sites Gc (the designated pair in G1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .problem import MwisInstance
from .spinspace import (
    SubgraphSplit,
    collective_operator,
    embed,
    pure_symmetric_isometry,
)

__all__ = [
    "OperatorSet",
    "build_reduced",
    "build_full",
    "assemble",
    "sector_operators",
    "reduced_to_full_isometry",
]

FULL_ORACLE_MAX_N = 13


@dataclass(frozen=True)
class OperatorSet:
    """Hermitian Hx, Hz, Hc on one declared space, in units of J."""

    Hx: np.ndarray
    Hz: np.ndarray
    Hc: np.ndarray
    space: str  # "reduced" or "full"
    instance: MwisInstance
    j_xx: float
    split: SubgraphSplit = field(compare=False, default=None)

    @property
    def dim(self) -> int:
        return self.Hx.shape[0]


def sector_operators(instance: MwisInstance, j_xx: float, js) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(Hx, Hz, Hc) on the product of fixed-j sectors (j0, j1', jc).

    Valid for any j triple in the block ladder; the pure-state space is the
    maximal triple.  Hc lives entirely on the catalyst factor.
    """
    j0, j1p, jc = js
    dims = tuple(int(round(2 * j)) + 1 for j in js)
    sz = [collective_operator(j, "Sz") for j in js]
    sx = [collective_operator(j, "Sx") for j in js]
    sz0 = embed((sz[0], None, None), dims)
    sz1 = embed((None, sz[1], None), dims) + embed((None, None, sz[2]), dims)
    hz = (2.0 * instance.h0 * sz0 + 2.0 * instance.h1 * sz1
          + 4.0 * instance.j_zz * embed((sz[0], None, None), dims)
          @ (embed((None, sz[1], None), dims) + embed((None, None, sz[2]), dims)))
    hx = -2.0 * (embed((sx[0], None, None), dims)
                 + embed((None, sx[1], None), dims)
                 + embed((None, None, sx[2]), dims))
    sxc2 = collective_operator(jc, "Sx2")
    hc = j_xx * embed((None, None, 2.0 * sxc2 - np.eye(dims[2])), dims)
    return hx, hz, hc


def build_reduced(instance: MwisInstance, j_xx: float = 0.0) -> OperatorSet:
    """Operator set on the symmetric pure-state space of dimension 3(N^2-1)/4."""
    if not np.isfinite(j_xx):
        raise ValueError("j_xx must be finite")
    split = SubgraphSplit.for_size(instance.N)
    js = tuple(n / 2.0 for n in split.sizes)
    hx, hz, hc = sector_operators(instance, j_xx, js)
    return OperatorSet(Hx=hx, Hz=hz, Hc=hc, space="reduced",
                       instance=instance, j_xx=j_xx, split=split)


def _pauli_site(N: int, site: int, op: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1))
    for k in range(N):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def build_full(instance: MwisInstance, j_xx: float = 0.0) -> OperatorSet:
    """Unreduced 2^N operator set; oracle only, rejected above N=13."""
    N = instance.N
    if N > FULL_ORACLE_MAX_N:
        raise ValueError(f"full-space oracle limited to N <= {FULL_ORACLE_MAX_N}")
    split = SubgraphSplit.for_size(N)
    sigx = np.array([[0.0, 1.0], [1.0, 0.0]])
    sigz = np.diag([1.0, -1.0])
    dim = 2 ** N
    hx = np.zeros((dim, dim))
    hz = np.zeros((dim, dim))
    for i in range(N):
        hx -= _pauli_site(N, i, sigx)
        coeff = instance.site_connectivity(i) * instance.j_zz - 2.0 * instance.site_weight(i)
        hz += coeff * _pauli_site(N, i, sigz)
    for i, j in instance.edges:
        hz += instance.j_zz * _pauli_site(N, i, sigz) @ _pauli_site(N, j, sigz)
    # catalyst pair: the two Gc sites, placed last in the site ordering
    a, b = N - 2, N - 1
    hc = j_xx * _pauli_site(N, a, sigx) @ _pauli_site(N, b, sigx)
    return OperatorSet(Hx=hx, Hz=hz, Hc=hc, space="full",
                       instance=instance, j_xx=j_xx, split=split)


def assemble(opset: OperatorSet, A: float, B: float, C: float) -> np.ndarray:
    """A*Hx + B*Hz + C*Hc; C = 0 recovers the plain annealing Hamiltonian."""
    if not (np.isfinite(A) and np.isfinite(B) and np.isfinite(C)):
        raise ValueError("schedule coefficients must be finite")
    H = A * opset.Hx + B * opset.Hz
    if C != 0.0:
        H = H + C * opset.Hc
    return H


def reduced_to_full_isometry(split: SubgraphSplit) -> np.ndarray:
    """Isometry embedding reduced pure states into the 2^N site space."""
    V = pure_symmetric_isometry(split.n0)
    V = np.kron(V, pure_symmetric_isometry(split.n1p))
    V = np.kron(V, pure_symmetric_isometry(split.nc))
    return V
