"""Permutation-symmetric spin spaces for the three subgraphs G0, G1', Gc.

Pure states of the annealing dynamics live in the product of the maximal-spin
(j = n/2) Dicke ladders of the three subgraphs.  Open-system dynamics with
local jump operators leaks into lower-j sectors but never creates coherence
between different j, so density matrices are stored as one dense block per
j-sector triple.

Collective operators are standard angular-momentum matrices.  The reduction
of a sum of local jump channels to the block structure is computed exactly by
projecting the full 2^n-site superoperator of one subgraph onto the basis of
permutation-invariant operators; subgraph sizes stay small enough (n <= 8)
that this is cheap, and the construction is validated against full-space
oracle evolution in the tests.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

__all__ = [
    "SubgraphSplit",
    "BlockStructure",
    "symmetric_dimension",
    "degeneracy",
    "j_ladder",
    "collective_operator",
    "embed",
    "pure_symmetric_isometry",
    "dicke_basis_matrix",
    "local_channel_generator",
]


@dataclass(frozen=True)
class SubgraphSplit:
    """Sizes of the three permutation-invariant subgraphs.

    Gc always holds the two sites coupled by the catalyst; G1' is the rest
    of G1 and may be empty for N = 3.
    """

    n0: int
    n1p: int
    nc: int = 2

    def __post_init__(self):
        if self.nc != 2:
            raise ValueError("catalyst subgraph must contain exactly two sites")
        if self.n0 < 1 or self.n1p < 0:
            raise ValueError(f"invalid subgraph sizes {self}")

    @property
    def N(self) -> int:
        return self.n0 + self.n1p + self.nc

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.n0, self.n1p, self.nc)

    @classmethod
    def for_size(cls, N: int) -> "SubgraphSplit":
        if N < 3 or N % 2 == 0:
            raise ValueError(f"N must be odd and >= 3, got {N}")
        n0 = (N - 1) // 2
        n1 = (N + 1) // 2
        return cls(n0=n0, n1p=n1 - 2)

    @property
    def pure_dims(self) -> tuple[int, int, int]:
        return tuple(n + 1 for n in self.sizes)


def symmetric_dimension(N: int) -> int:
    """Dimension of the reduced pure-state space, 3(N^2-1)/4."""
    split = SubgraphSplit.for_size(N)
    dim = int(np.prod(split.pure_dims))
    assert dim == 3 * (N * N - 1) // 4
    return dim


def j_ladder(n: int) -> list[int]:
    """Allowed total-spin sectors for n spins, as twice-j integers, ascending.

    j_min is 0 for even n and 1/2 for odd n; n = 0 gives the single trivial
    sector.
    """
    if n < 0:
        raise ValueError("subgraph size must be non-negative")
    if n == 0:
        return [0]
    return list(range(n % 2, n + 1, 2))


def degeneracy(n: int, j) -> int:
    """Multiplicity of the spin-j sector of n spins 1/2."""
    twoj = int(round(2 * j))
    if twoj not in j_ladder(n):
        raise ValueError(f"j={j} not in the ladder for n={n} spins")
    if n == 0:
        return 1
    half = (n - twoj) // 2
    return (twoj + 1) * factorial(n) // (factorial(half + twoj + 1) * factorial(half))


def collective_operator(j, kind: str) -> np.ndarray:
    """Spin-j matrix in the m-descending basis (m = j, j-1, ..., -j).

    kind is one of Sz, Sx, Splus, Sminus, Sx2.
    """
    twoj = int(round(2 * j))
    if twoj < 0 or abs(2 * j - twoj) > 1e-12:
        raise ValueError(f"invalid spin quantum number j={j}")
    dim = twoj + 1
    m = (twoj - 2 * np.arange(dim)) / 2.0
    jj = twoj / 2.0
    if kind == "Sz":
        return np.diag(m)
    # S+|j,m> = sqrt((j-m)(j+m+1)) |j,m+1>; m ascends as the index decreases
    up = np.sqrt((jj - m[1:]) * (jj + m[1:] + 1.0))
    splus = np.zeros((dim, dim))
    splus[np.arange(dim - 1), np.arange(1, dim)] = up
    if kind == "Splus":
        return splus
    if kind == "Sminus":
        return splus.T
    if kind == "Sx":
        return 0.5 * (splus + splus.T)
    if kind == "Sx2":
        sx = 0.5 * (splus + splus.T)
        return sx @ sx
    raise ValueError(f"unknown collective operator kind {kind!r}")


def embed(ops, dims) -> np.ndarray:
    """Kronecker-embed per-factor operators; None stands for the identity."""
    full = None
    for op, dim in zip(ops, dims, strict=True):
        factor = np.eye(dim) if op is None else np.asarray(op)
        if factor.shape != (dim, dim):
            raise ValueError(f"operator shape {factor.shape} != factor dim {dim}")
        full = factor if full is None else np.kron(full, factor)
    return full


# ---------------------------------------------------------------------------
# Dicke structure of the full 2^n space of one subgraph
# ---------------------------------------------------------------------------

def _site_operator(n: int, site: int, op: np.ndarray) -> np.ndarray:
    mats = [op if k == site else np.eye(2) for k in range(n)]
    full = mats[0]
    for mat in mats[1:]:
        full = np.kron(full, mat)
    return full


_SIGMA_Z = np.diag([1.0, -1.0])
_SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]])  # |up><down| with up = bit 0


def pure_symmetric_isometry(n: int) -> np.ndarray:
    """Isometry from the (n+1)-dim symmetric ladder into the 2^n site space.

    Column i is the Dicke state |j=n/2, m=j-i> as a normalized symmetric sum
    over bitstrings with n-i spins up (bit 0 = up in the site ordering).
    """
    if n == 0:
        return np.ones((1, 1))
    cols = np.zeros((2 ** n, n + 1))
    ones_count = np.array([bin(x).count("1") for x in range(2 ** n)])
    for i in range(n + 1):
        k_down = i  # m = n/2 - i  ->  i spins down
        mask = ones_count == k_down
        cols[mask, i] = 1.0 / np.sqrt(comb(n, k_down))
    return cols


@functools.lru_cache(maxsize=None)
def dicke_basis_matrix(n: int):
    """Orthonormal |j, alpha, m> basis of the 2^n space of one subgraph.

    Returns (U, labels) with one column of U per (twoj, alpha, m-index)
    triple in labels; m indexed descending within each (j, alpha) copy.
    Copies are generated by laddering down from an orthonormal basis of the
    highest-weight space, so collective operators act identically on every
    copy.
    """
    if n == 0:
        return np.ones((1, 1)), [(0, 0, 0)]
    dim = 2 ** n
    sz = sum(_site_operator(n, k, _SIGMA_Z) for k in range(n)) / 2.0
    sp = sum(_site_operator(n, k, _SIGMA_PLUS) for k in range(n))
    ones_count = np.array([bin(x).count("1") for x in range(dim)])
    columns = []
    labels = []
    for twoj in sorted(j_ladder(n), reverse=True):
        jj = twoj / 2.0
        k_down = (n - twoj) // 2  # weight space with m = j
        weight_basis = np.eye(dim)[:, ones_count == k_down]
        if twoj == n:
            highest = weight_basis  # single fully polarized state
        else:
            # highest-weight vectors: kernel of S+ restricted to the weight space
            _, svals, vt = np.linalg.svd(sp @ weight_basis)
            rank = int(np.sum(svals > 1e-10))
            highest = weight_basis @ vt[rank:].T
        nu = degeneracy(n, jj)
        assert highest.shape[1] == nu, (n, twoj, highest.shape, nu)
        for alpha in range(nu):
            vec = highest[:, alpha]
            # deterministic sign: largest-magnitude entry positive
            pivot = np.argmax(np.abs(vec))
            if vec[pivot] < 0:
                vec = -vec
            for mi in range(twoj + 1):
                columns.append(vec)
                labels.append((twoj, alpha, mi))
                if mi < twoj:
                    m = jj - mi
                    lowered = (sp.T @ vec) / np.sqrt((jj + m) * (jj - m + 1.0))
                    vec = lowered
    U = np.column_stack(columns)
    return U, labels


# ---------------------------------------------------------------------------
# Block-Liouville coordinates and local-channel generators
# ---------------------------------------------------------------------------

class BlockStructure:
    """Coordinate layout of permutation-invariant operators on n spins.

    Coordinates are the per-copy matrix elements rho_j[m, m'] (identical for
    every degenerate copy of the sector), ordered by ascending j with m
    descending inside a sector.  The weighted trace sum_j nu_j tr(rho_j)
    equals the trace in the 2^n space.
    """

    def __init__(self, n: int):
        self.n = n
        self.twojs = j_ladder(n)
        self.sector_dims = [twoj + 1 for twoj in self.twojs]
        self.multiplicities = [degeneracy(n, twoj / 2.0) for twoj in self.twojs]
        self.offsets = {}
        off = 0
        for twoj, d in zip(self.twojs, self.sector_dims):
            self.offsets[twoj] = off
            off += d * d
        self.dim = off
        expected = (n + 1) * (n + 2) * (n + 3) // 6 if n > 0 else 1
        assert self.dim == expected

    def index(self, twoj: int, row: int, col: int) -> int:
        d = twoj + 1
        return self.offsets[twoj] + row * d + col

    def trace_weights(self) -> np.ndarray:
        """Vector w with w . p = weighted trace of the coordinate vector p."""
        w = np.zeros(self.dim)
        for twoj, nu in zip(self.twojs, self.multiplicities):
            for mi in range(twoj + 1):
                w[self.index(twoj, mi, mi)] = nu
        return w

    def maximally_mixed(self) -> np.ndarray:
        """Coordinates of the 2^n-space identity / 2^n."""
        p = np.zeros(self.dim, dtype=complex)
        for twoj in self.twojs:
            for mi in range(twoj + 1):
                p[self.index(twoj, mi, mi)] = 1.0 / 2 ** self.n
        return p


_CHANNEL_OPS = {
    "z": _SIGMA_Z,
    "plus": _SIGMA_PLUS,
    "minus": _SIGMA_PLUS.T,
}


@functools.lru_cache(maxsize=None)
def local_channel_generator(n: int, kind: str) -> np.ndarray:
    """Unit-rate dissipator sum_{sites} D[A_mu] reduced to block coordinates.

    kind selects the local jump operator: 'z' (sigma^z), 'plus' (sigma^+) or
    'minus' (sigma^-).  The returned matrix G acts on BlockStructure(n)
    coordinate vectors, d p / dt = G p, and is obtained by exact projection
    of the 2^n-space superoperator onto the permutation-invariant operator
    basis E_{jmm'} = sum_alpha |j,m,alpha><j,m',alpha|.
    """
    if kind not in _CHANNEL_OPS:
        raise ValueError(f"unknown channel kind {kind!r}")
    structure = BlockStructure(n)
    if n == 0:
        return np.zeros((1, 1))
    if n > 8:
        raise ValueError("projection construction limited to subgraphs of <= 8 sites")
    dim = 2 ** n
    U, labels = dicke_basis_matrix(n)
    ops = [_site_operator(n, k, _CHANNEL_OPS[kind]) for k in range(n)]
    anti = sum(op.conj().T @ op for op in ops)

    # columns of U grouped by (twoj, alpha): contiguous m-descending runs
    col_of = {lab: idx for idx, lab in enumerate(labels)}
    G = np.zeros((structure.dim, structure.dim))
    for twoj in structure.twojs:
        jidx = structure.twojs.index(twoj)
        nu = structure.multiplicities[jidx]
        d = twoj + 1
        for mi in range(d):
            for mpi in range(d):
                src = structure.index(twoj, mi, mpi)
                E = np.zeros((dim, dim))
                for alpha in range(nu):
                    left = U[:, col_of[(twoj, alpha, mi)]]
                    right = U[:, col_of[(twoj, alpha, mpi)]]
                    E += np.outer(left, right)
                Y = sum(op @ E @ op.conj().T for op in ops)
                Y -= 0.5 * (anti @ E + E @ anti)
                Yt = U.T @ Y @ U  # real U
                # gather sum over alpha of <J,M,a|Y|J,M',a> for every target
                for tj_idx, TJ in enumerate(structure.twojs):
                    td = TJ + 1
                    tnu = structure.multiplicities[tj_idx]
                    block = np.zeros((td, td))
                    for alpha in range(tnu):
                        base = col_of[(TJ, alpha, 0)]
                        block += Yt[base:base + td, base:base + td]
                    if np.max(np.abs(block)) < 1e-14:
                        continue
                    for TM in range(td):
                        for TMp in range(td):
                            val = block[TM, TMp] / tnu
                            if abs(val) > 1e-13:
                                G[structure.index(TJ, TM, TMp), src] += val
    return G
