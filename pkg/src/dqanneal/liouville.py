"""Block-Liouville representation of permutation-invariant density matrices.

The coordinate vector is the Kronecker product of the three per-subgraph
block layouts (see BlockStructure): one complex entry per per-copy matrix
element rho_j[m, m'] of each subgraph sector.  Hamiltonian superoperators
couple coordinates only within a sector triple; local dissipation channels
act on one subgraph factor and may move j by one, with coefficients obtained
from the exact projection in spinspace.local_channel_generator.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp

from .hamiltonian import sector_operators
from .problem import MwisInstance
from .spinspace import BlockStructure, SubgraphSplit, local_channel_generator

__all__ = ["ReducedLiouville"]


class ReducedLiouville:
    """Sparse superoperators and index bookkeeping for one instance.

    Construction is independent of the schedule; the time-dependent
    Liouvillian is A(t) Lx + B(t) Lz + C(t) Lc + Ldiss.
    """

    def __init__(self, instance: MwisInstance, j_xx: float = 0.0):
        self.instance = instance
        self.j_xx = j_xx
        self.split = SubgraphSplit.for_size(instance.N)
        self.structures = [BlockStructure(n) for n in self.split.sizes]
        self.factor_dims = [st.dim for st in self.structures]
        self.dim = int(np.prod(self.factor_dims))
        self.sectors = list(itertools.product(*(st.twojs for st in self.structures)))
        self._sector_cache = {}
        self.Lx, self.Lz, self.Lc = self._hamiltonian_superops()
        self._top_indices, self.pure_dim = self._top_sector_indices()

    # -- index helpers ------------------------------------------------------

    def _global_index(self, coords):
        """coords: per-subgraph (twoj, row, col) triples."""
        g = 0
        for st, dim, (twoj, r, c) in zip(self.structures, self.factor_dims, coords):
            g = g * dim + st.index(twoj, r, c)
        return g

    def _sector_index_map(self, sector):
        """Flat map q -> global index for the (R, C) pairs of one sector."""
        if sector in self._sector_cache:
            return self._sector_cache[sector]
        dims = [twoj + 1 for twoj in sector]
        per_factor = []
        for st, fdim, twoj, d in zip(self.structures, self.factor_dims, sector, dims):
            idx = np.empty((d, d), dtype=np.int64)
            for r in range(d):
                for c in range(d):
                    idx[r, c] = st.index(twoj, r, c)
            per_factor.append(idx)
        D = int(np.prod(dims))
        gmap = np.zeros((D, D), dtype=np.int64)
        for (r0, r1, rc) in itertools.product(*(range(d) for d in dims)):
            R = (r0 * dims[1] + r1) * dims[2] + rc
            for (c0, c1, cc) in itertools.product(*(range(d) for d in dims)):
                C = (c0 * dims[1] + c1) * dims[2] + cc
                g = (per_factor[0][r0, c0] * self.factor_dims[1]
                     + per_factor[1][r1, c1]) * self.factor_dims[2] + per_factor[2][rc, cc]
                gmap[R, C] = g
        gmap = gmap.reshape(D * D)
        self._sector_cache[sector] = (gmap, D)
        return gmap, D

    # -- superoperator assembly --------------------------------------------

    def _hamiltonian_superops(self):
        builders = {key: ([], [], []) for key in ("x", "z", "c")}
        for sector in self.sectors:
            js = tuple(twoj / 2.0 for twoj in sector)
            hx, hz, hc = sector_operators(self.instance, self.j_xx, js)
            gmap, D = self._sector_index_map(sector)
            eye = sp.identity(D, format="csr")
            for key, H in (("x", hx), ("z", hz), ("c", hc)):
                if key == "c" and self.j_xx == 0.0:
                    continue
                Hs = sp.csr_matrix(H)
                S = (-1j * (sp.kron(Hs, eye) - sp.kron(eye, Hs.T))).tocoo()
                rows, cols, data = builders[key]
                rows.append(gmap[S.row])
                cols.append(gmap[S.col])
                data.append(S.data)
        out = []
        for key in ("x", "z", "c"):
            rows, cols, data = builders[key]
            if rows:
                mat = sp.coo_matrix(
                    (np.concatenate(data),
                     (np.concatenate(rows), np.concatenate(cols))),
                    shape=(self.dim, self.dim)).tocsr()
            else:
                mat = sp.csr_matrix((self.dim, self.dim), dtype=complex)
            out.append(mat)
        return tuple(out)

    def dissipator_superop(self, channels) -> sp.csr_matrix:
        """Sum of per-subgraph local channels; channels = [(kind, rate), ...]."""
        total = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for kind, rate in channels:
            if rate == 0.0:
                continue
            for a in range(3):
                factors = []
                for b, n in enumerate(self.split.sizes):
                    if b == a:
                        factors.append(sp.csr_matrix(local_channel_generator(n, kind)))
                    else:
                        factors.append(sp.identity(self.factor_dims[b], format="csr"))
                total = total + rate * sp.kron(sp.kron(factors[0], factors[1]), factors[2])
        return total.tocsr()

    # -- state plumbing -----------------------------------------------------

    def _top_sector_indices(self):
        top = tuple(st.twojs[-1] for st in self.structures)
        gmap, D = self._sector_index_map(top)
        return gmap.reshape(D, D), D

    def from_pure(self, psi: np.ndarray) -> np.ndarray:
        """Coordinates of |psi><psi| for a reduced pure state."""
        if psi.shape != (self.pure_dim,):
            raise ValueError("pure state has wrong dimension")
        p = np.zeros(self.dim, dtype=complex)
        rho = np.outer(psi, psi.conj())
        p[self._top_indices.reshape(-1)] = rho.reshape(-1)
        return p

    def top_block(self, p: np.ndarray) -> np.ndarray:
        """Per-copy density block of the maximal-spin sector triple.

        All three multiplicities are one there, so this is the physical
        density matrix restricted to the symmetric pure-state space.
        """
        return p[self._top_indices]

    def sector_block(self, p: np.ndarray, sector) -> np.ndarray:
        gmap, D = self._sector_index_map(sector)
        return p[gmap].reshape(D, D)

    def sector_weight(self, sector) -> int:
        return int(np.prod([
            st.multiplicities[st.twojs.index(twoj)]
            for st, twoj in zip(self.structures, sector)
        ]))

    def trace(self, p: np.ndarray) -> complex:
        total = 0.0 + 0.0j
        for sector in self.sectors:
            block = self.sector_block(p, sector)
            total += self.sector_weight(sector) * np.trace(block)
        return total

    def purity(self, p: np.ndarray) -> float:
        total = 0.0
        for sector in self.sectors:
            block = self.sector_block(p, sector)
            total += self.sector_weight(sector) * float(np.sum(np.abs(block) ** 2))
        return total

    def maximally_mixed(self) -> np.ndarray:
        p = np.zeros(self.dim, dtype=complex)
        val = 1.0 / 2 ** self.instance.N
        for sector in self.sectors:
            gmap, D = self._sector_index_map(sector)
            idx = gmap.reshape(D, D)
            for r in range(D):
                p[idx[r, r]] = val
        return p

    def trace_distance_to_mixed(self, p: np.ndarray) -> float:
        """0.5 * || rho - identity/2^N ||_1, using the block spectrum."""
        val = 1.0 / 2 ** self.instance.N
        total = 0.0
        for sector in self.sectors:
            block = self.sector_block(p, sector)
            eigs = np.linalg.eigvalsh(0.5 * (block + block.conj().T) - val * np.eye(block.shape[0]))
            total += self.sector_weight(sector) * float(np.sum(np.abs(eigs)))
        return 0.5 * total

    def hermiticity_defect(self, p: np.ndarray) -> float:
        worst = 0.0
        for sector in self.sectors:
            block = self.sector_block(p, sector)
            worst = max(worst, float(np.max(np.abs(block - block.conj().T))))
        return worst

    def min_eigenvalue(self, p: np.ndarray) -> float:
        lows = []
        for sector in self.sectors:
            block = self.sector_block(p, sector)
            lows.append(float(np.linalg.eigvalsh(0.5 * (block + block.conj().T))[0]))
        return min(lows)
