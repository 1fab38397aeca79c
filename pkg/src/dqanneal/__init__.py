"""Diabatic quantum annealing benchmark engine.

Simulates standard, catalyst-assisted, and sweep-quench-sweep annealing
protocols on maximum-weighted-independent-set instances built on complete
bipartite graphs, under unitary and Lindblad dynamics.  Permutational
symmetry of the instances reduces the 2^N problem to polynomially sized
collective-spin spaces; full-Hilbert-space oracles are kept alongside for
validation at small N.
"""

from .dynamics import (
    DissipatorSpec,
    IntegratorConfig,
    evolve_full_oracle,
    evolve_lindblad,
    evolve_unitary,
    gamma_rate,
    initial_state,
)
from .hamiltonian import assemble, build_full, build_reduced
from .liouville import ReducedLiouville
from .observables import fidelity, fit_saturation, gap_trace, spectrum
from .optimize import grid_search_sqs, optimize_jxx, sweep_infidelity
from .problem import MwisInstance, RawParams, build_instance
from .protocols import NSDQA, QA, SQS, lz_estimate

__version__ = "0.1.0"
