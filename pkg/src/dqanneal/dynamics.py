"""Time evolution: Schrodinger and Lindblad integrators plus 2^N oracles.

The default integrator is adaptive explicit Runge-Kutta (DOP853) on the
linear ODE, restarted at schedule discontinuities so no step straddles a
coefficient jump.  A fixed-step commutator-free Magnus propagator is
available for very slow (adiabatic) unitary sweeps where resolving phase
oscillations step by step would be wasteful; it is cross-validated against
the Runge-Kutta path in the tests.

Norm (unitary) and trace (Lindblad) drift are asserted, not corrected: the
drift is the convergence diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .hamiltonian import OperatorSet, assemble
from .liouville import ReducedLiouville
from .spinspace import pure_symmetric_isometry

__all__ = [
    "DissipatorSpec",
    "IntegratorConfig",
    "Trajectory",
    "IntegrationError",
    "gamma_rate",
    "thermal_occupation",
    "initial_state",
    "evolve_unitary",
    "evolve_lindblad",
    "evolve_full_oracle",
]

FULL_DENSITY_MAX_N = 9


class IntegrationError(RuntimeError):
    pass


def gamma_rate(N: int, T_ref: float) -> float:
    """Size-scaled dissipation rate 1/(T_ref * N)."""
    if T_ref <= 0:
        raise ValueError("T_ref must be positive")
    return 1.0 / (T_ref * N)


def thermal_occupation(beta: float, omega_b: float = 1.0) -> float:
    """Bose occupation of the bath mode, 1/(exp(beta*omega_b) - 1)."""
    if beta * omega_b <= 0:
        raise ValueError("beta * omega_b must be positive")
    return 1.0 / math.expm1(beta * omega_b)


@dataclass(frozen=True)
class DissipatorSpec:
    """Bath model: none, local dephasing, or gain-and-loss at detailed balance."""

    kind: str = "none"
    gamma: float = 0.0
    beta: float | None = None
    omega_b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("none", "dephasing", "gainloss"):
            raise ValueError(f"unknown dissipator kind {self.kind!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.kind == "gainloss":
            if self.beta is None or self.beta <= 0 or self.omega_b <= 0:
                raise ValueError("gainloss bath needs beta > 0 and omega_b > 0")

    @classmethod
    def none(cls):
        return cls(kind="none")

    @classmethod
    def dephasing(cls, gamma: float):
        return cls(kind="dephasing", gamma=gamma)

    @classmethod
    def gainloss(cls, gamma: float, beta: float, omega_b: float = 1.0):
        return cls(kind="gainloss", gamma=gamma, beta=beta, omega_b=omega_b)

    @property
    def n_thermal(self) -> float:
        return thermal_occupation(self.beta, self.omega_b)

    @property
    def gamma_up(self) -> float:
        return self.gamma * self.n_thermal

    @property
    def gamma_down(self) -> float:
        return self.gamma * (self.n_thermal + 1.0)

    def channels(self) -> list[tuple[str, float]]:
        if self.kind == "none" or self.gamma == 0.0:
            return []
        if self.kind == "dephasing":
            return [("z", self.gamma)]
        return [("plus", self.gamma_up), ("minus", self.gamma_down)]

    def to_dict(self) -> dict:
        record = {"kind": self.kind}
        if self.kind != "none":
            record["gamma"] = self.gamma
        if self.kind == "gainloss":
            record["beta"] = self.beta
            record["omega_b"] = self.omega_b
        return record

    @classmethod
    def from_dict(cls, record: dict):
        return cls(**record)


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk"  # "rk" (adaptive DOP853) or "magnus" (fixed-step CF4)
    rtol: float = 1e-9
    atol: float = 1e-11
    max_step: float = np.inf
    grid_points: int = 201
    drift_tol: float | None = None  # default max(100 * rtol, 1e-8)
    magnus_steps: int = 2000

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.drift_tol is not None and self.drift_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.grid_points < 2:
            raise ValueError("need at least two output grid points")
        if self.method not in ("rk", "magnus"):
            raise ValueError(f"unknown integrator method {self.method!r}")

    def effective_drift_tol(self, duration: float = 0.0) -> float:
        """Drift budget: explicit if set, else scaled with rtol and duration
        (local truncation error accumulates roughly linearly in time)."""
        if self.drift_tol is not None:
            return self.drift_tol
        return max(100.0 * self.rtol, 1e-8) * max(1.0, duration / 100.0)


LINDBLAD_CONFIG = IntegratorConfig(rtol=1e-8, atol=1e-10)


@dataclass
class Trajectory:
    """States on the output grid plus the bookkeeping needed to score them."""

    times: np.ndarray
    states: list
    space: str  # reduced-pure | full-pure | reduced-liouville | full-density
    protocol: object
    opset: OperatorSet
    dissipator: DissipatorSpec | None = None
    liouville: ReducedLiouville | None = field(default=None, repr=False)

    @property
    def final_state(self):
        return self.states[-1]

    def norm_or_trace(self, i: int) -> float:
        state = self.states[i]
        if self.space.endswith("pure"):
            return float(np.linalg.norm(state))
        if self.space == "reduced-liouville":
            return float(np.real(self.liouville.trace(state)))
        return float(np.real(np.trace(state)))

    def purity(self, i: int) -> float:
        state = self.states[i]
        if self.space.endswith("pure"):
            return 1.0
        if self.space == "reduced-liouville":
            return self.liouville.purity(state)
        return float(np.real(np.trace(state @ state)))


def initial_state(opset: OperatorSet) -> np.ndarray:
    """Ground state of the driver: every spin along +x.

    Built analytically as the product of symmetric binomial superpositions
    and verified to be an eigenvector of Hx with eigenvalue -N.
    """
    if opset.space == "reduced":
        psi = np.ones(1)
        for n in opset.split.sizes:
            V = pure_symmetric_isometry(n)
            plus = np.full(2 ** n, 2.0 ** (-n / 2.0))
            psi = np.kron(psi, V.T @ plus)
    else:
        psi = np.full(2 ** opset.instance.N, 2.0 ** (-opset.instance.N / 2.0))
    residual = opset.Hx @ psi + opset.instance.N * psi
    if np.max(np.abs(residual)) > 1e-10:
        raise AssertionError("driver ground state construction failed")
    return psi.astype(complex)


def _segment_edges(protocol, t_final: float) -> list[float]:
    edges = [0.0] + [t for t in protocol.discontinuities() if 0.0 < t < t_final]
    edges.append(t_final)
    return edges


def _integrate_segments(rhs, y0, protocol, config, t_grid, jac_terms=None):
    """Adaptive integration restarted at schedule discontinuities."""
    edges = _segment_edges(protocol, t_grid[-1])
    states = {0.0: y0.copy()}
    y = y0.copy()
    for a, b in zip(edges[:-1], edges[1:]):
        interior = [t for t in t_grid if a < t <= b]
        t_eval = sorted(set(interior) | {b})
        sol = solve_ivp(rhs, (a, b), y, method="DOP853",
                        rtol=config.rtol, atol=config.atol,
                        max_step=config.max_step, t_eval=t_eval)
        if not sol.success:
            raise IntegrationError(f"integrator failed in [{a}, {b}]: {sol.message}")
        for t, col in zip(sol.t, sol.y.T):
            states[t] = col
        y = sol.y[:, -1].copy()
    return [states[min(states, key=lambda s, t=t: abs(s - t))] for t in t_grid]


def _magnus_unitary(opset, protocol, psi0, config, t_grid):
    """Fixed-step 4th-order commutator-free Magnus propagation."""
    c1 = 0.5 - math.sqrt(3.0) / 6.0
    c2 = 0.5 + math.sqrt(3.0) / 6.0
    x1 = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0
    x2 = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0
    edges = _segment_edges(protocol, t_grid[-1])
    total = t_grid[-1]
    psi = psi0.copy()
    out = [psi0.copy()]
    next_output = 1
    for a, b in zip(edges[:-1], edges[1:]):
        steps = max(1, int(math.ceil((b - a) / total * config.magnus_steps)))
        targets = [t for t in t_grid if a < t <= b]
        # align substeps with output points so states are exact at the grid
        knots = sorted(set(np.concatenate([np.linspace(a, b, steps + 1), targets])))
        for t0, t1 in zip(knots[:-1], knots[1:]):
            h = t1 - t0
            H1 = assemble(opset, *protocol.coefficients(t0 + c1 * h))
            H2 = assemble(opset, *protocol.coefficients(t0 + c2 * h))
            psi = expm(-1j * h * (x1 * H1 + x2 * H2)) @ (
                expm(-1j * h * (x2 * H1 + x1 * H2)) @ psi)
            while next_output < len(t_grid) and abs(t1 - t_grid[next_output]) < 1e-12:
                out.append(psi.copy())
                next_output += 1
    if len(out) != len(t_grid):
        raise IntegrationError("magnus stepper missed output grid points")
    return out


def evolve_unitary(opset: OperatorSet, protocol, psi0=None,
                   config: IntegratorConfig | None = None) -> Trajectory:
    """Schrodinger evolution over the protocol's full duration."""
    if config is None:
        config = IntegratorConfig()
    if psi0 is None:
        psi0 = initial_state(opset)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (opset.dim,):
        raise ValueError("initial state does not live on the operator set's space")
    t_grid = np.linspace(0.0, protocol.total_time, config.grid_points)
    if config.method == "magnus":
        states = _magnus_unitary(opset, protocol, psi0, config, list(t_grid))
    else:
        Hx = sp.csr_matrix(opset.Hx)
        Hz = sp.csr_matrix(opset.Hz)
        Hc = sp.csr_matrix(opset.Hc) if opset.j_xx != 0.0 else None

        def rhs(t, y):
            A, B, C = protocol.coefficients(min(t, protocol.total_time))
            out = (-1j * A) * (Hx @ y) + (-1j * B) * (Hz @ y)
            if Hc is not None and C != 0.0:
                out += (-1j * C) * (Hc @ y)
            return out

        states = _integrate_segments(rhs, psi0, protocol, config, t_grid)
    drift = max(abs(np.linalg.norm(s) - 1.0) for s in states)
    budget = config.effective_drift_tol(protocol.total_time)
    if drift > budget:
        raise IntegrationError(
            f"norm drift {drift:.2e} exceeds tolerance "
            f"{budget:.0e} at T={protocol.total_time}")
    return Trajectory(times=t_grid, states=states, space=f"{opset.space}-pure",
                      protocol=protocol, opset=opset)


def evolve_lindblad(opset: OperatorSet, protocol, dissipator: DissipatorSpec,
                    rho0=None, config: IntegratorConfig | None = None,
                    frozen_time: float | None = None,
                    duration: float | None = None,
                    liouville: ReducedLiouville | None = None) -> Trajectory:
    """Reduced block-Liouville master-equation evolution.

    With frozen_time set, the Hamiltonian is held at the schedule's
    coefficients at that instant and the run lasts `duration` instead of the
    protocol's total time (used for steady-state checks).
    """
    if opset.space != "reduced":
        raise ValueError("evolve_lindblad runs in the reduced space; "
                         "use evolve_full_oracle for the 2^N check")
    if config is None:
        config = LINDBLAD_CONFIG
    engine = liouville if liouville is not None else ReducedLiouville(
        opset.instance, opset.j_xx)
    if rho0 is None:
        p0 = engine.from_pure(initial_state(opset))
    elif rho0.shape == (engine.dim,):
        p0 = np.asarray(rho0, dtype=complex)
    else:
        raise ValueError("rho0 must be a block-coordinate vector")
    tr0 = np.real(engine.trace(p0))
    if abs(tr0 - 1.0) > 1e-8 or engine.min_eigenvalue(p0) < -1e-8:
        raise ValueError("rho0 must be trace-one and positive within tolerance")
    Ld = engine.dissipator_superop(dissipator.channels())
    has_c = opset.j_xx != 0.0
    if frozen_time is not None:
        if duration is None:
            raise ValueError("frozen_time requires an explicit duration")
        A0, B0, C0 = protocol.coefficients(frozen_time)
        L = A0 * engine.Lx + B0 * engine.Lz + Ld
        if has_c:
            L = L + C0 * engine.Lc
        t_final = duration

        def rhs(t, y):
            return L @ y

        class _Frozen:
            total_time = t_final

            @staticmethod
            def discontinuities():
                return []

            @staticmethod
            def coefficients(t):
                return A0, B0, C0

        schedule = _Frozen()
    else:
        t_final = protocol.total_time
        Lx, Lz, Lc = engine.Lx, engine.Lz, engine.Lc

        def rhs(t, y):
            A, B, C = protocol.coefficients(min(t, t_final))
            out = A * (Lx @ y) + B * (Lz @ y) + Ld @ y
            if has_c and C != 0.0:
                out += C * (Lc @ y)
            return out

        schedule = protocol
    t_grid = np.linspace(0.0, t_final, config.grid_points)
    states = _integrate_segments(rhs, p0, schedule, config, t_grid)
    drift = max(abs(np.real(engine.trace(s)) - 1.0) for s in states)
    if drift > config.effective_drift_tol(t_final):
        raise IntegrationError(f"trace drift {drift:.2e} exceeds tolerance")
    final = states[-1]
    budget = config.effective_drift_tol(t_final)
    if engine.hermiticity_defect(final) > max(1e-10, budget):
        raise IntegrationError("hermiticity lost along the trajectory")
    if engine.min_eigenvalue(final) < -max(1e-8, budget):
        raise IntegrationError("positivity violated beyond tolerance")
    return Trajectory(times=t_grid, states=states, space="reduced-liouville",
                      protocol=protocol, opset=opset, dissipator=dissipator,
                      liouville=engine)


def _local_full_ops(N: int, op2: np.ndarray):
    ops = []
    for site in range(N):
        full = np.ones((1, 1))
        for k in range(N):
            full = np.kron(full, op2 if k == site else np.eye(2))
        ops.append(sp.csr_matrix(full))
    return ops


def _full_jump_operators(N: int, dissipator: DissipatorSpec):
    sigz = np.diag([1.0, -1.0])
    sigp = np.array([[0.0, 1.0], [0.0, 0.0]])
    jumps = []
    if dissipator.kind == "dephasing" and dissipator.gamma > 0:
        for op in _local_full_ops(N, sigz):
            jumps.append(math.sqrt(dissipator.gamma) * op)
    elif dissipator.kind == "gainloss" and dissipator.gamma > 0:
        for op in _local_full_ops(N, sigp):
            jumps.append(math.sqrt(dissipator.gamma_up) * op)
        for op in _local_full_ops(N, sigp.T):
            jumps.append(math.sqrt(dissipator.gamma_down) * op)
    return jumps


def evolve_full_oracle(opset: OperatorSet, protocol, dissipator: DissipatorSpec,
                       state=None, config: IntegratorConfig | None = None,
                       frozen_time: float | None = None,
                       duration: float | None = None) -> Trajectory:
    """Reference evolution in the unreduced 2^N space.

    Unitary for dissipator "none" (state is a ket), otherwise a dense
    density-matrix Lindblad integration with local jump operators; the
    density path is memory-bounded to N <= 9.
    """
    if opset.space != "full":
        raise ValueError("oracle evolution needs a full-space operator set")
    N = opset.instance.N
    if dissipator.kind == "none":
        return evolve_unitary(opset, protocol, psi0=state, config=config)
    if N > FULL_DENSITY_MAX_N:
        raise ValueError(f"density-matrix oracle limited to N <= {FULL_DENSITY_MAX_N}")
    if config is None:
        config = LINDBLAD_CONFIG
    dim = 2 ** N
    if state is None:
        psi = initial_state(opset)
        rho0 = np.outer(psi, psi.conj())
    else:
        rho0 = np.asarray(state, dtype=complex)
        if rho0.shape != (dim, dim):
            raise ValueError("oracle density matrix has wrong shape")
    eye = sp.identity(dim, format="csr")

    def ham_superop(H):
        Hs = sp.csr_matrix(H)
        return (-1j * (sp.kron(Hs, eye) - sp.kron(eye, Hs.T))).tocsr()

    Lx = ham_superop(opset.Hx)
    Lz = ham_superop(opset.Hz)
    Lc = ham_superop(opset.Hc) if opset.j_xx != 0.0 else None
    Ld = sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
    for L in _full_jump_operators(N, dissipator):
        LdL = (L.conj().T @ L).tocsr()
        Ld = Ld + sp.kron(L, L.conj()) \
            - 0.5 * (sp.kron(LdL, eye) + sp.kron(eye, LdL.T))
    Ld = Ld.tocsr()

    if frozen_time is not None:
        if duration is None:
            raise ValueError("frozen_time requires an explicit duration")
        A0, B0, C0 = protocol.coefficients(frozen_time)
        Lfix = A0 * Lx + B0 * Lz + Ld
        if Lc is not None:
            Lfix = Lfix + C0 * Lc
        t_final = duration

        def rhs(t, y):
            return Lfix @ y

        class _Frozen:
            total_time = t_final

            @staticmethod
            def discontinuities():
                return []

        schedule = _Frozen()
    else:
        t_final = protocol.total_time

        def rhs(t, y):
            A, B, C = protocol.coefficients(min(t, t_final))
            out = A * (Lx @ y) + B * (Lz @ y) + Ld @ y
            if Lc is not None and C != 0.0:
                out += C * (Lc @ y)
            return out

        schedule = protocol
    t_grid = np.linspace(0.0, t_final, config.grid_points)
    flats = _integrate_segments(rhs, rho0.reshape(-1), schedule, config, t_grid)
    states = [f.reshape(dim, dim) for f in flats]
    drift = max(abs(np.real(np.trace(s)) - 1.0) for s in states)
    if drift > config.effective_drift_tol(t_final):
        raise IntegrationError(f"trace drift {drift:.2e} exceeds tolerance")
    return Trajectory(times=t_grid, states=states, space="full-density",
                      protocol=protocol, opset=opset, dissipator=dissipator)
