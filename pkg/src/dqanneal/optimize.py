"""Catalyst-strength optimization and sweep-quench-sweep grid search."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import (
    DissipatorSpec,
    IntegratorConfig,
    evolve_lindblad,
    evolve_unitary,
)
from .hamiltonian import build_reduced
from .liouville import ReducedLiouville
from .observables import fidelity, gap_trace
from .problem import MwisInstance
from .protocols import NSDQA, SQS

__all__ = [
    "CatalystResult",
    "SqsGrid",
    "SweepPoint",
    "NoAdmissibleCatalystError",
    "optimize_jxx",
    "grid_search_sqs",
    "sweep_infidelity",
    "final_ground_fidelity",
]

# default search grids; the quench window brackets the late-anneal crossing
DEFAULT_BQ_GRID = np.round(np.arange(0.0, 1.0 + 1e-9, 0.05), 10)
DEFAULT_TAUQ_GRID = np.round(np.arange(0.5, 1.0 + 1e-9, 0.025), 10)
DEFAULT_DTQ_GRID = np.round(np.arange(0.0, 20.0 + 1e-9, 0.5), 10)

FAST_UNITARY = IntegratorConfig(rtol=1e-8, atol=1e-10, grid_points=2)
FAST_LINDBLAD = IntegratorConfig(rtol=1e-7, atol=1e-9, grid_points=2)


class NoAdmissibleCatalystError(RuntimeError):
    """Raised when no catalyst strength produces an earlier second gap minimum."""

    def __init__(self, message, landscape=None):
        super().__init__(message)
        self.landscape = landscape or []


@dataclass(frozen=True)
class CatalystResult:
    j_xx: float
    delta_c: float       # induced secondary gap minimum
    s_c: float           # its schedule location
    delta_min: float     # the problem's own gap minimum
    s_min: float
    trace: list = field(default_factory=list)  # (j_xx, delta_c) evaluations


def _gap_minima(instance: MwisInstance, j_xx: float, grid_points: int):
    """(s, gap) of every interior local minimum, at grid resolution.

    The gaps are deliberately not refined off-grid: at the optimum the
    induced crossing can become exact, and the grid-resolved value is the
    scale a schedule of that resolution actually experiences.
    """
    opset = build_reduced(instance, j_xx=j_xx)
    gt = gap_trace(opset, NSDQA(T=1.0, j_xx=j_xx), grid_points=grid_points)
    return gt.local_minima()


def _admissible_secondary(minima):
    """Secondary = earliest minimum, admissible only if another follows it."""
    if len(minima) < 2:
        return None
    (s_c, d_c) = minima[0]
    (s_min, d_min) = min(minima[1:], key=lambda p: p[1])
    if s_c >= s_min:
        return None
    return s_c, d_c, s_min, d_min


def optimize_jxx(instance: MwisInstance, interval=(0.5, 4.0), resolution: int = 32,
                 grid_points: int = 801) -> CatalystResult:
    """Catalyst strength minimizing the induced secondary gap.

    Coarse scan over the interval, then golden-section refinement around the
    best admissible point.  A candidate is admissible only when the gap trace
    has two local minima with the induced one earlier in the schedule.
    """
    lo, hi = interval
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ValueError("search interval must be finite and increasing")
    if resolution < 16:
        raise ValueError("grid resolution must be at least 16")
    trace = []
    candidates = []
    for j in np.linspace(lo, hi, resolution):
        adm = _admissible_secondary(_gap_minima(instance, j, grid_points))
        if adm is None:
            trace.append((float(j), None))
            continue
        trace.append((float(j), adm[1]))
        candidates.append((float(j), adm))
    if not candidates:
        raise NoAdmissibleCatalystError(
            f"no catalyst strength in [{lo}, {hi}] produces a second gap "
            f"minimum earlier in the schedule", landscape=trace)
    j_best, _ = min(candidates, key=lambda c: c[1][1])
    step = (hi - lo) / (resolution - 1)

    def objective(j):
        adm = _admissible_secondary(_gap_minima(instance, j, grid_points))
        val = np.inf if adm is None else adm[1]
        trace.append((float(j), None if adm is None else val))
        return val

    res = minimize_scalar(objective, bounds=(max(lo, j_best - step),
                                             min(hi, j_best + step)),
                          method="bounded", options={"xatol": 1e-6})
    j_opt = float(res.x)
    adm = _admissible_secondary(_gap_minima(instance, j_opt, grid_points))
    if adm is None:  # refinement walked out of the admissible set
        j_opt = j_best
        adm = _admissible_secondary(_gap_minima(instance, j_opt, grid_points))
    s_c, d_c, s_min, d_min = adm
    return CatalystResult(j_xx=j_opt, delta_c=d_c, s_c=s_c,
                          delta_min=d_min, s_min=s_min, trace=trace)


def final_ground_fidelity(instance: MwisInstance, protocol,
                          dissipator: DissipatorSpec | None = None,
                          config: IntegratorConfig | None = None,
                          opset=None, liouville=None) -> float:
    """Ground-state population at the end of one protocol run."""
    if opset is None:
        opset = build_reduced(instance, j_xx=protocol.j_xx)
    A, B, C = protocol.coefficients(protocol.total_time)
    if dissipator is None or dissipator.kind == "none":
        traj = evolve_unitary(opset, protocol,
                              config=config or FAST_UNITARY)
        return fidelity(traj.final_state, opset, A, B, C, level=0)
    traj = evolve_lindblad(opset, protocol, dissipator,
                           config=config or FAST_LINDBLAD, liouville=liouville)
    rho = traj.liouville.top_block(traj.final_state)
    return fidelity(rho, opset, A, B, C, level=0)


@dataclass(frozen=True)
class SqsGrid:
    """Grid-search result: per-(B_q, tau_q) best quench duration and fidelity."""

    T: float
    b_q: np.ndarray
    tau_q: np.ndarray
    dt_q: np.ndarray
    best_fidelity: np.ndarray  # shape (len(b_q), len(tau_q))
    best_dt_q: np.ndarray      # same shape
    best_triple: tuple         # (B_q, tau_q, dT_q)

    @property
    def best_value(self) -> float:
        return float(np.max(self.best_fidelity))

    def best_protocol(self) -> SQS:
        b, tau, dt = self.best_triple
        return SQS(T=self.T, t_q=tau * self.T, dT_q=dt, B_q=b)


def grid_search_sqs(instance: MwisInstance, T: float,
                    b_q_grid=None, tau_q_grid=None, dt_q_grid=None,
                    dissipator: DissipatorSpec | None = None,
                    config: IntegratorConfig | None = None,
                    workers: int = 1) -> SqsGrid:
    """Exhaustive quench-parameter search maximizing final ground fidelity.

    Deterministic: ties are broken by lexicographic grid order, so identical
    inputs always return the same best triple regardless of worker count.
    """
    b_q_grid = DEFAULT_BQ_GRID if b_q_grid is None else np.asarray(b_q_grid, float)
    tau_q_grid = DEFAULT_TAUQ_GRID if tau_q_grid is None else np.asarray(tau_q_grid, float)
    dt_q_grid = DEFAULT_DTQ_GRID if dt_q_grid is None else np.asarray(dt_q_grid, float)
    for g in (b_q_grid, tau_q_grid, dt_q_grid):
        if g.size == 0:
            raise ValueError("grids must be non-empty")
    opset = build_reduced(instance)
    liouville = None
    if dissipator is not None and dissipator.kind != "none":
        liouville = ReducedLiouville(instance, j_xx=0.0)
    best_fid = np.zeros((b_q_grid.size, tau_q_grid.size))
    best_dt = np.zeros_like(best_fid)
    jobs = [(ib, it, dt)
            for ib in range(b_q_grid.size)
            for it in range(tau_q_grid.size)
            for dt in dt_q_grid]

    def evaluate(job):
        ib, it, dt = job
        proto = SQS(T=T, t_q=tau_q_grid[it] * T, dT_q=float(dt),
                    B_q=float(b_q_grid[ib]))
        return final_ground_fidelity(instance, proto, dissipator,
                                     config=config, opset=opset,
                                     liouville=liouville)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(evaluate, jobs))
    else:
        values = [evaluate(j) for j in jobs]
    best = (-1.0, None)
    n_dt = dt_q_grid.size
    for ib in range(b_q_grid.size):
        for it in range(tau_q_grid.size):
            cell_best, cell_dt = -1.0, float(dt_q_grid[0])
            base = (ib * tau_q_grid.size + it) * n_dt
            for k, dt in enumerate(dt_q_grid):
                f = values[base + k]
                if f > cell_best:
                    cell_best, cell_dt = f, float(dt)
            best_fid[ib, it] = cell_best
            best_dt[ib, it] = cell_dt
            if cell_best > best[0]:
                best = (cell_best, (float(b_q_grid[ib]), float(tau_q_grid[it]),
                                    cell_dt))
    return SqsGrid(T=T, b_q=b_q_grid, tau_q=tau_q_grid, dt_q=dt_q_grid,
                   best_fidelity=best_fid, best_dt_q=best_dt,
                   best_triple=best[1])


@dataclass(frozen=True)
class SweepPoint:
    N: int
    t_total: float
    kind: str
    bath: str
    infidelity: float


def sweep_infidelity(instances, protocol_factory, t_grid,
                     dissipator: DissipatorSpec | None = None,
                     config: IntegratorConfig | None = None,
                     workers: int = 1) -> list[SweepPoint]:
    """Final infidelity table over instances and total durations.

    protocol_factory(instance, T_total) must return a protocol whose
    total_time equals T_total, so different protocol families are compared at
    matched duration.
    """
    bath = "none" if dissipator is None else dissipator.kind
    jobs = []
    for instance in instances:
        cache = {}
        for T in t_grid:
            proto = protocol_factory(instance, float(T))
            if abs(proto.total_time - T) > 1e-9:
                raise ValueError("protocol_factory must hit the requested "
                                 "total duration exactly")
            key = proto.j_xx
            if key not in cache:
                opset = build_reduced(instance, j_xx=key)
                liou = None
                if dissipator is not None and dissipator.kind != "none":
                    liou = ReducedLiouville(instance, j_xx=key)
                cache[key] = (opset, liou)
            jobs.append((instance, float(T), proto) + cache[key])

    def evaluate(job):
        instance, T, proto, opset, liou = job
        f = final_ground_fidelity(instance, proto, dissipator, config=config,
                                  opset=opset, liouville=liou)
        return SweepPoint(N=instance.N, t_total=T, kind=proto.kind,
                          bath=bath, infidelity=1.0 - f)

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(evaluate, jobs))
    return [evaluate(j) for j in jobs]
