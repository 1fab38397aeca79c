"""Spectra, gaps, fidelities, and the infidelity saturation fit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import OperatorSet, assemble

__all__ = [
    "SpectrumSlice",
    "GapTrace",
    "FitResult",
    "FitError",
    "spectrum",
    "gap_trace",
    "fidelity",
    "reference_coefficients",
    "trajectory_fidelities",
    "fit_saturation",
]

DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class SpectrumSlice:
    """Lowest eigenpairs of the assembled Hamiltonian at one schedule point."""

    s: float
    energies: np.ndarray  # ascending
    vectors: np.ndarray   # columns, orthonormal

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])


def spectrum(opset: OperatorSet, A: float, B: float, C: float,
             k: int | None = None, s: float = 0.0) -> SpectrumSlice:
    """Dense Hermitian eigendecomposition, lowest k levels."""
    H = assemble(opset, A, B, C)
    energies, vectors = np.linalg.eigh(H)
    if k is not None:
        energies = energies[:k]
        vectors = vectors[:, :k]
    return SpectrumSlice(s=s, energies=energies, vectors=vectors)


@dataclass(frozen=True)
class GapTrace:
    """E1 - E0 along a schedule, with the argmin and all interior local minima."""

    s: np.ndarray
    gaps: np.ndarray

    @property
    def min_gap(self) -> float:
        return float(np.min(self.gaps))

    @property
    def argmin_s(self) -> float:
        return float(self.s[int(np.argmin(self.gaps))])

    def local_minima(self) -> list[tuple[float, float]]:
        """Interior grid points strictly below both neighbours, as (s, gap)."""
        out = []
        g = self.gaps
        for i in range(1, len(g) - 1):
            if g[i] < g[i - 1] and g[i] < g[i + 1]:
                out.append((float(self.s[i]), float(g[i])))
        return out


def gap_trace(opset: OperatorSet, protocol, grid_points: int = 201,
              times=None) -> GapTrace:
    total = protocol.total_time
    if times is None:
        times = np.linspace(0.0, total, grid_points)
    times = np.asarray(times, dtype=float)
    if times.min() < -1e-12 or times.max() > total * (1 + 1e-12):
        raise ValueError("grid extends outside the protocol duration")
    gaps = np.empty_like(times)
    for i, t in enumerate(times):
        A, B, C = protocol.coefficients(min(t, total))
        e = np.linalg.eigvalsh(assemble(opset, A, B, C))
        gaps[i] = e[1] - e[0]
    return GapTrace(s=times / total, gaps=gaps)


def _level_projector(sl: SpectrumSlice, level: int) -> np.ndarray:
    """Columns spanning the (near-)degenerate subspace containing `level`."""
    e = sl.energies
    members = np.abs(e - e[level]) < DEGENERACY_TOL
    return sl.vectors[:, members]


def fidelity(state, opset: OperatorSet, A: float, B: float, C: float,
             level: int = 0) -> float:
    """Population of instantaneous eigenlevel `level` in `state`.

    `state` is a ket or a density matrix on the operator set's space.  Levels
    closer than 1e-10 in energy are treated as one degenerate subspace and the
    population of the whole subspace is reported, so the value does not depend
    on the eigensolver's basis choice inside the crossing.
    """
    state = np.asarray(state)
    sl = spectrum(opset, A, B, C)
    P = _level_projector(sl, level)
    if state.ndim == 1:
        if state.shape != (opset.dim,):
            raise ValueError("state dimension does not match the operator set")
        val = float(np.sum(np.abs(P.conj().T @ state) ** 2))
    elif state.ndim == 2:
        if state.shape != (opset.dim, opset.dim):
            raise ValueError("state dimension does not match the operator set")
        val = float(np.real(np.trace(P.conj().T @ state @ P)))
    else:
        raise ValueError("state must be a ket or a density matrix")
    return min(max(val, 0.0), 1.0)


def reference_coefficients(protocol, t: float) -> tuple[float, float, float]:
    """Schedule coefficients of the fidelity reference Hamiltonian at time t.

    Identical to the driving coefficients except inside an SQS quench window,
    where the reference is held at the pre-quench Hamiltonian H(t_q): a
    sudden quench does not change which state counts as the ground state.
    """
    if protocol.kind == "sqs" and protocol.dT_q > 0.0 \
            and protocol.t_q <= t < protocol.t_q + protocol.dT_q:
        B = protocol.t_q / protocol.T
        return 1.0 - B, B, 0.0
    return protocol.coefficients(t)


def trajectory_fidelities(traj, levels=(0, 1)) -> np.ndarray:
    """Instantaneous-eigenstate populations along a trajectory.

    Returns an array of shape (n_times, len(levels)).  Liouville-space
    trajectories are scored through their maximal-spin block, which is the
    physical density matrix on the symmetric subspace.
    """
    out = np.empty((len(traj.times), len(levels)))
    for i, t in enumerate(traj.times):
        A, B, C = reference_coefficients(traj.protocol, min(t, traj.protocol.total_time))
        state = traj.states[i]
        if traj.space == "reduced-liouville":
            state = traj.liouville.top_block(state)
        for col, level in enumerate(levels):
            out[i, col] = fidelity(state, traj.opset, A, B, C, level=level)
    return out


@dataclass(frozen=True)
class FitResult:
    y0: float
    y_sat: float
    tau: float
    residual_norm: float

    def model(self, T):
        return self.y0 + (self.y_sat - self.y0) * (1.0 - np.exp(-np.asarray(T) / self.tau))


class FitError(RuntimeError):
    pass


def fit_saturation(points, start: float | None = None,
                   y_sat: float = 1.0) -> FitResult:
    """Fit I(T) = y0 + (y_sat - y0)(1 - exp(-T/tau)) with y_sat pinned.

    `points` is a sequence of (T, infidelity) pairs; only T >= start enters
    the fit.  Damped Gauss-Newton over (y0, tau) from a log-spaced ladder of
    tau starting guesses; the best converged fit wins.
    """
    pts = np.asarray(sorted(points), dtype=float)
    if start is not None:
        pts = pts[pts[:, 0] >= start]
    if len(pts) < 3:
        raise FitError("need at least three points at or past the fit start")
    T, y = pts[:, 0], pts[:, 1]
    if np.ptp(y) < 1e-14:
        raise FitError("constant data: tau is unidentifiable")

    def residual(y0, tau):
        return y0 + (y_sat - y0) * (1.0 - np.exp(-T / tau)) - y

    best = None
    for tau0 in np.geomspace(max(T[0], 1e-3), 100.0 * T[-1], 24):
        y0, tau = float(np.clip(y[0], 0.0, 1.0)), float(tau0)
        for _ in range(200):
            r = residual(y0, tau)
            decay = np.exp(-T / tau)
            J = np.column_stack([
                decay,                                   # d/dy0
                -(y_sat - y0) * decay * T / tau ** 2,    # d/dtau
            ])
            try:
                step, *_ = np.linalg.lstsq(J, -r, rcond=None)
            except np.linalg.LinAlgError:
                break
            lam, improved = 1.0, False
            base = float(r @ r)
            for _ in range(30):
                y0_new = y0 + lam * step[0]
                tau_new = tau + lam * step[1]
                if tau_new > 0:
                    r_new = residual(y0_new, tau_new)
                    if float(r_new @ r_new) < base:
                        y0, tau, improved = y0_new, tau_new, True
                        break
                lam *= 0.5
            if not improved:
                break
            if np.linalg.norm(lam * step) < 1e-12 * max(1.0, tau):
                break
        rn = float(np.linalg.norm(residual(y0, tau)))
        if tau > 0 and (best is None or rn < best.residual_norm):
            best = FitResult(y0=y0, y_sat=y_sat, tau=tau, residual_norm=rn)
    if best is None:
        raise FitError("Gauss-Newton failed to converge from every start")
    return best
