"""Annealing schedules: standard QA, catalyst-assisted, and sweep-quench-sweep.

All protocols share A(t) = 1 - B(t).  Times are in units of 1/J.  The SQS
quench window is half-open, [t_q, t_q + dT_q), so B is single-valued at the
seams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["QA", "NSDQA", "SQS", "lz_estimate", "protocol_from_dict"]


@dataclass(frozen=True)
class QA:
    """Linear sweep of duration T with no catalyst."""

    T: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("annealing time T must be positive")

    @property
    def total_time(self) -> float:
        return self.T

    @property
    def kind(self) -> str:
        return "qa"

    @property
    def j_xx(self) -> float:
        return 0.0

    def coefficients(self, t: float) -> tuple[float, float, float]:
        _check_time(t, self.total_time)
        B = t / self.T
        return 1.0 - B, B, 0.0

    def discontinuities(self) -> list[float]:
        return []

    def to_dict(self) -> dict:
        return {"kind": "qa", "T": self.T}


@dataclass(frozen=True)
class NSDQA:
    """Linear sweep with the nonstoquastic catalyst ramped as C = A*B."""

    T: float
    j_xx: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("annealing time T must be positive")

    @property
    def total_time(self) -> float:
        return self.T

    @property
    def kind(self) -> str:
        return "nsdqa"

    def coefficients(self, t: float) -> tuple[float, float, float]:
        _check_time(t, self.total_time)
        B = t / self.T
        A = 1.0 - B
        return A, B, A * B

    def discontinuities(self) -> list[float]:
        return []

    def to_dict(self) -> dict:
        return {"kind": "nsdqa", "T": self.T, "j_xx": self.j_xx}


@dataclass(frozen=True)
class SQS:
    """Sweep-quench-sweep: hold B = B_q for dT_q starting at t_q.

    The total duration is T + dT_q; after the quench the sweep resumes where
    it left off.
    """

    T: float
    t_q: float
    dT_q: float
    B_q: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("annealing time T must be positive")
        if not 0.0 <= self.t_q <= self.T:
            raise ValueError("quench onset t_q must lie in [0, T]")
        if self.dT_q < 0:
            raise ValueError("quench duration dT_q must be non-negative")
        if not 0.0 <= self.B_q <= 1.0:
            raise ValueError("quench value B_q must lie in [0, 1]")

    @property
    def total_time(self) -> float:
        return self.T + self.dT_q

    @property
    def kind(self) -> str:
        return "sqs"

    @property
    def j_xx(self) -> float:
        return 0.0

    @property
    def tau_q(self) -> float:
        return self.t_q / self.T

    def coefficients(self, t: float) -> tuple[float, float, float]:
        _check_time(t, self.total_time)
        if t < self.t_q:
            B = t / self.T
        elif t < self.t_q + self.dT_q:
            B = self.B_q
        else:
            B = (t - self.dT_q) / self.T
        return 1.0 - B, B, 0.0

    def discontinuities(self) -> list[float]:
        if self.dT_q == 0.0:
            return []
        return [self.t_q, self.t_q + self.dT_q]

    def to_dict(self) -> dict:
        return {"kind": "sqs", "T": self.T, "t_q": self.t_q,
                "dT_q": self.dT_q, "B_q": self.B_q}


def _check_time(t: float, total: float):
    if not -1e-12 <= t <= total * (1.0 + 1e-12) + 1e-12:
        raise ValueError(f"time {t} outside [0, {total}]")


def lz_estimate(P0: float, T: float, gap: float) -> float:
    """Diagnostic Landau-Zener survival estimate P0 * exp(-T * gap^2).

    Proportionality constants of the physical transition rate are not
    included; chain calls to model excitation followed by return through a
    second crossing.
    """
    if not 0.0 <= P0 <= 1.0:
        raise ValueError("P0 must lie in [0, 1]")
    if T <= 0:
        raise ValueError("T must be positive")
    if gap < 0:
        raise ValueError("gap must be non-negative")
    return P0 * math.exp(-T * gap * gap)


def protocol_from_dict(record: dict):
    """Inverse of the protocols' to_dict, for config files and CLI plumbing."""
    record = dict(record)
    kind = record.pop("kind")
    if kind == "qa":
        return QA(**record)
    if kind == "nsdqa":
        return NSDQA(**record)
    if kind == "sqs":
        return SQS(**record)
    raise ValueError(f"unknown protocol kind {kind!r}")
