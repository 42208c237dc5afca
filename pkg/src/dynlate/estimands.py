"""Shared container for per-period estimands (population or sample)."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PeriodOutOfRange

POPULATION_ZERO_TOL = 1e-12
"""Population quantities within this of zero are treated as exactly zero."""


@dataclass(frozen=True)
class EstimandSet:
    """Per-period reduced forms, first stages, and switching probabilities.

    Vectors are indexed by period: ``rf[t-1]`` is the period-t reduced
    form. ``rho[t-2]`` is fs_{t-1} - fs_t for t = 2..T, the net excess
    switching into treatment at t under z=0 versus z=1. ``switch_z0`` /
    ``switch_z1`` hold P(d_t > d_1 | z) for t = 2..T, the cumulative
    switching probability since period 1 (so their difference telescopes
    to fs_1 - fs_t, which equals rho_t at t = 2). ``iv`` entries are None
    where the first stage is zero.

    ``kind`` distinguishes exact population values ("population", zero
    tests use POPULATION_ZERO_TOL) from sample analogues ("sample", zero
    tests are exact since count ratios either match or they do not).
    """

    T: int
    rf: tuple[float, ...]
    fs: tuple[float, ...]
    iv: tuple[float | None, ...]
    rho: tuple[float, ...]
    switch_z0: tuple[float, ...]
    switch_z1: tuple[float, ...]
    kind: str = "population"
    n: int | None = None
    n_z1: int | None = None
    n_z0: int | None = None

    def __post_init__(self):
        if self.kind not in ("population", "sample"):
            raise ValueError(f"kind must be population or sample, got {self.kind!r}")
        T = self.T
        if not (len(self.rf) == len(self.fs) == len(self.iv) == T):
            raise ValueError("rf, fs, iv must have length T")
        if not (len(self.rho) == len(self.switch_z0) == len(self.switch_z1) == T - 1):
            raise ValueError("rho and switch vectors must have length T-1")

    def _check_period(self, t: int, lo: int = 1) -> None:
        if not isinstance(t, int) or not lo <= t <= self.T:
            raise PeriodOutOfRange(f"period must be in {lo}..{self.T}, got {t!r}")

    def rf_at(self, t: int) -> float:
        self._check_period(t)
        return self.rf[t - 1]

    def fs_at(self, t: int) -> float:
        self._check_period(t)
        return self.fs[t - 1]

    def iv_at(self, t: int) -> float | None:
        self._check_period(t)
        return self.iv[t - 1]

    def rho_at(self, t: int) -> float:
        self._check_period(t, lo=2)
        return self.rho[t - 2]

    def switch_at(self, t: int, z: int) -> float:
        self._check_period(t, lo=2)
        return (self.switch_z1 if z == 1 else self.switch_z0)[t - 2]

    @property
    def fs1_is_zero(self) -> bool:
        if self.kind == "population":
            return abs(self.fs[0]) < POPULATION_ZERO_TOL
        return self.fs[0] == 0.0


def attach_iv(rf, fs, zero) -> tuple[float | None, ...]:
    """Per-period IV ratios with None where the first stage is zero."""
    return tuple(
        None if zero(f) else r / f for r, f in zip(rf, fs)
    )
