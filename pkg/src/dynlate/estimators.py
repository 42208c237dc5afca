"""Sample estimation, recursive identification, and partial-identification bounds.

Everything here consumes an :class:`~dynlate.estimands.EstimandSet`, so the
same code paths serve sample panels and exact population inputs. Results
that are only valid under a named homogeneity assumption carry that
assumption in their metadata instead of asserting it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateInstrument, RelevanceFailure, SignedBoundViolation
from .estimands import POPULATION_ZERO_TOL, EstimandSet, attach_iv
from .panel import Panel

LOW_FS1_THRESHOLD = 0.01
"""|fs_1| below this triggers a warning; the estimate itself is unchanged."""

CALENDAR_HOMOGENEITY = "calendar-homogeneity"
CROSS_GROUP_HOMOGENEITY = "cross-group-homogeneity"
NO_LATE_SWITCHERS = "no-late-switchers"
KNOWN_ASSUMPTIONS = (CALENDAR_HOMOGENEITY, CROSS_GROUP_HOMOGENEITY, NO_LATE_SWITCHERS)


def estimate(panel: Panel) -> EstimandSet:
    """Sample per-period estimands from arm-wise means.

    rf_t and fs_t are differences of arm means of y and d; the switching
    shares are the arm-wise fractions of units treated at t but not at 1.
    """
    if not panel.has_both_arms:
        raise DegenerateInstrument("panel has a single instrument arm")
    on = panel.z == 1
    y1 = panel.y[on].mean(axis=0)
    y0 = panel.y[~on].mean(axis=0)
    d1 = panel.d[on].mean(axis=0)
    d0 = panel.d[~on].mean(axis=0)
    rf = tuple(float(v) for v in (y1 - y0))
    fs = tuple(float(v) for v in (d1 - d0))
    later = (panel.d[:, 1:] == 1) & (panel.d[:, :1] == 0)
    sw1 = tuple(float(v) for v in later[on].mean(axis=0)) if panel.T > 1 else ()
    sw0 = tuple(float(v) for v in later[~on].mean(axis=0)) if panel.T > 1 else ()
    rho = tuple(fs[t - 1] - fs[t] for t in range(1, panel.T))
    return EstimandSet(
        T=panel.T,
        rf=rf,
        fs=fs,
        iv=attach_iv(rf, fs, zero=lambda f: f == 0.0),
        rho=rho,
        switch_z0=sw0,
        switch_z1=sw1,
        kind="sample",
        n=panel.n,
        n_z1=panel.n_z1,
        n_z0=panel.n_z0,
    )


def _require_nonzero_fs1(est: EstimandSet) -> float:
    if est.fs1_is_zero:
        raise RelevanceFailure("first stage at t=1 is zero")
    return est.fs[0]


@dataclass(frozen=True)
class IdentifiedProfile:
    """Effect-by-exposure profile solved from the reduced-form recursion.

    ``deltas[tau]`` is the mean effect at exposure tau for first-period
    compliers, valid under calendar-time homogeneity (the caller's
    declared assumption, echoed in ``assumes``). ``residual`` is the max
    absolute defect when the triangular system is applied back to the
    solved profile.
    """

    deltas: tuple[float, ...]
    fs1: float
    rho: tuple[float, ...]
    residual: float
    assumes: tuple[str, ...] = (CALENDAR_HOMOGENEITY,)
    warnings: tuple[str, ...] = ()


def identify(est: EstimandSet) -> IdentifiedProfile:
    """Solve the lower-triangular system rf = P delta by forward substitution.

    Row t reads rf_t = fs_1 * delta[t-1] - sum_{k=2..t} rho_k * delta[t-k],
    so each new exposure is the current reduced form corrected by the
    already-identified shorter-exposure effects, scaled by 1/fs_1. Only
    first-period relevance is required; later first stages may vanish.
    """
    fs1 = _require_nonzero_fs1(est)
    deltas: list[float] = []
    for t in range(1, est.T + 1):
        acc = est.rf[t - 1] + math.fsum(
            est.rho[k - 2] * deltas[t - k] for k in range(2, t + 1)
        )
        deltas.append(acc / fs1)
    residual = max(
        abs(
            fs1 * deltas[t - 1]
            - math.fsum(est.rho[k - 2] * deltas[t - k] for k in range(2, t + 1))
            - est.rf[t - 1]
        )
        for t in range(1, est.T + 1)
    )
    warnings = ()
    if abs(fs1) < LOW_FS1_THRESHOLD:
        warnings = (
            f"first stage at t=1 is small (|fs_1| = {abs(fs1):.3g} < {LOW_FS1_THRESHOLD});"
            " identified effects may be unstable",
        )
    return IdentifiedProfile(
        deltas=tuple(deltas),
        fs1=fs1,
        rho=est.rho,
        residual=residual,
        warnings=warnings,
    )


@dataclass(frozen=True)
class BoundsReport:
    """Interval for the dynamic effect at period t under one bounding method."""

    t: int
    method: str
    lower: float
    upper: float
    lo: float
    hi: float
    rf_t: float
    fs1: float
    fs_t: float
    switch_z0_t: float | None = None
    switch_z1_t: float | None = None
    fs_path: tuple[float, ...] | None = None
    assumes: tuple[str, ...] = ()

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack


def _require_positive_fs1(est: EstimandSet) -> float:
    fs1 = est.fs[0]
    floor = POPULATION_ZERO_TOL if est.kind == "population" else 0.0
    if fs1 <= floor:
        raise RelevanceFailure("bounds require a positive first stage at t=1")
    return fs1


def _check_signed(lo: float, hi: float) -> None:
    if lo > 0.0 or hi < 0.0:
        raise SignedBoundViolation(
            "this method needs lo <= 0 <= hi; use the unrestricted general bounds"
        )


def _check_ordered(lo: float, hi: float) -> None:
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise ValueError(f"effect bounds must satisfy lo <= hi, got ({lo}, {hi})")


def bounds_general(est: EstimandSet, t: int, lo: float, hi: float) -> BoundsReport:
    """Interval from arm-wise switching probabilities; needs lo <= 0 <= hi.

    Valid whenever every switcher-group effect entering the period-t
    reduced form lies in [lo, hi]; no homogeneity is assumed.
    """
    est._check_period(t, lo=2)
    _check_ordered(lo, hi)
    _check_signed(lo, hi)
    fs1 = _require_positive_fs1(est)
    base = est.rf_at(t) / fs1
    sw0 = est.switch_at(t, 0)
    sw1 = est.switch_at(t, 1)
    return BoundsReport(
        t=t,
        method="general",
        lower=base + sw0 * lo / fs1 - sw1 * hi / fs1,
        upper=base + sw0 * hi / fs1 - sw1 * lo / fs1,
        lo=lo,
        hi=hi,
        rf_t=est.rf_at(t),
        fs1=fs1,
        fs_t=est.fs_at(t),
        switch_z0_t=sw0,
        switch_z1_t=sw1,
    )


def bounds_general_unrestricted(
    est: EstimandSet, t: int, lo: float, hi: float
) -> BoundsReport:
    """General bounds for effect bounds of arbitrary sign.

    Indicator-weighted variant: when a bound has the "unexpected" sign,
    the corresponding switching probability is replaced by the tighter
    first-stage gap max(fs_1 - fs_t, 0) or max(fs_t - fs_1, 0). Reduces
    exactly to :func:`bounds_general` whenever lo <= 0 <= hi.
    """
    est._check_period(t, lo=2)
    _check_ordered(lo, hi)
    fs1 = _require_positive_fs1(est)
    rf_t, fs_t = est.rf_at(t), est.fs_at(t)
    base = rf_t / fs1
    sw0 = est.switch_at(t, 0)
    sw1 = est.switch_at(t, 1)
    drop = max(fs1 - fs_t, 0.0)
    rise = max(fs_t - fs1, 0.0)
    lower = (
        base
        + (sw0 if lo < 0.0 else drop) * lo / fs1
        - (sw1 if hi >= 0.0 else rise) * hi / fs1
    )
    upper = (
        base
        + (sw0 if hi >= 0.0 else drop) * hi / fs1
        - (sw1 if lo < 0.0 else rise) * lo / fs1
    )
    return BoundsReport(
        t=t,
        method="general_unrestricted",
        lower=lower,
        upper=upper,
        lo=lo,
        hi=hi,
        rf_t=rf_t,
        fs1=fs1,
        fs_t=fs_t,
        switch_z0_t=sw0,
        switch_z1_t=sw1,
    )


def bounds_tight(est: EstimandSet, t: int, lo: float, hi: float) -> BoundsReport:
    """Weakly tighter interval from the first-stage path; needs lo <= 0 <= hi.

    Additionally valid only when, per exposure, all switcher groups at
    the same switch period share one effect (cross-group homogeneity);
    that requirement is echoed in the report metadata, not verified.
    """
    est._check_period(t, lo=2)
    _check_ordered(lo, hi)
    _check_signed(lo, hi)
    fs1 = _require_positive_fs1(est)
    rf_t, fs_t = est.rf_at(t), est.fs_at(t)
    base = rf_t / fs1
    drop = (fs1 - fs_t) / fs1
    increases = math.fsum(
        (est.fs_at(k - 1) - est.fs_at(k)) / fs1
        for k in range(2, t + 1)
        if est.fs_at(k - 1) < est.fs_at(k)
    )
    return BoundsReport(
        t=t,
        method="tight",
        lower=base + lo * drop + (hi - lo) * increases,
        upper=base + hi * drop + (lo - hi) * increases,
        lo=lo,
        hi=hi,
        rf_t=rf_t,
        fs1=fs1,
        fs_t=fs_t,
        fs_path=tuple(est.fs[:t]),
        assumes=(CROSS_GROUP_HOMOGENEITY,),
    )


def outcome_range_bounds(panel: Panel) -> tuple[float, float]:
    """Default effect bounds +-(max(y) - min(y)) from the observed outcome range."""
    spread = float(panel.y.max() - panel.y.min())
    return -spread, spread


class NegativeWeightStatus(Enum):
    GUARANTEED = "guaranteed"
    POSSIBLE = "possible"


@dataclass(frozen=True)
class NegativeWeightFlag:
    """Data-only negative-weight diagnosis for one period.

    A first stage that strictly decreases at any k <= t guarantees
    negatively weighted effects in the period-t reduced form (and in the
    IV estimand when fs_t > 0); a nondecreasing path leaves them merely
    possible, since the condition is sufficient but not necessary. At
    t = 2 this specializes to the simple comparison fs_2 < fs_1.
    """

    t: int
    status: NegativeWeightStatus
    decreasing_k: int | None


def negative_weight_diagnostic(est: EstimandSet) -> tuple[NegativeWeightFlag, ...]:
    """Per-period negative-weight flags from the first-stage path alone."""
    flags = []
    for t in range(2, est.T + 1):
        k_hit = next(
            (k for k in range(2, t + 1) if est.fs[k - 1] < est.fs[k - 2]), None
        )
        flags.append(
            NegativeWeightFlag(
                t=t,
                status=(
                    NegativeWeightStatus.GUARANTEED
                    if k_hit is not None
                    else NegativeWeightStatus.POSSIBLE
                ),
                decreasing_k=k_hit,
            )
        )
    return tuple(flags)
