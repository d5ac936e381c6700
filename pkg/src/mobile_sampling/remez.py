"""Remez-type inequality and sublevel-set decay for real 1-D exponential sums.

All measurements go through a monotone decomposition of g on [0, R): the
critical points of g (zeros of g') split the interval into pieces on which
g is monotone, so {|g| < eps} meets each piece in a single interval whose
ends are found by bisection.  This stays exact for eps far below the scan
resolution, where a plain grid would miss the thin intervals around zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .bandlimited import BandlimitedFunction
from .nodal import DegenerateSliceError, SliceBatch, find_zeros, find_zeros_batch

C_SWEEP = (1.0, 2.0, 4.0, 8.0, 16.0)
GATE_C = 8.0


def _derivative(g: BandlimitedFunction) -> BandlimitedFunction:
    nu = g.freqs[:, 0]
    return BandlimitedFunction(g.freqs, 2j * math.pi * nu * g.coeffs, None, real_valued=True)


def _scan_step(g: BandlimitedFunction) -> float:
    return 1.0 / (64.0 * max(g.bandwidth, 1.0))


@dataclass
class MonotonePieces:
    """Breakpoints 0 = b_0 < ... < b_k = R with g monotone on each [b_i, b_{i+1}]."""

    g: BandlimitedFunction
    breaks: np.ndarray
    values: np.ndarray

    @classmethod
    def build(cls, g: BandlimitedFunction, a: float, b: float) -> "MonotonePieces":
        if g.dimension != 1 or not g.real_valued:
            raise ValueError("need a real one-dimensional function")
        grid = np.linspace(a, b, 2049)
        if np.max(np.abs(g(grid))) <= 1e-13:
            raise DegenerateSliceError("degenerate function: identically zero on the interval")
        crit = np.zeros(0)
        if g.bandwidth > 0:
            dg = _derivative(g)
            batch = SliceBatch(dg, np.zeros((1, 1)), np.ones((1, 1)))
            zs = find_zeros_batch(batch, np.array([a]), np.array([b]), _scan_step(g))
            crit = np.unique(zs.positions[(zs.positions > a) & (zs.positions < b)])
        breaks = np.concatenate([[a], crit, [b]])
        return cls(g, breaks, np.asarray(g(breaks), float))

    def sup_abs(self, intervals=None) -> float:
        """max |g| over [a, b], or over a union of sub-intervals."""
        if intervals is None:
            return float(np.max(np.abs(self.values)))
        best = 0.0
        for lo, hi in intervals:
            inner = self.breaks[(self.breaks > lo) & (self.breaks < hi)]
            pts = np.concatenate([[lo, hi], inner])
            best = max(best, float(np.max(np.abs(self.g(pts)))))
        return best

    def _solve(self, lo, hi, target):
        """Point where g = target on monotone pieces [lo, hi] (vectorised)."""
        flo = self.g(lo) - target
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            fm = self.g(mid) - target
            same = np.sign(fm) == np.sign(flo)
            lo = np.where(same, mid, lo)
            flo = np.where(same, fm, flo)
            hi = np.where(same, hi, mid)
        return 0.5 * (lo + hi)

    def sublevel_many(self, eps) -> np.ndarray:
        """m_1{t in [a, b) : |g(t)| < eps} for every entry of ``eps``."""
        eps = np.asarray(eps, dtype=float)[:, None]
        a, b = self.breaks[None, :-1], self.breaks[None, 1:]
        ga, gb = self.values[None, :-1], self.values[None, 1:]
        inc = gb >= ga
        lo_v = np.where(inc, ga, gb)
        hi_v = np.where(inc, gb, ga)
        # on each piece g runs monotonically from lo_v (at t_lo) to hi_v (at t_hi)
        t_lo = np.broadcast_to(np.where(inc, a, b), (eps.shape[0], a.shape[1]))
        t_hi = np.broadcast_to(np.where(inc, b, a), t_lo.shape)
        a = np.broadcast_to(a, t_lo.shape)
        b = np.broadcast_to(b, t_lo.shape)
        enter = np.where(lo_v >= -eps, t_lo, np.nan)
        leave = np.where(hi_v <= eps, t_hi, np.nan)
        need_enter = np.isnan(enter) & (hi_v > -eps)
        need_leave = np.isnan(leave) & (lo_v < eps)
        target = np.broadcast_to(eps, t_lo.shape)
        if np.any(need_enter):
            enter[need_enter] = self._solve(a[need_enter], b[need_enter], -target[need_enter])
        if np.any(need_leave):
            leave[need_leave] = self._solve(a[need_leave], b[need_leave], target[need_leave])
        ok = ~np.isnan(enter) & ~np.isnan(leave)
        return np.sum(np.where(ok, np.abs(leave - enter), 0.0), axis=1)

    def sublevel(self, eps: float) -> float:
        """m_1{t in [a, b) : |g(t)| < eps}."""
        return float(self.sublevel_many([eps])[0])


def sublevel_measure(g: BandlimitedFunction, R: float, eps: float) -> float:
    """Lebesgue measure of {t in [0, R) : |g(t)| < eps}."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return MonotonePieces.build(g, 0.0, R).sublevel(eps)


def sublevel_closed_form_cos(eps: float, R: float = 1.0) -> float:
    """Measure of {|cos(2 pi t)| < eps} on [0, R) for integer R: (2/pi) arcsin(eps) per unit."""
    return R * 2.0 / math.pi * math.asin(min(eps, 1.0))


@dataclass
class RemezReport:
    lhs: float
    sup_F: float
    measure_F: float
    sigma: float
    R: float
    C: float
    log_rhs: float
    minimal_C: float | None
    final_line_pass: bool

    @property
    def rhs(self) -> float:
        return math.exp(min(self.log_rhs, 700.0))

    @property
    def passed(self) -> bool:
        return math.log(self.lhs) <= self.log_rhs + 1e-12


def _log_remez_rhs(C, R, mF, sigma, supF):
    if supF <= 0:
        return -math.inf
    return math.log(C) + (C + math.e * sigma * R) * math.log(2 * math.e * R / mF) + math.log(supF)


def remez_check(g: BandlimitedFunction, sigma: float | None, R: float, F, C: float = GATE_C,
                sweep=C_SWEEP) -> RemezReport:
    """sup_[0,R) |g| <= C (2eR/m(F))^{C + e sigma R} sup_F |g|, in log form.

    ``F`` is a list of (lo, hi) intervals inside [0, R).  The minimal
    passing C over ``sweep`` is recorded, and the final-line variant
    1 <= 8 (2eR/m(F))^{e sigma R} sup_F |g| is evaluated separately.
    """
    F = [(float(a), float(b)) for a, b in F]
    mF = sum(b - a for a, b in F)
    if mF <= 0:
        raise ValueError("F must have positive measure")
    sigma = g.bandwidth if sigma is None else sigma
    pieces = MonotonePieces.build(g, 0.0, R)
    lhs = pieces.sup_abs()
    supF = pieces.sup_abs(F)
    minimal = None
    for c in sorted(sweep):
        if math.log(lhs) <= _log_remez_rhs(c, R, mF, sigma, supF) + 1e-12:
            minimal = c
            break
    final = (supF > 0 and
             0.0 <= math.log(8.0) + math.e * sigma * R * math.log(2 * math.e * R / mF) + math.log(supF))
    return RemezReport(lhs, supF, mF, sigma, R, C, _log_remez_rhs(C, R, mF, sigma, supF),
                       minimal, final)


@dataclass
class SublevelReport:
    R: float
    sigma: float
    C: float
    epsilons: np.ndarray
    measures: np.ndarray
    bounds: np.ndarray
    decay_exponent: float

    @property
    def passed(self) -> bool:
        return bool(np.all(self.measures <= self.bounds * (1 + 1e-12)))

    def rows(self):
        return [(float(e), float(m), float(b))
                for e, m, b in zip(self.epsilons, self.measures, self.bounds)]


def sublevel_decay_check(g: BandlimitedFunction, sigma: float | None, R: float,
                         C: float = GATE_C, epsilons=None) -> SublevelReport:
    """m{|g| < eps} <= C R (C eps)^{1/(C sigma R)} on a log grid of eps in [1e-8, 1]."""
    sigma = g.bandwidth if sigma is None else sigma
    eps = np.logspace(-8, 0, 33) if epsilons is None else np.asarray(epsilons, float)
    pieces = MonotonePieces.build(g, 0.0, R)
    meas = pieces.sublevel_many(eps)
    bound = C * R * (C * eps) ** (1.0 / (C * sigma * R))
    pos = meas > 0
    if np.sum(pos) >= 2:
        slope = float(np.polyfit(np.log(eps[pos]), np.log(meas[pos]), 1)[0])
    else:
        slope = math.inf
    return SublevelReport(R, sigma, C, eps, meas, bound, slope)


@dataclass
class LogIntegralReport:
    direct: float
    layer_cake: float
    bound: float
    R: float
    sigma: float
    C: float

    @property
    def consistent(self) -> bool:
        scale = max(abs(self.direct), 1e-12)
        return abs(self.direct - self.layer_cake) <= 0.01 * scale + 1e-9

    @property
    def passed(self) -> bool:
        return self.direct <= self.bound


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def log_integral_direct(g: BandlimitedFunction, R: float) -> float:
    """int_0^R log(1/|g|) dt, split at the zeros of g.

    On each interval between consecutive zeros the endpoint singularities
    m log|t - z| are integrated in closed form and the smooth remainder by
    Gauss-Legendre panels no longer than 1/(4 sigma).
    """
    zeros = find_zeros(g, 0.0, R)
    zeros = zeros[(zeros >= 0.0) & (zeros <= R)]
    zpos, zmult = np.unique(zeros, return_counts=True) if zeros.size else (np.zeros(0), np.zeros(0))
    pts = np.concatenate([[0.0], zpos, [R]])
    mult = np.concatenate([[0], zmult, [0]]).astype(float)
    # endpoints of [0, R] that are not zeros carry no singularity
    if zpos.size and zpos[0] == 0.0:
        pts, mult = pts[1:], mult[1:]
    if zpos.size and zpos[-1] == R:
        pts, mult = pts[:-1], mult[:-1]
    panel = 0.25 / max(g.bandwidth, 1e-12)
    total = 0.0
    for a, b, ma, mb in zip(pts[:-1], pts[1:], mult[:-1], mult[1:]):
        L = b - a
        if L <= 0:
            continue
        k = max(1, int(math.ceil(L / panel)))
        edges = np.linspace(a, b, k + 1)
        t = (0.5 * (edges[1:] - edges[:-1])[:, None] * _GL_X[None, :]
             + 0.5 * (edges[1:] + edges[:-1])[:, None]).ravel()
        w = (0.5 * (edges[1:] - edges[:-1])[:, None] * _GL_W[None, :]).ravel()
        with np.errstate(divide="ignore"):
            smooth = (np.log(np.abs(g(t))) - ma * np.log(t - a) - mb * np.log(b - t))
        # closed form of int_a^b log(t - a) dt
        sing = (ma + mb) * L * (math.log(L) - 1.0)
        total -= float(np.dot(w, smooth)) + sing
    return float(total)


def log_integral_layer_cake(g: BandlimitedFunction, R: float, lam_max: float = 40.0,
                            n: int = 1601) -> float:
    """int_0^inf m{|g| < e^{-lambda}} d lambda on [0, R), for sup |g| <= 1.

    Near lambda = lam_max the sublevel measure of simple zeros decays like
    e^{-lambda}, so the tail beyond the cut is added as m(lam_max).
    """
    pieces = MonotonePieces.build(g, 0.0, R)
    lam = np.linspace(0.0, lam_max, n)
    m = pieces.sublevel_many(np.exp(-lam))
    # a point with |g| = 1 exactly is a null set; {|g| < 1} has full measure a.e.
    return float(integrate.simpson(m, x=lam) + m[-1])


def log_integral_bound(C: float, sigma: float, R: float) -> float:
    """Layer-cake integral of min(R, C R (C e^{-lambda})^{1/(C sigma R)})."""
    lc = math.log(C)
    return R * (lc * C * sigma * R + lc + C * sigma * R)


def log_integral_bound_check(g: BandlimitedFunction, sigma: float | None, R: float,
                             C: float = GATE_C) -> LogIntegralReport:
    sigma = g.bandwidth if sigma is None else sigma
    direct = log_integral_direct(g, R)
    lc = log_integral_layer_cake(g, R)
    return LogIntegralReport(direct, lc, log_integral_bound(C, sigma, R), R, sigma, C)


@dataclass
class TrendReport:
    radii: np.ndarray
    normalised: np.ndarray

    @property
    def strictly_decreasing(self) -> bool:
        return bool(np.all(np.diff(self.normalised) < 0))


def log_integral_trend(g: BandlimitedFunction, radii=(2, 4, 8, 16, 32)) -> TrendReport:
    """(1/R^2) int_0^R log(1/|g|) over increasing R."""
    radii = np.asarray(radii, float)
    vals = np.array([log_integral_direct(g, R) / R ** 2 for R in radii])
    return TrendReport(radii, vals)


def random_union_of_intervals(R: float, rng, frac_lo: float = 0.05, frac_hi: float = 0.5,
                              max_pieces: int = 4):
    """Disjoint intervals in [0, R) with total length uniform in [frac_lo R, frac_hi R]."""
    total = R * rng.uniform(frac_lo, frac_hi)
    k = int(rng.integers(1, max_pieces + 1))
    lengths = rng.dirichlet(np.ones(k)) * total
    gaps = rng.dirichlet(np.ones(k + 1)) * (R - total)
    out, t = [], 0.0
    for i in range(k):
        t += gaps[i]
        out.append((t, t + lengths[i]))
        t += lengths[i]
    return out
