"""Iterative decoding thresholds of protograph ensembles.

Exact per-edge density evolution on the BEC, and a reciprocal-channel
approximation (one-dimensional surrogate, consistent-Gaussian messages
tracked by their mean) on the binary-input AWGN channel.  Both drive a
bisection search for the critical channel parameter.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import _segments as seg
from .protograph import BaseMatrix, design_rate

log = logging.getLogger(__name__)

LN2 = math.log(2.0)


class BracketError(RuntimeError):
    """The requested bisection bracket does not straddle the threshold."""


@dataclass(frozen=True)
class Bec:
    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("erasure probability must lie in [0, 1]")


@dataclass(frozen=True)
class Awgn:
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError("noise standard deviation must be positive")


@dataclass(frozen=True)
class ThresholdResult:
    param_star: float
    ebno_db: float | None
    rate_used: float
    iterations_at_threshold: int
    bisection_width: float
    gap_db: float | None = None


def ebno_db_from_sigma(sigma: float, rate: float) -> float:
    return 10.0 * math.log10(1.0 / (2.0 * rate * sigma * sigma))


def sigma_from_ebno_db(ebno_db: float, rate: float) -> float:
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebno_db / 10.0)))


# --- protograph edge structure ------------------------------------------------


class _EdgeGraph:
    """Directed edge slots of a base matrix, one per parallel edge, with the
    sort orders needed for grouped variable-side and check-side updates."""

    def __init__(self, base: BaseMatrix):
        rows, cols = np.nonzero(base.entries)
        mult = base.entries[rows, cols]
        self.chk = np.repeat(rows, mult)
        self.var = np.repeat(cols, mult)
        self.n_edges = len(self.var)
        self.n_v = base.n_v
        self.n_c = base.n_c
        # edges are generated row-major: already sorted by check
        self.by_var = np.argsort(self.var, kind="stable")
        self.inv_by_var = np.argsort(self.by_var, kind="stable")
        self.var_sorted = self.var[self.by_var]
        self.var_starts = seg.group_starts(self.var_sorted, self.n_v)
        self.chk_starts = seg.group_starts(self.chk, self.n_c)


# --- BEC density evolution ----------------------------------------------------


def _bec_de_run(base: BaseMatrix, eps: float, max_iter: int, residual: float):
    g = _EdgeGraph(base)
    eps_v = np.full(base.n_v, eps)
    for j in base.punctured:
        eps_v[j] = 1.0
    y = np.ones(g.n_edges)
    x_prev = None
    stall = 0
    for it in range(1, max_iter + 1):
        yv = y[g.by_var]
        x = eps_v[g.var_sorted] * seg.exclusive_prod(yv, g.var_starts, g.var_sorted)
        xc = x[g.inv_by_var]
        y = 1.0 - seg.exclusive_prod(1.0 - xc, g.chk_starts, g.chk)
        app = eps_v * seg.segment_prod(y[g.by_var], g.var_starts)
        if app.max() < residual:
            return True, it
        if x_prev is not None and np.abs(x - x_prev).max() < 1e-14:
            stall += 1
            if stall >= 10:  # numerically at a nonzero fixed point
                return False, it
        else:
            stall = 0
        x_prev = x
    return False, max_iter


def bec_de_converges(
    base: BaseMatrix, eps: float, max_iter: int = 20000, residual: float = 1e-6
) -> bool:
    """True iff per-edge BEC density evolution drives every variable-node
    a-posteriori erasure probability below ``residual`` within ``max_iter``
    iterations.  Punctured variables start from erasure probability 1."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError("erasure probability must lie in [0, 1]")
    ok, _ = _bec_de_run(base, eps, max_iter, residual)
    return ok


def bec_threshold(
    base: BaseMatrix,
    tol: float = 1e-4,
    max_iter: int = 20000,
    residual: float = 1e-6,
) -> ThresholdResult:
    """Bisection for the BEC threshold over eps in [0, 1]."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    lo, hi = 0.0, 1.0
    iters_at = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, it = _bec_de_run(base, mid, max_iter, residual)
        if ok:
            lo, iters_at = mid, it
        else:
            hi = mid
    rate = design_rate(base)
    return ThresholdResult(
        param_star=0.5 * (lo + hi),
        ebno_db=None,
        rate_used=float(rate.rate),
        iterations_at_threshold=iters_at,
        bisection_width=hi - lo,
    )


# --- BIAWGN capacity and the reciprocal transform ------------------------------

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(127)
_SERIES_CUT = 1e-3


def _capacity_series(m):
    # C(m) = (m/4 - m^2/16 + m^3/48 + O(m^4)) / ln 2 for small m
    return (m / 4.0 - m * m / 16.0 + m**3 / 48.0) / LN2


def _capacity_gh(m):
    m = np.asarray(m, dtype=np.float64)
    z = m[..., None] + 2.0 * np.sqrt(m[..., None]) * _GH_NODES
    f = np.logaddexp(0.0, -z) / LN2  # log2(1 + e^-z), stable
    return 1.0 - (f @ _GH_WEIGHTS) / math.sqrt(math.pi)


def biawgn_capacity(m):
    """Capacity (bits) of the binary-input channel whose LLR is Gaussian
    with mean m and variance 2m.  C(0) = 0, C(inf) = 1, strictly increasing.

    Gauss-Hermite quadrature (127 nodes) with a series fallback below 1e-3.
    """
    scalar = np.isscalar(m)
    m = np.asarray(m, dtype=np.float64)
    if (m < 0).any():
        raise ValueError("LLR mean must be non-negative")
    out = np.empty_like(m)
    small = m < _SERIES_CUT
    inf = np.isinf(m)
    mid = ~small & ~inf
    out[small] = _capacity_series(m[small])
    out[inf] = 1.0
    if mid.any():
        out[mid] = _capacity_gh(m[mid])
    np.clip(out, 0.0, 1.0, out=out)
    return float(out) if scalar else out


class _ReciprocalTable:
    """Monotone cubic interpolation of C over a log-spaced mean grid, plus
    the inverse map; built once, immutable, shared by all RCA runs."""

    GRID_LO = 1e-4
    GRID_HI = 1e4

    def __init__(self, n: int = 3000):
        lnm = np.linspace(math.log(self.GRID_LO), math.log(self.GRID_HI), n)
        m = np.exp(lnm)
        c = biawgn_capacity(m)
        self.lnm = lnm
        self.c = c
        self.fwd = PchipInterpolator(lnm, c, extrapolate=False)
        # invert only over the strictly-increasing, unsaturated prefix
        keep = c < 1.0 - 1e-13
        keep &= np.concatenate(([True], np.diff(c) > 0))
        self.c_lo = c[keep][0]
        self.c_hi = c[keep][-1]
        self.inv = PchipInterpolator(c[keep], lnm[keep], extrapolate=False)

    def capacity(self, m: np.ndarray) -> np.ndarray:
        m = np.asarray(m, dtype=np.float64)
        out = np.empty_like(m)
        lo = m < self.GRID_LO
        hi = m > self.GRID_HI
        mid = ~lo & ~hi
        out[lo] = _capacity_series(m[lo])
        out[hi] = 1.0
        if mid.any():
            out[mid] = self.fwd(np.log(m[mid]))
        return out

    def inv_capacity(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        out = np.empty_like(t)
        lo = t < self.c_lo
        hi = t > self.c_hi
        mid = ~lo & ~hi
        # series inverse of C = (m/4 - m^2/16)/ln2 below the table
        m0 = 4.0 * LN2 * np.clip(t[lo], 0.0, None)
        out[lo] = m0 + m0 * m0 / 4.0
        out[hi] = np.inf
        if mid.any():
            out[mid] = np.exp(self.inv(t[mid]))
        return out

    def reciprocal(self, m: np.ndarray) -> np.ndarray:
        return self.inv_capacity(1.0 - self.capacity(m))


_table: _ReciprocalTable | None = None


def _get_table() -> _ReciprocalTable:
    global _table
    if _table is None:
        _table = _ReciprocalTable()
    return _table


def reciprocal(m: float) -> float:
    """The unique m' with C(m) + C(m') = 1; reciprocal(0) = +inf and
    arithmetic with the sentinel saturates.  Table-bracketed root find,
    polished on the quadrature capacity."""
    if m < 0:
        raise ValueError("LLR mean must be non-negative")
    if m == 0.0:
        return math.inf
    if math.isinf(m):
        return 0.0
    t = 1.0 - biawgn_capacity(m)
    guess = float(_get_table().inv_capacity(np.asarray(t)))
    if not math.isfinite(guess):
        return guess
    if guess == 0.0 or t <= 0.0:
        return 0.0
    lo, hi = guess * 0.5, guess * 2.0
    flo = biawgn_capacity(lo) - t
    fhi = biawgn_capacity(hi) - t
    for _ in range(60):
        if flo <= 0.0 <= fhi:
            break
        if flo > 0.0:
            lo *= 0.5
            flo = biawgn_capacity(lo) - t
        if fhi < 0.0:
            hi *= 2.0
            fhi = biawgn_capacity(hi) - t
    return float(brentq(lambda x: biawgn_capacity(x) - t, lo, hi, xtol=1e-14, rtol=1e-13))


def shannon_ebno_db(rate: float) -> float:
    """Binary-input AWGN Shannon-limit E_b/N_0 (dB) at the given rate."""
    if not 0.0 < rate < 1.0:
        raise ValueError("rate must lie in (0, 1)")
    tab = _get_table()
    guess = float(tab.inv_capacity(np.asarray(rate)))
    lo, hi = guess * 0.5, guess * 2.0
    m_sh = float(brentq(lambda x: biawgn_capacity(x) - rate, lo, hi, xtol=1e-12, rtol=1e-12))
    # m = 2/sigma^2  =>  Eb/N0 = 1/(2 R sigma^2) = m/(4R)
    return 10.0 * math.log10(m_sh / (4.0 * rate))


# --- RCA density evolution -----------------------------------------------------


def _rca_run(base: BaseMatrix, sigma: float, max_iter: int, target_mean: float):
    g = _EdgeGraph(base)
    tab = _get_table()
    m_ch = np.full(base.n_v, 2.0 / (sigma * sigma))
    for j in base.punctured:
        m_ch[j] = 0.0
    c2v = np.zeros(g.n_edges)  # check-sorted order
    prev = None
    stall = 0
    for it in range(1, max_iter + 1):
        cv = c2v[g.by_var]
        v2c = m_ch[g.var_sorted] + seg.exclusive_sum(cv, g.var_starts, g.var_sorted)
        rc = tab.reciprocal(v2c[g.inv_by_var])
        s = seg.exclusive_sum(rc, g.chk_starts, g.chk)
        c2v = tab.reciprocal(s)
        app = m_ch + seg.segment_sum(
            np.where(np.isfinite(c2v[g.by_var]), c2v[g.by_var], 1e30), g.var_starts
        )
        if app.min() >= target_mean:
            return True, it
        finite = np.isfinite(c2v)
        snap = np.where(finite, c2v, 1e30)
        if prev is not None and np.abs(snap - prev).max() < 1e-12 * max(1.0, snap.max()):
            stall += 1
            if stall >= 20:
                return False, it
        else:
            stall = 0
        prev = snap
    return False, max_iter


def rca_converges(
    base: BaseMatrix,
    sigma: float,
    max_iter: int = 20000,
    target_mean: float = 100.0,
) -> bool:
    """True iff the reciprocal-channel approximation drives every variable's
    full LLR mean (channel plus all incoming) to at least ``target_mean``.

    Channel mean is 2/sigma^2 on transmitted variables, 0 on punctured ones.
    Check nodes combine through the reciprocal transform on each side."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    ok, _ = _rca_run(base, sigma, max_iter, target_mean)
    return ok


def rca_threshold(
    base: BaseMatrix,
    tol: float = 1e-4,
    sigma_lo: float = 0.01,
    sigma_hi: float = 1.2,
    max_iter: int = 20000,
    target_mean: float = 100.0,
) -> ThresholdResult:
    """Bisection for the RCA noise threshold sigma*, reported with the
    E_b/N_0 operating point and the gap to the binary-input Shannon limit
    at the ensemble design rate.  Raises BracketError when the starting
    bracket does not straddle the threshold."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    rate = design_rate(base)
    r = float(rate.rate)
    if r <= 0:
        raise ValueError("nonpositive design rate: E_b/N_0 undefined")
    ok_lo, _ = _rca_run(base, sigma_lo, max_iter, target_mean)
    if not ok_lo:
        raise BracketError(f"RCA does not converge at sigma = {sigma_lo}")
    ok_hi, _ = _rca_run(base, sigma_hi, max_iter, target_mean)
    if ok_hi:
        raise BracketError(f"RCA still converges at sigma = {sigma_hi}")
    lo, hi = sigma_lo, sigma_hi
    iters_at = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        ok, it = _rca_run(base, mid, max_iter, target_mean)
        if ok:
            lo, iters_at = mid, it
        else:
            hi = mid
    sigma_star = 0.5 * (lo + hi)
    ebno = ebno_db_from_sigma(sigma_star, r)
    gap = ebno - shannon_ebno_db(r)
    return ThresholdResult(
        param_star=sigma_star,
        ebno_db=ebno,
        rate_used=r,
        iterations_at_threshold=iters_at,
        bisection_width=hi - lo,
        gap_db=gap,
    )
