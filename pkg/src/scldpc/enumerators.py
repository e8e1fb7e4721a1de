"""Asymptotic weight and trapping-set spectra of protograph ensembles.

The normalized log of the ensemble-average (two-part) weight enumerator is
computed as a nested optimization: an inner convex minimization per check
node type (the exponent of parity-satisfying socket assignments) inside an
outer concave-ish maximization over per-type weight fractions.  Trapping
sets are counted through a modified graph in which every check node gains a
degree-1 flag variable that absorbs parity violations, so a set of variable
nodes inducing b odd-degree checks becomes a codeword of flag weight b.

An exact finite-lifting-factor ensemble-average enumerator (big-integer
coefficient extraction) doubles as the correctness oracle for the
asymptotic machinery.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .protograph import BaseMatrix, degree_profile

NEG_INF = float("-inf")

_FRACTION_CLAMP = 1e-9  # inner solves clamp fractions away from {0, 1}
_GRAD_TOL = 1e-10
_PGA_TOL = 1e-8


def binary_entropy(p):
    """Natural-log binary entropy, 0 at the endpoints."""
    p = np.asarray(p, dtype=np.float64)
    q = np.clip(p, 1e-300, 1.0)
    r = np.clip(1.0 - p, 1e-300, 1.0)
    out = -(p * np.log(q) + (1.0 - p) * np.log(r))
    return out if out.ndim else float(out)


@lru_cache(maxsize=None)
def _pattern_matrix(d: int, parity: int) -> np.ndarray:
    """All length-d binary patterns of the given weight parity, (2^(d-1), d)."""
    if d > 20:
        raise ValueError("check degree too large for pattern enumeration")
    idx = np.arange(1 << d, dtype=np.uint32)
    bits = (idx[:, None] >> np.arange(d, dtype=np.uint32)) & 1
    keep = bits.sum(axis=1) % 2 == parity
    pat = bits[keep].astype(np.float64)
    pat.setflags(write=False)
    return pat


# --- inner solve: exponent of one check node type ------------------------------
#
# a_c(delta) = inf_y [ ln sum_patterns exp(P y) - delta . y ]  (convex in y).
# Feasible delta (inside the parity polytope) give a_c >= 0; any iterate with
# objective value < 0 therefore certifies infeasibility (a_c = -inf).


def _batched_saddle(P: np.ndarray, delta: np.ndarray, y0: np.ndarray | None = None):
    """Damped-Newton minimization for a batch of fraction vectors.

    Returns (values, ystar, feasible); values are -inf where infeasible.
    """
    K, d = P.shape
    R = delta.shape[0]
    y = np.zeros((R, d)) if y0 is None else np.array(y0, dtype=np.float64)
    val = np.zeros(R)
    feas = np.ones(R, dtype=bool)
    active = np.ones(R, dtype=bool)
    g_prev = np.full(R, np.inf)
    stale = np.zeros(R, dtype=np.int32)
    eye = np.eye(d)

    def _obj(yv, dv):
        logits = yv @ P.T
        mx = logits.max(axis=1, keepdims=True)
        ex = np.exp(logits - mx)
        z = ex.sum(axis=1)
        g = np.log(z) + mx[:, 0] - (dv * yv).sum(axis=1)
        return g, ex / z[:, None]

    for _ in range(120):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        yv, dv = y[idx], delta[idx]
        g, w = _obj(yv, dv)
        marg = w @ P
        grad = marg - dv

        bad = g < -1e-9
        done = np.abs(grad).max(axis=1) <= _GRAD_TOL
        stuck = np.abs(g - g_prev[idx]) < 1e-13
        stale[idx] = np.where(stuck, stale[idx] + 1, 0)
        done |= stale[idx] >= 3  # value converged on a polytope face
        g_prev[idx] = g
        val[idx] = np.where(bad, NEG_INF, g)
        feas[idx] &= ~bad
        active[idx] = ~(bad | done)
        sub = np.flatnonzero(~(bad | done))
        if sub.size == 0:
            continue
        j = idx[sub]
        hess = np.einsum("rk,ki,kj->rij", w[sub], P, P) - np.einsum(
            "ri,rj->rij", marg[sub], marg[sub]
        )
        hess += 1e-11 * eye
        rhs = grad[sub][..., None]
        try:
            step = np.linalg.solve(hess, rhs)[..., 0]
        except np.linalg.LinAlgError:
            step = np.linalg.solve(hess + 1e-6 * eye, rhs)[..., 0]
        # a vanishing predicted decrement means the iterate is converged to
        # floating-point accuracy even if the gradient is above tolerance
        dec = (grad[sub] * step).sum(axis=1)
        flat = dec < 1e-15
        if flat.any():
            active[j[flat]] = False
            sub = sub[~flat]
            if sub.size == 0:
                continue
            j = idx[sub]
            step = step[~flat]
        gj = g[sub]
        t = np.ones(len(j))
        pending = np.ones(len(j), dtype=bool)
        for _bt in range(40):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            ytry = y[j[p]] - t[p, None] * step[p]
            gt, _ = _obj(ytry, delta[j[p]])
            ok = gt <= gj[p] - 1e-16
            accept = j[p[ok]]
            y[accept] = ytry[ok]
            pending[p[ok]] = False
            t[p[~ok]] *= 0.5
        still = np.flatnonzero(pending)
        if still.size:  # no descent found: treat as converged at current value
            active[j[still]] = False
    rem = np.flatnonzero(active)
    for r in rem:  # golden-section per-coordinate fallback, rarely reached
        val[r], y[r], ok = _coordinate_descent(P, delta[r], y[r])
        if not ok:
            val[r] = NEG_INF
            feas[r] = False
    return val, y, feas


def _coordinate_descent(P, dv, y0, sweeps: int = 60):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def f(yv):
        logits = yv @ P.T
        mx = logits.max()
        return mx + math.log(np.exp(logits - mx).sum()) - float(dv @ yv)

    y = y0.copy()
    fy = f(y)
    for _ in range(sweeps):
        f0 = fy
        for i in range(len(y)):
            a, b = y[i] - 8.0, y[i] + 8.0
            c, dpt = b - invphi * (b - a), a + invphi * (b - a)
            for _g in range(60):
                yc = y.copy()
                yc[i] = c
                fc = f(yc)
                yd = y.copy()
                yd[i] = dpt
                fd = f(yd)
                if fc < fd:
                    b, dpt = dpt, c
                    c = b - invphi * (b - a)
                else:
                    a, c = c, dpt
                    dpt = a + invphi * (b - a)
            y[i] = 0.5 * (a + b)
            fy = f(y)
        if fy < -1e-9:
            return NEG_INF, y, False
        if abs(f0 - fy) < 1e-12:
            break
    return fy, y, True


def check_node_exponent(edge_fractions, flag_fraction: float | None = None) -> float:
    """Exponent (nats per replica) of parity-satisfying socket assignments
    for one check node type whose edges carry the given weight fractions.

    The optional flag fraction appends one more formal edge of a degree-1
    flag variable.  Returns -inf when the fractions are parity-infeasible.
    Fractions equal to 0 drop their edge; fractions equal to 1 drop it and
    flip the parity of the remaining problem.
    """
    fr = list(edge_fractions)
    if flag_fraction is not None:
        fr.append(float(flag_fraction))
    if not fr:
        raise ValueError("at least one edge fraction is required")
    if any(not 0.0 <= f <= 1.0 for f in fr):
        raise ValueError("edge fractions must lie in [0, 1]")
    parity = 0
    kept = []
    for f in fr:
        if f == 0.0:
            continue
        if f == 1.0:
            parity ^= 1
            continue
        kept.append(f)
    if not kept:
        return 0.0 if parity == 0 else NEG_INF
    if len(kept) == 1:
        return NEG_INF
    P = _pattern_matrix(len(kept), parity)
    val, _, feas = _batched_saddle(P, np.array([kept]))
    return float(val[0]) if feas[0] else NEG_INF


# --- outer problem: spectral shape over per-type weight fractions --------------


class _UnionFind:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, i):
        while self.p[i] != i:
            self.p[i] = self.p[self.p[i]]
            i = self.p[i]
        return i

    def union(self, i, j):
        self.p[self.find(i)] = self.find(j)


@dataclass
class _CheckGroup:
    degree: int  # args per check, flag included
    arg_cols: np.ndarray  # (n_checks, degree) indices into the z vector
    patterns: np.ndarray


class _ShapeProblem:
    """Optimization layout for one base matrix.

    Variable types forced equal by degree-2 checks without free flag weight
    are merged into classes (otherwise the feasible set has empty interior
    and projected ascent cannot move); variables pinned to zero by degree-1
    checks are fixed.  With free flags (two-part mode at beta > 0) every
    check has an extra argument and no merging applies; two-part mode at
    beta = 0 keeps the flags structurally but pins them, so the degree-2
    equalities hold again and merging is required (``merge=True``).
    """

    def __init__(self, base: BaseMatrix, flagged: bool, merge: bool | None = None):
        prof = degree_profile(base)
        n_v, n_c = base.n_v, base.n_c
        q = prof.variable_degrees
        self.flagged = flagged
        if merge is None:
            merge = not flagged

        rows = [np.repeat(np.arange(n_v), base.entries[c]) for c in range(n_c)]
        uf = _UnionFind(n_v)
        pinned = set()
        if merge:
            for vs in rows:
                if len(vs) == 1:
                    pinned.add(uf.find(int(vs[0])))
                elif len(vs) == 2 and vs[0] != vs[1]:
                    uf.union(int(vs[0]), int(vs[1]))
        roots = sorted({uf.find(v) for v in range(n_v)})
        self.class_of = {r: k for k, r in enumerate(roots)}
        cls = np.array([self.class_of[uf.find(v)] for v in range(n_v)])
        self.n_classes = len(roots)
        self.pinned = np.zeros(self.n_classes, dtype=bool)
        for r in pinned:
            self.pinned[self.class_of[uf.find(r)]] = True

        transmitted = np.array([v not in base.punctured for v in range(n_v)])
        self.n_t = int(transmitted.sum())
        self.w_alpha = np.zeros(self.n_classes)
        np.add.at(self.w_alpha, cls[transmitted], 1.0)
        self.entropy_coeff = np.zeros(self.n_classes)
        np.add.at(self.entropy_coeff, cls, (q - 1).astype(np.float64))

        flag_rows = [c for c in range(n_c) if len(rows[c]) > 0] if flagged else []
        self.n_flags = len(flag_rows)
        self.n_z = self.n_classes + self.n_flags
        flag_col = {c: self.n_classes + i for i, c in enumerate(flag_rows)}
        self.flag_degree = np.array(
            [len(rows[c]) for c in flag_rows], dtype=np.float64
        )

        by_degree: dict[int, list[np.ndarray]] = {}
        for c in range(n_c):
            args = cls[rows[c]].tolist()
            if flagged and c in flag_col:
                args.append(flag_col[c])
            if not args:
                continue
            by_degree.setdefault(len(args), []).append(np.array(args))
        self.groups = [
            _CheckGroup(
                degree=d,
                arg_cols=np.stack(lst),
                patterns=_pattern_matrix(d, 0),
            )
            for d, lst in sorted(by_degree.items())
        ]

    # -- feasible anchor: uniform fractions, flag weight spread by check degree
    def anchor(self, alpha: float, beta: float) -> np.ndarray:
        z = np.full(self.n_z, alpha)
        z[: self.n_classes][self.pinned] = 0.0
        if self.n_flags:
            share = self.flag_degree / self.flag_degree.sum()
            z[self.n_classes :] = np.clip(self.n_t * beta * share, 0.0, 1.0)
        return z

    def project(self, z: np.ndarray, alpha: float, beta: float) -> np.ndarray:
        """Project rows of z onto the box intersected with the two weighted
        sum constraints (transmitted fractions; flag fractions)."""
        z = np.clip(z, 0.0, 1.0)
        z[:, : self.n_classes][:, self.pinned] = 0.0
        free = (self.w_alpha > 0) & ~self.pinned
        _project_capped(z[:, : self.n_classes], free, self.w_alpha, self.n_t * alpha)
        if self.n_flags:
            ones = np.ones(self.n_flags)
            _project_capped(
                z[:, self.n_classes :],
                np.ones(self.n_flags, dtype=bool),
                ones,
                self.n_t * beta,
            )
        return z

    def feasible(self, alpha: float, beta: float) -> bool:
        if not 0.0 <= alpha <= 1.0 or beta < 0.0:
            return False
        if self.n_t * alpha > self.w_alpha[~self.pinned].sum() + 1e-12:
            return False
        if beta > 0 and (not self.n_flags or self.n_t * beta > self.n_flags + 1e-12):
            return False
        return True

    def evaluate(self, z: np.ndarray, ystate: list | None):
        """Objective value per slot plus the inner minimizers (for gradients)."""
        R = z.shape[0]
        zc = np.clip(z, _FRACTION_CLAMP, 1.0 - _FRACTION_CLAMP)
        F = -self.entropy_coeff @ np.asarray(binary_entropy(zc[:, : self.n_classes])).T
        ystars = []
        for gi, grp in enumerate(self.groups):
            ng, d = grp.arg_cols.shape
            args = zc[:, grp.arg_cols.ravel()].reshape(R * ng, d)
            y0 = None if ystate is None else ystate[gi]
            vals, ystar, _ = _batched_saddle(grp.patterns, args, y0)
            F = F + vals.reshape(R, ng).sum(axis=1)
            ystars.append(ystar)
        return F, ystars

    def gradient(self, z: np.ndarray, ystars: list) -> np.ndarray:
        R = z.shape[0]
        zc = np.clip(z, 1e-12, 1.0 - 1e-12)
        grad = np.zeros_like(z)
        grad[:, : self.n_classes] = -self.entropy_coeff * np.log(
            (1.0 - zc[:, : self.n_classes]) / zc[:, : self.n_classes]
        )
        for grp, ystar in zip(self.groups, ystars):
            ng, d = grp.arg_cols.shape
            contrib = -ystar.reshape(R, ng, d)
            flat_cols = np.broadcast_to(grp.arg_cols, (R, ng, d))
            rows = np.broadcast_to(np.arange(R)[:, None, None], (R, ng, d))
            np.add.at(grad, (rows.ravel(), flat_cols.ravel()), contrib.ravel())
        return grad


def _project_capped(z: np.ndarray, free: np.ndarray, w: np.ndarray, s: float) -> None:
    """In-place projection of each row's ``free`` coordinates onto
    { x in [0,1] : sum w x = s } by bisection on the shift multiplier."""
    wf = w[free]
    if wf.size == 0:
        return
    zf = z[:, free]
    lo = np.full(z.shape[0], -(2.0 + s) / wf.min() - 1.0)
    hi = np.full(z.shape[0], (2.0 + s) / wf.min() + 1.0)
    for _ in range(70):
        mid = 0.5 * (lo + hi)
        tot = np.clip(zf + mid[:, None] * wf, 0.0, 1.0) @ wf
        high = tot > s
        hi[high] = mid[high]
        lo[~high] = mid[~high]
    z[:, free] = np.clip(zf + (0.5 * (lo + hi))[:, None] * wf, 0.0, 1.0)


class _ShapeEvaluator:
    """Warm-startable evaluator of r(alpha, beta) for one base matrix.

    Restart slots: one deterministic anchor, one warm slot carrying the
    previous optimum, and ``restarts`` seeded random draws, all advanced in
    lockstep by projected gradient ascent with per-slot step halving.
    """

    def __init__(
        self,
        base: BaseMatrix,
        two_part: bool,
        restarts: int = 20,
        seed: int = 0,
        max_iter: int = 1500,
    ):
        self.base = base
        self.two_part = two_part
        self.restarts = restarts
        self.max_iter = max_iter
        self.rng = np.random.default_rng(seed)
        self.problem_flagged = _ShapeProblem(base, flagged=True) if two_part else None
        self.problem_pinned = (
            _ShapeProblem(base, flagged=True, merge=True) if two_part else None
        )
        self.problem_plain = _ShapeProblem(base, flagged=False)
        self.warm_z: np.ndarray | None = None

    def _problem(self, beta: float) -> _ShapeProblem:
        # two-part mode always carries the flags; at beta = 0 the projection
        # pins them (making degree-2 equalities structural again) and the
        # flagged solve must agree with the plain one
        if self.two_part:
            return self.problem_flagged if beta > 0.0 else self.problem_pinned
        return self.problem_plain

    def r(self, alpha: float, beta: float) -> float:
        prob = self._problem(beta)
        if not prob.feasible(alpha, beta):
            return NEG_INF
        if alpha == 0.0 and beta == 0.0:
            return 0.0
        R = self.restarts + 2
        z = np.empty((R, prob.n_z))
        z[0] = prob.anchor(alpha, beta)
        if self.warm_z is not None and self.warm_z.shape == (prob.n_z,):
            z[1] = self.warm_z
        else:
            z[1] = z[0]
        z[2:] = self.rng.uniform(0.0, 1.0, size=(self.restarts, prob.n_z))
        z = prob.project(z, alpha, beta)

        F, ystars = prob.evaluate(z, None)
        # blend infeasible random starts toward the anchor
        for _ in range(40):
            bad = np.flatnonzero(np.isneginf(F))
            if bad.size == 0:
                break
            z[bad] = prob.project(0.5 * (z[bad] + z[0]), alpha, beta)
            Fb, yb = prob.evaluate(z[bad], None)
            F[bad] = Fb
            for gi in range(len(ystars)):
                take = yb[gi].reshape(bad.size, -1, yb[gi].shape[-1])
                full = ystars[gi].reshape(R, -1, yb[gi].shape[-1])
                full[bad] = take
                ystars[gi] = full.reshape(-1, yb[gi].shape[-1])

        eta = np.full(R, 0.25)
        frozen = np.isneginf(F)
        for _ in range(self.max_iter):
            act = np.flatnonzero(~frozen)
            if act.size == 0:
                break
            grad = prob.gradient(z[act], [self._slice(y, act, R) for y in ystars])
            pending = act.copy()
            while pending.size:
                zt = prob.project(z[pending] + eta[pending, None] * grad[np.searchsorted(act, pending)], alpha, beta)
                Ft, Yt = prob.evaluate(zt, [self._slice(y, pending, R) for y in ystars])
                gain = Ft - F[pending]
                ok = gain > 0.0
                acc = pending[ok]
                if acc.size:
                    z[acc] = zt[ok]
                    F[acc] = Ft[ok]
                    for gi in range(len(ystars)):
                        self._store(ystars[gi], Yt[gi], pending, ok, R)
                    eta[acc] *= 1.3
                    frozen[acc] |= gain[ok] < _PGA_TOL
                rej = pending[~ok]
                eta[rej] *= 0.5
                dead = eta[rej] < 1e-14
                frozen[rej[dead]] = True
                pending = rej[~dead]
        best = int(np.argmax(F))
        if np.isneginf(F[best]):
            return NEG_INF
        self.warm_z = z[best].copy()
        return float(F[best] / prob.n_t)

    @staticmethod
    def _slice(ystate: np.ndarray, slots: np.ndarray, R: int) -> np.ndarray:
        d = ystate.shape[-1]
        return ystate.reshape(R, -1, d)[slots].reshape(-1, d)

    @staticmethod
    def _store(ystate, ynew, pending, ok, R):
        d = ystate.shape[-1]
        full = ystate.reshape(R, -1, d)
        part = ynew.reshape(len(pending), -1, d)
        full[pending[ok]] = part[ok]


def spectral_shape(
    base: BaseMatrix,
    alpha: float,
    beta: float,
    *,
    two_part: bool | None = None,
    restarts: int = 20,
    seed: int = 0,
) -> float:
    """r(alpha, beta): normalized log ensemble-average enumerator per
    transmitted symbol; -inf when the constraint set is infeasible.

    beta = 0 with two_part left unset evaluates the plain codeword-weight
    spectral shape; two_part=True routes through the flagged graph even at
    beta = 0 (the flag fractions are then pinned to zero).
    """
    if two_part is None:
        two_part = beta > 0.0
    ev = _ShapeEvaluator(base, two_part=two_part, restarts=restarts, seed=seed)
    return ev.r(alpha, beta)


# --- growth rates and zero contours --------------------------------------------


@dataclass(frozen=True)
class GrowthRateResult:
    delta: float | None
    exists: bool
    samples: np.ndarray  # (alpha, r) pairs explored, coarse grid order
    offending: tuple | None = None


def _first_zero_crossing(
    rfun,
    alpha_max: float,
    n_grid: int,
    bisect_tol: float,
    extend_to: float,
) -> GrowthRateResult:
    step = alpha_max / n_grid
    samples = []
    prev_a, prev_r = None, None
    a = step
    while a <= extend_to + 1e-12:
        r = rfun(a)
        samples.append((a, r))
        if r >= 0.0:
            if prev_a is None:
                return GrowthRateResult(
                    delta=None,
                    exists=False,
                    samples=np.array(samples),
                    offending=(a, r),
                )
            lo, hi = prev_a, a
            while hi - lo > bisect_tol:
                mid = 0.5 * (lo + hi)
                rm = rfun(mid)
                samples.append((mid, rm))
                if rm < 0.0:
                    lo = mid
                else:
                    hi = mid
            return GrowthRateResult(
                delta=0.5 * (lo + hi), exists=True, samples=np.array(samples)
            )
        prev_a, prev_r = a, r
        a += step
    return GrowthRateResult(delta=None, exists=False, samples=np.array(samples))


def min_distance_growth(
    base: BaseMatrix,
    *,
    alpha_max: float = 0.2,
    n_grid: int = 200,
    bisect_tol: float = 1e-6,
    extend_to: float = 0.5,
    restarts: int = 20,
    seed: int = 0,
) -> GrowthRateResult:
    """First zero crossing of alpha -> r(alpha, 0), with negativity verified
    on every coarse-grid point left of the crossing.  The 200-point grid
    spans (0, 0.2] and extends at the same spacing up to ``extend_to`` if no
    crossing is found."""
    ev = _ShapeEvaluator(base, two_part=False, restarts=restarts, seed=seed)
    return _first_zero_crossing(
        lambda a: ev.r(a, 0.0), alpha_max, n_grid, bisect_tol, extend_to
    )


def trapping_growth(
    base: BaseMatrix,
    ratio: float,
    *,
    alpha_max: float = 0.2,
    n_grid: int = 200,
    bisect_tol: float = 1e-6,
    extend_to: float = 0.5,
    restarts: int = 20,
    seed: int = 0,
) -> GrowthRateResult:
    """First zero crossing of alpha -> r(alpha, ratio*alpha) through the
    flagged graph: the growth rate of the smallest trapping class with
    odd-check-to-size ratio ``ratio``."""
    if ratio < 0:
        raise ValueError("ratio must be non-negative")
    ev = _ShapeEvaluator(base, two_part=True, restarts=restarts, seed=seed)
    return _first_zero_crossing(
        lambda a: ev.r(a, ratio * a), alpha_max, n_grid, bisect_tol, extend_to
    )


@dataclass(frozen=True)
class ZeroContour:
    ratios: np.ndarray  # the swept b/a ratios
    xs: np.ndarray  # growth rate at each ratio (nan where absent)
    ys: np.ndarray  # ratio * growth rate
    exists: np.ndarray
    label: int | None = None


def zero_contour(base: BaseMatrix, ratio_grid, *, label: int | None = None, **kw) -> ZeroContour:
    """Trace (growth rate, ratio * growth rate) over an ascending ratio grid
    starting at 0; ratios whose growth rate does not exist are recorded with
    exists=False."""
    grid = np.asarray(list(ratio_grid), dtype=np.float64)
    if len(grid) == 0 or grid[0] != 0.0 or (np.diff(grid) <= 0).any():
        raise ValueError("ratio grid must be ascending and start at 0")
    xs, ys, ok = [], [], []
    for ratio in grid:
        res = trapping_growth(base, float(ratio), **kw)
        ok.append(res.exists)
        xs.append(res.delta if res.exists else math.nan)
        ys.append(ratio * res.delta if res.exists else math.nan)
    return ZeroContour(
        ratios=grid,
        xs=np.array(xs),
        ys=np.array(ys),
        exists=np.array(ok, dtype=bool),
        label=label,
    )


SPECTRA_CSV_HEADER = "L,delta,alpha,beta,r"


def contour_csv_rows(contour: ZeroContour) -> list:
    """Rows for the 'L,delta,alpha,beta,r' schema, 12 significant digits;
    ratios without a growth rate keep their coordinate fields empty."""
    rows = []
    label = "" if contour.label is None else str(contour.label)
    for k, ratio in enumerate(contour.ratios):
        if contour.exists[k]:
            rows.append(
                f"{label},{ratio:.12g},{contour.xs[k]:.12g},{contour.ys[k]:.12g},0"
            )
        else:
            rows.append(f"{label},{ratio:.12g},,,")
    return rows


def shape_csv_row(label, ratio: float, alpha: float, r: float) -> str:
    lab = "" if label is None else str(label)
    return f"{lab},{ratio:.12g},{alpha:.12g},{ratio * alpha:.12g},{r:.12g}"


# --- exact finite-N ensemble-average enumerator ---------------------------------


@lru_cache(maxsize=None)
def _poly_coef(w: int, m: int, k: int) -> int:
    """[x^w] (1+x)^m (1-x)^k, exact integer."""
    lo = max(0, w - m)
    hi = min(k, w)
    return sum(
        (-1) ** j * math.comb(k, j) * math.comb(m, w - j) for j in range(lo, hi + 1)
    )


@lru_cache(maxsize=None)
def _check_assignments(ws: tuple, N: int) -> int:
    """Exact count of parity-satisfying socket assignments for N replicas of
    a check whose edges carry total weights ``ws``."""
    total = 0
    for k in range(N + 1):
        prod = math.comb(N, k)
        for w in ws:
            c = _poly_coef(w, N - k, k)
            if c == 0:
                prod = 0
                break
            prod *= c
        total += prod
    if total < 0 or total % (1 << N):
        raise AssertionError("coefficient extraction lost exactness")
    return total >> N


def _compositions(total: int, parts: int, cap: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    lo = max(0, total - (parts - 1) * cap)
    hi = min(cap, total)
    for first in range(lo, hi + 1):
        for rest in _compositions(total - first, parts - 1, cap):
            yield (first,) + rest


def finite_N_enumerator(
    base: BaseMatrix, N: int, a: int, b: int = 0, *, max_terms: int = 2_000_000
) -> float:
    """ln of the exact ensemble-average count of configurations with total
    transmitted weight ``a`` and total flag weight ``b`` at lifting factor N
    (-inf when the count is zero).

    Exact big-integer arithmetic throughout; the log is taken only at the
    end, so N <= 64 stays overflow-free.  This is the correctness oracle for
    ``spectral_shape`` via ln(A)/(n_t*N).
    """
    if not 1 <= N <= 64:
        raise ValueError("oracle scale is 1 <= N <= 64")
    prof = degree_profile(base)
    q = prof.variable_degrees
    tx = [v for v in range(base.n_v) if v not in base.punctured]
    pu = [v for v in range(base.n_v) if v in base.punctured]
    if not 0 <= a <= len(tx) * N:
        raise ValueError("transmitted weight out of range")
    rows = [np.repeat(np.arange(base.n_v), base.entries[c]) for c in range(base.n_c)]
    flagged = [c for c in range(base.n_c) if len(rows[c]) > 0] if b > 0 else []
    if b < 0 or b > len(flagged) * N and b > 0:
        raise ValueError("flag weight out of range")

    est = math.comb(a + len(tx) - 1, len(tx) - 1) if tx else 1
    est *= (N + 1) ** len(pu)
    if b > 0:
        est *= math.comb(b + len(flagged) - 1, len(flagged) - 1)
    if est > max_terms:
        raise ValueError("weight enumeration larger than the oracle budget")

    def _punctured_vectors():
        for s in range(0, len(pu) * N + 1):
            yield from _compositions(s, len(pu), N)

    flag_pos = {c: i for i, c in enumerate(flagged)}
    lnC = [math.log(math.comb(N, w)) for w in range(N + 1)]
    terms = []
    for d_tx in _compositions(a, len(tx), N):
        for dp in _punctured_vectors():
            d = np.zeros(base.n_v, dtype=np.int64)
            d[tx] = d_tx
            if pu:
                d[pu] = dp
            base_ln = -float(((q - 1) * np.array([lnC[w] for w in d])).sum())
            for f in _compositions(b, len(flagged), N) if b > 0 else [()]:
                ln_term = base_ln
                zero = False
                for c in range(base.n_c):
                    ws = [int(d[v]) for v in rows[c]]
                    if b > 0 and c in flag_pos:
                        ws.append(int(f[flag_pos[c]]))
                    if not ws:
                        continue
                    cnt = _check_assignments(tuple(sorted(ws)), N)
                    if cnt == 0:
                        zero = True
                        break
                    ln_term += math.log(cnt)
                if not zero:
                    terms.append(ln_term)
    if not terms:
        return NEG_INF
    mx = max(terms)
    return mx + math.log(sum(math.exp(t - mx) for t in terms))
