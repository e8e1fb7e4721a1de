"""Finite lifted codes: random permutation lifting, alist serialization,
BPSK/AWGN and erasure transmission, sum-product decoding, BER/FER counting.

All randomness flows through numpy Generators seeded from explicit integers;
Monte Carlo frames derive their stream from (master_seed, frame_index) so
aggregate statistics do not depend on scheduling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import _segments as seg
from .protograph import BaseMatrix, design_rate
from .thresholds import Awgn, Bec, ebno_db_from_sigma

log = logging.getLogger(__name__)

LLR_CLAMP = 50.0
ERASURE_KNOWN_LLR = 50.0


class LiftError(RuntimeError):
    """Permutation sampling failed to produce disjoint supports."""


class AlistError(ValueError):
    """Malformed alist text."""


@dataclass(frozen=True)
class LiftedCode:
    H: sp.csr_matrix  # binary, (n_c*N) x (n_v*N)
    N: int
    puncture_mask: np.ndarray  # bool per column, True = not transmitted
    origin: BaseMatrix
    seed: int

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def n_transmitted(self) -> int:
        return int((~self.puncture_mask).sum())


def lift(base: BaseMatrix, N: int, seed: int) -> LiftedCode:
    """Replace each base entry e by a superposition of e random NxN
    permutation matrices with disjoint supports (entry 0 -> zero block).
    Colliding permutations are resampled, up to 1000 retries per entry."""
    max_entry = int(base.entries.max())
    if N < max_entry:
        raise ValueError(f"N = {N} is smaller than the largest entry {max_entry}")
    rng = np.random.default_rng(seed)
    rows_out, cols_out = [], []
    for i in range(base.n_c):
        for j in range(base.n_v):
            e = int(base.entries[i, j])
            if e == 0:
                continue
            perms: list[np.ndarray] = []
            for _ in range(e):
                for attempt in range(1000):
                    p = rng.permutation(N)
                    if all((p != q).all() for q in perms):
                        perms.append(p)
                        break
                else:
                    raise LiftError(
                        f"no disjoint permutation found for entry ({i},{j})"
                    )
            for p in perms:
                rows_out.append(i * N + np.arange(N))
                cols_out.append(j * N + p)
    r = np.concatenate(rows_out)
    c = np.concatenate(cols_out)
    H = sp.csr_matrix(
        (np.ones(len(r), dtype=np.uint8), (r, c)),
        shape=(base.n_c * N, base.n_v * N),
    )
    mask = np.zeros(base.n_v * N, dtype=bool)
    for j in base.punctured:
        mask[j * N : (j + 1) * N] = True
    return LiftedCode(H=H, N=N, puncture_mask=mask, origin=base, seed=seed)


# --- alist ----------------------------------------------------------------------


def _as_csr(matrix) -> sp.csr_matrix:
    if isinstance(matrix, LiftedCode):
        matrix = matrix.H
    return sp.csr_matrix(matrix, dtype=np.uint8)


def write_alist(matrix) -> str:
    """Standard alist text: 'n_cols n_rows', max degrees, per-column and
    per-row degree lists, then 1-based index lines padded with 0."""
    H = _as_csr(matrix)
    n_rows, n_cols = H.shape
    csc = H.tocsc()
    col_deg = np.diff(csc.indptr)
    row_deg = np.diff(H.indptr)
    max_col = int(col_deg.max(initial=0))
    max_row = int(row_deg.max(initial=0))
    lines = [f"{n_cols} {n_rows}", f"{max_col} {max_row}"]
    lines.append(" ".join(str(int(d)) for d in col_deg))
    lines.append(" ".join(str(int(d)) for d in row_deg))
    for j in range(n_cols):
        idx = np.sort(csc.indices[csc.indptr[j] : csc.indptr[j + 1]]) + 1
        padded = list(idx) + [0] * (max_col - len(idx))
        lines.append(" ".join(str(int(v)) for v in padded))
    for i in range(n_rows):
        idx = np.sort(H.indices[H.indptr[i] : H.indptr[i + 1]]) + 1
        padded = list(idx) + [0] * (max_row - len(idx))
        lines.append(" ".join(str(int(v)) for v in padded))
    return "\n".join(lines) + "\n"


def _parse_int_line(lines, k, expect, what):
    if k >= len(lines):
        raise AlistError(f"truncated alist: missing {what}")
    parts = lines[k].split()
    try:
        vals = [int(x) for x in parts]
    except ValueError as e:
        raise AlistError(f"non-integer value in {what}") from e
    if expect is not None and len(vals) != expect:
        raise AlistError(f"{what}: expected {expect} values, found {len(vals)}")
    return vals


def read_alist(text: str) -> sp.csr_matrix:
    """Parse alist text back into a sparse binary matrix.  Index lines may be
    zero-padded to the max degree or given unpadded; the column and row
    sections must describe the same matrix."""
    lines = [ln for ln in text.splitlines()]
    n_cols, n_rows = _parse_int_line(lines, 0, 2, "size header")
    if n_cols <= 0 or n_rows <= 0:
        raise AlistError("malformed counts in size header")
    max_col, max_row = _parse_int_line(lines, 1, 2, "max-degree header")
    col_deg = _parse_int_line(lines, 2, n_cols, "column degree list")
    row_deg = _parse_int_line(lines, 3, n_rows, "row degree list")
    if any(d < 0 or d > max_col for d in col_deg) or any(
        d < 0 or d > max_row for d in row_deg
    ):
        raise AlistError("degree mismatch: degree exceeds declared maximum")
    if sum(col_deg) != sum(row_deg):
        raise AlistError("degree mismatch: column and row degree sums differ")
    pos = 4
    col_entries = []
    for j in range(n_cols):
        vals = _parse_int_line(lines, pos, None, f"column {j} indices")
        pos += 1
        if len(vals) not in (col_deg[j], max_col):
            raise AlistError(f"degree mismatch on column {j}")
        nz = [v for v in vals if v != 0]
        if len(nz) != col_deg[j]:
            raise AlistError(f"degree mismatch on column {j}")
        if any(v < 1 or v > n_rows for v in nz):
            raise AlistError(f"row index out of range in column {j}")
        col_entries.append(nz)
    row_entries = []
    for i in range(n_rows):
        vals = _parse_int_line(lines, pos, None, f"row {i} indices")
        pos += 1
        if len(vals) not in (row_deg[i], max_row):
            raise AlistError(f"degree mismatch on row {i}")
        nz = [v for v in vals if v != 0]
        if len(nz) != row_deg[i]:
            raise AlistError(f"degree mismatch on row {i}")
        if any(v < 1 or v > n_cols for v in nz):
            raise AlistError(f"column index out of range in row {i}")
        row_entries.append(nz)
    pairs_col = {(r - 1, j) for j, rows in enumerate(col_entries) for r in rows}
    pairs_row = {(i, c - 1) for i, cols in enumerate(row_entries) for c in cols}
    if pairs_col != pairs_row:
        raise AlistError("degree mismatch: column and row sections disagree")
    if pairs_col:
        r, c = zip(*sorted(pairs_col))
    else:
        r, c = (), ()
    return sp.csr_matrix(
        (np.ones(len(r), dtype=np.uint8), (list(r), list(c))),
        shape=(n_rows, n_cols),
    )


# --- channel --------------------------------------------------------------------


def awgn_llrs(
    codeword_bits,
    sigma: float,
    puncture_mask=None,
    seed: int | None = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """BPSK (bit b -> 1-2b) over AWGN: LLR = 2y/sigma^2 with
    y = symbol + N(0, sigma^2).  Punctured positions emit exactly 0."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    bits = np.asarray(codeword_bits, dtype=np.int8)
    if rng is None:
        rng = np.random.default_rng(seed)
    y = (1.0 - 2.0 * bits) + sigma * rng.standard_normal(len(bits))
    llr = 2.0 * y / (sigma * sigma)
    if puncture_mask is not None:
        llr[np.asarray(puncture_mask, dtype=bool)] = 0.0
    return llr


def bec_llrs(
    codeword_bits,
    eps: float,
    puncture_mask=None,
    seed: int | None = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Erasure channel through the LLR interface: erased -> 0, known ->
    +/-ERASURE_KNOWN_LLR; punctured positions emit 0."""
    bits = np.asarray(codeword_bits, dtype=np.int8)
    if rng is None:
        rng = np.random.default_rng(seed)
    erased = rng.random(len(bits)) < eps
    llr = np.where(erased, 0.0, (1.0 - 2.0 * bits) * ERASURE_KNOWN_LLR)
    if puncture_mask is not None:
        llr[np.asarray(puncture_mask, dtype=bool)] = 0.0
    return llr


# --- sum-product decoder ----------------------------------------------------------


class BpDecoder:
    """Flooding-schedule log-domain sum-product on a fixed sparse matrix.

    Check updates use the tanh product rule with message magnitudes clamped
    to LLR_CLAMP; the hard decision is syndrome-checked before the first
    iteration and after every iteration for early exit."""

    def __init__(self, H):
        H = _as_csr(H)
        self.H = H
        coo = H.tocoo()
        order = np.lexsort((coo.row, coo.col))  # sorted by variable
        self.e_var = coo.col[order]
        self.e_chk = coo.row[order]
        self.n_chk, self.n_var = H.shape
        self.var_starts = seg.group_starts(self.e_var, self.n_var)
        self.by_chk = np.argsort(self.e_chk, kind="stable")
        self.inv_by_chk = np.argsort(self.by_chk, kind="stable")
        self.chk_sorted = self.e_chk[self.by_chk]
        self.chk_starts = seg.group_starts(self.chk_sorted, self.n_chk)
        self.chk_var = self.e_var[self.by_chk]

    def _syndrome_ok(self, hard: np.ndarray) -> bool:
        par = seg.segment_sum(hard[self.chk_var].astype(np.float64), self.chk_starts)
        return not (par.astype(np.int64) % 2).any()

    def decode(self, llrs, max_iter: int = 100):
        llrs = np.asarray(llrs, dtype=np.float64)
        if len(llrs) != self.n_var:
            raise ValueError("LLR vector length does not match the matrix")
        hard = llrs < 0.0
        if self._syndrome_ok(hard):
            return hard, 0, True
        c2v = np.zeros(len(self.e_var))  # variable-sorted order
        for it in range(1, max_iter + 1):
            v2c = llrs[self.e_var] + seg.exclusive_sum(c2v, self.var_starts, self.e_var)
            np.clip(v2c, -LLR_CLAMP, LLR_CLAMP, out=v2c)
            t = np.tanh(0.5 * v2c[self.by_chk])
            prod = seg.exclusive_prod(t, self.chk_starts, self.chk_sorted)
            with np.errstate(divide="ignore"):
                c2v_chk = 2.0 * np.arctanh(prod)
            np.clip(c2v_chk, -LLR_CLAMP, LLR_CLAMP, out=c2v_chk)
            c2v = c2v_chk[self.inv_by_chk]
            posterior = llrs + seg.segment_sum(c2v, self.var_starts)
            hard = posterior < 0.0
            if self._syndrome_ok(hard):
                return hard, it, True
        return hard, max_iter, False


def bp_decode(H, llrs, max_iter: int = 100):
    """One-shot decode; returns (hard_bits, iterations, converged)."""
    return BpDecoder(H).decode(llrs, max_iter)


# --- Monte Carlo -----------------------------------------------------------------


@dataclass(frozen=True)
class SimStats:
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    fer: float
    avg_iterations: float
    channel: object  # the ChannelParam simulated
    ebno_db: float | None  # AWGN operating point (None for BEC)

    def csv_row(self) -> str:
        point = "" if self.ebno_db is None else f"{self.ebno_db:.6g}"
        return (
            f"{point},{self.frames},{self.bit_errors},{self.frame_errors},"
            f"{self.ber:.6g},{self.fer:.6g},{self.avg_iterations:.6g}"
        )


def run_monte_carlo(
    code: LiftedCode,
    channel,
    max_frames: int,
    min_frame_errors: int,
    max_iter: int = 100,
    master_seed: int = 0,
) -> SimStats:
    """All-zero-codeword simulation until ``min_frame_errors`` frame errors
    or ``max_frames`` frames.  Frame k draws its noise from
    default_rng([master_seed, k]), so results are reproducible bit for bit
    and independent of scheduling.  Punctured bits are decoded but excluded
    from error counting."""
    decoder = BpDecoder(code.H)
    tx = ~code.puncture_mask
    n_tx = int(tx.sum())
    zeros = np.zeros(code.n, dtype=np.int8)
    log.info(
        "monte carlo: n=%d transmitted=%d channel=%r master_seed=%d",
        code.n,
        n_tx,
        channel,
        master_seed,
    )
    frames = bit_errors = frame_errors = 0
    iter_total = 0
    ebno = None
    if isinstance(channel, Awgn):
        rate = float(design_rate(code.origin).rate)
        ebno = ebno_db_from_sigma(channel.sigma, rate)
    while frames < max_frames and frame_errors < min_frame_errors:
        rng = np.random.default_rng([master_seed, frames])
        if isinstance(channel, Awgn):
            llr = awgn_llrs(zeros, channel.sigma, code.puncture_mask, rng=rng)
        elif isinstance(channel, Bec):
            llr = bec_llrs(zeros, channel.epsilon, code.puncture_mask, rng=rng)
        else:
            raise TypeError(f"unsupported channel {channel!r}")
        hard, iters, _ = decoder.decode(llr, max_iter=max_iter)
        errs = int((hard & tx).sum())
        bit_errors += errs
        frame_errors += errs > 0
        iter_total += iters
        frames += 1
    return SimStats(
        frames=frames,
        bit_errors=bit_errors,
        frame_errors=frame_errors,
        ber=bit_errors / (frames * n_tx) if frames else 0.0,
        fer=frame_errors / frames if frames else 0.0,
        avg_iterations=iter_total / frames if frames else 0.0,
        channel=channel,
        ebno_db=ebno,
    )
