"""Vectorized grouped reductions over edge arrays.

Edges of a (proto)graph are stored as flat arrays sorted by a grouping key
(variable node or check node).  ``starts`` holds the first edge index of each
group; empty groups are legal (a vacuous check row has no edges).
"""

from __future__ import annotations

import numpy as np


def group_starts(sorted_keys: np.ndarray, n_groups: int) -> np.ndarray:
    return np.searchsorted(sorted_keys, np.arange(n_groups))


def segment_sum(values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    if len(values) == 0:
        return np.zeros(len(starts))
    out = np.add.reduceat(values, starts)
    empty = starts == np.append(starts[1:], len(values))
    out[empty] = 0.0
    return out


def segment_prod(values: np.ndarray, starts: np.ndarray) -> np.ndarray:
    if len(values) == 0:
        return np.ones(len(starts))
    out = np.multiply.reduceat(values, starts)
    empty = starts == np.append(starts[1:], len(values))
    out[empty] = 1.0
    return out


def exclusive_prod(values: np.ndarray, starts: np.ndarray, group_of: np.ndarray) -> np.ndarray:
    """Per-edge product of the other values in the same group.

    Exact at zeros: a group's zero count decides whether the exclusive
    product is total/self, the product of the nonzeros, or zero.
    """
    nonzero = values != 0.0
    prod_nz = segment_prod(np.where(nonzero, values, 1.0), starts)
    zcount = segment_sum((~nonzero).astype(np.float64), starts)
    pz = prod_nz[group_of]
    zc = zcount[group_of]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(nonzero, pz / np.where(nonzero, values, 1.0), 0.0)
    out[(zc == 1.0) & ~nonzero] = pz[(zc == 1.0) & ~nonzero]
    out[zc >= 2.0] = 0.0
    out[(zc == 1.0) & nonzero] = 0.0
    return out


def exclusive_sum(values: np.ndarray, starts: np.ndarray, group_of: np.ndarray) -> np.ndarray:
    """Per-edge sum of the other values in the same group; +inf entries
    saturate the sums they participate in without producing NaN."""
    finite = np.isfinite(values)
    sum_fin = segment_sum(np.where(finite, values, 0.0), starts)
    infcount = segment_sum((~finite).astype(np.float64), starts)
    sf = sum_fin[group_of]
    ic = infcount[group_of]
    out = sf - np.where(finite, values, 0.0)
    out[ic - (~finite) >= 1.0] = np.inf  # an *other* edge is infinite
    return out
