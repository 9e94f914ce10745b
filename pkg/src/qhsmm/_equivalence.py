"""Grouping of causal pairs whose futures coincide within a tolerance.

Comparing every pair against every other is quadratic in the number of
pairs times the window length, which is far too slow on fine grids. Each
pair therefore gets a scalar signature (the projection of its future
table onto a fixed pseudo-random vector). Tables that are close in total
variation have close signatures, so only representatives whose signature
falls inside a window are compared exactly.
"""

from __future__ import annotations

import warnings
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable

import numpy as np

SIGNATURE_SEED = 20180807


def signature_basis(length: int, n_channels: int) -> np.ndarray:
    return np.random.default_rng(SIGNATURE_SEED).random((length, n_channels))


def table_signature(table: np.ndarray, basis: np.ndarray) -> float:
    L = min(len(table), len(basis))
    return float((table[:L] * basis[:L]).sum())


def pair_signatures(d) -> list[np.ndarray]:
    """Signature of every pair of a DiscretizedProcess, one array per mode."""
    basis = signature_basis(max(d.n_bins), len(d.channels))
    out = []
    for j, L in enumerate(d.n_bins):
        sq = d.blocks[j] ** 2
        s = np.zeros(L)
        for c in range(sq.shape[1]):
            if sq[:, c].any():
                s += np.correlate(sq[:, c], basis[:L, c], mode="valid")[:L]
        out.append(s / d.norm2[j])
    return out


def tv_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Total variation between two nonnegative tables, zero-padding the shorter one."""
    L = min(len(a), len(b))
    return 0.5 * float(np.abs(a[:L] - b[:L]).sum() + a[L:].sum() + b[L:].sum())


def inner(a: np.ndarray, b: np.ndarray) -> float:
    L = min(len(a), len(b))
    return float((a[:L] * b[:L]).sum())


@dataclass
class Clustering:
    labels: dict[Hashable, int]
    members: list[list[Hashable]]
    unverified: list[int]


def cluster(
    items: Iterable[tuple[Hashable, float, Callable[[], np.ndarray]]],
    distance: Callable[[np.ndarray, np.ndarray], float],
    tol: float,
    window: float,
) -> Clustering:
    """Union-find over items whose distance to a cluster representative is <= tol.

    ``items`` yields ``(key, signature, vector_factory)`` in a deterministic
    order; the first item of each cluster is its representative. When an
    item is near several representatives their clusters are united under
    the earliest one. United clusters are re-checked afterwards: any member
    farther than ``2 tol`` from the representative is reported (and warned
    about) in ``unverified``.
    """
    parent: list[int] = []
    rep_vec: list[np.ndarray] = []
    sigs: list[float] = []  # sorted signatures of live representatives
    ids: list[int] = []  # cluster ids parallel to ``sigs``
    rep_sig: list[float] = []
    keys: list[Hashable] = []
    raw: list[int] = []
    factories: list[Callable[[], np.ndarray]] = []
    united: set[int] = set()

    def find(c: int) -> int:
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for key, sig, make in items:
        lo, hi = bisect_left(sigs, sig - window), bisect_right(sigs, sig + window)
        v = make()
        near = sorted(c for c in ids[lo:hi] if distance(v, rep_vec[c]) <= tol)
        if not near:
            cid = len(parent)
            parent.append(cid)
            rep_vec.append(v)
            rep_sig.append(sig)
            pos = bisect_right(sigs, sig)
            sigs.insert(pos, sig)
            ids.insert(pos, cid)
        else:
            cid = near[0]
            for other in near[1:]:
                parent[other] = cid
                united.add(cid)
                pos = bisect_left(sigs, rep_sig[other])
                while ids[pos] != other:
                    pos += 1
                del sigs[pos], ids[pos]
        keys.append(key)
        raw.append(cid)
        factories.append(make)

    roots = [find(c) for c in raw]
    relabel: dict[int, int] = {}
    labels: dict[Hashable, int] = {}
    members: list[list[Hashable]] = []
    member_idx: list[list[int]] = []
    for i, (key, root) in enumerate(zip(keys, roots)):
        s = relabel.setdefault(root, len(relabel))
        if s == len(members):
            members.append([])
            member_idx.append([])
        labels[key] = s
        members[s].append(key)
        member_idx[s].append(i)

    unverified = []
    for root in sorted(united):
        s = relabel[root]
        ref = rep_vec[root]
        if any(distance(factories[i](), ref) > 2 * tol for i in member_idx[s]):
            unverified.append(s)
    if unverified:
        warnings.warn(
            f"{len(unverified)} merged state(s) contain members farther than 2*tol from their representative",
            RuntimeWarning,
            stacklevel=3,
        )
    return Clustering(labels=labels, members=members, unverified=unverified)
