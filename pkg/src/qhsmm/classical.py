"""Discretized epsilon-machine surrogate: causal states and statistical complexity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._equivalence import cluster, pair_signatures, tv_distance
from .discretize import DiscretizedProcess
from .errors import DomainError

EPS_MERGE_DEFAULT = 1e-9


def entropy_bits(p) -> float:
    """Shannon entropy in bits with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return max(0.0, float(-(p * np.log2(p)).sum()))


@dataclass(frozen=True, eq=False)
class FutureTable:
    """Distribution over (next mode k, symbol x, bin offset n') for one causal pair.

    ``probs[n', c]`` holds the probability of channel ``channels[c] = (x, k)``.
    """

    origin: tuple[int, int]
    probs: np.ndarray
    channels: tuple[tuple[int, int], ...]

    def total(self) -> float:
        return float(self.probs.sum())

    def items(self):
        """Nonzero entries as ``((k, x, n'), p)``, ordered by k, then x, then n'."""
        order = sorted(range(len(self.channels)), key=lambda c: (self.channels[c][1], self.channels[c][0]))
        for c in order:
            x, k = self.channels[c]
            col = self.probs[:, c]
            for n_fwd in np.flatnonzero(col):
                yield (k, x, int(n_fwd)), float(col[n_fwd])

    def as_dict(self) -> dict[tuple[int, int, int], float]:
        return dict(self.items())


def future_table(d: DiscretizedProcess, j: int, n: int) -> FutureTable:
    return FutureTable(origin=(j, n), probs=d.table(j, n), channels=d.channels)


@dataclass(frozen=True, eq=False)
class CausalPartition:
    assignment: dict[tuple[int, int], int]
    probs: np.ndarray
    members: list[list[tuple[int, int]]]
    representatives: list[FutureTable]
    eps_merge: float
    unverified: list[int]

    @property
    def n_states(self) -> int:
        return len(self.probs)

    def summary(self) -> dict:
        return {
            "n_states": self.n_states,
            "probs": [float(p) for p in self.probs],
            "c_mu_bits": statistical_complexity(self),
        }


def merge_equivalent(d: DiscretizedProcess, eps_merge: float = EPS_MERGE_DEFAULT) -> CausalPartition:
    """Group causal pairs whose future tables lie within ``eps_merge`` in total variation."""
    if not 0 < eps_merge <= 1e-3:
        raise DomainError("eps_merge must lie in (0, 1e-3]")
    sigs = pair_signatures(d)
    items = ((p, float(sigs[p[0]][p[1]]), (lambda p=p: d.table(*p))) for p in d.pairs())
    # |sig(a) - sig(b)| <= 2 TV(a, b) because the signature basis lies in [0, 1)
    c = cluster(items, tv_distance, eps_merge, window=2 * eps_merge + 1e-9)
    probs = np.zeros(len(c.members))
    for (j, n), s in c.labels.items():
        probs[s] += d.weights[j][n]
    reps = [future_table(d, *m[0]) for m in c.members]
    return CausalPartition(
        assignment=c.labels,
        probs=probs,
        members=c.members,
        representatives=reps,
        eps_merge=eps_merge,
        unverified=c.unverified,
    )


def statistical_complexity(p: CausalPartition) -> float:
    return entropy_bits(p.probs)
