"""Coarse-grained quantum memory states and their steady-state ensemble."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from ._equivalence import cluster, inner, pair_signatures, signature_basis, table_signature
from .discretize import DiscretizedProcess, _snapped_edges
from .errors import DomainError, ShapeError, UnreachableStateError

EPS_DUP_DEFAULT = 1e-10


@dataclass(frozen=True, eq=False)
class Qms:
    """Real, nonnegative amplitudes over the basis |n'>|x>|k>.

    ``block[n', c]`` is the amplitude on ``n'`` and channel ``channels[c] = (x, k)``;
    ``amplitudes`` flattens it with n' major, then x, then k.
    """

    origin: tuple
    block: np.ndarray
    channels: tuple[tuple[int, int], ...]
    n_symbols: int
    n_modes: int

    @property
    def window(self) -> int:
        return self.block.shape[0]

    @property
    def dim(self) -> int:
        return self.window * self.n_symbols * self.n_modes

    def flat(self, window: int | None = None) -> np.ndarray:
        w = self.window if window is None else window
        out = np.zeros((w, self.n_symbols, self.n_modes))
        L = min(w, self.window)
        for c, (x, k) in enumerate(self.channels):
            out[:L, x, k] = self.block[:L, c]
        return out.reshape(-1)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.flat()

    def norm(self) -> float:
        return math.sqrt(float((self.block**2).sum()))

    def probabilities(self) -> np.ndarray:
        """Born-rule outcome probabilities, same layout as ``block``."""
        return self.block**2


def build_qms(d: DiscretizedProcess, j: int, n: int) -> Qms:
    return Qms(
        origin=(j, n),
        block=d.amplitudes(j, n),
        channels=d.channels,
        n_symbols=d.model.n_symbols,
        n_modes=d.model.n_modes,
    )


def build_qms_continuous_emission(d: DiscretizedProcess, j: int, x: int, n: int) -> Qms:
    """Memory state of a continuously-emitting process whose current symbol ``x`` is known.

    Amplitudes are ``sqrt(binned phi_kj^x)`` over every ``k`` reached from
    ``j`` on ``x`` (the transition probability itself is not included).
    """
    model = d.model
    model._check_symbol(x)
    edges = [e for e in model.out_edges(j) if e.symbol == x]
    if not edges:
        raise DomainError(f"mode {model.modes[j]!r} never emits {model.alphabet[x]!r}")
    t0 = n * d.dt
    surv = sum(float(e.dwell.sf(t0)) for e in edges)
    if surv <= d.grid.eps_tail:
        raise UnreachableStateError(f"symbol-conditioned survival at ({j}, {x}, {n}) is {surv!r}")
    L = d.horizon(j)
    bin_edges = _snapped_edges(model, d.dt, n + L)[n:]
    block = np.zeros((L, len(d.channels)))
    for e in edges:
        block[:, d.channel_index(x, e.target)] = np.sqrt(np.maximum(e.dwell.mass(bin_edges[:-1], bin_edges[1:]), 0.0))
    block /= math.sqrt(float((block**2).sum()))
    return Qms(origin=(j, x, n), block=block, channels=d.channels, n_symbols=model.n_symbols, n_modes=model.n_modes)


def overlap(a: Qms, b: Qms) -> float:
    """Inner product of two memory states, clipped to [0, 1]."""
    if (a.n_symbols, a.n_modes) != (b.n_symbols, b.n_modes):
        raise ShapeError("memory states live in different bases")
    if a.channels == b.channels:
        v = inner(a.block, b.block)
    else:
        w = max(a.window, b.window)
        v = float(a.flat(w) @ b.flat(w))
    return min(1.0, max(0.0, v))


def condition_on_no_emission(q: Qms) -> Qms:
    """State after a measurement sweep of bin 0 reports no emission (time advances one bin)."""
    rest = q.block[1:]
    norm = math.sqrt(float((rest**2).sum()))
    if norm == 0.0:
        raise UnreachableStateError("emission in the first bin is certain")
    origin = q.origin[:-1] + (q.origin[-1] + 1,)
    return Qms(origin=origin, block=rest / norm, channels=q.channels, n_symbols=q.n_symbols, n_modes=q.n_modes)


@dataclass(frozen=True, eq=False)
class QmsEnsemble:
    states: list[Qms]
    weights: np.ndarray
    members: list[list[Hashable]]
    eps_dup: float

    def __len__(self) -> int:
        return len(self.states)


def _dup_window(eps_dup: float) -> float:
    # unit vectors with overlap >= 1 - eps have sum|a^2 - b^2| <= 2 sqrt(2 eps)
    return 2 * math.sqrt(2 * eps_dup) + 1e-9


def _assemble(c, weights_of, state_of, eps_dup) -> QmsEnsemble:
    states, weights = [], []
    for members in c.members:
        w = [weights_of(m) for m in members]
        best = max(range(len(members)), key=lambda i: (w[i], -i))
        states.append(state_of(members[best]))
        weights.append(math.fsum(w))
    return QmsEnsemble(states=states, weights=np.array(weights), members=c.members, eps_dup=eps_dup)


def deduplicate(states: Sequence[Qms], weights, eps_dup: float = EPS_DUP_DEFAULT) -> QmsEnsemble:
    """Merge states whose overlap is at least ``1 - eps_dup``; merged weights add up.

    The representative of a merged group is its heaviest member, ties going
    to the earliest. Members are listed by their ``origin``.
    """
    weights = np.asarray(weights, dtype=float)
    if len(states) != len(weights):
        raise ShapeError("one weight per state is required")
    if not states:
        raise DomainError("cannot deduplicate an empty ensemble")
    width = max(s.window for s in states)
    basis = signature_basis(width, len(states[0].channels))
    order = sorted(range(len(states)), key=lambda i: states[i].origin)
    items = ((i, table_signature(states[i].probabilities(), basis), (lambda i=i: states[i].block)) for i in order)
    same_layout = all(s.channels == states[0].channels for s in states)
    if same_layout:
        c = cluster(items, lambda a, b: 1.0 - inner(a, b), eps_dup, window=_dup_window(eps_dup))
    else:
        flat = [s.flat(width) for s in states]
        items = ((i, 0.0, (lambda i=i: flat[i])) for i in order)
        c = cluster(items, lambda a, b: 1.0 - float(a @ b), eps_dup, window=1.0)
    ens = _assemble(c, lambda i: weights[i], lambda i: states[i], eps_dup)
    members = [[states[i].origin for i in m] for m in ens.members]
    return QmsEnsemble(states=ens.states, weights=ens.weights, members=members, eps_dup=eps_dup)


def build_ensemble(d: DiscretizedProcess, eps_dup: float = EPS_DUP_DEFAULT) -> QmsEnsemble:
    """Memory states of every causal pair of ``d``, deduplicated, with steady-state weights."""
    if not 0 < eps_dup <= 1e-3:
        raise DomainError("eps_dup must lie in (0, 1e-3]")
    sigs = pair_signatures(d)
    items = ((p, float(sigs[p[0]][p[1]]), (lambda p=p: d.amplitudes(*p))) for p in d.pairs())
    c = cluster(items, lambda a, b: 1.0 - inner(a, b), eps_dup, window=_dup_window(eps_dup))
    return _assemble(c, lambda p: d.weights[p[0]][p[1]], lambda p: build_qms(d, *p), eps_dup)


def build_gram(e: QmsEnsemble) -> np.ndarray:
    """Weighted overlap matrix ``sqrt(w_a w_b) <a|b>``; shares its spectrum with the density operator."""
    n = len(e.states)
    G = np.zeros((n, n))
    if all(s.channels == e.states[0].channels for s in e.states):
        for c in range(len(e.states[0].channels)):
            rows = [i for i, s in enumerate(e.states) if s.block[:, c].any()]
            if not rows:
                continue
            M = np.zeros((len(rows), max(e.states[i].window for i in rows)))
            for r, i in enumerate(rows):
                col = e.states[i].block[:, c]
                M[r, : len(col)] = col
            G[np.ix_(rows, rows)] += M @ M.T
    else:
        w = max(s.window for s in e.states)
        V = np.stack([s.flat(w) for s in e.states])
        G = V @ V.T
    sw = np.sqrt(e.weights)
    G *= np.outer(sw, sw)
    return (G + G.T) / 2
