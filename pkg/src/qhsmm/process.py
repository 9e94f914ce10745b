"""Edge-emitting hidden semi-Markov models and their grid-free quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.sparse.csgraph import connected_components

from .dwell import DwellDensity, Exponential, Uniform
from .errors import DivergenceError, DomainError, StructureError, UnreachableStateError

ROW_SUM_TOL = 1e-10


@dataclass(frozen=True)
class Transition:
    """Edge ``source -> target`` emitting ``symbol`` with total probability ``prob``."""

    source: int
    target: int
    symbol: int
    prob: float
    dwell: DwellDensity


class Violation(NamedTuple):
    code: str
    message: str


@dataclass(frozen=True)
class EeHsmm:
    """Modes and symbols are referred to by their index into ``modes``/``alphabet``."""

    modes: tuple[str, ...]
    alphabet: tuple[str, ...]
    transitions: tuple[Transition, ...]
    _edges: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "_edges", {(t.source, t.target, t.symbol): t for t in self.transitions})

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def n_symbols(self) -> int:
        return len(self.alphabet)

    def edge(self, j: int, k: int, x: int) -> Transition | None:
        """The transition ``j -> k`` emitting ``x``, or None if absent."""
        self._check_mode(j)
        self._check_mode(k)
        self._check_symbol(x)
        return self._edges.get((j, k, x))

    def out_edges(self, j: int) -> list[Transition]:
        """Positive-probability edges leaving ``j``, ordered by (target, symbol)."""
        self._check_mode(j)
        out = [t for t in self.transitions if t.source == j and t.prob > 0]
        return sorted(out, key=lambda t: (t.target, t.symbol))

    def channels(self) -> list[tuple[int, int]]:
        """All (symbol, target) pairs reachable by some positive edge, sorted."""
        return sorted({(t.symbol, t.target) for t in self.transitions if t.prob > 0})

    def _check_mode(self, j: int) -> None:
        if not (isinstance(j, (int, np.integer)) and 0 <= j < self.n_modes):
            raise IndexError(f"mode index {j!r} out of range for {self.n_modes} modes")

    def _check_symbol(self, x: int) -> None:
        if not (isinstance(x, (int, np.integer)) and 0 <= x < self.n_symbols):
            raise IndexError(f"symbol index {x!r} out of range for {self.n_symbols} symbols")


@dataclass(frozen=True)
class ModeStats:
    pi: np.ndarray
    tau: np.ndarray
    mu: np.ndarray
    tau_bar: float
    mu_bar: float

    def occupancy(self) -> np.ndarray:
        """Fraction of time spent in each mode, ``pi_j tau_j / tau``."""
        return self.pi * self.tau / self.tau_bar


def validate(model: EeHsmm) -> list[Violation]:
    """Every invariant violation of ``model``; empty when the model is valid."""
    out: list[Violation] = []
    nm, ns = model.n_modes, model.n_symbols
    if nm == 0:
        out.append(Violation("empty", "model has no modes"))
    if ns == 0:
        out.append(Violation("empty", "model has no symbols"))
    if len(set(model.modes)) != nm:
        out.append(Violation("duplicate-label", "mode labels must be unique"))
    if len(set(model.alphabet)) != ns:
        out.append(Violation("duplicate-label", "symbol labels must be unique"))

    seen: set[tuple[int, int, int]] = set()
    row = np.zeros(nm)
    for i, t in enumerate(model.transitions):
        where = f"transition {i}"
        if not (0 <= t.source < nm and 0 <= t.target < nm):
            out.append(Violation("bad-index", f"{where}: mode index out of range"))
            continue
        if not 0 <= t.symbol < ns:
            out.append(Violation("bad-index", f"{where}: symbol index out of range"))
            continue
        key = (t.source, t.target, t.symbol)
        if key in seen:
            out.append(Violation("duplicate-transition", f"{where}: repeats (from, to, symbol) {key}"))
        seen.add(key)
        if not (math.isfinite(t.prob) and 0.0 <= t.prob <= 1.0):
            out.append(Violation("prob-range", f"{where}: probability {t.prob!r} outside [0, 1]"))
        else:
            row[t.source] += t.prob
        for code, msg in t.dwell.violations():
            out.append(Violation(code, f"{where}: {msg}"))

    for j in range(nm):
        if abs(row[j] - 1.0) > ROW_SUM_TOL:
            out.append(Violation("row-sum", f"mode {model.modes[j]!r}: outgoing probabilities sum to {row[j]!r}"))

    if nm and not _strongly_connected(model):
        out.append(Violation("not-strongly-connected", "mode transition graph is not strongly connected"))
    return out


def _mode_matrix(model: EeHsmm) -> np.ndarray:
    """Column-stochastic ``P[k, j] = sum_x T_kj^x``."""
    P = np.zeros((model.n_modes, model.n_modes))
    for t in model.transitions:
        if 0 <= t.source < model.n_modes and 0 <= t.target < model.n_modes:
            P[t.target, t.source] += t.prob
    return P


def _strongly_connected(model: EeHsmm) -> bool:
    n, _ = connected_components(_mode_matrix(model) > 0, directed=True, connection="strong")
    return n == 1


def psi(model: EeHsmm, j: int, k: int, x: int, t):
    """Square-root transition dynamic ``sqrt(T_kj^x phi_kj^x(t))``."""
    e = model.edge(j, k, x)
    if e is None:
        return 0.0 if np.ndim(t) == 0 else np.zeros(np.shape(t))
    return np.sqrt(e.prob * e.dwell.pdf(t))


def stationary_distribution(model: EeHsmm) -> np.ndarray:
    """Post-emission stationary mode distribution: the unit eigenvector of ``sum_x T^x``."""
    if not _strongly_connected(model):
        raise StructureError("mode transition graph is not strongly connected")
    P = _mode_matrix(model)
    n = P.shape[0]
    # replace one balance equation by normalisation
    A = P - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def survival(model: EeHsmm, j: int, t):
    """``Phi_j(t)``: probability that the dwell in mode ``j`` lasts at least ``t``."""
    model._check_mode(j)
    t_ = np.asarray(t, dtype=float)
    total = np.zeros(t_.shape)
    for e in model.out_edges(j):
        total = total + e.prob * np.asarray(e.dwell.sf(t_))
    total = np.where(t_ < 0, 1.0, total)
    return float(total) if np.ndim(t) == 0 else total


def survival_integral(model: EeHsmm, j: int, lo, hi):
    """``∫_lo^hi Phi_j(t) dt`` in closed form."""
    model._check_mode(j)
    lo_, hi_ = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    total = np.zeros(np.broadcast(lo_, hi_).shape)
    for e in model.out_edges(j):
        total = total + e.prob * np.asarray(e.dwell.sf_integral(lo_, hi_))
    return float(total) if total.ndim == 0 else total


def mode_lifetimes(model: EeHsmm) -> np.ndarray:
    tau = np.zeros(model.n_modes)
    for j in range(model.n_modes):
        for e in model.out_edges(j):
            m = e.dwell.mean()
            if not math.isfinite(m):
                raise DivergenceError(f"mode {model.modes[j]!r} has infinite lifetime")
            tau[j] += e.prob * m
    return tau


def mode_stats(model: EeHsmm) -> ModeStats:
    pi = stationary_distribution(model)
    tau = mode_lifetimes(model)
    if np.any(tau <= 0):
        raise DomainError("every mode lifetime must be positive")
    tau_bar = float(pi @ tau)
    return ModeStats(pi=pi, tau=tau, mu=1.0 / tau, tau_bar=tau_bar, mu_bar=1.0 / tau_bar)


def conditional_future(model: EeHsmm, j: int, t: float, k: int, x: int, t_fwd):
    """Density of (next mode ``k``, symbol ``x``, wait ``t_fwd``) given causal pair ``(j, t)``."""
    phi = survival(model, j, t)
    if phi <= 0.0:
        raise UnreachableStateError(f"mode {model.modes[j]!r} cannot have dwelt for {t!r}")
    e = model.edge(j, k, x)
    if e is None:
        return 0.0 if np.ndim(t_fwd) == 0 else np.zeros(np.shape(t_fwd))
    return e.prob * e.dwell.pdf(np.asarray(t_fwd, dtype=float) + t) / phi


def steady_state_density(model: EeHsmm, j: int, t, stats: ModeStats | None = None):
    """Stationary density ``mu pi_j Phi_j(t)`` of the causal pair ``(j, t)``."""
    s = stats or mode_stats(model)
    return s.mu_bar * s.pi[j] * survival(model, j, t)


def mode_support(model: EeHsmm, j: int) -> tuple[float, float]:
    """Smallest interval containing the dwell support of every edge leaving ``j``."""
    edges = model.out_edges(j)
    return min(e.dwell.support[0] for e in edges), max(e.dwell.support[1] for e in edges)


def build_example_process(t_fix: float, t_brk: float) -> EeHsmm:
    """Three-mode repair process: g_A, g_B fix (emit C), g_C breaks (emits A or B).

    Mode and symbol indices are 0 = A, 1 = B, 2 = C.
    """
    if not (t_fix > 0 and t_brk > 0 and math.isfinite(t_fix) and math.isfinite(t_brk)):
        raise DomainError("T_Fix and T_Brk must be positive and finite")
    A, B, C = 0, 1, 2
    brk = Exponential(float(t_brk))
    return EeHsmm(
        modes=("g_A", "g_B", "g_C"),
        alphabet=("A", "B", "C"),
        transitions=(
            Transition(A, C, C, 1.0, Uniform(0.0, t_fix)),
            Transition(B, C, C, 1.0, Uniform(t_fix / 4, 3 * t_fix / 4)),
            Transition(C, A, A, 0.5, brk),
            Transition(C, B, B, 0.5, brk),
        ),
    )


def build_poisson_process(scale: float) -> EeHsmm:
    """Single mode, single symbol, exponential waiting times."""
    if not (scale > 0 and math.isfinite(scale)):
        raise DomainError("scale must be positive and finite")
    return EeHsmm(modes=("g",), alphabet=("x",), transitions=(Transition(0, 0, 0, 1.0, Exponential(float(scale))),))
