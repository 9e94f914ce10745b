"""Coarse-graining an eeHSMM onto a uniform time grid.

Bins are left-closed ``[n dt, (n+1) dt)``. For every mode ``j`` the grid
keeps ``n_bins[j]`` causal pairs ``(j, n)``: exactly those with
``Phi_j(n dt) > eps_tail``. The future of a pair is looked at over a
window of ``n_bins[j]`` bins, so the binned square-root weights are
stored over ``2 * n_bins[j]`` bins. Pairs of a memoryless mode then see
futures that are exact shifts of one another, which keeps their tables
identical up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResolutionError, UnreachableStateError
from .process import EeHsmm, ModeStats, mode_stats, mode_support, survival, survival_integral

EPS_TAIL_DEFAULT = 1e-10
SNAP_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    dt: float
    t_max: tuple[float, ...]
    eps_tail: float


@dataclass(frozen=True, eq=False)
class DiscretizedProcess:
    """Binned weights of a model on one grid.

    ``psi_tilde[(j, k, x)][m]`` is ``sqrt(∫_{m dt}^{(m+1) dt} psi_kj^x(t)^2 dt)``
    for ``m < 2 n_bins[j]``; ``phi[j][n] = Phi_j(n dt)`` for ``n <= n_bins[j]``;
    ``weights[j][n]`` is the normalised steady-state probability of pair ``(j, n)``.
    """

    model: EeHsmm
    grid: Grid
    stats: ModeStats
    channels: tuple[tuple[int, int], ...]
    n_bins: tuple[int, ...]
    psi_tilde: dict[tuple[int, int, int], np.ndarray]
    phi: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]
    truncated_mass: float
    aligned: bool = False
    # per-mode (2 n_bins, n_channels) amplitude blocks and window norms S_j(n)
    blocks: tuple[np.ndarray, ...] = field(default=(), repr=False)
    norm2: tuple[np.ndarray, ...] = field(default=(), repr=False)

    @property
    def dt(self) -> float:
        return self.grid.dt

    @property
    def n_pairs(self) -> int:
        return sum(self.n_bins)

    def horizon(self, j: int) -> int:
        """Length of the future window of pairs in mode ``j``."""
        return self.n_bins[j]

    def pairs(self):
        """All causal pairs in lexicographic ``(j, n)`` order."""
        for j, nb in enumerate(self.n_bins):
            for n in range(nb):
                yield j, n

    def channel_index(self, x: int, k: int) -> int:
        return self.channels.index((x, k))

    def _check_pair(self, j: int, n: int) -> None:
        self.model._check_mode(j)
        if n < 0:
            raise IndexError(f"bin index {n} is negative")
        if n >= self.n_bins[j]:
            raise UnreachableStateError(
                f"pair ({self.model.modes[j]}, {n}) has survival <= eps_tail={self.grid.eps_tail}"
            )

    def amplitudes(self, j: int, n: int) -> np.ndarray:
        """Unit-norm future amplitudes of pair ``(j, n)``, shape (window, channels)."""
        self._check_pair(j, n)
        L = self.n_bins[j]
        return self.blocks[j][n : n + L] / math.sqrt(self.norm2[j][n])

    def table(self, j: int, n: int) -> np.ndarray:
        """Conditional future probabilities of pair ``(j, n)``, shape (window, channels)."""
        self._check_pair(j, n)
        L = self.n_bins[j]
        return self.blocks[j][n : n + L] ** 2 / self.norm2[j][n]

    def weight(self, j: int, n: int) -> float:
        return float(self.weights[j][n])


def _snapped_edges(model: EeHsmm, dt: float, count: int) -> np.ndarray:
    edges = np.arange(count + 1) * dt
    for t in model.transitions:
        for b in t.dwell.breaks():
            if math.isfinite(b):
                m = round(b / dt)
                if 0 <= m <= count and abs(edges[m] - b) <= SNAP_TOL * dt:
                    edges[m] = b
    return edges


def is_aligned(model: EeHsmm, dt: float) -> bool:
    """True when every dwell breakpoint falls on a grid point."""
    for t in model.transitions:
        for b in t.dwell.breaks():
            if math.isfinite(b) and abs(b / dt - round(b / dt)) > SNAP_TOL:
                return False
    return True


def _horizon_bins(model: EeHsmm, j: int, dt: float, eps_tail: float) -> int:
    """Smallest ``n >= 1`` with ``Phi_j(n dt) <= eps_tail``."""
    _, end = mode_support(model, j)
    if math.isfinite(end):
        hi = max(1, math.ceil(end / dt - SNAP_TOL))
    else:
        t = max(dt, 1.0)
        while survival(model, j, t) > eps_tail:
            t *= 2
        hi = math.ceil(t / dt)
    phi = survival(model, j, np.arange(1, hi + 1) * dt)
    below = np.flatnonzero(phi <= eps_tail)
    return int(below[0]) + 1 if below.size else hi


def discretize(
    model: EeHsmm,
    dt: float,
    eps_tail: float = EPS_TAIL_DEFAULT,
    *,
    aligned: bool = False,
    t_max: tuple[float, ...] | None = None,
) -> DiscretizedProcess:
    """Bin ``model`` with step ``dt``.

    ``t_max`` overrides the per-mode truncation horizons; it must be a
    multiple of ``dt`` with survival below ``eps_tail`` (``refine`` uses it
    so that parent and child grids truncate at the same time).
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise DomainError("dt must be positive and finite")
    if not 0 < eps_tail <= 1e-3:
        raise DomainError("eps_tail must lie in (0, 1e-3]")
    widths = [np.subtract(*mode_support(model, j)[::-1]) for j in range(model.n_modes)]
    if dt >= min(widths):
        raise ResolutionError(f"dt={dt} is not below the narrowest mode support width {min(widths)}")
    if aligned and not is_aligned(model, dt):
        raise ResolutionError(f"dt={dt} does not put every dwell breakpoint on a grid point")

    stats = mode_stats(model)
    channels = tuple(model.channels())
    cidx = {c: i for i, c in enumerate(channels)}

    n_bins = []
    for j in range(model.n_modes):
        if t_max is None:
            n_bins.append(_horizon_bins(model, j, dt, eps_tail))
        else:
            nb = round(t_max[j] / dt)
            if abs(nb * dt - t_max[j]) > SNAP_TOL * dt or survival(model, j, t_max[j]) > eps_tail:
                raise DomainError(f"t_max[{j}]={t_max[j]} is not a valid horizon for dt={dt}")
            n_bins.append(nb)

    psi_tilde = {}
    blocks, norm2, phis, weights = [], [], [], []
    for j in range(model.n_modes):
        nb = n_bins[j]
        edges = _snapped_edges(model, dt, 2 * nb)
        lo, hi = edges[:-1], edges[1:]
        block = np.zeros((2 * nb, len(channels)))
        for e in model.out_edges(j):
            sq = np.sqrt(np.maximum(e.prob * np.asarray(e.dwell.mass(lo, hi)), 0.0))
            psi_tilde[(j, e.target, e.symbol)] = sq
            block[:, cidx[(e.symbol, e.target)]] = sq
        rows = (block**2).sum(axis=1)
        suffix = np.cumsum(rows[::-1])[::-1]
        suffix = np.append(suffix, 0.0)
        norm2.append(suffix[:nb] - suffix[nb : 2 * nb])
        blocks.append(block)
        phis.append(survival(model, j, edges[: nb + 1]))
        w = stats.mu_bar * stats.pi[j] * survival_integral(model, j, edges[:nb], edges[1 : nb + 1])
        weights.append(np.asarray(w, dtype=float))

    total = float(sum(w.sum() for w in weights))
    weights = [w / total for w in weights]
    return DiscretizedProcess(
        model=model,
        grid=Grid(dt=float(dt), t_max=tuple(nb * dt for nb in n_bins), eps_tail=float(eps_tail)),
        stats=stats,
        channels=channels,
        n_bins=tuple(n_bins),
        psi_tilde=psi_tilde,
        phi=tuple(phis),
        weights=tuple(weights),
        truncated_mass=1.0 - total,
        aligned=aligned,
        blocks=tuple(blocks),
        norm2=tuple(norm2),
    )


def refine(d: DiscretizedProcess) -> DiscretizedProcess:
    """The same model on a grid of half the step, truncated at the same horizons."""
    return discretize(d.model, d.grid.dt / 2, d.grid.eps_tail, aligned=d.aligned, t_max=d.grid.t_max)


def sweep(model: EeHsmm, dt: float, levels: int, eps_tail: float = EPS_TAIL_DEFAULT, aligned: bool = False):
    """Yield discretizations at ``dt, dt/2, ..., dt/2**(levels-1)``."""
    d = discretize(model, dt, eps_tail, aligned=aligned)
    yield d
    for _ in range(levels - 1):
        d = refine(d)
        yield d
