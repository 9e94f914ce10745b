"""Trajectory sampling, Monte Carlo checks and memory-state measurement.

Random numbers come from numpy's Philox-4x64 counter-based generator
seeded with the 64-bit ``seed``. Uniforms are ``Generator.random()``
doubles (``(next_uint64 >> 11) * 2**-53``) shifted by ``2**-54`` so that
they lie strictly inside (0, 1). A trajectory of ``m`` steps consumes,
in order: one uniform for the initial mode, ``m`` uniforms choosing
edges, then ``m`` uniforms fed to the dwell inverse CDFs.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConsistencyError, DomainError
from .io import model_hash
from .process import EeHsmm, mode_stats, stationary_distribution
from .quantum import Qms

HALF_ULP = 2.0**-54


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


def _uniforms(rng: np.random.Generator, size: int | None = None):
    return rng.random(size) + HALF_ULP


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Emitted symbols and the dwell time preceding each emission."""

    symbols: np.ndarray
    dwells: np.ndarray
    initial_mode: int
    seed: int

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def events(self) -> list[tuple[int, float]]:
        return list(zip(self.symbols.tolist(), self.dwells.tolist()))


def sample_trajectory(model: EeHsmm, seed: int, n_events: int, burn_in: int = 0) -> Trajectory:
    """Run the model for ``burn_in + n_events`` emissions and keep the last ``n_events``.

    The initial mode is drawn from the post-emission stationary distribution.
    """
    if n_events < 0 or burn_in < 0:
        raise DomainError("n_events and burn_in must be nonnegative")
    rng = make_rng(seed)
    pi = stationary_distribution(model)
    total = burn_in + n_events
    j = int(np.searchsorted(np.cumsum(pi), _uniforms(rng) * pi.sum()))
    j = min(j, model.n_modes - 1)
    u_edge = _uniforms(rng, total)
    u_dwell = _uniforms(rng, total)

    out = [model.out_edges(m) for m in range(model.n_modes)]
    cum = [np.cumsum([e.prob for e in es]) for es in out]
    chosen = np.empty(total, dtype=int)  # index into out[mode]
    mode_of = np.empty(total, dtype=int)
    for i in range(total):
        mode_of[i] = j
        c = cum[j]
        e = min(int(np.searchsorted(c, u_edge[i] * c[-1])), len(c) - 1)
        chosen[i] = e
        j = out[j][e].target

    symbols = np.empty(total, dtype=int)
    dwells = np.empty(total)
    for m in range(model.n_modes):
        for e_idx, edge in enumerate(out[m]):
            sel = (mode_of == m) & (chosen == e_idx)
            if sel.any():
                symbols[sel] = edge.symbol
                dwells[sel] = edge.dwell.ppf(u_dwell[sel])
    start = int(mode_of[burn_in]) if n_events else j
    return Trajectory(symbols=symbols[burn_in:], dwells=dwells[burn_in:], initial_mode=start, seed=int(seed))


def replay(traj: Trajectory, model: EeHsmm) -> np.ndarray:
    """Mode occupied during each dwell, reconstructed from the symbols alone."""
    if len(traj) == 0:
        raise ConsistencyError("trajectory has no events")
    j = traj.initial_mode
    if not 0 <= j < model.n_modes:
        raise ConsistencyError(f"initial mode {j} is not a mode of the model")
    modes = np.empty(len(traj), dtype=int)
    for i, (x, t) in enumerate(zip(traj.symbols.tolist(), traj.dwells.tolist())):
        modes[i] = j
        nxt = [e for e in model.out_edges(j) if e.symbol == x]
        if not nxt:
            raise ConsistencyError(f"event {i}: mode {model.modes[j]!r} never emits symbol index {x}")
        if len({e.target for e in nxt}) > 1:
            raise ConsistencyError(f"event {i}: symbol does not determine the next mode (model is not unifilar)")
        lo, hi = nxt[0].dwell.support
        if not (t > 0 and lo <= t <= hi):
            raise ConsistencyError(f"event {i}: dwell {t!r} outside the support [{lo}, {hi}]")
        j = nxt[0].target
    return modes


def empirical_dwell_check(traj: Trajectory, model: EeHsmm, dt: float) -> np.ndarray:
    """Per-mode L1 distance between the binned dwell histogram and the mode's dwell law.

    Bins are ``[n dt, (n+1) dt)`` plus one overflow bin past the longest
    observed dwell or support end. Modes never visited get NaN.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    modes = replay(traj, model)
    out = np.full(model.n_modes, np.nan)
    for j in range(model.n_modes):
        d = traj.dwells[modes == j]
        if d.size == 0:
            continue
        end = max(e.dwell.support[1] for e in model.out_edges(j))
        top = d.max() if not np.isfinite(end) else max(end, d.max())
        K = int(np.ceil(top / dt)) + 1
        edges = np.arange(K + 1) * dt
        counts = np.bincount(np.minimum((d / dt).astype(int), K), minlength=K + 1)
        emp = counts / d.size
        expect = np.zeros(K + 1)
        for e in model.out_edges(j):
            expect[:K] += e.prob * np.asarray(e.dwell.mass(edges[:-1], edges[1:]))
            expect[K] += e.prob * float(e.dwell.sf(edges[-1]))
        out[j] = float(np.abs(emp - expect).sum())
    return out


def occupancy_check(traj: Trajectory, model: EeHsmm, batches: int = 50):
    """Time fraction spent in each mode, its expectation and a batch-means standard error."""
    modes = replay(traj, model)
    total = traj.dwells.sum()
    frac = np.array([traj.dwells[modes == j].sum() / total for j in range(model.n_modes)])
    expected = mode_stats(model).occupancy()
    size = len(traj) // batches
    if size == 0:
        raise DomainError("trajectory too short for batch means")
    per = np.empty((batches, model.n_modes))
    for b in range(batches):
        sl = slice(b * size, (b + 1) * size)
        w, m = traj.dwells[sl], modes[sl]
        per[b] = [w[m == j].sum() / w.sum() for j in range(model.n_modes)]
    se = per.std(axis=0, ddof=1) / np.sqrt(batches)
    return frac, expected, se


def qms_measurement_samples(q: Qms, seed: int, size: int) -> np.ndarray:
    """``size`` Born-rule draws of (n', x, k) from ``q``; shape (size, 3)."""
    p = q.probabilities().reshape(-1)
    cdf = np.cumsum(p)
    u = _uniforms(make_rng(seed), size) * cdf[-1]
    flat = np.minimum(np.searchsorted(cdf, u, side="left"), len(p) - 1)
    n_ch = len(q.channels)
    ch = np.array(q.channels)
    n_fwd, c = np.divmod(flat, n_ch)
    return np.column_stack([n_fwd, ch[c, 0], ch[c, 1]])


def qms_measurement_sample(q: Qms, seed: int) -> tuple[int, int, int]:
    n_fwd, x, k = qms_measurement_samples(q, seed, 1)[0]
    return int(n_fwd), int(x), int(k)


def empirical_table(q: Qms, draws: np.ndarray) -> np.ndarray:
    """Frequencies of measurement outcomes, laid out like ``q.block``."""
    cidx = {c: i for i, c in enumerate(q.channels)}
    out = np.zeros_like(q.block)
    for (x, k), c in cidx.items():
        sel = (draws[:, 1] == x) & (draws[:, 2] == k)
        out[:, c] = np.bincount(draws[sel, 0], minlength=q.window)[: q.window]
    return out / len(draws)


def write_trajectory(path: str | Path, traj: Trajectory, model: EeHsmm) -> None:
    """Header line, then one ``symbol,dwell`` line per event."""
    lines = [
        f"# model={model_hash(model)} seed={traj.seed} "
        f"initial_mode={model.modes[traj.initial_mode]} n_events={len(traj)}"
    ]
    lines += [f"{model.alphabet[x]},{t!r}" for x, t in zip(traj.symbols.tolist(), traj.dwells.tolist())]
    Path(path).write_text("\n".join(lines) + "\n")


def read_trajectory(path: str | Path, model: EeHsmm) -> Trajectory:
    text = Path(path).read_text().splitlines()
    if not text or not text[0].startswith("#"):
        raise ConsistencyError("missing trajectory header")
    header = dict(field.split("=", 1) for field in text[0][1:].split())
    if header.get("model") != model_hash(model):
        raise ConsistencyError("trajectory was generated by a different model")
    symbols, dwells = [], []
    for line in text[1:]:
        s, t = line.rsplit(",", 1)
        symbols.append(model.alphabet.index(s))
        dwells.append(float(t))
    return Trajectory(
        symbols=np.array(symbols, dtype=int),
        dwells=np.array(dwells),
        initial_mode=model.modes.index(header["initial_mode"]),
        seed=int(header["seed"]),
    )
