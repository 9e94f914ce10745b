"""Refinement sweeps comparing classical and quantum memory."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .classical import EPS_MERGE_DEFAULT, CausalPartition, merge_equivalent, statistical_complexity
from .discretize import EPS_TAIL_DEFAULT, DiscretizedProcess, sweep
from .errors import SizeError
from .process import EeHsmm
from .quantum import EPS_DUP_DEFAULT, QmsEnsemble, build_ensemble, build_gram
from .spectrum import GramSpectrum, TailFit, default_fit_range, eigen_spectrum, quantum_memory, tail_fit

MAX_GRAM_DIM = 20000


@dataclass(eq=False)
class LevelResult:
    level: int
    discretized: DiscretizedProcess
    partition: CausalPartition
    ensemble: QmsEnsemble
    spectrum: GramSpectrum
    c_mu: float
    m_q: float
    fit: TailFit | None
    wall_time: float = field(default=0.0)

    @property
    def dt(self) -> float:
        return self.discretized.dt

    @property
    def gram_dim(self) -> int:
        return len(self.ensemble)

    def row(self) -> dict:
        return {
            "level": self.level,
            "dt": self.dt,
            "gram_dim": self.gram_dim,
            "n_states": self.partition.n_states,
            "c_mu_bits": self.c_mu,
            "m_q_bits": self.m_q,
            "tail_exponent": None if self.fit is None else self.fit.exponent,
            "residual": self.spectrum.residual,
        }


def analyze_level(
    d: DiscretizedProcess,
    level: int = 0,
    eps_merge: float = EPS_MERGE_DEFAULT,
    eps_dup: float = EPS_DUP_DEFAULT,
    max_gram_dim: int = MAX_GRAM_DIM,
) -> LevelResult:
    start = time.perf_counter()
    partition = merge_equivalent(d, eps_merge)
    ensemble = build_ensemble(d, eps_dup)
    if len(ensemble) > max_gram_dim:
        raise SizeError(
            f"Gram dimension {len(ensemble)} at dt={d.dt} exceeds the guard {max_gram_dim}; "
            "use fewer levels or raise the guard"
        )
    spec = eigen_spectrum(build_gram(ensemble))
    rng = default_fit_range(len(spec))
    fit = tail_fit(spec, *rng) if rng else None
    return LevelResult(
        level=level,
        discretized=d,
        partition=partition,
        ensemble=ensemble,
        spectrum=spec,
        c_mu=statistical_complexity(partition),
        m_q=quantum_memory(spec),
        fit=fit,
        wall_time=time.perf_counter() - start,
    )


def analyze_sweep(
    model: EeHsmm,
    dt: float,
    levels: int,
    eps_tail: float = EPS_TAIL_DEFAULT,
    eps_merge: float = EPS_MERGE_DEFAULT,
    eps_dup: float = EPS_DUP_DEFAULT,
    aligned: bool = False,
    max_gram_dim: int = MAX_GRAM_DIM,
):
    """Yield one LevelResult per level of the geometric refinement ``dt / 2**level``."""
    for i, d in enumerate(sweep(model, dt, levels, eps_tail, aligned)):
        yield analyze_level(d, i, eps_merge, eps_dup, max_gram_dim)
