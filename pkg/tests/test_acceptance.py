"""Acceptance criteria, one test each, at their stated tolerances and time budgets."""

from __future__ import annotations

import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from qhsmm import (
    build_ensemble,
    build_example_process,
    build_gram,
    build_poisson_process,
    build_qms,
    density_matrix_direct,
    discretize,
    eigen_spectrum,
    merge_equivalent,
    mode_stats,
    overlap,
    quantum_memory,
    statistical_complexity,
    sweep,
    tail_fit,
)
from qhsmm.analysis import analyze_sweep
from qhsmm.sampler import (
    empirical_dwell_check,
    empirical_table,
    occupancy_check,
    qms_measurement_samples,
    sample_trajectory,
)
from qhsmm.validation import example_closed_form_errors

A, B, C = 0, 1, 2
T_FIX, T_BRK = 2.0, 1.0


def report(k: int, ok: bool, detail: str, elapsed: float, budget: float | None) -> None:
    limit = "" if budget is None else f" (limit {budget:g} s)"
    line = f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}; {elapsed:.2f} s{limit}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def sweep_results():
    model = build_example_process(T_FIX, T_BRK)
    start = time.perf_counter()
    results = list(analyze_sweep(model, T_FIX / 8, 8, aligned=True))
    return results, time.perf_counter() - start


def test_criterion_1_closed_forms():
    start = time.perf_counter()
    m = build_example_process(T_FIX, T_BRK)
    s = mode_stats(m)
    exact = (
        np.abs(s.pi - [0.25, 0.25, 0.5]).max() <= 1e-12
        and np.abs(s.tau - [1, 1, 1]).max() <= 1e-12
        and abs(s.tau_bar - 1) <= 1e-12
    )
    worst = max(example_closed_form_errors(m, T_FIX, T_BRK, n_points=20).values())
    elapsed = time.perf_counter() - start
    report(1, exact and worst <= 1e-12 and elapsed < 1, f"max deviation {worst:.2e} (tol 1e-12)", elapsed, 1)


def test_criterion_2_automatic_merging():
    start = time.perf_counter()
    N = 64
    d = discretize(build_example_process(T_FIX, T_BRK), T_FIX / N, aligned=True)
    rng = np.random.default_rng(2024)
    nm = rng.integers(0, d.n_bins[C], size=(50, 2))
    dev_c = max(abs(1 - overlap(build_qms(d, C, int(n)), build_qms(d, C, int(m)))) for n, m in nm)
    dev_ab = max(abs(1 - overlap(build_qms(d, A, n + N // 2), build_qms(d, B, n + N // 4))) for n in range(N // 2))
    elapsed = time.perf_counter() - start
    ok = dev_c <= 1e-12 and dev_ab <= 1e-12 and elapsed < 5
    report(2, ok, f"g_C deviation {dev_c:.2e}, g_A/g_B deviation {dev_ab:.2e} (tol 1e-12)", elapsed, 5)


def test_criterion_3_gram_vs_direct():
    start = time.perf_counter()
    m = build_example_process(T_FIX, T_BRK)
    gaps = []
    for N in (8, 16, 32):
        ens = build_ensemble(discretize(m, T_FIX / N, aligned=True))
        g = eigen_spectrum(build_gram(ens))
        r = density_matrix_direct(ens)
        n = max(len(g), len(r))
        gaps.append(float(np.abs(np.pad(g.eigenvalues, (0, n - len(g))) - np.pad(r.eigenvalues, (0, n - len(r)))).max()))
    elapsed = time.perf_counter() - start
    ok = max(gaps) <= 1e-10 and elapsed < 10
    report(3, ok, f"eigenvalue discrepancies {[f'{g:.1e}' for g in gaps]} (tol 1e-10)", elapsed, 10)


def test_criterion_4_state_counts_agree():
    start = time.perf_counter()
    counts = []
    for d in sweep(build_example_process(T_FIX, T_BRK), T_FIX / 8, 6, aligned=True):
        counts.append((merge_equivalent(d).n_states, len(build_ensemble(d))))
    elapsed = time.perf_counter() - start
    ok = all(a == b for a, b in counts) and elapsed < 30
    report(4, ok, f"(classical, quantum) counts for N=8..256: {counts}", elapsed, 30)


def test_criterion_5_memory_scaling(sweep_results):
    results, elapsed = sweep_results
    Ns = [round(T_FIX / r.dt) for r in results]
    c = np.array([r.c_mu for r in results])
    q = np.array([r.m_q for r in results])
    dc, dq = np.diff(c), np.diff(q)
    big = [i for i, N in enumerate(Ns) if N >= 64]
    cond_a = bool(np.all(dc >= 0.1))
    cond_b = bool(np.all(q < c) and np.all(c[big] - q[big] >= 0.5))
    # increments for doublings that end at N >= 64
    inc = [dq[i - 1] for i in big]
    cond_c = bool(np.all(np.diff(inc) < 0))
    ok = cond_a and cond_b and cond_c and elapsed < 600
    detail = (
        f"N={Ns[0]}..{Ns[-1]} C_mu {c[0]:.4f}->{c[-1]:.4f} (min step {dc.min():.3f}), "
        f"M_q {q[0]:.4f}->{q[-1]:.4f}, min gap (N>=64) {(c[big] - q[big]).min():.3f}, "
        f"M_q steps {np.round(dq, 5).tolist()}"
    )
    report(5, ok, detail, elapsed, 600)


def test_criterion_6_tail_exponent(sweep_results):
    results, _ = sweep_results
    last = results[-1]
    assert round(T_FIX / last.dt) == 1024
    fit = tail_fit(last.spectrum, 32, 256)
    ok = -2.3 <= fit.exponent <= -1.7
    report(6, ok, f"exponent {fit.exponent:.4f} over ranks 32-256, log residual {fit.residual:.4f}", 0.0, None)


def test_criterion_7_monte_carlo():
    start = time.perf_counter()
    m = build_example_process(T_FIX, T_BRK)
    traj = sample_trajectory(m, 7, 100_000)
    l1 = empirical_dwell_check(traj, m, 0.25)
    frac, expected, se = occupancy_check(traj, m)
    z = np.abs(frac - expected) / se
    ens = build_ensemble(discretize(m, 0.25))
    tvs = []
    for i, q in enumerate(ens.states):
        draws = qms_measurement_samples(q, 100 + i, 100_000)
        tvs.append(0.5 * float(np.abs(empirical_table(q, draws) - q.probabilities()).sum()))
    elapsed = time.perf_counter() - start
    ok = bool(np.all(l1 <= 0.02) and np.all(z <= 3) and max(tvs) <= 0.02 and elapsed < 60)
    detail = (
        f"dwell L1 {np.round(l1, 4).tolist()} (bins 0.25), occupancy z {np.round(z, 2).tolist()}, "
        f"worst measurement TV {max(tvs):.4f} over {len(tvs)} states"
    )
    report(7, ok, detail, elapsed, 60)


def test_criterion_8_poisson_oracle():
    start = time.perf_counter()
    worst = 0.0
    counts = []
    for s in (0.5, 1.0, 3.0):
        for d in sweep(build_poisson_process(s), s / 4, 4):
            part = merge_equivalent(d)
            ens = build_ensemble(d)
            counts.append((part.n_states, len(ens)))
            worst = max(worst, abs(statistical_complexity(part)), abs(quantum_memory(eigen_spectrum(build_gram(ens)))))
    elapsed = time.perf_counter() - start
    ok = all(c == (1, 1) for c in counts) and worst <= 1e-9 and elapsed < 5
    report(8, ok, f"{len(counts)} levels all single-state, max |C_mu|, |M_q| = {worst:.1e}", elapsed, 5)


def test_criterion_9_determinism(tmp_path):
    start = time.perf_counter()
    out = tmp_path / "out"
    cmd = [sys.executable, "-m", "qhsmm.cli", "analyze", "example:2,1", "--levels", "6", "--deterministic",
           "--seed", "7", "--out", str(out)]
    runs = []
    for _ in range(2):
        subprocess.run(cmd, check=True, capture_output=True)
        runs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        for p in out.iterdir():
            p.unlink()
    elapsed = time.perf_counter() - start
    ok = runs[0] == runs[1] and set(runs[0]) == {"analysis.csv", "partition.csv", "summary.json"}
    report(9, ok, f"{len(runs[0])} files byte-identical across two runs", elapsed, None)
