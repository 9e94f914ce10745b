from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhsmm import (
    build_ensemble,
    build_gram,
    build_qms,
    build_qms_continuous_emission,
    condition_on_no_emission,
    deduplicate,
    discretize,
    merge_equivalent,
    overlap,
)
from qhsmm.errors import DomainError, ShapeError, UnreachableStateError
from qhsmm.quantum import Qms

A, B, C = 0, 1, 2


@pytest.fixture(scope="module")
def d16(example):
    return discretize(example, 2 / 16, aligned=True)


def test_fixing_mode_amplitudes(d16):
    N = 16
    for n in range(N):
        q = build_qms(d16, A, n)
        v = q.flat().reshape(q.window, 3, 3)
        expect = np.zeros_like(v)
        expect[: N - n, C, C] = np.sqrt(1 / (N - n))
        assert np.allclose(v, expect, atol=1e-15)
        assert q.norm() == pytest.approx(1.0, abs=1e-14)


def test_breaking_mode_amplitudes(d16):
    dt = 2 / 16
    q = build_qms(d16, C, 3)
    v = q.flat().reshape(q.window, 3, 3)
    m = np.arange(q.window)
    raw = np.sqrt(0.5 * (np.exp(-m * dt) - np.exp(-(m + 1) * dt)))
    raw /= np.sqrt(2 * (raw**2).sum())
    assert np.allclose(v[:, A, A], raw, atol=1e-14)
    assert np.allclose(v[:, B, B], raw, atol=1e-14)
    assert v[:, C, :].sum() == 0


def test_overlap_properties(d16):
    qs = [build_qms(d16, j, n) for j, n in list(d16.pairs())[::5]]
    for a in qs:
        assert overlap(a, a) == pytest.approx(1.0, abs=1e-14)
        for b in qs:
            o = overlap(a, b)
            assert 0.0 <= o <= 1.0
            assert o == overlap(b, a)


def test_fixing_states_orthogonal_to_breaking(d16):
    assert overlap(build_qms(d16, A, 0), build_qms(d16, C, 0)) == 0.0


def test_quantum_classes_match_classical(d16):
    part = merge_equivalent(d16)
    ens = build_ensemble(d16)
    assert len(ens) == part.n_states
    assert sorted(map(sorted, ens.members)) == sorted(map(sorted, part.members))
    assert np.allclose(sorted(ens.weights), sorted(part.probs), atol=1e-15)


def test_gram_matches_explicit_vectors(d16):
    ens = build_ensemble(d16)
    G = build_gram(ens)
    w = max(s.window for s in ens.states)
    V = np.stack([s.flat(w) for s in ens.states]) * np.sqrt(ens.weights)[:, None]
    assert np.allclose(G, V @ V.T, atol=1e-15)
    assert np.allclose(np.diag(G), ens.weights, atol=1e-15)
    assert np.trace(G) == pytest.approx(1.0, abs=1e-13)
    assert np.array_equal(G, G.T)


def test_condition_on_no_emission_advances_time(d16):
    for n in (0, 3, 9):
        q = condition_on_no_emission(build_qms(d16, A, n))
        ref = build_qms(d16, A, n + 1)
        assert q.origin == (A, n + 1)
        assert overlap(q, ref) == pytest.approx(1.0, abs=1e-13)
    last = build_qms(d16, A, 15)
    with pytest.raises(UnreachableStateError):
        condition_on_no_emission(last)


def test_continuous_emission_state(d16):
    q = build_qms_continuous_emission(d16, C, A, 2)
    assert q.norm() == pytest.approx(1.0, abs=1e-14)
    v = q.flat().reshape(q.window, 3, 3)
    assert v[:, A, A].sum() > 0 and v[:, B, B].sum() == 0
    with pytest.raises(DomainError):
        build_qms_continuous_emission(d16, A, A, 0)
    with pytest.raises(UnreachableStateError):
        build_qms_continuous_emission(d16, A, C, 16)


def _unit(v):
    v = np.abs(np.asarray(v, dtype=float))
    return v / np.linalg.norm(v)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=20), st.integers(0, 1000))
@settings(max_examples=40, deadline=None)
def test_deduplicate_preserves_weight(labels, seed):
    rng = np.random.default_rng(seed)
    protos = [_unit(rng.random(6) + 0.01) for _ in range(4)]
    states = [
        Qms(origin=(i,), block=protos[l].reshape(3, 2), channels=((0, 0), (1, 0)), n_symbols=2, n_modes=1)
        for i, l in enumerate(labels)
    ]
    w = rng.random(len(states)) + 0.1
    ens = deduplicate(states, w)
    assert len(ens) == len(set(labels))
    assert ens.weights.sum() == pytest.approx(w.sum())
    for members, rep in zip(ens.members, ens.states):
        assert rep.origin == max(members, key=lambda o: (w[o[0]], -o[0]))


def test_deduplicate_errors():
    q = Qms(origin=(0,), block=np.ones((1, 1)), channels=((0, 0),), n_symbols=1, n_modes=1)
    with pytest.raises(ShapeError):
        deduplicate([q], [0.5, 0.5])
    with pytest.raises(DomainError):
        deduplicate([], [])
    other = Qms(origin=(1,), block=np.ones((1, 1)), channels=((0, 0),), n_symbols=2, n_modes=1)
    with pytest.raises(ShapeError):
        overlap(q, other)


def test_poisson_single_memory_state(poisson):
    ens = build_ensemble(discretize(poisson, 0.05))
    assert len(ens) == 1
    assert ens.weights[0] == pytest.approx(1.0, abs=1e-14)
