from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from qhsmm import (
    EeHsmm,
    Transition,
    build_example_process,
    conditional_future,
    mode_stats,
    psi,
    stationary_distribution,
    steady_state_density,
    survival,
    validate,
)
from qhsmm.dwell import Exponential, PiecewiseConstant, Uniform
from qhsmm.errors import DivergenceError, DomainError, StructureError, UnreachableStateError
from qhsmm.process import survival_integral
from qhsmm.validation import example_closed_form_errors

A, B, C = 0, 1, 2


def test_example_is_valid(example):
    assert validate(example) == []


def test_example_closed_forms(example):
    s = mode_stats(example)
    assert np.allclose(s.pi, [0.25, 0.25, 0.5], atol=1e-15)
    assert np.allclose(s.tau, [1.0, 1.0, 1.0], atol=1e-15)
    assert s.tau_bar == pytest.approx(1.0, abs=1e-15)
    assert max(example_closed_form_errors(example, 2.0, 1.0).values()) <= 1e-12


@given(t_fix=st.floats(0.1, 20), t_brk=st.floats(0.1, 20))
@settings(max_examples=40, deadline=None)
def test_closed_forms_any_timescales(t_fix, t_brk):
    m = build_example_process(t_fix, t_brk)
    assert max(example_closed_form_errors(m, t_fix, t_brk).values()) <= 1e-12


@given(t_fix=st.floats(0.1, 10), t_brk=st.floats(0.1, 10))
@settings(max_examples=20, deadline=None)
def test_steady_state_density_integrates_to_one(t_fix, t_brk):
    m = build_example_process(t_fix, t_brk)
    s = mode_stats(m)
    total = sum(s.mu_bar * s.pi[j] * survival_integral(m, j, 0.0, 200 * max(t_fix, t_brk)) for j in range(3))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_survival_integral_against_quadrature(example):
    for j in range(3):
        num, _ = quad(lambda t: survival(example, j, t), 0.1, 1.9, points=[0.5, 1.5], limit=200)
        assert survival_integral(example, j, 0.1, 1.9) == pytest.approx(num, abs=1e-12)


def test_survival_monotone_and_starts_at_one(example):
    ts = np.linspace(0, 5, 200)
    for j in range(3):
        phi = survival(example, j, ts)
        assert phi[0] == 1.0
        assert np.all(np.diff(phi) <= 1e-15)


def test_psi_squares_to_density(example):
    ts = np.linspace(0.01, 2.5, 50)
    assert np.allclose(psi(example, C, A, A, ts) ** 2, 0.5 * np.exp(-ts))
    assert np.allclose(psi(example, A, C, C, ts) ** 2, np.where(ts <= 2, 0.5, 0))
    assert np.all(psi(example, A, B, B, ts) == 0)


def test_conditional_future(example):
    # memoryless mode: future independent of elapsed time
    t = np.linspace(0, 3, 7)
    assert np.allclose(conditional_future(example, C, 0.7, A, A, t), conditional_future(example, C, 0.0, A, A, t))
    # uniform(0, 2) mode after 1.5 time units: uniform on [0, 0.5]
    assert np.allclose(conditional_future(example, A, 1.5, C, C, [0.1, 0.4, 0.6]), [2.0, 2.0, 0.0])
    with pytest.raises(UnreachableStateError):
        conditional_future(example, A, 2.5, C, C, 0.1)


def test_steady_state_density_values(example):
    assert steady_state_density(example, C, 0.0) == pytest.approx(0.5)
    assert steady_state_density(example, A, 1.0) == pytest.approx(0.125)


def _two_mode(p=0.5):
    return EeHsmm(
        modes=("a", "b"),
        alphabet=("0", "1"),
        transitions=(
            Transition(0, 1, 0, 1.0, Uniform(0.0, 1.0)),
            Transition(1, 0, 1, p, Exponential(2.0)),
            Transition(1, 1, 0, 1 - p, Exponential(2.0)),
        ),
    )


@given(p=st.floats(0.01, 0.99))
@settings(max_examples=30, deadline=None)
def test_stationary_is_fixed_point(p):
    m = _two_mode(p)
    pi = stationary_distribution(m)
    P = np.zeros((2, 2))
    for t in m.transitions:
        P[t.target, t.source] += t.prob
    assert np.allclose(P @ pi, pi, atol=1e-14)
    assert pi.sum() == pytest.approx(1.0)
    assert np.allclose(pi, [p / (1 + p), 1 / (1 + p)])


def test_validate_reports_each_problem():
    m = EeHsmm(
        modes=("a", "a"),
        alphabet=("x",),
        transitions=(
            Transition(0, 0, 0, 0.7, Uniform(0.0, 1.0)),
            Transition(0, 0, 0, 0.7, Uniform(0.0, 1.0)),
            Transition(1, 1, 0, 1.0, PiecewiseConstant((0.0, 1.0), (3.0,))),
        ),
    )
    codes = {v.code for v in validate(m)}
    assert {"duplicate-label", "duplicate-transition", "row-sum", "not-strongly-connected"} <= codes
    assert len(codes) >= 5


def test_disconnected_raises():
    m = EeHsmm(
        modes=("a", "b"),
        alphabet=("x",),
        transitions=(Transition(0, 0, 0, 1.0, Uniform(0, 1)), Transition(1, 1, 0, 1.0, Uniform(0, 1))),
    )
    with pytest.raises(StructureError):
        stationary_distribution(m)


def test_infinite_lifetime_raises():
    class Heavy(Exponential):
        def mean(self):
            return math.inf

    m = EeHsmm(modes=("g",), alphabet=("x",), transitions=(Transition(0, 0, 0, 1.0, Heavy(1.0)),))
    with pytest.raises(DivergenceError):
        mode_stats(m)


def test_example_rejects_bad_timescales():
    with pytest.raises(DomainError):
        build_example_process(0.0, 1.0)
    with pytest.raises(DomainError):
        build_example_process(1.0, math.inf)


def test_out_of_range_indices(example):
    with pytest.raises(IndexError):
        survival(example, 5, 0.0)
