import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kcq.qubit import (
    ALTERNATING,
    CONVENTIONS,
    MAXIMALLY_MIXED,
    SEMICIRCLE,
    DensityMatrix2,
    InvariantError,
    QkConstellation,
    eve_ber_formula,
    eve_qubit_ber,
    helstrom_angle,
    helstrom_error,
    qk_eve_states,
    state_on_circle,
    trace_distance,
)

angles = st.floats(-10, 10, allow_nan=False)


@st.composite
def mixed_states(draw):
    r = draw(st.floats(0, 1))
    t = draw(st.floats(0, math.pi))
    ph = draw(st.floats(0, 2 * math.pi))
    return DensityMatrix2.from_bloch((r * math.sin(t) * math.cos(ph),
                                      r * math.sin(t) * math.sin(ph), r * math.cos(t)))


def test_state_on_circle_examples():
    assert np.allclose(state_on_circle(0).matrix, np.diag([1, 0]))
    assert np.allclose(state_on_circle(math.pi).matrix, np.diag([0, 1]), atol=1e-15)
    s = state_on_circle(math.pi / 2)
    assert np.allclose(s.matrix, [[0.5, 0.5], [0.5, 0.5]])
    assert s.purity() == pytest.approx(1.0)


def test_invariants_enforced():
    with pytest.raises(InvariantError):
        DensityMatrix2(np.array([[1, 1j], [0, 0]]))
    with pytest.raises(InvariantError):
        DensityMatrix2(np.eye(2))
    with pytest.raises(InvariantError):
        DensityMatrix2(np.diag([1.5, -0.5]))
    with pytest.raises(InvariantError):
        trace_distance(np.array([[1, 1], [0, 0]]), MAXIMALLY_MIXED)


def test_json_round_trip():
    s = state_on_circle(0.7)
    pairs = s.to_json()
    assert len(pairs) == 4 and all(len(p) == 2 for p in pairs)
    assert np.allclose(DensityMatrix2.from_json(pairs).matrix, s.matrix)


def test_trace_distance_examples():
    a = state_on_circle(0.0)
    assert trace_distance(a, a) == 0
    assert trace_distance(a, state_on_circle(math.pi)) == pytest.approx(2.0)
    assert trace_distance(a, state_on_circle(math.pi / 2)) == pytest.approx(1.41421, abs=1e-5)


@given(mixed_states(), mixed_states(), mixed_states())
def test_trace_distance_is_metric(a, b, c):
    assert trace_distance(a, b) >= 0
    assert trace_distance(a, b) == pytest.approx(trace_distance(b, a), abs=1e-12)
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-12
    # qubit trace norm equals the Bloch-vector distance
    assert trace_distance(a, b) == pytest.approx(np.linalg.norm(a.bloch - b.bloch), abs=1e-12)


def test_helstrom_examples():
    a, b = state_on_circle(0.3), state_on_circle(0.3 + math.pi)
    assert helstrom_error(a, a) == pytest.approx(0.5)
    assert helstrom_error(a, b) == pytest.approx(0.0, abs=1e-15)
    assert helstrom_error(a, state_on_circle(1.0), p0=1.0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        helstrom_error(a, b, 1.5)


@given(mixed_states(), mixed_states())
def test_helstrom_range_and_symmetry(a, b):
    e = helstrom_error(a, b)
    assert -1e-15 <= e <= 0.5 + 1e-15
    assert e == pytest.approx(helstrom_error(b, a), abs=1e-12)
    assert e == pytest.approx(0.5 - 0.25 * trace_distance(a, b), abs=1e-12)


@given(angles, angles, st.floats(0.05, 0.95))
def test_helstrom_angle_attains_bound(t0, t1, p0):
    r0, r1 = state_on_circle(t0), state_on_circle(t1)
    phi = helstrom_angle(r0, r1, p0)
    proj = state_on_circle(phi).matrix
    err = p0 * (1 - np.trace(proj @ r0.matrix).real) + (1 - p0) * np.trace(proj @ r1.matrix).real
    assert err == pytest.approx(helstrom_error(r0, r1, p0), abs=1e-12)


@pytest.mark.parametrize("M", [4, 8, 16, 32])
@pytest.mark.parametrize("conv", CONVENTIONS)
@pytest.mark.parametrize("pol", [False, True])
def test_cipher_state_is_maximally_mixed(M, conv, pol):
    st_ = qk_eve_states(QkConstellation(M, conv, pol))
    assert trace_distance(st_.cipher, MAXIMALLY_MIXED) <= 1e-12


def test_polarity_makes_bit_states_equal():
    st_ = qk_eve_states(QkConstellation(8, SEMICIRCLE, True))
    assert helstrom_error(st_.rho0, st_.rho1) == pytest.approx(0.5)


def test_semicircle_m4_states_differ():
    cmp = eve_qubit_ber(4, "numeric", QkConstellation(4, SEMICIRCLE))
    assert cmp.trace_distance == pytest.approx(math.sqrt(2))
    assert cmp.numeric == pytest.approx(0.5 - math.sqrt(2) / 4)
    assert cmp.formula == pytest.approx(0.36470, abs=1e-5)
    assert cmp.mismatch < 0


def test_alternating_states_coincide():
    cmp = eve_qubit_ber(8, "numeric", QkConstellation(8, ALTERNATING))
    assert cmp.numeric == pytest.approx(0.5)


def test_formula_examples():
    assert eve_qubit_ber(4) == pytest.approx(0.36470, abs=1e-5)
    v = eve_qubit_ber(1000)
    assert v == pytest.approx(0.49950, abs=5e-6)
    assert abs(v - (0.5 - 1 / 2000)) <= 1e-6
    gaps = [abs(eve_ber_formula(M) - (0.5 - 1 / (2 * M))) for M in 2 ** np.arange(6, 13)]
    assert max(gaps) <= 1e-4


def test_formula_monotone_and_bounded():
    vals = [eve_ber_formula(M) for M in range(4, 2000, 2)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert max(vals) < 0.5


def test_domain_errors():
    with pytest.raises(ValueError):
        eve_qubit_ber(5)
    with pytest.raises(ValueError):
        eve_qubit_ber(2)
    with pytest.raises(ValueError):
        QkConstellation(6).check_keyable()
    with pytest.raises(ValueError):
        eve_qubit_ber(4, "other")
