import numpy as np
import pytest

from qamsim import (
    MarkedSet,
    ValidationError,
    oracle_apply,
    restricted_oracle_apply,
    support,
    uniform_state,
)
from qamsim.oracle import parse_values


def flagged(state):
    return [y for y, k in support(state) if k == 1]


def test_marked_set_validation():
    with pytest.raises(ValidationError):
        MarkedSet(3, [1, 1])
    with pytest.raises(ValidationError):
        MarkedSet(3, [8])
    assert MarkedSet(3, [5, 1]).values == (1, 5)
    assert MarkedSet(3, [5, 1]).m == 2


def test_parse_values_binary_vs_int():
    assert parse_values("0010,1010", 4) == [2, 10]
    assert parse_values("2,10", 4) == [2, 10]
    assert parse_values("10", 2) == [2]  # width-2 token read as binary
    with pytest.raises(ValidationError):
        parse_values("abc", 4)


def test_single_mark_on_uniform_register():
    state = oracle_apply(uniform_state(4), MarkedSet(4, [2]))
    assert flagged(state) == [2]
    assert len(support(state)) == 16


def test_empty_marked_set_is_identity():
    s = uniform_state(3)
    t = oracle_apply(s, MarkedSet(3, []))
    assert np.abs(t.amplitudes - s.amplitudes).max() == 0.0


def test_seven_marks_on_uniform_register():
    state = oracle_apply(uniform_state(4), MarkedSet(4, [2, 5, 8, 10, 11, 13, 15]))
    assert flagged(state) == [2, 5, 8, 10, 11, 13, 15]


def test_oracle_is_an_exact_involution():
    rng = np.random.default_rng(4)
    raw = rng.normal(size=32) + 1j * rng.normal(size=32)
    from qamsim import PureState

    s = PureState(4, raw / np.linalg.norm(raw))
    marked = MarkedSet(4, [0, 3, 7, 9])
    t = oracle_apply(oracle_apply(s, marked), marked)
    assert np.abs(t.amplitudes - s.amplitudes).max() <= 1e-15


def test_oracle_commutes_with_register_diagonal_phase():
    from qamsim import PureState

    rng = np.random.default_rng(12)
    raw = rng.normal(size=16) + 1j * rng.normal(size=16)
    s = PureState(3, raw / np.linalg.norm(raw))
    marked = MarkedSet(3, [1, 6])
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=8))

    def diag(state):
        amps = np.array(state.amplitudes).reshape(-1, 2) * phases[:, None]
        return PureState(3, amps.reshape(-1))

    a = diag(oracle_apply(s, marked))
    b = oracle_apply(diag(s), marked)
    assert np.abs(a.amplitudes - b.amplitudes).max() <= 1e-15


def test_post_oracle_support_counts():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(0, 2**n + 1))
        marked = MarkedSet(n, rng.choice(2**n, size=m, replace=False))
        state = oracle_apply(uniform_state(n), marked)
        assert len(flagged(state)) == m
        assert len(support(state)) == 2**n


def test_restricted_oracle_known_msq():
    # Known qubit 4, pattern 010 over qubits 1..3: full-width hits 2 and 10.
    state = restricted_oracle_apply(uniform_state(4), MarkedSet(3, [0b010]), [4])
    assert flagged(state) == [2, 10]


def test_restricted_oracle_with_no_known_qubits_matches_plain():
    s = uniform_state(3)
    marked = MarkedSet(3, [1, 4])
    a = restricted_oracle_apply(s, marked, [])
    b = oracle_apply(s, marked)
    assert np.abs(a.amplitudes - b.amplitudes).max() == 0.0


def test_restricted_oracle_brute_force_middle_bits():
    # Active qubits 2 and 3, restricted pattern 10 (= 2): brute-force check.
    state = restricted_oracle_apply(uniform_state(4), MarkedSet(2, [0b10]), [1, 4])
    expect = [y for y in range(16) if ((y >> 1) & 1, (y >> 2) & 1) == (0, 1)]
    assert flagged(state) == expect
    assert len(expect) == 4


def test_restricted_oracle_validation():
    with pytest.raises(ValidationError):
        restricted_oracle_apply(uniform_state(4), MarkedSet(3, [0]), [4, 4])
    with pytest.raises(ValidationError):
        restricted_oracle_apply(uniform_state(4), MarkedSet(2, [0]), [4])
    with pytest.raises(ValidationError):
        restricted_oracle_apply(uniform_state(4), MarkedSet(3, [0]), [5])


def test_oracle_width_mismatch():
    with pytest.raises(ValidationError):
        oracle_apply(uniform_state(3), MarkedSet(4, [2]))
