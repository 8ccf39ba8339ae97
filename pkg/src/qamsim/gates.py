"""Gate zoo and the two interchangeable nonlinear-evolution (NLE) step
implementations.

One NLE step acts on the pair (register qubit j, flag).  For every
assignment of the remaining register qubits the conditional pair state is
one of a handful of canonical two-qubit patterns; the step sends it through
the mixer ``U``, a nonlinear flag gate that collapses the pair onto the
register-|0> branch, a second nonlinear flag gate (``M`` or ``Pi``)
rotating the flag onto a basis state, and finally ``W`` on the register
qubit and ``X`` on the flag.

On uniform-support states whose flag is a function of the register value,
the net effect per pair {y, y XOR 2^(j-1)} is simply OR-ing the two flag
bits.  ``nle_step_or`` implements that rule directly; ``nle_step_casewise``
carries out the per-pair evolution.  ``or_casewise_equivalence`` sweeps
both over oracle-reachable states and reports the worst disagreement.
"""

from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np

from .errors import NonlinearSemanticsError, ValidationError
from .oracle import MarkedSet, oracle_apply
from .qstate import NORM_TOL, PureState, uniform_state

#: Matching tolerance for classifying conditional pair states.
CLASSIFY_TOL = 1e-9

_SQRT2_INV = 1.0 / np.sqrt(2.0)

_GAMMA_CHOICES = (1.0, -1.0, 1.0j, -1.0j)


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV


def not_gate() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=complex)


def u_gate() -> np.ndarray:
    """Two-qubit mixer applied to (register qubit, flag) at the start of a step."""
    return (
        np.array(
            [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1, -1, 0], [1, 0, 0, -1]],
            dtype=complex,
        )
        * _SQRT2_INV
    )


def _check_pair_params(a: complex, b: complex, gamma: complex, sign: int):
    a, b = complex(a), complex(b)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise ValidationError("(alpha, beta) must satisfy |alpha|^2 + |beta|^2 = 1")
    gamma = complex(gamma)
    if not any(abs(gamma - g) <= 1e-12 for g in _GAMMA_CHOICES):
        raise ValidationError("gamma must be one of +1, -1, +i, -i")
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1")
    return a, b, gamma, int(sign)


def m_matrix(alpha: complex, beta: complex, gamma: complex = 1.0, sign: int = 1) -> np.ndarray:
    """Unitary sending alpha|0> + beta|1> onto |1> (exactly, phase-free).

    Top row carries -sign*gamma*beta and +sign*gamma*alpha; bottom row the
    conjugated input coefficients, so the image of the input state has zero
    overlap with |0>.
    """
    a, b, g, s = _check_pair_params(alpha, beta, gamma, sign)
    return np.array([[-s * g * b, s * g * a], [np.conj(a), np.conj(b)]], dtype=complex)


def pi_matrix(delta: complex, epsilon: complex, gamma: complex = 1.0, sign: int = 1) -> np.ndarray:
    """Unitary sending delta|0> + epsilon|1> onto |0> (exactly, phase-free)."""
    d, e, g, s = _check_pair_params(delta, epsilon, gamma, sign)
    return np.array([[np.conj(d), np.conj(e)], [-s * g * e, s * g * d]], dtype=complex)


def v_matrix(alpha: complex, beta: complex) -> np.ndarray:
    """Non-unitary counterexample matrix [[1, 1/beta], [0, -alpha/beta]].

    Built without any unitarity check; ``beta`` must be nonzero.
    """
    a, b = complex(alpha), complex(beta)
    if b == 0:
        raise ZeroDivisionError("v_matrix requires beta != 0")
    return np.array([[1.0, 1.0 / b], [0.0, -a / b]], dtype=complex)


class NlePairCase(enum.Enum):
    """Canonical conditional states of a (register qubit, flag) pair."""

    CASE_00_10 = "00+10"
    CASE_10_01 = "10+01"
    CASE_00_11 = "00+11"
    CASE_01_11 = "01+11"
    UNIFORM_ALL = "00+01+10+11"
    UNMATCHED = "unmatched"


# Support bitmask over flat pair index 2*l + k -> case.
_CASE_BY_MASK = {
    0b0101: NlePairCase.CASE_00_10,
    0b0110: NlePairCase.CASE_10_01,
    0b1001: NlePairCase.CASE_00_11,
    0b1010: NlePairCase.CASE_01_11,
    0b1111: NlePairCase.UNIFORM_ALL,
}

_VALID_MASK = np.zeros(16, dtype=bool)
_VALID_MASK[list(_CASE_BY_MASK)] = True

_MASK_WEIGHTS = 1 << np.arange(4)

_CASE_INPUT = {
    NlePairCase.CASE_00_10: np.array([1, 0, 1, 0], dtype=complex) * _SQRT2_INV,
    NlePairCase.CASE_10_01: np.array([0, 1, 1, 0], dtype=complex) * _SQRT2_INV,
    NlePairCase.CASE_00_11: np.array([1, 0, 0, 1], dtype=complex) * _SQRT2_INV,
    NlePairCase.CASE_01_11: np.array([0, 1, 0, 1], dtype=complex) * _SQRT2_INV,
    NlePairCase.UNIFORM_ALL: np.array([1, 1, 1, 1], dtype=complex) / 2.0,
}


def _classify_batch(vecs: np.ndarray, tol: float):
    """Classify rows of a (g, 4) array; returns (masks, matched)."""
    mags = np.abs(vecs)
    ref = vecs[np.arange(vecs.shape[0]), np.argmax(mags, axis=1)]
    canon = vecs * (np.abs(ref) / ref)[:, None]
    supp = mags > tol
    counts = np.maximum(supp.sum(axis=1), 1)
    ideal = supp / np.sqrt(counts)[:, None]
    matched = np.abs(canon - ideal).max(axis=1) <= tol
    masks = supp @ _MASK_WEIGHTS
    matched &= _VALID_MASK[masks]
    return masks, matched


def classify_pair(conditional, tol: float = CLASSIFY_TOL) -> NlePairCase:
    """Match a normalized 4-amplitude conditional pair state to its case.

    Comparison is up to uniform amplitude and global phase; an all-zero
    input yields UNMATCHED.
    """
    v = np.asarray(conditional, dtype=complex).reshape(-1)
    if v.size != 4:
        raise ValidationError("conditional pair state must have 4 amplitudes")
    nrm = float(np.linalg.norm(v))
    if nrm <= tol:
        return NlePairCase.UNMATCHED
    masks, matched = _classify_batch((v / nrm)[None, :], tol)
    if not matched[0]:
        return NlePairCase.UNMATCHED
    return _CASE_BY_MASK[int(masks[0])]


def default_nl_minus_choice(case: NlePairCase):
    """Default resolution of the underdetermined collapse amplitudes."""
    return (_SQRT2_INV, _SQRT2_INV)


_DEFAULT_RESOLVED = tuple(
    (complex(_SQRT2_INV), complex(_SQRT2_INV)) for _ in _CASE_BY_MASK
)


@lru_cache(maxsize=None)
def _case_lookup(resolved: tuple, gamma: complex, sign: int) -> np.ndarray:
    """Rows of the per-mask output table for the resolved collapse choices."""
    table = np.zeros((16, 4), dtype=complex)
    for (mask, case), (a, b) in zip(_CASE_BY_MASK.items(), resolved):
        table[mask] = _pair_case_output(case, a, b, gamma, sign)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def _pair_case_output(case: NlePairCase, a: complex, b: complex, gamma: complex, sign: int) -> np.ndarray:
    """Run one canonical pair through U, the nonlinear gates, and W (x) X."""
    v = _CASE_INPUT[case]
    u = u_gate() @ v
    eye = np.eye(2, dtype=complex)
    if case is NlePairCase.CASE_10_01:
        # u = |01>; the collapse gate acts as X on the flag, second gate idle.
        assert np.abs(u - [0, 1, 0, 0]).max() < 1e-12
        w = np.kron(eye, not_gate()) @ u
    elif case is NlePairCase.CASE_00_11:
        # u = |00>; both nonlinear gates act as the identity.
        assert np.abs(u - [1, 0, 0, 0]).max() < 1e-12
        w = u
    else:
        # Pair collapses onto the register-|0> branch with flag a|0> + b|1>;
        # the second gate rotates the flag onto |1> (M) or |0> (Pi).
        w = np.array([a, b, 0, 0], dtype=complex)
        rot = m_matrix(a, b, gamma, sign) if case is NlePairCase.CASE_00_10 else pi_matrix(a, b, gamma, sign)
        w = np.kron(eye, rot) @ w
    out = np.kron(hadamard(), not_gate()) @ w
    out.setflags(write=False)
    return out


def _pair_axes(state: PureState, j: int):
    if not isinstance(j, (int, np.integer)) or not 1 <= j <= state.n:
        raise IndexError(f"register qubit index {j!r} invalid; expected 1..{state.n}")
    n = state.n
    # Axis of register bit j is n - j; the flag already sits on the last axis.
    moved = np.moveaxis(state.amplitudes.reshape([2] * (n + 1)), n - j, n - 1)
    return moved, int(j)


def nle_step_or(state: PureState, j: int) -> PureState:
    """One NLE step via the induced flag-spreading rule.

    Requires uniform-magnitude support with at most one flag value per
    register value; the new flag of ``y`` is the OR of the flags of ``y``
    and ``y XOR 2^(j-1)``, amplitudes stay uniform with +1 phases.
    """
    if not isinstance(j, (int, np.integer)) or not 1 <= j <= state.n:
        raise IndexError(f"register qubit index {j!r} invalid; expected 1..{state.n}")
    n = state.n
    mags = np.abs(state.amplitudes)
    idx = np.flatnonzero(mags > CLASSIFY_TOL * mags.max())
    vals = mags[idx]
    if vals.max() - vals.min() > CLASSIFY_TOL * vals.max():
        raise NonlinearSemanticsError(
            "support magnitudes are not uniform; use nle_step_casewise"
        )
    y = idx >> 1
    size = 2**n
    counts = np.bincount(y, minlength=size)
    if counts.max() > 1:
        raise NonlinearSemanticsError(
            "some register value carries both flag values; use nle_step_casewise"
        )
    present = counts.astype(bool)
    flags = np.zeros(size, dtype=np.uint8)
    flags[y] = idx & 1
    partners = y ^ (1 << (j - 1))
    partner_flags = np.where(present[partners], flags[partners], 0)
    out = np.zeros(2 * size, dtype=complex)
    out[2 * y + (flags[y] | partner_flags)] = 1.0 / np.sqrt(y.size)
    return PureState(n, out)


def nle_step_casewise(
    state: PureState,
    j: int,
    nl_minus_choice=None,
    gamma: complex = 1.0,
    sign: int = 1,
) -> PureState:
    """One NLE step by per-pair case evolution.

    Every (register qubit j, flag) conditional with nonzero weight must
    classify to a known :class:`NlePairCase`; empty pairs are untouched.
    ``nl_minus_choice`` maps a case to the (alpha, beta) collapse
    amplitudes and defaults to (1/sqrt2, 1/sqrt2); the final output is
    independent of this choice.
    """
    resolver = nl_minus_choice or default_nl_minus_choice
    moved, j = _pair_axes(state, j)
    head = moved.shape
    vecs = moved.reshape(-1, 4)
    norms = np.sqrt(np.einsum("gi,gi->g", vecs.conj(), vecs).real)
    active = norms > NORM_TOL
    out = np.array(vecs)
    if np.any(active):
        unit = vecs[active] / norms[active, None]
        masks, matched = _classify_batch(unit, CLASSIFY_TOL)
        if not matched.all():
            bad = np.flatnonzero(active)[np.flatnonzero(~matched)]
            detail = "; ".join(
                f"pair group {g}: amplitudes {np.round(vecs[g], 6).tolist()}" for g in bad[:4]
            )
            raise NonlinearSemanticsError(
                f"unmatched conditional pair state(s) on qubit {j}: {detail}"
            )
        if resolver is default_nl_minus_choice:
            resolved = _DEFAULT_RESOLVED
        else:
            resolved = tuple(
                tuple(complex(v) for v in resolver(case)) for case in _CASE_BY_MASK.values()
            )
        lookup = _case_lookup(resolved, complex(gamma), int(sign))
        out[active] = norms[active, None] * lookup[masks]
    restored = np.moveaxis(out.reshape(head), state.n - 1, state.n - j).reshape(-1)
    restored = restored / np.linalg.norm(restored)
    return PureState(state.n, restored)


def or_casewise_equivalence(
    exhaustive_max_n: int = 4,
    random_cases: int = 1000,
    random_max_n: int = 8,
    seed: int = 20240814,
):
    """Sweep both NLE implementations over oracle-reachable states.

    Exhausts every marked set for n <= exhaustive_max_n and adds
    ``random_cases`` random (n, marked set) instances up to
    ``random_max_n``; every instance is swept over all register qubits
    with the states compared after each step.  Identical intermediate
    flag patterns are checked once per (qubit, pattern), which covers the
    same comparisons without redundant work.  Returns (cases, max_diff).
    """
    worst = 0.0
    cases = 0
    for n in range(1, exhaustive_max_n + 1):
        size = 2**n
        masks = range(2**size)
        for j in range(1, n + 1):
            next_masks = set()
            for mask in masks:
                diff, out_mask = _compare_step(n, mask, j)
                worst = max(worst, diff)
                next_masks.add(out_mask)
            masks = sorted(next_masks)
        cases += 2**size
    rng = np.random.default_rng(seed)
    for _ in range(random_cases):
        n = int(rng.integers(1, random_max_n + 1))
        size = 2**n
        marked = [v for v in range(size) if rng.random() < 0.5]
        state = oracle_apply(uniform_state(n), MarkedSet(n, marked))
        for j in range(1, n + 1):
            s_or = nle_step_or(state, j)
            s_cw = nle_step_casewise(state, j)
            worst = max(worst, float(np.abs(s_or.amplitudes - s_cw.amplitudes).max()))
            state = s_or
        cases += 1
    return cases, worst


def _compare_step(n: int, mask: int, j: int):
    """Run both implementations on the full-support state with the given
    flag pattern; returns (max difference, output flag pattern)."""
    size = 2**n
    ys = np.arange(size)
    flags = (mask >> ys) & 1
    amps = np.zeros(2 * size, dtype=complex)
    amps[2 * ys + flags] = 1.0 / np.sqrt(size)
    state = PureState(n, amps)
    s_or = nle_step_or(state, j)
    s_cw = nle_step_casewise(state, j)
    diff = float(np.abs(s_or.amplitudes - s_cw.amplitudes).max())
    out_flags = (np.flatnonzero(np.abs(s_or.amplitudes) > 0.5 / np.sqrt(size)) & 1).astype(np.int64)
    out_mask = int((out_flags << ys).sum())
    return diff, out_mask
