"""Joint pure state of an n-qubit register and one flag qubit.

Layout: the amplitude of ``|y>|k>`` (register value ``y``, flag bit ``k``)
sits at flat index ``2*y + k``, so the flag is the fastest-varying bit.
Register qubit ``j`` (1 = least significant ... n = most significant)
occupies bit ``j`` of the flat index and the flag occupies bit 0.  States
are immutable; every operation returns a new state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError

#: Qubit id of the flag qubit; register qubits are 1..n.
FLAG = 0

#: Full-vector simulation bound (2^(n+1) amplitudes kept in memory).
MAX_REGISTER_QUBITS = 24

NORM_TOL = 1e-12
UNITARY_TOL = 1e-10


class PureState:
    """Normalized amplitude vector over (register tensor flag).

    ``amplitudes`` has length ``2**(n+1)`` and is read-only; build modified
    states through the module-level operations.
    """

    __slots__ = ("n", "amplitudes")

    def __init__(self, n: int, amplitudes, *, validate: bool = True):
        n = int(n)
        if not 1 <= n <= MAX_REGISTER_QUBITS:
            raise CapacityError(
                f"register size n={n} outside supported range 1..{MAX_REGISTER_QUBITS}"
            )
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        if amps.size != 2 ** (n + 1):
            raise ValidationError(
                f"amplitude vector length {amps.size} != 2^(n+1) = {2 ** (n + 1)}"
            )
        if validate:
            norm_sq = float(np.vdot(amps, amps).real)
            if abs(norm_sq - 1.0) > NORM_TOL:
                raise ValidationError(f"state not normalized: sum |amp|^2 = {norm_sq!r}")
        amps.setflags(write=False)
        self.n = n
        self.amplitudes = amps

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def amplitude(self, y: int, k: int) -> complex:
        """Coefficient of |y>|k>."""
        return complex(self.amplitudes[2 * y + k])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        nz = int(np.count_nonzero(np.abs(self.amplitudes) > NORM_TOL))
        return f"PureState(n={self.n}, support={nz})"


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of a projective measurement.

    ``probability`` is the exact Born weight of ``value`` before collapse.
    """

    value: int
    collapsed: PureState
    probability: float


def uniform_state(n: int) -> PureState:
    """Superposition of all register values with the flag at |0>."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_REGISTER_QUBITS:
        raise CapacityError(
            f"register size n={n!r} outside supported range 1..{MAX_REGISTER_QUBITS}"
        )
    n = int(n)
    amps = np.zeros(2 ** (n + 1), dtype=complex)
    amps[0::2] = 1.0 / np.sqrt(2**n)
    return PureState(n, amps)


def from_support(n: int, support) -> PureState:
    """Uniform positive superposition over the listed (y, k) pairs."""
    pairs = list(support)
    if not pairs:
        raise ValidationError("support must be non-empty")
    if len(set(pairs)) != len(pairs):
        raise ValidationError("duplicate (register value, flag) entry in support")
    amps = np.zeros(2 ** (n + 1), dtype=complex)
    coeff = 1.0 / np.sqrt(len(pairs))
    for y, k in pairs:
        y, k = int(y), int(k)
        if not 0 <= y < 2**n:
            raise ValidationError(f"register value {y} out of range for n={n}")
        if k not in (0, 1):
            raise ValidationError(f"flag bit must be 0 or 1, got {k}")
        amps[2 * y + k] = coeff
    return PureState(n, amps)


def support(state: PureState, tol: float = NORM_TOL):
    """Sorted (y, k) pairs whose amplitude magnitude exceeds ``tol``."""
    idx = np.flatnonzero(np.abs(state.amplitudes) > tol)
    return [(int(i >> 1), int(i & 1)) for i in idx]


def _is_unitary(gate: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    eye = np.eye(gate.shape[0])
    return bool(np.abs(gate.conj().T @ gate - eye).max() <= tol)


def _check_qubit(n: int, target: int) -> int:
    if not isinstance(target, (int, np.integer)) or not 0 <= target <= n:
        raise IndexError(f"qubit id {target!r} invalid; use FLAG (=0) or 1..{n}")
    return int(target)


def _apply_on_bits(amps: np.ndarray, n: int, bits, gate: np.ndarray) -> np.ndarray:
    # Bit b of the flat index lives on axis n - b of the (n+1)-axis view.
    k = len(bits)
    axes = [n - b for b in bits]
    view = np.moveaxis(amps.reshape([2] * (n + 1)), axes, range(k))
    head = view.shape[:k]
    out = (gate @ view.reshape(2**k, -1)).reshape(head + view.shape[k:])
    return np.moveaxis(out, range(k), axes).reshape(-1)


def apply_1q(state: PureState, target: int, gate, *, check_unitary: bool = True) -> PureState:
    """Apply a 2x2 gate to one qubit (``FLAG`` or register qubit 1..n).

    ``check_unitary=False`` bypasses the unitarity check (needed for the
    non-unitary counterexample matrix); the result is then not validated
    for normalization either.
    """
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 gate, got shape {gate.shape}")
    target = _check_qubit(state.n, target)
    if check_unitary and not _is_unitary(gate):
        raise ValidationError("gate is not unitary within 1e-10 (pass check_unitary=False to bypass)")
    new = _apply_on_bits(state.amplitudes, state.n, (target,), gate)
    return PureState(state.n, new, validate=check_unitary)


def apply_2q(
    state: PureState,
    target_a: int,
    target_b: int,
    gate,
    *,
    check_unitary: bool = True,
) -> PureState:
    """Apply a 4x4 gate to the ordered qubit pair (a, b).

    ``target_a`` labels the more significant ket in the gate's basis, i.e.
    the gate acts in the basis |a b> = |00>, |01>, |10>, |11>.
    """
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 gate, got shape {gate.shape}")
    a = _check_qubit(state.n, target_a)
    b = _check_qubit(state.n, target_b)
    if a == b:
        raise ValidationError("two-qubit gate targets must be distinct")
    if check_unitary and not _is_unitary(gate):
        raise ValidationError("gate is not unitary within 1e-10 (pass check_unitary=False to bypass)")
    new = _apply_on_bits(state.amplitudes, state.n, (a, b), gate)
    return PureState(state.n, new, validate=check_unitary)


def flag_distribution(state: PureState) -> np.ndarray:
    """Exact Born probabilities [P(flag=0), P(flag=1)]."""
    cols = state.amplitudes.reshape(-1, 2)
    return np.sum(np.abs(cols) ** 2, axis=0)


def register_distribution(state: PureState) -> np.ndarray:
    """Exact Born probabilities over the 2^n register values."""
    cols = state.amplitudes.reshape(-1, 2)
    return np.sum(np.abs(cols) ** 2, axis=1)


def _collapse(state: PureState, keep: np.ndarray, prob: float) -> PureState:
    amps = np.where(keep, state.amplitudes, 0.0)
    return PureState(state.n, amps / np.sqrt(prob))


def measure_flag(state: PureState, seed=None) -> MeasurementOutcome:
    """Sample the flag qubit (Born rule, seeded and reproducible)."""
    rng = np.random.default_rng(seed)
    p0, p1 = flag_distribution(state)
    outcome = int(rng.random() < p1)
    keep = (np.arange(state.dim) & 1) == outcome
    prob = float((p0, p1)[outcome])
    return MeasurementOutcome(outcome, _collapse(state, keep, prob), prob)


def measure_register(state: PureState, seed=None) -> MeasurementOutcome:
    """Sample the full register (Born rule, seeded and reproducible)."""
    rng = np.random.default_rng(seed)
    probs = register_distribution(state)
    outcome = int(rng.choice(probs.size, p=probs / probs.sum()))
    keep = (np.arange(state.dim) >> 1) == outcome
    return MeasurementOutcome(outcome, _collapse(state, keep, float(probs[outcome])), float(probs[outcome]))


def flag_disentangled(state: PureState, tol: float = NORM_TOL):
    """Return the flag bit if the flag factors out of the state, else None.

    Returns ``b`` when every amplitude on flag value ``1-b`` has magnitude
    at most ``tol`` (so the total weight off ``b`` is bounded by
    2^n * tol^2).
    """
    cols = np.abs(state.amplitudes.reshape(-1, 2))
    if cols[:, 1].max() <= tol:
        return 0
    if cols[:, 0].max() <= tol:
        return 1
    return None


def states_allclose(a: PureState, b: PureState, tol: float = NORM_TOL) -> bool:
    """Amplitude-wise equality ignoring global phase.

    The first amplitude with magnitude above 1e-12 is rotated to the
    positive real axis in both states before comparing.
    """
    if a.n != b.n:
        return False
    return bool(np.abs(_phase_canonical(a.amplitudes) - _phase_canonical(b.amplitudes)).max() <= tol)


def _phase_canonical(amps: np.ndarray) -> np.ndarray:
    idx = np.flatnonzero(np.abs(amps) > 1e-12)
    if idx.size == 0:
        return amps
    ref = amps[idx[0]]
    return amps * (abs(ref) / ref)
