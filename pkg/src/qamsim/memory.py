"""Pattern storage and the conditional retrieval operators.

The storage operator is any unitary sending the source basis state |z> to
the uniform superposition of the stored patterns; it is realized here as a
Householder reflection through (target - e_z), which is Hermitian and
involutive, so the operator equals its own inverse.  The swap-reflection S
exchanges |z> with the sought state |x> and fixes their orthogonal
complement; CS applies S on the register only where the flag is |1>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ValidationError
from .qstate import PureState

#: Dense 2^n x 2^n matrices are only materialized up to this register size.
MAX_DENSE_QUBITS = 12


@dataclass(frozen=True)
class PatternStore:
    """Storage operator data: patterns, source state z, reflection vector.

    ``householder`` is None when the operator is the identity (single
    pattern equal to z); the dense ``storage_unitary`` is built on demand.
    """

    n: int
    patterns: tuple
    z: int
    householder: np.ndarray | None = field(repr=False)

    @property
    def p(self) -> int:
        return len(self.patterns)

    @property
    def storage_unitary(self) -> np.ndarray:
        if self.n > MAX_DENSE_QUBITS:
            raise CapacityError(
                f"dense storage matrix capped at n <= {MAX_DENSE_QUBITS} (got n={self.n})"
            )
        size = 2**self.n
        if self.householder is None:
            return np.eye(size, dtype=complex)
        w = self.householder
        return np.eye(size, dtype=complex) - 2.0 * np.outer(w, w.conj()) / np.vdot(w, w).real


def build_storage(patterns, n: int, z: int = 0) -> PatternStore:
    """Build a storage operator with column z equal to the pattern superposition."""
    vals = sorted(int(v) for v in patterns)
    if not vals:
        raise ValidationError("pattern list must be non-empty")
    if len(set(vals)) != len(vals):
        raise ValidationError("patterns must be distinct")
    size = 2**n
    if not (0 <= vals[0] and vals[-1] < size):
        raise ValidationError(f"patterns must lie in [0, 2^{n})")
    z = int(z)
    if not 0 <= z < size:
        raise ValidationError(f"source state z={z} out of range for n={n}")
    target = np.zeros(size, dtype=complex)
    target[vals] = 1.0 / np.sqrt(len(vals))
    if abs(target[z] - 1.0) < 1e-15:
        return PatternStore(n, tuple(vals), z, None)
    w = target.copy()
    w[z] -= 1.0
    return PatternStore(n, tuple(vals), z, w)


def _reflect(vec: np.ndarray, w: np.ndarray | None) -> np.ndarray:
    if w is None:
        return vec
    return vec - (2.0 * (w.conj() @ vec) / np.vdot(w, w).real) * w


def apply_storage(state: PureState, store: PatternStore) -> PureState:
    """Apply the storage unitary to the register, both flag branches."""
    if store.n != state.n:
        raise ValidationError(f"store width {store.n} != state width {state.n}")
    cols = state.amplitudes.reshape(-1, 2).copy()
    cols[:, 0] = _reflect(cols[:, 0].copy(), store.householder)
    cols[:, 1] = _reflect(cols[:, 1].copy(), store.householder)
    return PureState(state.n, cols.reshape(-1))


def apply_storage_inverse_conditional(state: PureState, store: PatternStore) -> PureState:
    """Apply the storage inverse to the register on the flag-|1> branch only."""
    if store.n != state.n:
        raise ValidationError(f"store width {store.n} != state width {state.n}")
    cols = state.amplitudes.reshape(-1, 2).copy()
    # The Householder reflection is Hermitian and involutive: inverse = itself.
    cols[:, 1] = _reflect(cols[:, 1].copy(), store.householder)
    return PureState(state.n, cols.reshape(-1))


def target_from_values(n: int, values) -> np.ndarray:
    """Uniform superposition over the given register values, as a vector."""
    vals = sorted(int(v) for v in values)
    if not vals:
        raise ValidationError("sought value list must be non-empty")
    if len(set(vals)) != len(vals):
        raise ValidationError("sought values must be distinct")
    size = 2**n
    if not (0 <= vals[0] and vals[-1] < size):
        raise ValidationError(f"sought values must lie in [0, 2^{n})")
    x = np.zeros(size, dtype=complex)
    x[vals] = 1.0 / np.sqrt(len(vals))
    return x


def _check_target(z: int, x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=complex).reshape(-1)
    size = 2**n
    if x.size != size:
        raise ValidationError(f"sought state has length {x.size}, expected {size}")
    if abs(np.vdot(x, x).real - 1.0) > 1e-12:
        raise ValidationError("sought state must be normalized")
    if not 0 <= int(z) < size:
        raise ValidationError(f"source state z={z} out of range for n={n}")
    overlap = x[int(z)]
    if abs(overlap) > 1e-12:
        raise ValidationError(
            f"sought state must be orthogonal to |z>; overlap <z|x> = {overlap!r}"
        )
    return x


def build_s(z: int, x, n: int) -> np.ndarray:
    """Dense swap-reflection with S|z> = |x>, S|x> = |z>, identity elsewhere."""
    if n > MAX_DENSE_QUBITS:
        raise CapacityError(f"dense S matrix capped at n <= {MAX_DENSE_QUBITS} (got n={n})")
    x = _check_target(z, x, n)
    size = 2**n
    e_z = np.zeros(size, dtype=complex)
    e_z[int(z)] = 1.0
    s = np.eye(size, dtype=complex)
    s -= np.outer(e_z, e_z.conj())
    s -= np.outer(x, x.conj())
    s += np.outer(x, e_z.conj())
    s += np.outer(e_z, x.conj())
    return s


def _swap_reflect(vec: np.ndarray, z: int, x: np.ndarray) -> np.ndarray:
    # S v = v + (v_z - <x|v>) x + (<x|v> - v_z) e_z, written without the matrix.
    xv = np.vdot(x, vec)
    vz = vec[z]
    out = vec + (vz - xv) * x
    out[z] += xv - vz
    return out


def cs_apply(state: PureState, z: int, x) -> PureState:
    """Map the register to the sought state on the flag-|1> branch.

    The flag-|0> component is untouched; on the flag-|1> component the
    swap-reflection S (with S|z> = |x>) acts on the register.
    """
    x = _check_target(z, x, state.n)
    cols = state.amplitudes.reshape(-1, 2).copy()
    cols[:, 1] = _swap_reflect(cols[:, 1].copy(), int(z), x)
    return PureState(state.n, cols.reshape(-1))


def storage_to_text(store: PatternStore) -> str:
    """Dump the dense storage matrix, one row per line, entries as "re,im"."""
    rows = []
    for row in store.storage_unitary:
        rows.append(" ".join(f"{c.real:.17g},{c.imag:.17g}" for c in row))
    return "\n".join(rows) + "\n"
