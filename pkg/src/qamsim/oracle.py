"""Flag-marking oracle: flips the flag qubit on marked register values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .qstate import PureState


@dataclass(frozen=True)
class MarkedSet:
    """Distinct register values in [0, 2^n) for which the oracle answers 1."""

    n: int
    values: tuple

    def __init__(self, n: int, values):
        vals = sorted(int(v) for v in values)
        if len(set(vals)) != len(vals):
            raise ValidationError("marked values must be distinct")
        if vals and not (0 <= vals[0] and vals[-1] < 2**n):
            raise ValidationError(f"marked values must lie in [0, 2^{n})")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "values", tuple(vals))

    @property
    def m(self) -> int:
        return len(self.values)

    @classmethod
    def parse(cls, n: int, text: str) -> "MarkedSet":
        """Parse comma-separated integers or width-n binary strings."""
        return cls(n, parse_values(text, n))


def parse_values(text: str, width: int):
    """Comma-separated values; a token of exactly ``width`` 0/1 chars is
    read as binary, anything else as a decimal integer."""
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if len(token) == width and set(token) <= {"0", "1"}:
            out.append(int(token, 2))
        else:
            try:
                out.append(int(token))
            except ValueError as exc:
                raise ValidationError(f"cannot parse value {token!r}") from exc
    return out


def _flip_flag(state: PureState, flip_mask: np.ndarray) -> PureState:
    amps = np.array(state.amplitudes)
    vals = np.flatnonzero(flip_mask)
    amps[2 * vals], amps[2 * vals + 1] = state.amplitudes[2 * vals + 1], state.amplitudes[2 * vals]
    return PureState(state.n, amps)


def oracle_apply(state: PureState, marked: MarkedSet) -> PureState:
    """XOR the flag with membership of the register value in ``marked``."""
    if marked.n != state.n:
        raise ValidationError(f"marked set width {marked.n} != state width {state.n}")
    flip = np.zeros(2**state.n, dtype=bool)
    flip[list(marked.values)] = True
    return _flip_flag(state, flip)


def restricted_oracle_apply(state: PureState, marked: MarkedSet, known_qubits) -> PureState:
    """Oracle acting only on the qubits not listed in ``known_qubits``.

    ``marked`` is given over the (n - t) active qubits in ascending qubit
    order; the flag is flipped whenever the restriction of the register
    value to the active qubits lies in ``marked``, regardless of the known
    qubits' value.
    """
    n = state.n
    known = sorted(int(q) for q in known_qubits)
    if len(set(known)) != len(known):
        raise ValidationError("known qubit indices must be distinct")
    if known and not (1 <= known[0] and known[-1] <= n):
        raise ValidationError(f"known qubit indices must lie in 1..{n}")
    active = [q for q in range(1, n + 1) if q not in known]
    if marked.n != len(active):
        raise ValidationError(
            f"marked set width {marked.n} != active subspace width {len(active)}"
        )
    ys = np.arange(2**n)
    restriction = np.zeros_like(ys)
    for i, q in enumerate(active):
        restriction |= ((ys >> (q - 1)) & 1) << i
    flip = np.isin(restriction, marked.values)
    return _flip_flag(state, flip)
