"""Single-qubit Kraus channels and fidelity analysis of the noisy sweep.

Noise is modeled as striking each register qubit once, right after the
Hadamard inside the evolution step, with the flag qubit noise-free.  The
register density after the sweep is then a tensor product of per-qubit
factors K_j(W|0><0|W), and the fidelity against the ideal per-qubit states
|phi_j> = alpha|0> + beta|1> reduces to closed-form factors:

    bit flip            tau1 = (1 + x) / 2                       x = 2 Re(conj(a) b)
    phase / bit-phase   tau2 = tau3 = (1 + x (1 - 2 eta)) / 2
    amplitude damping   tau4 = (1 + (|a|^2 - |b|^2) eta + x sqrt(1 - eta)) / 2
    phase damping       tau5 = (1 + x sqrt(1 - eta)) / 2
    depolarizing        tau6 = (1 + x (1 - 4 eta / 3)) / 2

The pure-vs-mixed fidelity is F0 = sqrt(<psi|rho|psi>) = prod(tau_j)^(1/2);
the general fidelity is F1(sigma, gamma) = tr sqrt(sqrt(sigma) gamma
sqrt(sigma)), computed via Hermitian eigendecompositions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .memory import build_storage, build_s, target_from_values
from .retrieval import RetrievalConfig, expand_restricted_values

_SQRT2_INV = 1.0 / np.sqrt(2.0)

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)

#: Per-qubit input density W|0><0|W of the noisy-sweep model.
PLUS_DENSITY = 0.5 * np.ones((2, 2), dtype=complex)

COMPLETENESS_TOL = 1e-12


class ChannelKind(enum.Enum):
    BIT_FLIP = "bit_flip"
    PHASE_FLIP = "phase_flip"
    BIT_PHASE_FLIP = "bit_phase_flip"
    AMPLITUDE_DAMPING = "amplitude_damping"
    PHASE_DAMPING = "phase_damping"
    DEPOLARIZING = "depolarizing"


@dataclass(frozen=True)
class KrausChannel:
    """A completely positive trace-preserving map given by 2x2 operators."""

    kind: ChannelKind
    eta: float
    operators: tuple

    def completeness_residual(self) -> float:
        acc = sum(e.conj().T @ e for e in self.operators)
        return float(np.abs(acc - _I2).max())


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"noise probability eta={eta} must lie in [0, 1]")
    return eta


def make_channel(kind: ChannelKind, eta: float) -> KrausChannel:
    """Kraus operators of the six tabulated single-qubit channels.

    The amplitude-damping set uses the lowering operator sqrt(eta)|0><1|,
    which is the variant consistent with both the channel's tabulated
    output density and its tau closed form (see consistency_report).
    """
    kind = ChannelKind(kind)
    eta = _check_eta(eta)
    s, d = np.sqrt(1.0 - eta), np.sqrt(eta)
    if kind is ChannelKind.BIT_FLIP:
        ops = (s * _I2, d * _X)
    elif kind is ChannelKind.PHASE_FLIP:
        ops = (s * _I2, d * _Z)
    elif kind is ChannelKind.BIT_PHASE_FLIP:
        ops = (s * _I2, d * _Y)
    elif kind is ChannelKind.AMPLITUDE_DAMPING:
        ops = (np.diag([1.0, s]).astype(complex), d * np.array([[0, 1], [0, 0]], dtype=complex))
    elif kind is ChannelKind.PHASE_DAMPING:
        ops = (np.diag([1.0, s]).astype(complex), d * np.array([[0, 0], [0, 1]], dtype=complex))
    else:
        q = np.sqrt(eta / 3.0)
        ops = (s * _I2, q * _X, q * _Y, q * _Z)
    ops = tuple(o.copy() for o in ops)
    for o in ops:
        o.setflags(write=False)
    return KrausChannel(kind, eta, ops)


def amplitude_damping_raising_variant(eta: float) -> KrausChannel:
    """Damping set with the direction reversed (|0> decays toward |1>).

    Kept only for the validation report: this variant is not
    trace-preserving (sum E^dag E = diag(1 + eta, 1 - eta)).
    """
    eta = _check_eta(eta)
    ops = (
        np.diag([1.0, np.sqrt(1.0 - eta)]).astype(complex),
        np.sqrt(eta) * np.array([[0, 0], [1, 0]], dtype=complex),
    )
    return KrausChannel(ChannelKind.AMPLITUDE_DAMPING, eta, ops)


def apply_channel(rho: np.ndarray, channel: KrausChannel) -> np.ndarray:
    """sum_i E_i rho E_i^dag."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValidationError(f"expected a 2x2 density matrix, got shape {rho.shape}")
    out = np.zeros((2, 2), dtype=complex)
    for e in channel.operators:
        out += e @ rho @ e.conj().T
    return out


def _check_amplitudes(alpha: complex, beta: complex):
    a, b = complex(alpha), complex(beta)
    if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > 1e-10:
        raise ValidationError("(alpha, beta) must satisfy |alpha|^2 + |beta|^2 = 1")
    return a, b


def tau(kind: ChannelKind, alpha: complex, beta: complex, eta: float) -> float:
    """Closed-form overlap <phi| K(W|0><0|W) |phi> for phi = alpha|0> + beta|1>."""
    kind = ChannelKind(kind)
    eta = _check_eta(eta)
    a, b = _check_amplitudes(alpha, beta)
    x = 2.0 * (np.conj(a) * b).real
    if kind is ChannelKind.BIT_FLIP:
        return 0.5 * (1.0 + x)
    if kind in (ChannelKind.PHASE_FLIP, ChannelKind.BIT_PHASE_FLIP):
        return 0.5 * (1.0 + x * (1.0 - 2.0 * eta))
    if kind is ChannelKind.AMPLITUDE_DAMPING:
        return 0.5 * (1.0 + (abs(a) ** 2 - abs(b) ** 2) * eta + x * np.sqrt(1.0 - eta))
    if kind is ChannelKind.PHASE_DAMPING:
        return 0.5 * (1.0 + x * np.sqrt(1.0 - eta))
    return 0.5 * (1.0 + x * (1.0 - 4.0 * eta / 3.0))


def tabulated_plus_output(kind: ChannelKind, eta: float) -> np.ndarray:
    """Expected K(|+><+|) in closed form, used to cross-check apply_channel."""
    kind = ChannelKind(kind)
    eta = _check_eta(eta)
    if kind is ChannelKind.BIT_FLIP:
        off, diag0, diag1 = 1.0, 1.0, 1.0
    elif kind in (ChannelKind.PHASE_FLIP, ChannelKind.BIT_PHASE_FLIP):
        off, diag0, diag1 = 1.0 - 2.0 * eta, 1.0, 1.0
    elif kind is ChannelKind.AMPLITUDE_DAMPING:
        off, diag0, diag1 = np.sqrt(1.0 - eta), 1.0 + eta, 1.0 - eta
    elif kind is ChannelKind.PHASE_DAMPING:
        off, diag0, diag1 = np.sqrt(1.0 - eta), 1.0, 1.0
    else:
        off, diag0, diag1 = 1.0 - 4.0 * eta / 3.0, 1.0, 1.0
    return 0.5 * np.array([[diag0, off], [off, diag1]], dtype=complex)


def fidelity_f0(
    kind: ChannelKind,
    eta: float,
    n: int,
    alpha: complex = _SQRT2_INV,
    beta: complex = _SQRT2_INV,
) -> float:
    """F0 = tau^(n/2) for n qubits hit by identical independent noise."""
    n = int(n)
    if n < 1:
        raise ValidationError("n must be >= 1")
    return float(tau(kind, alpha, beta, eta) ** (n / 2.0))


def fidelity_f0_per_qubit(specs) -> float:
    """F0 = (prod tau_j)^(1/2) for per-qubit (kind, eta, alpha, beta) specs."""
    acc = 1.0
    for kind, eta, alpha, beta in specs:
        acc *= tau(kind, alpha, beta, eta)
    return float(np.sqrt(acc))


def noisy_nle_density(n: int, channels) -> list:
    """Per-qubit register densities after the noisy sweep.

    ``channels`` is one channel for all qubits or a sequence of n channels
    (index 0 = qubit 1).  Factor j is channel_j applied to W|0><0|W; the
    flag qubit carries no noise.
    """
    n = int(n)
    if isinstance(channels, KrausChannel):
        channels = [channels] * n
    channels = list(channels)
    if len(channels) != n:
        raise ValidationError(f"expected {n} channels, got {len(channels)}")
    return [apply_channel(PLUS_DENSITY, ch) for ch in channels]


def expand_product_density(factors) -> np.ndarray:
    """Dense register density from per-qubit factors (index 0 = qubit 1)."""
    factors = list(factors)
    out = factors[-1]
    for f in reversed(factors[:-1]):
        out = np.kron(out, f)
    return out


def fidelity_pure(psi, rho) -> float:
    """F0(|psi>, rho) = sqrt(<psi|rho|psi>).

    When ``rho`` is a list of per-qubit factors, ``psi`` must be the
    matching list of single-qubit vectors and the product form
    prod(<phi_j|rho_j|phi_j>)^(1/2) is used.
    """
    if isinstance(rho, (list, tuple)):
        if not isinstance(psi, (list, tuple)) or len(psi) != len(rho):
            raise ValidationError(
                "product-form rho needs psi as a matching list of single-qubit factors"
            )
        acc = 1.0
        for phi, factor in zip(psi, rho):
            phi = np.asarray(phi, dtype=complex).reshape(-1)
            if phi.size != 2 or np.asarray(factor).shape != (2, 2):
                raise ValidationError("product factors must be 2-vectors and 2x2 matrices")
            acc *= max(float((phi.conj() @ factor @ phi).real), 0.0)
        return float(np.sqrt(acc))
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise ValidationError(f"dimension mismatch: psi {psi.size}, rho {rho.shape}")
    val = float((psi.conj() @ rho @ psi).real)
    return float(np.sqrt(max(val, 0.0)))


MAX_FIDELITY_DIM = 1024


def _validate_density(mat, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValidationError(f"{name} must be a square matrix")
    if mat.shape[0] > MAX_FIDELITY_DIM:
        raise CapacityError(f"{name} dimension {mat.shape[0]} exceeds {MAX_FIDELITY_DIM}")
    if np.abs(mat - mat.conj().T).max() > 1e-10:
        raise ValidationError(f"{name} is not Hermitian")
    if abs(np.trace(mat).real - 1.0) > 1e-10:
        raise ValidationError(f"{name} does not have unit trace")
    if float(np.linalg.eigvalsh(mat).min()) < -1e-12:
        raise ValidationError(f"{name} is not positive semidefinite")
    return mat


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    # Eigenvalues below the numerical floor are zeroed: the square root
    # would otherwise amplify +-1e-16 noise into 1e-8 spectral garbage.
    w, v = np.linalg.eigh(mat)
    floor = mat.shape[0] * np.finfo(float).eps * max(float(w[-1]), 0.0)
    w = np.where(w > floor, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity_general(sigma, gamma) -> float:
    """F1(sigma, gamma) = tr sqrt(sqrt(sigma) gamma sqrt(sigma)), in [0, 1].

    Evaluated as the nuclear norm of sqrt(sigma) sqrt(gamma): the singular
    values are the square roots of the eigenvalues of the textbook matrix,
    and SVD keeps near-zero modes first-order accurate.
    """
    sigma = _validate_density(sigma, "sigma")
    gamma = _validate_density(gamma, "gamma")
    if sigma.shape != gamma.shape:
        raise ValidationError("density matrices must have equal dimension")
    product = _sqrtm_psd(sigma) @ _sqrtm_psd(gamma)
    value = float(np.linalg.svd(product, compute_uv=False).sum())
    return float(np.clip(value, 0.0, 1.0))


def noisy_retrieval_fidelity(config: RetrievalConfig, channel: KrausChannel) -> float:
    """F1 between the ideal retrieval output and the noisy-sweep output.

    The register density after the noisy sweep is expanded to its dense
    2^n x 2^n form, conjugated by the storage inverse and the
    swap-reflection, and compared against the ideal pure output.  The
    product noise model assumes the uniform register preparation, so this
    is meaningful for full-pattern configurations; the dense path is
    capped at n <= 8.
    """
    n = int(config.n)
    if n > 8:
        raise CapacityError(f"noisy retrieval fidelity is capped at n <= 8 (got n={n})")
    patterns = tuple(config.patterns) if config.patterns is not None else tuple(range(2**n))
    if config.x_values is not None:
        x_vals = config.x_values
    elif config.known_bits:
        x_vals = expand_restricted_values(n, config.marked, config.known_bits)
    else:
        x_vals = config.marked
    x = target_from_values(n, x_vals)
    rho = expand_product_density(noisy_nle_density(n, channel))
    b = build_storage(patterns, n, config.z).storage_unitary
    s = build_s(config.z, x, n)
    conj = s @ b.conj().T
    gamma = conj @ rho @ conj.conj().T
    sigma = np.outer(x, x.conj())
    return fidelity_general(sigma, gamma)


@dataclass(frozen=True)
class ConsistencyCheck:
    channel: str
    check: str
    residual: float
    ok: bool


def consistency_report(etas=None, samples: int = 200, seed: int = 7) -> list:
    """Cross-check Kraus sets, closed-form output densities and tau forms.

    For every channel: completeness of the Kraus set, agreement of
    apply_channel with the tabulated |+> output density, and agreement of
    the tau closed form with the matrix-level overlap.  The reversed
    amplitude-damping variant is checked to violate completeness, which
    documents why the lowering operator is the implemented one.
    """
    if etas is None:
        etas = np.linspace(0.0, 1.0, 11)
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(samples, 2)) + 1j * rng.normal(size=(samples, 2))
    phis = raw / np.linalg.norm(raw, axis=1)[:, None]
    checks: list[ConsistencyCheck] = []
    for kind in ChannelKind:
        comp = max(make_channel(kind, e).completeness_residual() for e in etas)
        checks.append(ConsistencyCheck(kind.value, "kraus completeness", comp, comp <= COMPLETENESS_TOL))
        dens = max(
            float(np.abs(apply_channel(PLUS_DENSITY, make_channel(kind, e)) - tabulated_plus_output(kind, e)).max())
            for e in etas
        )
        checks.append(ConsistencyCheck(kind.value, "tabulated output density", dens, dens <= COMPLETENESS_TOL))
        worst = 0.0
        for e in etas:
            rho_out = apply_channel(PLUS_DENSITY, make_channel(kind, e))
            overlaps = np.einsum("si,ij,sj->s", phis.conj(), rho_out, phis).real
            closed = np.array([tau(kind, a, b, e) for a, b in phis])
            worst = max(worst, float(np.abs(overlaps - closed).max()))
        checks.append(ConsistencyCheck(kind.value, "tau closed form", worst, worst <= COMPLETENESS_TOL))
    reversed_resid = max(
        amplitude_damping_raising_variant(e).completeness_residual() for e in etas
    )
    checks.append(
        ConsistencyCheck(
            "amplitude_damping (reversed variant)",
            "completeness violated as expected",
            reversed_resid,
            reversed_resid > 0.5,
        )
    )
    return checks
