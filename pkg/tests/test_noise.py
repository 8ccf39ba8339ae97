import numpy as np
import pytest

from qamsim import (
    CapacityError,
    ChannelKind,
    RetrievalConfig,
    ValidationError,
    apply_channel,
    consistency_report,
    expand_product_density,
    fidelity_f0,
    fidelity_f0_per_qubit,
    fidelity_general,
    fidelity_pure,
    make_channel,
    noisy_nle_density,
    noisy_retrieval_fidelity,
    tau,
)
from qamsim.noise import PLUS_DENSITY, amplitude_damping_raising_variant, tabulated_plus_output

SQ = 1.0 / np.sqrt(2.0)
ETAS = np.linspace(0.0, 1.0, 11)


def random_qubit_amplitudes(rng, count):
    raw = rng.normal(size=(count, 2)) + 1j * rng.normal(size=(count, 2))
    return raw / np.linalg.norm(raw, axis=1)[:, None]


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def test_bit_flip_eta_zero_is_identity_channel():
    ch = make_channel(ChannelKind.BIT_FLIP, 0.0)
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    assert np.abs(apply_channel(rho, ch) - rho).max() <= 1e-15


def test_completeness_across_kinds_and_grid():
    worst = 0.0
    for kind in ChannelKind:
        for eta in ETAS:
            worst = max(worst, make_channel(kind, eta).completeness_residual())
    assert worst <= 1e-15


def test_amplitude_damping_full_strength_restores_ground():
    ch = make_channel(ChannelKind.AMPLITUDE_DAMPING, 1.0)
    rng = np.random.default_rng(3)
    rho = random_density(rng, 2)
    out = apply_channel(rho, ch)
    assert abs(out[0, 0].real - 1.0) <= 1e-12


def test_raising_variant_violates_completeness():
    resid = amplitude_damping_raising_variant(0.4).completeness_residual()
    assert abs(resid - 0.4) <= 1e-12


def test_channel_outputs_match_tabulated_plus_densities():
    for kind in ChannelKind:
        for eta in ETAS:
            out = apply_channel(PLUS_DENSITY, make_channel(kind, eta))
            assert np.abs(out - tabulated_plus_output(kind, eta)).max() <= 1e-12


def test_phase_flip_on_plus_input():
    eta = 0.3
    out = apply_channel(PLUS_DENSITY, make_channel(ChannelKind.PHASE_FLIP, eta))
    want = 0.5 * np.array([[1, 1 - 2 * eta], [1 - 2 * eta, 1]])
    assert np.abs(out - want).max() <= 1e-15


def test_bit_flip_leaves_plus_input():
    for eta in ETAS:
        out = apply_channel(PLUS_DENSITY, make_channel(ChannelKind.BIT_FLIP, eta))
        assert np.abs(out - PLUS_DENSITY).max() <= 1e-15


def test_channel_outputs_stay_valid_densities():
    rng = np.random.default_rng(13)
    for kind in ChannelKind:
        for eta in (0.0, 0.35, 1.0):
            ch = make_channel(kind, eta)
            rho = random_density(rng, 2)
            out = apply_channel(rho, ch)
            assert np.abs(out - out.conj().T).max() <= 1e-12
            assert abs(np.trace(out).real - 1.0) <= 1e-12
            assert np.linalg.eigvalsh(out).min() >= -1e-12


def test_eta_bounds():
    with pytest.raises(ValidationError):
        make_channel(ChannelKind.BIT_FLIP, 1.2)
    with pytest.raises(ValidationError):
        tau(ChannelKind.BIT_FLIP, SQ, SQ, -0.1)


def test_tau_examples():
    assert abs(tau(ChannelKind.BIT_FLIP, SQ, SQ, 0.77) - 1.0) <= 1e-15
    assert abs(tau(ChannelKind.PHASE_FLIP, SQ, SQ, 0.5) - 0.5) <= 1e-15
    assert abs(tau(ChannelKind.DEPOLARIZING, SQ, SQ, 0.3) - 0.8) <= 1e-15


def test_tau_matches_matrix_overlap():
    rng = np.random.default_rng(23)
    phis = random_qubit_amplitudes(rng, 300)
    worst = 0.0
    for kind in ChannelKind:
        for eta in ETAS:
            rho_out = apply_channel(PLUS_DENSITY, make_channel(kind, eta))
            overlaps = np.einsum("si,ij,sj->s", phis.conj(), rho_out, phis).real
            closed = np.array([tau(kind, a, b, eta) for a, b in phis])
            worst = max(worst, np.abs(overlaps - closed).max())
    assert worst <= 1e-12


def test_tau_rejects_unnormalized():
    with pytest.raises(ValidationError):
        tau(ChannelKind.BIT_FLIP, 1.0, 1.0, 0.5)


def test_fidelity_f0_examples():
    assert abs(fidelity_f0(ChannelKind.BIT_FLIP, 0.9, 1000) - 1.0) <= 1e-12
    assert abs(fidelity_f0(ChannelKind.PHASE_FLIP, 0.5, 10) - 0.03125) <= 1e-15
    for kind in ChannelKind:
        assert abs(fidelity_f0(kind, 0.0, 7) - 1.0) <= 1e-12


def test_fidelity_f0_monotone_and_ordered():
    etas = np.linspace(0.01, 0.99, 25)
    for kind in (
        ChannelKind.PHASE_FLIP,
        ChannelKind.BIT_PHASE_FLIP,
        ChannelKind.DEPOLARIZING,
        ChannelKind.AMPLITUDE_DAMPING,
        ChannelKind.PHASE_DAMPING,
    ):
        vals = [fidelity_f0(kind, e, 10) for e in etas]
        assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))
    for e in etas:
        flips = fidelity_f0(ChannelKind.PHASE_FLIP, e, 10)
        depol = fidelity_f0(ChannelKind.DEPOLARIZING, e, 10)
        damp = fidelity_f0(ChannelKind.AMPLITUDE_DAMPING, e, 10)
        assert flips <= depol <= damp <= 1.0


def test_fidelity_f0_per_qubit_mixed_kinds():
    specs = [
        (ChannelKind.BIT_FLIP, 0.2, SQ, SQ),
        (ChannelKind.PHASE_FLIP, 0.1, SQ, SQ),
        (ChannelKind.DEPOLARIZING, 0.3, SQ, SQ),
    ]
    want = np.sqrt(np.prod([tau(k, a, b, e) for k, e, a, b in specs]))
    assert abs(fidelity_f0_per_qubit(specs) - want) <= 1e-15


def test_noisy_nle_density_factors():
    factors = noisy_nle_density(3, make_channel(ChannelKind.BIT_FLIP, 0.6))
    for f in factors:
        assert np.abs(f - PLUS_DENSITY).max() <= 1e-15
    clean = noisy_nle_density(2, make_channel(ChannelKind.PHASE_DAMPING, 0.0))
    for f in clean:
        assert np.abs(f - PLUS_DENSITY).max() <= 1e-15


def test_fidelity_pure_noiseless_product_is_one():
    rho = noisy_nle_density(3, make_channel(ChannelKind.PHASE_FLIP, 0.0))
    assert abs(fidelity_pure([np.array([SQ, SQ])] * 3, rho) - 1.0) <= 1e-12


def test_fidelity_pure_product_form_matches_closed_form():
    kinds = [ChannelKind.PHASE_FLIP, ChannelKind.AMPLITUDE_DAMPING, ChannelKind.DEPOLARIZING]
    channels = [make_channel(k, 0.25) for k in kinds]
    rho = noisy_nle_density(3, channels)
    psi = [np.array([SQ, SQ])] * 3
    got = fidelity_pure(psi, rho)
    want = np.sqrt(np.prod([tau(k, SQ, SQ, 0.25) for k in kinds]))
    assert abs(got - want) <= 1e-12
    # and the product form agrees with the uniform closed form
    uniform = noisy_nle_density(4, make_channel(ChannelKind.PHASE_DAMPING, 0.4))
    got = fidelity_pure([np.array([SQ, SQ])] * 4, uniform)
    assert abs(got - fidelity_f0(ChannelKind.PHASE_DAMPING, 0.4, 4)) <= 1e-12


def test_fidelity_pure_dense_cases():
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    assert fidelity_pure(psi, rho) == 0.0
    assert abs(fidelity_pure(psi, np.outer(psi, psi.conj())) - 1.0) <= 1e-15
    with pytest.raises(ValidationError):
        fidelity_pure(psi, np.eye(8) / 8)


def test_fidelity_general_identity_and_orthogonal():
    rng = np.random.default_rng(31)
    rho = random_density(rng, 4)
    assert abs(fidelity_general(rho, rho) - 1.0) <= 1e-10
    a = np.zeros((4, 4), dtype=complex)
    a[0, 0] = 1.0
    b = np.zeros((4, 4), dtype=complex)
    b[3, 3] = 1.0
    assert fidelity_general(a, b) <= 1e-12


def test_fidelity_general_reduces_to_pure_formula():
    rng = np.random.default_rng(37)
    for _ in range(20):
        dim = int(rng.choice([2, 4, 8]))
        raw = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        psi = raw / np.linalg.norm(raw)
        gamma = random_density(rng, dim)
        f1 = fidelity_general(np.outer(psi, psi.conj()), gamma)
        assert abs(f1 - fidelity_pure(psi, gamma)) <= 1e-10


def test_fidelity_general_symmetric_and_unitary_invariant():
    rng = np.random.default_rng(41)
    for _ in range(10):
        sigma = random_density(rng, 4)
        gamma = random_density(rng, 4)
        assert abs(fidelity_general(sigma, gamma) - fidelity_general(gamma, sigma)) <= 1e-10
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        lhs = fidelity_general(q @ sigma @ q.conj().T, q @ gamma @ q.conj().T)
        assert abs(lhs - fidelity_general(sigma, gamma)) <= 1e-10


def test_fidelity_general_rejects_non_density():
    with pytest.raises(ValidationError):
        fidelity_general(np.eye(2), np.eye(2) / 2)  # trace 2
    with pytest.raises(ValidationError):
        fidelity_general(np.array([[0.5, 0.9], [0.1, 0.5]]), np.eye(2) / 2)


def test_expand_product_density_ordering():
    # qubit 1 factor varies fastest: expansion index is the register value.
    f1 = np.diag([1.0, 0.0]).astype(complex)  # qubit 1 in |0>
    f2 = np.diag([0.0, 1.0]).astype(complex)  # qubit 2 in |1>
    dense = expand_product_density([f1, f2])
    assert dense.shape == (4, 4)
    assert abs(dense[2, 2] - 1.0) <= 1e-15  # register value 2 = bit2 set


def test_noisy_retrieval_fidelity_noiseless_is_one():
    config = RetrievalConfig(n=4, marked=(2,))
    f = noisy_retrieval_fidelity(config, make_channel(ChannelKind.PHASE_FLIP, 0.0))
    assert abs(f - 1.0) <= 1e-10


def test_noisy_retrieval_fidelity_bit_flip_immune():
    config = RetrievalConfig(n=4, marked=(2,))
    for eta in (0.2, 0.8):
        f = noisy_retrieval_fidelity(config, make_channel(ChannelKind.BIT_FLIP, eta))
        assert abs(f - 1.0) <= 1e-10


def test_noisy_retrieval_fidelity_unitary_invariance():
    from qamsim import fidelity_general as f1

    config = RetrievalConfig(n=4, marked=(2,))
    ch = make_channel(ChannelKind.PHASE_FLIP, 0.5)
    got = noisy_retrieval_fidelity(config, ch)
    rho = expand_product_density(noisy_nle_density(4, ch))
    psi = np.ones(16, dtype=complex) / 4.0
    unconjugated = f1(np.outer(psi, psi.conj()), rho)
    assert abs(got - unconjugated) <= 1e-10


def test_noisy_retrieval_fidelity_capacity():
    with pytest.raises(CapacityError):
        noisy_retrieval_fidelity(RetrievalConfig(n=9, marked=(2,)), make_channel(ChannelKind.BIT_FLIP, 0.1))


def test_consistency_report_all_checks_pass():
    checks = consistency_report()
    assert all(c.ok for c in checks)
    tags = {(c.channel, c.check) for c in checks}
    assert ("amplitude_damping (reversed variant)", "completeness violated as expected") in tags
