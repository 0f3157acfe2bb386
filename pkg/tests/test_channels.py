import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from focklab.channels import (
    AMPLIFIER_TAIL_TARGET,
    ChannelDims,
    ChannelKind,
    _negative_binomial_span,
    additive_noise,
    amplifier,
    apply_channel,
    apply_channel_dense,
    apply_diagonal,
    attenuator,
    beamsplitter_unitary,
    clear_caches,
    contravariant_amplifier,
    decompose,
    default_dims,
    get_channel_map,
    squeezer_unitary,
)
from focklab.entropy import trace_distance
from focklab.errors import DomainError, TruncationError
from focklab.linalg import ladder
from focklab.sampling import random_mixed, substream
from focklab.states import DensityMatrix, DiagonalState
from focklab.thermal import thermal_state, z_of_energy


def _expm_taylor(m):
    """Scaling-and-squaring Taylor exponential, independent of scipy."""
    norm = float(np.abs(m).sum(axis=1).max())
    s = max(0, int(math.ceil(math.log2(max(norm, 1e-300)))) + 1)
    a = m / (2.0**s)
    term = np.eye(m.shape[0], dtype=complex)
    out = term.copy()
    for k in range(1, 40):
        term = term @ a / k
        out += term
    for _ in range(s):
        out = out @ out
    return out


def test_spec_constructors_validate():
    with pytest.raises(DomainError):
        attenuator(0.0)
    with pytest.raises(DomainError):
        attenuator(1.2)
    with pytest.raises(DomainError):
        amplifier(0.9)
    with pytest.raises(DomainError):
        contravariant_amplifier(0.5)
    with pytest.raises(DomainError):
        attenuator(0.5, env_energy=-0.1)
    attenuator(1.0)
    amplifier(1.0)
    additive_noise(0.5)


def test_output_energy_laws():
    assert_allclose(attenuator(0.3, 1.0).output_energy(2.0), 0.3 * 2.0 + 0.7 * 1.0)
    assert_allclose(amplifier(2.0, 0.5).output_energy(1.0), 2.0 * 1.0 + 1.0 * 1.5)
    assert_allclose(additive_noise(0.8).output_energy(1.5), 2.3)
    assert_allclose(contravariant_amplifier(2.0, 0.5).output_energy(1.0), 1.0 * 2.0 + 2.0 * 0.5)


def test_parameter_property():
    assert attenuator(0.4, 1.0).parameter == 0.4
    assert amplifier(1.7).parameter == 1.7
    assert additive_noise(0.9).parameter == 0.9
    assert contravariant_amplifier(3.0).parameter == 3.0


def test_decompose_noisy_attenuator():
    lam, e = 0.3, 1.0
    params = decompose(attenuator(lam, e))
    kap = (1.0 - lam) * e + 1.0
    assert_allclose(params.pair, (lam / kap, kap), rtol=1e-14)
    # the composition reproduces the mean-energy law
    lam_p, kap_p = params.pair
    for e_in in (0.0, 1.0, 2.5):
        staged = amplifier(kap_p).output_energy(attenuator(lam_p).output_energy(e_in))
        assert_allclose(staged, attenuator(lam, e).output_energy(e_in), rtol=1e-13)


def test_decompose_noisy_amplifier():
    kap, e = 2.0, 0.5
    params = decompose(amplifier(kap, e))
    scale = (1.0 - 1.0 / kap) * e + 1.0
    assert_allclose(params.pair, (1.0 / scale, kap * scale), rtol=1e-14)
    lam_p, kap_p = params.pair
    for e_in in (0.0, 1.0, 2.5):
        staged = amplifier(kap_p).output_energy(attenuator(lam_p).output_energy(e_in))
        assert_allclose(staged, amplifier(kap, e).output_energy(e_in), rtol=1e-13)


def test_decompose_quantum_limited_is_trivial():
    lam_p, kap_p = decompose(attenuator(0.4, 0.0)).pair
    assert_allclose(lam_p, 0.4, atol=1e-15)
    assert_allclose(kap_p, 1.0, atol=1e-15)


def test_beamsplitter_matches_kron_generator_exponential():
    d = 6
    lam = 0.35
    theta = math.acos(math.sqrt(lam))
    a = ladder(d)
    gen = theta * (np.kron(a.conj().T, a) - np.kron(a, a.conj().T))
    oracle = _expm_taylor(gen)
    dense = beamsplitter_unitary(lam, d, d).dense()
    assert_allclose(dense, oracle, atol=1e-12)


def test_squeezer_matches_kron_generator_exponential():
    d = 8
    kap = 1.8
    r = math.acosh(math.sqrt(kap))
    a = ladder(d)
    gen = r * (np.kron(a.conj().T, a.conj().T) - np.kron(a, a))
    oracle = _expm_taylor(gen)
    dense = squeezer_unitary(kap, d, d).dense()
    assert_allclose(dense, oracle, atol=1e-12)


def test_beamsplitter_blocks_unitary():
    u = beamsplitter_unitary(0.5, 12, 12)
    assert u.block_unitarity_defect() < 1e-12


def test_beamsplitter_single_photon_amplitudes():
    lam = 0.37
    u = beamsplitter_unitary(lam, 3, 3).dense()
    # joint index is sys * d_env + env
    ket_10 = np.zeros(9)
    ket_10[1 * 3 + 0] = 1.0
    out = u @ ket_10
    assert_allclose(abs(out[1 * 3 + 0]) ** 2, lam, rtol=1e-12)
    assert_allclose(abs(out[0 * 3 + 1]) ** 2, 1.0 - lam, rtol=1e-12)


def test_squeezer_vacuum_column_is_thermal():
    kap = 2.0
    d = 50
    u = squeezer_unitary(kap, d, d).dense()
    out = u[:, 0]
    probs = np.abs(out.reshape(d, d)) ** 2
    # two-mode squeezed vacuum: diagonal weights form the thermal law at
    # mean energy gain - 1, perfectly correlated across the two modes
    expected = thermal_state(kap - 1.0, d).probs
    assert_allclose(np.diag(probs), expected, atol=1e-12)
    off = probs - np.diag(np.diag(probs))
    assert float(np.abs(off).max()) < 1e-24


def test_negative_binomial_span_matches_scipy():
    for r in (1, 5, 16, 40):
        for inv_gain in (0.5, 0.66, 0.9):
            span = _negative_binomial_span(r, inv_gain, AMPLIFIER_TAIL_TARGET)
            oracle = int(stats.nbinom.ppf(1.0 - AMPLIFIER_TAIL_TARGET, r, inv_gain))
            assert abs(span - oracle) <= 1


def test_default_dims_attenuator_square():
    dims = default_dims(attenuator(0.5, 0.0), 10)
    assert dims == ChannelDims(10, 10, 10)
    noisy = default_dims(attenuator(0.5, 1.0), 10)
    assert noisy.d_sys == noisy.d_env == noisy.d_out > 10


def test_default_dims_amplifier_headroom():
    dims = default_dims(amplifier(2.0), 16)
    assert dims.d_out > 2 * 16
    assert dims.d_sys == dims.d_env == dims.d_out + 10


def test_default_dims_monotone_in_input():
    prev = 0
    for d_in in (4, 8, 16, 32):
        dims = default_dims(amplifier(2.0, 0.5), d_in)
        assert dims.d_out > prev
        prev = dims.d_out


def test_default_dims_additive_refuses():
    with pytest.raises(DomainError):
        default_dims(additive_noise(1.0), 8)


def test_pure_loss_half_on_one_photon():
    rho = DensityMatrix(np.diag([0.0, 1.0]).astype(complex))
    out = apply_channel(attenuator(0.5), rho)
    assert_allclose(out.matrix, np.diag([0.5, 0.5]).astype(complex), atol=1e-14)
    assert out.trace_deficit < 1e-14


def test_band_path_matches_dense_path():
    rng = substream(101, 0)
    rho = random_mixed(6, 6, rng)
    # dims are kept small on purpose: the dense path materializes the
    # full joint unitary, so it only serves as a cross-check here
    cases = (
        (attenuator(0.6, 0.8), ChannelDims(14, 14, 14)),
        (amplifier(1.7, 0.4), ChannelDims(36, 36, 30)),
        (contravariant_amplifier(1.7, 0.4), ChannelDims(36, 36, 30)),
    )
    for spec, dims in cases:
        banded = apply_channel(spec, rho, dims)
        dense = apply_channel_dense(spec, rho, dims)
        assert_allclose(banded.matrix, dense.matrix, atol=1e-13)
        assert_allclose(banded.trace_deficit, dense.trace_deficit, atol=1e-13)


def test_apply_diagonal_matches_apply_channel():
    rng = substream(102, 0)
    probs = rng.random(12)
    probs /= probs.sum()
    diag = DiagonalState.from_probs(probs)
    rho = diag.to_density()
    for spec in (attenuator(0.3, 1.0), amplifier(2.0, 0.5), additive_noise(1.0)):
        fast = apply_diagonal(spec, diag)
        full = apply_channel(spec, rho)
        assert_allclose(fast.probs, np.diag(full.matrix).real, atol=1e-12)


def test_phase_covariance():
    rng = substream(103, 0)
    rho = random_mixed(8, 8, rng)
    theta = 0.7
    phases = np.exp(1j * theta * np.arange(8))
    rotated = DensityMatrix.from_matrix(phases[:, None] * rho.matrix * phases.conj()[None, :])
    for spec in (attenuator(0.6, 0.5), amplifier(1.6, 0.3)):
        out = apply_channel(spec, rho)
        out_rot = apply_channel(spec, rotated)
        d = out.dim
        out_phases = np.exp(1j * theta * np.arange(d))
        expected = out_phases[:, None] * out.matrix * out_phases.conj()[None, :]
        assert_allclose(out_rot.matrix, expected, atol=1e-10)


def test_phase_contravariance():
    rng = substream(104, 0)
    rho = random_mixed(8, 8, rng)
    theta = 0.7
    phases = np.exp(1j * theta * np.arange(8))
    rotated = DensityMatrix.from_matrix(phases[:, None] * rho.matrix * phases.conj()[None, :])
    spec = contravariant_amplifier(1.6, 0.3)
    out = apply_channel(spec, rho)
    out_rot = apply_channel(spec, rotated)
    d = out.dim
    out_phases = np.exp(-1j * theta * np.arange(d))
    expected = out_phases[:, None] * out.matrix * out_phases.conj()[None, :]
    assert_allclose(out_rot.matrix, expected, atol=1e-10)


def test_attenuator_semigroup():
    rng = substream(105, 0)
    rho = random_mixed(10, 10, rng)
    lam1, lam2 = 0.7, 0.6
    direct = apply_channel(attenuator(lam1 * lam2), rho)
    staged = apply_channel(attenuator(lam1), apply_channel(attenuator(lam2), rho))
    assert trace_distance(direct, staged) < 1e-12


def test_amplifier_semigroup():
    rng = substream(106, 0)
    rho = random_mixed(8, 8, rng)
    kap1, kap2 = 1.3, 1.5
    direct = apply_channel(amplifier(kap1 * kap2), rho)
    staged = apply_channel(amplifier(kap1), apply_channel(amplifier(kap2), rho))
    assert trace_distance(direct, staged) < 1e-7


def test_thermal_fixed_point_of_attenuator():
    e = 1.0
    diag = thermal_state(e, 40)
    out = apply_diagonal(attenuator(0.5, e), diag)
    expected = thermal_state(e, out.dim)
    assert_allclose(out.probs, expected.probs, atol=1e-12)


def test_amplifier_thermal_ratio_pushforward():
    z = 0.4
    kap = 2.0
    e_in = z / (1.0 - z)
    diag = thermal_state(e_in, 40)
    out = apply_diagonal(amplifier(kap), diag)
    z_out = (z + kap - 1.0) / kap
    expected = thermal_state(z_out / (1.0 - z_out), out.dim)
    assert_allclose(out.probs, expected.probs, atol=1e-10)


def test_contravariant_diagonal_law():
    e_in, kap, e_env = 1.0, 2.0, 0.5
    diag = thermal_state(e_in, 30)
    out = apply_diagonal(contravariant_amplifier(kap, e_env), diag)
    e_out = (kap - 1.0) * (e_in + 1.0) + kap * e_env
    expected = thermal_state(e_out, out.dim)
    assert_allclose(out.probs, expected.probs, atol=1e-9)


def test_additive_noise_is_staged_composition():
    rng = substream(107, 0)
    rho = random_mixed(8, 8, rng)
    e = 1.0
    direct = apply_channel(additive_noise(e), rho)
    lam = 1.0 / (e + 1.0)
    staged = apply_channel(amplifier(e + 1.0), apply_channel(attenuator(lam), rho))
    assert trace_distance(direct, staged) < 1e-10


def test_additive_noise_refuses_explicit_dims():
    rho = DensityMatrix(np.diag([1.0, 0.0]).astype(complex))
    with pytest.raises(DomainError):
        apply_channel(additive_noise(1.0), rho, ChannelDims(8, 8, 8))


def test_truncation_error_on_undersized_output():
    # the top Fock level through a strong amplifier lands far above an
    # output cutoff of 20, so nearly all mass falls in the cropped zone
    rho = DensityMatrix(np.diag([0.0] * 15 + [1.0]).astype(complex))
    with pytest.raises(TruncationError) as info:
        apply_channel(amplifier(4.0), rho, ChannelDims(40, 40, 20))
    assert info.value.deficit > 0.01


def test_decomposition_identity_on_random_state():
    rng = substream(108, 0)
    rho = random_mixed(12, 12, rng)
    for spec in (attenuator(0.3, 1.0), amplifier(2.0, 0.5)):
        lam_p, kap_p = decompose(spec).pair
        direct = apply_channel(spec, rho)
        staged = apply_channel(amplifier(kap_p), apply_channel(attenuator(lam_p), rho))
        assert trace_distance(direct, staged) < 1e-9


def test_channel_map_cache_identity():
    clear_caches()
    spec = attenuator(0.55, 0.2)
    first = get_channel_map(spec, 6)
    second = get_channel_map(spec, 6)
    assert first is second
    clear_caches()
    third = get_channel_map(spec, 6)
    assert third is not first


def test_transmissivity_one_is_identity():
    rng = substream(109, 0)
    rho = random_mixed(6, 6, rng)
    out = apply_channel(attenuator(1.0), rho)
    assert_allclose(out.matrix[:6, :6], rho.matrix, atol=1e-12)


def test_gain_one_is_identity():
    rng = substream(110, 0)
    rho = random_mixed(6, 6, rng)
    out = apply_channel(amplifier(1.0), rho)
    assert_allclose(out.matrix[:6, :6], rho.matrix, atol=1e-12)


def test_kind_enum_values():
    assert ChannelKind.ATTENUATOR.value == "attenuator"
    assert ChannelKind.AMPLIFIER.value == "amplifier"
    assert ChannelKind.ADDITIVE.value == "additive"
    assert ChannelKind.CONTRAVARIANT.value == "contravariant"
