"""One-mode phase-covariant Gaussian channels via truncated dilations.

Each channel is realized exactly as written on paper: couple the input to
a thermal environment through a two-mode unitary (beamsplitter for the
attenuator, two-mode squeezer for the amplifier), then trace out one
mode.  The contravariant channel keeps the environment mode instead.
Additive noise is strictly the composition of a quantum-limited
attenuator followed by a quantum-limited amplifier.

The truncated generators conserve total photon number (beamsplitter) or
photon-number difference (squeezer), so the dilation unitary is stored
block-factored over that conserved quantity and never materialized as a
dense joint matrix unless explicitly requested.  Channel application
contracts the blocks band by band: the resulting map sends the k-th
matrix diagonal of the input to the k-th diagonal of the output (phase
covariance), which is the same algebra as Tr_env[U (rho (x) env) U+]
evaluated in a better order.  A literal dense-sandwich path is kept for
cross-checks at small dimensions.
"""

import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import DomainError, TruncationError
from .linalg import check_joint_dim, partial_trace
from .states import DensityMatrix, DiagonalState
from .thermal import thermal_state, thermal_tail_cutoff

# Tail mass allowed past the default amplifier output cutoff for the
# worst-case input level; the realized leakage is recorded in the output
# trace_deficit, never hidden.
AMPLIFIER_TAIL_TARGET = 1e-9

# The squeezer ladder reflects off the truncation wall, corrupting the top
# few levels while conserving trace.  Cropping the output this far below
# the dilation size pushes those artifacts into the cropped band, where
# they are measured by the trace deficit instead of hiding in the state.
AMPLIFIER_CROP_MARGIN = 10

# apply_channel refuses to return an output that lost more than this much mass.
MAX_APPLY_DEFICIT = 0.01

# Tail-mass target used when sizing the attenuator environment.
ENV_TAIL_TARGET = 1e-14


class ChannelKind(str, Enum):
    ATTENUATOR = "attenuator"
    AMPLIFIER = "amplifier"
    ADDITIVE = "additive"
    CONTRAVARIANT = "contravariant"


@dataclass(frozen=True)
class ChannelSpec:
    """Which channel, with its parameter and environment mean energy."""

    kind: ChannelKind
    transmissivity: Optional[float] = None
    gain: Optional[float] = None
    env_energy: float = 0.0

    def __post_init__(self):
        e = float(self.env_energy)
        if e < 0.0:
            raise DomainError(f"env_energy must be >= 0, got {e!r}")
        if self.kind == ChannelKind.ATTENUATOR:
            lam = self.transmissivity
            if lam is None or not 0.0 < float(lam) <= 1.0:
                raise DomainError(f"attenuator needs transmissivity in (0, 1], got {lam!r}")
            if self.gain is not None:
                raise DomainError("attenuator takes no gain parameter")
        elif self.kind in (ChannelKind.AMPLIFIER, ChannelKind.CONTRAVARIANT):
            kap = self.gain
            if kap is None or float(kap) < 1.0:
                raise DomainError(f"{self.kind.value} needs gain >= 1, got {kap!r}")
            if self.transmissivity is not None:
                raise DomainError(f"{self.kind.value} takes no transmissivity parameter")
        elif self.kind == ChannelKind.ADDITIVE:
            if self.transmissivity is not None or self.gain is not None:
                raise DomainError("additive noise is parameterized by env_energy alone")
        else:  # pragma: no cover
            raise DomainError(f"unknown channel kind {self.kind!r}")

    @property
    def parameter(self) -> float:
        """The defining scalar: transmissivity, gain, or added noise energy."""
        if self.kind == ChannelKind.ATTENUATOR:
            return float(self.transmissivity)
        if self.kind == ChannelKind.ADDITIVE:
            return float(self.env_energy)
        return float(self.gain)

    def output_energy(self, input_energy: float) -> float:
        """Mean energy of the output when the input is thermal."""
        e_in = float(input_energy)
        e = float(self.env_energy)
        if self.kind == ChannelKind.ATTENUATOR:
            lam = float(self.transmissivity)
            return lam * e_in + (1.0 - lam) * e
        if self.kind == ChannelKind.AMPLIFIER:
            kap = float(self.gain)
            return kap * e_in + (kap - 1.0) * (e + 1.0)
        if self.kind == ChannelKind.ADDITIVE:
            return e_in + e
        kap = float(self.gain)
        return (kap - 1.0) * (e_in + 1.0) + kap * e


def attenuator(transmissivity: float, env_energy: float = 0.0) -> ChannelSpec:
    return ChannelSpec(ChannelKind.ATTENUATOR, transmissivity=transmissivity, env_energy=env_energy)


def amplifier(gain: float, env_energy: float = 0.0) -> ChannelSpec:
    return ChannelSpec(ChannelKind.AMPLIFIER, gain=gain, env_energy=env_energy)


def additive_noise(env_energy: float) -> ChannelSpec:
    return ChannelSpec(ChannelKind.ADDITIVE, env_energy=env_energy)


def contravariant_amplifier(gain: float, env_energy: float = 0.0) -> ChannelSpec:
    return ChannelSpec(ChannelKind.CONTRAVARIANT, gain=gain, env_energy=env_energy)


# ---------------------------------------------------------------------------
# decomposition into quantum-limited parts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionParams:
    """Quantum-limited pair: channel = amplifier(kappa) o attenuator(lam)."""

    lambda_prime: Optional[float] = None
    kappa_prime: Optional[float] = None
    lambda_dprime: Optional[float] = None
    kappa_dprime: Optional[float] = None

    @property
    def pair(self):
        """(transmissivity, gain) of the filled side."""
        if self.lambda_prime is not None:
            return self.lambda_prime, self.kappa_prime
        return self.lambda_dprime, self.kappa_dprime


def decompose(spec: ChannelSpec) -> DecompositionParams:
    """Split a noisy attenuator or amplifier into quantum-limited factors."""
    e = float(spec.env_energy)
    if spec.kind == ChannelKind.ATTENUATOR:
        lam = float(spec.transmissivity)
        kappa_p = (1.0 - lam) * e + 1.0
        return DecompositionParams(lambda_prime=lam / kappa_p, kappa_prime=kappa_p)
    if spec.kind == ChannelKind.AMPLIFIER:
        kap = float(spec.gain)
        scale = (1.0 - 1.0 / kap) * e + 1.0
        return DecompositionParams(lambda_dprime=1.0 / scale, kappa_dprime=kap * scale)
    raise DomainError(f"no quantum-limited decomposition for kind {spec.kind.value!r}")


# ---------------------------------------------------------------------------
# dilation unitaries, block-factored over the conserved quantity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DilationBlock:
    """One conserved-quantity block in environment coordinates.

    Member with local index t has environment level env_lo + t; the
    system level is (cls - env) for the beamsplitter and (cls + env)
    for the squeezer.
    """

    cls: int
    env_lo: int
    matrix: np.ndarray


@dataclass(frozen=True)
class DilationUnitary:
    """Two-mode coupling unitary, stored block-factored."""

    generator: str  # "beamsplitter" | "squeezer"
    parameter: float  # transmissivity or gain
    d_sys: int
    d_env: int
    blocks: tuple

    def _sys_level(self, cls: int, env: int) -> int:
        if self.generator == "beamsplitter":
            return cls - env
        return cls + env

    def dense(self) -> np.ndarray:
        """Materialize the joint matrix (system-major); guarded by size limit."""
        joint = check_joint_dim(self.d_sys, self.d_env)
        u = np.zeros((joint, joint), dtype=complex)
        for blk in self.blocks:
            n = blk.matrix.shape[0]
            env = blk.env_lo + np.arange(n)
            sys = np.array([self._sys_level(blk.cls, j) for j in env])
            idx = sys * self.d_env + env
            u[np.ix_(idx, idx)] = blk.matrix
        return u

    def block_unitarity_defect(self) -> float:
        worst = 0.0
        for blk in self.blocks:
            m = blk.matrix
            defect = float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
            worst = max(worst, defect)
        return worst


def _expm_blocks(tridiag_entries, classes_env_ranges):
    blocks = []
    for cls, lo, hi, sup in zip(*classes_env_ranges, tridiag_entries):
        n = hi - lo
        if n <= 0:
            continue
        gen = np.zeros((n, n))
        if n > 1:
            idx = np.arange(n - 1)
            gen[idx, idx + 1] = sup
            gen[idx + 1, idx] = -sup
        mat = scipy.linalg.expm(gen) if n > 1 else np.ones((1, 1))
        blocks.append(DilationBlock(cls, lo, np.ascontiguousarray(mat, dtype=float)))
    return tuple(blocks)


def beamsplitter_unitary(transmissivity: float, d_sys: int, d_env: int) -> DilationUnitary:
    """exp(theta (a+ b - a b+)) with theta = arccos(sqrt(transmissivity)).

    Conserves total photon number; block `cls` couples |cls - j, j>.
    """
    lam = float(transmissivity)
    if not 0.0 < lam <= 1.0:
        raise DomainError(f"transmissivity must be in (0, 1], got {lam!r}")
    if d_sys < 1 or d_env < 1:
        raise DomainError(f"need d_sys, d_env >= 1, got {d_sys}, {d_env}")
    theta = math.acos(math.sqrt(lam))
    classes, los, his, entries = [], [], [], []
    for s in range(d_sys + d_env - 1):
        lo = max(0, s - d_sys + 1)
        hi = min(d_env - 1, s) + 1
        j = np.arange(lo + 1, hi)
        # raising the env index j -> j from j-1 couples via a+ b with
        # weight sqrt((s - j + 1) * j); sign fixed by the generator order
        sup = theta * np.sqrt((s - j + 1.0) * j)
        classes.append(s)
        los.append(lo)
        his.append(hi)
        entries.append(sup)
    blocks = _expm_blocks(entries, (classes, los, his))
    return DilationUnitary("beamsplitter", lam, d_sys, d_env, blocks)


def squeezer_unitary(gain: float, d_sys: int, d_env: int) -> DilationUnitary:
    """exp(r (a+ b+ - a b)) with r = arccosh(sqrt(gain)).

    Conserves the photon-number difference; block `cls` couples |cls + j, j>.
    """
    kap = float(gain)
    if kap < 1.0:
        raise DomainError(f"gain must be >= 1, got {kap!r}")
    if d_sys < 1 or d_env < 1:
        raise DomainError(f"need d_sys, d_env >= 1, got {d_sys}, {d_env}")
    r = math.acosh(math.sqrt(kap))
    classes, los, his, entries = [], [], [], []
    for delta in range(-(d_env - 1), d_sys):
        lo = max(0, -delta)
        hi = min(d_env - 1, d_sys - 1 - delta) + 1
        j = np.arange(lo, hi - 1)
        # a b lowers both modes; entry above the diagonal in env order is
        # -r sqrt((j + delta + 1)(j + 1)) from <j| a b |j+1>
        sup = -r * np.sqrt((j + delta + 1.0) * (j + 1.0))
        classes.append(delta)
        los.append(lo)
        his.append(hi)
        entries.append(sup)
    blocks = _expm_blocks(entries, (classes, los, his))
    return DilationUnitary("squeezer", kap, d_sys, d_env, blocks)


# ---------------------------------------------------------------------------
# band-resolved channel maps
# ---------------------------------------------------------------------------


class ChannelMap:
    """Linear map from input matrix diagonals to output matrix diagonals.

    bands[k] maps the k-th subdiagonal of the input to the k-th
    subdiagonal of the output (its conjugate for the contravariant
    case); bands[0] is the Fock transition matrix.
    """

    def __init__(self, spec, d_in, d_out, bands, contravariant, env_dim, env_deficit):
        self.spec = spec
        self.d_in = d_in
        self.d_out = d_out
        self.bands = bands
        self.contravariant = contravariant
        self.env_dim = env_dim
        self.env_deficit = env_deficit

    @property
    def transition_matrix(self) -> np.ndarray:
        """Probability map between Fock populations; columns sum to <= 1."""
        return self.bands[0]

    def apply_matrix(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape[0] > self.d_in:
            raise DomainError(
                f"input dim {rho.shape[0]} exceeds map input dim {self.d_in}"
            )
        if rho.shape[0] < self.d_in:
            padded = np.zeros((self.d_in, self.d_in), dtype=complex)
            padded[: rho.shape[0], : rho.shape[0]] = rho
            rho = padded
        out = np.zeros((self.d_out, self.d_out), dtype=complex)
        idx = np.arange(self.d_out)
        for k, band in enumerate(self.bands):
            vin = np.diagonal(rho, offset=-k)
            if self.contravariant:
                vin = vin.conj()
            vout = band @ vin
            rows = idx[: self.d_out - k] + k
            cols = idx[: self.d_out - k]
            if k == 0:
                out[rows, cols] = vout.real
            else:
                out[rows, cols] = vout
                out[cols, rows] = vout.conj()
        return out

    def apply_probs(self, probs: np.ndarray) -> np.ndarray:
        p = np.asarray(probs, dtype=float)
        if p.size > self.d_in:
            raise DomainError(f"input dim {p.size} exceeds map input dim {self.d_in}")
        if p.size < self.d_in:
            p = np.concatenate([p, np.zeros(self.d_in - p.size)])
        return self.bands[0] @ p


def _band_slot(bands, k, d_out, d_in, dtype):
    if bands[k] is None:
        bands[k] = np.zeros((d_out - k, d_in - k), dtype=dtype)
    return bands[k]


def _build_beamsplitter_bands(unitary, env_probs, d_in, d_out):
    """Covariant contraction of beamsplitter blocks against the env state."""
    by_cls = {blk.cls: blk for blk in unitary.blocks}
    n_bands = min(d_in, d_out)
    bands = [None] * n_bands
    for k in range(n_bands):
        for s, blk in by_cls.items():
            upper = by_cls.get(s + k)
            if upper is None:
                continue
            lo = max(blk.env_lo, upper.env_lo)
            hi = min(blk.env_lo + blk.matrix.shape[0], upper.env_lo + upper.matrix.shape[0])
            # output row i = s - j must sit in [0, d_out - k); input column
            # l = s - kk must sit in [0, d_in - k)
            j_lo = max(lo, s - d_out + k + 1)
            j_hi = min(hi, s + 1)
            k_lo = max(lo, s - d_in + k + 1)
            k_hi = min(hi, s + 1)
            if j_lo >= j_hi or k_lo >= k_hi:
                continue
            a = upper.matrix[j_lo - upper.env_lo : j_hi - upper.env_lo,
                             k_lo - upper.env_lo : k_hi - upper.env_lo]
            b = blk.matrix[j_lo - blk.env_lo : j_hi - blk.env_lo,
                           k_lo - blk.env_lo : k_hi - blk.env_lo]
            contrib = (a * b) * env_probs[k_lo:k_hi]
            band = _band_slot(bands, k, d_out, d_in, float)
            # rows i = s - j and columns l = s - kk run backwards in j, kk
            band[s - j_hi + 1 : s - j_lo + 1, s - k_hi + 1 : s - k_lo + 1] += contrib[::-1, ::-1]
    return [b if b is not None else np.zeros((d_out - k, d_in - k)) for k, b in enumerate(bands)]


def _build_squeezer_bands(unitary, env_probs, d_in, d_out, keep_env):
    """Contraction of squeezer blocks; keep_env selects the contravariant map."""
    by_cls = {blk.cls: blk for blk in unitary.blocks}
    n_bands = min(d_in, d_out)
    bands = [None] * n_bands
    for k in range(n_bands):
        for delta, blk in by_cls.items():
            upper = by_cls.get(delta + k)
            if upper is None:
                continue
            b_lo, b_hi = blk.env_lo, blk.env_lo + blk.matrix.shape[0]
            u_lo, u_hi = upper.env_lo, upper.env_lo + upper.matrix.shape[0]
            if keep_env:
                # out_diag[r] = sum_j blk[r+k, j] * upper[r, j] * w[j] * conj(in_diag[j+delta])
                r_lo = max(b_lo - k, u_lo, 0)
                r_hi = min(b_hi - k, u_hi, d_out - k)
                c_lo = max(b_lo, u_lo, -delta)
                c_hi = min(b_hi, u_hi, d_in - k - delta)
                if r_lo >= r_hi or c_lo >= c_hi:
                    continue
                a = blk.matrix[r_lo + k - b_lo : r_hi + k - b_lo, c_lo - b_lo : c_hi - b_lo]
                b = upper.matrix[r_lo - u_lo : r_hi - u_lo, c_lo - u_lo : c_hi - u_lo]
                contrib = (a * b) * env_probs[c_lo:c_hi]
                band = _band_slot(bands, k, d_out, d_in, float)
                band[r_lo:r_hi, c_lo + delta : c_hi + delta] += contrib
            else:
                # out_diag[j + delta] += upper[j, jj] * blk[j, jj] * w[jj] * in_diag[jj + delta]
                lo = max(b_lo, u_lo)
                hi = min(b_hi, u_hi)
                j_lo = max(lo, -delta)
                j_hi = min(hi, d_out - k - delta)
                c_lo = max(lo, -delta)
                c_hi = min(hi, d_in - k - delta)
                if j_lo >= j_hi or c_lo >= c_hi:
                    continue
                a = upper.matrix[j_lo - u_lo : j_hi - u_lo, c_lo - u_lo : c_hi - u_lo]
                b = blk.matrix[j_lo - b_lo : j_hi - b_lo, c_lo - b_lo : c_hi - b_lo]
                contrib = (a * b) * env_probs[c_lo:c_hi]
                band = _band_slot(bands, k, d_out, d_in, float)
                band[j_lo + delta : j_hi + delta, c_lo + delta : c_hi + delta] += contrib
    return [b if b is not None else np.zeros((d_out - k, d_in - k)) for k, b in enumerate(bands)]


# ---------------------------------------------------------------------------
# dimension policies and caches
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChannelDims:
    d_sys: int
    d_env: int
    d_out: int


def _negative_binomial_span(successes: int, inv_gain: float, tail: float) -> int:
    """Smallest k with negative-binomial tail mass beyond k below `tail`.

    The two-mode squeezer sends the top retained input level into an
    excess-quanta distribution with exactly these weights, so this fixes
    how much headroom the output needs.
    """
    r = int(successes)
    p = float(inv_gain)
    if p >= 1.0:
        return 0
    pmf = p**r
    cum = pmf
    k = 0
    while cum < 1.0 - tail and k < 100000:
        k += 1
        pmf *= (r + k - 1) / k * (1.0 - p)
        cum += pmf
    return k


def default_dims(spec: ChannelSpec, d_in: int) -> ChannelDims:
    """Dilation sizes for an arbitrary input supported on d_in levels."""
    if d_in < 1:
        raise DomainError(f"d_in must be >= 1, got {d_in}")
    e = float(spec.env_energy)
    if spec.kind == ChannelKind.ATTENUATOR:
        k_env = thermal_tail_cutoff(e, ENV_TAIL_TARGET) if e > 0.0 else 1
        d = d_in + k_env - 1
        return ChannelDims(d_sys=d, d_env=d, d_out=d)
    if spec.kind in (ChannelKind.AMPLIFIER, ChannelKind.CONTRAVARIANT):
        # worst case: top input level plus a high thermal env level, both
        # treated as seed quanta of the negative-binomial output spread
        j_env = thermal_tail_cutoff(e, AMPLIFIER_TAIL_TARGET) if e > 0.0 else 1
        seeds = d_in + j_env - 1
        span = _negative_binomial_span(seeds, 1.0 / float(spec.gain), AMPLIFIER_TAIL_TARGET)
        d_out = seeds + span
        d = d_out + AMPLIFIER_CROP_MARGIN
        return ChannelDims(d_sys=d, d_env=d, d_out=d_out)
    raise DomainError("additive noise has no single dilation; it is applied as a composition")


_dilation_cache: dict = {}
_map_cache: dict = {}
_cache_lock = threading.Lock()


def clear_caches() -> None:
    with _cache_lock:
        _dilation_cache.clear()
        _map_cache.clear()


def _get_dilation(generator: str, parameter: float, d_sys: int, d_env: int) -> DilationUnitary:
    key = (generator, parameter, d_sys, d_env)
    got = _dilation_cache.get(key)
    if got is not None:
        return got
    with _cache_lock:
        got = _dilation_cache.get(key)
        if got is None:
            if generator == "beamsplitter":
                got = beamsplitter_unitary(parameter, d_sys, d_env)
            else:
                got = squeezer_unitary(parameter, d_sys, d_env)
            _dilation_cache[key] = got
    return got


def get_channel_map(spec: ChannelSpec, d_in: int, dims: Optional[ChannelDims] = None) -> ChannelMap:
    """Build (or fetch from cache) the band-resolved map for one dilation."""
    if spec.kind == ChannelKind.ADDITIVE:
        raise DomainError("additive noise is applied as a composition, not a single map")
    if dims is None:
        dims = default_dims(spec, d_in)
    key = (spec.kind, spec.parameter, float(spec.env_energy), d_in, dims)
    got = _map_cache.get(key)
    if got is not None:
        return got
    env = thermal_state(spec.env_energy, dims.d_env)
    if spec.kind == ChannelKind.ATTENUATOR:
        unitary = _get_dilation("beamsplitter", spec.parameter, dims.d_sys, dims.d_env)
        bands = _build_beamsplitter_bands(unitary, env.probs, d_in, dims.d_out)
        contravariant = False
    else:
        unitary = _get_dilation("squeezer", spec.parameter, dims.d_sys, dims.d_env)
        keep_env = spec.kind == ChannelKind.CONTRAVARIANT
        bands = _build_squeezer_bands(unitary, env.probs, d_in, dims.d_out, keep_env)
        contravariant = keep_env
    built = ChannelMap(
        spec, d_in, dims.d_out, bands, contravariant, dims.d_env, env.trace_deficit
    )
    with _cache_lock:
        _map_cache.setdefault(key, built)
    return _map_cache[key]


# ---------------------------------------------------------------------------
# channel application
# ---------------------------------------------------------------------------


def _additive_factors(spec: ChannelSpec):
    e = float(spec.env_energy)
    return attenuator(1.0 / (e + 1.0)), amplifier(e + 1.0)


def apply_channel(
    spec: ChannelSpec,
    rho: DensityMatrix,
    dims: Optional[ChannelDims] = None,
) -> DensityMatrix:
    """Send a state through the channel dilation and trace out one mode.

    The output keeps whatever mass survives truncation; its trace_deficit
    is measured from the actual output trace.  Losing more than
    MAX_APPLY_DEFICIT raises TruncationError.
    """
    if spec.kind == ChannelKind.ADDITIVE:
        if dims is not None:
            raise DomainError("additive noise sizes its two factors itself")
        att, amp = _additive_factors(spec)
        return apply_channel(amp, apply_channel(att, rho))
    cmap = get_channel_map(spec, max(rho.dim, 1), dims)
    out = cmap.apply_matrix(rho.matrix)
    deficit = max(0.0, 1.0 - float(np.trace(out).real))
    if deficit > MAX_APPLY_DEFICIT:
        raise TruncationError(
            f"output lost {deficit:.3e} of its mass (limit {MAX_APPLY_DEFICIT});"
            " increase the input cutoff or dilation dimensions",
            deficit=deficit,
        )
    return DensityMatrix(out, deficit)


def apply_diagonal(
    spec: ChannelSpec,
    state: DiagonalState,
    dims: Optional[ChannelDims] = None,
) -> DiagonalState:
    """Fast path for Fock-diagonal inputs via the cached transition matrix."""
    if spec.kind == ChannelKind.ADDITIVE:
        if dims is not None:
            raise DomainError("additive noise sizes its two factors itself")
        att, amp = _additive_factors(spec)
        return apply_diagonal(amp, apply_diagonal(att, state))
    cmap = get_channel_map(spec, max(state.dim, 1), dims)
    probs = cmap.apply_probs(state.probs)
    deficit = max(0.0, 1.0 - float(probs.sum()))
    if deficit > MAX_APPLY_DEFICIT:
        raise TruncationError(
            f"output lost {deficit:.3e} of its mass (limit {MAX_APPLY_DEFICIT})",
            deficit=deficit,
        )
    return DiagonalState(probs, deficit)


def apply_channel_dense(
    spec: ChannelSpec,
    rho: DensityMatrix,
    dims: Optional[ChannelDims] = None,
) -> DensityMatrix:
    """Reference path: dense joint sandwich and partial trace.

    Materializes the full dilation, so it is only usable at small
    dimensions; kept as the cross-check for the band contraction.
    """
    if spec.kind == ChannelKind.ADDITIVE:
        att, amp = _additive_factors(spec)
        return apply_channel_dense(amp, apply_channel_dense(att, rho))
    if dims is None:
        dims = default_dims(spec, rho.dim)
    check_joint_dim(dims.d_sys, dims.d_env)
    if spec.kind == ChannelKind.ATTENUATOR:
        unitary = _get_dilation("beamsplitter", spec.parameter, dims.d_sys, dims.d_env)
        keep = "sys"
    else:
        unitary = _get_dilation("squeezer", spec.parameter, dims.d_sys, dims.d_env)
        keep = "env" if spec.kind == ChannelKind.CONTRAVARIANT else "sys"
    u = unitary.dense()
    sys_part = np.zeros((dims.d_sys, dims.d_sys), dtype=complex)
    sys_part[: rho.dim, : rho.dim] = rho.matrix
    env = thermal_state(spec.env_energy, dims.d_env)
    joint = np.kron(sys_part, np.diag(env.probs.astype(complex)))
    evolved = u @ joint @ u.conj().T
    reduced = partial_trace(evolved, dims.d_sys, dims.d_env, keep=keep)
    out = reduced[: dims.d_out, : dims.d_out]
    deficit = max(0.0, 1.0 - float(np.trace(out).real))
    if deficit > MAX_APPLY_DEFICIT:
        raise TruncationError(
            f"output lost {deficit:.3e} of its mass (limit {MAX_APPLY_DEFICIT})",
            deficit=deficit,
        )
    return DensityMatrix(out, deficit)
