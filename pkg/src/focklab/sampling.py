"""Reproducible random states and the adversarial gap search.

Streams are keyed counter-based generators: substream(seed, index) is
stable across processes and platforms, so trial i of a run is the same
state no matter how the trials are scheduled.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from .channels import ChannelKind, ChannelSpec
from .cmoe import CmoeReport, check_cmoe
from .entropy import von_neumann_entropy
from .errors import DomainError
from .linalg import hermitian_eigh
from .states import DensityMatrix, DiagonalState

_MASK64 = (1 << 64) - 1

PIN_TOL = 1e-9
PIN_MAX_RETRIES = 100


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for trial `index` of base `seed`."""
    mixed = (int(seed) ^ _splitmix64(int(index) & _MASK64)) & _MASK64
    k1 = _splitmix64(mixed)
    k2 = _splitmix64(k1)
    key = np.array([k1, k2], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex normals via the Box-Muller transform."""
    size = int(np.prod(shape))
    u1 = rng.random(size)
    u2 = rng.random(size)
    rad = np.sqrt(-2.0 * np.log1p(-u1))
    ang = 2.0 * np.pi * u2
    return (rad * np.cos(ang) + 1j * rad * np.sin(ang)).reshape(shape)


def random_pure(cutoff: int, rng: np.random.Generator) -> DensityMatrix:
    v = complex_normal(rng, (cutoff,))
    v /= np.linalg.norm(v)
    return DensityMatrix(np.outer(v, v.conj()))


def random_mixed(cutoff: int, rank: int, rng: np.random.Generator) -> DensityMatrix:
    if rank < 1 or rank > cutoff:
        raise DomainError(f"rank must lie in [1, {cutoff}], got {rank}")
    g = complex_normal(rng, (cutoff, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityMatrix(0.5 * (m + m.conj().T))


def random_diagonal(cutoff: int, rng: np.random.Generator) -> DiagonalState:
    # |complex normal|^2 entries are iid exponentials, so the normalized
    # vector is uniform on the probability simplex
    w = np.abs(complex_normal(rng, (cutoff,))) ** 2
    return DiagonalState(w / np.sum(w))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = complex_normal(rng, (dim, dim))
    qmat, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return qmat * (d / np.abs(d))


def entropy_pinned_state(
    target: float, cutoff: int, rng: np.random.Generator, tol: float = PIN_TOL
) -> DensityMatrix:
    """Random state with von Neumann entropy within tol of target.

    Mixes a random pure state toward the maximally mixed state; the
    entropy of the mixture is strictly increasing in the mixing weight,
    so bisection pins it.  The result is conjugated by a Haar unitary.
    """
    target = float(target)
    if target < 0.0 or target > math.log(cutoff) - 1e-12:
        raise DomainError(f"target entropy {target!r} unreachable at cutoff {cutoff}")
    eye = np.eye(cutoff) / cutoff
    for _ in range(PIN_MAX_RETRIES + 1):
        base = random_pure(cutoff, rng).matrix

        def mix_entropy(t: float) -> float:
            return von_neumann_entropy(DensityMatrix((1.0 - t) * base + t * eye))

        lo, hi = 0.0, 1.0
        s_lo = 0.0
        if target <= s_lo + tol:
            t_star, s_star = 0.0, s_lo
        else:
            t_star, s_star = None, None
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                s_mid = mix_entropy(mid)
                if abs(s_mid - target) <= tol:
                    t_star, s_star = mid, s_mid
                    break
                if s_mid < target:
                    lo = mid
                else:
                    hi = mid
        if t_star is None:
            continue
        v = random_unitary(cutoff, rng)
        rho = v @ ((1.0 - t_star) * base + t_star * eye) @ v.conj().T
        return DensityMatrix(0.5 * (rho + rho.conj().T))
    raise DomainError(f"failed to pin entropy {target} at cutoff {cutoff}")


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    cutoff: int
    kind: str = "mixed"
    rank: Optional[int] = None
    target_entropy: Optional[float] = None


def draw_state(config: SamplerConfig, index: int):
    rng = substream(config.seed, index)
    if config.kind == "pure":
        return random_pure(config.cutoff, rng)
    if config.kind == "mixed":
        rank = config.rank if config.rank is not None else config.cutoff
        return random_mixed(config.cutoff, rank, rng)
    if config.kind == "diagonal":
        return random_diagonal(config.cutoff, rng)
    if config.kind == "pinned":
        if config.target_entropy is None:
            raise DomainError("pinned sampler needs target_entropy")
        return entropy_pinned_state(config.target_entropy, config.cutoff, rng)
    raise DomainError(f"unknown sampler kind {config.kind!r}")


# ---------------------------------------------------------------------------
# adversarial search for small output entropies at fixed input entropy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    best_state: DensityMatrix
    best_report: CmoeReport
    iterations: int
    accepted: int
    final_step_angle: float


def _escort_pin(values: np.ndarray, target: float, tol: float = PIN_TOL) -> Optional[np.ndarray]:
    """Re-pin a spectrum to a target entropy by an escort power map.

    Returns probabilities lam**beta normalized, with beta bisected so
    the entropy hits target; None when the target is out of range.
    """
    lam = np.clip(values, 0.0, None)
    mask = lam > 1e-300
    loglam = np.log(lam[mask])
    if loglam.size < 2:
        return None

    def escort(beta: float) -> np.ndarray:
        lw = beta * loglam
        lw -= lw.max()
        w = np.exp(lw)
        return w / np.sum(w)

    def ent(beta: float) -> float:
        w = escort(beta)
        w = w[w > 1e-300]
        return float(-np.sum(w * np.log(w)))

    lo, hi = 1e-4, 1e4
    # entropy decreases in beta: beta->0 flattens, beta->inf sharpens
    if not (ent(hi) - tol <= target <= ent(lo) + tol):
        return None
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        s_mid = ent(mid)
        if abs(s_mid - target) <= tol:
            out = np.zeros_like(values)
            out[mask] = escort(mid)
            return out
        if s_mid > target:
            lo = mid
        else:
            hi = mid
    return None


def adversarial_search(
    spec: ChannelSpec,
    target_entropy: float,
    iterations: int,
    cutoff: int,
    seed: int,
    start: Optional[DensityMatrix] = None,
    step_angle: float = 0.05,
    angle_decay: float = 0.95,
    decay_after: int = 50,
) -> SearchResult:
    """Greedy descent on output entropy over states of fixed input entropy.

    Proposals alternate small unitary conjugations with spectrum
    perturbations re-pinned to the target entropy; a proposal is kept
    only when it lowers the output entropy.  The step angle shrinks
    after runs of rejections so the search settles into local minima.
    """
    rng = substream(seed, 0)
    state = start if start is not None else entropy_pinned_state(target_entropy, cutoff, rng)
    best = check_cmoe(spec, state)
    accepted = 0
    rejected_streak = 0
    angle = float(step_angle)
    for _ in range(iterations):
        cand = None
        if rng.random() < 0.5:
            h = complex_normal(rng, (cutoff, cutoff))
            h = h - h.conj().T
            scale = np.linalg.norm(h) / math.sqrt(cutoff)
            if scale > 0.0:
                v = expm((angle / scale) * h)
                m = v @ state.matrix @ v.conj().T
                cand = DensityMatrix(0.5 * (m + m.conj().T))
        else:
            vals, vecs = hermitian_eigh(state.matrix)
            noise = rng.standard_normal(cutoff)
            perturbed = np.clip(vals, 0.0, None) * np.exp(angle * noise)
            pinned = _escort_pin(perturbed, target_entropy)
            if pinned is not None:
                m = (vecs * pinned) @ vecs.conj().T
                cand = DensityMatrix(0.5 * (m + m.conj().T))
        if cand is not None:
            rep = check_cmoe(spec, cand)
            if rep.verdict is not None and rep.output_entropy < best.output_entropy:
                state, best = cand, rep
                accepted += 1
                rejected_streak = 0
                continue
        rejected_streak += 1
        if rejected_streak % decay_after == 0:
            angle *= angle_decay
    return SearchResult(
        best_state=state,
        best_report=best,
        iterations=iterations,
        accepted=accepted,
        final_step_angle=angle,
    )


# ---------------------------------------------------------------------------
# counterexample serialization
# ---------------------------------------------------------------------------


def state_to_json(state: DensityMatrix, seed: int, spec: ChannelSpec) -> dict:
    m = state.matrix
    return {
        "schema_version": 1,
        "dimension": state.dim,
        "entries_re": [float(x) for x in m.real.reshape(-1)],
        "entries_im": [float(x) for x in m.imag.reshape(-1)],
        "seed": int(seed),
        "channel": {
            "kind": spec.kind.value,
            "transmissivity": spec.transmissivity,
            "gain": spec.gain,
            "env_energy": spec.env_energy,
        },
    }


def state_from_json(payload: dict):
    d = int(payload["dimension"])
    re = np.asarray(payload["entries_re"], dtype=float).reshape(d, d)
    im = np.asarray(payload["entries_im"], dtype=float).reshape(d, d)
    rho = DensityMatrix.from_matrix(re + 1j * im)
    ch = payload["channel"]
    spec = ChannelSpec(
        kind=ChannelKind(ch["kind"]),
        transmissivity=ch.get("transmissivity"),
        gain=ch.get("gain"),
        env_energy=ch.get("env_energy", 0.0),
    )
    return rho, int(payload["seed"]), spec


def write_counterexample(path, state: DensityMatrix, seed: int, spec: ChannelSpec) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_json(state, seed, spec), fh, sort_keys=True, indent=2)
        fh.write("\n")
