"""State containers for truncated Fock space.

A state truncated at dimension d keeps only the Fock levels 0..d-1.  The
mass lost to the discarded tail is recorded in ``trace_deficit`` and is
never silently renormalized away; downstream checks convert the deficit
into explicit error margins instead.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimensionError, NonHermitianError, PositivityError

# Validation tolerances.  Eigenvalues in [NEG_EIG_CLAMP, 0) are treated as
# roundoff and clamped to zero; anything more negative is a real failure.
HERMITICITY_TOL = 1e-12
NEG_EIG_CLAMP = -1e-10
DIAG_NEG_CLAMP = -1e-14
TRACE_SLACK = 1e-12


def clamp_spectrum(values, floor=NEG_EIG_CLAMP):
    """Clamp tiny negative eigenvalues to zero, reject larger ones."""
    values = np.asarray(values, dtype=float)
    low = float(values.min(initial=0.0))
    if low < floor:
        raise PositivityError(
            f"negative eigenvalue {low:.3e} below clamp window {floor:.1e}"
        )
    return np.where(values < 0.0, 0.0, values)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian positive semidefinite matrix with trace at most one."""

    matrix: np.ndarray
    trace_deficit: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidDimensionError(f"density matrix must be square, got {m.shape}")
        if m.shape[0] < 1:
            raise InvalidDimensionError("density matrix must have dimension >= 1")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @classmethod
    def from_matrix(cls, matrix) -> "DensityMatrix":
        """Wrap a matrix, inferring the deficit from its trace."""
        m = np.asarray(matrix, dtype=complex)
        deficit = max(0.0, 1.0 - float(np.trace(m).real))
        return cls(m, deficit)

    def validate(self) -> "DensityMatrix":
        """Check Hermiticity, positivity and trace bookkeeping; return self."""
        m = self.matrix
        herm = float(np.abs(m - m.conj().T).max())
        if herm > HERMITICITY_TOL:
            raise NonHermitianError(f"Hermiticity defect {herm:.3e} > {HERMITICITY_TOL:.1e}")
        clamp_spectrum(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))
        tr = self.trace
        if tr > 1.0 + TRACE_SLACK:
            raise PositivityError(f"trace {tr!r} exceeds 1 + {TRACE_SLACK:.1e}")
        if tr < 1.0 - self.trace_deficit - TRACE_SLACK:
            raise PositivityError(
                f"trace {tr!r} below 1 - trace_deficit ({self.trace_deficit!r}) - slack"
            )
        return self

    def diagonal_part(self) -> "DiagonalState":
        return DiagonalState(self.matrix.diagonal().real.copy(), self.trace_deficit)


@dataclass(frozen=True)
class DiagonalState:
    """Fock-diagonal state stored as a probability vector."""

    probs: np.ndarray = field()
    trace_deficit: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise InvalidDimensionError(f"probability vector must be 1-d, got shape {p.shape}")
        low = float(p.min(initial=0.0))
        if low < DIAG_NEG_CLAMP:
            raise PositivityError(f"negative probability {low:.3e} below {DIAG_NEG_CLAMP:.1e}")
        p = np.where(p < 0.0, 0.0, p)
        object.__setattr__(self, "probs", p)

    @property
    def dim(self) -> int:
        return self.probs.size

    @property
    def trace(self) -> float:
        return float(self.probs.sum())

    @classmethod
    def from_probs(cls, probs) -> "DiagonalState":
        p = np.asarray(probs, dtype=float)
        deficit = max(0.0, 1.0 - float(p.sum()))
        return cls(p, deficit)

    def to_density(self) -> DensityMatrix:
        return DensityMatrix(np.diag(self.probs.astype(complex)), self.trace_deficit)
