"""Exact linear-algebra layer: states, channels' raw material, and metrics.

All simulation in this package is dense, double-precision and exact up to
floating point; nothing here is sampled except the Haar draws, which take an
explicit ``numpy.random.Generator``.

Conventions fixed once for the whole package:

* fidelity between pure states is the *squared* overlap ``|<a|b>|^2``; the
  mixed-state fidelity reduces to it on rank-one inputs,
* a register on ``n`` qubits has dimension ``2**n``,
* state equality is always judged via fidelity, never componentwise, so
  global phase is irrelevant everywhere.
"""

from __future__ import annotations

import os
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionCapExceeded,
    DimensionMismatch,
    InvalidQuantumObject,
)

#: tolerance used when validating freshly constructed objects
CONSTRUCTION_TOL = 1e-10
#: tolerance used when asserting derived quantities in tests and checks
DERIVED_TOL = 1e-8
#: singular values / residual norms below this count as numerically zero
RANK_TOL = 1e-9

_DEFAULT_MAX_DIM = 16384


def max_dim() -> int:
    """Simulation size cap: total dimension of any constructed object.

    Configurable through the ``QPUF_MAX_DIM`` environment variable.
    """
    return int(os.environ.get("QPUF_MAX_DIM", _DEFAULT_MAX_DIM))


def _frozen_array(values, shape_kind: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True)
    if shape_kind == "vector" and arr.ndim != 1:
        raise InvalidQuantumObject(f"expected a 1-d array, got shape {arr.shape}")
    if shape_kind == "matrix" and (arr.ndim != 2 or arr.shape[0] != arr.shape[1]):
        raise InvalidQuantumObject(f"expected a square matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on a Hilbert space of dimension ``dim``."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.amplitudes, "vector")
        object.__setattr__(self, "amplitudes", arr)
        if arr.size == 0:
            raise InvalidQuantumObject("state vector must be non-empty")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > CONSTRUCTION_TOL:
            raise InvalidQuantumObject(f"state vector norm {norm!r} is not 1")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.matrix, "matrix")
        object.__setattr__(self, "matrix", arr)
        if np.max(np.abs(arr - arr.conj().T)) > CONSTRUCTION_TOL:
            raise InvalidQuantumObject("density matrix is not Hermitian")
        tr = complex(np.trace(arr))
        if abs(tr - 1.0) > CONSTRUCTION_TOL:
            raise InvalidQuantumObject(f"density matrix trace {tr!r} is not 1")
        # eigvalsh cost is negligible at the desk scales this package targets
        if float(np.min(np.linalg.eigvalsh(arr))) < -RANK_TOL:
            raise InvalidQuantumObject("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        return cls(np.outer(psi.amplitudes, psi.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    """Square matrix with ``U^dag U = I`` within construction tolerance."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        arr = _frozen_array(self.matrix, "matrix")
        object.__setattr__(self, "matrix", arr)
        dev = np.max(np.abs(arr.conj().T @ arr - np.eye(arr.shape[0])))
        if dev > CONSTRUCTION_TOL:
            raise InvalidQuantumObject(f"matrix is not unitary (deviation {dev:.3e})")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Projector:
    """Hermitian idempotent operator together with its rank."""

    matrix: np.ndarray
    rank: int = field(init=False)

    def __post_init__(self) -> None:
        arr = _frozen_array(self.matrix, "matrix")
        object.__setattr__(self, "matrix", arr)
        if np.max(np.abs(arr - arr.conj().T)) > CONSTRUCTION_TOL:
            raise InvalidQuantumObject("projector is not Hermitian")
        if np.max(np.abs(arr @ arr - arr)) > CONSTRUCTION_TOL:
            raise InvalidQuantumObject("projector is not idempotent")
        object.__setattr__(self, "rank", int(round(float(np.trace(arr).real))))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product ``a (x) b``, used to attach ancilla registers."""
    total = a.dim * b.dim
    if total > max_dim():
        raise DimensionCapExceeded(
            f"tensor product dimension {total} exceeds cap {max_dim()}"
        )
    return StateVector(np.kron(a.amplitudes, b.amplitudes))


def apply(u: UnitaryMatrix, psi: StateVector) -> StateVector:
    """Evolve ``psi`` by ``u``; norm is preserved by unitarity."""
    if u.dim != psi.dim:
        raise DimensionMismatch(f"unitary dim {u.dim} != state dim {psi.dim}")
    return StateVector(u.matrix @ psi.amplitudes)


def fidelity_pure(a: StateVector, b: StateVector) -> float:
    """Squared overlap ``|<a|b>|^2``."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"state dims differ: {a.dim} vs {b.dim}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def fidelity_mixed(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``.

    Computed through eigendecompositions rather than a matrix square root of
    the product, which keeps the result real and stable for near-singular
    inputs.  Reduces to :func:`fidelity_pure` on rank-one arguments.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"density dims differ: {rho.dim} vs {sigma.dim}")
    w, v = np.linalg.eigh(rho.matrix)
    w = np.clip(w, 0.0, None)
    sqrt_rho = (v * np.sqrt(w)) @ v.conj().T
    inner = sqrt_rho @ sigma.matrix @ sqrt_rho
    eigs = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    return float(np.sum(np.sqrt(eigs)) ** 2)


def sqrt_fidelity_mixed(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Square root of :func:`fidelity_mixed`; the jointly concave form."""
    return float(np.sqrt(fidelity_mixed(rho, sigma)))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Trace distance ``0.5 * ||rho - sigma||_1``.

    For pure states this equals ``sqrt(1 - F)`` with the package's squared
    overlap fidelity ``F``.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"density dims differ: {rho.dim} vs {sigma.dim}")
    eigs = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return float(0.5 * np.sum(np.abs(eigs)))


def partial_trace(
    rho: DensityMatrix, dims: Sequence[int], keep: Sequence[int]
) -> DensityMatrix:
    """Trace out all subsystems not listed in ``keep``.

    ``dims`` factorizes the space as a tensor product in register order and
    ``keep`` lists the register indices that survive (in their original
    order).
    """
    dims = tuple(int(d) for d in dims)
    keep = tuple(int(k) for k in keep)
    if int(np.prod(dims)) != rho.dim:
        raise DimensionMismatch(f"dims {dims} do not factor dimension {rho.dim}")
    if any(k < 0 or k >= len(dims) for k in keep) or len(set(keep)) != len(keep):
        raise DimensionMismatch(f"invalid keep choice {keep} for {len(dims)} registers")
    n = len(dims)
    tens = rho.matrix.reshape(dims + dims)
    # contract each traced register's bra index with its ket index
    for reg in sorted(set(range(n)) - set(keep), reverse=True):
        tens = np.trace(tens, axis1=reg, axis2=reg + tens.ndim // 2)
    kept = int(np.prod([dims[k] for k in keep])) if keep else 1
    return DensityMatrix(tens.reshape(kept, kept))


def span_projector(states: Sequence[StateVector]) -> Projector:
    """Orthogonal projector onto the span of the given states.

    Uses modified Gram-Schmidt with one re-orthogonalization pass; input
    vectors whose residual norm falls below ``RANK_TOL`` are treated as
    linearly dependent and dropped, so duplicates collapse to rank 1.
    """
    if not states:
        raise InvalidQuantumObject("span of an empty family is undefined")
    dim = states[0].dim
    if any(s.dim != dim for s in states):
        raise DimensionMismatch("states span different Hilbert spaces")
    basis: list[np.ndarray] = []
    for s in states:
        v = s.amplitudes.copy()
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            for e in basis:
                v -= np.vdot(e, v) * e
        norm = float(np.linalg.norm(v))
        if norm > RANK_TOL:
            basis.append(v / norm)
    proj = np.zeros((dim, dim), dtype=np.complex128)
    for e in basis:
        proj += np.outer(e, e.conj())
    return Projector(proj)


def haar_state(dim: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state: normalized vector of i.i.d. complex Gaussians."""
    if dim < 1:
        raise InvalidQuantumObject(f"dimension must be positive, got {dim}")
    if dim > max_dim():
        raise DimensionCapExceeded(f"dimension {dim} exceeds cap {max_dim()}")
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector(z / np.linalg.norm(z))


def haar_unitary(dim: int, rng: np.random.Generator) -> UnitaryMatrix:
    """Haar-random unitary via Ginibre matrix, QR, and phase normalization.

    The QR factor alone is not Haar distributed; multiplying each column by
    the phase of the corresponding diagonal entry of ``R`` fixes the measure.
    """
    if dim < 1:
        raise InvalidQuantumObject(f"dimension must be positive, got {dim}")
    if dim > max_dim():
        raise DimensionCapExceeded(f"dimension {dim} exceeds cap {max_dim()}")
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z / np.sqrt(2.0))
    d = np.diagonal(r)
    q = q * (d / np.abs(d))
    return UnitaryMatrix(q)
