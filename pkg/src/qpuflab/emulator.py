"""Emulation circuit: rebuild a unitary's action on a new input from samples.

Given sample pairs ``(phi_i, phi_i_out = U phi_i)`` and a designated
reference pair, the circuit pushes an input ``psi`` onto the reference state
(stage 1 + a post-selected projective measurement, stage 2), swaps in the
*output* reference state (stage 3), and then runs the stage-1 blocks
time-reversed with the output samples (stage 4).  When the input lies in the
span of the samples, the result approximates ``U psi`` with fidelity at least
the square root of the stage-1 success probability.

Register layout: the system register (dimension ``D``) comes first, followed
by one ancilla qubit per non-reference sample, each prepared in ``|->``.
The reference state needs no block of its own: reflecting around it is
exactly what the stage-2 measurement already does.

Stage-1 blocks apply, controlled on the block's ancilla: a reflection around
the reference, a Hadamard on the ancilla, then a reflection around the
block's sample.  Stage 4 runs the blocks in reverse order *and* reverses the
gate order inside each block (reflections and Hadamards are involutions, so
this is the exact inverse circuit built from output states).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionCapExceeded,
    DimensionMismatch,
    InvalidQuantumObject,
    PostSelectionFailure,
)
from .numerics import (
    DensityMatrix,
    StateVector,
    UnitaryMatrix,
    max_dim,
)

#: label used for the circuit input state in closed-form terms
INPUT_LABEL = -1

#: stage-2 outcomes below this probability cannot be post-selected
POST_SELECT_FLOOR = 1e-12

_SQRT2 = np.sqrt(2.0)
_MINUS = np.array([1.0, -1.0], dtype=np.complex128) / _SQRT2
_HGATE = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / _SQRT2


@dataclass(frozen=True, eq=False)
class QeConfig:
    """Sample set, its images, the reference choice, and the stage-2 policy."""

    samples_in: tuple[StateVector, ...]
    samples_out: tuple[StateVector, ...]
    reference_index: int
    post_select: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples_in", tuple(self.samples_in))
        object.__setattr__(self, "samples_out", tuple(self.samples_out))
        k = len(self.samples_in)
        if k == 0:
            raise InvalidQuantumObject("at least one sample is required")
        if len(self.samples_out) != k:
            raise DimensionMismatch("samples_in and samples_out lengths differ")
        dim = self.samples_in[0].dim
        for s in self.samples_in + self.samples_out:
            if s.dim != dim:
                raise DimensionMismatch("all samples must share one dimension")
        if not 0 <= self.reference_index < k:
            raise InvalidQuantumObject(
                f"reference_index {self.reference_index} outside 0..{k - 1}"
            )
        if dim * 2 ** (k - 1) > max_dim():
            raise DimensionCapExceeded(
                f"joint dimension {dim * 2 ** (k - 1)} exceeds cap {max_dim()}"
            )

    @property
    def dim(self) -> int:
        return self.samples_in[0].dim

    @property
    def n_blocks(self) -> int:
        """One block per non-reference sample."""
        return len(self.samples_in) - 1

    @property
    def block_sample_indices(self) -> tuple[int, ...]:
        """Sample indices driving the blocks, in application order."""
        return tuple(
            i for i in range(len(self.samples_in)) if i != self.reference_index
        )


@dataclass(frozen=True)
class ClosedFormTerm:
    """One summand of the exact stage-1 output expansion.

    ``system_label`` indexes ``samples_in`` (or ``INPUT_LABEL`` for the
    circuit input); ``ancilla_bits`` lists the ancilla basis state, one bit
    per block in application order.
    """

    coefficient: complex
    system_label: int
    ancilla_bits: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class QeRunResult:
    """Outcome of a full emulation run.

    ``stage2_bit`` is the measured stage-2 outcome (0 = success) or ``None``
    when no collapse happened (mixture mode).  ``output_state`` is the best
    pure description of the system register (the principal eigenvector of
    ``output_mixed``); it is exact whenever the reduced output is pure, as in
    the perfect-forgery regime.  ``fidelity_vs_target`` is the sandwich
    ``<target| output_mixed |target>`` when a target was supplied.
    """

    output_state: StateVector
    output_mixed: DensityMatrix
    stage2_bit: int | None
    p_succ_stage1: float
    stage2_pass_prob: float
    fidelity_vs_target: float | None


def reflection(phi: StateVector) -> np.ndarray:
    """Householder reflection ``I - 2|phi><phi|`` as a raw matrix."""
    amps = phi.amplitudes
    return np.eye(phi.dim, dtype=np.complex128) - 2.0 * np.outer(amps, amps.conj())


def controlled_reflection(phi: StateVector) -> UnitaryMatrix:
    """Two-register gate: identity on control ``|0>``, reflection on ``|1>``.

    Control qubit is the first tensor factor; the returned matrix acts on a
    space of dimension ``2 * phi.dim``.
    """
    zero = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=np.complex128)
    one = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=np.complex128)
    mat = np.kron(zero, np.eye(phi.dim)) + np.kron(one, reflection(phi))
    return UnitaryMatrix(mat)


def block_unitary(sample: StateVector, reference: StateVector) -> UnitaryMatrix:
    """Stage-1 block as a (control x system) matrix.

    Applies, right to left: reflection around the reference, Hadamard on the
    control, reflection around the sample.  Conjugating the system factor by
    any unitary ``U`` turns the block built from ``(sample, reference)`` into
    the block built from ``(U sample, U reference)``.
    """
    if sample.dim != reference.dim:
        raise DimensionMismatch("sample and reference dims differ")
    h_on_control = np.kron(_HGATE, np.eye(sample.dim))
    mat = (
        controlled_reflection(sample).matrix
        @ h_on_control
        @ controlled_reflection(reference).matrix
    )
    return UnitaryMatrix(mat)


def _controlled_reflect(joint: np.ndarray, phi: np.ndarray, axis: int) -> np.ndarray:
    """Reflect the system register on the ``|1>`` branch of one ancilla axis."""
    moved = np.moveaxis(joint, axis, -1).copy()
    branch = moved[..., 1]
    overlap = np.tensordot(phi.conj(), branch, axes=(0, 0))
    moved[..., 1] = branch - 2.0 * np.multiply.outer(phi, overlap)
    return np.moveaxis(moved, -1, axis)


def _hadamard(joint: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(joint, axis, -1).copy()
    s0 = moved[..., 0].copy()
    s1 = moved[..., 1].copy()
    moved[..., 0] = (s0 + s1) / _SQRT2
    moved[..., 1] = (s0 - s1) / _SQRT2
    return np.moveaxis(moved, -1, axis)


def _initial_joint(cfg: QeConfig, psi: StateVector) -> np.ndarray:
    joint = psi.amplitudes
    for _ in range(cfg.n_blocks):
        joint = np.multiply.outer(joint, _MINUS)
    return joint


def run_stage1(
    cfg: QeConfig, psi: StateVector
) -> tuple[StateVector, list[StateVector]]:
    """Exact joint state after all stage-1 blocks, plus per-block snapshots.

    The joint state lives on system x ancillas with one ancilla per block;
    ancillas belonging to later blocks are still ``|->`` in earlier
    snapshots.
    """
    if psi.dim != cfg.dim:
        raise DimensionMismatch(f"input dim {psi.dim} != sample dim {cfg.dim}")
    ref = cfg.samples_in[cfg.reference_index].amplitudes
    joint = _initial_joint(cfg, psi)
    snapshots: list[StateVector] = []
    for pos, sample_idx in enumerate(cfg.block_sample_indices):
        axis = 1 + pos
        joint = _controlled_reflect(joint, ref, axis)
        joint = _hadamard(joint, axis)
        joint = _controlled_reflect(joint, cfg.samples_in[sample_idx].amplitudes, axis)
        snapshots.append(StateVector(joint.reshape(-1)))
    return StateVector(joint.reshape(-1)), snapshots


def p_succ_stage1(joint: StateVector, reference: StateVector) -> float:
    """Squared sandwich of the reference through the reduced system state.

    Equals ``(<ref| Tr_anc |chi><chi| |ref>)**2``; the stage-2 measurement
    passes with the square root of this value.
    """
    d = reference.dim
    if joint.dim % d != 0:
        raise DimensionMismatch(f"joint dim {joint.dim} not divisible by {d}")
    mat = joint.amplitudes.reshape(d, -1)
    weight = float(np.sum(np.abs(mat.conj().T @ reference.amplitudes) ** 2))
    return weight**2


def stage1_closed_form(cfg: QeConfig, psi: StateVector) -> list[ClosedFormTerm]:
    """Stage-1 output as an exact sum over labeled system states.

    Runs the block recursion symbolically: each block maps a term
    ``c * |x>|bits>`` to five terms whose coefficients involve only inner
    products with the reference and the block's sample.  Terms with equal
    label and ancilla bits are merged; coefficients below 1e-14 (exactly
    cancelled or structurally zero branches) are dropped.
    """
    if psi.dim != cfg.dim:
        raise DimensionMismatch(f"input dim {psi.dim} != sample dim {cfg.dim}")

    def vec(label: int) -> np.ndarray:
        if label == INPUT_LABEL:
            return psi.amplitudes
        return cfg.samples_in[label].amplitudes

    def ip(a: int, b: int) -> complex:
        return complex(np.vdot(vec(a), vec(b)))

    r = cfg.reference_index
    terms: dict[tuple[int, tuple[int, ...]], complex] = {(INPUT_LABEL, ()): 1.0 + 0j}
    for sample_idx in cfg.block_sample_indices:
        new: dict[tuple[int, tuple[int, ...]], complex] = {}

        def add(label: int, bits: tuple[int, ...], c: complex) -> None:
            key = (label, bits)
            new[key] = new.get(key, 0.0 + 0j) + c

        for (label, bits), c in terms.items():
            ref_overlap = ip(r, label)
            add(r, bits + (0,), c * ref_overlap)
            add(label, bits + (1,), c)
            add(r, bits + (1,), -c * ref_overlap)
            add(sample_idx, bits + (1,), -2.0 * c * ip(sample_idx, label))
            add(sample_idx, bits + (1,), 2.0 * c * ip(sample_idx, r) * ref_overlap)
        terms = new

    kept = [
        ClosedFormTerm(coefficient=c, system_label=label, ancilla_bits=bits)
        for (label, bits), c in terms.items()
        if abs(c) > 1e-14
    ]
    kept.sort(key=lambda t: (t.ancilla_bits, t.system_label))
    return kept


def closed_form_state(
    cfg: QeConfig, psi: StateVector, terms: list[ClosedFormTerm] | None = None
) -> StateVector:
    """Sum a closed-form term list back into a joint state vector."""
    if terms is None:
        terms = stage1_closed_form(cfg, psi)
    d = cfg.dim
    joint = np.zeros((d,) + (2,) * cfg.n_blocks, dtype=np.complex128)
    for t in terms:
        if len(t.ancilla_bits) != cfg.n_blocks:
            raise DimensionMismatch("term has wrong number of ancilla bits")
        sys_vec = (
            psi.amplitudes
            if t.system_label == INPUT_LABEL
            else cfg.samples_in[t.system_label].amplitudes
        )
        joint[(slice(None),) + t.ancilla_bits] += t.coefficient * sys_vec
    return StateVector(joint.reshape(-1))


def _stage4(joint: np.ndarray, cfg: QeConfig) -> np.ndarray:
    """Time-reversed blocks built from the output samples."""
    ref_out = cfg.samples_out[cfg.reference_index].amplitudes
    for pos in reversed(range(cfg.n_blocks)):
        axis = 1 + pos
        sample_idx = cfg.block_sample_indices[pos]
        joint = _controlled_reflect(
            joint, cfg.samples_out[sample_idx].amplitudes, axis
        )
        joint = _hadamard(joint, axis)
        joint = _controlled_reflect(joint, ref_out, axis)
    return joint


def _reduced_system(joint: np.ndarray, dim: int) -> np.ndarray:
    mat = joint.reshape(dim, -1)
    return mat @ mat.conj().T


def _principal_state(rho: np.ndarray) -> StateVector:
    w, v = np.linalg.eigh(rho)
    vec = v[:, -1]
    pivot = int(np.argmax(np.abs(vec)))
    vec = vec * (vec[pivot].conj() / abs(vec[pivot]))
    return StateVector(vec / np.linalg.norm(vec))


def run_full(
    cfg: QeConfig,
    psi: StateVector,
    rng: np.random.Generator | None = None,
    target: StateVector | None = None,
    sample_stage2: bool = False,
) -> QeRunResult:
    """Run all four stages and report the system register's output.

    Stage-2 handling:

    * ``cfg.post_select`` true (default): condition on the passing outcome
      and record its probability.  Raises :class:`PostSelectionFailure` when
      that probability is below ``POST_SELECT_FLOOR``.
    * ``sample_stage2`` true: draw the outcome from ``rng`` instead; a failed
      draw aborts the run and reports the failure branch as-is (no restore
      stages), modeling a single physical execution without retries.
    * ``cfg.post_select`` false: no collapse; both branches are propagated
      through the restore stages and mixed, and ``output_mixed`` is the exact
      channel output.
    """
    if sample_stage2 and rng is None:
        raise InvalidQuantumObject("sampling the stage-2 outcome requires an rng")
    d = cfg.dim
    ref_in = cfg.samples_in[cfg.reference_index].amplitudes
    ref_out = cfg.samples_out[cfg.reference_index].amplitudes

    joint_sv, _ = run_stage1(cfg, psi)
    joint = joint_sv.amplitudes.reshape((d,) + (2,) * cfg.n_blocks)

    # stage 2: measure the projector onto the reference (via an ancilla that
    # is never represented explicitly: outcome 0 projects, outcome 1 deflects)
    anc_overlap = np.tensordot(ref_in.conj(), joint, axes=(0, 0))
    pass_prob = float(np.sum(np.abs(anc_overlap) ** 2))
    pass_prob = min(max(pass_prob, 0.0), 1.0)
    p_succ = pass_prob**2

    def success_final() -> np.ndarray:
        # post-stage-2 state is ref (x) Omega; stage 3 swaps in the output
        # reference, stage 4 restores the input's information from Omega
        omega = anc_overlap / np.sqrt(pass_prob)
        return _stage4(np.multiply.outer(ref_out, omega), cfg)

    def failure_joint() -> np.ndarray:
        projected = np.multiply.outer(ref_in, anc_overlap)
        fail = joint - projected
        return fail / np.linalg.norm(fail)

    stage2_bit: int | None
    if cfg.post_select and not sample_stage2:
        if pass_prob < POST_SELECT_FLOOR:
            raise PostSelectionFailure(
                f"stage-2 pass probability {pass_prob:.3e} is negligible"
            )
        stage2_bit = 0
        rho_sys = _reduced_system(success_final(), d)
    elif sample_stage2:
        if pass_prob < POST_SELECT_FLOOR:
            raise PostSelectionFailure(
                f"stage-2 pass probability {pass_prob:.3e} is negligible"
            )
        if rng.random() < pass_prob:
            stage2_bit = 0
            rho_sys = _reduced_system(success_final(), d)
        else:
            stage2_bit = 1
            rho_sys = _reduced_system(failure_joint(), d)
    else:
        # mixture mode: measured-but-unread stage 2, restore runs regardless
        stage2_bit = None
        rho_sys = np.zeros((d, d), dtype=np.complex128)
        if pass_prob > 1e-15:
            rho_sys += pass_prob * _reduced_system(success_final(), d)
        if pass_prob < 1.0 - 1e-15:
            # after the swap the system is the output reference; the old
            # system register leaves with the swapped-out state, so only the
            # ancilla correlations survive into stage 4
            fail = failure_joint().reshape(d, -1)
            rho_anc = fail.T @ fail.conj()
            w, v = np.linalg.eigh(rho_anc)
            acc = np.zeros((d, d), dtype=np.complex128)
            for k in range(w.shape[0]):
                if w[k] <= 1e-14:
                    continue
                omega = v[:, k].reshape((2,) * cfg.n_blocks)
                final = _stage4(np.multiply.outer(ref_out, omega), cfg)
                acc += float(w[k]) * _reduced_system(final, d)
            rho_sys += (1.0 - pass_prob) * acc

    rho_sys = 0.5 * (rho_sys + rho_sys.conj().T)
    output_mixed = DensityMatrix(rho_sys / float(np.trace(rho_sys).real))
    fidelity = None
    if target is not None:
        if target.dim != d:
            raise DimensionMismatch(f"target dim {target.dim} != system dim {d}")
        t = target.amplitudes
        fidelity = float(np.real(t.conj() @ output_mixed.matrix @ t))
    return QeRunResult(
        output_state=_principal_state(output_mixed.matrix),
        output_mixed=output_mixed,
        stage2_bit=stage2_bit,
        p_succ_stage1=p_succ,
        stage2_pass_prob=pass_prob,
        fidelity_vs_target=fidelity,
    )
