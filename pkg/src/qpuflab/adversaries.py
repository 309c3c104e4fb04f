"""Adversary strategies for the unforgeability games.

Baseline adversaries only ever use what the game hands them: oracle
responses and the challenge object.  Two strategies model explicitly granted
extra power and say so in their contracts:

* ``TomographyAdversary`` reconstructs the device column by column and must
  be constructed with a :class:`PrivilegedReadout` grant (exact amplitude
  access to response states -- physically an exponential-resource attacker).
* ``SubspaceAdversary`` is informed: it receives classical descriptions of
  its challenge and of the learned response basis, the strongest form of the
  partial-knowledge attacker the selective-game bound is proved against.

``QeForger`` is the existential-game attack built on the emulation circuit:
two learning queries, a challenge orthogonal to the first one, and a
guaranteed fidelity floor that reaches exact forgery for mu <= 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .emulator import QeConfig, QeRunResult, run_full
from .errors import (
    BudgetRefusal,
    DimensionMismatch,
    InvalidQuantumObject,
    PreconditionViolation,
    PrivilegeRequired,
)
from .games import SealedOracle
from .numerics import (
    CONSTRUCTION_TOL,
    StateVector,
    UnitaryMatrix,
    apply,
    haar_state,
)
from .qpuf import QPufInstance, qeval


def _basis_state(dim: int, index: int) -> StateVector:
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return StateVector(v)


class RandomGuesser:
    """No learning, Haar-random guess; the floor every bound must beat."""

    def __init__(self) -> None:
        self._dim: int | None = None

    def learn(
        self,
        oracle: SealedOracle,
        dim: int,
        budget: int,
        rng: np.random.Generator,
    ) -> None:
        self._dim = dim

    def respond(self, challenge: StateVector, rng: np.random.Generator) -> StateVector:
        return haar_state(self._dim if self._dim else challenge.dim, rng)


# ---------------------------------------------------------------------------
# partial-knowledge adversary


@dataclass(frozen=True, eq=False)
class SubspaceKnowledge:
    """Orthonormal input states and their (orthonormal) device images."""

    dim: int
    basis_in: tuple[StateVector, ...]
    basis_out: tuple[StateVector, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "basis_in", tuple(self.basis_in))
        object.__setattr__(self, "basis_out", tuple(self.basis_out))
        if len(self.basis_in) != len(self.basis_out):
            raise DimensionMismatch("basis_in and basis_out lengths differ")
        for family in (self.basis_in, self.basis_out):
            for i, a in enumerate(family):
                if a.dim != self.dim:
                    raise DimensionMismatch("basis state dimension mismatch")
                for j, b in enumerate(family):
                    want = 1.0 if i == j else 0.0
                    if abs(np.vdot(a.amplitudes, b.amplitudes) - want) > 1e-9:
                        raise InvalidQuantumObject("basis family is not orthonormal")

    @property
    def d(self) -> int:
        return len(self.basis_in)


class SubspaceAdversary:
    """Knows the device's action on a d-dimensional subspace, nothing else.

    The in-span component of the challenge is mapped through the learned
    images; the orthogonal remainder is replaced by a Haar draw from the
    complement of the learned image subspace, with the original weights.
    Reading the challenge's amplitudes is the granted extra knowledge.
    """

    def __init__(
        self, d: int | None = None, knowledge: SubspaceKnowledge | None = None
    ) -> None:
        if (d is None) == (knowledge is None):
            raise InvalidQuantumObject("pass exactly one of d or knowledge")
        if d is not None and d < 0:
            raise InvalidQuantumObject(f"subspace dimension {d} is negative")
        self._d = d
        self.knowledge = knowledge

    def learn(
        self,
        oracle: SealedOracle,
        dim: int,
        budget: int,
        rng: np.random.Generator,
    ) -> None:
        if self.knowledge is not None:
            return
        if self._d > dim:
            raise InvalidQuantumObject(f"subspace dim {self._d} exceeds space {dim}")
        basis_in = tuple(_basis_state(dim, i) for i in range(self._d))
        basis_out = tuple(oracle.query(b) for b in basis_in)
        self.knowledge = SubspaceKnowledge(
            dim=dim, basis_in=basis_in, basis_out=basis_out
        )

    def respond(self, challenge: StateVector, rng: np.random.Generator) -> StateVector:
        kn = self.knowledge
        if kn is None:
            raise InvalidQuantumObject("respond called before learn")
        psi = challenge.amplitudes
        guess = np.zeros(kn.dim, dtype=np.complex128)
        in_weight = 0.0
        for b_in, b_out in zip(kn.basis_in, kn.basis_out):
            c = np.vdot(b_in.amplitudes, psi)
            guess += c * b_out.amplitudes
            in_weight += float(abs(c) ** 2)
        rest = 1.0 - min(in_weight, 1.0)
        if rest > 1e-12:
            guess += np.sqrt(rest) * self._complement_draw(kn, rng)
        return StateVector(guess / np.linalg.norm(guess))

    @staticmethod
    def _complement_draw(kn: SubspaceKnowledge, rng: np.random.Generator) -> np.ndarray:
        while True:
            v = haar_state(kn.dim, rng).amplitudes.copy()
            for b_out in kn.basis_out:
                v -= np.vdot(b_out.amplitudes, v) * b_out.amplitudes
            norm = float(np.linalg.norm(v))
            if norm > 1e-6:  # fails only on a measure-zero draw
                return v / norm


def subspace_adversary(knowledge: SubspaceKnowledge) -> SubspaceAdversary:
    """Adversary preloaded with subspace knowledge (no in-game learning)."""
    return SubspaceAdversary(knowledge=knowledge)


# ---------------------------------------------------------------------------
# full-tomography adversary (privileged)


class PrivilegedReadout:
    """Grant of exact amplitude access to quantum states.

    Physically this stands for unbounded process tomography; constructing
    one is the explicit opt-in required by adversaries that need it.
    """

    def amplitudes(self, state: StateVector) -> np.ndarray:
        return state.amplitudes.copy()


class TomographyAdversary:
    """Reconstructs the device exactly from all basis-state responses.

    Needs ``2**n`` learning queries and a :class:`PrivilegedReadout`; wins
    every selective game at any threshold once it has both.
    """

    def __init__(self, readout: PrivilegedReadout) -> None:
        if not isinstance(readout, PrivilegedReadout):
            raise PrivilegeRequired(
                "tomography requires an explicit PrivilegedReadout grant"
            )
        self._readout = readout
        self.reconstructed: UnitaryMatrix | None = None

    def learn(
        self,
        oracle: SealedOracle,
        dim: int,
        budget: int,
        rng: np.random.Generator,
    ) -> None:
        if budget < dim:
            raise BudgetRefusal(
                f"tomography needs {dim} queries, budget allows {budget}"
            )
        cols = np.zeros((dim, dim), dtype=np.complex128)
        for i in range(dim):
            response = oracle.query(_basis_state(dim, i))
            cols[:, i] = self._readout.amplitudes(response)
        self.reconstructed = UnitaryMatrix(cols)

    def respond(self, challenge: StateVector, rng: np.random.Generator) -> StateVector:
        if self.reconstructed is None:
            raise InvalidQuantumObject("respond called before learn")
        return apply(self.reconstructed, challenge)


def tomography_adversary(n: int, readout: PrivilegedReadout) -> TomographyAdversary:
    """Constructor-style helper; ``n`` is the expected register width."""
    if n < 1:
        raise InvalidQuantumObject(f"qubits must be >= 1, got {n}")
    return TomographyAdversary(readout)


# ---------------------------------------------------------------------------
# emulation forger


@dataclass(frozen=True, eq=False)
class ForgerPlan:
    """The two learning queries and the challenge of the emulation attack.

    ``phi3`` (the challenge) is orthogonal to ``phi1``; ``phi2`` is their
    superposition -- balanced for mu <= 1/2, else weighted so that
    ``F(phi3, phi2) = 1 - mu`` exactly.  ``alpha`` and ``beta`` are the
    overlaps of ``phi2`` with the challenge and with ``phi1``; they satisfy
    ``alpha**2 + beta**2 = 1``.
    """

    mu: float
    phi1: StateVector
    phi2: StateVector
    phi3: StateVector
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if abs(self.alpha**2 + self.beta**2 - 1.0) > CONSTRUCTION_TOL:
            raise InvalidQuantumObject("overlaps do not satisfy alpha^2+beta^2=1")
        if abs(np.vdot(self.phi1.amplitudes, self.phi3.amplitudes)) > CONSTRUCTION_TOL:
            raise InvalidQuantumObject("challenge must be orthogonal to phi1")


def default_mu_margin(dim: int) -> float:
    """Margin keeping mu away from the trivial mu -> 1 endpoint: 1/(2 D)."""
    return 0.5 / dim


def make_forger_plan(
    mu: float,
    dim: int,
    phi1: StateVector | None = None,
    phi3: StateVector | None = None,
    margin: float | None = None,
) -> ForgerPlan:
    """Build the forger's query/challenge states for a given mu.

    Raises :class:`PreconditionViolation` when mu exceeds ``1 - margin``:
    the attack's fidelity floor degenerates as mu -> 1, so a non-negligible
    margin is part of its contract.
    """
    if margin is None:
        margin = default_mu_margin(dim)
    if not 0.0 <= mu <= 1.0 - margin + 1e-12:
        raise PreconditionViolation(
            f"mu={mu} outside [0, 1 - margin] with margin {margin}"
        )
    if phi1 is None:
        phi1 = _basis_state(dim, 0)
    if phi3 is None:
        phi3 = _basis_state(dim, 1)
    if phi1.dim != dim or phi3.dim != dim:
        raise DimensionMismatch("plan states must match the declared dimension")
    if mu <= 0.5:
        weight = 0.5
    else:
        weight = mu
    amps2 = np.sqrt(weight) * phi1.amplitudes + np.sqrt(1.0 - weight) * phi3.amplitudes
    phi2 = StateVector(amps2)
    return ForgerPlan(
        mu=mu,
        phi1=phi1,
        phi2=phi2,
        phi3=phi3,
        alpha=float(np.sqrt(1.0 - weight)),
        beta=float(np.sqrt(weight)),
    )


def forgery_fidelity_bound(mu: float) -> float:
    """Certified fidelity floor of the emulation forger.

    ``(1 - mu) * (1 + 4 mu (1 - mu))`` on the weighted branch (mu > 1/2);
    the balanced branch used at mu <= 1/2 achieves exact forgery, so the
    floor there is 1.
    """
    if mu <= 0.5:
        return 1.0
    return (1.0 - mu) * (1.0 + 4.0 * mu * (1.0 - mu))


class QeForger:
    """Existential-game adversary running the emulation circuit.

    Learning queries the plan's ``phi1`` and ``phi2``; the challenge is
    ``phi3``; the guess is the circuit output with ``phi2`` as reference.
    The stage-2 measurement is sampled (one physical run, no retries), so on
    the weighted branch the guess occasionally comes from the failure
    branch; at mu <= 1/2 stage 2 passes with certainty.
    """

    def __init__(
        self,
        mu: float,
        phi1: StateVector | None = None,
        phi3: StateVector | None = None,
        margin: float | None = None,
    ) -> None:
        if not 0.0 <= mu <= 1.0:
            raise InvalidQuantumObject(f"mu={mu} outside [0, 1]")
        self._mu = mu
        self._phi1 = phi1
        self._phi3 = phi3
        self._margin = margin
        self.plan: ForgerPlan | None = None
        self.last_result: QeRunResult | None = None
        self._responses: tuple[StateVector, StateVector] | None = None

    def learn(
        self,
        oracle: SealedOracle,
        dim: int,
        budget: int,
        rng: np.random.Generator,
    ) -> None:
        self.plan = make_forger_plan(
            self._mu, dim, phi1=self._phi1, phi3=self._phi3, margin=self._margin
        )
        self._responses = (
            oracle.query(self.plan.phi1),
            oracle.query(self.plan.phi2),
        )

    def choose_challenge(self, rng: np.random.Generator) -> StateVector:
        if self.plan is None:
            raise InvalidQuantumObject("choose_challenge called before learn")
        return self.plan.phi3

    def respond(self, challenge: StateVector, rng: np.random.Generator) -> StateVector:
        if self.plan is None or self._responses is None:
            raise InvalidQuantumObject("respond called before learn")
        cfg = QeConfig(
            samples_in=(self.plan.phi1, self.plan.phi2),
            samples_out=self._responses,
            reference_index=1,
            post_select=True,
        )
        self.last_result = run_full(cfg, challenge, rng=rng, sample_stage2=True)
        return self.last_result.output_state


@dataclass(frozen=True, eq=False)
class ForgeryReport:
    """Audit record of one conditioned (post-selected) forgery run."""

    mu: float
    fidelity: float
    p_succ_stage1: float
    stage2_pass_prob: float
    theory_bound: float
    plan: ForgerPlan


def run_forgery(
    instance: QPufInstance,
    mu: float,
    phi1: StateVector | None = None,
    phi3: StateVector | None = None,
    margin: float | None = None,
) -> ForgeryReport:
    """Run the emulation attack against a known device and audit it.

    This is the analysis pipeline, not a game: the device is queried
    directly, stage 2 is post-selected (conditioned, not sampled), and the
    achieved fidelity is measured against the true response to the
    challenge.
    """
    plan = make_forger_plan(mu, instance.dim, phi1=phi1, phi3=phi3, margin=margin)
    cfg = QeConfig(
        samples_in=(plan.phi1, plan.phi2),
        samples_out=(qeval(instance, plan.phi1), qeval(instance, plan.phi2)),
        reference_index=1,
        post_select=True,
    )
    result = run_full(cfg, plan.phi3, target=qeval(instance, plan.phi3))
    return ForgeryReport(
        mu=mu,
        fidelity=float(result.fidelity_vs_target),
        p_succ_stage1=result.p_succ_stage1,
        stage2_pass_prob=result.stage2_pass_prob,
        theory_bound=forgery_fidelity_bound(mu),
        plan=plan,
    )
