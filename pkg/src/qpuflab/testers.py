"""Equality tests a verifier can run between a response and a guess.

Two test families:

* ``swap`` -- repeat a swap test on ``c = min(kappa1, kappa2)`` fresh copy
  pairs and accept only if every repetition passes.  A single swap test
  passes with probability ``(1 + F) / 2``, so acceptance happens with
  probability ``((1 + F) / 2) ** c`` and orthogonal states slip through with
  probability exactly ``2 ** -c``.
* ``ideal`` -- a deterministic threshold oracle: accept iff the fidelity is
  at least ``delta``.  This is the abstract test used by the security bounds;
  it upper-bounds anything a physical tester could do at the same threshold.

Swap tests are sampled analytically (a Bernoulli draw at the exact pass
probability).  ``swap_test_once`` can also build the Hadamard /
controlled-SWAP / Hadamard circuit explicitly as a cross-check that the
shortcut is faithful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidQuantumObject
from .numerics import StateVector, fidelity_pure

SWAP = "swap"
IDEAL = "ideal"


@dataclass(frozen=True)
class TestConfig:
    """Which test to run and how many copies each side contributes."""

    kind: str
    kappa1: int = 1
    kappa2: int = 1
    delta: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (SWAP, IDEAL):
            raise InvalidQuantumObject(f"unknown test kind {self.kind!r}")
        if self.kappa1 < 1 or self.kappa2 < 1:
            raise InvalidQuantumObject("copy counts must be at least 1")
        if self.kind == IDEAL:
            if self.delta is None or not 0.0 < self.delta <= 1.0:
                raise InvalidQuantumObject(
                    f"ideal test needs a threshold in (0, 1], got {self.delta}"
                )
        elif self.delta is not None:
            raise InvalidQuantumObject("swap test takes no threshold")

    @property
    def pairs(self) -> int:
        """Number of swap repetitions the copy budget supports."""
        return min(self.kappa1, self.kappa2)


@dataclass(frozen=True)
class TestOutcome:
    accepted: bool
    pass_count: int
    pairs_run: int

    def __post_init__(self) -> None:
        if not 0 <= self.pass_count <= self.pairs_run:
            raise InvalidQuantumObject("pass_count outside 0..pairs_run")


def swap_test_pass_prob(a: StateVector, b: StateVector) -> float:
    """Exact single-swap-test pass probability ``(1 + F) / 2``."""
    return 0.5 * (1.0 + fidelity_pure(a, b))


def swap_test_once(
    a: StateVector,
    b: StateVector,
    rng: np.random.Generator,
    mode: str = "analytic",
) -> bool:
    """One swap test; True means the ancilla came out ``|0>`` (pass)."""
    if mode == "analytic":
        return bool(rng.random() < swap_test_pass_prob(a, b))
    if mode == "circuit":
        return _swap_test_circuit(a, b, rng)
    raise InvalidQuantumObject(f"unknown swap test mode {mode!r}")


def _swap_test_circuit(a: StateVector, b: StateVector, rng: np.random.Generator) -> bool:
    """Explicit ancilla + controlled-SWAP circuit, sampled at the end."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"state dims differ: {a.dim} vs {b.dim}")
    d = a.dim
    # ancilla |0>, Hadamard: equal superposition over control branches
    pair = np.multiply.outer(a.amplitudes, b.amplitudes)
    branches = np.stack([pair, pair]) / np.sqrt(2.0)
    # controlled swap of the two registers on the |1> branch
    branches[1] = branches[1].T
    # final Hadamard on the ancilla
    out0 = (branches[0] + branches[1]) / np.sqrt(2.0)
    p_zero = float(np.sum(np.abs(out0) ** 2))
    return bool(rng.random() < p_zero)


def expected_acceptance(fidelity: float, pairs: int) -> float:
    """All-pass acceptance probability ``((1 + F) / 2) ** pairs``."""
    return (0.5 * (1.0 + fidelity)) ** pairs


def worst_case_error(pairs: int) -> float:
    """Probability that orthogonal states pass the all-pass battery."""
    return 0.5**pairs


def run_test(
    cfg: TestConfig,
    target: StateVector,
    guess: StateVector,
    rng: np.random.Generator,
) -> TestOutcome:
    """Execute the configured test between the true response and a guess.

    The state arguments are classical descriptions standing in for the copy
    bundles; ``cfg`` says how many copies each side holds.
    """
    if target.dim != guess.dim:
        raise DimensionMismatch(f"state dims differ: {target.dim} vs {guess.dim}")
    if cfg.kind == IDEAL:
        accepted = fidelity_pure(target, guess) >= cfg.delta - 1e-12
        return TestOutcome(accepted=accepted, pass_count=int(accepted), pairs_run=1)
    c = cfg.pairs
    p = swap_test_pass_prob(target, guess)
    passes = int(np.count_nonzero(rng.random(c) < p))
    return TestOutcome(accepted=passes == c, pass_count=passes, pairs_run=c)
