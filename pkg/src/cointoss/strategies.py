"""Honest and adversarial party behaviors.

Alice's cheating strategies are a prepared global state over
``{A..., A1, B1, A2, B2}`` plus, per choice Bob can announce, a local
operation on her remaining qubits and the label she sends back for
verification. Bob's cheating strategies are a local operation on
``{B1, B2, AncillaB...}``, a set of qubits he measures, and a rule mapping
the classical result to the pair he announces; his verdict is always
"pass", so he can never be caught.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .qstate import (
    A1,
    A2,
    B1,
    B2,
    NotNormalizedError,
    StateVector,
    Subsystem,
    SubsystemLabel,
    alice_ancilla,
    bob_ancilla,
    make_state,
)

COEFFICIENT_NORM_ATOL = 1e-10


class StrategyRegisterMismatchError(Exception):
    """A strategy touches labels outside the registers it may hold."""


class UnknownStrategyError(Exception):
    """A strategy identifier does not name any known strategy."""


@dataclass(frozen=True)
class AliceCoefficients:
    """Nonnegative weights (a00, a01, a10, a11) of the four B1B2 branches."""

    a00: float
    a01: float
    a10: float
    a11: float

    def __post_init__(self) -> None:
        values = self.as_array()
        if np.any(values < 0):
            raise ValueError(f"coefficients must be nonnegative, got {tuple(values)}")
        total = float(np.sum(values**2))
        if abs(total - 1.0) > COEFFICIENT_NORM_ATOL:
            raise NotNormalizedError(
                f"squared coefficients sum to {total!r}, expected 1 within 1e-10"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.a00, self.a01, self.a10, self.a11], dtype=float)

    def flipped(self) -> "AliceCoefficients":
        """Coefficients of the globally bit-flipped state (a_ij -> a_{!i!j})."""
        return AliceCoefficients(self.a11, self.a10, self.a01, self.a00)

    @classmethod
    def from_array(cls, values) -> "AliceCoefficients":
        a = np.asarray(values, dtype=float).reshape(4)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def honest(cls) -> "AliceCoefficients":
        return cls(0.5, 0.5, 0.5, 0.5)

    @classmethod
    def optimal(cls) -> "AliceCoefficients":
        return cls(np.sqrt(2.0 / 3.0), np.sqrt(1.0 / 6.0), np.sqrt(1.0 / 6.0), 0.0)


@dataclass(frozen=True, eq=False)
class LocalOperation:
    """A unitary acting on the named qubits."""

    labels: tuple[SubsystemLabel, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        dim = 2 ** len(self.labels)
        m = np.asarray(self.matrix, dtype=np.complex128)
        if m.shape != (dim, dim):
            raise ValueError(f"operation on {len(self.labels)} qubits needs shape {(dim, dim)}")
        if not np.allclose(m.conj().T @ m, np.eye(dim), atol=1e-8):
            raise ValueError("operation matrix is not unitary")


@dataclass(frozen=True, eq=False)
class AliceResponse:
    """What Alice does after hearing Bob's choice: optional local op, then send."""

    send: SubsystemLabel
    operation: LocalOperation | None = None


ALICE_CORE = (A1, B1, A2, B2)
_ALICE_HELD_KINDS = (Subsystem.A, Subsystem.A1, Subsystem.A2)
_BOB_HELD_KINDS = (Subsystem.B1, Subsystem.B2, Subsystem.ANCILLA_B)


@dataclass(frozen=True, eq=False)
class AliceCheatStrategy:
    name: str
    initial_state: StateVector
    responses: Mapping[int, AliceResponse]

    def __post_init__(self) -> None:
        register = set(self.initial_state.register)
        missing = set(ALICE_CORE) - register
        if missing:
            raise StrategyRegisterMismatchError(
                f"initial state must cover A1,B1,A2,B2; missing {sorted(map(str, missing))}"
            )
        for label in register - set(ALICE_CORE):
            if label.kind is not Subsystem.A:
                raise StrategyRegisterMismatchError(
                    f"extra register label {label} is not an Alice ancilla"
                )
        if set(self.responses) != {1, 2}:
            raise StrategyRegisterMismatchError("responses must cover choices 1 and 2")
        held = {l for l in register if l.kind in _ALICE_HELD_KINDS}
        for choice, response in self.responses.items():
            if response.send not in held:
                raise StrategyRegisterMismatchError(
                    f"choice {choice} sends {response.send}, which Alice does not hold"
                )
            if response.operation is not None:
                stray = set(response.operation.labels) - held
                if stray:
                    raise StrategyRegisterMismatchError(
                        f"choice {choice} operates on {sorted(map(str, stray))}"
                    )


@dataclass(frozen=True, eq=False)
class BobCheatStrategy:
    name: str
    ancilla_count: int
    operation: LocalOperation | None
    measured: tuple[SubsystemLabel, ...]
    announce_rule: Mapping[tuple[int, ...], int]
    # The protocol gives Bob the final verdict; this family never aborts.
    verdict: str = "pass"

    def __post_init__(self) -> None:
        held = {B1, B2} | {bob_ancilla(i) for i in range(self.ancilla_count)}
        if self.operation is not None:
            stray = set(self.operation.labels) - held
            if stray:
                raise StrategyRegisterMismatchError(
                    f"operation touches {sorted(map(str, stray))}"
                )
        stray = set(self.measured) - held
        if stray:
            raise StrategyRegisterMismatchError(
                f"measurement touches {sorted(map(str, stray))}"
            )
        expected = {tuple(bits) for bits in _bit_tuples(len(self.measured))}
        if set(self.announce_rule) != expected:
            raise ValueError("announce rule must cover every outcome tuple exactly")
        if any(choice not in (1, 2) for choice in self.announce_rule.values()):
            raise ValueError("announced choices must be 1 or 2")
        if self.verdict != "pass":
            raise ValueError("this strategy family always passes verification")

    def announce(self, outcomes: tuple[int, ...]) -> int:
        return self.announce_rule[outcomes]


def _bit_tuples(n: int):
    for value in range(2**n):
        yield tuple((value >> (n - 1 - i)) & 1 for i in range(n))


def aligned_strategy(amplitudes, name: str = "aligned") -> AliceCheatStrategy:
    """Cheating state sum_ij c_ij |i i j j> on (A1, B1, A2, B2).

    Each branch mirrors Alice's kept qubit onto Bob's, so the pair left
    unused by the coin toss is as close to the verification target as the
    weights allow; with uniform weights this is exactly the honest
    preparation. Accepts complex weights (used by the phase sweep).
    """
    c = np.asarray(amplitudes, dtype=np.complex128).reshape(4)
    total = float(np.sum(np.abs(c) ** 2))
    if abs(total - 1.0) > COEFFICIENT_NORM_ATOL:
        raise NotNormalizedError(f"squared weights sum to {total!r}")
    amps = np.zeros((2, 2, 2, 2), dtype=np.complex128)
    for index, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        amps[i, i, j, j] = c[index]
    state = make_state(ALICE_CORE, amps.reshape(-1))
    responses = {1: AliceResponse(send=A2), 2: AliceResponse(send=A1)}
    return AliceCheatStrategy(name=name, initial_state=state, responses=responses)


def _orthogonal_strategy(c: AliceCoefficients, name: str) -> AliceCheatStrategy:
    # Branch weights recorded in a two-qubit ancilla; A1/A2 stay in |0>.
    register = (alice_ancilla(0), alice_ancilla(1), A1, B1, A2, B2)
    amps = np.zeros((2,) * 6, dtype=np.complex128)
    values = c.as_array()
    for index, (i, j) in enumerate(((0, 0), (0, 1), (1, 0), (1, 1))):
        amps[i, j, 0, i, 0, j] = values[index]
    state = make_state(register, amps.reshape(-1))
    responses = {1: AliceResponse(send=A2), 2: AliceResponse(send=A1)}
    return AliceCheatStrategy(name=name, initial_state=state, responses=responses)


def coefficient_strategy(
    c: AliceCoefficients, phi_mode: str = "aligned"
) -> AliceCheatStrategy:
    """Build the general four-branch cheating state for Alice.

    ``aligned`` mirrors the branch bits onto Alice's kept qubits (no
    ancilla needed); ``orthogonal`` stores the branch label in an ancilla
    pair instead, leaving the verification qubits unentangled with Bob's.
    """
    name = f"coefficients:{c.a00:g},{c.a01:g},{c.a10:g},{c.a11:g}"
    if phi_mode == "aligned":
        return aligned_strategy(c.as_array(), name=name)
    if phi_mode == "orthogonal":
        return _orthogonal_strategy(c, name=name + ":orthogonal")
    raise ValueError(f"phi_mode must be 'aligned' or 'orthogonal', got {phi_mode!r}")


def optimal_alice(target: int) -> AliceCheatStrategy:
    """The four-qubit state achieving the 3/4 cheating bound with equality.

    For target 0 the state is sqrt(2/3)|0000> + (|0011> + |1100>)/sqrt(6)
    on (A1, B1, A2, B2); target 1 uses the global bit-flip. After Bob picks
    pair 1 Alice sends A2, after pair 2 she sends A1 (the partner of the
    unused pair, as in the honest flow); the swapped mapping only reaches
    a win probability of 1/3.
    """
    coefficients = AliceCoefficients.optimal()
    if target == 1:
        coefficients = coefficients.flipped()
    return aligned_strategy(coefficients.as_array(), name=f"optimal-alice:target={target}")


def honest_alice() -> AliceCheatStrategy:
    """The honest preparation expressed in the cheating-strategy form."""
    return aligned_strategy(AliceCoefficients.honest().as_array(), name="honest")


def measure_and_pick_bob(target: int) -> BobCheatStrategy:
    """Measure both received qubits, announce a pair that showed `target`.

    Ties (both match or both miss) go to pair 1. Wins with probability 3/4
    and never aborts.
    """
    if target not in (0, 1):
        raise ValueError(f"target must be 0 or 1, got {target!r}")
    rule = {}
    for b1, b2 in _bit_tuples(2):
        if b1 == target:
            rule[(b1, b2)] = 1
        elif b2 == target:
            rule[(b1, b2)] = 2
        else:
            rule[(b1, b2)] = 1
    return BobCheatStrategy(
        name=f"measure-and-pick:target={target}",
        ancilla_count=0,
        operation=None,
        measured=(B1, B2),
        announce_rule=rule,
    )


def honest_bob() -> BobCheatStrategy:
    """Identity operation with a constant announcement (pair 1)."""
    return BobCheatStrategy(
        name="honest-bob",
        ancilla_count=0,
        operation=None,
        measured=(),
        announce_rule={(): 1},
    )


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_bob_strategy(rng: np.random.Generator) -> BobCheatStrategy:
    """Random member of Bob's strategy family, for bound sampling.

    Draws a Haar-random unitary on his two received qubits plus zero or one
    ancilla qubit, measures the ancilla (when present), and announces per a
    random rule on the result.
    """
    ancilla_count = int(rng.integers(0, 2))
    labels = (B1, B2) + tuple(bob_ancilla(i) for i in range(ancilla_count))
    operation = LocalOperation(labels=labels, matrix=haar_unitary(2 ** len(labels), rng))
    measured = tuple(bob_ancilla(i) for i in range(ancilla_count))
    rule = {
        outcome: int(rng.integers(1, 3)) for outcome in _bit_tuples(len(measured))
    }
    return BobCheatStrategy(
        name="random-bob",
        ancilla_count=ancilla_count,
        operation=operation,
        measured=measured,
        announce_rule=rule,
    )


def parse_strategy_id(
    text: str, target: int = 0
) -> AliceCheatStrategy | BobCheatStrategy:
    """Resolve a CLI strategy identifier.

    Known identifiers: ``honest``, ``optimal-alice``,
    ``coefficients:<a00,a01,a10,a11>``, ``measure-and-pick``,
    ``random-bob:<seed>``.
    """
    if text == "honest":
        return honest_alice()
    if text == "optimal-alice":
        return optimal_alice(target)
    if text == "measure-and-pick":
        return measure_and_pick_bob(target)
    if text.startswith("coefficients:"):
        parts = text.split(":", 1)[1].split(",")
        if len(parts) != 4:
            raise UnknownStrategyError(
                f"coefficients strategy needs 4 comma-separated values, got {text!r}"
            )
        try:
            values = [float(p) for p in parts]
        except ValueError as exc:
            raise UnknownStrategyError(f"bad coefficient in {text!r}: {exc}") from None
        return coefficient_strategy(AliceCoefficients.from_array(values))
    if text.startswith("random-bob:"):
        seed_text = text.split(":", 1)[1]
        try:
            seed = int(seed_text)
        except ValueError:
            raise UnknownStrategyError(f"bad random-bob seed {seed_text!r}") from None
        strategy = random_bob_strategy(np.random.default_rng(seed))
        return BobCheatStrategy(
            name=text,
            ancilla_count=strategy.ancilla_count,
            operation=strategy.operation,
            measured=strategy.measured,
            announce_rule=strategy.announce_rule,
        )
    raise UnknownStrategyError(f"unknown strategy identifier {text!r}")


def is_alice_strategy(strategy) -> bool:
    return isinstance(strategy, AliceCheatStrategy)
