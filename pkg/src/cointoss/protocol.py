"""The coin-tossing protocol as a message-driven state machine.

Each run produces an outcome and a transcript: an ordered log of every
message and measurement, framed by a header record (carrying the seed and
both parties' roles) and an outcome record. Messages always appear in
protocol order: state transfer, choice announcement, qubit transfer,
verdict. Runs are deterministic per seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np

from .qstate import (
    A1,
    A2,
    B1,
    B2,
    MeasurementRecord,
    StateVector,
    SubsystemLabel,
    apply_unitary,
    bell_state,
    bob_ancilla,
    make_state,
    measure,
    project_bell,
    tensor,
)
from .strategies import (
    AliceCheatStrategy,
    BobCheatStrategy,
    StrategyRegisterMismatchError,
)

TRANSCRIPT_SCHEMA = "cointoss.transcript/1"

MESSAGE_KINDS = (
    "state_transfer",
    "choice_announcement",
    "qubit_transfer",
    "verdict_pass",
    "verdict_abort",
)


class Party(Enum):
    ALICE = "alice"
    BOB = "bob"


class ProtocolOutcome(Enum):
    HEADS = "heads"
    TAILS = "tails"
    ABORT = "abort"

    @property
    def bit(self) -> int | None:
        """0 for heads, 1 for tails, None on abort."""
        if self is ProtocolOutcome.HEADS:
            return 0
        if self is ProtocolOutcome.TAILS:
            return 1
        return None


def outcome_from_bit(bit: int) -> ProtocolOutcome:
    return ProtocolOutcome.HEADS if bit == 0 else ProtocolOutcome.TAILS


@dataclass(frozen=True)
class PartyRole:
    """Who a party is in a run: honest, or playing a named strategy."""

    party: Party
    behavior: str
    registers: tuple[str, ...]


@dataclass(frozen=True)
class TranscriptRecord:
    """One transcript line: (index, sender, kind, payload, probability)."""

    index: int
    sender: str
    kind: str
    payload: dict
    probability: float | None = None


@dataclass(frozen=True)
class Transcript:
    seed: int
    records: tuple[TranscriptRecord, ...]
    outcome: ProtocolOutcome

    def to_jsonl(self) -> str:
        lines = []
        for record in self.records:
            lines.append(
                json.dumps(
                    {
                        "index": record.index,
                        "sender": record.sender,
                        "kind": record.kind,
                        "payload": record.payload,
                        "probability": record.probability,
                    }
                )
            )
        return "\n".join(lines) + "\n"


def parse_transcript_jsonl(text: str) -> list[dict]:
    """Parse serialized transcript lines back into record dicts."""
    return [json.loads(line) for line in text.splitlines() if line.strip()]


class _Log:
    """Accumulates transcript records with contiguous indices."""

    def __init__(self) -> None:
        self.records: list[TranscriptRecord] = []

    def add(self, sender: str, kind: str, payload: dict, probability: float | None = None):
        self.records.append(
            TranscriptRecord(
                index=len(self.records),
                sender=sender,
                kind=kind,
                payload=payload,
                probability=probability,
            )
        )

    def measurement(self, sender: Party, record: MeasurementRecord) -> None:
        self.add(
            sender.value,
            "measurement",
            {"label": str(record.label), "outcome": record.outcome},
            probability=record.probability,
        )


def honest_preparation() -> StateVector:
    """Two shared pairs ``(|00>+|11>)/sqrt(2)`` on (A1,B1) and (A2,B2)."""
    return tensor(bell_state(A1, B1), bell_state(A2, B2))


_HONEST_PREPARATION = honest_preparation()


def coin_labels(choice: int) -> tuple[SubsystemLabel, SubsystemLabel]:
    """(Alice's, Bob's) halves of the pair picked for the coin toss."""
    return (A1, B1) if choice == 1 else (A2, B2)


def verification_labels(choice: int) -> tuple[SubsystemLabel, SubsystemLabel]:
    """(Alice's, Bob's) halves of the pair left over for verification."""
    return (A2, B2) if choice == 1 else (A1, B1)


def _finish(log: _Log, seed: int, outcome: ProtocolOutcome) -> Transcript:
    log.add("-", "outcome", {"outcome": outcome.value})
    return Transcript(seed=seed, records=tuple(log.records), outcome=outcome)


def _header(log: _Log, seed: int, alice: PartyRole, bob: PartyRole, target: int | None):
    payload = {
        "schema": TRANSCRIPT_SCHEMA,
        "seed": seed,
        "alice": {"behavior": alice.behavior, "registers": list(alice.registers)},
        "bob": {"behavior": bob.behavior, "registers": list(bob.registers)},
    }
    if target is not None:
        payload["target"] = target
    log.add("-", "run_header", payload)


def _draw_choice(rng: np.random.Generator) -> int:
    # Bob's step-2 selection is a fair coin from the run's RNG.
    return 1 if rng.random() < 0.5 else 2


def _verification(
    log: _Log, state: StateVector, pair: tuple[SubsystemLabel, SubsystemLabel], rng
) -> bool:
    pass_probability, _ = project_bell(state, pair)
    passed = bool(rng.random() < pass_probability)
    log.add(
        Party.BOB.value,
        "verdict_pass" if passed else "verdict_abort",
        {"pair": [str(pair[0]), str(pair[1])]},
        probability=pass_probability if passed else 1.0 - pass_probability,
    )
    return passed


def run_honest(seed: int) -> tuple[ProtocolOutcome, Transcript]:
    """One honest execution: both parties follow the protocol exactly.

    The verification always passes, so the outcome is never abort, and the
    two coin measurements always agree.
    """
    rng = np.random.default_rng(seed)
    log = _Log()
    _header(
        log,
        seed,
        PartyRole(Party.ALICE, "honest", ("A1", "A2")),
        PartyRole(Party.BOB, "honest", ("B1", "B2")),
        target=None,
    )
    state = _HONEST_PREPARATION
    log.add(Party.ALICE.value, "state_transfer", {"labels": [str(B1), str(B2)]})

    choice = _draw_choice(rng)
    log.add(Party.BOB.value, "choice_announcement", {"choice": choice})

    alice_coin, bob_coin = coin_labels(choice)
    bob_record = measure(state, bob_coin, rng)
    log.measurement(Party.BOB, bob_record)
    alice_record = measure(bob_record.posterior, alice_coin, rng)
    log.measurement(Party.ALICE, alice_record)

    alice_keep, bob_keep = verification_labels(choice)
    log.add(Party.ALICE.value, "qubit_transfer", {"label": str(alice_keep)})
    passed = _verification(log, alice_record.posterior, (alice_keep, bob_keep), rng)

    outcome = outcome_from_bit(bob_record.outcome) if passed else ProtocolOutcome.ABORT
    return outcome, _finish(log, seed, outcome)


def run_cheating_alice(
    strategy: AliceCheatStrategy, target: int, seed: int
) -> tuple[ProtocolOutcome, Transcript]:
    """One run with a cheating Alice against an honest Bob.

    Bob picks uniformly, measures his half of the chosen pair (his bit is
    the protocol outcome), and tests the returned qubit against his kept
    half of the other pair; failure aborts. Alice wins when the outcome
    equals `target` without an abort.
    """
    if not isinstance(strategy, AliceCheatStrategy):
        raise StrategyRegisterMismatchError("run_cheating_alice needs an Alice strategy")
    rng = np.random.default_rng(seed)
    log = _Log()
    alice_registers = tuple(
        str(l) for l in strategy.initial_state.register if l.kind.value not in ("B1", "B2")
    )
    _header(
        log,
        seed,
        PartyRole(Party.ALICE, strategy.name, alice_registers),
        PartyRole(Party.BOB, "honest", ("B1", "B2")),
        target=target,
    )
    state = strategy.initial_state
    log.add(Party.ALICE.value, "state_transfer", {"labels": [str(B1), str(B2)]})

    choice = _draw_choice(rng)
    log.add(Party.BOB.value, "choice_announcement", {"choice": choice})

    _, bob_coin = coin_labels(choice)
    bob_record = measure(state, bob_coin, rng)
    log.measurement(Party.BOB, bob_record)

    response = strategy.responses[choice]
    state = bob_record.posterior
    if response.operation is not None:
        state = apply_unitary(state, response.operation.labels, response.operation.matrix)
    log.add(Party.ALICE.value, "qubit_transfer", {"label": str(response.send)})

    _, bob_keep = verification_labels(choice)
    passed = _verification(log, state, (response.send, bob_keep), rng)

    outcome = outcome_from_bit(bob_record.outcome) if passed else ProtocolOutcome.ABORT
    return outcome, _finish(log, seed, outcome)


def run_cheating_bob(
    strategy: BobCheatStrategy, target: int, seed: int
) -> tuple[ProtocolOutcome, Transcript]:
    """One run with a cheating Bob against an honest Alice.

    Bob may transform and measure the qubits he received before announcing
    a choice; Alice's measurement of her half of the announced pair is the
    protocol outcome. Bob controls the verdict and never aborts.
    """
    if not isinstance(strategy, BobCheatStrategy):
        raise StrategyRegisterMismatchError("run_cheating_bob needs a Bob strategy")
    rng = np.random.default_rng(seed)
    log = _Log()
    bob_registers = ("B1", "B2") + tuple(
        str(bob_ancilla(i)) for i in range(strategy.ancilla_count)
    )
    _header(
        log,
        seed,
        PartyRole(Party.ALICE, "honest", ("A1", "A2")),
        PartyRole(Party.BOB, strategy.name, bob_registers),
        target=target,
    )
    state = _HONEST_PREPARATION
    if strategy.ancilla_count:
        ancilla_register = tuple(bob_ancilla(i) for i in range(strategy.ancilla_count))
        zeros = np.zeros(2**strategy.ancilla_count)
        zeros[0] = 1.0
        state = tensor(state, make_state(ancilla_register, zeros))
    log.add(Party.ALICE.value, "state_transfer", {"labels": [str(B1), str(B2)]})

    if strategy.operation is not None:
        state = apply_unitary(state, strategy.operation.labels, strategy.operation.matrix)

    outcomes = []
    for label in strategy.measured:
        record = measure(state, label, rng)
        log.measurement(Party.BOB, record)
        outcomes.append(record.outcome)
        state = record.posterior

    choice = strategy.announce(tuple(outcomes))
    log.add(Party.BOB.value, "choice_announcement", {"choice": choice})

    alice_coin, _ = coin_labels(choice)
    alice_record = measure(state, alice_coin, rng)
    log.measurement(Party.ALICE, alice_record)

    alice_keep, _ = verification_labels(choice)
    log.add(Party.ALICE.value, "qubit_transfer", {"label": str(alice_keep)})
    log.add(Party.BOB.value, "verdict_pass", {"pair": []})

    outcome = outcome_from_bit(alice_record.outcome)
    return outcome, _finish(log, seed, outcome)


def message_order(records: Iterable[TranscriptRecord]) -> list[str]:
    """The sequence of message kinds in a transcript (verdicts collapsed)."""
    return [r.kind for r in records if r.kind in MESSAGE_KINDS]
