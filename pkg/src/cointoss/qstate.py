"""Dense state-vector engine for small labeled multi-qubit registers.

States are immutable: every operation returns a new :class:`StateVector`
instead of mutating in place, so values can be shared freely between
threads and cached across protocol runs. Qubit ordering convention: the
label at register position 0 is the leftmost (most significant) bit of a
basis ket ``|q0 q1 ... q(n-1)>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

# Norm slack accepted at construction (then renormalized exactly), and the
# threshold below which a branch/state counts as numerically zero.
CONSTRUCTION_NORM_ATOL = 1e-8
ZERO_ATOL = 1e-12


class QStateError(Exception):
    """Base class for state-engine errors."""


class DimensionMismatchError(QStateError):
    """Amplitude array length does not equal 2**(number of labels)."""


class ZeroNormError(QStateError):
    """All amplitudes are numerically zero; no state can be formed."""


class NotNormalizedError(QStateError):
    """Squared amplitudes do not sum to 1 within tolerance."""


class LabelCollisionError(QStateError):
    """The same subsystem label appears twice in a register."""


class UnknownLabelError(QStateError):
    """A referenced label is not part of the state's register."""


class InvalidCutError(QStateError):
    """A bipartition cut is empty, full, or names unknown labels."""


class Subsystem(Enum):
    """The named wires of the protocol."""

    A = "A"  # Alice's optional ancilla
    A1 = "A1"  # Alice's half of pair 1
    B1 = "B1"  # Bob's half of pair 1
    A2 = "A2"  # Alice's half of pair 2
    B2 = "B2"  # Bob's half of pair 2
    ANCILLA_B = "AncillaB"  # Bob's optional ancilla


@dataclass(frozen=True, order=True)
class SubsystemLabel:
    """One qubit wire: a subsystem name plus an index within that subsystem.

    The index only matters for multi-qubit ancillas (``A`` and ``AncillaB``);
    the four protocol wires always use index 0.
    """

    kind: Subsystem
    index: int = 0

    def __str__(self) -> str:
        if self.kind in (Subsystem.A, Subsystem.ANCILLA_B):
            return f"{self.kind.value}[{self.index}]"
        return self.kind.value


A1 = SubsystemLabel(Subsystem.A1)
B1 = SubsystemLabel(Subsystem.B1)
A2 = SubsystemLabel(Subsystem.A2)
B2 = SubsystemLabel(Subsystem.B2)


def alice_ancilla(index: int = 0) -> SubsystemLabel:
    return SubsystemLabel(Subsystem.A, index)


def bob_ancilla(index: int = 0) -> SubsystemLabel:
    return SubsystemLabel(Subsystem.ANCILLA_B, index)


def parse_label(text: str) -> SubsystemLabel:
    """Inverse of ``str(label)``, e.g. ``"B1"`` or ``"AncillaB[1]"``."""
    name, _, rest = text.partition("[")
    index = int(rest.rstrip("]")) if rest else 0
    for kind in Subsystem:
        if kind.value == name:
            return SubsystemLabel(kind, index)
    raise UnknownLabelError(f"unknown subsystem label {text!r}")


@dataclass(frozen=True)
class StateVector:
    """A normalized pure state over an ordered register of labeled qubits."""

    register: tuple[SubsystemLabel, ...]
    amplitudes: np.ndarray = field(repr=False)

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def position(self, label: SubsystemLabel) -> int:
        """Qubit position of `label` (0 = most significant basis bit)."""
        try:
            return self.register.index(label)
        except ValueError:
            raise UnknownLabelError(
                f"label {label} not in register ({', '.join(map(str, self.register))})"
            ) from None

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per qubit, register order."""
        return self.amplitudes.reshape((2,) * self.n_qubits)

    def amplitude(self, bits: Sequence[int]) -> complex:
        """Amplitude of the basis ket with the given bit per register slot."""
        if len(bits) != self.n_qubits:
            raise DimensionMismatchError(
                f"expected {self.n_qubits} bits, got {len(bits)}"
            )
        return complex(self.tensor_view()[tuple(bits)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome of a single computational-basis measurement."""

    label: SubsystemLabel
    outcome: int
    probability: float
    posterior: StateVector


def _freeze(amplitudes: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(amplitudes, dtype=np.complex128)
    out.setflags(write=False)
    return out


def make_state(
    register: Iterable[SubsystemLabel], amplitudes: Sequence[complex] | np.ndarray
) -> StateVector:
    """Build a state from labels and amplitudes, renormalizing exactly.

    The amplitude norm must already be within ``1e-8`` of 1; larger
    deviations are rejected rather than silently rescaled.
    """
    reg = tuple(register)
    if len(set(reg)) != len(reg):
        seen = [str(l) for l in reg]
        raise LabelCollisionError(f"duplicate labels in register ({', '.join(seen)})")
    amps = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if amps.shape[0] != 2 ** len(reg):
        raise DimensionMismatchError(
            f"{len(reg)} qubits require {2 ** len(reg)} amplitudes, got {amps.shape[0]}"
        )
    if not np.any(np.abs(amps) >= ZERO_ATOL):
        raise ZeroNormError("all amplitudes below 1e-12")
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > CONSTRUCTION_NORM_ATOL:
        raise NotNormalizedError(f"norm {norm!r} differs from 1 by more than 1e-8")
    return StateVector(register=reg, amplitudes=_freeze(amps / norm))


BELL_AMPLITUDES = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2.0)


def bell_state(left: SubsystemLabel, right: SubsystemLabel) -> StateVector:
    """The two-qubit state ``(|00> + |11>)/sqrt(2)`` on the given pair."""
    return make_state((left, right), BELL_AMPLITUDES)


def tensor(left: StateVector, right: StateVector) -> StateVector:
    """Tensor product; the combined register is `left` then `right`."""
    overlap = set(left.register) & set(right.register)
    if overlap:
        names = ", ".join(sorted(str(l) for l in overlap))
        raise LabelCollisionError(f"registers share labels: {names}")
    return StateVector(
        register=left.register + right.register,
        amplitudes=_freeze(np.kron(left.amplitudes, right.amplitudes)),
    )


def branch_probabilities(
    state: StateVector, label: SubsystemLabel
) -> tuple[float, float]:
    """Exact probabilities of measuring `label` as 0 and 1 (no sampling)."""
    pos = state.position(label)
    weights = np.abs(state.tensor_view()) ** 2
    axes = tuple(i for i in range(state.n_qubits) if i != pos)
    marginal = weights.sum(axis=axes) if axes else weights
    return float(marginal[0]), float(marginal[1])


def collapse(
    state: StateVector, label: SubsystemLabel, outcome: int
) -> tuple[float, StateVector]:
    """Project `label` onto `outcome` and renormalize.

    Returns the branch probability and the posterior (same register, the
    measured qubit left in ``|outcome>``). Raises :class:`ZeroNormError`
    when the branch probability is below 1e-12.
    """
    pos = state.position(label)
    tensor_amps = state.tensor_view()
    kept = np.take(tensor_amps, outcome, axis=pos)
    branch_norm = float(np.linalg.norm(kept))
    if branch_norm**2 < ZERO_ATOL:
        raise ZeroNormError(f"branch {label}={outcome} has probability ~0")
    projected = np.zeros_like(tensor_amps)
    index = [slice(None)] * state.n_qubits
    index[pos] = outcome
    # Renormalize by the exactly computed branch norm, not an accumulated one.
    projected[tuple(index)] = kept / branch_norm
    posterior = StateVector(register=state.register, amplitudes=_freeze(projected.reshape(-1)))
    return branch_norm**2, posterior


def measure(
    state: StateVector, label: SubsystemLabel, rng: np.random.Generator
) -> MeasurementRecord:
    """Sample a computational-basis measurement of `label`.

    The outcome is drawn from :func:`branch_probabilities` using a single
    uniform variate, so runs are bit-for-bit reproducible per seed.
    """
    p0, _ = branch_probabilities(state, label)
    outcome = 0 if rng.random() < p0 else 1
    probability, posterior = collapse(state, label, outcome)
    return MeasurementRecord(
        label=label, outcome=outcome, probability=probability, posterior=posterior
    )


def project_bell(
    state: StateVector, pair: tuple[SubsystemLabel, SubsystemLabel]
) -> tuple[float, StateVector]:
    """Project the qubit pair onto ``(|00>+|11>)/sqrt(2)`` (identity elsewhere).

    Returns the pass probability and the renormalized posterior. A posterior
    cannot be formed when the pass probability is below 1e-12; that case is
    signaled with :class:`ZeroNormError`.
    """
    pos_a = state.position(pair[0])
    pos_b = state.position(pair[1])
    if pos_a == pos_b:
        raise LabelCollisionError(f"pair uses the same label {pair[0]} twice")
    tensor_amps = state.tensor_view()
    moved = np.moveaxis(tensor_amps, (pos_a, pos_b), (0, 1))
    overlap = (moved[0, 0] + moved[1, 1]) / np.sqrt(2.0)
    pass_probability = float(np.sum(np.abs(overlap) ** 2))
    if pass_probability < ZERO_ATOL:
        raise ZeroNormError("projection onto the Bell pair has probability ~0")
    residual = overlap / np.sqrt(pass_probability)
    projected = np.zeros_like(moved)
    projected[0, 0] = residual / np.sqrt(2.0)
    projected[1, 1] = residual / np.sqrt(2.0)
    projected = np.moveaxis(projected, (0, 1), (pos_a, pos_b))
    posterior = StateVector(register=state.register, amplitudes=_freeze(projected.reshape(-1)))
    return pass_probability, posterior


def apply_unitary(
    state: StateVector, labels: Sequence[SubsystemLabel], matrix: np.ndarray
) -> StateVector:
    """Apply a ``2^k x 2^k`` unitary to the k qubits named by `labels`."""
    positions = [state.position(l) for l in labels]
    if len(set(positions)) != len(positions):
        raise LabelCollisionError("repeated label in unitary target list")
    k = len(positions)
    matrix = np.asarray(matrix, dtype=np.complex128)
    if matrix.shape != (2**k, 2**k):
        raise DimensionMismatchError(
            f"{k} target qubits require a {2 ** k}x{2 ** k} matrix, got {matrix.shape}"
        )
    moved = np.moveaxis(state.tensor_view(), positions, range(k))
    tail_shape = moved.shape[k:]
    stacked = moved.reshape(2**k, -1)
    transformed = (matrix @ stacked).reshape((2,) * k + tail_shape)
    result = np.moveaxis(transformed, range(k), positions)
    return StateVector(register=state.register, amplitudes=_freeze(result.reshape(-1)))


def schmidt_coefficients(
    state: StateVector, cut: Iterable[SubsystemLabel]
) -> np.ndarray:
    """Schmidt coefficients across `cut` vs the rest, in descending order.

    These are the singular values of the amplitude matrix with the cut's
    qubits as rows; their squares sum to 1.
    """
    cut_set = set(cut)
    register_set = set(state.register)
    if not cut_set:
        raise InvalidCutError("cut is empty")
    unknown = cut_set - register_set
    if unknown:
        names = ", ".join(sorted(str(l) for l in unknown))
        raise InvalidCutError(f"cut names labels outside the register: {names}")
    if cut_set == register_set:
        raise InvalidCutError("cut must be a proper subset of the register")
    cut_positions = sorted(state.position(l) for l in cut_set)
    rest_positions = [i for i in range(state.n_qubits) if i not in cut_positions]
    moved = np.transpose(state.tensor_view(), cut_positions + rest_positions)
    matrix = moved.reshape(2 ** len(cut_positions), 2 ** len(rest_positions))
    return np.linalg.svd(matrix, compute_uv=False)
