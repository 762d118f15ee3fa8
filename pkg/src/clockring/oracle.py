"""Step-by-step simulation of the verifier and its history superposition.

The oracle tracks the computation on the orbit's branch only: a clock
pattern plus 2^N qubit amplitudes per step, embedded into the full
configuration space on demand.  Everything here is independent of the
sparse operators it is used to check, except for sharing the level codec.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import SpinBasis, _as_bits, config_from_labels, orbit_label_walk
from .circuit import ProblemShape, SweepSchedule, visitation_order

ORTHONORMALITY_TOL = 1e-10


class OracleError(ValueError):
    pass


def apply_bond_gate(psi: np.ndarray, gate: np.ndarray, bond: int, n_qubits: int) -> np.ndarray:
    """Apply a 4x4 gate to qubits (bond, bond + 1) of a 2^N state vector.

    Qubit 1 is the most significant bit of the amplitude index.
    """
    shape = (2,) * n_qubits
    tensor = psi.reshape(shape)
    axes = (bond - 1, bond)
    tensor = np.moveaxis(tensor, axes, (0, 1))
    folded = tensor.reshape(4, -1)
    folded = gate @ folded
    tensor = folded.reshape((2, 2) + tuple(shape[i] for i in range(n_qubits) if i not in axes))
    tensor = np.moveaxis(tensor, (0, 1), axes)
    return tensor.reshape(-1)


def run_plain_circuit(schedule: SweepSchedule, witness_bits) -> np.ndarray:
    """Apply every scheduled gate in sweep order to |x>; returns the 2^N state."""
    shape = schedule.shape.require_valid()
    bits = _as_bits(witness_bits, shape.n_qubits)
    psi = np.zeros(2 ** shape.n_qubits, dtype=complex)
    start = 0
    for b in bits:
        start = (start << 1) | b
    psi[start] = 1.0
    for m, n in visitation_order(shape):
        psi = apply_bond_gate(psi, schedule.gate_at(m, n), n, shape.n_qubits)
    return psi


def reject_probability(schedule: SweepSchedule, witness_bits) -> float:
    """Probability of reading bit 1 on qubit 1 after the full computation."""
    psi = run_plain_circuit(schedule, witness_bits)
    n = schedule.shape.n_qubits
    probs = np.abs(psi) ** 2
    mask = (np.arange(probs.size) >> (n - 1)) & 1
    return float(probs[mask == 1].sum())


@dataclass
class HistoryState:
    """Snapshots of one computation run and their uniform superposition."""

    shape: ProblemShape
    head_site: int
    clock_walk: list[tuple[int, ...]]
    amplitudes: list[np.ndarray]  # one 2^N vector per step

    @property
    def n_steps(self) -> int:
        return len(self.clock_walk) - 1

    def snapshot_vector(self, t: int, basis: SpinBasis | None = None) -> np.ndarray:
        basis = basis or SpinBasis(self.shape)
        vec = np.zeros(basis.config_dim, dtype=complex)
        n = self.shape.n_qubits
        amps = self.amplitudes[t]
        labels = self.clock_walk[t]
        for q in range(amps.size):
            if amps[q] == 0:
                continue
            bits = [(q >> (n - 1 - i)) & 1 for i in range(n)]
            vec[basis.config_index(config_from_labels(self.head_site, labels, bits, self.shape))] = amps[q]
        return vec

    def snapshot_vectors(self, basis: SpinBasis | None = None) -> list[np.ndarray]:
        basis = basis or SpinBasis(self.shape)
        return [self.snapshot_vector(t, basis) for t in range(self.n_steps + 1)]

    def history_vector(self, basis: SpinBasis | None = None) -> np.ndarray:
        basis = basis or SpinBasis(self.shape)
        return build_history_state(self.snapshot_vectors(basis))


def simulate_history(
    schedule: SweepSchedule, witness_bits, head_site: int = 0
) -> HistoryState:
    """Run the sweep step by step, recording every snapshot.

    Snapshot t applies the first t scheduled gates to the witness register
    while the clock pattern advances along the legal orbit.
    """
    shape = schedule.shape.require_valid()
    bits = _as_bits(witness_bits, shape.n_qubits)
    if not 0 <= head_site <= shape.n_qubits:
        raise OracleError(f"head site {head_site} out of range")
    n = shape.n_qubits
    psi = np.zeros(2 ** n, dtype=complex)
    start = 0
    for b in bits:
        start = (start << 1) | b
    psi[start] = 1.0
    amplitudes = [psi]
    for m, bond in visitation_order(shape):
        psi = apply_bond_gate(psi, schedule.gate_at(m, bond), bond, n)
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise OracleError("snapshot lost normalization")
        amplitudes.append(psi)
    return HistoryState(shape, head_site, orbit_label_walk(shape), amplitudes)


def build_history_state(snapshots: list[np.ndarray]) -> np.ndarray:
    """Uniform superposition (1/sqrt(T+1)) sum_t |snapshot_t>."""
    count = len(snapshots)
    if count == 0:
        raise OracleError("no snapshots")
    stack = np.stack(snapshots)
    gram = stack.conj() @ stack.T
    if np.abs(gram - np.eye(count)).max() > ORTHONORMALITY_TOL:
        raise OracleError("snapshots are not orthonormal")
    return stack.sum(axis=0) / np.sqrt(count)


def symmetrize_over_head(history_vectors: list[np.ndarray]) -> np.ndarray:
    """Uniform combination of the N+1 head placements of one run."""
    count = len(history_vectors)
    dims = {v.shape for v in history_vectors}
    if len(dims) != 1:
        raise OracleError("mismatched history vector dimensions")
    return np.sum(history_vectors, axis=0) / np.sqrt(count)


def expectations(state: np.ndarray, parts: dict) -> list[tuple[str, float, float]]:
    """<state|P|state> for each named ring operator; imaginary part reported."""
    out = []
    for name, op in parts.items():
        mat = op.matrix if hasattr(op, "matrix") else op
        if mat.shape[0] != state.size:
            raise OracleError(f"{name}: dimension mismatch")
        val = complex(np.vdot(state, mat @ state))
        out.append((name, float(val.real), float(abs(val.imag))))
    return out


def format_expectation_report(rows: list[tuple[str, float, float]]) -> str:
    return "\n".join(f"{name} {val:.12g} {imag:.3g}" for name, val, imag in rows) + "\n"
