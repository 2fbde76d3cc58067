"""Gate-level algorithms on the density-matrix engine, plus the full
Wernerizing twirl.

Circuits run by unitary conjugation; an optional decoherence interval can
be applied after every gate.  The singlet-derived input is mapped to |00>
by a fixed basis-preparation circuit (CNOT, then H on the control, then X
on both qubits), so the textbook two-qubit circuits apply unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics as dyn
from . import spincore as sc
from .phip import SignalVector, signal

_H1 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X1 = np.array([[0, 1], [1, 0]], dtype=complex)
_Y1 = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z1 = np.diag([1.0, -1.0]).astype(complex)
_PAULI1 = {"x": _X1, "y": _Y1, "z": _Z1}


@dataclass(frozen=True)
class Gate:
    """One gate: kind in {rotation, hadamard, phase, x, y, z, cnot, oracle}.

    rotation uses axis in {x, y, z} and angle (rad); phase applies
    diag(1, e^{i angle}); cnot uses qubits=(control, target); oracle looks
    up oracle_id in the circuit's oracle table.
    """
    kind: str
    qubits: tuple = (0,)
    axis: str = "z"
    angle: float = 0.0
    oracle_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))


@dataclass
class GateCircuit:
    n_qubits: int
    gates: list = field(default_factory=list)
    oracles: dict = field(default_factory=dict)   # oracle_id -> unitary matrix

    def add(self, *gates):
        self.gates.extend(gates)
        return self


def _embed(u1: np.ndarray, n: int, qubit: int) -> np.ndarray:
    if not (0 <= qubit < n):
        raise ValueError(f"qubit index {qubit} out of range")
    out = np.array([[1.0 + 0j]])
    for q in range(n):
        out = np.kron(out, u1 if q == qubit else np.eye(2))
    return out


def _cnot(n: int, control: int, target: int) -> np.ndarray:
    if control == target or not all(0 <= q < n for q in (control, target)):
        raise ValueError("bad control/target indices")
    dim = 2 ** n
    u = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        bits = [(i >> (n - 1 - q)) & 1 for q in range(n)]
        if bits[control]:
            bits[target] ^= 1
        j = sum(b << (n - 1 - q) for q, b in enumerate(bits))
        u[j, i] = 1.0
    return u


def gate_unitary(gate: Gate, n: int, oracles=None) -> np.ndarray:
    k = gate.kind.lower()
    if k == "rotation":
        ax = _PAULI1[gate.axis.lower()]
        u1 = np.cos(gate.angle / 2) * np.eye(2) - 1j * np.sin(gate.angle / 2) * ax
        return _embed(u1, n, gate.qubits[0])
    if k == "hadamard":
        return _embed(_H1, n, gate.qubits[0])
    if k in ("x", "y", "z"):
        return _embed(_PAULI1[k], n, gate.qubits[0])
    if k == "phase":
        return _embed(np.diag([1.0, np.exp(1j * gate.angle)]), n, gate.qubits[0])
    if k == "cnot":
        return _cnot(n, *gate.qubits[:2])
    if k == "oracle":
        table = oracles or {}
        if gate.oracle_id not in table:
            raise ValueError(f"unknown oracle {gate.oracle_id!r}")
        return np.asarray(table[gate.oracle_id], dtype=complex)
    raise ValueError(f"unknown gate kind {gate.kind!r}")


def circuit_unitary(circuit: GateCircuit) -> np.ndarray:
    u = np.eye(2 ** circuit.n_qubits, dtype=complex)
    for g in circuit.gates:
        u = gate_unitary(g, circuit.n_qubits, circuit.oracles) @ u
    return u


def run_circuit(rho0, circuit: GateCircuit, sys: sc.SpinSystem | None = None,
                gate_time: float | None = None):
    """Sequential conjugation by the circuit gates; when sys and gate_time
    are given, the decoherence channel runs after every gate."""
    out = rho0
    for g in circuit.gates:
        u = gate_unitary(g, circuit.n_qubits, circuit.oracles)
        out = dyn.evolve(out, u)
        if sys is not None and gate_time is not None:
            out = dyn.decohere(out, gate_time, sys)
    return out


def two_qubit_gate_time(sys: sc.SpinSystem) -> float:
    """Characteristic duration 1/(2J) of a J-mediated two-qubit gate."""
    J = abs(sys.j_matrix[0, 1])
    if J == 0:
        raise ValueError("gate time undefined for J = 0")
    return 1.0 / (2.0 * J)


def singlet_to_00_circuit() -> GateCircuit:
    """Fixed basis bridge mapping |psi-> to |00| up to global phase."""
    return GateCircuit(2, [
        Gate("cnot", (0, 1)),
        Gate("hadamard", (0,)),
        Gate("x", (0,)),
        Gate("x", (1,)),
    ])


# ---------------------------------------------------------------------------
# Deutsch-Jozsa

@dataclass
class AlgorithmResult:
    final_state: sc.DensityState
    populations: np.ndarray
    classification: str
    success_probability: float
    readout: SignalVector | None = None


DJ_ORACLES = ("const0", "const1", "balanced_id", "balanced_not")


def _dj_oracle_gates(f_id: str) -> list:
    if f_id == "const0":
        return []
    if f_id == "const1":
        return [Gate("x", (1,))]
    if f_id == "balanced_id":
        return [Gate("cnot", (0, 1))]
    if f_id == "balanced_not":
        return [Gate("x", (0,)), Gate("cnot", (0, 1)), Gate("x", (0,))]
    raise ValueError(f"unknown Deutsch-Jozsa function {f_id!r}; use one of {DJ_ORACLES}")


def deutsch_jozsa(f_id: str, rho0, sys: sc.SpinSystem | None = None,
                  prepare: bool = True, gate_time: float | None = None) -> AlgorithmResult:
    """Two-qubit Deutsch-Jozsa: constant functions leave the query qubit in
    |0>, balanced functions flip it to |1>; with a pure input the
    classification is deterministic."""
    circuit = GateCircuit(2)
    if prepare:
        circuit.gates += singlet_to_00_circuit().gates
    circuit.gates += [Gate("x", (1,)), Gate("hadamard", (0,)), Gate("hadamard", (1,))]
    circuit.gates += _dj_oracle_gates(f_id)
    circuit.gates += [Gate("hadamard", (0,))]
    out = run_circuit(rho0, circuit, sys=sys, gate_time=gate_time)
    m = sc.as_matrix(out)
    pops = np.real(np.diag(m))
    p_query_1 = float(pops[2] + pops[3])     # qubit 0 in |1>
    balanced = p_query_1 > 0.5
    classification = "balanced" if balanced else "constant"
    expected_balanced = f_id.startswith("balanced")
    p_expected = p_query_1 if expected_balanced else 1.0 - p_query_1
    sv = None
    if sys is not None and sys.n_qubits == 2:
        sv = signal(m, dyn.Pulse(np.pi / 2, np.pi / 2), sys)
    return AlgorithmResult(final_state=sc.DensityState(m), populations=pops,
                           classification=classification,
                           success_probability=p_expected, readout=sv)


# ---------------------------------------------------------------------------
# Grover

def _grover_iteration(target: int) -> list:
    gates = []
    # oracle: phase-flip the target basis state
    tb = [(target >> 1) & 1, target & 1]
    for q, b in enumerate(tb):
        if not b:
            gates.append(Gate("x", (q,)))
    gates += [Gate("hadamard", (1,)), Gate("cnot", (0, 1)), Gate("hadamard", (1,))]
    for q, b in enumerate(tb):
        if not b:
            gates.append(Gate("x", (q,)))
    # diffusion: invert about the mean
    gates += [Gate("hadamard", (0,)), Gate("hadamard", (1,))]
    gates += [Gate("x", (0,)), Gate("x", (1,))]
    gates += [Gate("hadamard", (1,)), Gate("cnot", (0, 1)), Gate("hadamard", (1,))]
    gates += [Gate("x", (0,)), Gate("x", (1,))]
    gates += [Gate("hadamard", (0,)), Gate("hadamard", (1,))]
    return gates


def grover(target: int, rho0, iterations: int = 1, sys: sc.SpinSystem | None = None,
           prepare: bool = True, gate_time: float | None = None) -> AlgorithmResult:
    """Two-qubit Grover search over four states; one iteration finds the
    target with certainty from a pure uniform superposition."""
    if target not in (0, 1, 2, 3):
        raise ValueError("target must be one of 0..3")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    circuit = GateCircuit(2)
    if prepare:
        circuit.gates += singlet_to_00_circuit().gates
    circuit.gates += [Gate("hadamard", (0,)), Gate("hadamard", (1,))]
    for _ in range(iterations):
        circuit.gates += _grover_iteration(target)
    out = run_circuit(rho0, circuit, sys=sys, gate_time=gate_time)
    m = sc.as_matrix(out)
    pops = np.real(np.diag(m))
    found = int(np.argmax(pops))
    sv = None
    if sys is not None and sys.n_qubits == 2:
        sv = signal(m, dyn.Pulse(np.pi / 2, np.pi / 2), sys)
    return AlgorithmResult(final_state=sc.DensityState(m), populations=pops,
                           classification=str(found),
                           success_probability=float(pops[target]), readout=sv)


# ---------------------------------------------------------------------------
# full Wernerizing twirl

_BILATERAL_PAULIS = [np.kron(p, p) for p in (np.eye(2, dtype=complex), _X1, _Y1, _Z1)]


def _bell_cycle_unitary() -> np.ndarray:
    """Unitary permuting |psi+> -> |phi+> -> |phi-> -> |psi+> and fixing
    |psi-> (up to phase): a bilateral 90-degree rotation composed with a
    relabeling; built directly from the Bell kets."""
    from .spincore import KET_PHI_MINUS, KET_PHI_PLUS, KET_PSI_MINUS, KET_PSI_PLUS
    u = (np.outer(KET_PHI_PLUS, KET_PSI_PLUS.conj())
         + np.outer(KET_PHI_MINUS, KET_PHI_PLUS.conj())
         + np.outer(KET_PSI_PLUS, KET_PHI_MINUS.conj())
         + np.outer(KET_PSI_MINUS, KET_PSI_MINUS.conj()))
    return u


def twirl_group() -> list[np.ndarray]:
    """Twelve unitaries: bilateral Pauli dephasing into the Bell-diagonal
    form composed with the three-cycle over the non-singlet Bell states."""
    C = _bell_cycle_unitary()
    cycles = [np.eye(4, dtype=complex), C, C @ C]
    return [c @ p for c in cycles for p in _BILATERAL_PAULIS]


def full_twirl(rho, mode: str = "deterministic_average", seed: int | None = None,
               n_samples: int = 1000):
    """Wernerize: output F |psi-><psi-| + (1-F)/3 (other Bell projectors)
    with F the conserved singlet fraction of the input.

    deterministic_average averages over the full twirl group (exact);
    sampled draws group elements uniformly with replacement and converges
    as 1/sqrt(n_samples).
    """
    m = sc.as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("full twirl defined for two qubits")
    group = twirl_group()
    if mode == "deterministic_average":
        acc = np.zeros_like(m)
        for u in group:
            acc += u @ m @ u.conj().T
        out = acc / len(group)
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, len(group), size=n_samples)
        acc = np.zeros_like(m)
        for i in idx:
            u = group[i]
            acc += u @ m @ u.conj().T
        out = acc / n_samples
    else:
        raise ValueError("mode must be 'deterministic_average' or 'sampled'")
    return sc._rewrap(out, rho)


def werner_from_fraction(F: float) -> sc.DensityState:
    """Bell-diagonal Werner form parameterized by the singlet fraction."""
    if not (0.0 <= F <= 1.0):
        raise ValueError("singlet fraction must lie in [0, 1]")
    m = F * sc.SINGLET + (1 - F) / 3.0 * (sc.TRIPLET_0
                                          + np.outer(sc.KET_PHI_PLUS, sc.KET_PHI_PLUS.conj())
                                          + np.outer(sc.KET_PHI_MINUS, sc.KET_PHI_MINUS.conj()))
    return sc.DensityState(m)
