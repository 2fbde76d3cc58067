"""Hamiltonians, pulses, gradients and composite sequences.

All Hamiltonians are in angular-frequency units (rad/s, hbar = 1) in the
rotating frame.  Pulses are ideal zero-duration rotations
exp(-i theta (sum_i I_i,phi)); the MLEV mixing block is the one element
simulated with finite RF amplitude, since its isotropic-mixing character
comes from J evolution during the pulses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .spincore import (
    DensityState, SpinSystem, as_matrix, _rewrap, build_operator,
    coherence_order_masks, magnetic_quantum_numbers,
)


def _single_axis_ops(n: int, qubit: int | None):
    """(sum of Ix, sum of Iy, sum of Iz) over the targeted qubits."""
    qubits = range(n) if qubit is None else [qubit]
    dim = 2 ** n
    ox = np.zeros((dim, dim), dtype=complex)
    oy = np.zeros_like(ox)
    oz = np.zeros_like(ox)
    for q in qubits:
        s = ["E"] * n
        s[q] = "x"; ox += build_operator("".join(s), n)
        s[q] = "y"; oy += build_operator("".join(s), n)
        s[q] = "z"; oz += build_operator("".join(s), n)
    return ox, oy, oz


# ---------------------------------------------------------------------------
# Hamiltonians

@dataclass
class Hamiltonian:
    matrix: np.ndarray
    coupling_mode: str
    commuting_part: np.ndarray | None = None       # Sigma(Iz+Sz) + pi J 2IzSz (n=2)
    noncommuting_part: np.ndarray | None = None    # Delta(Iz-Sz)


def hamiltonian(sys: SpinSystem, mode: str = "weak") -> Hamiltonian:
    """Internal rotating-frame Hamiltonian.

    weak:   H = sum_i 2pi Omega_i Iiz + sum_{i<j} pi J_ij 2IizIjz
    strong: the coupling term is the isotropic pi J 2 I.S.
    For n=2 the commuting/non-commuting split with respect to the singlet
    is attached (H = Hc + Hnc with [Hc, I.S] = 0).
    """
    if mode not in ("weak", "strong"):
        raise ValueError("mode must be 'weak' or 'strong'")
    n = sys.n_qubits
    dim = 2 ** n
    H = np.zeros((dim, dim), dtype=complex)
    zs = []
    for q in range(n):
        s = ["E"] * n
        s[q] = "z"
        zs.append(build_operator("".join(s), n))
        H += 2 * np.pi * sys.offsets_hz[q] * zs[q]
    J = sys.j_matrix
    for i in range(n):
        for j in range(i + 1, n):
            if J[i, j] == 0.0:
                continue
            szz = ["E"] * n
            szz[i] = "z"; szz[j] = "z"
            coupling = build_operator("".join(szz), n)
            if mode == "strong":
                sxx = ["E"] * n; sxx[i] = "x"; sxx[j] = "x"
                syy = ["E"] * n; syy[i] = "y"; syy[j] = "y"
                coupling = coupling + build_operator("".join(sxx), n) + build_operator("".join(syy), n)
            H += np.pi * J[i, j] * coupling
    ham = Hamiltonian(matrix=H, coupling_mode=mode)
    if n == 2:
        sigma = np.pi * (sys.offsets_hz[0] + sys.offsets_hz[1])   # rad/s
        delta = np.pi * (sys.offsets_hz[0] - sys.offsets_hz[1])
        ham.commuting_part = sigma * (zs[0] + zs[1]) + (H - 2 * np.pi * sys.offsets_hz[0] * zs[0]
                                                        - 2 * np.pi * sys.offsets_hz[1] * zs[1])
        ham.noncommuting_part = delta * (zs[0] - zs[1])
    return ham


def _ham_matrix(h) -> np.ndarray:
    return h.matrix if isinstance(h, Hamiltonian) else np.asarray(h, dtype=complex)


# ---------------------------------------------------------------------------
# sequence elements

@dataclass(frozen=True)
class Pulse:
    """Ideal rotation by flip_angle (rad) about the phase axis in the xy plane.

    target None means a hard pulse on all qubits; an integer selects one
    qubit (ideal selective pulse).  angle_error is an optional fractional
    flip-angle error for robustness studies.
    """
    flip_angle: float
    phase: float = 0.0
    target: int | None = None
    angle_error: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.flip_angle):
            raise ValueError("flip angle must be finite")


@dataclass(frozen=True)
class Delay:
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be >= 0")


@dataclass(frozen=True)
class GradientCrush:
    """Idealized purge gradient: free evolution for duration, then the
    coherence-order filter (homonuclear keeps p = 0; heteronuclear keeps
    populations only)."""
    mode: str = "homonuclear"
    duration: float = 0.0

    def __post_init__(self):
        if self.mode not in ("homonuclear", "heteronuclear"):
            raise ValueError("mode must be homonuclear or heteronuclear")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")


@dataclass(frozen=True)
class ZRotation:
    """Composite z rotation exp(-i sum_i angles[i] Iiz), one angle per qubit."""
    angles: tuple

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))


@dataclass(frozen=True)
class MixingBlock:
    """Isotropic-mixing block; kind 'mlev16' with finite RF amplitude rf_hz."""
    kind: str = "mlev16"
    duration: float = 0.0
    rf_hz: float = 10000.0

    def __post_init__(self):
        if self.kind.lower() != "mlev16":
            raise ValueError("only the MLEV-16 mixing block is implemented")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")


@dataclass(frozen=True)
class Decohere:
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be >= 0")


SequenceElement = (Pulse, Delay, GradientCrush, ZRotation, MixingBlock, Decohere)


@dataclass
class PulseSequence:
    """Ordered elements, left to right in time."""
    elements: list = field(default_factory=list)

    def total_duration(self) -> float:
        return sum(getattr(el, "duration", 0.0) for el in self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __add__(self, other):
        return PulseSequence(list(self.elements) + list(other.elements))


# ---------------------------------------------------------------------------
# propagation

def pulse_propagator(pulse: Pulse, sys: SpinSystem) -> np.ndarray:
    ox, oy, _ = _single_axis_ops(sys.n_qubits, pulse.target)
    axis = ox * math.cos(pulse.phase) + oy * math.sin(pulse.phase)
    theta = pulse.flip_angle * (1.0 + pulse.angle_error)
    return expm(-1j * theta * axis)


def zrotation_propagator(zrot: ZRotation, sys: SpinSystem) -> np.ndarray:
    n = sys.n_qubits
    if len(zrot.angles) != n:
        raise ValueError("one z angle per qubit required")
    dim = 2 ** n
    gen = np.zeros((dim, dim), dtype=complex)
    for q, a in enumerate(zrot.angles):
        s = ["E"] * n
        s[q] = "z"
        gen += a * build_operator("".join(s), n)
    return expm(-1j * gen)


def evolve(rho, U):
    """Unitary conjugation rho -> U rho U+."""
    m = as_matrix(rho)
    U = np.asarray(U)
    if U.shape != m.shape:
        raise ValueError("dimension mismatch between state and propagator")
    return _rewrap(U @ m @ U.conj().T, rho)


def free_evolve(rho, h, t: float):
    """Evolution under a (constant) Hamiltonian for time t >= 0 seconds."""
    if t < 0:
        raise ValueError("t must be >= 0")
    H = _ham_matrix(h)
    return evolve(rho, expm(-1j * H * t))


def crush(rho, mode: str = "homonuclear"):
    """Ideal purge-gradient filter on coherence orders.

    homonuclear zeroes every p != 0 element (populations and zero-quantum
    survive); heteronuclear retains the diagonal only.
    """
    m = as_matrix(rho)
    n = int(round(math.log2(m.shape[0])))
    if mode == "homonuclear":
        keep = coherence_order_masks(n)[0]
    elif mode == "heteronuclear":
        keep = np.eye(m.shape[0], dtype=bool)
    else:
        raise ValueError("mode must be homonuclear or heteronuclear")
    return _rewrap(np.where(keep, m, 0.0), rho)


def crush_sliced(rho, n_slices: int, phase_span: float):
    """Spatially resolved gradient model: average exp(-i phi (sum Iz)) rho ...
    over n_slices phases uniform on [0, phase_span), endpoint excluded.

    Converges to crush(rho) for phase_span >> 2pi; exact whenever
    phase_span is an integer multiple of 2pi for every coherence order
    present.
    """
    if n_slices < 2:
        raise ValueError("n_slices must be >= 2")
    m = as_matrix(rho)
    n = int(round(math.log2(m.shape[0])))
    M = magnetic_quantum_numbers(n)
    P = M[:, None] - M[None, :]
    acc = np.zeros_like(m)
    for k in range(n_slices):
        phi = phase_span * k / n_slices
        acc += np.exp(-1j * phi * P) * m
    return _rewrap(acc / n_slices, rho)


def timed_gradient(rho, sys: SpinSystem, t_g: float, mode: str = "homonuclear"):
    """Finite-duration purge gradient: free evolution under the internal
    Hamiltonian for t_g, then the coherence filter."""
    if t_g < 0:
        raise ValueError("t_g must be >= 0")
    out = rho
    if t_g > 0:
        out = free_evolve(out, hamiltonian(sys), t_g)
    return crush(out, mode)


def _mlev16_supercycle(sys: SpinSystem, rf_hz: float) -> tuple[np.ndarray, float]:
    w1 = 2 * np.pi * rf_hz
    t90 = (np.pi / 2) / w1
    t180 = np.pi / w1
    H0 = hamiltonian(sys).matrix
    ox, oy, _ = _single_axis_ops(sys.n_qubits, None)

    def composite(sign):
        ux = expm(-1j * (H0 + sign * w1 * ox) * t90)
        uy = expm(-1j * (H0 + sign * w1 * oy) * t180)
        return ux @ uy @ ux

    R, Rb = composite(+1), composite(-1)
    U = np.eye(2 ** sys.n_qubits, dtype=complex)
    for u in (R, R, Rb, Rb, Rb, R, R, Rb, Rb, Rb, R, R, R, Rb, Rb, R):
        U = u @ U
    return U, 16 * (2 * t90 + t180)


def mlev16_supercycle_duration(rf_hz: float = 10000.0) -> float:
    return 16 * (2 * np.pi / (2 * np.pi * rf_hz))


def mlev16(sys: SpinSystem, duration: float, rf_hz: float = 10000.0) -> PulseSequence:
    """MLEV-16 mixing of at least one supercycle, rounded to whole supercycles.

    The composite inversion is 90x 180y 90x with the standard phase
    supercycle (R R R' R', R' R R R', R' R' R R, R R' R' R).  Simulated
    with continuous RF of amplitude rf_hz, which is what produces the
    isotropic J-mixing character (measured effective mixing rate is about
    0.38 J for a weakly coupled pair; the singlet is preserved to much
    better than the 0.99-per-supercycle target).
    """
    t_super = mlev16_supercycle_duration(rf_hz)
    if duration < t_super * (1 - 1e-9):
        raise ValueError("duration must cover at least one MLEV-16 supercycle")
    n_super = max(1, int(round(duration / t_super)))
    return PulseSequence([MixingBlock("mlev16", n_super * t_super, rf_hz)])


def mixing_propagator(block: MixingBlock, sys: SpinSystem) -> np.ndarray:
    U_super, t_super = _mlev16_supercycle(sys, block.rf_hz)
    n_super = int(round(block.duration / t_super))
    if abs(n_super * t_super - block.duration) > 1e-9 * max(t_super, block.duration):
        raise ValueError("mixing duration must be an integer number of supercycles")
    return np.linalg.matrix_power(U_super, max(n_super, 0))


# ---------------------------------------------------------------------------
# decoherence channel

def decohere_kraus(t: float, sys: SpinSystem) -> list[np.ndarray]:
    """Kraus family: per-qubit phase damping at rate 1/T2 composed with
    global depolarization toward 1/N at rate 1/T1 (infinite-temperature
    fixed point)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if sys.t1_s is None or sys.t2_s is None:
        raise ValueError("decoherence requires t1_s and t2_s")
    n = sys.n_qubits
    dim = 2 ** n
    lam = 1.0 - math.exp(-t / sys.t2_s)       # off-diagonal factor (1-lam) = e^{-t/T2}
    pd = [math.sqrt(1 - lam) * np.eye(2), math.sqrt(lam) * np.diag([1.0, 0.0]),
          math.sqrt(lam) * np.diag([0.0, 1.0])]
    kraus = [np.array([[1.0 + 0j]])]
    for _ in range(n):
        kraus = [np.kron(K, k1) for K in kraus for k1 in pd]
    p = 1.0 - math.exp(-t / sys.t1_s)
    paulis1 = [np.eye(2, dtype=complex), 2 * build_operator("x", 1),
               2 * build_operator("y", 1), 2 * build_operator("z", 1)]
    full_paulis = [np.array([[1.0 + 0j]])]
    for _ in range(n):
        full_paulis = [np.kron(P, p1) for P in full_paulis for p1 in paulis1]
    dep = [math.sqrt(1 - p + p / 4 ** n) * np.eye(dim)]
    dep += [math.sqrt(p / 4 ** n) * P for P in full_paulis[1:]]
    return [D @ K for D in dep for K in kraus]


def decohere(rho, t: float, sys: SpinSystem):
    """Apply the phase-damping + depolarizing channel for duration t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return rho
    if sys.t1_s is None or sys.t2_s is None:
        raise ValueError("decoherence requires t1_s and t2_s")
    m = as_matrix(rho)
    n = sys.n_qubits
    lam = 1.0 - math.exp(-t / sys.t2_s)
    out = m
    for q in range(n):
        s = ["E"] * n
        s[q] = "z"
        Pz = 2 * build_operator("".join(s), n)      # sigma_z on qubit q
        out = (1 - lam / 2) * out + (lam / 2) * (Pz @ out @ Pz)
    p = 1.0 - math.exp(-t / sys.t1_s)
    dim = 2 ** n
    out = (1 - p) * out + p * np.trace(out) * np.eye(dim) / dim
    return _rewrap(out, rho)


# ---------------------------------------------------------------------------
# composite sequence builders

def spin_echo(sys: SpinSystem, tau: float) -> PulseSequence:
    """tau/2 - 180x - tau/2; net effect = weak-J evolution for tau, then 180x."""
    return PulseSequence([Delay(tau / 2), Pulse(np.pi, 0.0), Delay(tau / 2)])


def jump_return_90Iy(sys: SpinSystem) -> PulseSequence:
    """Jump-and-Return realization of the selective 90 I_y pulse:
    90_45 - delay 1/(4 delta) - 90_-x.

    Requires the transmitter centred between the two resonances; on any
    state of the form 1/4 + p ZQx + q IzSz the sequence acts exactly like
    the ideal selective pulse (the J coupling during the delay commutes
    with every term the restricted family can reach).
    """
    if sys.n_qubits != 2:
        raise ValueError("jump-return detection is defined for two qubits")
    if not sys.is_transmitter_centred():
        raise ValueError("transmitter must be centred between the resonances")
    delta = abs(sys.delta_hz)
    if delta == 0:
        raise ValueError("delay undefined for delta = 0")
    t_d = 1.0 / (4.0 * delta)
    return PulseSequence([
        Pulse(np.pi / 2, np.pi / 4),
        Delay(t_d),
        Pulse(np.pi / 2, np.pi),
    ])


def selective_90Iy_propagator(sys: SpinSystem) -> np.ndarray:
    return pulse_propagator(Pulse(np.pi / 2, np.pi / 2, target=0), sys)


def propagate(rho, seq, sys: SpinSystem):
    """Run a state through a pulse sequence element by element."""
    elements = seq.elements if isinstance(seq, PulseSequence) else list(seq)
    out = rho
    H = None
    for el in elements:
        if isinstance(el, Pulse):
            out = evolve(out, pulse_propagator(el, sys))
        elif isinstance(el, Delay):
            if H is None:
                H = hamiltonian(sys)
            out = free_evolve(out, H, el.duration)
        elif isinstance(el, GradientCrush):
            out = timed_gradient(out, sys, el.duration, el.mode)
        elif isinstance(el, ZRotation):
            out = evolve(out, zrotation_propagator(el, sys))
        elif isinstance(el, MixingBlock):
            out = evolve(out, mixing_propagator(el, sys))
        elif isinstance(el, Decohere):
            out = decohere(out, el.duration, sys)
        else:
            raise ValueError(f"unknown sequence element {el!r}")
    return out
