"""Para/ortho statistics, parahydrogen-derived states and their spectra.

Signal vectors follow the fixed order
(I+ S_alpha, I+ S_beta, I_alpha S+, I_beta S+): the first two entries are
the I-spin lines, the last two the S-spin lines; real parts are absorptive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spincore as sc
from . import dynamics as dyn
from .dynamics import Delay, Pulse, PulseSequence


@dataclass(frozen=True)
class RotorParams:
    """Rigid-rotor parameters of dihydrogen: rotational temperature (K) and
    the J index at which the Boltzmann series is truncated."""
    theta_r: float = 85.0
    j_max: int = 10

    def __post_init__(self):
        if self.theta_r <= 0:
            raise ValueError("theta_r must be positive")
        if self.j_max < 5:
            raise ValueError("j_max < 5 truncates too aggressively below 300 K")


def para_fraction(temperature_k: float, rotor: RotorParams = RotorParams()) -> float:
    """Equilibrium mole fraction of para-hydrogen at temperature T.

    Even rotational levels carry the singlet (degeneracy 2J+1), odd levels
    the three triplets (degeneracy 3(2J+1)); the fraction tends to 1 as
    T -> 0 and to 1/4 in the high-temperature limit.
    """
    if temperature_k <= 0:
        raise ValueError("temperature must be positive")
    alpha = rotor.theta_r / temperature_k
    # j_max is a floor: above ~400 K more terms matter, so extend until the
    # dropped tail is negligible (J(J+1) alpha > ~40)
    j_top = max(rotor.j_max, math.ceil(math.sqrt(40.0 / alpha)))
    even = sum((2 * J + 1) * math.exp(-J * (J + 1) * alpha) for J in range(0, j_top + 1, 2))
    odd = sum((2 * J + 1) * math.exp(-J * (J + 1) * alpha) for J in range(1, j_top + 1, 2))
    n_para = even
    n_ortho = 3.0 * odd
    return n_para / (n_para + n_ortho)


def phip_state(singlet_fraction_in: float) -> sc.DensityState:
    """rho_F = F rho_para + (1-F) rho_ortho."""
    return sc.para_ortho_state(singlet_fraction_in)


def thermal_reference(boltzmann_factor: float) -> sc.DensityState:
    """Two-qubit high-temperature state 1/4 + B/4 (Iz + Sz).

    This is the sign convention the PHIP signal algebra uses; the physical
    equilibrium state carries the opposite sign of B, which is immaterial
    for intensity ratios.
    """
    return sc.thermal_state(2, boltzmann_factor, sign=+1)


PHIP_VARIANTS = ("instantaneous", "delayed", "incoherent", "isotropic", "altadena")


@dataclass(frozen=True)
class PhipExperiment:
    variant: str
    tau: float = 0.0                 # evolution delay for the delayed variant (s)
    tau_h: float = 0.0               # hydrogenation duration (s)
    singlet_fraction_in: float = 1.0
    detection: Pulse | None = None
    n_average: int = 2048            # creation-time grid for the incoherent variant
    t1rho: float | None = None       # optional rotating-frame decay for isotropic
    rf_hz: float = 10000.0
    closed_form: bool = False        # incoherent: use the dephasing limit directly

    def __post_init__(self):
        if self.variant not in PHIP_VARIANTS:
            raise ValueError(f"unknown PHIP variant {self.variant!r}")
        if self.tau < 0 or self.tau_h < 0:
            raise ValueError("durations must be >= 0")
        if not (0.0 <= self.singlet_fraction_in <= 1.0):
            raise ValueError("singlet fraction must lie in [0, 1]")


def run_phip(sys: sc.SpinSystem, exp: PhipExperiment) -> sc.DensityState:
    """State just before detection for each experiment variant."""
    if sys.n_qubits != 2:
        raise ValueError("PHIP experiments are defined on two-qubit systems")
    if not sys.is_transmitter_centred():
        raise ValueError("transmitter must be centred between the resonances")
    F = exp.singlet_fraction_in
    rho_f = phip_state(F)

    if exp.variant == "instantaneous":
        return rho_f

    if exp.variant == "delayed":
        H = dyn.hamiltonian(sys)
        return dyn.free_evolve(rho_f, H, exp.tau)

    if exp.variant == "incoherent":
        if exp.closed_form:
            dev = (1 - 4 * F) / 3.0 * sc.IZSZ
            return sc.DensityState(np.eye(4) / 4 + dev)
        H = dyn.hamiltonian(sys)
        acc = np.zeros((4, 4), dtype=complex)
        # singlets created uniformly over [0, tau_h) each evolve for the
        # remaining time; endpoint-exclusive grid
        for k in range(exp.n_average):
            t_c = exp.tau_h * k / exp.n_average
            acc += sc.as_matrix(dyn.free_evolve(rho_f, H, exp.tau_h - t_c))
        return sc.DensityState(acc / exp.n_average)

    if exp.variant == "isotropic":
        seq = dyn.mlev16(sys, exp.tau_h, rf_hz=exp.rf_hz)
        out = dyn.propagate(rho_f, seq, sys)
        if exp.t1rho is not None:
            # creation times spread over tau_h: averaged decay of the deviation
            x = exp.tau_h / exp.t1rho
            scale = (1.0 - math.exp(-x)) / x if x > 0 else 1.0
            m = sc.as_matrix(out)
            dev = m - np.eye(4) / 4
            out = sc.DensityState(np.eye(4) / 4 + scale * dev)
        return out

    # altadena: adiabatic transfer endpoint; Omega_S > Omega_I populates |01>
    return sc.pseudopure_state(1.0, "01")


# ---------------------------------------------------------------------------
# signal vectors

@dataclass
class SignalVector:
    """Four complex line amplitudes (I+Sa, I+Sb, IaS+, IbS+)."""
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(4)
        if not np.all(np.isfinite(a.view(float))):
            raise ValueError("signal amplitudes must be finite")
        self.amplitudes = a

    def __getitem__(self, i):
        return self.amplitudes[i]

    def display_pattern(self, tol: float = 1e-12) -> str:
        """Absorptive sign pattern read along the frequency axis (ascending,
        S lines first since I sits at +delta/2): e.g. '{-,+,+,-}'."""
        order = [3, 2, 1, 0]       # (IbS+, IaS+, I+Sb, I+Sa) = ascending frequency
        syms = []
        for i in order:
            v = self.amplitudes[i].real
            syms.append("0" if abs(v) <= tol else ("+" if v > 0 else "-"))
        return "{" + ",".join(syms) + "}"


_DETECT_OPS = [
    np.kron(sc.IP1, sc.IA1), np.kron(sc.IP1, sc.IB1),
    np.kron(sc.IA1, sc.IP1), np.kron(sc.IB1, sc.IP1),
]


def signal(rho, detection, sys: sc.SpinSystem) -> SignalVector:
    """Apply a detection pulse (or sequence, or None) and evaluate the four
    signal-vector traces."""
    m = sc.as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("signal vector defined for two-qubit states")
    if detection is None:
        out = m
    elif isinstance(detection, Pulse):
        out = sc.as_matrix(dyn.evolve(m, dyn.pulse_propagator(detection, sys)))
    elif isinstance(detection, (PulseSequence, list, tuple)):
        out = sc.as_matrix(dyn.propagate(m, detection, sys))
    else:
        raise ValueError("detection must be a Pulse, a PulseSequence or None")
    return SignalVector(np.array([np.trace(out @ op) for op in _DETECT_OPS]))


def enhancement(variant: str, boltzmann_factor: float, delta_hz: float | None = None,
                tau: float | None = None) -> float:
    """Closed-form signal enhancement over the thermal reference.

    altadena and instantaneous PASADENA reach 2/B; incoherent PASADENA with
    the optimal 45_y pulse reaches 1/B; delayed PASADENA detected with a
    hard 90_x scales as (2/B) sin(2 pi delta tau).
    """
    B = boltzmann_factor
    if B <= 0:
        raise ValueError("boltzmann factor must be positive")
    v = variant.lower()
    if v in ("altadena", "instantaneous", "pasadena"):
        return 2.0 / B
    if v == "incoherent":
        return 1.0 / B
    if v == "delayed":
        if delta_hz is None or tau is None:
            raise ValueError("delayed enhancement needs delta_hz and tau")
        return (2.0 / B) * math.sin(2 * math.pi * delta_hz * tau)
    raise ValueError(f"unknown variant {variant!r}")
