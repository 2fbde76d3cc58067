"""phipsim: two-qubit NMR spin dynamics with parahydrogen-derived states,
one-shot spectral tomography and entanglement analysis."""

__version__ = "0.1.0"

from .spincore import (
    BasisExpansion, DensityState, OperatorLabel, SpinSystem,
    build_operator, coherence_decompose, expand, make_state,
    singlet_fraction, two_spin_system,
)
from .dynamics import (
    Decohere, Delay, GradientCrush, Hamiltonian, MixingBlock, Pulse,
    PulseSequence, ZRotation, crush, crush_sliced, decohere, evolve,
    free_evolve, hamiltonian, jump_return_90Iy, mlev16, propagate,
    pulse_propagator, spin_echo, timed_gradient,
)
from .phip import (
    PhipExperiment, RotorParams, SignalVector, enhancement, para_fraction,
    phip_state, run_phip, signal, thermal_reference,
)
from .specproc import (
    Calibration, Fid, JMatchResult, Spectrum, TomographyResult,
    baseline_correct, depletion_correction, integrate_peaks, j_double,
    j_match, partial_twirl, partial_twirl_half, synthesize_fid, tomography,
    tomography_from_pq, transform,
)
from .entmetrics import (
    BoundsReport, EntanglementReport, braunstein_bounds, concurrence, eof,
    ppt, st_mixture_analysis, sv_compression, warren_bound,
)
from .algos import (
    AlgorithmResult, Gate, GateCircuit, deutsch_jozsa, full_twirl, grover,
    run_circuit,
)
