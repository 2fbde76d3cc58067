"""Product-operator foundation for small spin-1/2 registers.

Conventions used throughout the package:

- Zeeman basis ordering |aa>, |ab>, |ba>, |bb> with m = +1/2 for |a> (alpha).
- Product operators carry the 2**(k-1) scaling for k non-identity factors,
  so the one-qubit set is {1/2, Ix, Iy, Iz} and the two-qubit set contains
  e.g. 2IzSz.  All 4**n Cartesian elements are trace-orthogonal with
  Tr(L^2) = 2**(n-2).
- Zero/double-quantum combinations: ZQx = (2IxSx + 2IySy)/2, etc.
- Matrices are dense complex numpy arrays; qubit 0 is the leftmost tensor
  factor (spin I), qubit 1 is spin S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_SLACK = -1e-10
RECONSTRUCTION_TOL = 1e-10

# single-qubit operator matrices
E2 = np.eye(2, dtype=complex)
IX1 = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
IY1 = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
IZ1 = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
IP1 = IX1 + 1j * IY1          # raising: |b> -> |a>
IM1 = IX1 - 1j * IY1
IA1 = E2 / 2 + IZ1            # |a><a|
IB1 = E2 / 2 - IZ1            # |b><b|

_FACTOR_MATS = {
    "E": E2 / 2, "x": IX1, "y": IY1, "z": IZ1,
    "+": IP1, "-": IM1, "a": IA1, "b": IB1,
}
_FACTOR_ALIASES = {"e": "E", "1": "E", "alpha": "a", "beta": "b", "α": "a", "β": "b"}

MAX_QUBITS = 10


def _norm_factor(ch: str) -> str:
    ch = _FACTOR_ALIASES.get(ch, ch)
    if ch not in _FACTOR_MATS:
        raise ValueError(f"unknown operator factor {ch!r}")
    return ch


@dataclass(frozen=True)
class OperatorLabel:
    """Per-qubit factor string, e.g. 'zz' for 2IzSz or 'xE' for Ix on qubit 0."""

    factors: str

    def __post_init__(self):
        object.__setattr__(self, "factors", "".join(_norm_factor(c) for c in self.factors))

    @property
    def n_qubits(self) -> int:
        return len(self.factors)

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return sum(1 for c in self.factors if c != "E")

    def __str__(self) -> str:
        return self.factors


def build_operator(label, n: int | None = None) -> np.ndarray:
    """Matrix of a product operator in the Zeeman basis.

    The returned matrix is 2**(n-1) * (f_1 x ... x f_n) with f = 1/2 for
    identity slots, which reproduces Ix = sigma_x/2 for n=1 and 2IzSz-style
    scaling for higher weights.
    """
    if not isinstance(label, OperatorLabel):
        label = OperatorLabel(label)
    if n is None:
        n = label.n_qubits
    if label.n_qubits != n:
        raise ValueError(f"label {label} has {label.n_qubits} factors, expected {n}")
    out = np.array([[1.0 + 0j]])
    for ch in label.factors:
        out = np.kron(out, _FACTOR_MATS[ch])
    return out * 2.0 ** (n - 1)


def _basis_labels(n: int, charset: str) -> list[OperatorLabel]:
    labels = [""]
    for _ in range(n):
        labels = [s + c for s in labels for c in charset]
    return [OperatorLabel(s) for s in labels]


_BASIS_CHARSETS = {"cartesian": "Exyz", "spherical": "Ez+-", "polarization": "abxy"}


def basis_labels(n: int, basis: str = "cartesian") -> list[OperatorLabel]:
    try:
        charset = _BASIS_CHARSETS[basis]
    except KeyError:
        raise ValueError(f"unknown basis {basis!r}") from None
    return _basis_labels(n, charset)


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class SpinSystem:
    """Static NMR parameters of an n-qubit register.

    offsets_hz are rotating-frame offsets Omega_i in Hz; couplings_hz is the
    symmetric J matrix in Hz.  boltzmann_factor is B = hbar*omega/kT.
    """

    n_qubits: int
    offsets_hz: tuple = ()
    couplings_hz: tuple = ()
    t1_s: float | None = None
    t2_s: float | None = None
    boltzmann_factor: float | None = None

    def __post_init__(self):
        n = self.n_qubits
        if n < 1:
            raise ValueError("n_qubits must be >= 1")
        if n > MAX_QUBITS:
            raise ValueError(f"n_qubits > {MAX_QUBITS} unsupported")
        offs = tuple(float(x) for x in self.offsets_hz) or (0.0,) * n
        if len(offs) != n:
            raise ValueError("offsets_hz length must equal n_qubits")
        object.__setattr__(self, "offsets_hz", offs)
        J = np.zeros((n, n)) if not len(self.couplings_hz) else np.asarray(self.couplings_hz, dtype=float)
        if J.shape != (n, n):
            raise ValueError("couplings_hz must be an n x n matrix")
        if not np.allclose(J, J.T):
            raise ValueError("couplings_hz must be symmetric")
        if not np.allclose(np.diag(J), 0.0):
            raise ValueError("self-couplings J_ii must be zero")
        object.__setattr__(self, "couplings_hz", tuple(tuple(row) for row in J))
        if self.t1_s is not None and self.t1_s <= 0:
            raise ValueError("t1_s must be positive")
        if self.t2_s is not None and self.t2_s <= 0:
            raise ValueError("t2_s must be positive")
        if self.t1_s is not None and self.t2_s is not None and self.t2_s > self.t1_s + 1e-15:
            raise ValueError("T2 <= T1 required for spin-1/2 nuclei")
        if self.boltzmann_factor is not None and not (0.0 < self.boltzmann_factor < 1.0):
            raise ValueError("boltzmann_factor must lie in (0, 1)")

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @property
    def j_matrix(self) -> np.ndarray:
        return np.asarray(self.couplings_hz, dtype=float)

    @property
    def delta_hz(self) -> float:
        """Frequency separation Omega_0 - Omega_1 for a two-qubit system."""
        if self.n_qubits != 2:
            raise ValueError("delta_hz defined for two-qubit systems only")
        return self.offsets_hz[0] - self.offsets_hz[1]

    def is_transmitter_centred(self, tol: float = 1e-9) -> bool:
        if self.n_qubits != 2:
            return False
        return abs(self.offsets_hz[0] + self.offsets_hz[1]) <= tol * max(1.0, abs(self.delta_hz))


def two_spin_system(delta_hz: float, j_hz: float, t1_s=None, t2_s=None,
                    boltzmann_factor=None) -> SpinSystem:
    """Transmitter-centred two-qubit system: spin I at +delta/2, S at -delta/2."""
    return SpinSystem(
        n_qubits=2,
        offsets_hz=(delta_hz / 2.0, -delta_hz / 2.0),
        couplings_hz=((0.0, j_hz), (j_hz, 0.0)),
        t1_s=t1_s, t2_s=t2_s, boltzmann_factor=boltzmann_factor,
    )


class DensityState:
    """Validated density matrix: Hermitian, unit trace, PSD (with slack)."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, validate: bool = True):
        m = np.asarray(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        n = int(round(math.log2(m.shape[0])))
        if 2 ** n != m.shape[0]:
            raise ValueError("dimension must be a power of two")
        if validate:
            if np.abs(m - m.conj().T).max() > HERMITICITY_TOL:
                raise ValueError("matrix is not Hermitian to tolerance")
            if abs(np.trace(m).real - 1.0) > TRACE_TOL or abs(np.trace(m).imag) > TRACE_TOL:
                raise ValueError("trace must equal 1")
            if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < PSD_SLACK:
                raise ValueError("matrix has a negative eigenvalue beyond slack")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    def deviation(self) -> np.ndarray:
        """Traceless part: rho - 1/N."""
        return self.matrix - np.eye(self.dim) / self.dim

    def expect(self, op) -> complex:
        return complex(np.trace(self.matrix @ np.asarray(op)))

    def __array__(self, dtype=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityState(dim={self.dim})"


def as_matrix(rho) -> np.ndarray:
    """Accept DensityState or plain array (e.g. a deviation term)."""
    if isinstance(rho, DensityState):
        return rho.matrix
    return np.asarray(rho, dtype=complex)


def _rewrap(out: np.ndarray, like) -> "np.ndarray | DensityState":
    return DensityState(out) if isinstance(like, DensityState) else out


# ---------------------------------------------------------------------------
# basis expansion

@dataclass
class BasisExpansion:
    basis: str
    n_qubits: int
    coefficients: dict = field(default_factory=dict)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((2 ** self.n_qubits,) * 2, dtype=complex)
        for label, c in self.coefficients.items():
            out += c * build_operator(label, self.n_qubits)
        return out

    def coefficient(self, label) -> complex:
        key = str(OperatorLabel(label)) if not isinstance(label, OperatorLabel) else str(label)
        return self.coefficients.get(key, 0.0)


def expand(rho, basis: str = "cartesian") -> BasisExpansion:
    """Expand a matrix in a product-operator basis.

    Coefficients are c_L = Tr(L^dag rho) / Tr(L^dag L); for Hermitian input
    and the Cartesian basis they are real.
    """
    m = as_matrix(rho)
    n = int(round(math.log2(m.shape[0])))
    exp = BasisExpansion(basis=basis, n_qubits=n)
    for label in basis_labels(n, basis):
        L = build_operator(label, n)
        c = np.trace(L.conj().T @ m) / np.trace(L.conj().T @ L)
        exp.coefficients[str(label)] = complex(c)
    return exp


# ---------------------------------------------------------------------------
# coherence orders

def magnetic_quantum_numbers(n: int) -> np.ndarray:
    """Total M for each Zeeman basis state, |aa..a> first (M = n/2)."""
    idx = np.arange(2 ** n)
    popcount = np.array([bin(i).count("1") for i in idx])
    return n / 2.0 - popcount


def coherence_order_masks(n: int) -> dict:
    M = magnetic_quantum_numbers(n)
    P = np.rint(M[:, None] - M[None, :]).astype(int)
    return {p: (P == p) for p in range(-n, n + 1)}


def coherence_decompose(rho) -> dict:
    """Split a matrix into coherence-order components p = M_r - M_s.

    Components have disjoint support and sum exactly to the input.
    """
    m = as_matrix(rho)
    n = int(round(math.log2(m.shape[0])))
    return {p: np.where(mask, m, 0.0) for p, mask in coherence_order_masks(n).items()}


# ---------------------------------------------------------------------------
# canonical two-qubit operators

def _op2(s):
    return build_operator(s, 2)

IX = _op2("xE"); IY = _op2("yE"); IZ = _op2("zE")
SX = _op2("Ex"); SY = _op2("Ey"); SZ = _op2("Ez")
IZSZ = 0.5 * _op2("zz")                      # matrix Iz(x)Sz, i.e. (2IzSz)/2
ZQX = 0.5 * (_op2("xx") + _op2("yy"))
ZQY = 0.5 * (_op2("yx") - _op2("xy"))
ZQZ = 0.5 * (IZ - SZ)
DQX = 0.5 * (_op2("xx") - _op2("yy"))
DQY = 0.5 * (_op2("yx") + _op2("xy"))
ISO = ZQX + IZSZ                             # I.S = (2IxSx+2IySy+2IzSz)/2

KET_PSI_MINUS = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
KET_PSI_PLUS = np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
KET_PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
KET_PHI_MINUS = np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2)
BELL_KETS = {
    "psi-": KET_PSI_MINUS, "psi+": KET_PSI_PLUS,
    "phi+": KET_PHI_PLUS, "phi-": KET_PHI_MINUS,
}

SINGLET = np.outer(KET_PSI_MINUS, KET_PSI_MINUS.conj())
TRIPLET_0 = np.outer(KET_PSI_PLUS, KET_PSI_PLUS.conj())
TRIPLET_P1 = np.diag([1.0, 0, 0, 0]).astype(complex)
TRIPLET_M1 = np.diag([0, 0, 0, 1.0]).astype(complex)


# ---------------------------------------------------------------------------
# state constructors

def thermal_state(n: int, boltzmann_factor: float, sign: int = -1) -> DensityState:
    """High-temperature equilibrium state (1/N)(1 + sign*B*sum Iz).

    The physical equilibrium carries sign=-1 (alpha more populated); the
    PHIP signal algebra conventionally works with the sign=+1 deviation,
    the overall sign of B being immaterial for intensity ratios.
    """
    if not (0.0 < boltzmann_factor < 1.0):
        raise ValueError("boltzmann_factor must lie in (0, 1)")
    if sign not in (-1, 1):
        raise ValueError("sign must be +-1")
    N = 2 ** n
    m = np.eye(N, dtype=complex)
    for q in range(n):
        m += sign * boltzmann_factor * build_operator("E" * q + "z" + "E" * (n - q - 1), n)
    return DensityState(m / N)


def pseudopure_state(epsilon: float, ket) -> DensityState:
    """(1-eps)/N + eps |psi><psi| for a basis ket given as a bitstring like '01'."""
    if not (0.0 <= epsilon <= 1.0):
        raise ValueError("epsilon must lie in [0, 1]")
    if isinstance(ket, str):
        n = len(ket)
        vec = np.zeros(2 ** n, dtype=complex)
        vec[int(ket, 2)] = 1.0
    else:
        vec = np.asarray(ket, dtype=complex)
        vec = vec / np.linalg.norm(vec)
        n = int(round(math.log2(vec.size)))
    N = 2 ** n
    return DensityState((1 - epsilon) * np.eye(N) / N + epsilon * np.outer(vec, vec.conj()))


def werner_state(epsilon: float, extended_range: bool = False) -> DensityState:
    """(1-eps)/4 + eps |psi-><psi-|; eps in [0,1], or [-1/3,1] if extended."""
    lo = -1.0 / 3.0 if extended_range else 0.0
    if not (lo - 1e-12 <= epsilon <= 1.0 + 1e-12):
        rng = f"[{lo:g}, 1]"
        raise ValueError(f"werner epsilon {epsilon} outside {rng}")
    return DensityState((1 - epsilon) * np.eye(4) / 4 + epsilon * SINGLET)


def bell_state(which: str) -> DensityState:
    key = which.replace("_", "").replace(" ", "").lower()
    if key not in BELL_KETS:
        raise ValueError(f"unknown Bell state {which!r}; use one of {sorted(BELL_KETS)}")
    k = BELL_KETS[key]
    return DensityState(np.outer(k, k.conj()))


def singlet_triplet_state(a: float, b: float, c: float) -> DensityState:
    """Mixture a*S0 + b*T0 + c*(T1 + T-1); requires a + b + 2c = 1."""
    if min(a, b, c) < -1e-12:
        raise ValueError("fractions must be non-negative")
    if abs(a + b + 2 * c - 1.0) > 1e-9:
        raise ValueError("fractions must satisfy a + b + 2c = 1")
    return DensityState(a * SINGLET + b * TRIPLET_0 + c * (TRIPLET_P1 + TRIPLET_M1))


def para_ortho_state(singlet_fraction_in: float) -> DensityState:
    """F*rho_para + (1-F)*rho_ortho = 1/4 + (1-4F)/3 * (ZQx + IzSz)."""
    F = singlet_fraction_in
    if not (0.0 <= F <= 1.0):
        raise ValueError("singlet fraction must lie in [0, 1]")
    return DensityState(np.eye(4) / 4 + (1 - 4 * F) / 3.0 * (ZQX + IZSZ))


_CONSTRUCTORS = {
    "thermal": thermal_state,
    "pseudopure": pseudopure_state,
    "werner": werner_state,
    "bell": bell_state,
    "singlet_triplet": singlet_triplet_state,
    "para_ortho": para_ortho_state,
}


def make_state(kind: str, *args, **kwargs) -> DensityState:
    try:
        ctor = _CONSTRUCTORS[kind]
    except KeyError:
        raise ValueError(f"unknown state kind {kind!r}; use one of {sorted(_CONSTRUCTORS)}") from None
    return ctor(*args, **kwargs)


def singlet_fraction(rho) -> float:
    """F = <psi-|rho|psi->."""
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("singlet fraction defined for two-qubit states")
    return float(np.real(KET_PSI_MINUS.conj() @ m @ KET_PSI_MINUS))
