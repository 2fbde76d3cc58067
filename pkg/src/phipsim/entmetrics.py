"""Entanglement detection/quantification and separability bounds.

Two-qubit only where stated: the partial-transpose test is necessary and
sufficient at dimension 4, so `entangled` is decided by concurrence > 0
(equivalently a negative PT eigenvalue).  Logs are base 2 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import sqrtm

from .spincore import as_matrix

_SY2 = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass
class EntanglementReport:
    min_pt_eigenvalue: float
    concurrence: float
    eof: float
    entangled: bool


@dataclass
class BoundsReport:
    n: int
    eps_lower: float
    eps_upper: float
    warren: float
    k_pure: float | None = None


def partial_transpose(rho, qubit: int = 0) -> np.ndarray:
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("partial transpose implemented for two qubits")
    r = m.reshape(2, 2, 2, 2)
    axes = (2, 1, 0, 3) if qubit == 0 else (0, 3, 2, 1)
    return r.transpose(axes).reshape(4, 4)


def ppt(rho):
    """Partial transpose over the first qubit and its sorted spectrum.

    Returns (pt_matrix, eigenvalues ascending, min eigenvalue).  A negative
    minimum certifies entanglement; at 2x2 dimensions positivity certifies
    separability as well.
    """
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("PPT test supported for two qubits only")
    pt = partial_transpose(m, 0)
    ev = np.sort(np.linalg.eigvalsh((pt + pt.conj().T) / 2))
    return pt, ev, float(ev[0])


def concurrence(rho) -> float:
    """Wootters concurrence via the spin-flipped operator.

    Uses the Hermitian form sqrt(rho) rho~ sqrt(rho) for stability; tiny
    negative eigenvalues from roundoff are clamped at zero.
    """
    m = as_matrix(rho)
    if m.shape != (4, 4):
        raise ValueError("concurrence defined for two qubits")
    tilde = _SY2 @ m.conj() @ _SY2
    if np.abs(tilde - m).max() < 1e-14:
        # Bell-diagonal state: rho~ = rho, so the lambda_i are just the
        # eigenvalues of rho; avoids the sqrt(eps) noise of the general path
        lam = np.sort(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2)))[::-1]
    else:
        try:
            r = sqrtm((m + m.conj().T) / 2)
            herm = r @ tilde @ r
            ev = np.linalg.eigvalsh((herm + herm.conj().T) / 2)
        except Exception:
            ev = np.linalg.eigvals(m @ tilde).real
        lam = np.sqrt(np.clip(np.sort(ev.real)[::-1], 0.0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def eof_from_concurrence(c: float) -> float:
    """Entanglement of formation as the binary entropy of
    x = (1 + sqrt(1 - C^2))/2, with 0 lg 0 = 0."""
    c = min(max(c, 0.0), 1.0)
    x = 0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - c * c)))
    return _h2(x)


def _h2(x: float) -> float:
    s = 0.0
    for v in (x, 1.0 - x):
        if v > 0.0:
            s -= v * math.log2(v)
    return s


def eof(rho) -> float:
    return eof_from_concurrence(concurrence(rho))


def report(rho) -> EntanglementReport:
    _, _, mn = ppt(rho)
    c = concurrence(rho)
    return EntanglementReport(min_pt_eigenvalue=mn, concurrence=c,
                              eof=eof_from_concurrence(c), entangled=c > 0.0)


def st_mixture_concurrence(a: float, b: float, c: float) -> float:
    """Closed form for a S0 + b T0 + c (T1 + T-1): C = max(0, |a-b| - 2c)."""
    return max(0.0, abs(a - b) - 2.0 * c)


def st_mixture_analysis(a: float, b: float, c: float) -> EntanglementReport:
    """Entanglement report for a singlet/triplet mixture.

    The closed-form concurrence is cross-checked against the general
    Wootters computation; a singlet fraction above 1/2 is sufficient for
    entanglement regardless of the triplet split.
    """
    from .spincore import singlet_triplet_state
    rho = singlet_triplet_state(a, b, c)
    rep = report(rho)
    closed = st_mixture_concurrence(a, b, c)
    if abs(closed - rep.concurrence) > 1e-10:
        raise AssertionError(
            f"closed-form concurrence {closed} disagrees with Wootters {rep.concurrence}")
    return rep


# ---------------------------------------------------------------------------
# separability / polarization bounds

def braunstein_bounds(n: int) -> tuple[float, float]:
    """(eps_lower, eps_upper) for the separable neighbourhood of 1/2^n:
    states with eps <= 1/(1 + 2^(2n-1)) are separable; entangled states
    exist for eps > 1/(1 + 2^(n/2))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    eps_l = 1.0 / (1.0 + 2.0 ** (2 * n - 1))
    eps_u = 1.0 / (1.0 + 2.0 ** (n / 2.0))
    return eps_l, eps_u


def warren_bound(n: int, boltzmann_factor: float) -> float:
    """Maximum pseudopure polarization from a thermal state: n B / 2^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if boltzmann_factor <= 0:
        raise ValueError("B must be positive")
    return n * boltzmann_factor / 2.0 ** n


def crossover_qubits(boltzmann_factor: float, n_max: int = 200) -> int | None:
    """Smallest n at which the Warren bound reaches the separable-ball
    boundary eps_lower, i.e. pseudopure states can leave the provably
    separable region."""
    for n in range(2, n_max + 1):
        if warren_bound(n, boltzmann_factor) >= braunstein_bounds(n)[0]:
            return n
    return None


def crossover_boltzmann(n: int) -> float:
    """Minimum B at which warren(n, B) reaches eps_lower(n)."""
    eps_l, _ = braunstein_bounds(n)
    return eps_l * 2.0 ** n / n


def snap_to_one_significant(x: float) -> float:
    if x <= 0:
        return x
    e = math.floor(math.log10(x))
    return round(x / 10 ** e) * 10 ** e


def qubit_entropy(eps: float) -> float:
    """Shannon entropy of a qubit with populations (1 +- eps)/2, base 2."""
    if not (0.0 <= eps <= 1.0):
        raise ValueError("eps must lie in [0, 1]")
    return _h2((1.0 + eps) / 2.0)


def sv_compression(n: int, eps: float) -> tuple[float, float]:
    """Entropy-conserving polarization concentration: from n qubits at
    polarization eps one can extract at most k pure qubits.

    Returns (k_exact, k_approx) with k_exact = n (1 - S(eps)) and the
    small-eps expansion k_approx = n eps^2 / (2 ln 2).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    k_exact = n * (1.0 - qubit_entropy(eps))
    k_approx = n * eps * eps / (2.0 * math.log(2.0))
    return k_exact, k_approx


def bounds_report(n: int, boltzmann_factor: float, eps: float | None = None) -> BoundsReport:
    eps_l, eps_u = braunstein_bounds(n)
    k = None
    if eps is not None:
        k = sv_compression(n, eps)[0]
    return BoundsReport(n=n, eps_lower=eps_l, eps_upper=eps_u,
                        warren=warren_bound(n, boltzmann_factor), k_pure=k)
