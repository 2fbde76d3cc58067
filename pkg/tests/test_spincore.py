import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phipsim import spincore as sc

# independent Kronecker oracle with its own Pauli definitions
_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def kron_oracle(*mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


class TestBuildOperator:
    def test_ix_single_qubit(self):
        assert np.allclose(sc.build_operator("x", 1), 0.5 * _SX)

    def test_identity_label_is_half_unit(self):
        assert np.allclose(sc.build_operator("E", 1), np.eye(2) / 2)

    def test_2IzSz_matches_kron_oracle(self):
        # 2 IzSz = 2 (sz/2 (x) sz/2) = diag(1/2,-1/2,-1/2,1/2)
        expected = 0.5 * kron_oracle(_SZ, _SZ)
        assert np.allclose(sc.build_operator("zz", 2), expected)
        assert np.allclose(np.diag(sc.build_operator("zz", 2)), [0.5, -0.5, -0.5, 0.5])

    def test_label_length_mismatch(self):
        with pytest.raises(ValueError):
            sc.build_operator("xz", 1)

    def test_unknown_factor(self):
        with pytest.raises(ValueError):
            sc.build_operator("q", 1)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_trace_orthogonality_and_norm(self, n):
        labels = sc.basis_labels(n, "cartesian")
        mats = [sc.build_operator(l, n) for l in labels]
        for i, a in enumerate(mats):
            for j, b in enumerate(mats):
                tr = np.trace(a @ b)
                if i == j:
                    assert abs(tr - 2.0 ** (n - 2)) < 1e-12
                else:
                    assert abs(tr) < 1e-12


class TestExpand:
    def test_thermal_coefficients(self):
        rho = sc.thermal_state(2, 6.48e-5)          # physical sign: -B/4 on Iz, Sz
        exp = sc.expand(rho)
        assert abs(exp.coefficient("zE") - (-6.48e-5 / 4)) < 1e-15
        assert abs(exp.coefficient("Ez") - (-6.48e-5 / 4)) < 1e-15
        for lab in ("xx", "yy", "zz", "xy", "zx"):
            assert abs(exp.coefficient(lab)) < 1e-15

    def test_maximally_mixed(self):
        exp = sc.expand(np.eye(4) / 4)
        for lab, c in exp.coefficients.items():
            if lab != "EE":
                assert abs(c) < 1e-15

    def test_singlet_coefficients(self):
        exp = sc.expand(sc.SINGLET)
        for lab in ("xx", "yy", "zz"):
            assert abs(exp.coefficient(lab) - (-0.5)) < 1e-12

    def test_identity_coefficient_is_half_for_two_qubits(self):
        exp = sc.expand(np.eye(4) / 4)
        assert abs(exp.coefficient("EE") - 0.5) < 1e-12

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
    def test_reconstruction_roundtrip(self, n, seed):
        rng = np.random.default_rng(seed)
        m = random_hermitian(rng, 2 ** n)
        exp = sc.expand(m)
        assert np.abs(exp.reconstruct() - m).max() < 1e-10
        # Hermitian input, Cartesian labels: coefficients real
        assert max(abs(c.imag) for c in exp.coefficients.values()) < 1e-10

    @pytest.mark.parametrize("basis", ["spherical", "polarization"])
    def test_other_bases_reconstruct(self, basis):
        rng = np.random.default_rng(7)
        m = random_hermitian(rng, 4)
        exp = sc.expand(m, basis)
        assert np.abs(exp.reconstruct() - m).max() < 1e-10


class TestCoherenceDecompose:
    def test_singlet_is_order_zero(self):
        comps = sc.coherence_decompose(sc.SINGLET)
        for p, comp in comps.items():
            if p != 0:
                assert np.abs(comp).max() < 1e-15
        # element-position oracle: ZQ positions (1,2),(2,1) plus diagonal
        mask = np.zeros((4, 4), dtype=bool)
        mask[np.arange(4), np.arange(4)] = True
        mask[1, 2] = mask[2, 1] = True
        assert np.all(comps[0][~mask] == 0)

    def test_ix_splits_into_pm1(self):
        comps = sc.coherence_decompose(sc.IX)
        n1 = np.abs(comps[1]).sum()
        nm1 = np.abs(comps[-1]).sum()
        assert abs(n1 - nm1) < 1e-12 and n1 > 0
        assert np.abs(comps[0]).max() < 1e-15
        assert np.abs(comps[2]).max() < 1e-15

    def test_2IxSx_orders(self):
        op = sc.build_operator("xx", 2)
        comps = sc.coherence_decompose(op)
        # ZQ part = ZQx, DQ part = DQx
        assert np.allclose(comps[0], sc.ZQX)
        assert np.allclose(comps[2] + comps[-2], sc.DQX)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 2 ** 31 - 1))
    def test_components_sum_and_disjoint(self, n, seed):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(2 ** n, 2 ** n)) + 1j * rng.normal(size=(2 ** n, 2 ** n))
        comps = sc.coherence_decompose(m)
        assert np.abs(sum(comps.values()) - m).max() == 0.0
        support = np.zeros(m.shape, dtype=int)
        for comp in comps.values():
            support += (comp != 0).astype(int)
        assert support.max() <= 1


class TestConstructors:
    def test_werner_full_polarization_is_singlet(self):
        w = sc.werner_state(1.0)
        assert np.abs(w.matrix - sc.SINGLET).max() < 1e-15
        # deviation form 1/4 - (ZQx + IzSz)
        dev = w.matrix - np.eye(4) / 4
        assert np.abs(dev + sc.ZQX + sc.IZSZ).max() < 1e-15

    def test_para_ortho_zero_is_ortho(self):
        r = sc.para_ortho_state(0.0)
        expected = np.eye(4) / 4 + (sc.ZQX + sc.IZSZ) / 3
        assert np.abs(r.matrix - expected).max() < 1e-15

    def test_pure_singlet_central_block(self):
        r = sc.singlet_triplet_state(1.0, 0.0, 0.0)
        assert np.allclose(r.matrix[1:3, 1:3], 0.5 * np.array([[1, -1], [-1, 1]]))

    def test_singlet_triplet_rejects_bad_fractions(self):
        with pytest.raises(ValueError):
            sc.singlet_triplet_state(0.9, 0.2, 0.1)
        with pytest.raises(ValueError):
            sc.singlet_triplet_state(1.2, -0.1, -0.05)

    def test_werner_range(self):
        with pytest.raises(ValueError):
            sc.werner_state(-0.1)
        sc.werner_state(-0.1, extended_range=True)
        with pytest.raises(ValueError):
            sc.werner_state(-0.5, extended_range=True)

    @pytest.mark.parametrize("kind,args", [
        ("thermal", (2, 6.48e-5)),
        ("pseudopure", (0.5, "01")),
        ("werner", (0.7,)),
        ("bell", ("phi+",)),
        ("singlet_triplet", (0.9371, 0.0448, 0.00905)),
        ("para_ortho", (0.5,)),
    ])
    def test_all_constructors_valid_density(self, kind, args):
        rho = sc.make_state(kind, *args)
        m = rho.matrix
        assert np.abs(m - m.conj().T).max() < 1e-12
        assert abs(np.trace(m) - 1) < 1e-12
        assert np.linalg.eigvalsh(m).min() > -1e-10

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            sc.make_state("nope")


class TestSingletFraction:
    def test_singlet_is_one(self):
        assert abs(sc.singlet_fraction(sc.SINGLET) - 1.0) < 1e-12

    def test_maximally_mixed_quarter(self):
        assert abs(sc.singlet_fraction(np.eye(4) / 4) - 0.25) < 1e-12

    @pytest.mark.parametrize("eps", np.linspace(0, 1, 11))
    def test_werner_formula(self, eps):
        F = sc.singlet_fraction(sc.werner_state(eps))
        assert abs(F - (1 + 3 * eps) / 4) < 1e-12

    def test_wrong_dim(self):
        with pytest.raises(ValueError):
            sc.singlet_fraction(np.eye(2) / 2)


class TestSpinSystem:
    def test_asymmetric_coupling_rejected(self):
        with pytest.raises(ValueError):
            sc.SpinSystem(2, (1.0, -1.0), ((0.0, 1.0), (2.0, 0.0)))

    def test_t2_gt_t1_rejected(self):
        with pytest.raises(ValueError):
            sc.two_spin_system(100.0, 5.0, t1_s=1.0, t2_s=2.0)

    def test_boltzmann_range(self):
        with pytest.raises(ValueError):
            sc.two_spin_system(100.0, 5.0, boltzmann_factor=1.5)

    def test_delta_and_centring(self):
        s = sc.two_spin_system(492.0, 4.6)
        assert s.delta_hz == 492.0
        assert s.is_transmitter_centred()
        off = sc.SpinSystem(2, (400.0, 100.0), ((0, 4.6), (4.6, 0)))
        assert not off.is_transmitter_centred()


class TestDensityState:
    def test_rejects_nonhermitian(self):
        m = np.eye(4) / 4
        m[0, 1] = 0.1
        with pytest.raises(ValueError):
            sc.DensityState(m)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError):
            sc.DensityState(np.eye(4))

    def test_rejects_negative_eigenvalue(self):
        m = np.diag([0.6, 0.5, 0.0, -0.1])
        with pytest.raises(ValueError):
            sc.DensityState(m)

    def test_deviation_traceless(self):
        rho = sc.werner_state(0.5)
        assert abs(np.trace(rho.deviation())) < 1e-14
