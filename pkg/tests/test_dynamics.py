import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from phipsim import dynamics as dyn
from phipsim import spincore as sc

DPPE = sc.two_spin_system(492.0, 4.6, t1_s=1.7, t2_s=0.58, boltzmann_factor=6.48e-5)


def random_density(seed, dim=4):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = a @ a.conj().T
    return m / np.trace(m)


def comm(a, b):
    return a @ b - b @ a


class TestHamiltonian:
    def test_weak_matrix(self):
        h = dyn.hamiltonian(DPPE, "weak")
        expected = (2 * np.pi * 246.0 * sc.IZ - 2 * np.pi * 246.0 * sc.SZ
                    + np.pi * 4.6 * 2 * sc.IZSZ)
        assert np.abs(h.matrix - expected).max() < 1e-9

    def test_zero_system_zero_hamiltonian(self):
        s = sc.two_spin_system(0.0, 0.0)
        assert np.abs(dyn.hamiltonian(s).matrix).max() == 0.0

    def test_commuting_split(self):
        h = dyn.hamiltonian(DPPE, "weak")
        assert np.abs(h.commuting_part + h.noncommuting_part - h.matrix).max() < 1e-9
        assert np.abs(comm(h.commuting_part, sc.ISO)).max() < 1e-9
        assert np.abs(h.noncommuting_part - np.pi * 492.0 * (sc.IZ - sc.SZ)).max() < 1e-9

    def test_strong_mode_isotropic(self):
        s = sc.two_spin_system(0.0, 4.6)
        h = dyn.hamiltonian(s, "strong")
        assert np.abs(h.matrix - np.pi * 4.6 * 2 * sc.ISO).max() < 1e-12

    def test_commutator_table(self):
        assert np.abs(comm(sc.ZQX, sc.IZSZ)).max() < 1e-14
        assert np.abs(comm(sc.ZQX, sc.IZ - sc.SZ)).max() > 1e-3
        assert np.abs(comm(sc.DQY, sc.IZ + sc.SZ)).max() > 1e-3
        assert np.abs(comm(sc.DQY, sc.IZSZ)).max() < 1e-14
        assert np.abs(comm(sc.DQY, sc.IZ - sc.SZ)).max() < 1e-14


class TestPulses:
    def test_180_minus_x_inverts(self):
        s1 = sc.SpinSystem(1)
        U = dyn.pulse_propagator(dyn.Pulse(np.pi, np.pi), s1)
        rho = np.diag([1.0, 0.0]).astype(complex)
        out = dyn.evolve(rho, U)
        assert np.allclose(out, np.diag([0.0, 1.0]), atol=1e-12)

    def test_hard_90y_leaves_singlet(self):
        U = dyn.pulse_propagator(dyn.Pulse(np.pi / 2, np.pi / 2), DPPE)
        out = dyn.evolve(sc.SINGLET, U)
        assert np.abs(out - sc.SINGLET).max() < 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0, 2 * np.pi), st.floats(0, 2 * np.pi))
    def test_singlet_invariant_under_all_hard_pulses(self, theta, phi):
        U = dyn.pulse_propagator(dyn.Pulse(theta, phi), DPPE)
        out = dyn.evolve(sc.SINGLET, U)
        assert np.abs(out - sc.SINGLET).max() < 1e-12

    def test_selective_90Iy_on_singlet_deviation(self):
        # -I.S -> (2IzSx - 2IySy - 2IxSz)/2
        U = dyn.pulse_propagator(dyn.Pulse(np.pi / 2, np.pi / 2, target=0), DPPE)
        out = dyn.evolve(-sc.ISO, U)
        expected = 0.5 * (sc.build_operator("zx", 2) - sc.build_operator("yy", 2)
                          - sc.build_operator("xz", 2))
        assert np.abs(out - expected).max() < 1e-12

    def test_flip_angle_error_parameter(self):
        s1 = sc.SpinSystem(1)
        u_exact = dyn.pulse_propagator(dyn.Pulse(np.pi, 0.0), s1)
        u_err = dyn.pulse_propagator(dyn.Pulse(np.pi, 0.0, angle_error=0.01), s1)
        assert np.abs(u_exact - u_err).max() > 1e-4


class TestEvolution:
    def test_zq_precession(self):
        h = dyn.hamiltonian(DPPE)
        for tau in (1e-4, 3e-4, 7.7e-4):
            out = dyn.free_evolve(sc.ZQX, h, tau)
            expected = (sc.ZQX * np.cos(2 * np.pi * 492.0 * tau)
                        + sc.ZQY * np.sin(2 * np.pi * 492.0 * tau))
            assert np.abs(out - expected).max() < 1e-10

    def test_singlet_static_under_pure_weak_coupling(self):
        s = sc.two_spin_system(0.0, 4.6)
        out = dyn.free_evolve(sc.SINGLET, dyn.hamiltonian(s), 0.123)
        assert np.abs(out - sc.SINGLET).max() < 1e-12

    def test_spin_echo_effective_hamiltonian(self):
        tau = 0.01
        rho = random_density(3)
        echoed = dyn.propagate(rho, dyn.spin_echo(DPPE, tau), DPPE)
        U_j = expm(-1j * np.pi * 4.6 * 2 * sc.IZSZ * tau)
        U_180 = dyn.pulse_propagator(dyn.Pulse(np.pi, 0.0), DPPE)
        expected = U_180 @ U_j @ rho @ U_j.conj().T @ U_180.conj().T
        assert np.abs(echoed - expected).max() < 1e-10

    def test_composition_property(self):
        h = dyn.hamiltonian(DPPE)
        rho = random_density(11)
        a = dyn.free_evolve(rho, h, 0.017)
        b = dyn.free_evolve(dyn.free_evolve(rho, h, 0.009), h, 0.008)
        assert np.abs(a - b).max() < 1e-10

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dyn.evolve(np.eye(4) / 4, np.eye(2))

    def test_trace_and_spectrum_preserved(self):
        rho = random_density(5)
        out = dyn.free_evolve(rho, dyn.hamiltonian(DPPE), 0.02)
        assert abs(np.trace(out) - 1) < 1e-12
        ev_in = np.sort(np.linalg.eigvalsh(rho))
        ev_out = np.sort(np.linalg.eigvalsh(out))
        assert np.abs(ev_in - ev_out).max() < 1e-12


class TestCrush:
    def test_single_quantum_killed(self):
        dev = sc.IX + sc.build_operator("xz", 2)
        assert np.abs(dyn.crush(dev)).max() < 1e-15

    def test_singlet_survives(self):
        out = dyn.crush(sc.SINGLET)
        assert np.abs(out - sc.SINGLET).max() < 1e-15

    def test_block_pattern(self):
        rho = random_density(9)
        out = dyn.crush(rho)
        keep = np.zeros((4, 4), dtype=bool)
        keep[np.arange(4), np.arange(4)] = True
        keep[1, 2] = keep[2, 1] = True
        assert np.all(out[~keep] == 0)
        assert np.allclose(out[keep], rho[keep])

    def test_heteronuclear_keeps_diagonal_only(self):
        rho = random_density(10)
        out = dyn.crush(rho, "heteronuclear")
        assert np.allclose(out, np.diag(np.diag(rho)))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2 ** 31 - 1))
    def test_idempotent_projection_trace_preserving(self, seed):
        rho = random_density(seed)
        once = dyn.crush(rho)
        assert np.abs(dyn.crush(once) - once).max() == 0.0
        assert abs(np.trace(once) - np.trace(rho)) < 1e-14


class TestCrushSliced:
    def test_two_point_pi_span(self):
        out = dyn.crush_sliced(sc.IX, 2, np.pi)
        # oracle: (Ix + rotated-by-pi/2 Ix)/2 = (Ix + Iy)/2
        expected = (sc.IX + sc.IY) / 2
        assert np.abs(out - expected).max() < 1e-12
        assert np.abs(out).max() > 0.1

    def test_zero_span_identity(self):
        rho = random_density(2)
        assert np.abs(dyn.crush_sliced(rho, 8, 0.0) - rho).max() < 1e-15

    def test_convergence_to_analytic_crush(self):
        rho = random_density(1)
        out = dyn.crush_sliced(rho, 512, 64 * np.pi)
        assert np.abs(out - dyn.crush(rho)).max() < 1e-6


class TestTimedGradient:
    def test_full_period_freezes_singlet_deviation(self):
        dev = -sc.ZQX - sc.IZSZ
        out = dyn.timed_gradient(dev, DPPE, 1.0 / 492.0)
        assert np.abs(out - dev).max() < 1e-10

    def test_half_period_flips_zqx(self):
        dev = -sc.ZQX - sc.IZSZ
        out = dyn.timed_gradient(dev, DPPE, 1.0 / (2 * 492.0))
        assert np.abs(out - (sc.ZQX - sc.IZSZ)).max() < 1e-10

    def test_quarter_period_converts_to_zqy(self):
        out = dyn.timed_gradient(sc.ZQX, DPPE, 1.0 / (4 * 492.0))
        # ZQx fully converted to ZQy before the crush; ZQy survives (p=0)
        assert np.abs(out - sc.ZQY).max() < 1e-10


class TestJumpReturn:
    def test_delay_value(self):
        seq = dyn.jump_return_90Iy(DPPE)
        delay = [el for el in seq if isinstance(el, dyn.Delay)][0]
        assert abs(delay.duration - 508.13e-6) < 0.05e-6

    def test_zero_delta_rejected(self):
        with pytest.raises(ValueError):
            dyn.jump_return_90Iy(sc.two_spin_system(0.0, 4.6))

    def test_off_centre_rejected(self):
        s = sc.SpinSystem(2, (492.0, 0.0), ((0, 4.6), (4.6, 0)))
        with pytest.raises(ValueError):
            dyn.jump_return_90Iy(s)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1))
    def test_equivalent_to_ideal_selective_on_family(self, p, q):
        rho = np.eye(4) / 4 + p * sc.ZQX + q * sc.IZSZ
        seq_out = dyn.propagate(rho, dyn.jump_return_90Iy(DPPE), DPPE)
        U = dyn.pulse_propagator(dyn.Pulse(np.pi / 2, np.pi / 2, target=0), DPPE)
        ideal = U @ rho @ U.conj().T
        assert np.abs(seq_out - ideal).max() < 1e-10

    def test_singlet_detection_observable(self):
        out = dyn.propagate(sc.SINGLET, dyn.jump_return_90Iy(DPPE), DPPE)
        expected_dev = 0.5 * (sc.build_operator("zx", 2) - sc.build_operator("yy", 2)
                              - sc.build_operator("xz", 2))
        assert np.abs((out - np.eye(4) / 4) - expected_dev).max() < 1e-10

    def test_dropping_first_pulse_same_for_singlet(self):
        seq = dyn.jump_return_90Iy(DPPE)
        short = dyn.PulseSequence(seq.elements[1:])
        a = dyn.propagate(sc.SINGLET, seq, DPPE)
        b = dyn.propagate(sc.SINGLET, short, DPPE)
        assert np.abs(a - b).max() < 1e-12


class TestMlev:
    def test_requires_full_supercycle(self):
        with pytest.raises(ValueError):
            dyn.mlev16(DPPE, 1e-5)

    def test_singlet_exact_at_zero_offsets(self):
        s = sc.two_spin_system(0.0, 4.6)
        for n_super in (1, 3):
            seq = dyn.mlev16(s, n_super * dyn.mlev16_supercycle_duration())
            out = dyn.propagate(sc.SINGLET, seq, s)
            assert np.abs(out - sc.SINGLET).max() < 1e-10

    def test_singlet_fidelity_per_supercycle(self):
        # |common offset| up to delta/2 on top of the +-delta/2 split
        for om in (0.0, 123.0, 246.0):
            s = sc.SpinSystem(2, (om + 246.0, om - 246.0), ((0, 4.6), (4.6, 0)))
            seq = dyn.mlev16(s, dyn.mlev16_supercycle_duration())
            out = dyn.propagate(sc.bell_state("psi-"), seq, s)
            assert sc.singlet_fraction(out) >= 0.99

    def test_zqx_retention_one_supercycle(self):
        seq = dyn.mlev16(DPPE, dyn.mlev16_supercycle_duration())
        out = dyn.propagate(sc.ZQX, seq, DPPE)
        amp = np.trace(out @ sc.ZQX).real / np.trace(sc.ZQX @ sc.ZQX).real
        assert amp >= 0.99

    def test_singlet_fraction_constant_under_ideal_isotropic(self):
        rho = random_density(21)
        h = dyn.hamiltonian(sc.two_spin_system(0.0, 4.6), "strong")
        f0 = sc.singlet_fraction(rho)
        for t in (0.01, 0.1, 0.5):
            assert abs(sc.singlet_fraction(dyn.free_evolve(rho, h, t)) - f0) < 1e-12

    def test_closer_to_isotropic_than_weak_over_long_mixing(self):
        n = 200
        U_super, t_super = dyn._mlev16_supercycle(DPPE, 10000.0)
        U = np.linalg.matrix_power(U_super, n)
        t = n * t_super
        rho = random_density(4)
        out = U @ rho @ U.conj().T
        u_iso = expm(-1j * np.pi * 4.6 * 2 * sc.ISO * t)
        u_weak = expm(-1j * np.pi * 4.6 * 2 * sc.IZSZ * t)
        d_iso = np.abs(out - u_iso @ rho @ u_iso.conj().T).max()
        d_weak = np.abs(out - u_weak @ rho @ u_weak.conj().T).max()
        assert d_iso < d_weak


class TestDecohere:
    def test_t_zero_identity(self):
        rho = random_density(6)
        assert dyn.decohere(rho, 0.0, DPPE) is rho

    def test_ix_decay_defining_property(self):
        s = sc.two_spin_system(492.0, 4.6, t1_s=1e12, t2_s=1.0)
        out = dyn.decohere(sc.IX, 1.0, s)
        amp = np.trace(out @ sc.IX).real / np.trace(sc.IX @ sc.IX).real
        assert abs(amp - np.exp(-1.0)) < 1e-9

    @settings(max_examples=20, deadline=None)
    @given(st.floats(1e-3, 10.0), st.floats(0.1, 5.0), st.floats(0.05, 1.0))
    def test_kraus_completeness(self, t, t1, t2_frac):
        s = sc.two_spin_system(492.0, 4.6, t1_s=t1, t2_s=t1 * t2_frac)
        ks = dyn.decohere_kraus(t, s)
        acc = sum(k.conj().T @ k for k in ks)
        assert np.abs(acc - np.eye(4)).max() < 1e-12

    def test_kraus_matches_channel(self):
        rho = random_density(8)
        t = 0.3
        ks = dyn.decohere_kraus(t, DPPE)
        via_kraus = sum(k @ rho @ k.conj().T for k in ks)
        via_channel = dyn.decohere(rho, t, DPPE)
        assert np.abs(via_kraus - via_channel).max() < 1e-12

    def test_long_time_maximally_mixed(self):
        rho = sc.bell_state("psi-")
        out = dyn.decohere(rho, 1e4, DPPE)
        assert np.abs(sc.as_matrix(out) - np.eye(4) / 4).max() < 1e-6

    def test_output_valid_density(self):
        rho = sc.bell_state("phi+")
        out = dyn.decohere(rho, 0.2, DPPE)
        m = sc.as_matrix(out)
        assert abs(np.trace(m) - 1) < 1e-12
        assert np.linalg.eigvalsh(m).min() > -1e-12


class TestSequenceSerialisationSurface:
    def test_total_duration(self):
        seq = dyn.PulseSequence([dyn.Pulse(np.pi / 2, 0.0), dyn.Delay(0.01),
                                 dyn.GradientCrush("homonuclear", 0.002)])
        assert abs(seq.total_duration() - 0.012) < 1e-15

    def test_negative_duration_rejected(self):
        with pytest.raises(ValueError):
            dyn.Delay(-1.0)
        with pytest.raises(ValueError):
            dyn.GradientCrush("homonuclear", -0.1)

    def test_zrotation_propagator(self):
        s = DPPE
        z = dyn.ZRotation((np.pi / 4, -np.pi / 4))
        U = dyn.zrotation_propagator(z, s)
        expected = expm(-1j * np.pi / 4 * (sc.IZ - sc.SZ))
        assert np.abs(U - expected).max() < 1e-12
