import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvqft import fock
from cvqft.errors import CutoffSaturated, MemoryGuard, ParameterOrder, PhaseGuard, ShapeMismatch
from cvqft.lattice import LatticeSpec, dispersion
from cvqft.synthesis import (GaussianCircuit, PairMix, Phase, Squeeze, Swap, TwoModeRotation,
                             circuit_to_bogoliubov, target_bogoliubov)
from cvqft.scattering import ground_circuit


def random_state(M, D, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=(D + 1,) * M) + 1j * rng.normal(size=(D + 1,) * M)
    return fock.FockState(psi / np.linalg.norm(psi), D)


def test_vacuum():
    v = fock.vacuum(1, 3)
    assert np.array_equal(v.amplitudes, [1, 0, 0, 0]) and v.norm() == 1 and v.leakage == 0
    assert not (fock.ladder(4) @ v.amplitudes).any()


def test_memory_guard():
    with pytest.raises(MemoryGuard):
        fock.vacuum(30, 10)


def test_canonical_commutator_interior():
    ops = fock.quadrature_ops(10)
    c = ops.q_matrix @ ops.p_matrix - ops.p_matrix @ ops.q_matrix
    n = c.shape[0] - 1
    assert np.abs(c[:n, :n] - 1j * np.eye(n)).max() < 1e-10


def test_zero_squeeze_is_identity():
    s = random_state(2, 5, 0)
    out = fock.apply_gate(s, Squeeze(0, 0.0))
    assert np.abs(out.amplitudes - s.amplitudes).max() < 1e-14


def test_half_pi_rotation_moves_photon():
    out = fock.apply_gate(fock.basis_state((1, 0), 3), TwoModeRotation(0, 1, math.pi / 2))
    p = fock.number_distribution(out)
    assert math.isclose(p[0, 1], 1.0, abs_tol=1e-14)


def test_squeezed_vacuum_photon_number():
    out = fock.apply_gate(fock.vacuum(1, 20), Squeeze(0, 0.2))
    assert abs(fock.mode_numbers(out)[0] - math.sinh(0.2) ** 2) < 1e-6
    assert abs(out.norm() ** 2 + out.leakage - 1) < 1e-12


def test_beamsplitter_distribution():
    out = fock.apply_gate(fock.basis_state((1, 0), 2), TwoModeRotation(0, 1, math.pi / 4))
    p = fock.number_distribution(out)
    assert np.isclose(p[1, 0], 0.5) and np.isclose(p[0, 1], 0.5) and np.isclose(p.sum(), 1)
    assert fock.number_distribution(fock.vacuum(2, 2))[0, 0] == 1


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(-3.2, 3.2), seed=st.integers(0, 1000),
       kind=st.sampled_from(["rot", "pairmix", "swap", "phase"]))
def test_passive_gates_conserve_number_and_norm(theta, seed, kind):
    gate = {"rot": TwoModeRotation(0, 2, theta), "pairmix": PairMix(1, 2),
            "swap": Swap(0, 1), "phase": Phase(1, theta)}[kind]
    s = random_state(3, 4, seed)
    # keep total photon number <= D so sectors fit inside the cutoff
    n = np.add.outer(np.add.outer(np.arange(5), np.arange(5)), np.arange(5))
    s = fock.FockState(np.where(n <= 4, s.amplitudes, 0), 4)
    s = fock.FockState(s.amplitudes / s.norm(), 4)
    out = fock.apply_gate(s, gate)
    assert abs(out.norm() - 1) < 1e-12 and out.leakage < 1e-12
    p_in, p_out = fock.number_distribution(s), fock.number_distribution(out)
    for tot in range(5):
        assert abs(p_in[n == tot].sum() - p_out[n == tot].sum()) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), k=st.integers(0, 2))
def test_passive_circuit_matches_heisenberg_map(seed, k):
    rng = np.random.default_rng(seed)
    gates = []
    for _ in range(5):
        i, j = rng.choice(3, 2, replace=False)
        gates.append([TwoModeRotation(int(i), int(j), float(rng.uniform(-3, 3))), PairMix(int(i), int(j)),
                      Swap(int(i), int(j)), Phase(int(i), float(rng.uniform(-3, 3)))][rng.integers(4)])
    circ = GaussianCircuit(tuple(gates), 3)
    b = circuit_to_bogoliubov(circ)
    # b_l = U^dagger A_l U, so U^dagger A_k^dagger |0> has <b_l^dagger b_l> = delta_kl
    psi = fock.apply_circuit(fock.create_single_photon(fock.vacuum(3, 2), k), circ, dagger=True)
    occ = fock.bogoliubov_numbers(psi, b.alpha, b.beta)
    assert np.abs(occ - np.eye(3)[k]).max() < 1e-12


def test_quartic_phase():
    s = random_state(2, 6, 1)
    assert np.array_equal(fock.apply_quartic_phase(s, 0, 0.0).amplitudes, s.amplitudes)
    out = fock.apply_quartic_phase(fock.vacuum(1, 10), 0, 0.01)
    # first order: phase = gamma <0|Q^4|0> = 0.01 * 3/4
    assert abs(np.angle(out.amplitudes[0]) - 0.0075) < 1e-4
    assert math.isclose(fock.compressed_q4(10)[0, 0], 0.75, abs_tol=1e-14)
    with pytest.raises(PhaseGuard):
        fock.apply_quartic_phase(s, 0, 1.0)


def test_quartic_phase_preserves_parity():
    s = random_state(1, 10, 3)
    parity = (-1.0) ** np.arange(11)
    before = float(parity @ fock.number_distribution(s))
    after = float(parity @ fock.number_distribution(fock.apply_quartic_phase(s, 0, 0.03)))
    assert abs(before - after) < 1e-10


def test_free_evolution_basics():
    spec = LatticeSpec(2, 1.0)
    s = random_state(2, 5, 4)
    assert np.array_equal(fock.apply_free_evolution(s, spec, 0.0).amplitudes, s.amplitudes)
    out = fock.apply_free_evolution(s, spec, 1.0)
    assert abs(out.norm() - 1) < 1e-9


@pytest.mark.parametrize("subtract,energy", [(False, 2.0), (True, 1.0)])
def test_free_evolution_decoupled_oscillators(subtract, energy):
    # two uncoupled unit oscillators, one photon: E = 1/2 + 1/2 + 1
    spec = LatticeSpec(2, 1.0, drop_lattice_term=True)
    s = fock.basis_state((1, 0), 6)
    t = 0.7
    out = fock.apply_free_evolution(s, spec, t, subtract_vacuum_energy=subtract)
    assert abs(out.amplitudes[1, 0] - np.exp(-1j * energy * t)) < 1e-12


def test_counterterm():
    s = random_state(2, 5, 5)
    assert np.array_equal(fock.apply_counterterm(s, 0.0, 0.1).amplitudes, s.amplitudes)
    a = fock.apply_counterterm(fock.apply_counterterm(s, 0.3, 0.2), 0.3, 0.5)
    b = fock.apply_counterterm(s, 0.3, 0.7)
    assert np.abs(a.amplitudes - b.amplitudes).max() < 1e-9


def test_counterterm_output_is_gaussian():
    out = fock.apply_counterterm(fock.vacuum(1, 40), 0.5, 0.3)
    mom = fock.quadrature_moments(out, 0, (2, 4))
    assert abs(mom[4] - 3 * mom[2] ** 2) < 1e-8
    assert mom[2] != 0.5  # it did squeeze


def test_create_single_photon():
    s = fock.create_single_photon(fock.vacuum(3, 4), 1)
    assert s.amplitudes[0, 1, 0] == 1
    s2 = fock.create_single_photon(s, 1)
    assert math.isclose(abs(s2.amplitudes[0, 2, 0]), 1.0, abs_tol=1e-15)
    with pytest.raises(CutoffSaturated):
        fock.create_single_photon(fock.basis_state((4,), 4), 0)


def test_creation_commutes_with_disjoint_rotation():
    s = random_state(3, 3, 6)
    n = np.indices(s.amplitudes.shape)
    keep = (n[0] < 3) & (n[1] + n[2] <= 3)  # rotation sectors fit inside the cutoff
    s = fock.FockState(np.where(keep, s.amplitudes, 0), 3)
    g = TwoModeRotation(1, 2, 0.4)
    a = fock.apply_gate(fock.create_single_photon(s, 0), g)
    b = fock.create_single_photon(fock.apply_gate(s, g), 0)
    assert np.abs(a.amplitudes - b.amplitudes).max() < 1e-12


@settings(max_examples=20, deadline=None)
@given(seed1=st.integers(0, 1000), seed2=st.integers(0, 1000))
def test_inner_product_conjugate_symmetric(seed1, seed2):
    a, b = random_state(2, 3, seed1), random_state(2, 3, seed2)
    assert abs(fock.inner_product(a, b) - fock.inner_product(b, a).conjugate()) < 1e-14
    assert abs(fock.inner_product(a, a) - 1) < 1e-12


def test_inner_product_shapes():
    assert fock.inner_product(fock.basis_state((1, 0), 2), fock.basis_state((0, 1), 2)) == 0
    with pytest.raises(ShapeMismatch):
        fock.inner_product(fock.vacuum(2, 2), fock.vacuum(2, 3))


def subtraction_success_oracle(s, T):
    # A S(s)|0> = sinh(s) S(s)|1>, whose odd-number weights sum in closed form
    return (1 - T) * T * math.sinh(s) ** 2 / (math.cosh(s) ** 3 * (1 - T**2 * math.tanh(s) ** 2) ** 1.5)


def test_photon_subtraction():
    res = fock.photon_subtraction_protocol(0.2, 0.1, 30)
    assert res.transmittance == 0.5049668545762801
    assert res.fidelity > 0.999
    assert abs(res.success_probability - subtraction_success_oracle(0.2, res.transmittance)) < 1e-12
    fids = [fock.photon_subtraction_protocol(0.2, 0.1, D).fidelity for D in (10, 20, 30)]
    assert fids[0] <= fids[1] <= fids[2]


def test_photon_subtraction_mismatch_and_order():
    matched = fock.photon_subtraction_protocol(0.2, 0.1, 30)
    off = fock.photon_subtraction_protocol(0.2, 0.1, 30, transmittance=0.9 * matched.transmittance)
    assert off.fidelity < matched.fidelity - 1e-4
    with pytest.raises(ParameterOrder):
        fock.photon_subtraction_protocol(0.1, 0.2, 10)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_ground_state_tightens_with_cutoff(N):
    spec = LatticeSpec(N, 1.0)
    tb = target_bogoliubov(dispersion(spec))
    occ = []
    for D in (6, 8, 10):
        omega = fock.apply_circuit(fock.vacuum(N, D), ground_circuit(spec), dagger=True)
        occ.append(fock.bogoliubov_numbers(omega, tb.alpha, tb.beta).max())
        assert abs(omega.norm() ** 2 + omega.leakage - 1) < 1e-6
    assert occ[2] < occ[1] < occ[0] and occ[1] < 1e-3


def test_energy_gap_converges_with_cutoff():
    from cvqft.verify import ground_state_quality
    errs = [ground_state_quality(2, 2.0, D)[1] for D in (10, 14, 20)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-3
