import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvqft import fock
from cvqft import scattering as sc
from cvqft.errors import MemoryGuard, SpecError
from cvqft.lattice import LatticeSpec, dispersion
from cvqft.renorm import coupling_schedule
from cvqft.synthesis import target_bogoliubov

LAT = LatticeSpec(2, 1.0, 0.1)


def spec_for(lat=LAT, ins=(0,), outs=None, dt=0.1, D=6, **kw):
    return sc.make_spec(lat, 1.0, 0.5, dt, ins, outs, cutoff=D, **kw)


@pytest.mark.parametrize("kw", [dict(in_modes=(2,)), dict(out_modes=(0, 0, 0), cutoff=2),
                                dict(trotter_order=3), dict(exponent_sign=0), dict(schedule=None)])
def test_spec_validation(kw):
    base = dict(lattice=LAT, in_modes=(0,), out_modes=(0,),
                schedule=coupling_schedule(1.0, 0.5, 0.1, 0.1, 1.0), cutoff=4)
    base.update(kw)
    with pytest.raises(SpecError):
        sc.ScatteringSpec(**base)


def test_vacuum_preparation_is_ground_state():
    spec = spec_for(LatticeSpec(3, 1.0), ins=(), D=8)
    tb = target_bogoliubov(dispersion(spec.lattice))
    occ = fock.bogoliubov_numbers(sc.prepare_in_state(spec), tb.alpha, tb.beta)
    assert occ.max() < 1e-3


def test_one_particle_state():
    spec = spec_for(LatticeSpec(3, 1.0), ins=(1,), D=10)
    tb = target_bogoliubov(dispersion(spec.lattice))
    psi = sc.prepare_in_state(spec)
    occ = fock.bogoliubov_numbers(psi, tb.alpha, tb.beta)
    assert abs(occ.sum() - 1) < 1e-3 and abs(occ[1] - 1) < 1e-3
    omega = sc.prepare_in_state(spec, modes=())
    assert abs(fock.inner_product(omega, psi)) < 1e-6


def test_two_particle_order_irrelevant():
    spec = spec_for(LatticeSpec(3, 1.0), D=5)
    a = sc.prepare_in_state(spec, modes=(0, 2)).amplitudes
    b = sc.prepare_in_state(spec, modes=(2, 0)).amplitudes
    assert np.abs(a - b).max() < 1e-14


def test_free_trotter_equals_free_propagator():
    lat = LatticeSpec(2, 1.0, 0.0)
    spec = spec_for(lat, D=8)
    psi = sc.prepare_in_state(spec)
    out = sc.trotter_evolve(psi, spec)
    ref = fock.apply_free_evolution(psi, lat, -2.0)  # e^{+2iT H0}
    assert np.abs(out.amplitudes - ref.amplitudes).max() < 1e-10


def test_free_decoupled_amplitude_is_phase():
    # no squeezing needed, so the prepared state is an exact eigenstate
    lat = LatticeSpec(2, 1.0, 0.0, drop_lattice_term=True)
    spec = spec_for(lat, ins=(0, 1), D=6)
    psi = sc.prepare_in_state(spec)
    assert abs(abs(fock.inner_product(psi, sc.trotter_evolve(psi, spec))) - 1) < 1e-6


def test_oracle_matches_free_amplitude():
    spec = spec_for(LatticeSpec(2, 1.0, 0.0), ins=(0, 1), D=6)
    assert abs(sc.scattering_amplitude(spec).amplitude - sc.exact_amplitude_oracle(spec).amplitude) < 1e-10


def test_slice_hamiltonian_hermitian():
    H = sc.slice_hamiltonian(spec_for(), 0.1, -0.02)
    assert np.abs(H - H.conj().T).max() < 1e-12


def test_oracle_memory_guard():
    with pytest.raises(MemoryGuard):
        sc.exact_amplitude_oracle(spec_for(LatticeSpec(4, 1.0, 0.1), D=8))


def single_step_error(dt):
    spec = spec_for(D=6)
    psi = sc.prepare_in_state(spec, modes=(0, 0))
    lam, dm = 0.1, -0.01
    a = fock.apply_interaction(psi, lam, dm, dt)
    a = fock.apply_free_evolution(a, spec.lattice, -dt)
    U = fock.hermitian_expm(sc.slice_hamiltonian(spec, lam, dm), 1j * dt)
    b = U @ psi.amplitudes.ravel()
    return np.linalg.norm(a.amplitudes.ravel() - b)


def test_single_step_local_error_is_second_order():
    ratio = single_step_error(0.02) / single_step_error(0.01)
    assert 3.6 < ratio < 4.4


def test_norm_and_probability_conservation():
    spec = spec_for(ins=(0, 1), D=6)
    res = sc.scattering_amplitude(spec)
    assert abs(res.distribution.sum() + res.leakage - 1) < 1e-6
    assert abs(res.amplitude) ** 2 <= 1 + 1e-9


def off_number_weight(ins, D):
    spec = spec_for(LatticeSpec(2, 1.0, 0.0), ins=ins, outs=ins, D=D)
    p = sc.scattering_amplitude(spec).distribution
    tot = np.add.outer(np.arange(D + 1), np.arange(D + 1))
    return p[tot != len(ins)].sum()


def test_free_theory_conserves_photon_number():
    # violation comes only from the squeezer truncation and shrinks with D
    assert off_number_weight((0,), 12) < 1e-6
    w = [off_number_weight((0, 1), D) for D in (6, 8, 10, 12)]
    assert all(a > 5 * b for a, b in zip(w, w[1:]))


def test_free_theory_amplitudes():
    lat = LatticeSpec(2, 1.0, 0.0)
    assert abs(abs(sc.scattering_amplitude(spec_for(lat, D=8)).amplitude) - 1) < 1e-3
    assert abs(sc.scattering_amplitude(spec_for(lat, outs=(), D=8)).amplitude) < 1e-6


@pytest.mark.parametrize("order,target", [(1, 1.0), (2, 2.0)])
def test_transition_amplitude_convergence_order(order, target):
    errs = []
    for dt in (0.1, 0.05):
        spec = spec_for(ins=(0, 0), outs=(1, 1), dt=dt, trotter_order=order)
        errs.append(abs(sc.scattering_amplitude(spec).amplitude - sc.exact_amplitude_oracle(spec).amplitude))
    assert abs(sc.convergence_order((0.1, 0.05), errs) - target) < 0.3


def test_forward_amplitude_first_order_error_cancels():
    # <in|[H0, V]|in> vanishes for H0 eigenstates, so the forward amplitude
    # converges one order faster than the state under first-order splitting
    errs = []
    for dt in (0.1, 0.05):
        spec = spec_for(ins=(0,), outs=(0,), dt=dt, trotter_order=1)
        errs.append(abs(sc.scattering_amplitude(spec).amplitude - sc.exact_amplitude_oracle(spec).amplitude))
    assert sc.convergence_order((0.1, 0.05), errs) > 1.7


@settings(max_examples=8, deadline=None)
@given(a=st.sampled_from([(0,), (1,), (0, 0), (0, 1), (1, 1)]),
       b=st.sampled_from([(0,), (1,), (0, 0), (0, 1), (1, 1)]),
       lam=st.floats(0.0, 0.5))
def test_reciprocity_for_symmetric_schedule(a, b, lam):
    lat = LatticeSpec(2, 1.0, lam)
    fwd = sc.scattering_amplitude(spec_for(lat, a, b, D=5, trotter_order=2)).amplitude
    bwd = sc.scattering_amplitude(spec_for(lat, b, a, D=5, trotter_order=2)).amplitude
    assert abs(fwd - bwd) < 1e-12
    flipped = sc.scattering_amplitude(spec_for(lat, a, b, D=5, trotter_order=2, exponent_sign=-1)).amplitude
    assert abs(flipped - fwd.conjugate()) < 1e-12


def test_json_output():
    spec = spec_for(ins=(0, 0), outs=(1, 1))
    text = sc.scattering_amplitude(spec).to_json(min_p=1e-6)
    assert text == sc.scattering_amplitude(spec).to_json(min_p=1e-6)
    payload = json.loads(text)
    assert set(payload) == {"amplitude", "leakage", "distribution", "meta"}
    assert set(payload["amplitude"]) == {"re", "im"}
    assert all(set(d) == {"occ", "p"} and len(d["occ"]) == 2 for d in payload["distribution"])
    assert payload["meta"]["steps"] == 20 and "time" not in json.dumps(payload["meta"])


def test_with_dt_halves_step():
    spec = spec_for()
    half = sc.with_dt(spec, 0.05)
    assert half.schedule.steps == 2 * spec.schedule.steps and half.in_modes == spec.in_modes
