"""Named acceptance checks with a deterministic JSON summary.

Each check returns a ``CheckResult``; nothing time-dependent goes into the
summary, so two runs with the same options serialize to identical bytes.
Runtime budgets are enforced by the test suite, not here.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fock, scattering
from .lattice import LatticeSpec, build_coupling_matrix, dispersion, mode_frequencies
from .renorm import c_d_constant, coupling_schedule, sigma_continuum, sigma_discrete
from .synthesis import (Swap, TwoModeRotation, circuit_to_bogoliubov, real_rotation_matrix,
                        squeezer_parameters, synthesize_ground_circuit, target_bogoliubov)


@dataclass
class CheckResult:
    name: str
    group: str
    passed: bool
    values: dict = field(default_factory=dict)
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def _f(x) -> float:
    return float(x)


# ------------------------------------------------------------ dispersion


def check_dispersion() -> CheckResult:
    worst = 0.0
    for N in range(2, 65):
        for m in (0.5, 1.0, 2.0):
            spec = LatticeSpec(N, m)
            ev = np.linalg.eigvalsh(build_coupling_matrix(spec))
            worst = max(worst, float(np.abs(np.sort(ev) - np.sort(mode_frequencies(spec) ** 2)).max()))
    return CheckResult("dispersion_identity", "dispersion", worst < 1e-10,
                       {"max_residual": worst, "tol": 1e-10},
                       f"max |eig(V) - omega^2| = {worst:.2e} over N=2..64")


# ------------------------------------------------------------- synthesis


def printed_n4_product(sign: int = 1) -> np.ndarray:
    """R02(pi/4) S01 R13(pi/4) R02(pi/4) as a plain 4x4 matrix product.

    ``sign`` picks the rotation convention: +1 is [[c, -s], [s, c]] in the
    (i, j) plane, -1 its transpose.
    """
    def R(i, j, th):
        m = np.eye(4)
        c, s = math.cos(th), math.sin(th)
        m[i, i] = m[j, j] = c
        m[i, j], m[j, i] = -sign * s, sign * s
        return m

    S = np.eye(4)[[1, 0, 2, 3]]
    q = math.pi / 4
    return R(0, 2, q) @ S @ R(1, 3, q) @ R(0, 2, q)


def check_n4_literal() -> CheckResult:
    disp = dispersion(LatticeSpec(4, 1.0))
    O = disp.real_basis
    res = min(float(np.abs(printed_n4_product(s) - O).max()) for s in (1, -1))
    return CheckResult("n4_printed_product", "synthesis", res < 1e-12,
                       {"residual": res, "det_product": _f(np.linalg.det(printed_n4_product())),
                        "det_O": _f(np.linalg.det(O)), "tol": 1e-12},
                       f"literal product vs O: residual {res:.3f} (det {np.linalg.det(printed_n4_product()):+.0f}"
                       f" vs {np.linalg.det(O):+.0f})")


def check_n4_network() -> CheckResult:
    disp = dispersion(LatticeSpec(4, 1.0))
    circ = synthesize_ground_circuit(disp)
    rot = [g for g in circ.gates if isinstance(g, (TwoModeRotation, Swap))][:4]
    res = float(np.abs(real_rotation_matrix(rot, 4) - disp.real_basis).max())
    r = squeezer_parameters(disp)
    ok = res < 1e-12 and abs(r[3] + r[1]) < 1e-15 and len(circ.stage("rot", "swap")) == 4 + len(disp.pairs)
    return CheckResult("n4_rotation_network", "synthesis", ok,
                       {"residual": res, "r1": _f(r[1]), "r3": _f(r[3]),
                        "rotation_gates": 4},
                       f"4-gate network residual {res:.1e}, r3 + r1 = {r[3] + r[1]:.1e}")


def gate_count_exponent(Ns=(4, 8, 16, 32, 64)) -> tuple[float, list[int]]:
    counts = [len(synthesize_ground_circuit(dispersion(LatticeSpec(N, 1.0)), verify=False)) for N in Ns]
    slope = float(np.polyfit(np.log(Ns), np.log(counts), 1)[0])
    return slope, counts


def check_round_trip() -> CheckResult:
    worst = 0.0
    for N in (2, 3, 4, 6, 8, 16):
        disp = dispersion(LatticeSpec(N, 1.0))
        circ = synthesize_ground_circuit(disp, verify=False)
        worst = max(worst, circuit_to_bogoliubov(circ).distance(target_bogoliubov(disp)))
    slope, counts = gate_count_exponent()
    ok = worst < 1e-9 and slope <= 2.1
    return CheckResult("circuit_round_trip", "synthesis", ok,
                       {"max_residual": worst, "gate_counts": counts, "exponent": slope},
                       f"residual {worst:.1e}, gate-count exponent {slope:.3f}")


# ------------------------------------------------------------------ fock


def ground_state_quality(N: int, m: float, D: int = 10):
    spec = LatticeSpec(N, m)
    disp = dispersion(spec)
    circ = scattering.ground_circuit(spec)
    tb = target_bogoliubov(disp)
    omega = fock.apply_circuit(fock.vacuum(N, D), circ, dagger=True)
    occ = fock.bogoliubov_numbers(omega, tb.alpha, tb.beta)
    e0 = fock.energy_expectation(omega, spec)
    gaps = []
    for k in range(N):
        ex = fock.apply_circuit(fock.create_single_photon(fock.vacuum(N, D), k), circ, dagger=True)
        gaps.append(fock.energy_expectation(ex, spec) - e0)
    gap_err = float(np.abs(np.array(gaps) - disp.omegas).max())
    return float(occ.max()), gap_err


def check_ground_state() -> CheckResult:
    rows = {}
    ok = True
    for N in (2, 3, 4):
        for m in (1.0, 2.0):
            occ, gap = ground_state_quality(N, m)
            rows[f"N{N}_m{m:g}"] = {"max_occupation": occ, "gap_error": gap}
            ok &= occ < 1e-3 and gap < 1e-3
    worst_occ = max(r["max_occupation"] for r in rows.values())
    worst_gap = max(r["gap_error"] for r in rows.values())
    return CheckResult("ground_state_quality", "fock", ok, rows,
                       f"D=10: max <a+a> {worst_occ:.1e}, max energy-gap error {worst_gap:.1e}")


def check_photon_subtraction() -> CheckResult:
    fids = [fock.photon_subtraction_protocol(0.2, 0.1, D).fidelity for D in (10, 20, 30)]
    ok = fids[-1] > 0.999 and fids[0] <= fids[1] <= fids[2]
    return CheckResult("photon_subtraction", "fock", ok,
                       {"fidelity": dict(zip(("D10", "D20", "D30"), fids))},
                       f"fidelity D=10,20,30: {', '.join(f'{f:.12f}' for f in fids)}")


# ---------------------------------------------------------------- renorm


def check_sigma_d1() -> CheckResult:
    spec = LatticeSpec(10**6, 0.01, 1.0)
    disc = sigma_discrete(spec)
    cont = sigma_continuum(0.01, 1.0)
    rel = abs(disc - cont) / cont
    return CheckResult("sigma_d1", "renorm", rel < 0.02,
                       {"discrete": disc, "continuum": cont, "relative": rel},
                       f"N=1e6: {disc:.6f} vs {cont:.6f} ({100 * rel:.3f}%)")


def check_c_d() -> CheckResult:
    c2, c3 = c_d_constant(2), c_d_constant(3)
    ok = abs(c2 - 0.16) <= 0.01 and abs(c3 - 0.11) <= 0.01
    return CheckResult("c_d_constants", "renorm", ok, {"C2": c2, "C3": c3},
                       f"C2 = {c2:.6f}, C3 = {c3:.6f}")


def check_counterterm(dm_sign: str = "appendix") -> CheckResult:
    """The mass counter-term must cancel the one-loop shift at every slice."""
    m = 1.0
    sched = coupling_schedule(1.0, 0.5, 0.1, 0.1, m, dm_sign)
    worst = max(abs(dm + sigma_continuum(m, lam)) for _, lam, dm in sched.samples)
    return CheckResult("counterterm_cancels", "renorm", worst < 1e-12,
                       {"dm_sign": dm_sign, "max_residual": float(worst)},
                       f"dm_sign={dm_sign}: max |dm + Sigma| = {worst:.2e}")


# ------------------------------------------------------------ scattering

TROTTER_DTS = (0.1, 0.05, 0.025)
TROTTER_CHANNEL = ((0, 0), (1, 1))


def trotter_errors(order: int, in_modes=TROTTER_CHANNEL[0], out_modes=TROTTER_CHANNEL[1],
                   dm_sign: str = "appendix") -> list[float]:
    lat = LatticeSpec(2, 1.0, 0.1)
    errs = []
    for dt in TROTTER_DTS:
        spec = scattering.make_spec(lat, 1.0, 0.5, dt, in_modes, out_modes, cutoff=6,
                                    dm_sign=dm_sign, trotter_order=order)
        a = scattering.scattering_amplitude(spec).amplitude
        b = scattering.exact_amplitude_oracle(spec).amplitude
        errs.append(abs(a - b))
    return errs


def check_trotter(dm_sign: str = "appendix") -> CheckResult:
    values = {}
    ok = True
    for order, target in ((1, 1.0), (2, 2.0)):
        errs = trotter_errors(order, dm_sign=dm_sign)
        p = scattering.convergence_order(TROTTER_DTS, errs)
        values[f"order{order}"] = {"errors": errs, "measured": p}
        ok &= abs(p - target) <= 0.3
    return CheckResult("trotter_order", "scattering", ok, values,
                       f"measured orders {values['order1']['measured']:.3f} (first), "
                       f"{values['order2']['measured']:.3f} (symmetric)")


def check_free_theory() -> CheckResult:
    lat = LatticeSpec(2, 1.0, 0.0)
    same = scattering.scattering_amplitude(scattering.make_spec(lat, 1.0, 0.5, 0.1, (0,), (0,), cutoff=8))
    diff = scattering.scattering_amplitude(scattering.make_spec(lat, 1.0, 0.5, 0.1, (0,), (), cutoff=8))
    total = float(same.distribution.sum() + same.leakage)
    ok = abs(abs(same.amplitude) - 1) <= 1e-3 and abs(diff.amplitude) < 1e-6 and abs(total - 1) <= 1e-6
    return CheckResult("free_theory", "scattering", ok,
                       {"abs_same": abs(same.amplitude), "abs_diff": abs(diff.amplitude),
                        "probability_plus_leakage": total},
                       f"|A(out=in)| = {abs(same.amplitude):.6f}, |A(out!=in)| = {abs(diff.amplitude):.1e}, "
                       f"sum p + leakage = {total:.12f}")


def check_determinism() -> CheckResult:
    lat = LatticeSpec(2, 1.0, 0.1)
    spec = scattering.make_spec(lat, 1.0, 0.5, 0.1, (0,), (0,), cutoff=6)
    runs = [scattering.scattering_amplitude(spec).to_json() for _ in range(2)]
    circs = [synthesize_ground_circuit(dispersion(LatticeSpec(8, 1.0))).to_json() for _ in range(2)]
    ok = runs[0] == runs[1] and circs[0] == circs[1]
    return CheckResult("output_determinism", "determinism", ok, {},
                       "repeated scatter and synthesize outputs byte-identical" if ok else "outputs differ")


CHECKS = {
    "dispersion_identity": check_dispersion,
    "n4_printed_product": check_n4_literal,
    "n4_rotation_network": check_n4_network,
    "circuit_round_trip": check_round_trip,
    "ground_state_quality": check_ground_state,
    "photon_subtraction": check_photon_subtraction,
    "sigma_d1": check_sigma_d1,
    "c_d_constants": check_c_d,
    "counterterm_cancels": check_counterterm,
    "trotter_order": check_trotter,
    "free_theory": check_free_theory,
    "output_determinism": check_determinism,
}

GROUPS = {"dispersion", "synthesis", "fock", "renorm", "scattering", "determinism"}
_GROUP_OF = {"dispersion_identity": "dispersion", "n4_printed_product": "synthesis",
             "n4_rotation_network": "synthesis", "circuit_round_trip": "synthesis",
             "ground_state_quality": "fock", "photon_subtraction": "fock", "sigma_d1": "renorm",
             "c_d_constants": "renorm", "counterterm_cancels": "renorm", "trotter_order": "scattering",
             "free_theory": "scattering", "output_determinism": "determinism"}
_SIGN_AWARE = {"counterterm_cancels", "trotter_order"}


def run_checks(filters=None, dm_sign: str = "appendix") -> list[CheckResult]:
    """Run checks whose name or group matches any of ``filters`` (all if empty)."""
    results = []
    for name, fn in CHECKS.items():
        if filters and not any(f in (name, _GROUP_OF[name]) for f in filters):
            continue
        results.append(fn(dm_sign) if name in _SIGN_AWARE else fn())
    return results


def _clean(x):
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


def summary_json(results: list[CheckResult]) -> str:
    payload = {"passed": all(r.passed for r in results),
               "checks": [_clean(asdict(r)) for r in results]}
    return json.dumps(payload, sort_keys=True, indent=1) + "\n"
