"""Truncated multimode Fock-space simulator.

A state over M modes with per-mode cutoff D is a complex tensor of shape
(D+1,)*M, axis q holding the occupation of mode q.

Truncation policy:

* Generators that are polynomials in Q and P (Q^2, Q^4, H0) are formed on a
  padded single-mode space, compressed to the first D+1 levels, and then
  exponentiated.  The result is exactly unitary on the truncated space.
* Squeezers and two-mode passive gates are evaluated exactly on an enlarged
  space and projected back.  The probability that falls outside the cutoff
  is added to ``FockState.leakage``, so ``norm**2 + leakage`` stays at 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import CutoffSaturated, MemoryGuard, ParameterOrder, PhaseGuard, ShapeMismatch
from .lattice import LatticeSpec, build_coupling_matrix, mode_frequencies
from .synthesis import GaussianCircuit, PairMix, Phase, Squeeze, Swap, TwoModeRotation

DEFAULT_PAD = 4
MAX_STATE_DIM = 2**24
MAX_DENSE_DIM = 4096
PHASE_GUARD = 2 * math.pi
SATURATION_TOLERANCE = 1e-6


@dataclass
class FockState:
    amplitudes: np.ndarray
    cutoff: int
    leakage: float = 0.0

    @property
    def mode_count(self) -> int:
        return self.amplitudes.ndim

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "FockState":
        return FockState(self.amplitudes.copy(), self.cutoff, self.leakage)

    def with_amplitudes(self, amps: np.ndarray, extra_leakage: float = 0.0) -> "FockState":
        return replace(self, amplitudes=amps, leakage=self.leakage + max(extra_leakage, 0.0))


def check_memory(M: int, D: int, limit: int = MAX_STATE_DIM) -> None:
    if M * math.log(D + 1) > math.log(limit):
        raise MemoryGuard(f"(D+1)^M = {D + 1}^{M} exceeds {limit}")


def vacuum(M: int, D: int) -> FockState:
    check_memory(M, D)
    amps = np.zeros((D + 1,) * M, dtype=complex)
    amps[(0,) * M] = 1.0
    return FockState(amps, D)


def basis_state(occupations, D: int) -> FockState:
    occ = tuple(int(n) for n in occupations)
    if any(not 0 <= n <= D for n in occ):
        raise CutoffSaturated(f"occupation {occ} outside cutoff {D}")
    s = vacuum(len(occ), D)
    s.amplitudes[(0,) * len(occ)] = 0.0
    s.amplitudes[occ] = 1.0
    return s


# ---------------------------------------------------------------- operators


def ladder(n: int) -> np.ndarray:
    """Annihilation operator on the first n number states."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


@dataclass(frozen=True)
class QuadratureOps:
    ladder: np.ndarray
    q_matrix: np.ndarray
    p_matrix: np.ndarray
    pad: int


def quadrature_ops(D: int, pad: int = DEFAULT_PAD) -> QuadratureOps:
    a = ladder(D + 1 + pad)
    q = (a + a.T) / math.sqrt(2)
    p = (a - a.T) / (1j * math.sqrt(2))
    return QuadratureOps(a, q, p, pad)


@lru_cache(maxsize=64)
def _compressed(D: int, pad: int, power: int, which: str = "q") -> np.ndarray:
    ops = quadrature_ops(D, pad)
    x = ops.q_matrix if which == "q" else ops.p_matrix
    y = np.linalg.matrix_power(x, power)[: D + 1, : D + 1]
    y = 0.5 * (y + y.conj().T)
    return y.real if np.abs(y.imag).max() < 1e-14 else y


def compressed_q2(D: int, pad: int = DEFAULT_PAD) -> np.ndarray:
    return _compressed(D, pad, 2)


def compressed_q4(D: int, pad: int = DEFAULT_PAD) -> np.ndarray:
    return _compressed(D, pad, 4)


def compressed_p2(D: int, pad: int = DEFAULT_PAD) -> np.ndarray:
    return _compressed(D, pad, 2, "p")


def hermitian_expm(H: np.ndarray, t: complex) -> np.ndarray:
    """exp(t H) for Hermitian H through its eigendecomposition."""
    w, v = np.linalg.eigh(H)
    return (v * np.exp(t * w)) @ v.conj().T


@lru_cache(maxsize=256)
def _squeeze_block(D: int, r: float, pad: int) -> np.ndarray:
    n = 2 * D + 1 + pad
    a = ladder(n)
    gen = 0.5 * r * (a.T @ a.T - a @ a)
    return scipy.linalg.expm(gen)[: D + 1, : D + 1]


@lru_cache(maxsize=256)
def _passive_block(D: int, kind: str, theta: float) -> np.ndarray:
    """Exact two-mode passive unitary restricted to per-mode occupation <= D.

    Generator is block diagonal in total photon number; each sector is
    exponentiated exactly and only in/out states inside the cutoff are kept.
    """
    d1 = D + 1
    U = np.zeros((d1, d1, d1, d1), dtype=complex)
    for n in range(2 * D + 1):
        a = np.arange(n + 1)  # occupation of first mode, second = n - a
        hop = np.sqrt((a[:-1] + 1) * (n - a[:-1]))  # <a+1, n-a-1| Ai^+ Aj |a, n-a>
        K = np.zeros((n + 1, n + 1), dtype=complex)
        if kind == "rot":
            K[a[1:], a[:-1]] = theta * hop
            K[a[:-1], a[1:]] = -theta * hop
        else:
            K[a[1:], a[:-1]] = 1j * theta * hop
            K[a[:-1], a[1:]] = 1j * theta * hop
        Un = scipy.linalg.expm(K)
        keep = a[(a <= D) & (n - a <= D)]
        if keep.size == 0:
            continue
        U[keep[:, None], (n - keep)[:, None], keep[None, :], (n - keep)[None, :]] = Un[np.ix_(keep, keep)]
    return U.reshape(d1 * d1, d1 * d1)


def _apply_1mode(psi: np.ndarray, U: np.ndarray, q: int) -> np.ndarray:
    out = np.tensordot(U, psi, axes=([1], [q]))
    return np.moveaxis(out, 0, q)


def _apply_2mode(psi: np.ndarray, U: np.ndarray, i: int, j: int) -> np.ndarray:
    d1 = psi.shape[i]
    U4 = U.reshape(d1, d1, d1, d1)
    out = np.tensordot(U4, psi, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def _norm2(x: np.ndarray) -> float:
    return float(np.vdot(x, x).real)


def gate_unitary(gate, D: int, dagger: bool = False, pad: int = DEFAULT_PAD) -> np.ndarray:
    """Truncated Fock matrix G with G^dagger A G reproducing the gate's map.

    Single-mode gates give (D+1)x(D+1), two-mode gates (D+1)^2 x (D+1)^2
    (first mode is the slow index).  Swap is not represented here.
    """
    sign = -1.0 if dagger else 1.0
    if isinstance(gate, Squeeze):
        return _squeeze_block(D, sign * gate.r, pad)
    if isinstance(gate, Phase):
        return np.diag(np.exp(1j * sign * gate.phi * np.arange(D + 1)))
    if isinstance(gate, TwoModeRotation):
        return _passive_block(D, "rot", sign * gate.theta)
    if isinstance(gate, PairMix):
        return _passive_block(D, "mix", sign * math.pi / 4)
    raise TypeError(f"no Fock matrix for {gate!r}")


def apply_gate(state: FockState, gate, dagger: bool = False, pad: int = DEFAULT_PAD) -> FockState:
    psi = state.amplitudes
    if any(q >= state.mode_count for q in gate.modes):
        raise ShapeMismatch(f"{gate} acts outside {state.mode_count} modes")
    if isinstance(gate, Swap):
        return state.with_amplitudes(np.swapaxes(psi, gate.i, gate.j).copy())
    U = gate_unitary(gate, state.cutoff, dagger, pad)
    if len(gate.modes) == 1:
        out = _apply_1mode(psi, U, gate.i)
    else:
        out = _apply_2mode(psi, U, gate.i, gate.j)
    if isinstance(gate, Phase):
        return state.with_amplitudes(out)
    return state.with_amplitudes(out, _norm2(psi) - _norm2(out))


def apply_circuit(state: FockState, circuit: GaussianCircuit, dagger: bool = False,
                  pad: int = DEFAULT_PAD) -> FockState:
    """Apply U (gates in order) or U^dagger (daggered gates in reverse order)."""
    gates = reversed(circuit.gates) if dagger else circuit.gates
    for g in gates:
        state = apply_gate(state, g, dagger=dagger, pad=pad)
    return state


def apply_single_mode(state: FockState, U: np.ndarray, mode: int) -> FockState:
    return state.with_amplitudes(_apply_1mode(state.amplitudes, U, mode))


def apply_quartic_phase(state: FockState, mode: int, gamma: float, pad: int = DEFAULT_PAD,
                        guard: float = PHASE_GUARD) -> FockState:
    """exp(i gamma Q^4) on one mode."""
    D = state.cutoff
    if abs(gamma) * D**2 > guard:
        raise PhaseGuard(f"|gamma| D^2 = {abs(gamma) * D**2:.3g} exceeds {guard:.3g}")
    if gamma == 0:
        return state.copy()
    return apply_single_mode(state, hermitian_expm(compressed_q4(D, pad), 1j * gamma), mode)


def apply_counterterm(state: FockState, delta_m: float, dt: float, pad: int = DEFAULT_PAD) -> FockState:
    """exp(i dt delta_m/2 sum_n Q_n^2)."""
    if delta_m == 0 or dt == 0:
        return state.copy()
    U = hermitian_expm(compressed_q2(state.cutoff, pad), 0.5j * dt * delta_m)
    for q in range(state.mode_count):
        state = apply_single_mode(state, U, q)
    return state


@lru_cache(maxsize=128)
def local_interaction_unitary(D: int, gamma: float, half_dm_dt: float, pad: int = DEFAULT_PAD) -> np.ndarray:
    """exp(i (gamma Q^4 + half_dm_dt Q^2)) as one single-mode exponential."""
    G = gamma * compressed_q4(D, pad) + half_dm_dt * compressed_q2(D, pad)
    return hermitian_expm(G, 1j)


def apply_interaction(state: FockState, lam: float, delta_m: float, dt: float,
                      pad: int = DEFAULT_PAD, guard: float = PHASE_GUARD) -> FockState:
    """exp(i dt (lam/4! sum Q^4 + delta_m/2 sum Q^2)) applied mode by mode."""
    gamma = dt * lam / 24.0
    D = state.cutoff
    if abs(gamma) * D**2 > guard:
        raise PhaseGuard(f"|gamma| D^2 = {abs(gamma) * D**2:.3g} exceeds {guard:.3g}")
    U = local_interaction_unitary(D, gamma, 0.5 * dt * delta_m, pad)
    for q in range(state.mode_count):
        state = apply_single_mode(state, U, q)
    return state


# ------------------------------------------------------------ free evolution


def _embed(op: sp.spmatrix, q: int, M: int, d1: int) -> sp.spmatrix:
    left = sp.identity(d1**q, format="csr")
    right = sp.identity(d1 ** (M - q - 1), format="csr")
    return sp.kron(sp.kron(left, op), right, format="csr")


def free_hamiltonian(spec: LatticeSpec, D: int, pad: int = DEFAULT_PAD,
                     subtract_vacuum_energy: bool = False, max_dim: int = MAX_DENSE_DIM) -> np.ndarray:
    """Dense compressed H0 = 1/2 sum P_n^2 + 1/2 Q.V.Q on the truncated space."""
    M, d1 = spec.M, D + 1
    if M * math.log(d1) > math.log(max_dim):
        raise MemoryGuard(f"dense H0 of dimension {d1}^{M} exceeds {max_dim}")
    V = build_coupling_matrix(spec)
    q = sp.csr_matrix(quadrature_ops(D, pad).q_matrix[:d1, :d1])
    q2 = sp.csr_matrix(compressed_q2(D, pad))
    p2 = sp.csr_matrix(compressed_p2(D, pad))
    H = sp.csr_matrix((d1**M, d1**M))
    qs = [_embed(q, n, M, d1) for n in range(M)]
    for n in range(M):
        H = H + 0.5 * _embed(p2, n, M, d1) + 0.5 * V[n, n] * _embed(q2, n, M, d1)
        for k in range(n + 1, M):
            if V[n, k] != 0:
                H = H + V[n, k] * (qs[n] @ qs[k])
    H = H.toarray()
    if subtract_vacuum_energy:
        H -= 0.5 * mode_frequencies(spec).sum() * np.eye(H.shape[0])
    return 0.5 * (H + H.T)


@lru_cache(maxsize=16)
def _h0_eigensystem(spec: LatticeSpec, D: int, pad: int, subtract: bool):
    return np.linalg.eigh(free_hamiltonian(spec, D, pad, subtract))


def free_propagator(spec: LatticeSpec, D: int, t: float, pad: int = DEFAULT_PAD,
                    subtract_vacuum_energy: bool = False) -> np.ndarray:
    w, v = _h0_eigensystem(spec, D, pad, subtract_vacuum_energy)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


def apply_free_evolution(state: FockState, spec: LatticeSpec, t: float, pad: int = DEFAULT_PAD,
                         subtract_vacuum_energy: bool = False) -> FockState:
    """exp(-i t H0) on the whole truncated space."""
    if state.mode_count != spec.M:
        raise ShapeMismatch(f"state has {state.mode_count} modes, lattice {spec.M}")
    if t == 0:
        return state.copy()
    U = _cached_free_propagator(spec, state.cutoff, float(t), pad, subtract_vacuum_energy)
    out = (U @ state.amplitudes.ravel()).reshape(state.amplitudes.shape)
    return state.with_amplitudes(out)


@lru_cache(maxsize=8)
def _cached_free_propagator(spec, D, t, pad, subtract):
    return free_propagator(spec, D, t, pad, subtract)


# ------------------------------------------------------------ state prep etc.


def create_single_photon(state: FockState, mode: int) -> FockState:
    """Apply A^dagger to one mode, rescaled to the incoming norm."""
    psi = np.moveaxis(state.amplitudes, mode, 0)
    D = state.cutoff
    if np.abs(psi[D]).max() > SATURATION_TOLERANCE:
        raise CutoffSaturated(f"mode {mode} has weight at the cutoff level {D}")
    out = np.zeros_like(psi)
    out[1:] = np.sqrt(np.arange(1, D + 1)).reshape((-1,) + (1,) * (psi.ndim - 1)) * psi[:-1]
    out = np.moveaxis(out, 0, mode)
    n_out = np.linalg.norm(out)
    if n_out == 0:
        raise CutoffSaturated("A^dagger annihilated the state")
    return state.with_amplitudes(out * (state.norm() / n_out))


def number_distribution(state: FockState) -> np.ndarray:
    """|amplitude|^2 indexed by the occupation tuple."""
    return np.abs(state.amplitudes) ** 2


def occupation_table(state: FockState, min_p: float = 0.0) -> list[tuple[tuple[int, ...], float]]:
    p = number_distribution(state)
    idx = np.argwhere(p > min_p)
    return [(tuple(int(x) for x in row), float(p[tuple(row)])) for row in idx]


def inner_product(s1: FockState, s2: FockState) -> complex:
    if s1.amplitudes.shape != s2.amplitudes.shape:
        raise ShapeMismatch(f"{s1.amplitudes.shape} vs {s2.amplitudes.shape}")
    return complex(np.vdot(s1.amplitudes, s2.amplitudes))


def mode_numbers(state: FockState) -> np.ndarray:
    """<A_q^dagger A_q> per mode, normalized by the state norm."""
    p = number_distribution(state)
    n = np.arange(state.cutoff + 1)
    tot = p.sum()
    out = []
    for q in range(state.mode_count):
        marg = p.sum(axis=tuple(a for a in range(p.ndim) if a != q))
        out.append(float(marg @ n / tot))
    return np.array(out)


# ---------------------------------------------- exact expectation values


def _padded(state: FockState, extra: int = 1) -> np.ndarray:
    d = state.cutoff + 1 + extra
    psi = np.zeros((d,) * state.mode_count, dtype=complex)
    psi[(slice(0, state.cutoff + 1),) * state.mode_count] = state.amplitudes
    return psi


def _ladder_terms(psi: np.ndarray, alpha_row, beta_row) -> np.ndarray:
    d = psi.shape[0]
    a = ladder(d)
    out = np.zeros_like(psi)
    for q in range(psi.ndim):
        if alpha_row[q] != 0:
            out += alpha_row[q] * _apply_1mode(psi, a, q)
        if beta_row[q] != 0:
            out += beta_row[q] * _apply_1mode(psi, a.T, q)
    return out


def bogoliubov_numbers(state: FockState, alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """<a_k^dagger a_k> for a_k = alpha A + beta A^dagger, normalized.

    The state is embedded one level higher so single ladder steps are exact.
    """
    psi = _padded(state)
    tot = _norm2(psi)
    return np.array([_norm2(_ladder_terms(psi, alpha[k], beta[k])) / tot
                     for k in range(alpha.shape[0])])


def energy_expectation(state: FockState, spec: LatticeSpec) -> float:
    """<H0> of the normalized state, exact for the truncated vector."""
    psi = _padded(state)
    tot = _norm2(psi)
    d = psi.shape[0]
    a = ladder(d)
    q = (a + a.T) / math.sqrt(2)
    p = (a - a.T) / (1j * math.sqrt(2))
    V = build_coupling_matrix(spec)
    qpsi = [_apply_1mode(psi, q, n) for n in range(spec.M)]
    e = 0.0
    for n in range(spec.M):
        e += 0.5 * _norm2(_apply_1mode(psi, p, n))
        for k in range(spec.M):
            if V[n, k] != 0:
                e += 0.5 * V[n, k] * np.vdot(qpsi[n], qpsi[k]).real
    return float(e / tot)


def quadrature_moments(state: FockState, mode: int, orders=(1, 2, 3, 4)) -> dict[int, float]:
    """<Q^k> on one mode for the normalized state (embedded with enough headroom)."""
    psi = _padded(state, extra=max(orders))
    tot = _norm2(psi)
    a = ladder(psi.shape[0])
    q = (a + a.T) / math.sqrt(2)
    out = {}
    for k in orders:
        h = k // 2
        left = psi
        for _ in range(h):
            left = _apply_1mode(left, q, mode)
        right = psi
        for _ in range(k - h):
            right = _apply_1mode(right, q, mode)
        out[k] = float(np.vdot(left, right).real / tot)
    return out


# ------------------------------------------------------- photon subtraction


@dataclass(frozen=True)
class PhotonSubtractionResult:
    state: FockState
    success_probability: float
    fidelity: float
    transmittance: float


def photon_subtraction_protocol(s: float, s_prime: float, D: int, transmittance: float | None = None,
                                pad: int = DEFAULT_PAD) -> PhotonSubtractionResult:
    """Heralded single photon: S(s')^dagger T^{n/2} A S(s)|0> on one mode.

    With T = tanh(s')/tanh(s) the output is |1> up to truncation.  Passing
    ``transmittance`` overrides the matched value.
    """
    if not 0 < s_prime < s:
        raise ParameterOrder(f"need 0 < s' < s, got s={s}, s'={s_prime}")
    T = math.tanh(s_prime) / math.tanh(s) if transmittance is None else float(transmittance)
    vac = np.zeros(D + 1, dtype=complex)
    vac[0] = 1.0
    psi = _squeeze_block(D, float(s), pad) @ vac
    psi = ladder(D + 1) @ psi
    psi = T ** (np.arange(D + 1) / 2.0) * psi
    success = (1.0 - T) * _norm2(psi)
    psi = _squeeze_block(D, -float(s_prime), pad) @ psi
    psi = psi / np.linalg.norm(psi)
    return PhotonSubtractionResult(FockState(psi, D), success, float(abs(psi[1]) ** 2), T)
