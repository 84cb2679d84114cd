"""Gaussian circuit synthesis for the free-field ground state.

Gates are described by their action on annihilation operators: a gate maps
the vector A to ``alpha @ A + beta @ A^dagger`` on its modes.  A circuit
``[g1, g2, ...]`` is applied in list order, so its composed action is
``S_L ... S_2 S_1`` on the stacked vector (A, A^dagger).

The ground-state circuit has three stages:

1. a real orthogonal rotation onto cos/sin normal modes (Givens network),
2. single-mode squeezers, with a pi/2 phase in front of each sin-mode squeezer,
3. a -pi/4 two-mode rotation per (k, -k) pair that recombines the cos/sin
   modes into the complex plane-wave modes a_k and a_{-k}.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import NotOrthogonal, SynthesisMismatch
from .lattice import DispersionData

SYNTHESIS_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TwoModeRotation:
    """A_i -> cos(theta) A_i + sin(theta) A_j ; A_j -> -sin(theta) A_i + cos(theta) A_j."""

    i: int
    j: int
    theta: float

    name = "rot"

    @property
    def modes(self) -> tuple[int, ...]:
        return (self.i, self.j)

    def local_map(self):
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, s], [-s, c]], dtype=complex), np.zeros((2, 2), dtype=complex)

    def to_dict(self):
        return {"gate": self.name, "modes": [self.i, self.j], "theta": self.theta}


@dataclass(frozen=True)
class Swap:
    """Mode relabelling i <-> j."""

    i: int
    j: int

    name = "swap"

    @property
    def modes(self):
        return (self.i, self.j)

    def local_map(self):
        return np.array([[0, 1], [1, 0]], dtype=complex), np.zeros((2, 2), dtype=complex)

    def to_dict(self):
        return {"gate": self.name, "modes": [self.i, self.j]}


@dataclass(frozen=True)
class Squeeze:
    """A -> cosh(r) A + sinh(r) A^dagger."""

    i: int
    r: float

    name = "squeeze"

    @property
    def modes(self):
        return (self.i,)

    def local_map(self):
        return (np.array([[math.cosh(self.r)]], dtype=complex),
                np.array([[math.sinh(self.r)]], dtype=complex))

    def to_dict(self):
        return {"gate": self.name, "modes": [self.i], "r": self.r}


@dataclass(frozen=True)
class PairMix:
    """A_i -> (A_i + i A_j)/sqrt2 ; A_j -> (i A_i + A_j)/sqrt2."""

    i: int
    j: int

    name = "pairmix"

    @property
    def modes(self):
        return (self.i, self.j)

    def local_map(self):
        h = 1 / math.sqrt(2)
        return np.array([[h, 1j * h], [1j * h, h]]), np.zeros((2, 2), dtype=complex)

    def to_dict(self):
        return {"gate": self.name, "modes": [self.i, self.j]}


@dataclass(frozen=True)
class Phase:
    """A -> exp(i phi) A."""

    i: int
    phi: float

    name = "phase"

    @property
    def modes(self):
        return (self.i,)

    def local_map(self):
        if self.phi == math.pi:
            u = -1.0 + 0j
        else:
            u = complex(math.cos(self.phi), math.sin(self.phi))
        return np.array([[u]]), np.zeros((1, 1), dtype=complex)

    def to_dict(self):
        return {"gate": self.name, "modes": [self.i], "phi": self.phi}


GaussianGate = Union[TwoModeRotation, Swap, Squeeze, PairMix, Phase]

_GATE_TYPES = {"rot": TwoModeRotation, "swap": Swap, "squeeze": Squeeze,
               "pairmix": PairMix, "phase": Phase}


def gate_from_dict(d: dict) -> GaussianGate:
    kind = d["gate"]
    modes = d["modes"]
    if kind == "rot":
        return TwoModeRotation(modes[0], modes[1], float(d["theta"]))
    if kind == "squeeze":
        return Squeeze(modes[0], float(d["r"]))
    if kind == "phase":
        return Phase(modes[0], float(d["phi"]))
    if kind in _GATE_TYPES:
        return _GATE_TYPES[kind](modes[0], modes[1])
    raise ValueError(f"unknown gate {kind!r}")


@dataclass(frozen=True)
class GaussianCircuit:
    gates: tuple = field(default_factory=tuple)
    mode_count: int = 0

    def __post_init__(self):
        for g in self.gates:
            ms = g.modes
            if any(not 0 <= q < self.mode_count for q in ms):
                raise ValueError(f"{g} acts outside {self.mode_count} modes")
            if len(ms) == 2 and ms[0] == ms[1]:
                raise ValueError(f"{g} needs two distinct modes")

    def __len__(self):
        return len(self.gates)

    def stage(self, *kinds: str) -> list:
        return [g for g in self.gates if g.name in kinds]

    def to_json(self) -> str:
        # float repr is the shortest string that round-trips bit-exactly
        payload = {"mode_count": self.mode_count,
                   "gates": [g.to_dict() for g in self.gates]}
        return json.dumps(payload, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GaussianCircuit":
        payload = json.loads(text)
        return cls(tuple(gate_from_dict(g) for g in payload["gates"]), payload["mode_count"])


@dataclass(frozen=True)
class BogoliubovTransform:
    """a = alpha A + beta A^dagger."""

    alpha: np.ndarray
    beta: np.ndarray

    def commutator_residual(self) -> float:
        M = self.alpha.shape[0]
        r = self.alpha @ self.alpha.conj().T - self.beta @ self.beta.conj().T - np.eye(M)
        return float(np.abs(r).max())

    def symmetry_residual(self) -> float:
        x = self.alpha @ self.beta.T
        return float(np.abs(x - x.T).max())

    def distance(self, other: "BogoliubovTransform") -> float:
        return float(max(np.abs(self.alpha - other.alpha).max(),
                         np.abs(self.beta - other.beta).max()))


def squeeze_coefficients(omegas):
    """cosh r and sinh r for e^{2r} = omega."""
    sq = np.sqrt(omegas)
    return 0.5 * (sq + 1 / sq), 0.5 * (sq - 1 / sq)


def target_bogoliubov(disp: DispersionData) -> BogoliubovTransform:
    c, s = squeeze_coefficients(disp.omegas)
    et = disp.plane_wave_basis.conj().T
    return BogoliubovTransform(c[:, None] * et, s[:, None] * et)


def givens_decompose(O: np.ndarray, tol: float = 1e-10) -> list:
    """Rotations (plus at most one sign flip) whose composed action is O.

    Column-by-column elimination: rotate rows (c, r) to zero O[r, c].  What
    remains is diagonal with entries +-1; each -1 becomes a pi phase.
    Entries that are already zero are skipped.  At most M(M-1)/2 + M gates.
    """
    O = np.asarray(O, dtype=float)
    M = O.shape[0]
    if O.shape != (M, M) or np.abs(O @ O.T - np.eye(M)).max() > tol:
        raise NotOrthogonal("matrix is not orthogonal to tolerance")
    W = O.copy()
    eliminated = []
    for c in range(M - 1):
        for r in range(M - 1, c, -1):
            y = W[r, c]
            if abs(y) < 1e-15:
                continue
            x = W[c, c]
            theta = math.atan2(y, x)
            cs, sn = math.cos(theta), math.sin(theta)
            row_c, row_r = W[c].copy(), W[r].copy()
            W[c] = cs * row_c + sn * row_r
            W[r] = -sn * row_c + cs * row_r
            W[r, c] = 0.0
            eliminated.append((c, r, theta))
    gates = [Phase(q, math.pi) for q in range(M) if W[q, q] < 0]
    gates.extend(TwoModeRotation(c, r, -theta) for c, r, theta in reversed(eliminated))
    return gates


def compose(gates, M: int) -> np.ndarray:
    """2M x 2M action of a gate sequence on (A, A^dagger)."""
    S = np.eye(2 * M, dtype=complex)
    for g in gates:
        ms = list(g.modes)
        a, b = g.local_map()
        top, bot = S[ms].copy(), S[[M + q for q in ms]].copy()
        S[ms] = a @ top + b @ bot
        S[[M + q for q in ms]] = b.conj() @ top + a.conj() @ bot
    return S


def circuit_to_bogoliubov(circuit: GaussianCircuit) -> BogoliubovTransform:
    M = circuit.mode_count
    S = compose(circuit.gates, M)
    return BogoliubovTransform(S[:M, :M].copy(), S[:M, M:].copy())


def real_rotation_matrix(gates, M: int) -> np.ndarray:
    """Real M x M matrix of a passive real gate list (rotations, swaps, pi phases)."""
    S = compose(gates, M)
    return S[:M, :M].real.copy()


def squeezer_parameters(disp: DispersionData) -> np.ndarray:
    """r_k with e^{2r}=omega on cos rows and e^{-2r}=omega on sin rows."""
    r = 0.5 * np.log(disp.omegas)
    for _, g in disp.pairs:
        r[g] = -r[g]
    return r


# Four two-mode gates for the d=1, N=4 cos/sin basis (one fewer than the
# generic elimination).  The pi/2 rotation is a swap carrying a sign, which
# keeps the network inside SO(4).
_KNOWN_ROTATION_STAGES = {
    (1, 4): (
        TwoModeRotation(0, 2, -math.pi / 4),
        TwoModeRotation(1, 3, -3 * math.pi / 4),
        TwoModeRotation(0, 1, -math.pi / 2),
        TwoModeRotation(0, 2, math.pi / 4),
    ),
}


def rotation_stage(disp: DispersionData) -> list:
    """Gates realizing the real orthogonal basis change A' = O A."""
    known = _KNOWN_ROTATION_STAGES.get((disp.spec.d, disp.spec.N))
    if known is not None:
        R = real_rotation_matrix(known, disp.M)
        if np.abs(R - disp.real_basis).max() < 1e-12:
            return list(known)
    return givens_decompose(disp.real_basis)


def synthesize_ground_circuit(disp: DispersionData, verify: bool = True) -> GaussianCircuit:
    """Circuit U with a_k = U^dagger A_k U for the free-field normal modes."""
    M = disp.M
    gates = rotation_stage(disp)
    gates += [Phase(g, math.pi / 2) for _, g in disp.pairs]
    gates += [Squeeze(k, float(r)) for k, r in enumerate(squeezer_parameters(disp))]
    gates += [TwoModeRotation(f, g, -math.pi / 4) for f, g in disp.pairs]
    circuit = GaussianCircuit(tuple(gates), M)
    if verify:
        err = circuit_to_bogoliubov(circuit).distance(target_bogoliubov(disp))
        if err > SYNTHESIS_TOLERANCE:
            raise SynthesisMismatch(f"round-trip residual {err:.3e}")
    return circuit


def synthesis_residual(disp: DispersionData, circuit: GaussianCircuit) -> float:
    return circuit_to_bogoliubov(circuit).distance(target_bogoliubov(disp))
