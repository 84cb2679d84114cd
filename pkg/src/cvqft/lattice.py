"""Free scalar field on a periodic hypercubic lattice.

Sites n in Z_N^d are flattened row-major (``np.ravel_multi_index`` order);
momentum labels k in Z_N^d use the same flattening, with physical momentum
2*pi*k/N.  Everything downstream (circuit synthesis, Fock-space mode axes,
measurement tables) relies on this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DimensionUnsupported, PoleProximity, SpecError

POLE_TOLERANCE = 1e-8


@dataclass(frozen=True)
class LatticeSpec:
    """Physics instance: d spatial dimensions, N sites per dimension.

    ``lam`` is the quartic coupling.  When ``m == 0`` the zero mode is
    regularized by using ``zero_mode_shift`` (default 1/N) as the mass.
    ``drop_lattice_term`` is a diagnostic switch that removes the
    nearest-neighbour coupling, leaving decoupled oscillators.
    """

    N: int
    m: float = 1.0
    lam: float = 0.0
    d: int = 1
    zero_mode_shift: float | None = None
    drop_lattice_term: bool = False

    def __post_init__(self):
        if int(self.d) != self.d or not 1 <= self.d <= 3:
            raise DimensionUnsupported(f"d must be 1, 2 or 3, got {self.d}")
        if int(self.N) != self.N or self.N < 2:
            raise SpecError(f"N must be an integer >= 2, got {self.N}")
        if not np.isfinite(self.m) or self.m < 0:
            raise SpecError(f"m must be >= 0, got {self.m}")
        if not np.isfinite(self.lam) or self.lam < 0:
            raise SpecError(f"lambda must be >= 0, got {self.lam}")
        if self.zero_mode_shift is not None and not self.zero_mode_shift > 0:
            raise SpecError("zero_mode_shift must be > 0")

    @property
    def M(self) -> int:
        return self.N**self.d

    @property
    def m_eff(self) -> float:
        if self.m > 0:
            return float(self.m)
        if self.zero_mode_shift is None:
            return 1.0 / self.N
        return float(self.zero_mode_shift)

    @property
    def mass_shifted(self) -> bool:
        return self.m == 0


def momentum_labels(spec: LatticeSpec) -> np.ndarray:
    """Integer labels k in Z_N^d for every flat mode index, shape (M, d)."""
    grids = np.indices((spec.N,) * spec.d).reshape(spec.d, -1)
    return grids.T.copy()


def mode_frequencies(spec: LatticeSpec) -> np.ndarray:
    """omega_k for every flat mode index, from the closed-form dispersion.

    Never builds an M x M matrix, so it is usable at very large N (d=1).
    """
    if spec.drop_lattice_term:
        return np.full(spec.M, spec.m_eff)
    k = np.arange(spec.N)
    k = np.minimum(k, spec.N - k)  # folded so omega_k == omega_{-k} bit for bit
    s = 4.0 * np.sin(k * np.pi / spec.N) ** 2
    w2 = np.full((spec.N,) * spec.d, spec.m_eff**2)
    for axis in range(spec.d):
        shape = [1] * spec.d
        shape[axis] = spec.N
        w2 = w2 + s.reshape(shape)
    return np.sqrt(w2.ravel())


def build_coupling_matrix(spec: LatticeSpec) -> np.ndarray:
    """Real symmetric V with H0 = P.P/2 + Q.V.Q/2 (periodic boundaries)."""
    M = spec.M
    V = spec.m_eff**2 * np.eye(M)
    if spec.drop_lattice_term:
        return V
    idx = np.arange(M).reshape((spec.N,) * spec.d)
    for axis in range(spec.d):
        nbr = np.roll(idx, -1, axis=axis).ravel()
        # sum over bonds (Q_n - Q_{n+e})^2 ; for N=2 each pair appears twice
        for a, b in zip(idx.ravel(), nbr):
            V[a, a] += 1.0
            V[b, b] += 1.0
            V[a, b] -= 1.0
            V[b, a] -= 1.0
    return V


@dataclass(frozen=True)
class DispersionData:
    spec: LatticeSpec
    omegas: np.ndarray
    plane_wave_basis: np.ndarray
    real_basis: np.ndarray
    partners: np.ndarray

    @property
    def M(self) -> int:
        return self.spec.M

    @cached_property
    def pairs(self) -> list[tuple[int, int]]:
        """(cos-row, sin-row) index pairs, cos-row < sin-row."""
        return [(f, int(g)) for f, g in enumerate(self.partners) if f < g]

    @cached_property
    def unpaired(self) -> list[int]:
        """Self-conjugate momenta (k = -k mod N), each with a single cos row."""
        return [f for f, g in enumerate(self.partners) if f == g]


def _partners(spec: LatticeSpec) -> np.ndarray:
    k = momentum_labels(spec)
    neg = (-k) % spec.N
    return np.ravel_multi_index(neg.T, (spec.N,) * spec.d)


def dispersion(spec: LatticeSpec) -> DispersionData:
    """Normal-mode frequencies and bases, ordered by flat momentum index.

    ``plane_wave_basis[n, k] = N**(-d/2) exp(2 pi i k.n / N)`` (columns are
    eigenvectors of V).  ``real_basis`` is orthogonal with *rows* indexed by
    mode: row k = uniform/alternating cos row for self-conjugate k; for a
    pair k < -k, row k is the sqrt(2/M) cos row and row -k the sin row.
    """
    M = spec.M
    labels = momentum_labels(spec)
    phase = 2.0 * np.pi / spec.N * (labels @ labels.T)  # [n, k] symmetric
    e = np.exp(1j * phase) / np.sqrt(M)

    partners = _partners(spec)
    O = np.zeros((M, M))
    for f, g in enumerate(partners):
        if f == g:
            O[f] = np.cos(phase[:, f]) / np.sqrt(M)
        elif f < g:
            O[f] = np.sqrt(2.0 / M) * np.cos(phase[:, f])
            O[g] = np.sqrt(2.0 / M) * np.sin(phase[:, f])
    # cos of exact multiples of pi/2 leaves ~1e-17 residue
    O[np.abs(O) < 1e-15] = 0.0
    return DispersionData(spec, mode_frequencies(spec), e, O, partners)


def basis_change(disp: DispersionData) -> np.ndarray:
    """Unitary C with ``e^dagger = C @ real_basis``.

    For a pair (f, g): row f is (1, -i)/sqrt2 on (f, g), row g is (1, +i)/sqrt2.
    """
    M = disp.M
    C = np.zeros((M, M), dtype=complex)
    for f in disp.unpaired:
        C[f, f] = 1.0
    for f, g in disp.pairs:
        C[f, f], C[f, g] = 1 / np.sqrt(2), -1j / np.sqrt(2)
        C[g, f], C[g, g] = 1 / np.sqrt(2), 1j / np.sqrt(2)
    return C


def free_green_function(spec: LatticeSpec, omega: float, V: np.ndarray | None = None) -> np.ndarray:
    """Frequency-space propagator i (V - omega^2)^-1."""
    w2 = mode_frequencies(spec) ** 2
    gap = np.min(np.abs(omega**2 - w2))
    if gap < POLE_TOLERANCE:
        raise PoleProximity(f"omega^2={omega**2!r} within {gap:.3g} of a pole")
    if V is None:
        V = build_coupling_matrix(spec)
    return 1j * np.linalg.inv(V - omega**2 * np.eye(spec.M))
