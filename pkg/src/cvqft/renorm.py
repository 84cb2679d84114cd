"""One-loop mass renormalization and the adiabatic coupling ramp."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BadInterval, DimensionUnsupported, QuadratureNotConverged, SpecError
from .lattice import LatticeSpec, mode_frequencies

C_D_TOLERANCE = 0.002


def sigma_discrete(spec: LatticeSpec) -> float:
    """Self-energy shift (lam/4) * mean_k 1/omega_k over the lattice modes.

    The mean (1/M normalization) makes d=1 coincide with (lam/4N) sum 1/omega.
    """
    if spec.lam == 0:
        return 0.0
    return float(spec.lam / 4.0 * np.mean(1.0 / mode_frequencies(spec)))


def sigma_continuum(m: float, lam: float, d: int = 1, resolution: int = 64) -> float:
    """Large-N self-energy: (lam/8pi) log(64/m^2) in d=1, C_d * lam in d=2,3."""
    if d == 1:
        if not m > 0:
            raise SpecError("d=1 continuum self-energy needs m > 0")
        return lam / (8 * math.pi) * math.log(64.0 / m**2)
    if d in (2, 3):
        return c_d_constant(d, resolution) * lam
    raise DimensionUnsupported(f"d={d}")


def bare_mass(spec: LatticeSpec) -> float:
    """m0^2 = m^2 - Sigma (to first order in lam)."""
    return spec.m_eff**2 - sigma_discrete(spec)


# ------------------------------------------------------------------ C_d


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)
_REFINE_DEPTH = 40


def _integrand(*ks):
    s = sum(4.0 * np.sin(0.5 * k) ** 2 for k in ks)
    return 1.0 / np.sqrt(s)


def _cell_rule(lo, h):
    """GL nodes/weights on the cube [lo, lo+h]^d (lo a length-d sequence)."""
    x = 0.5 * h * (_GL_NODES + 1.0)
    w = 0.5 * h * _GL_WEIGHTS
    grids = np.meshgrid(*[l + x for l in lo], indexing="ij")
    wts = np.ones_like(grids[0])
    for axis in range(len(lo)):
        shape = [1] * len(lo)
        shape[axis] = -1
        wts = wts * w.reshape(shape)
    return grids, wts


def _corner_integral(d: int, h: float) -> float:
    """Integral over [0,h]^d, which has the 1/|k| singularity at its corner.

    Geometric refinement: split into 2^d half-size cubes, integrate the
    2^d - 1 cubes away from the origin, recurse into the corner cube.  The
    last corner cube (size h 2^-depth) is excluded.
    """
    total = 0.0
    size = h
    offsets = [np.array(o) for o in np.ndindex(*(2,) * d) if any(o)]
    for _ in range(_REFINE_DEPTH):
        half = 0.5 * size
        for o in offsets:
            grids, wts = _cell_rule(o * half, half)
            total += float(np.sum(wts * _integrand(*grids)))
        size = half
    return total


def _orthant_integral(d: int, cells: int) -> float:
    """Integral over [0,pi]^d with ``cells`` cells per axis."""
    h = math.pi / cells
    x = 0.5 * h * (_GL_NODES + 1.0)
    w = 0.5 * h * _GL_WEIGHTS
    nodes = (np.arange(cells)[:, None] * h + x[None, :]).ravel()
    weights = np.tile(w, cells)
    if d == 2:
        full = float(weights @ _integrand(nodes[:, None], nodes[None, :]) @ weights)
    else:
        full = 0.0
        for i in range(nodes.size):  # slab by slab to bound memory
            slab = _integrand(nodes[i], nodes[:, None], nodes[None, :])
            full += weights[i] * float(weights @ slab @ weights)
    # swap the plain GL estimate on the origin cell for the refined one
    grids, wts = _cell_rule([0.0] * d, h)
    naive = float(np.sum(wts * _integrand(*grids)))
    return full - naive + _corner_integral(d, h)


@lru_cache(maxsize=16)
def _c_d_at(d: int, resolution: int) -> float:
    cells = max(resolution // 2, 1)
    # integrand is even in every k_i and 2pi periodic: [0,2pi]^d -> 2^d [0,pi]^d
    integral = 2**d * _orthant_integral(d, cells)
    return 0.25 * integral / (2 * math.pi) ** d


def c_d_constant(d: int, resolution: int = 64, tol: float = C_D_TOLERANCE) -> float:
    """Massless self-energy coefficient C_d = (1/4) <1/omega_k> over the Brillouin zone.

    ``resolution`` is cells per axis on [0, 2pi].  The estimate is accepted
    when doubling the resolution moves it by less than ``tol``.
    """
    if d not in (2, 3):
        raise DimensionUnsupported(f"C_d defined here for d=2,3, got {d}")
    if resolution < 64:
        raise SpecError("resolution must be >= 64 cells per axis")
    coarse = _c_d_at(d, resolution)
    fine = _c_d_at(d, 2 * resolution)
    if abs(fine - coarse) > tol:
        raise QuadratureNotConverged(f"C_{d}: {coarse:.6f} vs {fine:.6f}")
    return fine


# ------------------------------------------------------------ schedule


DM_SIGNS = {"appendix": -1.0, "section4": 1.0}


@dataclass(frozen=True)
class CouplingSchedule:
    """Piecewise-linear ramp of lam(t) on [-T, T] with plateau [-T1, T1].

    ``samples`` holds (t, lam(t), delta_m(t)) at the midpoint of each of the
    2T/dt Trotter slices.
    """

    T: float
    T1: float
    dt: float
    lambda_max: float
    m: float
    dm_sign: str = "appendix"
    samples: tuple = ()

    @property
    def steps(self) -> int:
        return len(self.samples)

    def coupling(self, t: float) -> float:
        a = abs(t)
        if a <= self.T1:
            return self.lambda_max
        if a >= self.T:
            return 0.0
        return self.lambda_max * (self.T - a) / (self.T - self.T1)

    def mass_counterterm(self, t: float) -> float:
        lam = self.coupling(t)
        if lam == 0:
            return 0.0
        return DM_SIGNS[self.dm_sign] * sigma_continuum(self.m, lam, 1)


def coupling_schedule(T: float, T1: float, dt: float, lambda_max: float, m: float,
                      dm_sign: str = "appendix") -> CouplingSchedule:
    if not (0 < T1 < T):
        raise BadInterval(f"need 0 < T1 < T, got T1={T1}, T={T}")
    if not dt > 0:
        raise BadInterval("dt must be positive")
    steps = round(2 * T / dt)
    if steps < 1 or abs(steps * dt - 2 * T) > 1e-9 * max(T, 1.0):
        raise BadInterval(f"dt={dt} does not divide 2T={2 * T}")
    if dm_sign not in DM_SIGNS:
        raise BadInterval(f"dm_sign must be one of {sorted(DM_SIGNS)}")
    if not m > 0:
        raise SpecError("schedule needs m > 0 for the counter-term")
    sched = CouplingSchedule(T, T1, dt, lambda_max, m, dm_sign)
    # t_j = -T + (j + 1/2) dt, written symmetrically so t_j == -t_{steps-1-j} exactly
    ts = [(2 * j + 1 - steps) * dt / 2 for j in range(steps)]
    samples = tuple((t, sched.coupling(t), sched.mass_counterterm(t)) for t in ts)
    return CouplingSchedule(T, T1, dt, lambda_max, m, dm_sign, samples)
