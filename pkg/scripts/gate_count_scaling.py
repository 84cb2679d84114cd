"""Gate counts of the synthesized ground-state circuit versus N (d=1, or d=2 with --d 2)."""

import argparse

import numpy as np

from cvqft.lattice import LatticeSpec, dispersion
from cvqft.synthesis import synthesis_residual, synthesize_ground_circuit


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--Ns", type=int, nargs="+", default=[4, 8, 16, 32, 64, 128])
    ap.add_argument("--d", type=int, default=1)
    ap.add_argument("--m", type=float, default=1.0)
    args = ap.parse_args()

    Ms, counts = [], []
    print(f"{'N':>5} {'M':>6} {'gates':>7} {'rot':>6} {'squeeze':>8} {'phase':>6} {'residual':>10}")
    for N in args.Ns:
        disp = dispersion(LatticeSpec(N, args.m, d=args.d))
        circ = synthesize_ground_circuit(disp)
        Ms.append(disp.M)
        counts.append(len(circ))
        print(f"{N:5d} {disp.M:6d} {len(circ):7d} {len(circ.stage('rot')):6d} {len(circ.stage('squeeze')):8d} "
              f"{len(circ.stage('phase')):6d} {synthesis_residual(disp, circ):10.2e}")
    slope = np.polyfit(np.log(Ms), np.log(counts), 1)[0]
    print(f"fitted exponent in M: {slope:.3f}")


if __name__ == "__main__":
    main()
