"""Massless self-energy constants C_2, C_3 and their resolution dependence,
plus the d=1 lattice sum against the continuum logarithm."""

import argparse

from cvqft.lattice import LatticeSpec
from cvqft.renorm import _c_d_at, sigma_continuum, sigma_discrete


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--resolutions", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--m", type=float, default=0.01)
    args = ap.parse_args()

    for d in (2, 3):
        for res in args.resolutions:
            print(f"C_{d}  resolution {res:4d}: {_c_d_at(d, res):.12f}")
    cont = sigma_continuum(args.m, 1.0)
    print(f"\nd=1, m={args.m}: continuum (1/8pi) log(64/m^2) = {cont:.10f}")
    for N in (10, 100, 1000, 10**4, 10**5, 10**6):
        s = sigma_discrete(LatticeSpec(N, args.m, 1.0))
        print(f"N={N:>8d}: lattice {s:.10f}  relative gap {abs(s - cont) / cont:.2e}")


if __name__ == "__main__":
    main()
