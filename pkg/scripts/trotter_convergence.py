"""Trotter error against the exact slice oracle as dt shrinks.

    python3 scripts/trotter_convergence.py --lam 0.1 --order 1 2
"""

import argparse

from cvqft import scattering as sc
from cvqft.lattice import LatticeSpec


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=2)
    ap.add_argument("--m", type=float, default=1.0)
    ap.add_argument("--lam", type=float, default=0.1)
    ap.add_argument("--cutoff", type=int, default=6)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--T1", type=float, default=0.5)
    ap.add_argument("--order", type=int, nargs="+", default=[1, 2])
    ap.add_argument("--dts", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025, 0.0125])
    ap.add_argument("--channel", default="0,0:1,1", help="in:out mode lists")
    args = ap.parse_args()

    ins, outs = ([int(k) for k in part.split(",") if k] for part in args.channel.split(":"))
    lat = LatticeSpec(args.N, args.m, args.lam)
    for order in args.order:
        print(f"# order {order}, channel {ins} -> {outs}")
        print(f"{'dt':>8} {'|A|':>12} {'error':>12} {'ratio':>7}")
        errs = []
        for dt in args.dts:
            spec = sc.make_spec(lat, args.T, args.T1, dt, ins, outs, cutoff=args.cutoff, trotter_order=order)
            a = sc.scattering_amplitude(spec).amplitude
            err = abs(a - sc.exact_amplitude_oracle(spec).amplitude)
            ratio = f"{errs[-1] / err:7.3f}" if errs else ""
            errs.append(err)
            print(f"{dt:8.4f} {abs(a):12.8f} {err:12.4e} {ratio}")
        print(f"fitted order {sc.convergence_order(args.dts, errs):.3f}\n")


if __name__ == "__main__":
    main()
