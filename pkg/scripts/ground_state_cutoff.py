"""Ground-state occupation and single-particle energy error versus the Fock cutoff."""

import argparse

from cvqft.verify import ground_state_quality


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--m", type=float, nargs="+", default=[1.0, 2.0])
    ap.add_argument("--cutoffs", type=int, nargs="+", default=[6, 8, 10, 12, 14])
    args = ap.parse_args()

    print(f"{'N':>3} {'m':>4} {'D':>4} {'max <a+a>':>12} {'gap error':>12}")
    for N in args.N:
        for m in args.m:
            for D in args.cutoffs:
                if (D + 1) ** N > 3 * 10**5:
                    continue
                occ, gap = ground_state_quality(N, m, D)
                print(f"{N:3d} {m:4g} {D:4d} {occ:12.3e} {gap:12.3e}")


if __name__ == "__main__":
    main()
