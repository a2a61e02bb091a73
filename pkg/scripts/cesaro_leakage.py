"""Cesaro residual of e_1 against forward leakage, without the refusal gate.

Shows how fast the orbit U^k e_1 leaves each truncation; a small residual that
comes with leakage near 1 reflects lost mass rather than convergence.
"""

import argparse

from opfractal.basis import gamma_set
from opfractal.spectral import cesaro_average, named_vector


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--f", default="e1")
    ap.add_argument("--m", type=int, nargs="+", default=[8, 10, 12])
    ap.add_argument("--N", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    args = ap.parse_args()
    print("m,N,residual_norm,leakage_budget")
    for m in args.m:
        S = gamma_set(m)
        f = named_vector(args.f, S)
        for N in args.N:
            r = cesaro_average(f, N, S, max_leakage=None)
            print(f"{m},{N},{r.residual_norm:.6f},{r.leakage_budget:.6f}")


if __name__ == "__main__":
    main()
