"""Cesaro atom estimates m_v({1}) for basis vectors, with leakage, for several K."""

import argparse

from opfractal.basis import gamma_set
from opfractal.operators import TruncationError
from opfractal.spectral import atom_at_one, herglotz_defect, moments, named_vector


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=10)
    ap.add_argument("--K", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--vectors", nargs="+", default=["e0", "e1", "e4", "e5", "e0+e1"])
    args = ap.parse_args()
    S = gamma_set(args.m)
    print("vector,K,atom_at_1,herglotz_defect,leakage_budget,status")
    for name in args.vectors:
        v = named_vector(name, S)
        for K in args.K:
            try:
                ms = moments(v, K, S)
                status = "ok"
            except TruncationError:
                ms = moments(v, K, S, max_leakage=None)
                status = "over_budget"
            print(f"{name},{K},{atom_at_one(ms):.6f},{herglotz_defect(ms):.6f},{ms.leakage_budget:.6f},{status}")


if __name__ == "__main__":
    main()
