"""Coefficient of e_5 in U^3 e_1 and in e_125 at several truncation sizes."""

import argparse

from opfractal.operators import iterate_regression


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, nargs="+", default=[9, 10, 11])
    args = ap.parse_args()
    print("terms,coeff_e5_of_U3e1,coeff_e5_of_e125,difference")
    for m in args.m:
        r = iterate_regression(m)
        print(f"{r.terms},{r.coeff_e5_of_U3e1!r},{r.coeff_e5_of_e125!r},{r.coeff_e5_of_U3e1 - r.coeff_e5_of_e125!r}")


if __name__ == "__main__":
    main()
