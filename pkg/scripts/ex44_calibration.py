"""Dense-SVD convergence study for the lid family.

Prints n * ||A - A_n|| over a range of bilateral half-widths K and the
calibrated lower constant c used by the EX44 scenario (value at K_ref,
rounded down to two decimals).
"""

import argparse
import json
import math

from krylab.operators import EX44_CALIBRATION, build_example_operator, dense_norm


def study(ns, Ks):
    table = {}
    for n in ns:
        table[n] = [n * dense_norm(build_example_operator("EX44_diff", {"n": n, "K": K})) for K in Ks]
    return table


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", type=int, nargs="+", default=[2, 4, 8])
    ap.add_argument("--Ks", type=int, nargs="+", default=[16, 32, 64, 128, 256])
    ap.add_argument("--json", action="store_true")
    a = ap.parse_args(argv)
    table = study(a.ns, a.Ks)
    ref = EX44_CALIBRATION["K_ref"]
    c = None
    if ref in a.Ks:
        j = a.Ks.index(ref)
        c = math.floor(100 * min(row[j] for row in table.values())) / 100
    if a.json:
        print(json.dumps({"Ks": a.Ks, "n_sigma": {str(n): v for n, v in table.items()}, "c": c}, indent=2))
        return
    print("n  " + " ".join(f"K={K:<6d}" for K in a.Ks))
    for n, row in table.items():
        print(f"{n:<2d} " + " ".join(f"{v:.6f}" for v in row))
    print(f"calibrated c = {c}  (registry value {EX44_CALIBRATION['c']})")


if __name__ == "__main__":
    main()
