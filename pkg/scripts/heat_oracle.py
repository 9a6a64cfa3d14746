"""Deterministic p = 2 run against the exact heat solution; prints errors and observed orders."""

import argparse

from anisolevy.estimates import heat_oracle_error, observed_order


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=127, help="interior points for the temporal study")
    ap.add_argument("--steps", type=int, nargs="+", default=[10, 20, 40, 80])
    ap.add_argument("--grids", type=int, nargs="+", default=[31, 63, 127])
    ap.add_argument("--fine-steps", type=int, default=1000, help="base step count for the spatial study")
    args = ap.parse_args()

    e_t = [heat_oracle_error(args.n, s) for s in args.steps]
    print("steps  error       order")
    for i, (s, e) in enumerate(zip(args.steps, e_t)):
        q = observed_order(e_t[i - 1 : i + 1])[0] if i else float("nan")
        print(f"{s:5d}  {e:.4e}  {q:.3f}")

    # Richardson in time so the spatial error is not masked by the time error
    e_x = [heat_oracle_error(n, args.fine_steps, richardson=True) for n in args.grids]
    print("\n    n  error       order")
    for i, (n, e) in enumerate(zip(args.grids, e_x)):
        q = observed_order(e_x[i - 1 : i + 1])[0] if i else float("nan")
        print(f"{n:5d}  {e:.4e}  {q:.3f}")


if __name__ == "__main__":
    main()
