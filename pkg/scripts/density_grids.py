#!/usr/bin/env python3
"""Emit qutrit eigenvalue-density grids (superfidelity and Bures measures).

Writes one CSV per measure, suitable for external plotting of the simplex
heat maps, and reports the boundary-extrapolated integral of each grid as a
self-check (should be 1 to within a couple of percent at resolution >= 200).
"""
import argparse
import pathlib

from superfid import cli, density_grid_qutrit, grid_integral


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--resolution", type=int, default=400)
    parser.add_argument("--outdir", type=pathlib.Path, default=pathlib.Path("."))
    args = parser.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    for measure in ("g", "bures"):
        path = args.outdir / f"qutrit_density_{measure}_res{args.resolution}.csv"
        code = cli.main(["grid", "--measure", measure,
                         "--resolution", str(args.resolution), "--out", str(path)])
        assert code == 0
        total = grid_integral(density_grid_qutrit(args.resolution, measure))
        print(f"{measure:>6}: wrote {path} (grid integral = {total:.4f})")


if __name__ == "__main__":
    main()
