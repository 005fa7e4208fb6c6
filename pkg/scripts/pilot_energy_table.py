"""Minimum pilot energy N*E_p for several pilot alphabet sizes."""
import argparse
import time
from pathlib import Path

from uwofdm_lab.harness import REFERENCE_CARDINALITIES, format_csv, run_pilot_table
from uwofdm_lab.sysmodel import SystemConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/pilot_energy.csv")
    args = ap.parse_args()

    t0 = time.perf_counter()
    rows = run_pilot_table(SystemConfig(), REFERENCE_CARDINALITIES)
    for r in rows:
        print(f"|A| = {r.cardinality:2d}  N*E_p = {r.energy:.4f}  k = {list(r.exponents)}")
    print(f"{time.perf_counter() - t0:.2f} s")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_csv(["cardinality", "energy", "exponents"],
                              [(r.cardinality, r.energy, r.exponents) for r in rows]))


if __name__ == "__main__":
    main()
