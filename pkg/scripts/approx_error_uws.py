"""Signal-to-approximation-error ratio per subcarrier for several unique words."""
import argparse
from pathlib import Path

import numpy as np

from uwofdm_lab.harness import designed_generators, format_csv, run_approx_error
from uwofdm_lab.sysmodel import SystemConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--uw", nargs="+", default=["cazac", "barker", "zero"],
                    help="zero, cazac, barker or custom:PATH")
    ap.add_argument("--out", default="results/approx_error.csv")
    args = ap.parse_args()

    cfg = SystemConfig()
    gens = designed_generators(cfg, "perm")
    rows = run_approx_error(cfg, gens, args.uw, args.eps)
    for kind in args.uw:
        mine = [r for r in rows if r.uw == kind or kind.startswith(r.uw)]
        worst = min(mine, key=lambda r: r.ratio_db)
        finite = [r.ratio_db for r in mine if np.isfinite(r.ratio_db)]
        median = f"{np.median(finite):.1f} dB" if finite else "inf"
        print(f"{kind:8s}: worst {worst.ratio_db:.2f} dB on subcarrier {worst.subcarrier}, median {median}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_csv(["uw", "subcarrier", "sigma2_k", "sigma2_delta", "ratio_db"],
                              [(r.uw, r.subcarrier, r.sigma2_k, r.sigma2_delta, r.ratio_db) for r in rows]))


if __name__ == "__main__":
    main()
