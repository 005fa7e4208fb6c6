"""Mean data- and pilot-induced ICI power on the pilots, UW-OFDM against CP-OFDM."""
import argparse
from pathlib import Path

from uwofdm_lab.cli import parse_eps_grid
from uwofdm_lab.harness import designed_generators, format_csv, paired_scenarios, run_ici_sweep
from uwofdm_lab.sysmodel import SystemConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--realizations", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--eps-grid", type=parse_eps_grid, default=parse_eps_grid("0:0.1:0.01"))
    ap.add_argument("--init", choices=("perm", "random"), default="perm")
    ap.add_argument("--out", default="results/ici_power.csv")
    args = ap.parse_args()

    cfg = SystemConfig()
    uw_sc, cp_sc = paired_scenarios("zero", cfg=cfg, gens=designed_generators(cfg, args.init),
                                    n_realizations=args.realizations, seed=args.seed, eps_grid=args.eps_grid)
    uw, cp = run_ici_sweep(uw_sc), run_ici_sweep(cp_sc)
    rows = []
    for u, c in zip(uw, cp):
        print(f"eps={u.eps:.2f}  data UW {u.sigma2_d_ici:.3e} CP {c.sigma2_d_ici:.3e}   "
              f"pilot UW {u.sigma2_p_ici:.3e} CP {c.sigma2_p_ici:.3e}")
        rows += [("uw-ofdm", u.eps, u.sigma2_d_ici, u.sigma2_p_ici, u.n_used),
                 ("cp-ofdm", c.eps, c.sigma2_d_ici, c.sigma2_p_ici, c.n_used)]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(format_csv(["mode", "eps", "sigma2_d_ici", "sigma2_p_ici", "n_used"], rows, args.seed))


if __name__ == "__main__":
    main()
