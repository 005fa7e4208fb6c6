"""Command-line entry point: ``uwofdm-lab <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .airlink import UW_KINDS, flat_channel, draw_channel, make_uw
from .design import DescentOptions, design_generators
from .genmat import archive_header, load_generators, save_generators, zero_word_residual
from .harness import (
    REFERENCE_CARDINALITIES,
    build_cp_reference,
    format_csv,
    paired_scenarios,
    realization_rng,
    run_approx_error,
    run_cpe_bmse,
    run_ici_sweep,
    run_pilot_table,
)
from .sysmodel import ConfigError, SystemConfig, build_carrier_maps, cp_config, load_config, validate_config

log = logging.getLogger("uwofdm_lab")


class CliError(Exception):
    """Precondition failure reported to the user without a traceback."""


def parse_eps_grid(text: str) -> tuple[float, ...]:
    """``a:b:step`` (inclusive of ``b``) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"expected a:b:step, got {text!r}")
        a, b, step = (float(v) for v in parts)
        if step <= 0 or b < a:
            raise argparse.ArgumentTypeError("eps grid needs step > 0 and b >= a")
        n = int(round((b - a) / step)) + 1
        return tuple(round(a + i * step, 12) for i in range(n))
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _uw_kind(text: str) -> str:
    if text.startswith("custom:") or text in UW_KINDS[:-1]:
        return text
    raise argparse.ArgumentTypeError(f"--uw must be one of zero, cazac, barker, custom:PATH (got {text!r})")


def _config(args) -> SystemConfig:
    if args.config is None:
        return SystemConfig()
    return load_config(args.config)


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _generators(args, cfg: SystemConfig):
    if getattr(args, "genmat", None):
        return load_generators(args.genmat, cfg)
    gens, _ = design_generators(cfg, build_carrier_maps(cfg), init=args.init,
                                opts=DescentOptions(seed=args.seed))
    return gens


# -- subcommands --------------------------------------------------------------

def cmd_validate(args) -> int:
    if args.config is None:
        cfg = SystemConfig()
    else:
        with open(args.config) as fh:
            cfg = SystemConfig.from_dict(json.load(fh))
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    _emit(json.dumps(cfg.to_dict(), indent=2) + "\n", args.out)
    return 0


def _design(args, cfg):
    opts = DescentOptions(seed=args.seed, max_iters=args.max_iters, gradient=args.gradient)
    gens, costs = design_generators(cfg, build_carrier_maps(cfg), init=args.init,
                                    cardinality=args.cardinality, opts=opts)
    log.info("J_d: %.6f -> %.6f after %d steps", costs[0], costs[-1], len(costs) - 1)
    return gens, costs


def cmd_optimize_gd(args) -> int:
    cfg = _config(args)
    if cfg.is_cp:
        raise CliError("optimize-gd needs a uw-ofdm configuration")
    gens, costs = _design(args, cfg)
    save_generators(args.out, gens, cfg)
    if args.trace:
        rows = [(i, c) for i, c in enumerate(costs)]
        Path(args.trace).write_text(format_csv(["iteration", "cost"], rows, args.seed))
    print(f"J_d {costs[0]:.6f} -> {costs[-1]:.6f} in {len(costs) - 1} steps; wrote {args.out}")
    return 0


def cmd_pilot_table(args) -> int:
    cfg = _config(args)
    rows = [(r.cardinality, r.energy, r.exponents) for r in run_pilot_table(cfg, args.cardinalities)]
    _emit(format_csv(["cardinality", "energy", "exponents"], rows, None), args.out)
    return 0


def _paired(args):
    cfg = _config(args)
    if cfg.is_cp:
        raise CliError("pass the uw-ofdm configuration; the CP-OFDM reference is derived from it")
    gens = _generators(args, cfg)
    return paired_scenarios(
        uw_kind=args.uw, cfg=cfg, gens=gens, n_realizations=args.realizations, seed=args.seed,
        eps_grid=args.eps_grid, workers=args.workers, noise_var=args.noise_var,
    )


def cmd_simulate_cpe(args) -> int:
    uw_sc, cp_sc = _paired(args)
    rows = []
    for sc in (uw_sc, cp_sc):
        rows += [(sc.mode, r.eps, r.bmse, r.n_used, r.sem) for r in run_cpe_bmse(sc)]
    _emit(format_csv(["mode", "eps", "bmse", "n_used", "sem"], rows, args.seed), args.out)
    return 0


def cmd_ici_sweep(args) -> int:
    uw_sc, cp_sc = _paired(args)
    rows = []
    for sc in (uw_sc, cp_sc):
        rows += [(sc.mode, r.eps, r.sigma2_d_ici, r.sigma2_p_ici, r.n_used) for r in run_ici_sweep(sc)]
    _emit(format_csv(["mode", "eps", "sigma2_d_ici", "sigma2_p_ici", "n_used"], rows, args.seed), args.out)
    return 0


def cmd_approx_error(args) -> int:
    cfg = _config(args)
    if not 0 <= args.eps < 0.5:
        raise CliError("--eps must lie in [0, 0.5)")
    gens = _generators(args, cfg)
    if args.channel == "flat":
        channel = flat_channel(cfg)
    else:
        channel = draw_channel(realization_rng(args.seed, 0, 0), cfg)
    uw = make_uw(args.uw, cfg)
    rows = [(r.subcarrier, r.sigma2_k, r.sigma2_delta, r.ratio_db)
            for r in run_approx_error(cfg, gens, [uw], args.eps, channel)]
    _emit(format_csv(["subcarrier", "sigma2_k", "sigma2_delta", "ratio_db"], rows, args.seed), args.out)
    return 0


def cmd_genmat_export(args) -> int:
    cfg = _config(args)
    if args.init == "cp":
        ccfg = cp_config(cfg)
        gens = build_cp_reference(ccfg)
        save_generators(args.out, gens, ccfg)
    else:
        gens, _ = _design(args, cfg)
        save_generators(args.out, gens, cfg)
    print(f"wrote {args.out}")
    return 0


def cmd_genmat_import(args) -> int:
    cfg = _config(args)
    header = archive_header(args.path)
    mode = next((line.split()[1] for line in header if line.startswith("mode ")), cfg.mode)
    if mode != cfg.mode:
        cfg = cp_config(cfg)
    gens = load_generators(args.path, cfg)
    maps = build_carrier_maps(cfg)
    rng = np.random.default_rng(args.seed)
    d = rng.standard_normal(gens.n_data) + 1j * rng.standard_normal(gens.n_data)
    summary = {
        "mode": gens.mode,
        "alpha": gens.alpha,
        "G_d": list(gens.G_d.shape),
        "G_p": list(gens.G_p.shape),
        "pilots": [[float(v.real), float(v.imag)] for v in gens.p],
        "trace_GdHGd": float(np.vdot(gens.G_d, gens.G_d).real),
        "pilot_energy": float(np.vdot(gens.G_p @ gens.p, gens.G_p @ gens.p).real),
        "zero_word_residual": zero_word_residual(gens.G_d, d, maps, cfg) if not cfg.is_cp else 0.0,
    }
    _emit(json.dumps(summary, indent=2) + "\n", args.out)
    return 0


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON system configuration (default: 64-carrier reference)")
    common.add_argument("--seed", type=int, default=0, metavar="S")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    design = argparse.ArgumentParser(add_help=False)
    design.add_argument("--init", choices=("perm", "random"), default="perm")
    design.add_argument("--max-iters", type=int, default=DescentOptions.max_iters)
    design.add_argument("--gradient", choices=("analytic", "numeric"), default="analytic")
    design.add_argument("--cardinality", type=int, default=20, help="pilot alphabet size")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--uw", type=_uw_kind, default="zero", help="zero | cazac | barker | custom:PATH")
    sim.add_argument("--genmat", metavar="PATH", help="generator archive (default: design one with --init)")
    sim.add_argument("--init", choices=("perm", "random"), default="perm")
    sim.add_argument("--realizations", type=int, default=1000, metavar="N")
    sim.add_argument("--eps-grid", type=parse_eps_grid, default=parse_eps_grid("0:0.1:0.02"), metavar="a:b:step")
    sim.add_argument("--noise-var", type=float, default=0.0)
    sim.add_argument("--workers", type=int, default=1)

    p = argparse.ArgumentParser(prog="uwofdm-lab", description=__doc__)
    p.add_argument("--version", action="version", version=f"uwofdm-lab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a configuration and echo it resolved")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("optimize-gd", parents=[common, design], help="design G_d and pilots, write an archive")
    s.add_argument("--trace", metavar="PATH", help="also write the cost per iteration as CSV")
    s.set_defaults(func=cmd_optimize_gd)

    s = sub.add_parser("pilot-table", parents=[common], help="minimum pilot energy per alphabet size")
    s.add_argument("--cardinalities", type=_int_list, default=REFERENCE_CARDINALITIES)
    s.set_defaults(func=cmd_pilot_table)

    s = sub.add_parser("simulate-cpe", parents=[common, sim], help="CPE BMSE sweep, UW-OFDM vs CP-OFDM")
    s.set_defaults(func=cmd_simulate_cpe)

    s = sub.add_parser("ici-sweep", parents=[common, sim], help="ICI power on the pilots, UW-OFDM vs CP-OFDM")
    s.set_defaults(func=cmd_ici_sweep)

    s = sub.add_parser("approx-error", parents=[common], help="error of the approximate receive model")
    s.add_argument("--uw", type=_uw_kind, default="cazac")
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--genmat", metavar="PATH")
    s.add_argument("--init", choices=("perm", "random"), default="perm")
    s.add_argument("--channel", choices=("flat", "random"), default="flat")
    s.set_defaults(func=cmd_approx_error)

    g = sub.add_parser("genmat", help="generator archive tools")
    gsub = g.add_subparsers(dest="genmat_command", required=True)
    e = gsub.add_parser("export", parents=[common], help="write generators to an archive")
    e.add_argument("--init", choices=("perm", "random", "cp"), default="perm")
    e.add_argument("--max-iters", type=int, default=DescentOptions.max_iters)
    e.add_argument("--gradient", choices=("analytic", "numeric"), default="analytic")
    e.add_argument("--cardinality", type=int, default=20)
    e.set_defaults(func=cmd_genmat_export)
    i = gsub.add_parser("import", parents=[common], help="load an archive, check it and print a summary")
    i.add_argument("path", metavar="ARCHIVE")
    i.set_defaults(func=cmd_genmat_import)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "func", None) in (cmd_optimize_gd, cmd_genmat_export) and not args.out:
        parser.error("--out is required")
    if hasattr(args, "realizations") and args.realizations < 1:
        parser.error("--realizations must be >= 1")
    try:
        return args.func(args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"uwofdm-lab: config error: {v}", file=sys.stderr)
        return 2
    except (CliError, ValueError, OSError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"uwofdm-lab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
