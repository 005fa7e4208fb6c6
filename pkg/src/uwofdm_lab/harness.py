"""Monte-Carlo experiments comparing UW-OFDM and CP-OFDM pilot-based estimation."""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import __version__
from .airlink import (
    TAU_RMS_DEFAULT,
    ChannelRealization,
    UniqueWord,
    approx_error_powers,
    assemble_tx_symbol,
    cpe,
    draw_channel,
    flat_channel,
    make_uw,
    receive_exact,
)
from .design import DescentOptions, design_generators, optimize_pilots
from .estimator import (
    SingularChannelError,
    UndefinedAngleError,
    channel_weights,
    data_ici_power,
    estimate_cpe_burst,
    fit_phi_pil,
    pilot_ici_power,
)
from .genmat import GeneratorSet, build_G_p
from .numerics import wrap_angle
from .sysmodel import CP_OFDM, CarrierMaps, SystemConfig, build_carrier_maps, cp_config

log = logging.getLogger(__name__)

CSV_SCHEMA = 1
REFERENCE_CARDINALITIES = (2, 4, 6, 10, 20)
DEFAULT_EPS_GRID = (0.0, 0.02, 0.04, 0.06, 0.08, 0.1)

_CHANNEL_STREAM = 0
_DATA_STREAM = 1
_NOISE_STREAM = 2


@dataclass
class Scenario:
    """One Monte-Carlo experiment; the mode follows ``cfg.mode``."""

    cfg: SystemConfig
    gens: GeneratorSet
    uw: UniqueWord
    eps_grid: tuple = DEFAULT_EPS_GRID
    n_realizations: int = 1000
    noise_var: float = 0.0
    seed: int = 0
    tau_rms: float = TAU_RMS_DEFAULT
    weights: str = "channel"
    workers: int = 1

    def __post_init__(self):
        self.eps_grid = tuple(float(e) for e in self.eps_grid)
        if not self.eps_grid:
            raise ValueError("eps grid is empty")
        if any(not 0 <= e < 0.5 for e in self.eps_grid):
            raise ValueError("eps grid values must lie in [0, 0.5)")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if self.weights not in ("channel", "identity"):
            raise ValueError(f"unknown weighting {self.weights!r}")

    @property
    def mode(self) -> str:
        return self.cfg.mode


@dataclass(frozen=True)
class BmseRow:
    eps: float
    bmse: float
    n_used: int
    sem: float = field(default=float("nan"), compare=False)


@dataclass(frozen=True)
class IciRow:
    eps: float
    sigma2_d_ici: float
    sigma2_p_ici: float
    n_used: int


@dataclass(frozen=True)
class ApproxErrorRow:
    uw: str
    subcarrier: int
    sigma2_k: float
    sigma2_delta: float
    ratio_db: float


def realization_rng(seed: int, index: int, stream: int) -> np.random.Generator:
    """Independent generator for one (realization, purpose) pair.

    Streams are keyed by position, so results do not depend on how the
    realizations are split across workers.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index, stream)))


def qpsk(rng: np.random.Generator, n: int, sigma_d2: float = 1.0) -> np.ndarray:
    bits = rng.integers(0, 2, size=(2, n))
    return np.sqrt(sigma_d2 / 2) * ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1]))


# -- generator sets -----------------------------------------------------------

def build_cp_reference(cfg: SystemConfig, p=None, maps: CarrierMaps | None = None) -> GeneratorSet:
    """CP-OFDM inside the generator framework: ``G_d = B_p I``, ``G_p = P_p [I; 0]``.

    ``p`` defaults to the minimum-energy pilots of the matching UW-OFDM
    system so that both systems transmit the same pilot values.
    """
    if cfg.mode != CP_OFDM or cfg.n_red != 0:
        raise ValueError("build_cp_reference needs a cp-ofdm configuration (N_r = 0)")
    maps = maps or build_carrier_maps(cfg)
    if p is None:
        p = default_pilots(_uw_counterpart(cfg))
    G_d = maps.B_p.astype(complex)
    G_p = build_G_p(maps, cfg)
    return GeneratorSet(G_d=G_d, G_p=G_p, p=np.asarray(p, dtype=complex), alpha=1.0, mode=CP_OFDM,
                        A_d=np.eye(cfg.n_data))


def _uw_counterpart(cfg_cp: SystemConfig) -> SystemConfig:
    from .sysmodel import reference_config

    base = reference_config()
    if (cfg_cp.n_fft, cfg_cp.zero_idx, cfg_cp.pilot_idx) != (base.n_fft, base.zero_idx, base.pilot_idx):
        raise ValueError("no UW-OFDM counterpart known for this CP configuration; pass p explicitly")
    return base


@lru_cache(maxsize=8)
def default_pilots(cfg: SystemConfig, cardinality: int = 20) -> np.ndarray:
    """Minimum-energy pilots of ``cfg``'s pilot generator."""
    maps = build_carrier_maps(cfg)
    return optimize_pilots(build_G_p(maps, cfg), cardinality).p


@lru_cache(maxsize=8)
def designed_with_trace(cfg: SystemConfig, init: str = "perm", seed: int = 0, cardinality: int = 20):
    """Optimised UW-OFDM generators and their descent cost trace, memoised per process."""
    gens, costs = design_generators(cfg, build_carrier_maps(cfg), init=init, cardinality=cardinality,
                                    opts=DescentOptions(seed=seed))
    return gens, tuple(costs)


def designed_generators(cfg: SystemConfig, init: str = "perm", seed: int = 0, cardinality: int = 20) -> GeneratorSet:
    return designed_with_trace(cfg, init, seed, cardinality)[0]


# -- CPE BMSE -----------------------------------------------------------------

def _cpe_errors(sc: Scenario, maps: CarrierMaps, index: int):
    cfg = sc.cfg
    channel = draw_channel(realization_rng(sc.seed, index, _CHANNEL_STREAM), cfg, sc.tau_rms)
    data_rng = realization_rng(sc.seed, index, _DATA_STREAM)
    noise_rng = realization_rng(sc.seed, index, _NOISE_STREAM)
    H = channel.used(maps)
    w = channel_weights(H, maps) if sc.weights == "channel" else np.ones(cfg.n_pilot)
    fit = fit_phi_pil(sc.gens, sc.uw, H, w, cfg, maps)
    errors = np.empty(len(sc.eps_grid))
    for i, eps in enumerate(sc.eps_grid):
        d = qpsk(data_rng, sc.gens.n_data, cfg.sigma_d2)
        x = assemble_tx_symbol(d, sc.gens, sc.uw, maps, cfg)
        Y = receive_exact(x, channel, eps, cfg, maps, sc.noise_var, noise_rng)
        res = estimate_cpe_burst(Y, sc.gens, sc.uw, channel, cfg, maps, sc.weights, fit=fit)
        errors[i] = wrap_angle(res.phi_hathat - cpe(eps, 0, cfg)) ** 2
    return errors


def _cpe_chunk(sc: Scenario, indices):
    maps = build_carrier_maps(sc.cfg)
    out = []
    for idx in indices:
        try:
            out.append((idx, _cpe_errors(sc, maps, idx)))
        except (SingularChannelError, UndefinedAngleError) as exc:
            log.warning("realization %d skipped: %s", idx, exc)
            out.append((idx, None))
    return out


def _ici_chunk(sc: Scenario, indices):
    cfg = sc.cfg
    maps = build_carrier_maps(cfg)
    out = []
    for idx in indices:
        channel = draw_channel(realization_rng(sc.seed, idx, _CHANNEL_STREAM), cfg, sc.tau_rms)
        H = channel.used(maps)
        try:
            vals = np.array([
                (data_ici_power(sc.gens.G_d, H, e, cfg, maps), pilot_ici_power(sc.gens.G_p, sc.gens.p, H, e, cfg, maps))
                for e in sc.eps_grid
            ])
        except SingularChannelError as exc:
            log.warning("realization %d skipped: %s", idx, exc)
            vals = None
        out.append((idx, vals))
    return out


def _run_realizations(func, sc: Scenario):
    indices = list(range(sc.n_realizations))
    if sc.workers <= 1:
        results = func(sc, indices)
    else:
        size = math.ceil(len(indices) / sc.workers)
        chunks = [indices[i:i + size] for i in range(0, len(indices), size)]
        with ProcessPoolExecutor(max_workers=sc.workers) as pool:
            results = [r for part in pool.map(func, [sc] * len(chunks), chunks) for r in part]
    results.sort(key=lambda item: item[0])
    return [v for _, v in results if v is not None]


def run_cpe_bmse(sc: Scenario) -> list[BmseRow]:
    """BMSE of the compensated CPE of the first symbol, per CFO value.

    Each realization draws a channel, fits the pilot offset model for it and
    transmits one noiseless (unless ``noise_var > 0``) symbol per CFO value.
    """
    errors = _run_realizations(_cpe_chunk, sc)
    if not errors:
        raise RuntimeError("every realization failed")
    arr = np.vstack(errors)
    n = arr.shape[0]
    sem = arr.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full(arr.shape[1], np.nan)
    return [BmseRow(eps=e, bmse=float(arr[:, i].mean()), n_used=n, sem=float(sem[i]))
            for i, e in enumerate(sc.eps_grid)]


def run_ici_sweep(sc: Scenario) -> list[IciRow]:
    """Closed-form data and pilot ICI powers on the pilots, averaged over channels."""
    vals = _run_realizations(_ici_chunk, sc)
    if not vals:
        raise RuntimeError("every realization failed")
    arr = np.stack(vals)
    mean = arr.mean(axis=0)
    return [IciRow(eps=e, sigma2_d_ici=float(mean[i, 0]), sigma2_p_ici=float(mean[i, 1]), n_used=arr.shape[0])
            for i, e in enumerate(sc.eps_grid)]


def paired_scenarios(uw_kind: str = "zero", init: str = "perm", n_realizations: int = 1000, seed: int = 0,
                     eps_grid=DEFAULT_EPS_GRID, cfg: SystemConfig | None = None, gens: GeneratorSet | None = None,
                     uw: UniqueWord | None = None, **kw) -> tuple[Scenario, Scenario]:
    """UW-OFDM scenario and its CP-OFDM reference sharing pilots, seed and channels."""
    cfg = cfg or SystemConfig()
    gens = gens or designed_generators(cfg, init=init)
    uw = uw or make_uw(uw_kind, cfg)
    ccfg = cp_config(cfg)
    cp_gens = build_cp_reference(ccfg, gens.p)
    common = dict(eps_grid=eps_grid, n_realizations=n_realizations, seed=seed, **kw)
    return (Scenario(cfg=cfg, gens=gens, uw=uw, **common),
            Scenario(cfg=ccfg, gens=cp_gens, uw=make_uw("zero", ccfg), **common))


# -- tables -------------------------------------------------------------------

def run_pilot_table(cfg: SystemConfig, cardinalities=REFERENCE_CARDINALITIES):
    """Minimum pilot energy ``N E_p`` per alphabet size."""
    maps = build_carrier_maps(cfg)
    G_p = build_G_p(maps, cfg)
    return [optimize_pilots(G_p, int(c)) for c in cardinalities]


def run_approx_error(cfg: SystemConfig, gens: GeneratorSet, uws, eps: float,
                     channel: ChannelRealization | None = None) -> list[ApproxErrorRow]:
    """Signal-to-approximation-error ratio per non-zero subcarrier for each UW."""
    maps = build_carrier_maps(cfg)
    channel = channel or flat_channel(cfg)
    rows = []
    for uw in uws:
        if isinstance(uw, str):
            uw = make_uw(uw, cfg)
        s2, d2 = approx_error_powers(gens, uw, channel, eps, cfg, maps)
        with np.errstate(divide="ignore"):
            ratio = np.where(d2 > 0, 10 * np.log10(s2 / np.where(d2 > 0, d2, 1.0)), np.inf)
        rows += [ApproxErrorRow(uw.kind, int(k), float(a), float(b), float(r))
                 for k, a, b, r in zip(maps.nonzero_idx, s2, d2, ratio)]
    return rows


# -- CSV ------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, np.integer):
        return str(int(v))
    if isinstance(v, (tuple, list)):
        return " ".join(str(x) for x in v)
    return str(v)


def format_csv(header, rows, seed=None) -> str:
    """CSV text with a leading ``# uwofdm-lab v... schema=... seed=...`` comment."""
    buf = io.StringIO()
    buf.write(f"# uwofdm-lab v{__version__} schema={CSV_SCHEMA} seed={seed if seed is not None else '-'}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_csv(text: str):
    """Parse :func:`format_csv` output into ``(meta, header, rows)``."""
    lines = text.splitlines()
    meta = {}
    if lines and lines[0].startswith("#"):
        for tok in lines[0][1:].split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                meta[k] = v
        lines = lines[1:]
    reader = csv.reader(lines)
    header = next(reader)
    return meta, header, [r for r in reader]
