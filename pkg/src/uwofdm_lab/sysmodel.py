"""System parameters and the 0/1 subcarrier placement matrices.

Subcarrier indices are absolute (0..N-1) everywhere. Positions relative to
the ordering of non-zero subcarriers are derived on demand.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from functools import cached_property
from pathlib import Path

import numpy as np

UW_OFDM = "uw-ofdm"
CP_OFDM = "cp-ofdm"

REFERENCE_ZERO_IDX = (0,) + tuple(range(27, 38))
REFERENCE_PILOT_IDX = (7, 21, 43, 57)
REFERENCE_RED_IDX = (2, 5, 9, 13, 17, 20, 24, 26, 38, 40, 44, 47, 51, 54, 58, 62)


class ConfigError(ValueError):
    """Raised when a configuration violates one or more invariants."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class SystemConfig:
    """PHY parameters of one UW-OFDM or CP-OFDM setup.

    ``n_uw`` is the UW length, which equals the guard-interval length in
    CP mode. ``snr_design`` is the linear ratio ``sigma_d2 / (N sigma_n^2)``
    used when designing the data generator.
    """

    n_fft: int = 64
    n_data: int = 32
    n_red: int = 16
    n_pilot: int = 4
    n_zero: int = 12
    n_uw: int = 16
    zero_idx: tuple = REFERENCE_ZERO_IDX
    pilot_idx: tuple = REFERENCE_PILOT_IDX
    red_idx: tuple = REFERENCE_RED_IDX
    n_symbols: int = 8
    t_sample: float = 50e-9
    sigma_d2: float = 1.0
    snr_design: float = 10.0
    mode: str = UW_OFDM

    def __post_init__(self):
        # normalise index sets so that equality and hashing are value based
        for name in ("zero_idx", "pilot_idx", "red_idx"):
            object.__setattr__(self, name, tuple(int(i) for i in getattr(self, name)))

    @property
    def n_used(self) -> int:
        """Number of non-zero subcarriers, ``N - N_z``."""
        return self.n_fft - self.n_zero

    @property
    def n_data_cp(self) -> int:
        """Data subcarrier count of the matching CP-OFDM system."""
        return self.n_fft - self.n_zero - self.n_pilot

    @property
    def alpha(self) -> float:
        return self.n_data_cp / self.n_data

    @property
    def is_cp(self) -> bool:
        return self.mode == CP_OFDM

    def to_dict(self) -> dict:
        d = asdict(self)
        for name in ("zero_idx", "pilot_idx", "red_idx"):
            d[name] = list(d[name])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SystemConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError([f"unknown config field {k!r}" for k in sorted(unknown)])
        return cls(**d)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def reference_config(**overrides) -> SystemConfig:
    """The 64-carrier UW-OFDM reference setup."""
    return SystemConfig(**overrides)


def cp_config(base: SystemConfig | None = None) -> SystemConfig:
    """CP-OFDM counterpart of ``base``: no redundancy, all spare carriers carry data."""
    base = base or reference_config()
    return SystemConfig(
        n_fft=base.n_fft,
        n_data=base.n_fft - base.n_zero - base.n_pilot,
        n_red=0,
        n_pilot=base.n_pilot,
        n_zero=base.n_zero,
        n_uw=base.n_uw,
        zero_idx=base.zero_idx,
        pilot_idx=base.pilot_idx,
        red_idx=(),
        n_symbols=base.n_symbols,
        t_sample=base.t_sample,
        sigma_d2=base.sigma_d2,
        snr_design=base.snr_design,
        mode=CP_OFDM,
    )


def load_config(path) -> SystemConfig:
    with open(path) as fh:
        d = json.load(fh)
    cfg = SystemConfig.from_dict(d)
    violations = validate_config(cfg)
    if violations:
        raise ConfigError(violations)
    return cfg


def save_config(cfg: SystemConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def validate_config(cfg: SystemConfig) -> list[str]:
    """Return every violated invariant of ``cfg`` (empty list when valid)."""
    v = []
    if cfg.mode not in (UW_OFDM, CP_OFDM):
        v.append(f"unknown mode {cfg.mode!r}")
    n = cfg.n_fft
    if n < 1:
        v.append("N must be positive")
    if cfg.n_data < 1:
        v.append("N_d must be positive")
    if min(cfg.n_red, cfg.n_pilot, cfg.n_zero) < 0:
        v.append("carrier counts must be non-negative")
    if not 0 < cfg.n_uw < n:
        v.append("N_u must lie in (0, N)")
    if cfg.n_data + cfg.n_red + cfg.n_pilot + cfg.n_zero != n:
        v.append("N sum mismatch: N_d + N_r + N_p + N_z != N")
    if cfg.mode == UW_OFDM and cfg.n_red != cfg.n_uw:
        v.append("N_r must equal N_u in uw-ofdm mode")
    if cfg.mode == CP_OFDM and (cfg.n_red != 0 or cfg.red_idx):
        v.append("cp-ofdm mode requires N_r = 0 and empty I_r")

    sets = {"I_z": cfg.zero_idx, "I_p": cfg.pilot_idx, "I_r": cfg.red_idx}
    counts = {"I_z": cfg.n_zero, "I_p": cfg.n_pilot, "I_r": cfg.n_red}
    for name, idx in sets.items():
        if len(set(idx)) != len(idx):
            v.append(f"{name} has duplicate indices")
        if len(set(idx)) != counts[name]:
            v.append(f"|{name}| = {len(set(idx))} does not match count {counts[name]}")
        bad = [i for i in idx if not 0 <= i < n]
        if bad:
            v.append(f"{name} indices out of range [0, {n - 1}]: {bad}")
    names = list(sets)
    for a in range(len(names)):
        for b in range(a + 1, len(names)):
            common = set(sets[names[a]]) & set(sets[names[b]])
            if common:
                v.append(f"index overlap between {names[a]} and {names[b]}: {sorted(common)}")
    if list(cfg.pilot_idx) != sorted(cfg.pilot_idx):
        v.append("I_p must be in ascending order")
    if cfg.n_symbols < 1:
        v.append("L must be positive")
    if cfg.t_sample <= 0:
        v.append("T_s must be positive")
    if cfg.sigma_d2 <= 0:
        v.append("sigma_d2 must be positive")
    if cfg.snr_design <= 0:
        v.append("snr_design must be positive")
    return v


def require_valid(cfg: SystemConfig) -> None:
    violations = validate_config(cfg)
    if violations:
        raise ConfigError(violations)


@dataclass(frozen=True, eq=False)
class CarrierMaps:
    """Placement matrices for one configuration.

    B      : N x (N-N_z), inserts zero subcarriers
    B_p    : (N-N_z) x (N_d+N_r), inserts zero rows at the pilot positions
    P_p    : (N-N_z) x (N-N_z) permutation; its first N_p columns land on the
             pilots in I_p order, the rest on the remaining non-zero carriers
             in ascending order
    E_p    : N_p x (N-N_z), selects the pilot rows
    """

    cfg: SystemConfig
    nonzero_idx: np.ndarray = field(repr=False)
    pilot_rel: np.ndarray = field(repr=False)
    nonpilot_rel: np.ndarray = field(repr=False)

    @cached_property
    def B(self) -> np.ndarray:
        b = np.zeros((self.cfg.n_fft, self.cfg.n_used))
        b[self.nonzero_idx, np.arange(self.cfg.n_used)] = 1.0
        return b

    @cached_property
    def B_p(self) -> np.ndarray:
        b = np.zeros((self.cfg.n_used, self.nonpilot_rel.size))
        b[self.nonpilot_rel, np.arange(self.nonpilot_rel.size)] = 1.0
        return b

    @cached_property
    def P_p(self) -> np.ndarray:
        order = np.concatenate([self.pilot_rel, self.nonpilot_rel])
        p = np.zeros((self.cfg.n_used, self.cfg.n_used))
        p[order, np.arange(self.cfg.n_used)] = 1.0
        return p

    @cached_property
    def E_p(self) -> np.ndarray:
        e = np.zeros((self.cfg.n_pilot, self.cfg.n_used))
        e[np.arange(self.cfg.n_pilot), self.pilot_rel] = 1.0
        return e

    @cached_property
    def zero_idx(self) -> np.ndarray:
        return np.asarray(self.cfg.zero_idx, dtype=int)

    @cached_property
    def red_rel(self) -> np.ndarray:
        """Positions of I_r within the non-pilot non-zero ordering."""
        nonpilot_abs = self.nonzero_idx[self.nonpilot_rel]
        lookup = {int(k): j for j, k in enumerate(nonpilot_abs)}
        return np.array([lookup[k] for k in sorted(self.cfg.red_idx)], dtype=int)


def build_carrier_maps(cfg: SystemConfig) -> CarrierMaps:
    require_valid(cfg)
    zero = set(cfg.zero_idx)
    nonzero = np.array([k for k in range(cfg.n_fft) if k not in zero], dtype=int)
    rel = {int(k): j for j, k in enumerate(nonzero)}
    pilot_rel = np.array([rel[k] for k in cfg.pilot_idx], dtype=int)
    pilots = set(pilot_rel.tolist())
    nonpilot_rel = np.array([j for j in range(nonzero.size) if j not in pilots], dtype=int)
    return CarrierMaps(cfg, nonzero, pilot_rel, nonpilot_rel)
