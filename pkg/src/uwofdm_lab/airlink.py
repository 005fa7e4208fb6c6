"""Transmit assembly, multipath channel, CFO and the frequency-domain receive models."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .genmat import GeneratorSet
from .numerics import dft_matrix, idft_matrix
from .sysmodel import CarrierMaps, SystemConfig

UW_KINDS = ("zero", "cazac", "barker", "custom")
BARKER13 = np.array([1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1], dtype=float)
TAU_RMS_DEFAULT = 100e-9


# -- unique words ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UniqueWord:
    kind: str
    x_u: np.ndarray = field(repr=False)
    freq: np.ndarray = field(repr=False)  # F_N [0; x_u], length N

    def on_used(self, maps: CarrierMaps) -> np.ndarray:
        """``B^T x~_u``: the UW spectrum on the non-zero subcarriers."""
        return self.freq[maps.nonzero_idx]

    def on_zero(self, maps: CarrierMaps) -> np.ndarray:
        return self.freq[maps.zero_idx]

    @property
    def energy(self) -> float:
        return float(np.vdot(self.x_u, self.x_u).real)


def zadoff_chu(n: int) -> np.ndarray:
    """Root-1 Zadoff-Chu sequence, even-length convention ``exp(-j pi k^2 / n)``."""
    k = np.arange(n)
    if n % 2 == 0:
        return np.exp(-1j * np.pi * k * k / n)
    return np.exp(-1j * np.pi * k * (k + 1) / n)


def read_uw_file(path) -> np.ndarray:
    """Read one ``re,im`` sample per line; blank lines and ``#`` comments are skipped."""
    samples = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            re_, im_ = (float(v) for v in line.split(","))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: expected 're,im', got {line!r}") from exc
        samples.append(complex(re_, im_))
    return np.array(samples, dtype=complex)


def write_uw_file(path, x_u) -> None:
    lines = [f"{float(v.real)!r},{float(v.imag)!r}" for v in np.asarray(x_u, dtype=complex)]
    Path(path).write_text("\n".join(lines) + "\n")


def make_uw(kind: str, cfg: SystemConfig, energy: float | None = None, samples=None) -> UniqueWord:
    """Build a UW of length ``N_u`` and its frequency image.

    Non-zero kinds are scaled to total energy ``energy`` (default ``N_u``,
    i.e. unit average sample power). ``custom`` takes ``samples`` as an
    array or as a path to a ``re,im`` text file and keeps the given scale
    unless ``energy`` is passed explicitly.
    """
    n_u = cfg.n_uw
    if kind.startswith("custom:"):
        kind, samples = "custom", kind.split(":", 1)[1]
    if kind == "zero":
        x = np.zeros(n_u, dtype=complex)
    elif kind == "cazac":
        x = zadoff_chu(n_u)
    elif kind == "barker":
        x = np.zeros(n_u, dtype=complex)
        m = min(n_u, BARKER13.size)
        x[:m] = BARKER13[:m]
    elif kind == "custom":
        if samples is None:
            raise ValueError("custom UW needs samples or a file path")
        if isinstance(samples, (str, Path)):
            samples = read_uw_file(samples)
        x = np.asarray(samples, dtype=complex).ravel()
        if x.size != n_u:
            raise ValueError(f"custom UW has {x.size} samples, expected N_u = {n_u}")
    else:
        raise ValueError(f"unknown UW kind {kind!r}; choose from {UW_KINDS}")
    if kind != "zero" and (kind != "custom" or energy is not None):
        target = float(n_u if energy is None else energy)
        current = np.vdot(x, x).real
        if current > 0:
            x = x * np.sqrt(target / current)
    full = np.zeros(cfg.n_fft, dtype=complex)
    full[cfg.n_fft - n_u:] = x
    return UniqueWord(kind=kind, x_u=x, freq=dft_matrix(cfg.n_fft) @ full)


# -- channel ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Impulse response and its N-point frequency response."""

    taps: np.ndarray = field(repr=False)
    freq: np.ndarray = field(repr=False)

    def used(self, maps: CarrierMaps) -> np.ndarray:
        """Diagonal of H~ on the non-zero subcarriers."""
        return self.freq[maps.nonzero_idx]

    def zero(self, maps: CarrierMaps) -> np.ndarray:
        return self.freq[maps.zero_idx]

    def pilots(self, maps: CarrierMaps) -> np.ndarray:
        return self.freq[maps.nonzero_idx[maps.pilot_rel]]


def channel_from_taps(taps, cfg: SystemConfig) -> ChannelRealization:
    taps = np.asarray(taps, dtype=complex).ravel()
    if taps.size > cfg.n_uw:
        raise ValueError(f"channel has {taps.size} taps, guard only covers {cfg.n_uw}")
    return ChannelRealization(taps=taps, freq=np.fft.fft(taps, cfg.n_fft))


def flat_channel(cfg: SystemConfig) -> ChannelRealization:
    return channel_from_taps([1.0], cfg)


def exponential_pdp(cfg: SystemConfig, tau_rms: float = TAU_RMS_DEFAULT) -> np.ndarray:
    """Unnormalised tap powers ``exp(-m T_s / tau_rms)`` for ``m = 0..N_u-1``."""
    if tau_rms <= 0:
        raise ValueError("tau_rms must be positive")
    return np.exp(-np.arange(cfg.n_uw) * cfg.t_sample / tau_rms)


def draw_channel(rng: np.random.Generator, cfg: SystemConfig, tau_rms: float = TAU_RMS_DEFAULT,
                 normalize: bool = True) -> ChannelRealization:
    """Rayleigh taps with exponential power delay profile.

    Each realization is scaled to unit energy unless ``normalize`` is False,
    in which case the raw draw (whose expected powers follow the profile
    exactly) is returned.
    """
    pdp = exponential_pdp(cfg, tau_rms)
    taps = np.sqrt(pdp / 2) * (rng.standard_normal(pdp.size) + 1j * rng.standard_normal(pdp.size))
    if normalize:
        taps /= np.linalg.norm(taps)
    return channel_from_taps(taps, cfg)


# -- transmitter ----------------------------------------------------------------

def tx_spectrum(d, gens: GeneratorSet, uw: UniqueWord, maps: CarrierMaps) -> np.ndarray:
    """Full-band spectrum ``B G_d d + B G_p p + x~_u`` (rows are symbols for 2-D ``d``)."""
    d = np.asarray(d)
    used = d @ gens.G_d.T + gens.G_p @ gens.p
    return used @ maps.B.T + uw.freq


def assemble_tx_symbol(d, gens: GeneratorSet, uw: UniqueWord, maps: CarrierMaps, cfg: SystemConfig) -> np.ndarray:
    """Time-domain symbol(s) ``F^-1 (B G_d d + B G_p p + x~_u)``.

    ``d`` may be a vector (one symbol) or an ``L x N_d`` array (a burst).
    """
    d = np.asarray(d)
    if d.shape[-1] != gens.G_d.shape[1]:
        raise ValueError(f"data length {d.shape[-1]} does not match N_d = {gens.G_d.shape[1]}")
    return tx_spectrum(d, gens, uw, maps) @ idft_matrix(cfg.n_fft).T


# -- CFO ----------------------------------------------------------------------

def symbol_phase(eps: float, l: int, cfg: SystemConfig) -> float:
    """Phase accumulated before the first sample of symbol ``l``.

    UW-OFDM: a leading UW then back-to-back symbols of length N.
    CP-OFDM: symbols of length N + N_g, each preceded by its prefix.
    """
    if cfg.is_cp:
        start = (cfg.n_fft + cfg.n_uw) * l + cfg.n_uw
    else:
        start = cfg.n_fft * l + cfg.n_uw
    return 2 * np.pi * eps * start / cfg.n_fft


def cpe(eps: float, l: int, cfg: SystemConfig) -> float:
    """Common phase error ``psi_l + (2 pi / N) eps (N - 1) / 2``."""
    return symbol_phase(eps, l, cfg) + 2 * np.pi / cfg.n_fft * eps * (cfg.n_fft - 1) / 2


def cfo_time_matrix(eps: float, l: int, cfg: SystemConfig):
    """Diagonal of the time-domain CFO matrix for symbol ``l`` and its phase ``psi_l``."""
    if abs(eps) > 0.5:
        raise ValueError("|eps| must not exceed 0.5")
    if l < 0:
        raise ValueError("symbol index must be non-negative")
    psi = symbol_phase(eps, l, cfg)
    n = np.arange(cfg.n_fft)
    return np.exp(1j * psi) * np.exp(2j * np.pi * eps * n / cfg.n_fft), psi


@lru_cache(maxsize=256)
def _lambda_stat_cached(eps: float, n: int) -> np.ndarray:
    k = np.arange(n)
    diff = k[None, :] - k[:, None]  # m - k
    x = diff + eps
    integer = x == np.round(x)
    safe = np.where(integer, 1.0, x)
    kernel = np.sin(np.pi * safe) / (n * np.sin(np.pi * safe / n))
    # integer offsets: sum of roots of unity is N for x = 0 mod N, else 0
    kernel = np.where(integer, np.where(np.mod(x, n) == 0, 1.0, 0.0), kernel)
    out = kernel * np.exp(1j * np.pi * diff * (n - 1) / n)
    out.setflags(write=False)
    return out


def lambda_stat(eps: float, n: int) -> np.ndarray:
    """Closed-form static CFO matrix on all N subcarriers.

    Entry ``(k, m)`` is ``sin(pi(m+eps-k)) / (N sin(pi(m+eps-k)/N))``
    times ``exp(j pi (m-k)(N-1)/N)``.
    """
    return _lambda_stat_cached(float(eps), int(n))


def lambda_prime(eps: float, n: int) -> np.ndarray:
    """``exp(j (2 pi / N) eps (N-1)/2) * lambda_stat``: the DFT-conjugated CFO ramp."""
    return np.exp(1j * np.pi * eps * (n - 1) / n) * lambda_stat(eps, n)


@dataclass(frozen=True, eq=False)
class CfoState:
    eps: float
    l: int
    psi: float
    phi: float
    time_diag: np.ndarray = field(repr=False)
    full: np.ndarray = field(repr=False)        # exp(j psi) * Lambda'
    prime: np.ndarray = field(repr=False)       # Lambda'
    stat_full: np.ndarray = field(repr=False)   # Lambda'_stat
    used: np.ndarray = field(repr=False)        # non-zero rows x non-zero cols of `full`
    zn: np.ndarray = field(repr=False)          # non-zero rows x zero cols of `full`
    stat: np.ndarray = field(repr=False)        # non-zero block of Lambda'_stat


def cfo_freq_matrix(eps: float, l: int, cfg: SystemConfig, maps: CarrierMaps) -> CfoState:
    diag, psi = cfo_time_matrix(eps, l, cfg)
    stat_full = lambda_stat(eps, cfg.n_fft)
    prime = lambda_prime(eps, cfg.n_fft)
    full = np.exp(1j * psi) * prime
    nz, z = maps.nonzero_idx, maps.zero_idx
    return CfoState(
        eps=float(eps),
        l=int(l),
        psi=psi,
        phi=cpe(eps, l, cfg),
        time_diag=diag,
        full=full,
        prime=prime,
        stat_full=stat_full,
        used=full[np.ix_(nz, nz)],
        zn=full[np.ix_(nz, z)],
        stat=stat_full[np.ix_(nz, nz)],
    )


# -- receiver -------------------------------------------------------------------

def _as_burst(x):
    x = np.asarray(x)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def _noise(rng, shape, noise_var, n_fft):
    if noise_var <= 0:
        return 0.0
    if rng is None:
        raise ValueError("noise_var > 0 requires an rng")
    scale = np.sqrt(n_fft * noise_var / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def receive_exact(burst, channel: ChannelRealization, eps: float, cfg: SystemConfig, maps: CarrierMaps,
                  noise_var: float = 0.0, rng: np.random.Generator | None = None, first_symbol: int = 0):
    """Received spectra on the non-zero subcarriers, including zero-carrier leakage.

    ``burst`` holds time-domain symbols (one per row). Symbol ``i`` of the
    burst is treated as symbol ``first_symbol + i`` of the transmission. Noise
    is ``CN(0, N noise_var)`` per subcarrier.
    """
    x, single = _as_burst(burst)
    spectra = (x @ dft_matrix(cfg.n_fft).T) * channel.freq
    out = np.empty((x.shape[0], cfg.n_used), dtype=complex)
    for i, spec in enumerate(spectra):
        st = cfo_freq_matrix(eps, first_symbol + i, cfg, maps)
        out[i] = st.full[maps.nonzero_idx] @ spec
    out = out + _noise(rng, out.shape, noise_var, cfg.n_fft)
    return out[0] if single else out


def receive_approx(burst, channel: ChannelRealization, eps: float, cfg: SystemConfig, maps: CarrierMaps,
                   noise_var: float = 0.0, rng: np.random.Generator | None = None, first_symbol: int = 0):
    """As :func:`receive_exact` but without the leakage of UW energy sitting on zero subcarriers."""
    x, single = _as_burst(burst)
    spectra = (x @ dft_matrix(cfg.n_fft).T) * channel.freq
    used = spectra[:, maps.nonzero_idx]
    out = np.empty((x.shape[0], cfg.n_used), dtype=complex)
    for i, spec in enumerate(used):
        out[i] = cfo_freq_matrix(eps, first_symbol + i, cfg, maps).used @ spec
    out = out + _noise(rng, out.shape, noise_var, cfg.n_fft)
    return out[0] if single else out


def zero_leakage(uw: UniqueWord, channel: ChannelRealization, eps: float, l: int,
                 cfg: SystemConfig, maps: CarrierMaps) -> np.ndarray:
    """``Lambda_zn^(l) H_z x~_{u,z}``: the term dropped by the approximate model."""
    st = cfo_freq_matrix(eps, l, cfg, maps)
    return st.zn @ (channel.zero(maps) * uw.on_zero(maps))


def approx_error_powers(gens: GeneratorSet, uw: UniqueWord, channel: ChannelRealization, eps: float,
                        cfg: SystemConfig, maps: CarrierMaps, l: int = 0):
    """Per-subcarrier signal power of the approximate model and power of its error.

    Data is zero-mean with covariance ``sigma_d2 I``; the expectation is
    evaluated in closed form. Returns ``(sigma2_k, sigma2_delta)`` over the
    non-zero subcarriers. Both are independent of ``l``.
    """
    st = cfo_freq_matrix(eps, l, cfg, maps)
    H = channel.used(maps)
    LH = st.used * H[None, :]
    LHG = LH @ gens.G_d
    mean = LH @ (gens.G_p @ gens.p + uw.on_used(maps))
    sigma2_k = cfg.sigma_d2 * np.sum(np.abs(LHG) ** 2, axis=1) + np.abs(mean) ** 2
    delta = st.zn @ (channel.zero(maps) * uw.on_zero(maps))
    return sigma2_k, np.abs(delta) ** 2
