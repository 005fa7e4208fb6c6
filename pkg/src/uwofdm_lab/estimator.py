"""Receive-side estimation: LMMSE data estimate, pilot-based CPE and CFO."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .airlink import ChannelRealization, UniqueWord, lambda_stat
from .genmat import GeneratorSet
from .numerics import wrap_angle
from .sysmodel import CarrierMaps, SystemConfig

MIN_CHANNEL_GAIN = 1e-6
MIN_CORRELATION = 1e-12
FIT_EPS = 0.1


class SingularChannelError(ValueError):
    def __init__(self, subcarrier: int, gain: float):
        self.subcarrier = subcarrier
        self.gain = gain
        super().__init__(f"channel gain {gain:.3g} on subcarrier {subcarrier} is below {MIN_CHANNEL_GAIN}")


class UndefinedAngleError(ValueError):
    """The weighted pilot correlation vanished, so its angle is undefined."""


@dataclass(frozen=True)
class CpeResult:
    phi_hat: float
    phi_hathat: float
    m: float
    q: float
    eps_hat: float


def check_channel(H: np.ndarray, maps: CarrierMaps) -> None:
    """Raise :class:`SingularChannelError` for the weakest bin if it is too weak."""
    gains = np.abs(H)
    worst = int(np.argmin(gains))
    if gains[worst] <= MIN_CHANNEL_GAIN:
        raise SingularChannelError(int(maps.nonzero_idx[worst]), float(gains[worst]))


def lmmse_data_estimate(y, G: np.ndarray, H, noise_var: float, cfg: SystemConfig):
    """LMMSE estimate of ``d`` from ``y = H G d + v`` and its error covariance.

    ``y`` must already have the UW and pilot contributions removed. ``H`` is
    the channel diagonal on the non-zero subcarriers (a scalar 1 for AWGN).

    Returns
    -------
    d_hat : ndarray
    C_ee : ndarray
        ``N noise_var (G^H H^H H G + (N noise_var / sigma_d2) I)^-1``.

    Raises
    ------
    np.linalg.LinAlgError
        For a singular normal matrix, only possible at ``noise_var = 0``.
    """
    G = np.asarray(G)
    HG = np.broadcast_to(np.asarray(H), (G.shape[0],))[:, None] * G
    nv = cfg.n_fft * noise_var
    A = HG.conj().T @ HG + (nv / cfg.sigma_d2) * np.eye(G.shape[1])
    if noise_var == 0 and np.linalg.cond(A) > 1e12:
        raise np.linalg.LinAlgError("normal matrix is singular: H G is rank deficient")
    d_hat = np.linalg.solve(A, HG.conj().T @ np.asarray(y).T).T
    C_ee = nv * np.linalg.inv(A)
    return d_hat, C_ee


def extract_pilots(Y, H, maps: CarrierMaps) -> np.ndarray:
    """``E_p H^-1 Y``: equalised received values on the pilot subcarriers (I_p order)."""
    H = np.asarray(H)
    check_channel(H, maps)
    Y = np.asarray(Y)
    return Y[..., maps.pilot_rel] / H[maps.pilot_rel]


def estimate_cpe(p_hat, p, w=None) -> float:
    """``arg(p^H W p_hat)`` in ``[0, 2 pi)``."""
    p_hat = np.asarray(p_hat)
    p = np.asarray(p)
    w = np.ones(p.shape) if w is None else np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ValueError("pilot weights must be non-negative")
    corr = np.sum(np.conj(p) * w * p_hat)
    if abs(corr) < MIN_CORRELATION:
        raise UndefinedAngleError("pilot correlation is zero, CPE angle undefined")
    angle = float(np.angle(corr))
    if angle < 0:
        angle += 2 * np.pi
    # a tiny negative angle rounds up to exactly 2 pi
    return 0.0 if angle >= 2 * np.pi else angle


def channel_weights(H, maps: CarrierMaps) -> np.ndarray:
    """``|H_p|^2``, the default pilot weighting."""
    return np.abs(np.asarray(H)[maps.pilot_rel]) ** 2


def _lambda_h_rows(eps, H, cfg, maps):
    """Pilot rows of ``H^-1 Lambda_stat H`` restricted to the non-zero carriers."""
    nz = maps.nonzero_idx
    rows = lambda_stat(eps, cfg.n_fft)[np.ix_(nz[maps.pilot_rel], nz)]
    return rows * H[None, :] / H[maps.pilot_rel][:, None]


def pilot_term(gens: GeneratorSet, uw: UniqueWord, H, w, eps: float, cfg: SystemConfig,
               maps: CarrierMaps) -> complex:
    """Noise- and data-free correlation whose angle is the UW-OFDM pilot offset.

    ``sum_k w_k e_k^T H^-1 Lambda_stat H (g_k |p_k|^2 + B^T x~_u conj(p_k))``.
    """
    H = np.asarray(H)
    check_channel(H, maps)
    rows = _lambda_h_rows(eps, H, cfg, maps)
    p = np.asarray(gens.p)
    own = np.einsum("kj,jk->k", rows, gens.G_p) * np.abs(p) ** 2
    uw_part = (rows @ uw.on_used(maps)) * np.conj(p)
    return complex(np.sum(np.asarray(w) * (own + uw_part)))


def phi_pil(gens, uw, H, w, eps, cfg, maps) -> float:
    """Pilot-induced phase offset at ``eps`` in (-pi, pi]."""
    t = pilot_term(gens, uw, H, w, eps, cfg, maps)
    if abs(t) < MIN_CORRELATION:
        raise UndefinedAngleError("pilot term vanished")
    return float(np.angle(t))


def fit_phi_pil(gens: GeneratorSet, uw: UniqueWord, channel, w, cfg: SystemConfig, maps: CarrierMaps,
                eps_fit: float = FIT_EPS):
    """Affine model ``phi_pil = m eps + q`` from evaluations at 0 and ``eps_fit``.

    ``channel`` may be a :class:`ChannelRealization` or the channel diagonal
    on the non-zero carriers. Returns ``(m, q)`` with ``m`` in radians per
    unit CFO.
    """
    H = channel.used(maps) if isinstance(channel, ChannelRealization) else np.asarray(channel)
    q = phi_pil(gens, uw, H, w, 0.0, cfg, maps)
    at_fit = phi_pil(gens, uw, H, w, eps_fit, cfg, maps)
    m = wrap_angle(at_fit - q) / eps_fit
    return float(m), float(q)


def compensate_cpe(phi_hat, m, q, eps_hat):
    return phi_hat - m * eps_hat - q


def estimate_cfo_from_cpe(phi_hat: float, m: float, q: float, cfg: SystemConfig, l: int = 0) -> float:
    """CFO from one CPE estimate.

    ``phi_hat - q`` is reduced to (-pi, pi], so the accumulated phase of
    symbol ``l`` must stay within that range. This is the reason the
    estimate is normally taken from the first symbol.
    """
    n = cfg.n_fft
    n_pil = m * n / (2 * np.pi)
    if cfg.is_cp:
        offset = (n + cfg.n_uw) * l + cfg.n_uw
    else:
        offset = n * l + cfg.n_uw
    return float(wrap_angle(phi_hat - q) * n / (2 * np.pi * (offset + (n - 1) / 2 + n_pil)))


def estimate_cfo_from_delta(phi_hat_l, phi_hat_prev) -> float:
    """CFO from the CPE increment between consecutive symbols (UW-OFDM timing)."""
    return float(wrap_angle(phi_hat_l - phi_hat_prev) / (2 * np.pi))


def estimate_cpe_burst(Y, gens: GeneratorSet, uw: UniqueWord, channel: ChannelRealization,
                       cfg: SystemConfig, maps: CarrierMaps, weights: str = "channel",
                       l: int = 0, fit=None) -> CpeResult:
    """Full pilot-based chain on one received symbol.

    ``weights`` is ``"channel"`` for ``|H_p|^2`` or ``"identity"``. ``fit``
    may carry a precomputed ``(m, q)``.
    """
    H = channel.used(maps)
    w = channel_weights(H, maps) if weights == "channel" else np.ones(cfg.n_pilot)
    p_hat = extract_pilots(Y, H, maps)
    phi_hat = estimate_cpe(p_hat, gens.p, w)
    m, q = fit if fit is not None else fit_phi_pil(gens, uw, H, w, cfg, maps)
    eps_hat = estimate_cfo_from_cpe(phi_hat, m, q, cfg, l)
    return CpeResult(phi_hat=phi_hat, phi_hathat=compensate_cpe(phi_hat, m, q, eps_hat),
                     m=m, q=q, eps_hat=eps_hat)


def _lambda_h_stat(eps, H, cfg, maps):
    check_channel(H, maps)
    nz = maps.nonzero_idx
    stat = lambda_stat(eps, cfg.n_fft)[np.ix_(nz, nz)]
    return stat * H[None, :] / H[:, None]


def data_ici(G_d, H, eps, cfg, maps) -> np.ndarray:
    """Pilot rows of ``Lambda_h,stat G_d``: data-to-pilot ICI coefficients."""
    return _lambda_h_stat(eps, np.asarray(H), cfg, maps)[maps.pilot_rel] @ np.asarray(G_d)


def data_ici_power(G_d, H, eps: float, cfg: SystemConfig, maps: CarrierMaps) -> float:
    """Mean power of data-driven ICI on a pilot, averaged over the pilot positions."""
    coeff = data_ici(G_d, H, eps, cfg, maps)
    return float(cfg.sigma_d2 * np.mean(np.sum(np.abs(coeff) ** 2, axis=1)))


def pilot_ici(G_p, p, H, eps, cfg, maps) -> np.ndarray:
    """``e_k^T Lambda_h,stat sum_{m != k} g_m p_m`` for every pilot ``k``."""
    G_p = np.asarray(G_p)
    p = np.asarray(p)
    rows = _lambda_h_stat(eps, np.asarray(H), cfg, maps)[maps.pilot_rel]
    full = rows @ (G_p @ p)
    own = np.einsum("kj,jk->k", rows, G_p) * p
    return full - own


def pilot_ici_power(G_p, p, H, eps: float, cfg: SystemConfig, maps: CarrierMaps) -> float:
    """Mean power of the ICI a pilot receives from the other pilots."""
    return float(np.mean(np.abs(pilot_ici(G_p, p, H, eps, cfg, maps)) ** 2))
