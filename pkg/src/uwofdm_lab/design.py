"""Numerical design of the data generator and of the pilot symbols."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .genmat import (
    GeneratorSet,
    ZeroWordInfeasible,
    _tail_operator,
    build_G_p,
    compute_T,
    pilot_energy,
    scale_G_d,
)
from .sysmodel import UW_OFDM, CarrierMaps, SystemConfig

log = logging.getLogger(__name__)

MAX_PILOT_COMBINATIONS = 10**7
_TIE_TOL = 1e-9


@dataclass(frozen=True)
class DescentOptions:
    """Steepest-descent settings.

    ``gradient`` selects the analytic gradient or central differences with
    per-entry step ``fd_step * max(1, |a_ij|)``. The search stops when the
    relative cost decrease stays below ``tol_rel`` for ``patience``
    consecutive iterations, or after ``max_iters`` iterations.
    """

    max_iters: int = 5000
    tol_rel: float = 1e-8
    step_init: float = 1.0
    backtrack_factor: float = 0.5
    seed: int = 0
    gradient: str = "analytic"
    fd_step: float = 1e-6
    patience: int = 5
    armijo: float = 1e-4

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.tol_rel < 1:
            raise ValueError("tol_rel must lie in (0, 1)")
        if self.step_init <= 0:
            raise ValueError("step_init must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.gradient not in ("analytic", "numeric"):
            raise ValueError(f"unknown gradient mode {self.gradient!r}")


@dataclass(frozen=True)
class PilotSearchResult:
    p: np.ndarray = field(repr=False)
    exponents: tuple
    energy: float
    cardinality: int


def _noise_ratio(cfg: SystemConfig) -> tuple[float, float]:
    """Return ``(N sigma_n^2, N sigma_n^2 / sigma_d^2)`` at the design SNR."""
    ratio = 1.0 / cfg.snr_design
    return cfg.sigma_d2 * ratio, ratio


def _unscaled_parts(A_d, maps, cfg):
    T = compute_T(A_d, maps, cfg)
    E = np.vstack([np.eye(cfg.n_data), T])
    return T, E, A_d @ E


def cost_Jd(A_d: np.ndarray, maps: CarrierMaps, cfg: SystemConfig) -> float:
    """Sum of LMMSE error variances for ``G_d(A_d)`` on an AWGN channel.

    ``G_d`` is energy-normalised to ``trace(G_d^H G_d) = alpha N_d`` first, so
    the cost is invariant to scaling of ``A_d``.
    """
    _, _, G0 = _unscaled_parts(np.asarray(A_d), maps, cfg)
    S = G0.conj().T @ G0
    c = cfg.alpha * cfg.n_data / np.trace(S).real
    nv, ratio = _noise_ratio(cfg)
    C = c * S + ratio * np.eye(cfg.n_data)
    return float(nv * np.trace(np.linalg.inv(C)).real)


def grad_Jd(A_d: np.ndarray, maps: CarrierMaps, cfg: SystemConfig) -> np.ndarray:
    """Analytic gradient of :func:`cost_Jd` with respect to the entries of ``A_d``.

    For complex ``A_d`` the result is ``dJ/dRe + 1j * dJ/dIm``.
    """
    A_d = np.asarray(A_d)
    nd = cfg.n_data
    K2 = _tail_operator(maps, cfg)[cfg.n_fft - cfg.n_uw:]
    C2 = K2 @ A_d[:, nd:]
    _, E, G0 = _unscaled_parts(A_d, maps, cfg)
    S = G0.conj().T @ G0
    tr_s = np.trace(S).real
    c = cfg.alpha * nd / tr_s
    nv, ratio = _noise_ratio(cfg)
    R = np.linalg.inv(c * S + ratio * np.eye(nd))
    W = R @ R
    phi = -nv * c * (W - (np.trace(W @ S).real / tr_s) * np.eye(nd))
    # d G0 = (I - A_2 C2^-1 K2) dA E
    P = np.eye(A_d.shape[0]) - A_d[:, nd:] @ np.linalg.solve(C2, K2)
    X = E @ phi @ G0.conj().T @ P
    g = 2 * X.T
    return g.real if np.isrealobj(A_d) else g.real - 1j * g.imag


def numeric_grad_Jd(A_d: np.ndarray, maps: CarrierMaps, cfg: SystemConfig, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of :func:`cost_Jd` (real entries only)."""
    A_d = np.array(A_d, dtype=float)
    g = np.empty_like(A_d)
    for idx in np.ndindex(A_d.shape):
        h = step * max(1.0, abs(A_d[idx]))
        orig = A_d[idx]
        A_d[idx] = orig + h
        up = cost_Jd(A_d, maps, cfg)
        A_d[idx] = orig - h
        down = cost_Jd(A_d, maps, cfg)
        A_d[idx] = orig
        g[idx] = (up - down) / (2 * h)
    return g


def permutation_init(cfg: SystemConfig, maps: CarrierMaps) -> np.ndarray:
    """Permutation ``A_0`` that routes the redundancy rows of ``[I; T_d]`` onto ``I_r``.

    Data rows go to the remaining non-pilot carriers in ascending order.
    """
    if len(set(cfg.red_idx)) != cfg.n_red:
        raise ValueError(f"|I_r| = {len(set(cfg.red_idx))} but N_r = {cfg.n_red}")
    n_in = cfg.n_data + cfg.n_red
    red = maps.red_rel
    red_set = set(red.tolist())
    data = np.array([j for j in range(n_in) if j not in red_set], dtype=int)
    order = np.concatenate([data, red])
    P = np.zeros((n_in, n_in))
    P[order, np.arange(n_in)] = 1.0
    return P


def random_init(cfg: SystemConfig, seed: int) -> np.ndarray:
    n_in = cfg.n_data + cfg.n_red
    return np.random.default_rng(seed).standard_normal((n_in, n_in))


def _normalise(A_d, maps, cfg):
    _, _, G0 = _unscaled_parts(A_d, maps, cfg)
    energy = np.vdot(G0, G0).real
    return A_d * np.sqrt(cfg.alpha * cfg.n_data / energy)


def optimize_Ad(A0: np.ndarray, maps: CarrierMaps, cfg: SystemConfig, opts: DescentOptions | None = None):
    """Minimise :func:`cost_Jd` by steepest descent with backtracking.

    ``A_d`` is rescaled after every accepted step so that its generator has
    ``trace(G_d^H G_d) = alpha N_d``. Iterates that make ``M22`` singular
    are rejected like any failed line-search trial.

    Returns
    -------
    A_d : ndarray
    costs : list of float
        Cost after initialisation and after each accepted step; non-increasing.
    """
    opts = opts or DescentOptions()
    A = _normalise(np.array(A0, dtype=np.result_type(A0, float)), maps, cfg)
    J = cost_Jd(A, maps, cfg)
    if not np.isfinite(J):
        raise FloatingPointError(f"initial cost is not finite ({J})")
    gradient = grad_Jd if opts.gradient == "analytic" else (
        lambda a, m, c: numeric_grad_Jd(a, m, c, opts.fd_step)
    )
    costs = [J]
    step = opts.step_init
    quiet = 0
    for it in range(opts.max_iters):
        g = gradient(A, maps, cfg)
        gg = float(np.vdot(g, g).real)
        if not np.isfinite(gg):
            raise FloatingPointError(f"non-finite gradient at iteration {it}")
        if gg == 0.0:
            break
        while True:
            trial = A - step * g
            try:
                J_new = cost_Jd(trial, maps, cfg)
            except (ZeroWordInfeasible, np.linalg.LinAlgError):
                J_new = np.inf
            if np.isfinite(J_new) and J_new <= J - opts.armijo * step * gg:
                break
            step *= opts.backtrack_factor
            if step < 1e-16:
                log.info("line search exhausted after %d iterations", it)
                return A, costs
        A = _normalise(trial, maps, cfg)
        rel = (J - J_new) / J
        J = J_new
        costs.append(J)
        quiet = quiet + 1 if rel < opts.tol_rel else 0
        if quiet >= opts.patience:
            break
        step /= opts.backtrack_factor
    return A, costs


def _digits(idx: np.ndarray, base: int, width: int) -> np.ndarray:
    out = np.empty((idx.size, width), dtype=np.int64)
    rem = idx.copy()
    for i in range(width - 1, -1, -1):
        out[:, i] = rem % base
        rem //= base
    return out


def optimize_pilots(G_p: np.ndarray, cardinality: int, chunk: int = 1 << 18) -> PilotSearchResult:
    """Exhaustive search for the constant-modulus pilots of minimum energy.

    Pilot ``i`` is ``exp(2j pi k_i / cardinality)``. Among minimisers equal
    within 1e-9 the lexicographically smallest exponent tuple is returned.
    """
    if cardinality < 2:
        raise ValueError("cardinality must be at least 2")
    G_p = np.asarray(G_p)
    n_p = G_p.shape[1]
    total = cardinality ** n_p
    if total > MAX_PILOT_COMBINATIONS:
        raise ValueError(
            f"search space {cardinality}^{n_p} = {total} exceeds {MAX_PILOT_COMBINATIONS}"
        )
    Q = G_p.conj().T @ G_p
    energies = np.empty(total)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        P = np.exp(2j * np.pi * _digits(idx, cardinality, n_p) / cardinality)
        energies[start:start + idx.size] = np.einsum("ij,ij->i", P.conj(), P @ Q.T).real
    best = energies.min()
    first = int(np.flatnonzero(energies <= best + _TIE_TOL)[0])
    k = _digits(np.array([first]), cardinality, n_p)[0]
    p = np.exp(2j * np.pi * k / cardinality)
    return PilotSearchResult(p=p, exponents=tuple(int(v) for v in k),
                             energy=pilot_energy(G_p, p), cardinality=cardinality)


def design_generators(
    cfg: SystemConfig,
    maps: CarrierMaps,
    init: str = "perm",
    cardinality: int = 20,
    opts: DescentOptions | None = None,
) -> tuple[GeneratorSet, list[float]]:
    """Optimised data generator plus minimum-energy pilots for a UW-OFDM setup."""
    opts = opts or DescentOptions()
    if init == "perm":
        A0 = permutation_init(cfg, maps)
    elif init == "random":
        A0 = random_init(cfg, opts.seed)
    else:
        raise ValueError(f"unknown init {init!r}")
    A_d, costs = optimize_Ad(A0, maps, cfg, opts)
    _, _, G0 = _unscaled_parts(A_d, maps, cfg)
    G_d = scale_G_d(maps.B_p @ G0, cfg)
    G_p = build_G_p(maps, cfg)
    pilots = optimize_pilots(G_p, cardinality)
    gens = GeneratorSet(G_d=G_d, G_p=G_p, p=pilots.p, alpha=cfg.alpha, mode=UW_OFDM, A_d=A_d)
    return gens, costs
