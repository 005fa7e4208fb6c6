"""Generator matrices that enforce the zero-word constraint.

``G_d = B_p A_d [I; T_d]`` maps data onto the non-pilot carriers and
``G_p = P_p [I; T_p]`` places the pilots and spreads the redundancy they need.
Both are chosen so that the last ``N_u`` samples of the IDFT output vanish.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import block_partition, idft_matrix, pseudo_inverse
from .sysmodel import CP_OFDM, UW_OFDM, CarrierMaps, SystemConfig

# M22 is declared singular above this condition number
_COND_LIMIT = 1e12


class ZeroWordInfeasible(np.linalg.LinAlgError):
    """The redundancy block M22 cannot be inverted for this A."""


@dataclass(eq=False)
class GeneratorSet:
    G_d: np.ndarray
    G_p: np.ndarray
    p: np.ndarray
    alpha: float
    mode: str = UW_OFDM
    A_d: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_data(self) -> int:
        return self.G_d.shape[1]


def _tail_operator(maps: CarrierMaps, cfg: SystemConfig) -> np.ndarray:
    """``F^-1 B B_p``: data-side columns into time samples."""
    return idft_matrix(cfg.n_fft) @ maps.B @ maps.B_p


def compute_T(A: np.ndarray, maps: CarrierMaps, cfg: SystemConfig, return_cond: bool = False):
    """Redundancy matrix ``T = -M22^-1 M21`` for the partition of ``F^-1 B B_p A``.

    With ``G = A [I; T]`` the tail of ``F^-1 B B_p G d`` is zero for any ``d``.

    Raises
    ------
    ZeroWordInfeasible
        If M22 is singular (``A`` has to be redrawn).
    """
    A = np.asarray(A)
    n_in = cfg.n_data + cfg.n_red
    if A.shape != (n_in, n_in):
        raise ValueError(f"A must be {n_in}x{n_in}, got {A.shape}")
    M = _tail_operator(maps, cfg) @ A
    _, _, M21, M22 = block_partition(M, cfg.n_fft - cfg.n_uw, cfg.n_data)
    cond = np.linalg.cond(M22)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise ZeroWordInfeasible(f"zero-word infeasible for this A (cond(M22) = {cond:.3g})")
    T = -np.linalg.solve(M22, M21)
    return (T, cond) if return_cond else T


def build_G_d(A_d: np.ndarray, maps: CarrierMaps, cfg: SystemConfig) -> np.ndarray:
    """Data generator ``B_p A_d [I; T_d]``, shape ``(N - N_z) x N_d``.

    In CP mode there is no redundancy and ``A_d`` is used as is.
    """
    A_d = np.asarray(A_d)
    if cfg.n_red == 0:
        return maps.B_p @ A_d
    T = compute_T(A_d, maps, cfg)
    return maps.B_p @ (A_d @ np.vstack([np.eye(cfg.n_data), T]))


def build_G_p(maps: CarrierMaps, cfg: SystemConfig) -> np.ndarray:
    """Pilot generator ``P_p [I; T_p]`` with the minimum-norm ``T_p = -M22^+ M21``."""
    n_p = cfg.n_pilot
    if cfg.mode == CP_OFDM:
        return maps.P_p[:, :n_p].astype(complex)
    M = idft_matrix(cfg.n_fft) @ maps.B @ maps.P_p
    _, _, M21, M22 = block_partition(M, cfg.n_fft - cfg.n_uw, n_p)
    T_p = -pseudo_inverse(M22) @ M21
    return maps.P_p @ np.vstack([np.eye(n_p), T_p])


def pilot_energy(G_p: np.ndarray, p: np.ndarray) -> float:
    """``N * E_p = p^H G_p^H G_p p``."""
    v = np.asarray(G_p) @ np.asarray(p)
    return float(np.real(np.vdot(v, v)))


def scale_G_d(G_d: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """Scale ``G_d`` so that ``trace(G_d^H G_d) = alpha * N_d``.

    For a generator with ``G_d^H G_d`` proportional to identity this is the
    exact ``G_d^H G_d = alpha I`` normalisation; otherwise it matches the
    mean data power per non-pilot carrier.
    """
    G_d = np.asarray(G_d)
    energy = float(np.real(np.vdot(G_d, G_d)))
    if energy == 0.0:
        raise ValueError("cannot scale an all-zero generator")
    return G_d * np.sqrt(cfg.alpha * G_d.shape[1] / energy)


def zero_word_residual(G: np.ndarray, v: np.ndarray, maps: CarrierMaps, cfg: SystemConfig) -> float:
    """Relative tail energy ``||tail|| / ||x||`` of ``F^-1 B G v``."""
    x = idft_matrix(cfg.n_fft) @ (maps.B @ (np.asarray(G) @ np.asarray(v)))
    total = np.linalg.norm(x)
    if total == 0.0:
        return 0.0
    return float(np.linalg.norm(x[cfg.n_fft - cfg.n_uw:]) / total)


# -- generator archive --------------------------------------------------------

_MAGIC = "UWOFDM-GENMAT 1"


def save_generators(path, gens: GeneratorSet, cfg: SystemConfig) -> None:
    """Write ``gens`` as a text header followed by interleaved ``<f8`` arrays."""
    arrays = [("G_d", gens.G_d), ("G_p", gens.G_p), ("p", np.asarray(gens.p).reshape(-1, 1))]
    if gens.A_d is not None:
        arrays.insert(0, ("A_d", np.asarray(gens.A_d)))
    lines = [
        _MAGIC,
        f"cfg_hash {cfg.digest()}",
        f"mode {gens.mode}",
        f"alpha {gens.alpha!r}",
    ]
    for name, a in arrays:
        lines.append(f"array {name} {a.shape[0]} {a.shape[1]}")
    lines.append("END")
    header = ("\n".join(lines) + "\n").encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        for _, a in arrays:
            c = np.ascontiguousarray(a, dtype=np.complex128)
            fh.write(c.view(np.float64).astype("<f8").tobytes())


def load_generators(path, cfg: SystemConfig | None = None) -> GeneratorSet:
    """Read an archive written by :func:`save_generators`.

    If ``cfg`` is given, the stored configuration hash must match.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    end = blob.find(b"\nEND\n")
    if not blob.startswith(_MAGIC.encode()) or end < 0:
        raise ValueError(f"{path}: not a generator archive")
    header = blob[:end].decode("ascii").splitlines()
    payload = memoryview(blob)[end + len(b"\nEND\n"):]
    meta, shapes = {}, []
    for line in header[1:]:
        key, *rest = line.split()
        if key == "array":
            shapes.append((rest[0], int(rest[1]), int(rest[2])))
        else:
            meta[key] = rest[0]
    if cfg is not None and meta.get("cfg_hash") != cfg.digest():
        raise ValueError(f"{path}: archive was built for a different configuration")
    out, offset = {}, 0
    for name, r, c in shapes:
        nbytes = r * c * 2 * 8
        if offset + nbytes > len(payload):
            raise ValueError(f"{path}: truncated array {name}")
        flat = np.frombuffer(payload[offset:offset + nbytes], dtype="<f8").astype(np.float64)
        out[name] = flat.view(np.complex128).reshape(r, c)
        offset += nbytes
    if offset != len(payload):
        raise ValueError(f"{path}: {len(payload) - offset} trailing bytes")
    A_d = out.get("A_d")
    if A_d is not None and not np.any(A_d.imag):
        A_d = A_d.real.copy()
    return GeneratorSet(
        G_d=out["G_d"],
        G_p=out["G_p"],
        p=out["p"].ravel(),
        alpha=float(meta["alpha"]),
        mode=meta.get("mode", UW_OFDM),
        A_d=A_d,
    )


def archive_header(path) -> list[str]:
    with open(path, "rb") as fh:
        blob = fh.read(4096)
    end = blob.find(b"\nEND\n")
    return blob[:end].decode("ascii").splitlines()


__all__ = [
    "GeneratorSet",
    "ZeroWordInfeasible",
    "archive_header",
    "build_G_d",
    "build_G_p",
    "compute_T",
    "load_generators",
    "pilot_energy",
    "save_generators",
    "scale_G_d",
    "zero_word_residual",
]
