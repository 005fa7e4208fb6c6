import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uwofdm_lab.design import permutation_init, random_init
from uwofdm_lab.genmat import (
    GeneratorSet,
    ZeroWordInfeasible,
    archive_header,
    build_G_d,
    build_G_p,
    compute_T,
    load_generators,
    pilot_energy,
    save_generators,
    scale_G_d,
    zero_word_residual,
)
from uwofdm_lab.numerics import idft_matrix
from uwofdm_lab.sysmodel import SystemConfig, build_carrier_maps

PILOTLESS = SystemConfig(n_data=36, n_pilot=0, pilot_idx=())


def _cn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_compute_T_shape_identity():
    maps = build_carrier_maps(PILOTLESS)
    T, cond = compute_T(np.eye(52), maps, PILOTLESS, return_cond=True)
    assert T.shape == (16, 36)
    assert np.isfinite(cond)


def test_compute_T_zero_tail_pilotless(rng):
    maps = build_carrier_maps(PILOTLESS)
    A = random_init(PILOTLESS, 3)
    T = compute_T(A, maps, PILOTLESS)
    G = A @ np.vstack([np.eye(36), T])
    assert zero_word_residual(G, _cn(rng, 36), maps, PILOTLESS) < 1e-10


def test_compute_T_singular(maps, cfg):
    A = np.eye(48)
    A[:, 32:] = 0
    with pytest.raises(ZeroWordInfeasible, match="zero-word infeasible"):
        compute_T(A, maps, cfg)


def test_compute_T_shape_check(maps, cfg):
    with pytest.raises(ValueError):
        compute_T(np.eye(47), maps, cfg)


def test_G_d_structure(maps, cfg, rng):
    G = build_G_d(permutation_init(cfg, maps), maps, cfg)
    assert G.shape == (52, 32)
    full = maps.B @ G
    assert not full[list(cfg.pilot_idx)].any()
    for _ in range(100):
        assert zero_word_residual(G, _cn(rng, 32), maps, cfg) < 1e-10


def test_G_d_perm_largest_redundancy_on_I_r(maps, cfg):
    G = maps.B @ build_G_d(permutation_init(cfg, maps), maps, cfg)
    data_rows = [k for k in maps.nonzero_idx if k not in cfg.red_idx and k not in cfg.pilot_idx]
    # each data symbol sits on its own data carrier with unit weight
    block = G[data_rows]
    np.testing.assert_allclose(np.abs(block), np.eye(32), atol=1e-12)
    assert np.abs(G[list(cfg.red_idx)]).max() > 0


def test_G_p_structure(maps, cfg):
    G_p = build_G_p(maps, cfg)
    assert G_p.shape == (52, 4)
    np.testing.assert_allclose(G_p[maps.pilot_rel], np.eye(4), atol=1e-12)
    assert zero_word_residual(G_p, np.ones(4), maps, cfg) < 1e-10
    others = np.delete(np.abs(G_p), maps.pilot_rel, axis=0)
    assert others.max() < 0.5


def test_G_p_cp_mode(cp_maps, cp_cfg):
    G_p = build_G_p(cp_maps, cp_cfg)
    np.testing.assert_array_equal(G_p.conj().T @ G_p, np.eye(4))


def test_pilot_energy_examples(maps, cfg):
    G_p = build_G_p(maps, cfg)
    p = np.exp(2j * np.pi * np.array([17, 14, 3, 0]) / 20)
    assert abs(pilot_energy(G_p, p) - 5.1783) < 5e-4
    assert pilot_energy(G_p, np.zeros(4)) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 2 * np.pi), st.lists(st.floats(0, 2 * np.pi), min_size=4, max_size=4))
def test_pilot_energy_phase_invariant(theta, angles):
    cfg = SystemConfig()
    G_p = build_G_p(build_carrier_maps(cfg), cfg)
    p = np.exp(1j * np.array(angles))
    e = pilot_energy(G_p, p)
    assert e >= 0
    assert abs(pilot_energy(G_p, np.exp(1j * theta) * p) - e) < 1e-12


def test_scale_G_d(cfg, rng):
    G = scale_G_d(_cn(rng, 52, 32), cfg)
    assert abs(np.trace(G.conj().T @ G).real / 32 - 1.5) < 1e-12
    np.testing.assert_allclose(scale_G_d(G, cfg), G, atol=1e-12)
    with pytest.raises(ValueError):
        scale_G_d(np.zeros((52, 32)), cfg)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_zero_word_any_random_A(seed):
    cfg = SystemConfig()
    maps = build_carrier_maps(cfg)
    rng = np.random.default_rng(seed)
    try:
        G = build_G_d(random_init(cfg, seed), maps, cfg)
    except ZeroWordInfeasible:
        return
    x = idft_matrix(64) @ (maps.B @ (G @ _cn(rng, 32)))
    assert np.linalg.norm(x[-16:]) <= 1e-10 * np.linalg.norm(x)


def test_archive_roundtrip(tmp_path, gens_perm, cfg):
    path = tmp_path / "g.bin"
    save_generators(path, gens_perm, cfg)
    back = load_generators(path, cfg)
    np.testing.assert_array_equal(back.G_d, gens_perm.G_d)
    np.testing.assert_array_equal(back.G_p, gens_perm.G_p)
    np.testing.assert_array_equal(back.p, gens_perm.p)
    np.testing.assert_array_equal(back.A_d, gens_perm.A_d)
    assert back.alpha == gens_perm.alpha and back.mode == gens_perm.mode
    header = archive_header(path)
    assert header[0].startswith("UWOFDM-GENMAT")
    assert "array G_d 52 32" in header


def test_archive_layout(tmp_path, cfg):
    gens = GeneratorSet(G_d=np.full((52, 32), 1 + 2j), G_p=np.zeros((52, 4)), p=np.ones(4), alpha=1.5)
    path = tmp_path / "g.bin"
    save_generators(path, gens, cfg)
    blob = path.read_bytes()
    payload = blob[blob.index(b"\nEND\n") + 5:]
    first = np.frombuffer(payload[:16], dtype="<f8")
    np.testing.assert_array_equal(first, [1.0, 2.0])
    assert len(payload) == (52 * 32 + 52 * 4 + 4) * 16


def test_archive_wrong_config(tmp_path, gens_perm, cfg, cp_cfg):
    path = tmp_path / "g.bin"
    save_generators(path, gens_perm, cfg)
    with pytest.raises(ValueError, match="different configuration"):
        load_generators(path, cp_cfg)


def test_archive_truncated(tmp_path, gens_perm, cfg):
    path = tmp_path / "g.bin"
    save_generators(path, gens_perm, cfg)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ValueError):
        load_generators(path)


def test_archive_not_archive(tmp_path):
    path = tmp_path / "junk"
    path.write_bytes(b"hello")
    with pytest.raises(ValueError, match="not a generator archive"):
        load_generators(path)
