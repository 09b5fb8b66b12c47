import math

import numpy as np
import pytest
from scipy import stats as sst

from kcq.alpha_eta import (
    AlphaEtaConfig,
    alpha_eta_modulate,
    bob_ber_mc,
    bob_receive,
    eve_phase_attack,
    key_hiding_distance,
    modulate_stream,
    run_alpha_eta,
    semicircle_homodyne_ber,
)
from kcq.keystream import SymbolSelector, int_to_seed
from kcq.qumode import TruncationError, heterodyne_bpsk_exact, homodyne_bpsk_exact, qfunc


def test_modulation_example():
    cfg = AlphaEtaConfig(M=16, S=1.0)
    a = alpha_eta_modulate(1, SymbolSelector(3, 0), cfg)
    assert a.alpha == pytest.approx(np.exp(1j * (2 * np.pi * 3 / 16 + np.pi)))


def test_antipodal_bits():
    cfg = AlphaEtaConfig(M=8, S=2.5)
    for sel in (SymbolSelector(0, 0), SymbolSelector(2, 1)):
        a0 = alpha_eta_modulate(0, sel, cfg).alpha
        a1 = alpha_eta_modulate(1, sel, cfg).alpha
        assert a1 == pytest.approx(-a0)


def test_basis_range_checked():
    with pytest.raises(ValueError):
        alpha_eta_modulate(0, SymbolSelector(8, 0), AlphaEtaConfig(M=16, S=1.0))


def test_config_checks():
    with pytest.raises(ValueError):
        AlphaEtaConfig(M=16, S=-1)
    with pytest.raises(ValueError):
        AlphaEtaConfig(M=16, S=1, dsr="random")
    with pytest.raises(ValueError):
        AlphaEtaConfig(M=16, S=1, eta=0)


def test_full_circle_phase_uniform():
    cfg = AlphaEtaConfig(M=16, S=4.0, dsr="fullCircle")
    rng = np.random.default_rng(4)
    n = 100_000
    amps, _ = modulate_stream(rng.integers(0, 2, n), np.full(n, 3), np.zeros(n, int), cfg, rng)
    ph = np.mod(np.angle(amps), 2 * np.pi) / (2 * np.pi)
    assert sst.kstest(ph, "uniform").pvalue > 1e-3


def test_bob_homodyne_large_s_matches_analytic():
    # analytic check: the Monte Carlo rate is too small to measure at S=9
    assert homodyne_bpsk_exact(9) == pytest.approx(9.87e-10, rel=1e-3)
    cfg = AlphaEtaConfig(M=32, S=1.0, rng_seed=5)
    assert bob_ber_mc(cfg, 400_000).within(homodyne_bpsk_exact(1.0))


def test_bob_zero_photons_is_coin_flip():
    cfg = AlphaEtaConfig(M=16, S=0.0, rng_seed=6)
    assert bob_ber_mc(cfg, 100_000).within(0.5)


def test_semicircle_dsr_bob_ber():
    cfg = AlphaEtaConfig(M=16, S=4.0, dsr="semicircle", rng_seed=7)
    ref = semicircle_homodyne_ber(4.0)
    assert ref > homodyne_bpsk_exact(4.0)
    assert bob_ber_mc(cfg, 400_000).within(ref)


def test_semicircle_integral_by_hand():
    t = np.linspace(-np.pi / 2, np.pi / 2, 200_001)
    v = qfunc(2 * math.sqrt(2.0) * np.cos(t))
    assert semicircle_homodyne_ber(2.0) == pytest.approx(np.trapezoid(v, t) / np.pi, abs=1e-8)


def test_offset_rotation_raises_error():
    cfg = AlphaEtaConfig(M=16, S=4.0, rng_seed=8)
    est = bob_ber_mc(cfg, 200_000, fixed_offset=math.pi / 3)
    assert est.within(float(qfunc(2 * 2.0 * math.cos(math.pi / 3))))


def test_bob_receive_scalar():
    cfg = AlphaEtaConfig(M=16, S=100.0)
    sel = SymbolSelector(5, 1)
    rng = np.random.default_rng(0)
    for b in (0, 1):
        assert bob_receive(alpha_eta_modulate(b, sel, cfg), sel, "homodyne", cfg, rng) == b
    with pytest.raises(ValueError):
        bob_receive(1.0, sel, "psychic", cfg, rng)


def test_eve_true_and_wrong_key():
    cfg = AlphaEtaConfig(M=32, S=25.0, n=100_000, rng_seed=9)
    true_key = 0xACE1
    run = run_alpha_eta(cfg, trial_keys=[true_key, 0x1234, 0xBEEF])
    assert run.eve.ber_by_key[true_key].within(heterodyne_bpsk_exact(25.0))
    assert run.eve.ber_by_key[0x1234].within(0.5)
    assert run.eve.ber_by_key[0xBEEF].within(0.5)
    assert run.eve.best()[0] == true_key
    assert run.bob.value == 0.0


def test_eve_true_key_at_low_power():
    cfg = AlphaEtaConfig(M=32, S=1e-6, n=50_000, rng_seed=10)
    run = run_alpha_eta(cfg, trial_keys=[0xACE1])
    assert run.eve.ber_by_key[0xACE1].within(0.5)


def test_eve_never_beats_bob_without_key():
    cfg = AlphaEtaConfig(M=16, S=2.0, n=50_000, rng_seed=11)
    run = run_alpha_eta(cfg, trial_keys=[0x5555])
    e = run.eve.ber_by_key[0x5555]
    assert e.value >= run.bob.value


def test_phase_estimates_shape():
    cfg = AlphaEtaConfig(M=16, S=4.0, n=64)
    rng = np.random.default_rng(1)
    data = rng.integers(0, 2, 64)
    b, p = cfg.selectors()
    amps, _ = modulate_stream(data, b, p, cfg, rng)
    res = eve_phase_attack(amps, data, cfg, [0xACE1], rng)
    assert res.phase_estimates.shape == (64,)


def test_key_hiding_examples():
    none = AlphaEtaConfig(M=4, S=4.0)
    assert key_hiding_distance(none, 0, 1) > 0.1
    full = AlphaEtaConfig(M=16, S=4.0, dsr="fullCircle")
    semi = AlphaEtaConfig(M=16, S=4.0, dsr="discretized", dsr_count=720)
    for ka, kb in ((0, 1), (2, 7), (SymbolSelector(3, 0), SymbolSelector(3, 1))):
        assert key_hiding_distance(full, ka, kb) <= 1e-10
        assert key_hiding_distance(semi, ka, kb) <= 1e-3


def test_key_hiding_global_phase_invariant():
    cfg = AlphaEtaConfig(M=8, S=2.0)
    d0 = key_hiding_distance(cfg, 0, 3)
    assert key_hiding_distance(cfg, 0, 3, global_phase=1.1) == pytest.approx(d0, abs=1e-10)
    assert key_hiding_distance(cfg, 2, 2) == pytest.approx(0.0, abs=1e-12)


def test_key_hiding_cutoff_checked():
    with pytest.raises(TruncationError):
        key_hiding_distance(AlphaEtaConfig(M=4, S=4.0), 0, 1, cutoff=5)


def test_selectors_follow_seed():
    cfg = AlphaEtaConfig(M=16, S=1.0, n=20)
    b1, _ = cfg.selectors()
    b2, _ = cfg.selectors(int_to_seed(0xACE1, 16))
    assert np.array_equal(b1, b2)
