import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kcq.keystream import LfsrSpec
from kcq.qk import (
    KEY_GUESS_CAP,
    QkConfig,
    TractabilityError,
    TrialRecord,
    attack_angle_sweep,
    best_eve_angle,
    bob_ber,
    default_config,
    eve_constant_individual_attack,
    eve_key_guess_attack,
    false_accept_rate,
    key_verify,
    run_qk_trial,
    run_qk_trials,
    seed_value,
    toeplitz_hash,
)
from kcq.qubit import QkConstellation
from kcq.report import trial_records_csv


def test_noiseless_bob_is_error_free():
    cfg = default_config(M=16, n=2000)
    recs = run_qk_trials(cfg, 20)
    assert all(r.bob_errors == 0 for r in recs)
    assert all(r.verify_verdict for r in recs)


def test_noisy_bob_ber_matches_half_lambda():
    cfg = default_config(M=8, n=100_000, channel_noise=0.1, rng_seed=3)
    est = bob_ber(cfg)
    assert est.count == 100_000
    assert est.within(0.05)


def test_trials_are_reproducible():
    cfg = default_config(n=300, channel_noise=0.2, rng_seed=11)
    assert run_qk_trial(cfg, 5) == run_qk_trial(cfg, 5)
    assert run_qk_trial(cfg, 5) != run_qk_trial(cfg, 6)


def test_parallel_matches_serial():
    cfg = default_config(n=200, channel_noise=0.05, rng_seed=2)
    assert run_qk_trials(cfg, 12, jobs=4) == run_qk_trials(cfg, 12, jobs=1)
    assert eve_key_guess_attack(cfg, 5000, jobs=3) == eve_key_guess_attack(cfg, 5000, jobs=1)


def test_polarity_hides_bits_from_constant_attack():
    cfg = default_config(M=8, n=50_000, polarity=True, rng_seed=4)
    for angle in (0.0, 0.4, math.pi / 2):
        assert eve_constant_individual_attack(cfg, angle).within(0.5)


def test_semicircle_m4_best_angle_reaches_helstrom():
    cfg = default_config(M=4, n=100_000, polarity=False, rng_seed=5)
    est = eve_constant_individual_attack(cfg, best_eve_angle(cfg))
    assert est.within(0.5 - math.sqrt(2) / 4)


def test_larger_constellation_hurts_eve():
    small = default_config(M=4, n=50_000, polarity=False, rng_seed=6)
    big = default_config(M=32, n=50_000, polarity=False, rng_seed=6)
    e4 = eve_constant_individual_attack(small, best_eve_angle(small))
    e32 = eve_constant_individual_attack(big, best_eve_angle(big))
    assert e32.value > e4.value + 3 * (e4.stderr + e32.stderr)


def test_angle_sweep_never_beats_helstrom():
    cfg = default_config(M=4, n=20_000, polarity=False, rng_seed=8)
    floor = 0.5 - math.sqrt(2) / 4
    for _, est in attack_angle_sweep(cfg, np.linspace(0, math.pi, 9)):
        assert est.value >= floor - 3 * est.stderr


def test_key_guess_rate_near_uniform():
    cfg = default_config(M=4, n=64, key_bits=8, rng_seed=9)
    est = eve_key_guess_attack(cfg, 200_000)
    # nonzero seeds only: 1/255, statistically indistinguishable from 2**-8 here
    assert est.within(1 / 255)
    assert est.within(2 ** -8)


def test_true_key_guess_always_succeeds():
    cfg = default_config(n=100, key=0xA5)
    assert eve_key_guess_attack(cfg, 1000, guess=0xA5).value == 1.0


def test_true_key_guess_with_noise():
    lam, n = 0.02, 50
    cfg = default_config(n=n, channel_noise=lam, rng_seed=12)
    est = eve_key_guess_attack(cfg, 100_000, guess=0xA5)
    assert est.within((1 - lam / 2) ** n)


def test_key_guess_cap():
    cfg = QkConfig(QkConstellation(4), LfsrSpec(KEY_GUESS_CAP + 1, {KEY_GUESS_CAP + 1, 2}),
                   "1" * (KEY_GUESS_CAP + 1), 10)
    with pytest.raises(TractabilityError):
        eve_key_guess_attack(cfg, 10)


def test_config_validation():
    with pytest.raises(ValueError):
        default_config(n=0)
    with pytest.raises(ValueError):
        default_config(channel_noise=1.5)
    with pytest.raises(ValueError):
        default_config(M=6)


def test_key_verify_examples():
    a = np.random.default_rng(0).integers(0, 2, 128)
    assert key_verify(a, a.copy(), [1, 0, 1, 1, 0, 0, 1, 0], 7)
    with pytest.raises(ValueError):
        key_verify(a, a[:-1], [1], 7)
    with pytest.raises(ValueError):
        key_verify(a, a, [], 7)


def test_one_bit_verifier_accepts_half():
    assert false_accept_rate(128, 1, 40_000, 3).within(0.5)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.data())
def test_toeplitz_hash_is_linear(x, data):
    n = len(x)
    y = data.draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    m = data.draw(st.integers(1, 10))
    diag = np.array(data.draw(st.lists(st.integers(0, 1), min_size=m + n - 1, max_size=m + n - 1)))
    x, y = np.array(x), np.array(y)
    assert np.array_equal(toeplitz_hash(x ^ y, diag), toeplitz_hash(x, diag) ^ toeplitz_hash(y, diag))
    # compare against an explicit matrix
    T = np.array([[diag[i - j + n - 1] for j in range(n)] for i in range(m)])
    assert np.array_equal(toeplitz_hash(x, diag), (T @ x) % 2)


def test_seed_value():
    assert seed_value("10100101") == 0xA5
    assert seed_value((0, 0, 1)) == 1


def test_trial_record_csv():
    recs = run_qk_trials(default_config(n=100), 100)
    text = trial_records_csv(recs)
    lines = text.splitlines()
    assert lines[0] == "trialIndex,bobErrors,eveErrors,verdict"
    assert len(lines) == 101
    assert lines[1].startswith("0,0,") and lines[1].endswith(",accept")


def test_trial_record_length_check():
    with pytest.raises(ValueError):
        TrialRecord(np.zeros(3), np.zeros(3), np.zeros(2), True)
