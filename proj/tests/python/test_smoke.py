import math

import numpy as np
import pytest

import decoyqkd as dq


def test_entropy_is_symmetric_and_peaks_at_one_half():
    assert dq.binary_entropy(0.5) == pytest.approx(1.0)
    for p in (0.01, 0.11, 0.3):
        assert dq.binary_entropy(p) == pytest.approx(dq.binary_entropy(1 - p), abs=1e-15)


def test_binomial_interval_brackets_the_rate():
    lo, hi = dq.binomial_interval(50, 1000, 1e-7)
    assert 0 < lo < 0.05 < hi < 1


def test_scheme_and_model_round_trip_through_dicts():
    scheme = dq.reference_scheme()
    assert len(scheme) == 3
    assert dq.DecoyScheme.from_dict(scheme.to_dict()) == scheme
    model = dq.reference_model()
    model.fiber_length_km = 42.0
    assert dq.ChannelModel.from_dict(model.to_dict()) == model


def test_malformed_documents_raise_value_errors():
    with pytest.raises(ValueError):
        dq.DecoyScheme.from_dict({"levels": []})
    tally = dq.expected_tally(dq.reference_model(), dq.reference_scheme(), 1e9)
    tally["levels"][0]["errors"]["X"] = 10**15
    with pytest.raises(ValueError):
        dq.analyze(tally, dq.reference_scheme())


def test_calibrated_operating_point():
    cal = dq.calibrate()
    assert cal["ok"]
    report = dq.analyze(cal["tally"], dq.reference_scheme())
    tight, worst = report["total_secret_tight"], report["total_secret_worst_case"]
    assert worst < tight
    assert abs(worst - 3990) / 3990 < 0.25


def test_simulated_session_is_reproducible_and_keys_match_tally():
    model = dq.reference_model()
    model.fiber_length_km = 10.0
    model.intrinsic_error = 0.02
    a = dq.simulate(model, dq.reference_scheme(), 500_000, seed=3, keep_keys=True)
    b = dq.simulate(model, dq.reference_scheme(), 500_000, seed=3, keep_keys=True)
    assert a["tally"] == b["tally"]
    signal = a["tally"]["levels"][-1]
    for basis in ("X", "Z"):
        alice, bob = a["alice_" + basis], a["bob_" + basis]
        assert alice.dtype == np.uint8
        assert len(alice) == signal["sifted"][basis]
        assert int(np.count_nonzero(alice != bob)) == signal["errors"][basis]


def test_distillation_primitives():
    rng = np.random.default_rng(5)
    alice = rng.integers(0, 2, 10_000, dtype=np.uint8)
    bob = alice ^ (rng.random(10_000) < 0.03).astype(np.uint8)
    rec = dq.cascade(alice, bob, 0.03, seed=1)
    assert np.array_equal(rec["corrected"], alice)
    assert rec["f_ec"] >= 1.0

    skewed = (rng.random(100_000) >= 0.494).astype(np.uint8)
    out = dq.peres(skewed, depth=3)
    assert len(out) / len(skewed) == pytest.approx(dq.peres_rate(0.494, 3), abs=0.01)

    k1, k2 = alice[:777], bob[:777]
    h = lambda k: dq.toeplitz_hash(k, 300, 9)
    assert np.array_equal(h(k1 ^ k2), h(k1) ^ h(k2))


def test_fixed_scheme_range_is_ordered():
    cal = dq.calibrate()
    model = dq.ChannelModel.from_dict(cal["model"])
    curve = dq.range_curve(model, cal["pulses"], [100.0, 130.0, 160.0], scheme=dq.reference_scheme())
    assert curve["range_worst_km"] <= curve["range_tight_km"]
    assert 130 < curve["range_tight_km"] < 160
    assert not math.isnan(curve["points"][0]["y1_lower"])
