import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from memheat.core import ValidationError
from memheat.fractional import gamma_fn
from memheat.memory import MemoryLedger


def ledger_from(gamma, stamps, values):
    led = MemoryLedger(gamma, (1,))
    for s, v in zip(stamps, values):
        led.append(s, np.array([v]))
    return led


class TestAccumulate:
    def test_constant_integrand_exact(self):
        stamps = np.linspace(0.0, 1.0, 33)
        led = ledger_from(0.5, stamps, np.ones_like(stamps))
        # t^(1-gamma)/(1-gamma) = 2 at t=1, gamma=0.5
        assert led.accumulate(1.0)[0] == pytest.approx(2.0, abs=1e-12)

    def test_linear_integrand_beta_value(self):
        stamps = np.linspace(0.0, 1.0, 33)
        led = ledger_from(0.5, stamps, stamps)
        expected = gamma_fn(2.0) * gamma_fn(0.5) / gamma_fn(2.5)
        assert expected == pytest.approx(4.0 / 3.0, rel=1e-12)
        assert led.accumulate(1.0)[0] == pytest.approx(expected, abs=1e-10)

    def test_single_stamp_at_origin(self):
        led = ledger_from(0.5, [0.0], [1.0])
        assert led.accumulate(0.0)[0] == 0.0

    def test_empty_ledger_returns_zero(self):
        led = MemoryLedger(0.5, (4,))
        assert np.all(led.accumulate(1.0) == 0.0)

    def test_backwards_evaluation_rejected(self):
        led = ledger_from(0.5, [0.0, 0.5, 1.0], [1.0, 1.0, 1.0])
        with pytest.raises(ValidationError):
            led.accumulate(0.25)

    def test_nonuniform_stamps(self):
        stamps = np.concatenate([np.linspace(0, 0.5, 9), np.geomspace(0.55, 1.0, 24)])
        led = ledger_from(0.5, stamps, stamps)  # linear data, exact
        assert led.accumulate(1.0)[0] == pytest.approx(4.0 / 3.0, abs=1e-12)

    def test_quadratic_second_order(self):
        exact = gamma_fn(3.0) * gamma_fn(0.5) / gamma_fn(3.5)
        errs = []
        for M in (32, 64, 128, 256):
            stamps = np.linspace(0.0, 1.0, M + 1)
            led = ledger_from(0.5, stamps, stamps**2)
            errs.append(abs(led.accumulate(1.0)[0] - exact))
        orders = [np.log2(a / b) for a, b in zip(errs, errs[1:])]
        assert all(o >= 1.9 for o in orders)

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_positivity(self, seed):
        rng = np.random.default_rng(seed)
        stamps = np.sort(rng.uniform(0.0, 1.0, 12))
        stamps[0] = 0.0
        led = MemoryLedger(0.5, (8,))
        for s in stamps:
            led.append(s, rng.uniform(0.0, 2.0, 8))
        assert np.all(led.accumulate(float(stamps[-1])) >= 0.0)

    @given(seed=st.integers(0, 10_000), a=st.floats(-2.0, 2.0), b=st.floats(-2.0, 2.0))
    @settings(max_examples=25, deadline=None)
    def test_linearity_in_snapshots(self, seed, a, b):
        rng = np.random.default_rng(seed)
        stamps = np.linspace(0.0, 1.0, 9)
        g1 = rng.standard_normal((9, 4))
        g2 = rng.standard_normal((9, 4))
        led1 = MemoryLedger(0.4, (4,))
        led2 = MemoryLedger(0.4, (4,))
        led3 = MemoryLedger(0.4, (4,))
        for i, s in enumerate(stamps):
            led1.append(s, g1[i])
            led2.append(s, g2[i])
            led3.append(s, a * g1[i] + b * g2[i])
        combo = a * led1.accumulate(1.0) + b * led2.accumulate(1.0)
        assert np.allclose(led3.accumulate(1.0), combo, atol=1e-12)

    def test_ordering_enforced_on_append(self):
        led = ledger_from(0.5, [0.0, 0.5], [1.0, 1.0])
        with pytest.raises(ValidationError):
            led.append(0.5, np.array([1.0]))


class TestTrim:
    def test_keep_all_identity(self):
        led = ledger_from(0.5, np.linspace(0, 1, 17), np.ones(17))
        assert led.trim("keep-all") is led

    def test_coarsen_linear_exact(self):
        stamps = np.linspace(0.0, 1.0, 33)
        led = ledger_from(0.5, stamps, 2.0 + 3.0 * stamps)
        before = led.accumulate(1.0)[0]
        trimmed = led.trim("coarsen-tail", 0.5)
        assert len(trimmed) < len(led)
        assert trimmed.accumulate(1.0)[0] == pytest.approx(before, abs=1e-12)

    def test_coarsen_constant_exact(self):
        stamps = np.linspace(0.0, 2.0, 65)
        led = ledger_from(0.3, stamps, np.full(65, 1.7))
        before = led.accumulate(2.0)[0]
        trimmed = led.trim("coarsen-tail", 0.25)
        assert trimmed.accumulate(2.0)[0] == pytest.approx(before, abs=1e-12)

    def test_endpoints_preserved(self):
        stamps = np.linspace(0.0, 1.0, 33)
        led = ledger_from(0.5, stamps, stamps)
        trimmed = led.trim("coarsen-tail", 0.1)
        assert trimmed.times[0] == 0.0
        assert trimmed.times[-1] == 1.0

    def test_unknown_policy_rejected(self):
        led = ledger_from(0.5, [0.0, 1.0], [1.0, 1.0])
        with pytest.raises(ValidationError):
            led.trim("lossy")
