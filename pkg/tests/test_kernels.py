"""Backend parity: the numba kernels and the numpy fallback must agree."""

import numpy as np
import pytest

from cointoss import kernels


def reference_alice(p_bit0, p_pass, u_choice, u_bit, u_pass):
    heads = tails = abort = 0
    for a, b, c in zip(u_choice, u_bit, u_pass):
        choice = 0 if a < 0.5 else 1
        bit = 0 if b < p_bit0[choice] else 1
        if c < p_pass[choice][bit]:
            if bit == 0:
                heads += 1
            else:
                tails += 1
        else:
            abort += 1
    return heads, tails, abort


def reference_bob(cum_m, p_bit0_m, u_result, u_bit):
    heads = tails = 0
    for a, b in zip(u_result, u_bit):
        m = int(np.searchsorted(cum_m, a, side="right"))
        m = min(m, len(cum_m) - 1)
        if b < p_bit0_m[m]:
            heads += 1
        else:
            tails += 1
    return heads, tails


@pytest.fixture(params=["numpy"] + (["numba"] if kernels.NUMBA_AVAILABLE else []))
def backend(request, monkeypatch):
    monkeypatch.setenv("COINTOSS_KERNELS", request.param)
    return request.param


class TestBackendSelection:
    def test_auto_prefers_numba(self, monkeypatch):
        monkeypatch.setenv("COINTOSS_KERNELS", "auto")
        expected = "numba" if kernels.NUMBA_AVAILABLE else "numpy"
        assert kernels.backend_name() == expected

    def test_explicit_numpy(self, monkeypatch):
        monkeypatch.setenv("COINTOSS_KERNELS", "numpy")
        assert kernels.backend_name() == "numpy"

    def test_invalid_value_rejected(self, monkeypatch):
        monkeypatch.setenv("COINTOSS_KERNELS", "fortran")
        with pytest.raises(ValueError):
            kernels.backend_name()


class TestAliceTrials:
    def test_matches_reference_loop(self, backend):
        rng = np.random.default_rng(1)
        p_bit0 = np.array([5 / 6, 5 / 6])
        p_pass = np.array([[0.9, 0.5], [0.9, 0.5]])
        u = [rng.random(5000) for _ in range(3)]
        got = kernels.alice_trials(p_bit0, p_pass, *u)
        assert got == reference_alice(p_bit0, p_pass, *u)

    def test_backends_identical(self, monkeypatch):
        if not kernels.NUMBA_AVAILABLE:
            pytest.skip("numba unavailable")
        rng = np.random.default_rng(2)
        p_bit0 = np.array([0.5, 0.25])
        p_pass = np.array([[1.0, 0.3], [0.8, 0.0]])
        u = [rng.random(200_000) for _ in range(3)]
        monkeypatch.setenv("COINTOSS_KERNELS", "numpy")
        via_numpy = kernels.alice_trials(p_bit0, p_pass, *u)
        monkeypatch.setenv("COINTOSS_KERNELS", "numba")
        via_numba = kernels.alice_trials(p_bit0, p_pass, *u)
        assert via_numpy == via_numba

    def test_counts_sum_to_trials(self, backend):
        rng = np.random.default_rng(3)
        got = kernels.alice_trials(
            np.array([0.7, 0.2]),
            np.array([[0.4, 0.6], [0.9, 0.1]]),
            *(rng.random(10_000) for _ in range(3)),
        )
        assert sum(got) == 10_000


class TestBobTrials:
    def test_matches_reference_loop(self, backend):
        rng = np.random.default_rng(4)
        p_result = np.array([0.25, 0.25, 0.25, 0.25])
        p_bit0 = np.array([1.0, 1.0, 0.0, 1.0])
        u = [rng.random(5000) for _ in range(2)]
        got = kernels.bob_trials(np.cumsum(p_result), p_bit0, *u)
        assert got == reference_bob(np.cumsum(p_result), p_bit0, *u)

    def test_backends_identical(self, monkeypatch):
        if not kernels.NUMBA_AVAILABLE:
            pytest.skip("numba unavailable")
        rng = np.random.default_rng(5)
        cum = np.cumsum(np.array([0.1, 0.4, 0.3, 0.2]))
        p_bit0 = np.array([0.9, 0.2, 0.5, 1.0])
        u = [rng.random(200_000) for _ in range(2)]
        monkeypatch.setenv("COINTOSS_KERNELS", "numpy")
        via_numpy = kernels.bob_trials(cum, p_bit0, *u)
        monkeypatch.setenv("COINTOSS_KERNELS", "numba")
        via_numba = kernels.bob_trials(cum, p_bit0, *u)
        assert via_numpy == via_numba


class TestGridScan:
    def test_backends_agree(self, monkeypatch):
        if not kernels.NUMBA_AVAILABLE:
            pytest.skip("numba unavailable")
        monkeypatch.setenv("COINTOSS_KERNELS", "numpy")
        via_numpy = kernels.objective_grid_scan(40)
        monkeypatch.setenv("COINTOSS_KERNELS", "numba")
        via_numba = kernels.objective_grid_scan(40)
        assert via_numpy[0] == pytest.approx(via_numba[0], abs=1e-12)
        np.testing.assert_allclose(via_numpy[1:], via_numba[1:], atol=1e-9)

    def test_grid_value_below_true_maximum(self, backend):
        value, *_ = kernels.objective_grid_scan(25)
        assert 0.7 < value <= 0.75 + 1e-12

    def test_angles_map_to_unit_sphere(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            t = rng.uniform(0, np.pi / 2, size=3)
            coeffs = kernels.angles_to_coefficients(*t)
            assert np.all(coeffs >= -1e-15)
            assert np.sum(coeffs**2) == pytest.approx(1.0, abs=1e-12)
