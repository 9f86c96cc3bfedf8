import numpy as np
import pytest

from fhnet.cpfsk import (CapacityModel, LinkConfig, _isotonic_nondecreasing,
                         cpfsk_psd, occupied_bandwidth, sinr_threshold,
                         spectral_efficiency, symmetric_rate, total_psd_power)


@pytest.fixture(scope="module")
def default_model():
    return CapacityModel.default()


class TestPsd:
    def test_msk_closed_form_identity(self):
        # h = 1/2 is MSK: 16/pi^2 * cos^2(2 pi f T) / (1 - 16 f^2 T^2)^2
        nu = np.linspace(-3.0, 3.0, 1201)
        keep = np.abs(np.abs(nu) - 0.25) > 1e-6
        mine = cpfsk_psd(nu[keep], 0.5)
        msk = (16.0 / np.pi ** 2) * np.cos(2 * np.pi * nu[keep]) ** 2 \
            / (1.0 - 16.0 * nu[keep] ** 2) ** 2
        assert np.allclose(mine, msk, atol=1e-12)

    def test_even_in_frequency(self):
        nu = np.linspace(0.01, 4.0, 100)
        for h in (0.42, 0.7, 1.3):
            assert np.allclose(cpfsk_psd(nu, h), cpfsk_psd(-nu, h), rtol=1e-12)

    def test_unit_total_power(self):
        for h in (0.4, 0.5, 0.59, 0.75, 0.9, 1.0):
            assert total_psd_power(h) == pytest.approx(1.0, abs=1e-6)

    def test_msk_99_percent_bandwidth(self):
        # classical landmark: 1.18 symbol rates, two-sided
        b99 = occupied_bandwidth(0.5)
        assert b99 == pytest.approx(1.18, abs=0.01)
        assert spectral_efficiency(0.5) == pytest.approx(0.85, abs=0.01)

    def test_efficiency_strictly_decreasing(self):
        hs = np.round(np.arange(0.40, 1.0001, 0.05), 10)
        etas = [spectral_efficiency(float(h)) for h in hs]
        assert all(a > b for a, b in zip(etas, etas[1:]))

    def test_deterministic(self):
        assert spectral_efficiency(0.63) == spectral_efficiency(0.63)

    def test_percentile_knob(self):
        assert occupied_bandwidth(0.5, 0.90) < occupied_bandwidth(0.5, 0.99)

    def test_domain(self):
        with pytest.raises(ValueError):
            occupied_bandwidth(0.0)
        with pytest.raises(ValueError):
            occupied_bandwidth(1.6)
        with pytest.raises(ValueError):
            occupied_bandwidth(0.5, 1.0)


class TestSymmetricRate:
    def test_noiseless_limit(self):
        assert symmetric_rate(1.0, 40.0, trials=50000, seed=3) >= 0.99

    def test_anchor_half_rate_at_3p7_db(self):
        # the h=1, R=1/2 operating point sits at 3.7 dB
        c = symmetric_rate(1.0, 3.7, trials=200000, seed=11)
        assert c == pytest.approx(0.5, abs=0.03)

    def test_monotone_in_snr(self):
        vals = [symmetric_rate(0.59, g, trials=100000, seed=5) for g in (-5.0, 0.0, 5.0, 10.0)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_clipped_to_unit_interval(self):
        assert 0.0 <= symmetric_rate(0.4, -20.0, trials=20000, seed=7) <= 1.0

    def test_rejects_bad_index(self):
        with pytest.raises(ValueError):
            symmetric_rate(0.0, 5.0)
        with pytest.raises(ValueError):
            symmetric_rate(2.0, 5.0)


class TestIsotonic:
    def test_nondecreasing_output(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            y = rng.standard_normal(30)
            z = _isotonic_nondecreasing(y)
            assert np.all(np.diff(z) >= 0)
            # idempotent and mean preserving
            assert np.allclose(_isotonic_nondecreasing(z), z)
            assert z.mean() == pytest.approx(y.mean(), rel=1e-12)

    def test_already_sorted_unchanged(self):
        y = np.array([0.0, 0.1, 0.5, 0.9])
        assert np.array_equal(_isotonic_nondecreasing(y), y)


class TestCapacityModel:
    def test_default_model_grids(self, default_model):
        m = default_model
        assert m.h_grid[0] == pytest.approx(0.40)
        assert m.h_grid[-1] == pytest.approx(1.00)
        assert m.gamma_db_grid[0] == pytest.approx(-10.0)
        assert m.gamma_db_grid[-1] == pytest.approx(20.0)
        assert np.all(np.diff(m.rate, axis=1) >= 0)
        assert m.source == "estimated"

    def test_estimate_small_grid(self):
        m = CapacityModel.estimate(h_grid=np.array([0.6, 1.0]),
                                   gamma_db_grid=np.array([-5.0, 0.0, 5.0, 10.0]),
                                   symbols=5000, seed=99)
        assert m.rate.shape == (2, 4)
        assert np.all((m.rate >= 0) & (m.rate <= 1))

    def test_estimate_threaded_matches_serial(self):
        kw = dict(h_grid=np.array([0.6, 0.8]), gamma_db_grid=np.array([0.0, 6.0]),
                  symbols=4000, seed=123)
        a = CapacityModel.estimate(**kw, threads=1)
        b = CapacityModel.estimate(**kw, threads=3)
        assert np.array_equal(a.rate, b.rate)

    def test_save_load_round_trip(self, tmp_path, default_model):
        path = tmp_path / "table.txt"
        default_model.save(path)
        back = CapacityModel.load(path)
        assert np.array_equal(back.rate, default_model.rate)
        assert np.array_equal(back.h_grid, default_model.h_grid)
        assert back.symbols == default_model.symbols

    def test_checksum_detects_corruption(self, tmp_path, default_model):
        path = tmp_path / "table.txt"
        default_model.save(path)
        text = path.read_text().replace("0.5", "0.4", 1)
        path.write_text(text)
        with pytest.raises(ValueError, match="checksum"):
            CapacityModel.load(path)

    def test_monotonicity_enforced_on_load(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("h_grid 0.5 1.0\n"
                        "gamma_db_grid 0.0 5.0\n"
                        "0.5 0.4\n"
                        "0.2 0.6\n")
        with pytest.raises(ValueError, match="nondecreasing"):
            CapacityModel.load(path)

    def test_rate_interpolation(self, default_model):
        m = default_model
        # exact on grid nodes
        assert m.rate_at(1.0, 0.0) == pytest.approx(
            m.rate[-1][np.searchsorted(m.gamma_db_grid, 0.0)])
        # between rows: bounded by the rows
        mid = m.rate_at(0.625, 5.0)
        lo = m.rate_at(0.60, 5.0)
        hi = m.rate_at(0.65, 5.0)
        assert min(lo, hi) - 1e-12 <= mid <= max(lo, hi) + 1e-12

    def test_h_outside_grid_rejected(self, default_model):
        with pytest.raises(ValueError, match="outside"):
            default_model.rate_curve(1.2)


class TestSinrThreshold:
    def test_anchor_values(self, default_model):
        beta = sinr_threshold(1.0, 0.5, 0.0, default_model)
        assert beta == pytest.approx(3.7, abs=0.3)
        beta1 = sinr_threshold(1.0, 0.5, 1.0, default_model)
        assert beta1 == pytest.approx(4.7, abs=0.3)

    def test_margin_additivity_exact(self, default_model):
        base = sinr_threshold(0.7, 0.4, 0.0, default_model)
        assert sinr_threshold(0.7, 0.4, 2.5, default_model) == base + 2.5

    def test_threshold_tracks_grid_monotonicity(self, default_model):
        # inverting a higher rate never needs less SNR
        betas = [sinr_threshold(0.8, R, 0.0, default_model) for R in (0.2, 0.4, 0.6, 0.8)]
        assert all(a < b for a, b in zip(betas, betas[1:]))

    def test_unbracketed_rate_rejected(self):
        m = CapacityModel(h_grid=np.array([0.5, 1.0]),
                          gamma_db_grid=np.array([0.0, 2.0]),
                          rate=np.array([[0.1, 0.2], [0.15, 0.3]]))
        with pytest.raises(ValueError, match="not bracketed"):
            sinr_threshold(0.75, 0.9, 0.0, m)

    def test_bad_rate_rejected(self, default_model):
        with pytest.raises(ValueError):
            sinr_threshold(1.0, 0.0, 0.0, default_model)
        with pytest.raises(ValueError):
            sinr_threshold(1.0, 1.0, 0.0, default_model)


class TestLinkConfig:
    def test_valid(self):
        cfg = LinkConfig(R=0.5, h=1.0, L_eff=200.0, margin_db=1.0, B=1e6)
        assert cfg.D == 1.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            LinkConfig(R=0.0, h=1.0, L_eff=10.0)
        with pytest.raises(ValueError):
            LinkConfig(R=0.5, h=1.6, L_eff=10.0)
        with pytest.raises(ValueError):
            LinkConfig(R=0.5, h=1.0, L_eff=0.5)
        with pytest.raises(ValueError):
            LinkConfig(R=0.5, h=1.0, L_eff=10.0, margin_db=-1.0)
        with pytest.raises(ValueError):
            LinkConfig(R=0.5, h=1.0, L_eff=10.0, D=0.0)
