import numpy as np
import pytest

from tdspec.errors import ConfigError, DatasetError
from tdspec.waveguide import (
    SPEED_OF_LIGHT,
    FieldProfile,
    WaveguideGeometry,
    flatten_gain,
    mode_cutoffs,
    propagation_constant,
    read_field_profile,
    write_gain_table,
)

GEOM = WaveguideGeometry(a=58.17e-3, b=29.08e-3)


class TestCutoffs:
    def test_te10_frequency(self):
        te10 = mode_cutoffs(GEOM, 1, 1)[0]
        assert (te10.m, te10.n) == (1, 0)
        assert te10.f_c == pytest.approx(SPEED_OF_LIGHT / (2 * GEOM.a), rel=1e-12)
        assert te10.f_c == pytest.approx(2.577e9, abs=1e6)

    def test_sorted_ascending_and_complete(self):
        modes = mode_cutoffs(GEOM, 2, 2)
        freqs = [m.f_c for m in modes]
        assert freqs == sorted(freqs)
        assert len(modes) == 8  # 3x3 grid minus (0,0)

    def test_square_guide_degeneracy(self):
        geom = WaveguideGeometry(a=10e-3, b=10e-3)
        modes = {(m.m, m.n): m.f_c for m in mode_cutoffs(geom, 1, 1)}
        assert modes[(1, 0)] == pytest.approx(modes[(0, 1)], rel=1e-15)

    def test_invalid_geometry(self):
        with pytest.raises(ConfigError):
            WaveguideGeometry(a=1e-3, b=2e-3)


class TestPropagation:
    def test_zero_at_cutoff(self):
        fc = mode_cutoffs(GEOM, 1, 1)[0].f_c
        beta, evanescent = propagation_constant(GEOM, fc)
        assert beta == 0.0
        assert not evanescent

    def test_evanescent_below_cutoff(self):
        fc = mode_cutoffs(GEOM, 1, 1)[0].f_c
        kappa, evanescent = propagation_constant(GEOM, 0.5 * fc)
        assert evanescent
        assert kappa > 0

    def test_free_space_limit(self):
        # far above cutoff beta approaches the free-space wavenumber
        f = 1e12
        beta, _ = propagation_constant(GEOM, f)
        k = 2 * np.pi * f / SPEED_OF_LIGHT
        assert beta == pytest.approx(k, rel=1e-5)

    def test_dispersion_relation(self):
        f = 4.0e9
        beta, _ = propagation_constant(GEOM, f)
        k = 2 * np.pi * f / SPEED_OF_LIGHT
        kc = np.pi / GEOM.a
        assert beta**2 + kc**2 == pytest.approx(k**2, rel=1e-12)


class TestFlatten:
    def ripple_profile(self):
        f = np.linspace(3e9, 5e9, 64)
        field = 1.0 + 0.3 * np.sin(2 * np.pi * (f - 3e9) / 0.7e9)
        return FieldProfile(freq_axis=f, mean_field=field, target=2.0)

    def test_flattens_to_target(self):
        profile = self.ripple_profile()
        table = flatten_gain(profile)
        flattened = profile.mean_field * table.scales
        assert flattened.max() / flattened.min() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(flattened, 2.0, rtol=1e-12)

    def test_csv_round_trip(self, tmp_path):
        table = flatten_gain(self.ripple_profile())
        path = tmp_path / "gain.csv"
        write_gain_table(table, path)
        back = read_field_profile(path)
        np.testing.assert_array_equal(back.freq_axis, table.freqs)
        np.testing.assert_array_equal(back.mean_field, table.scales)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("frequency,E\n1e9,1.0\n")
        with pytest.raises(DatasetError):
            read_field_profile(path)

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("freq_hz,field\n1e9,abc\n")
        with pytest.raises(DatasetError):
            read_field_profile(path)

    def test_nonpositive_field_rejected(self):
        with pytest.raises(ConfigError):
            FieldProfile(freq_axis=np.array([1e9, 2e9]), mean_field=np.array([1.0, 0.0]))
