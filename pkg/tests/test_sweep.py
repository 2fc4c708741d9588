import numpy as np
import pytest

from tdspec.errors import ConfigError, SweepPointError
from tdspec.model import DisorderSpec, DrivePulse, EnsembleSpec, TlsParams
from tdspec.sweep import (
    SweepPlan,
    average_realizations,
    run_duration_series,
    run_frequency_sweep,
)


def tiny_plan(**overrides):
    spec = EnsembleSpec(defects=(TlsParams(epsilon=0.0, delta=4.0e9),), gamma=2e6)
    pulse = DrivePulse(carrier=4.0e9, amplitude=1e8, duration=2e-9)
    defaults = dict(
        spec=spec,
        pulse_template=pulse,
        freq_start=3.9e9,
        freq_stop=4.1e9,
        freq_count=3,
        t_end=4e-9,
    )
    defaults.update(overrides)
    return SweepPlan(**defaults)


class TestPlan:
    def test_freq_axis(self):
        plan = tiny_plan()
        np.testing.assert_allclose(plan.freq_axis, [3.9e9, 4.0e9, 4.1e9])

    def test_default_t_end_covers_ringdown(self):
        plan = tiny_plan(t_end=None)
        assert plan.t_end == pytest.approx(2e-9 + 600e-9)

    def test_t_end_must_cover_pulse(self):
        with pytest.raises(ConfigError):
            tiny_plan(t_end=1e-9)

    def test_inverted_axis_rejected(self):
        with pytest.raises(ConfigError):
            tiny_plan(freq_start=5e9, freq_stop=3e9)


class TestFrequencySweep:
    def test_shape_and_metadata(self):
        plan = tiny_plan()
        res = run_frequency_sweep(plan)
        assert res.population_map.shape == (3, res.time_axis.size)
        assert res.pulse_off_index() == round(2e-9 / (res.time_axis[1] - res.time_axis[0]))
        assert len(res.metadata["per_point_walltime_s"]) == 3
        assert res.metadata["defect_frequencies_hz"] == [4.0e9]

    def test_worker_count_does_not_change_bytes(self):
        plan = tiny_plan()
        seq = run_frequency_sweep(plan, workers=1)
        par = run_frequency_sweep(plan, workers=2)
        assert seq.population_map.tobytes() == par.population_map.tobytes()
        assert seq.time_axis.tobytes() == par.time_axis.tobytes()

    def test_point_failure_names_frequency(self):
        plan = tiny_plan(dt=1e-10)  # too coarse for a 4 GHz carrier
        with pytest.raises(SweepPointError) as err:
            run_frequency_sweep(plan)
        assert err.value.freq_hz == pytest.approx(3.9e9)

    def test_to_spectrogram(self):
        res = run_frequency_sweep(tiny_plan())
        sgram = res.to_spectrogram()
        assert sgram.col_unit == "s"
        assert sgram.pulse_off_index == res.pulse_off_index()
        np.testing.assert_array_equal(sgram.values, res.population_map)


def disordered_plan(**overrides):
    dis = DisorderSpec(
        epsilon_range=(3.8e9, 4.2e9), j_range=(-1e7, 1e7), seed=3, assign="delta"
    )
    spec = EnsembleSpec(
        defects=(
            TlsParams(epsilon=0.0, delta=4.0e9),
            TlsParams(epsilon=0.0, delta=4.0e9),
        ),
        gamma=2e6,
        disorder=dis,
    )
    pulse = DrivePulse(carrier=4.0e9, amplitude=1e8, duration=2e-9)
    defaults = dict(
        spec=spec,
        pulse_template=pulse,
        freq_start=4.0e9,
        freq_stop=4.0e9,
        freq_count=1,
        durations=(1e-9, 2e-9),
        t_end=3e-9,
        base_seed=3,
    )
    defaults.update(overrides)
    return SweepPlan(**defaults)


class TestDurationSeries:
    def test_same_realization_across_durations(self):
        results = run_duration_series(disordered_plan())
        assert len(results) == 2
        f0 = results[0].metadata["defect_frequencies_hz"]
        f1 = results[1].metadata["defect_frequencies_hz"]
        assert f0 == f1
        assert results[0].metadata["realization_seeds"] == [3]

    def test_realizations_are_averaged(self):
        results = run_duration_series(disordered_plan(realizations=2, durations=(2e-9,)))
        assert results[0].metadata["averaged_over"] == 2
        assert results[0].metadata["realization_seeds"] == [3, 4]

    def test_sampling_is_deterministic(self):
        a = run_duration_series(disordered_plan(durations=(2e-9,)))[0]
        b = run_duration_series(disordered_plan(durations=(2e-9,)))[0]
        assert a.population_map.tobytes() == b.population_map.tobytes()


class TestAveraging:
    def test_mean(self):
        r = run_frequency_sweep(tiny_plan())
        import copy

        r2 = copy.deepcopy(r)
        r2.population_map = 3.0 * r.population_map
        avg = average_realizations([r, r2])
        np.testing.assert_allclose(avg.population_map, 2.0 * r.population_map)

    def test_axis_mismatch_rejected(self):
        r = run_frequency_sweep(tiny_plan())
        r2 = run_frequency_sweep(tiny_plan(freq_start=3.8e9))
        with pytest.raises(ConfigError):
            average_realizations([r, r2])
