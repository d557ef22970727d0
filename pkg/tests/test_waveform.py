import math

import numpy as np
import pytest

from rfhom.interference import pulse_energy
from rfhom.waveform import (ComplexTrace, DelayOutOfRange, NoiseModel, PulseSpec, UndefinedSNR,
                            add_noise, calibrate_noise, delay_to_samples, snr_db, synthesize)

SPEC = PulseSpec()


def test_pulse_geometry():
    assert SPEC.pulse_samples == 656
    assert SPEC.tau == pytest.approx(82 / 1.2e8)
    assert SPEC.sample_period * SPEC.pulse_samples == pytest.approx(SPEC.tau, rel=1e-12)


def test_zero_amplitude_is_zero_trace():
    t = synthesize(SPEC, 0.0, 1.3, 0.0, 3 * SPEC.tau)
    assert not t.samples.any()


@pytest.mark.parametrize("delay", [0.0, 0.37, 1.0, 2.0])
def test_energy_of_unit_pulse_is_tau(delay):
    t = synthesize(SPEC, 1.0, 0.4, delay * SPEC.tau, 3 * SPEC.tau)
    assert abs(pulse_energy(t) - SPEC.tau) <= SPEC.sample_period
    assert np.count_nonzero(t.samples) == SPEC.pulse_samples


def test_phase_pi_negates():
    a = synthesize(SPEC, 0.7, 0.0, 0.5 * SPEC.tau, 3 * SPEC.tau)
    b = synthesize(SPEC, 0.7, math.pi, 0.5 * SPEC.tau, 3 * SPEC.tau)
    np.testing.assert_allclose(b.samples, -a.samples, atol=1e-15)


def test_delay_out_of_range():
    with pytest.raises(DelayOutOfRange):
        synthesize(SPEC, 1.0, 0.0, 2.5 * SPEC.tau, 3 * SPEC.tau)
    with pytest.raises(DelayOutOfRange):
        synthesize(SPEC, 1.0, 0.0, -SPEC.sample_period, 3 * SPEC.tau)
    with pytest.raises(DelayOutOfRange):
        synthesize(SPEC, 1.0, 0.0, 0.0, 0.5 * SPEC.tau)


def test_delay_quantization_symmetric():
    dt = SPEC.sample_period
    for k in (0.5, 1.5, 2.49, 7.5):
        assert delay_to_samples(-k * dt, dt) == -delay_to_samples(k * dt, dt)


def test_noise_variance_per_quadrature():
    trace = ComplexTrace(np.zeros(200_000), 1.0)
    noisy = add_noise(trace, 0.25, np.random.default_rng(1)).samples
    # sample variance of 2e5 normals: relative sd about 0.3%
    assert np.var(noisy.real) == pytest.approx(0.25, rel=0.015)
    assert np.var(noisy.imag) == pytest.approx(0.25, rel=0.015)
    assert abs(np.mean(noisy.real * noisy.imag)) < 0.005


def test_noise_deterministic_and_zero_variance_passthrough():
    trace = synthesize(SPEC, 1.0, 0.0, 0.0, SPEC.tau)
    a = add_noise(trace, 0.1, np.random.default_rng(9)).samples
    b = add_noise(trace, 0.1, np.random.default_rng(9)).samples
    assert (a == b).all()
    assert add_noise(trace, 0.0, np.random.default_rng(9)) is trace
    with pytest.raises(ValueError):
        add_noise(trace, -1.0, np.random.default_rng(0))


def test_snr_examples():
    assert snr_db(1.0, 0.125) == pytest.approx(10 * math.log10(4), abs=1e-12)
    assert snr_db(1.0, 0.5) == pytest.approx(0.0, abs=1e-12)
    var = calibrate_noise(0.4, 25.0)
    assert snr_db(0.4, var) == pytest.approx(25.0, abs=1e-12)
    # fixed noise PSD: SNR grows as amplitude squared
    assert snr_db(0.8, var) == pytest.approx(25.0 + 20 * math.log10(2), abs=1e-12)
    assert snr_db(1.45, NoiseModel(var)) == pytest.approx(36.19, abs=0.01)
    with pytest.raises(UndefinedSNR):
        snr_db(1.0, NoiseModel())


def test_trace_text_dump():
    t = synthesize(SPEC, 1.0, math.pi / 2, 0.0, SPEC.tau)
    lines = t.to_text().splitlines()
    assert len(lines) == SPEC.pulse_samples
    time, re, im = map(float, lines[1].split(","))
    assert time == pytest.approx(SPEC.sample_period) and abs(re) < 1e-15 and im == 1.0
