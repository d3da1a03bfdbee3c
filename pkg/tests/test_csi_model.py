import math

import numpy as np
import pytest

from csi_model import (
    AmplitudeTensor,
    ComplexCfr,
    CsiSequence,
    cfr_amplitude,
    cfr_phase,
    conjugate,
    extract_amplitudes,
    packet_permuted,
)
from errors import DataError, ZeroCfr


@pytest.mark.parametrize("re, im, expected", [(3, 4, 5.0), (0, 0, 0.0), (-1, 0, 1.0)])
def test_cfr_amplitude(re, im, expected):
    assert cfr_amplitude(ComplexCfr(re, im)) == expected


@pytest.mark.parametrize("re, im, expected", [(1, 0, 0.0), (0, 1, math.pi / 2), (-1, 0, math.pi)])
def test_cfr_phase(re, im, expected):
    assert cfr_phase(ComplexCfr(re, im)) == pytest.approx(expected)


def test_phase_on_negative_axis_is_plus_pi():
    assert cfr_phase(ComplexCfr(-1.0, -0.0)) == pytest.approx(math.pi)


def test_zero_cfr_has_no_phase():
    with pytest.raises(ZeroCfr):
        cfr_phase(ComplexCfr(0, 0))


def test_cfr_must_be_finite():
    with pytest.raises(DataError):
        ComplexCfr(float("nan"), 0.0)
    with pytest.raises(DataError):
        ComplexCfr(0.0, float("inf"))


def test_amplitude_is_conjugation_and_scale_invariant():
    rng = np.random.default_rng(3)
    for re, im, s in rng.normal(size=(50, 3)):
        h = ComplexCfr(float(re), float(im))
        assert cfr_amplitude(conjugate(h)) == cfr_amplitude(h)
        scaled = ComplexCfr(float(s * re), float(s * im))
        assert cfr_amplitude(scaled) == pytest.approx(abs(s) * cfr_amplitude(h))


def test_sequence_validates_shape_and_timestamps():
    with pytest.raises(DataError):
        CsiSequence(np.zeros((2, 1, 1)))
    with pytest.raises(DataError):
        CsiSequence(np.zeros((0, 1, 1, 1)))
    with pytest.raises(DataError):
        CsiSequence(np.zeros((2, 1, 1, 1)), timestamps=[5, 3])
    with pytest.raises(DataError):
        CsiSequence(np.zeros((2, 1, 1, 1)), timestamps=[1])


def test_sequence_is_read_only():
    seq = CsiSequence(np.ones((2, 1, 1, 3)), timestamps=[0, 1])
    with pytest.raises(ValueError):
        seq.values[0, 0, 0, 0] = 2
    assert seq.n_pkt == 2 and seq.n_rx == 1 and seq.n_tx == 1 and seq.n_sub == 3
    assert seq.cfr(1, 0, 0, 2) == ComplexCfr(1.0, 0.0)


def test_extract_all_zero():
    amps = extract_amplitudes(CsiSequence(np.zeros((4, 2, 3, 5))))
    assert amps.shape == (2, 3, 5, 4)
    assert not amps.values.any()


def test_extract_single_value():
    amps = extract_amplitudes(CsiSequence(np.array([[[[3 + 4j]]]])))
    assert amps.values.tolist() == [[[[5.0]]]]


def test_extract_matches_elementwise_modulus():
    rng = np.random.default_rng(0)
    values = rng.normal(size=(10, 2, 2, 4)) + 1j * rng.normal(size=(10, 2, 2, 4))
    seq = CsiSequence(values)
    amps = extract_amplitudes(seq)
    for p in range(10):
        for rx in range(2):
            for tx in range(2):
                for k in range(4):
                    assert amps.values[rx, tx, k, p] == pytest.approx(cfr_amplitude(seq.cfr(p, rx, tx, k)), rel=1e-15)


def test_extract_is_packet_permutation_equivariant():
    rng = np.random.default_rng(1)
    seq = CsiSequence(rng.normal(size=(6, 2, 1, 3)) + 1j * rng.normal(size=(6, 2, 1, 3)))
    order = rng.permutation(6)
    permuted = extract_amplitudes(packet_permuted(seq, order))
    assert np.array_equal(permuted.values, extract_amplitudes(seq).values[..., order])


def test_amplitude_tensor_rejects_negative_values():
    with pytest.raises(DataError):
        AmplitudeTensor(-np.ones((1, 1, 1, 1)))
