import math

import pytest
from hypothesis import given, strategies as st

from fogcache.radio import (AntennaModel, Link, RadioParams, aligned_rate, antenna_gain,
                            interference_power, link_rate, off_axis_angle, rate_from_sinr,
                            received_power, signal_power, sinr, worst_case_rate)

# Reference numbers below were evaluated separately with Decimal arithmetic
# from the closed forms (k0 = (c / 4 pi f)^2, Friis with gains, Shannon).
K0_60GHZ = 1.5809537936509585e-07
G0_30DEG_DB = 15.909977437210
GSL_30DEG_DB = -11.977232243601
NOISE_MW = 8.5991148840e-11
PR_50M_MW = 9.6155616307e-05
SNR_50M = 1.1182036478e06
RATE_50M = 2.1700173041e10
RATE_100M = 1.9540177221e10
WORST_RATE_50M = 1.0702247194e10  # sigma = 1e-10

P = RadioParams()
A = AntennaModel()


def test_table_defaults():
    assert P.bandwidth == 2160e6
    assert P.tx_power == pytest.approx(1000.0)
    assert P.eta == 0.5 and P.pathloss_exp == 2 and P.slot_duration == 1.0
    assert A.beamwidth == 30.0
    assert P.k0 == pytest.approx(K0_60GHZ, rel=1e-12)
    assert P.noise_power == pytest.approx(NOISE_MW, rel=1e-9)


def test_gain_closed_forms():
    assert A.max_gain_db == pytest.approx(G0_30DEG_DB, abs=1e-6)
    assert A.side_lobe_db == pytest.approx(GSL_30DEG_DB, abs=1e-6)
    assert A.main_lobe == pytest.approx(78.0)


def test_half_power_point():
    assert antenna_gain(15.0, A) == pytest.approx(A.max_gain_db - 3.01, abs=1e-12)
    assert antenna_gain(0.0, A) == A.max_gain_db


def test_main_lobe_edge_uses_main_branch():
    edge = A.main_lobe / 2
    expected = A.max_gain_db - 3.01 * (2 * edge / A.beamwidth) ** 2
    assert antenna_gain(edge, A) == pytest.approx(expected)
    assert antenna_gain(edge + 1e-9, A) == A.side_lobe_db
    assert antenna_gain(180.0, A) == A.side_lobe_db


@pytest.mark.parametrize("theta", [-0.1, 180.5])
def test_angle_out_of_range(theta):
    with pytest.raises(ValueError):
        antenna_gain(theta, A)


@given(st.floats(0, 180), st.floats(0, 180))
def test_gain_non_increasing_in_main_lobe(a, b):
    lo, hi = sorted((a, b))
    if hi <= A.main_lobe / 2:
        assert antenna_gain(lo, A) >= antenna_gain(hi, A)


def test_off_axis_angle():
    assert off_axis_angle((0, 0), (1, 0), (0, 5)) == pytest.approx(90.0)
    assert off_axis_angle((0, 0), (1, 0), (-3, 0)) == pytest.approx(180.0)
    assert off_axis_angle((0, 0), (1, 1), (2, 2)) == pytest.approx(0.0, abs=1e-12)


def test_aligned_50m_reference_link():
    pos = {0: (0.0, 0.0), 1: (50.0, 0.0)}
    link = Link(0, 1)
    assert signal_power(link, pos, P, A) == pytest.approx(PR_50M_MW, rel=1e-6)
    assert sinr(link, [], pos, P, A) == pytest.approx(SNR_50M, rel=1e-6)
    assert link_rate(link, [], pos, P, A) == pytest.approx(RATE_50M, rel=1e-6)
    assert aligned_rate(50.0, P, A) == pytest.approx(RATE_50M, rel=1e-6)
    assert link_rate(link, [], pos, P, A, active=False) == 0.0


def test_100m_rate():
    assert aligned_rate(100.0, P, A) == pytest.approx(RATE_100M, rel=1e-6)


def test_worst_case_rate():
    pos = {0: (0.0, 0.0), 1: (50.0, 0.0)}
    assert worst_case_rate(Link(0, 1), pos, P, A, 1e-10) == pytest.approx(WORST_RATE_50M, rel=1e-6)
    assert worst_case_rate(Link(0, 1), pos, P, A, 0.0) == pytest.approx(RATE_50M, rel=1e-9)


def test_isotropic_override_is_plain_friis():
    got = received_power((0, 0), (10, 0), (0, 1), (10, 1), P, A, gain_override_db=(0.0, 0.0))
    assert got == pytest.approx(P.k0 * 10 ** -2 * P.tx_power)


def test_side_lobe_interference_example():
    # victim 0->1 along +x; interferer 2->3 points away, so both ends see side lobes
    pos = {0: (0.0, 0.0), 1: (20.0, 0.0), 2: (20.0, 30.0), 3: (20.0, 80.0)}
    gsl = 10 ** (A.side_lobe_db / 10)
    expected = P.k0 * gsl * gsl * 30.0 ** -2 * P.tx_power
    assert interference_power(Link(2, 3), Link(0, 1), pos, P, A) == pytest.approx(expected, rel=1e-12)


def test_interference_linear_in_rho():
    pos = {0: (0.0, 0.0), 1: (20.0, 0.0), 2: (40.0, 10.0), 3: (80.0, 10.0)}
    base = interference_power(Link(2, 3), Link(0, 1), pos, P, A)
    for rho in (0.25, 0.5, 1.0):
        got = interference_power(Link(2, 3), Link(0, 1), pos, P.replace(rho=rho), A)
        assert got == pytest.approx(rho * base, rel=1e-12)


def test_interferer_cannot_be_victim_receiver():
    pos = {0: (0.0, 0.0), 1: (20.0, 0.0), 2: (40.0, 0.0)}
    with pytest.raises(ValueError):
        interference_power(Link(1, 2), Link(0, 1), pos, P, A)


@given(st.floats(1e-3, 1e9), st.floats(1e-3, 1e9))
def test_rate_monotone_in_sinr(a, b):
    lo, hi = sorted((a, b))
    assert rate_from_sinr(lo, P) <= rate_from_sinr(hi, P)


def test_rate_from_sinr_shannon():
    assert rate_from_sinr(1.0, P) == pytest.approx(0.5 * 2160e6)
    assert rate_from_sinr(0.0, P) == 0.0


def test_radio_params_roundtrip_and_validation():
    d = P.to_dict()
    assert RadioParams.from_dict(d) == P
    q = RadioParams.from_dict({"tx_power_dbm": 20.0, "noise_dbm_per_mhz": -134.0})
    assert q.tx_power == pytest.approx(100.0)
    assert AntennaModel.from_dict(A.to_dict()) == A
    with pytest.raises(ValueError):
        RadioParams(bandwidth=-1.0)
    with pytest.raises(ValueError):
        AntennaModel(beamwidth=0.0)


def test_narrow_beam_raises_peak_gain():
    assert AntennaModel(10.0).max_gain_db > A.max_gain_db > AntennaModel(60.0).max_gain_db
    assert not math.isnan(AntennaModel(60.0).side_lobe_db)
