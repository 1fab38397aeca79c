import math

import numpy as np
import pytest

from dqanneal.protocols import NSDQA, QA, SQS, lz_estimate, protocol_from_dict


@pytest.mark.parametrize("proto", [
    QA(T=10.0),
    NSDQA(T=10.0, j_xx=0.7),
    SQS(T=10.0, t_q=8.0, dT_q=3.0, B_q=0.4),
])
def test_start_is_pure_driver(proto):
    assert proto.coefficients(0.0) == (1.0, 0.0, 0.0)


@pytest.mark.parametrize("proto", [
    QA(T=7.0),
    NSDQA(T=7.0, j_xx=0.7),
    SQS(T=7.0, t_q=5.0, dT_q=2.5, B_q=0.4),
])
def test_a_plus_b_is_one(proto):
    for t in np.linspace(0.0, proto.total_time, 97):
        A, B, _ = proto.coefficients(t)
        assert A + B == pytest.approx(1.0, abs=1e-14)


def test_total_times():
    assert QA(T=10.0).total_time == 10.0
    assert NSDQA(T=10.0, j_xx=0.1).total_time == 10.0
    assert SQS(T=10.0, t_q=8.0, dT_q=4.0, B_q=0.5).total_time == 14.0


def test_nsdqa_catalyst_is_ab():
    proto = NSDQA(T=4.0, j_xx=0.5)
    A, B, C = proto.coefficients(1.0)
    assert C == pytest.approx(A * B)
    assert proto.coefficients(2.0)[2] == pytest.approx(0.25)


def test_sqs_quench_window():
    proto = SQS(T=10.0, t_q=8.0, dT_q=3.0, B_q=0.4)
    # half-open window [t_q, t_q + dT_q)
    assert proto.coefficients(8.0)[1] == 0.4
    assert proto.coefficients(10.9)[1] == 0.4
    assert proto.coefficients(11.0)[1] == pytest.approx(0.8)
    assert proto.coefficients(7.999)[1] == pytest.approx(0.7999)
    assert proto.coefficients(13.0)[1] == pytest.approx(1.0)


def test_sqs_resumes_where_it_left_off():
    proto = SQS(T=10.0, t_q=8.0, dT_q=3.0, B_q=0.4)
    eps = 1e-9
    assert proto.coefficients(11.0 + eps)[1] == pytest.approx(0.8, abs=1e-8)


def test_sqs_zero_quench_equals_qa():
    sqs = SQS(T=10.0, t_q=5.0, dT_q=0.0, B_q=0.3)
    qa = QA(T=10.0)
    for t in np.linspace(0.0, 10.0, 101):
        assert sqs.coefficients(t) == pytest.approx(qa.coefficients(t))


def test_exactly_two_discontinuities():
    proto = SQS(T=10.0, t_q=8.0, dT_q=3.0, B_q=0.4)
    assert proto.discontinuities() == [8.0, 11.0]
    assert QA(T=10.0).discontinuities() == []


def test_time_out_of_range_rejected():
    with pytest.raises(ValueError):
        QA(T=10.0).coefficients(10.5)
    with pytest.raises(ValueError):
        QA(T=10.0).coefficients(-0.5)


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        QA(T=0.0)
    with pytest.raises(ValueError):
        SQS(T=10.0, t_q=11.0, dT_q=1.0, B_q=0.5)
    with pytest.raises(ValueError):
        SQS(T=10.0, t_q=5.0, dT_q=-1.0, B_q=0.5)
    with pytest.raises(ValueError):
        SQS(T=10.0, t_q=5.0, dT_q=1.0, B_q=1.5)


def test_lz_estimate():
    assert lz_estimate(0.7, 100.0, 0.0) == 0.7
    assert lz_estimate(1.0, 2000.0, 1e-4) == pytest.approx(math.exp(-2e-5))
    assert lz_estimate(1.0, 1e9, 0.1) < 1e-300
    # chained: excitation then return through a second crossing
    p_exc = lz_estimate(1.0, 100.0, 0.01)
    assert lz_estimate(p_exc, 100.0, 0.02) == pytest.approx(p_exc * math.exp(-100 * 4e-4))


def test_lz_estimate_validation():
    with pytest.raises(ValueError):
        lz_estimate(1.5, 1.0, 0.1)
    with pytest.raises(ValueError):
        lz_estimate(0.5, -1.0, 0.1)
    with pytest.raises(ValueError):
        lz_estimate(0.5, 1.0, -0.1)


@pytest.mark.parametrize("proto", [
    QA(T=12.0),
    NSDQA(T=12.0, j_xx=0.3),
    SQS(T=12.0, t_q=9.0, dT_q=2.0, B_q=0.55),
])
def test_dict_round_trip(proto):
    assert protocol_from_dict(proto.to_dict()) == proto
