import csv

import pytest
from hypothesis import given
from hypothesis import strategies as st

from grasslab.motor import (
    CONTROL_TICK_S,
    DrivetrainParams,
    HomingError,
    MotorState,
    PdGains,
    Setpoint,
    count_to_mm,
    home,
    mm_to_count,
    pd_step,
    ramp_tracking_test,
    write_trace_csv,
)

PARAMS = DrivetrainParams()


def homed_state(params: DrivetrainParams = PARAMS) -> MotorState:
    state = MotorState(params=params)
    state.homed = True
    return state


def test_gain_is_reciprocal_of_resolution():
    assert abs(PARAMS.gain_count_per_mm * PARAMS.encoder_resolution_mm_per_count - 1.0) <= 1e-9


def test_max_count_is_146():
    assert PARAMS.max_count == 146


def test_inconsistent_gain_rejected():
    with pytest.raises(ValueError):
        DrivetrainParams(gain_count_per_mm=7.2)


def test_mm_to_count_endpoints():
    assert mm_to_count(20.0, PARAMS) == 146
    assert mm_to_count(0.0, PARAMS) == 0
    assert mm_to_count(10.0, PARAMS) == 73


def test_mm_to_count_truncates():
    # 1.0 mm * 7.3 = 7.3 -> cast to 7
    assert mm_to_count(1.0, PARAMS) == 7
    assert mm_to_count(0.99, PARAMS) == 7  # 7.227
    assert mm_to_count(0.13, PARAMS) == 0


def test_mm_to_count_out_of_range():
    with pytest.raises(ValueError):
        mm_to_count(-0.01, PARAMS)
    with pytest.raises(ValueError):
        mm_to_count(20.5, PARAMS)


def test_count_roundtrip_identity_all_counts():
    for c in range(0, 147):
        assert mm_to_count(count_to_mm(c, PARAMS), PARAMS) == c


@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_mm_to_count_monotone(l1, l2):
    lo, hi = sorted((l1, l2))
    assert mm_to_count(lo, PARAMS) <= mm_to_count(hi, PARAMS)


def test_lengths_closer_than_resolution_collide():
    # Two lengths inside one encoder step map to the same count.
    assert mm_to_count(1.38, PARAMS) == mm_to_count(1.50, PARAMS) == 10


def test_setpoint_range():
    Setpoint(0)
    Setpoint(146)
    with pytest.raises(ValueError):
        Setpoint(147)
    with pytest.raises(ValueError):
        Setpoint(-1)


def test_pd_step_requires_homed():
    state = MotorState(params=PARAMS)
    with pytest.raises(RuntimeError):
        pd_step(state, Setpoint(10), PdGains())


def test_zero_error_is_a_fixed_point():
    state = homed_state()
    pd_step(state, Setpoint(0), PdGains())
    assert state.pwm == 0
    assert state.position_count == 0
    assert state.velocity_counts_per_s == 0.0


def test_step_response_converges_without_oscillation():
    state = homed_state()
    gains = PdGains()
    sp = Setpoint(146)
    pv_history = []
    for _ in range(500):  # 0.5 s
        pd_step(state, sp, gains)
        pv_history.append(state.position_count)
    # converged within 0.1 s ...
    assert abs(146 - pv_history[99]) <= 1
    # ... and holds there with no pv movement at all afterwards
    tail = pv_history[100:]
    assert all(pv == tail[0] for pv in tail)
    assert abs(146 - tail[0]) <= 1


def test_slow_ramp_tracks_within_three_counts():
    result = ramp_tracking_test(homed_state(), fps=1)
    assert result.max_abs_error <= 3


@pytest.mark.parametrize("fps,expected", [(1, True), (10, True), (11, False)])
def test_tracking_boundary(fps, expected):
    result = ramp_tracking_test(homed_state(), fps=fps)
    assert result.passed is expected


def test_tracking_requires_homed():
    with pytest.raises(RuntimeError):
        ramp_tracking_test(MotorState(params=PARAMS), fps=1)


def test_pd_loop_deterministic():
    t1 = ramp_tracking_test(homed_state(), fps=10).trace
    t2 = ramp_tracking_test(homed_state(), fps=10).trace
    assert t1 == t2


def test_encoder_count_stays_in_travel_range():
    state = homed_state()
    gains = PdGains()
    # slam between the extremes
    for sp_count in (146, 0, 146, 0):
        sp = Setpoint(sp_count)
        for _ in range(80):
            pd_step(state, sp, gains)
            assert 0 <= state.position_count <= 146


def test_home_when_already_at_origin():
    state = MotorState(params=PARAMS)
    home(state)
    assert state.homed
    assert state.position_count == 0


def test_home_from_mid_travel():
    state = MotorState(params=PARAMS)
    state.shaft_counts = 100.0
    state.position_count = 100
    home(state)
    assert state.homed
    assert state.position_count == 0
    assert state.shaft_counts == 0.0


def test_home_timeout_with_dead_motor():
    params = DrivetrainParams(no_load_speed_counts_per_s=0.0)
    state = MotorState(params=params)
    state.shaft_counts = 50.0
    state.position_count = 50
    with pytest.raises(HomingError):
        home(state, timeout_s=0.5)


def test_gains_validation():
    with pytest.raises(ValueError):
        PdGains(p=0.0)
    with pytest.raises(ValueError):
        PdGains(d=-1.0)


def test_trace_csv_export(tmp_path):
    result = ramp_tracking_test(homed_state(), fps=10)
    out = tmp_path / "trace.csv"
    write_trace_csv(result.trace, out)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t_s", "sp_count", "pv_count", "pwm"]
    assert len(rows) - 1 == len(result.trace)
    assert int(rows[1][1]) == result.trace[0][1]


def test_tick_constant():
    assert CONTROL_TICK_S == 0.001
