import numpy as np
import pytest

from app.bench.blackbox import BlackboxModel, blackbox_eval
from app.bench.problems import ModelSpec, build_model, eval_p1
from app.helpers.errors import ConfigError, ModelError
from app.methods.estimators import stage_estimate
from app.methods.stratification import Stratification, bisect


def test_echo_model(fixture_cmd):
    assert blackbox_eval(fixture_cmd("echo_model.py"), (0.1, 0.9)) == 0.5


def test_p1_round_trip_is_exact(fixture_cmd, rng):
    pts = rng.random((1000, 2))
    with BlackboxModel(fixture_cmd("p1_model.py", "0.3", "0.1"), 2) as model:
        values = model(pts)
    assert np.array_equal(values, eval_p1(pts, 0.3, 0.1))


@pytest.mark.parametrize("script, raw", [("nan_model.py", "nan\n"), ("garbage_model.py", "result: ok\n"),
                                         ("exit_model.py", "")])
def test_protocol_failures(fixture_cmd, script, raw):
    with BlackboxModel(fixture_cmd(script), 2) as model:
        with pytest.raises(ModelError) as info:
            model(np.array([[0.25, 0.75]]))
    assert info.value.point == [0.25, 0.75]
    assert info.value.raw == raw


def test_missing_program():
    with BlackboxModel(["/nonexistent/model-binary"], 2) as model:
        with pytest.raises(ModelError):
            model(np.array([[0.5, 0.5]]))


def test_wrong_point_dimension(fixture_cmd):
    with BlackboxModel(fixture_cmd("echo_model.py"), 3) as model:
        with pytest.raises(ModelError):
            model(np.array([[0.5, 0.5]]))


def test_bad_construction():
    with pytest.raises(ConfigError):
        BlackboxModel([], 2)
    with pytest.raises(ConfigError):
        BlackboxModel(["model"], 0)


def test_close_stops_the_child(fixture_cmd):
    model = BlackboxModel(fixture_cmd("echo_model.py"), 2)
    model(np.array([[0.5, 0.5]]))
    proc = model._proc
    model.close()
    assert proc.poll() is not None
    model.close()


def test_stage_over_a_blackbox_matches_the_builtin(fixture_cmd):
    command = " ".join(f'"{part}"' for part in fixture_cmd("p1_model.py"))
    strat = bisect(Stratification.trivial(2), 0, 0)
    with build_model(ModelSpec("blackbox", 2, command=command)) as model:
        external = stage_estimate(strat, model, 20, 2, 7, workers=2)
    builtin = stage_estimate(strat, build_model(ModelSpec("p1", 2)), 20, 2, 7)
    assert external.mean == builtin.mean
    assert external.variance == builtin.variance


def test_silent_child_times_out_and_is_stopped(fixture_cmd):
    model = BlackboxModel(fixture_cmd("hang_model.py"), 2, terminate_timeout=0.5, read_timeout=0.5)
    proc = model._ensure_started()
    with pytest.raises(ModelError) as info:
        model(np.array([[0.25, 0.75]]))
    assert "no blackbox response" in str(info.value)
    assert info.value.point == [0.25, 0.75]
    assert proc.poll() is not None
    assert model._proc is None
    model.close()


def test_model_restarts_after_being_stopped(fixture_cmd):
    with BlackboxModel(fixture_cmd("echo_model.py"), 2, read_timeout=30.0) as model:
        model._stop(*model._detach())
        assert model(np.array([[0.5, 0.5]]))[0] == 0.5


def test_read_timeout_must_be_positive():
    with pytest.raises(ConfigError):
        BlackboxModel(["model"], 2, read_timeout=0.0)
