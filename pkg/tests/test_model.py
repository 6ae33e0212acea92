import numpy as np
import pytest

from prsamp.model import (
    BINARY01,
    BinaryPrior,
    ChannelSpec,
    ComplexSignal,
    GaussianPrior,
    MeasurementMatrix,
    ProblemInstance,
    SolverConfig,
    validate,
)


def _instance(y=(1.0, 0.5), kind="custom", h=((1, 0), (0, 1))):
    return ProblemInstance(MeasurementMatrix(np.array(h), kind), np.array(y), 0.0)


def test_well_formed_instance_has_no_violations():
    assert validate(_instance()) == []


def test_negative_measurement_reported_once():
    assert validate(_instance(y=(1.0, -0.5))) == ["y: y[mu] >= 0"]


def test_fractional_entry_in_binary_matrix():
    problems = validate(_instance(kind=BINARY01, h=((1, 0.5), (0, 1))))
    assert problems == ["matrix.entries: entries in {0,1}"]


def test_validate_is_pure():
    inst = _instance(y=(np.nan, -1.0), kind=BINARY01, h=((2, 0), (0, 1)))
    assert validate(inst) == validate(inst)
    assert len(validate(inst)) == 3


def test_length_and_truth_checks():
    inst = ProblemInstance(MeasurementMatrix(np.eye(2)), np.ones(3), -1.0,
                           ComplexSignal(np.ones(3)))
    problems = validate(inst)
    assert "y: length(y) = M" in problems
    assert "delta: delta >= 0" in problems
    assert "ground_truth: length N matches matrix" in problems


def test_signal_shape_violation():
    assert ComplexSignal(np.ones(6), (2, 2)).violations() == ["signal.shape2d: rows*cols = N"]
    assert ComplexSignal(np.ones(6), (2, 3)).violations() == []


def test_cached_abs2():
    h = np.array([[1 + 2j, -0.5j], [3, 0]])
    assert np.allclose(MeasurementMatrix(h).abs2, np.abs(h) ** 2, rtol=1e-12, atol=0)


def test_complex_measurements_mark_linear_instance():
    assert ProblemInstance(MeasurementMatrix(np.eye(2)), np.array([1j, 2])).linear
    assert not _instance().linear


@pytest.mark.parametrize("changes", [
    dict(alpha=1.0), dict(alpha=-0.1), dict(alpha2d=1.0), dict(xv0=0.0), dict(xv0=1.5),
    dict(t_max=0), dict(restarts=0), dict(epsilon=0.0), dict(v0=-1.0), dict(seed=-1),
    dict(seed=2**64), dict(x0="zeros"), dict(clamp_vmin=0.0),
])
def test_config_rejects_out_of_range(changes):
    with pytest.raises(ValueError):
        SolverConfig(**changes)


def test_prior_and_channel_rules():
    with pytest.raises(ValueError):
        GaussianPrior(0, 0)
    with pytest.raises(ValueError):
        BinaryPrior(1.0)
    with pytest.raises(ValueError):
        ChannelSpec("poisson")
    with pytest.raises(ValueError):
        ChannelSpec("rician", -1e-3)


def test_config_defaults_resolve():
    cfg = SolverConfig(xv0=0.3)
    assert cfg.resolved_v0() == 0.3
    assert cfg.resolved_epsilon(50) == pytest.approx(5e-7)
    assert cfg.replace(epsilon=1e-3).resolved_epsilon(50) == 1e-3
