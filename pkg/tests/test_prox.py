import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynbatch.harness.verify import grid_prox_error, three_point_violations
from dynbatch.prox import (ConstraintSpec, RegularizerSpec, UnsupportedProxError, prox_step,
                           reg_value, supported)

ALL = ConstraintSpec()


def test_plain_gradient_step():
    out = prox_step(RegularizerSpec(), ALL, np.array([1.0, 1.0]), np.array([2.0, 0.0]), 0.5)
    assert np.array_equal(out, [0.0, 1.0])


def test_l1_soft_threshold():
    v = np.array([2.0, -0.5, 0.0])
    out = prox_step(RegularizerSpec("l1", 1.0), ALL, v, np.zeros(3), 1.0)
    assert np.array_equal(out, [1.0, 0.0, 0.0])


def test_squared_l2_shrink():
    out = prox_step(RegularizerSpec("squared_l2", 0.5), ALL, np.array([3.0]), np.array([1.0]), 1.0)
    assert out[0] == pytest.approx(1.0)


def test_reg_values():
    assert reg_value(RegularizerSpec(), np.array([3.0, -1.0])) == 0.0
    assert reg_value(RegularizerSpec("l1", 2.0), np.array([1.0, -3.0])) == 8.0
    assert reg_value(RegularizerSpec("elastic_net", 1.0, 1.0), np.array([1.0, 1.0])) == 4.0


def test_support_table():
    ball = ConstraintSpec.ball(np.zeros(2), 1.0)
    assert supported(RegularizerSpec("l1", 1.0), ALL)
    assert not supported(RegularizerSpec("l1", 1.0), ball)
    assert supported(RegularizerSpec(), ball)
    for kind in ("zero", "l1", "squared_l2", "elastic_net"):
        assert supported(RegularizerSpec(kind), ConstraintSpec.box(-np.ones(2), np.ones(2)))


def test_unsupported_and_bad_alpha():
    ball = ConstraintSpec.ball(np.zeros(2), 1.0)
    with pytest.raises(UnsupportedProxError):
        prox_step(RegularizerSpec("l1", 1.0), ball, np.zeros(2), np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        prox_step(RegularizerSpec(), ALL, np.zeros(2), np.zeros(2), 0.0)


def test_invalid_specs():
    with pytest.raises(ValueError):
        RegularizerSpec("l2")
    with pytest.raises(ValueError):
        RegularizerSpec("l1", -1.0)
    with pytest.raises(ValueError):
        ConstraintSpec.box(np.ones(2), np.zeros(2))


def test_ball_projection_feasible():
    ball = ConstraintSpec.ball(np.array([1.0, 0.0]), 2.0)
    out = prox_step(RegularizerSpec(), ball, np.array([10.0, 10.0]), np.zeros(2), 1.0)
    assert ball.contains(out)
    assert np.linalg.norm(out - [1.0, 0.0]) == pytest.approx(2.0)


@pytest.mark.parametrize("reg", [RegularizerSpec(), RegularizerSpec("l1", 0.7),
                                 RegularizerSpec("squared_l2", 0.4),
                                 RegularizerSpec("elastic_net", 0.3, 0.5)])
@pytest.mark.parametrize("cons", [ALL, ConstraintSpec.box(np.full(3, -0.5), np.full(3, 0.8))])
def test_three_point_inequality(reg, cons):
    bad, worst = three_point_violations(reg, cons, 20_000, 3, np.random.default_rng(0))
    assert bad == 0, worst


def test_three_point_inequality_ball():
    cons = ConstraintSpec.ball(np.zeros(3), 1.0)
    bad, _ = three_point_violations(RegularizerSpec(), cons, 20_000, 3, np.random.default_rng(1))
    assert bad == 0


@pytest.mark.parametrize("reg", [RegularizerSpec(), RegularizerSpec("l1", 0.7),
                                 RegularizerSpec("squared_l2", 0.4),
                                 RegularizerSpec("elastic_net", 0.3, 0.5)])
def test_grid_oracle_1d(reg):
    grid = np.linspace(-2, 2, 400_001)
    res = grid[1] - grid[0]
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = rng.uniform(0.2, 2.0)
        err = grid_prox_error(reg, ALL, rng.uniform(-1, 1), rng.uniform(-0.5, 0.5) / a, a, grid)
        assert err <= 1.5 * res


vec3 = st.lists(st.floats(-50, 50), min_size=3, max_size=3).map(np.array)


@given(vec3, vec3, vec3, vec3, st.floats(1e-3, 10))
def test_nonexpansive(y, u, y2, u2, a):
    for reg in (RegularizerSpec("l1", 0.3), RegularizerSpec("elastic_net", 0.2, 0.1)):
        cons = ConstraintSpec.box(np.full(3, -1.0), np.full(3, 2.0))
        lhs = np.linalg.norm(prox_step(reg, cons, y, u, a) - prox_step(reg, cons, y2, u2, a))
        assert lhs <= np.linalg.norm((y - a * u) - (y2 - a * u2)) + 1e-12


@given(vec3, vec3, st.floats(1e-3, 10))
def test_output_feasible(y, u, a):
    box = ConstraintSpec.box(np.full(3, -1.0), np.full(3, 2.0))
    ball = ConstraintSpec.ball(np.ones(3), 0.5)
    assert box.contains(prox_step(RegularizerSpec("l1", 0.5), box, y, u, a))
    assert ball.contains(prox_step(RegularizerSpec(), ball, y, u, a))


def test_stacked_inputs_match_rowwise():
    rng = np.random.default_rng(5)
    y, u = rng.normal(size=(2, 6, 4))
    alpha = rng.uniform(0.1, 2, size=(6, 1))
    reg = RegularizerSpec("elastic_net", 0.2, 0.3)
    cons = ConstraintSpec.box(-np.ones(4), np.ones(4))
    stacked = prox_step(reg, cons, y, u, alpha)
    for i in range(6):
        assert np.array_equal(stacked[i], prox_step(reg, cons, y[i], u[i], alpha[i, 0]))
