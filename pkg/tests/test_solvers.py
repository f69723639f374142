import numpy as np
import pytest

from dynbatch.harness.verify import zero_noise_bitwise
from dynbatch.numeric import make_stream
from dynbatch.oracle import OracleModel
from dynbatch.problems import deterministic_fista, make_quadratic, make_random_quadratic
from dynbatch.prox import ConstraintSpec, RegularizerSpec
from dynbatch.schedules import SmoothPolicy, StrongPolicy
from dynbatch.solvers import (RecordOptions, extrapolate, ledger_terms, run_accelerated,
                              run_prox_gradient, s_point)

NOISELESS = OracleModel("additive", sigma=0.0)


def test_extrapolate_examples():
    assert np.array_equal(extrapolate([5.0], [-3.0], 1.0, 1.5), [5.0])
    assert np.array_equal(extrapolate([2.0], [2.0], 3.0, 3.5), [2.0])
    assert extrapolate([2.0], [0.0], 2.0, 2.5) == pytest.approx([2.8])


def test_s_point_examples():
    assert np.array_equal(s_point([4.0], [1.0], 1.0), [4.0])
    assert np.array_equal(s_point([0.5, 1.0], [0.5, 1.0], 7.0), [0.5, 1.0])
    assert np.array_equal(s_point([1.0], [-1.0], 2.0), [3.0])


def test_ledger_examples():
    assert ledger_terms(np.zeros(2), np.ones(2), np.zeros(2), 0.5, 2.0, 1.0) == (0.0, 0.0)
    _, dM = ledger_terms(np.array([1.0, 0.0]), np.zeros(2), np.array([0.0, 4.0]), 0.5, 2.0, 1.0)
    assert dM == 0.0
    dA, dM = ledger_terms(np.array([1.0]), np.array([0.0]), np.array([3.0]), 0.5, 2.0, 1.0)
    assert (dA, dM) == (2.0, 6.0)
    with pytest.raises(ValueError):
        ledger_terms(np.ones(1), np.zeros(1), np.zeros(1), 1.0, 1.0, 1.0)


def scalar(oracle=NOISELESS):
    return make_quadratic([[2.0]], [-2.0], oracle)


def test_accelerated_first_step():
    # alpha = 0.75 / (2 + 2 / 2) = 0.25
    pol = SmoothPolicy(L=2.0, mu=0.75, a=2.0, N0=4)
    assert pol.alpha() == 0.25
    tr = run_accelerated(scalar(), None, pol, 3, None, make_stream(0),
                         RecordOptions(store_iterates=True))
    assert tr.iterates[0] == pytest.approx([0.5])
    ref = deterministic_fista(np.array([[2.0]]), np.array([-2.0]), RegularizerSpec(),
                              ConstraintSpec(), np.zeros(1), 0.25, 3)
    assert np.array_equal(tr.iterates, np.array(ref))


def test_prox_gradient_hand_iteration():
    pol = StrongPolicy(L=2.0, c=2.0, mu=0.5, zeta=0.9, phi_exo=0.1)
    tr = run_prox_gradient(scalar(), None, pol, 2, None, make_stream(0),
                           RecordOptions(store_iterates=True))
    assert tr.iterates[:, 0].tolist() == [0.5, 0.75]
    assert np.all(tr.beta_t == 1.0)
    assert np.array_equal(tr.s_dist_sq, tr.dist_sq)


def test_budget_exhausted_before_first_step():
    pol = SmoothPolicy(L=2.0, delta=0.0)
    assert pol.batch(1) == 64
    tr = run_accelerated(scalar(), None, pol, 5, 10, make_stream(0))
    assert tr.status == "budget_exhausted"
    assert len(tr) == 0 and tr.total_calls == 0


def test_budget_partial():
    pol = SmoothPolicy(L=2.0, delta=0.0)
    budget = pol.batch(1) + pol.batch(2) + 1
    tr = run_accelerated(scalar(), None, pol, 5, budget, make_stream(0))
    assert tr.status == "budget_exhausted" and len(tr) == 2


@pytest.fixture(scope="module")
def noisy():
    model = OracleModel("random_matrix", scale=0.2, vector_scale=0.3)
    return make_random_quadratic(5, {"L": 1.0, "c": 0.2}, model, ConstraintSpec.ball(np.zeros(5), 2.0),
                                 RegularizerSpec(), seed=2, rotate=True)


def test_accounting_and_contiguity(noisy):
    tr = run_accelerated(noisy, None, SmoothPolicy(L=noisy.L), 30, None, make_stream(1))
    assert tr.status == "completed"
    assert np.array_equal(tr.t, np.arange(1, 31))
    assert np.array_equal(np.diff(tr.cum_calls), tr.N_t[1:])
    assert tr.cum_calls[-1] == tr.N_t.sum()
    assert np.all(tr.gap >= -1e-12)


def test_iterates_feasible(noisy):
    tr = run_prox_gradient(noisy, None, StrongPolicy(L=1.0, c=0.2, zeta=0.95, phi_exo=0.01), 40,
                           None, make_stream(2), RecordOptions(store_iterates=True))
    assert all(noisy.cons.contains(x) for x in tr.iterates)


def test_determinism(noisy):
    pol = SmoothPolicy(L=noisy.L)
    a = run_accelerated(noisy, None, pol, 20, None, make_stream(9, (3,)))
    b = run_accelerated(noisy, None, pol, 20, None, make_stream(9, (3,)),
                        RecordOptions(store_iterates=False))
    for name in ("gap", "dist_sq", "delta_A", "delta_M", "cum_calls"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = run_accelerated(noisy, None, pol, 20, None, make_stream(9, (4,)))
    assert not np.array_equal(a.gap, c.gap)


def test_iterate_storage_gate():
    assert RecordOptions().stores(50) and not RecordOptions().stores(51)
    assert RecordOptions(store_iterates=True).stores(1000)


def test_numerical_failure_is_a_status():
    p = scalar(OracleModel("additive", sigma=1e308))
    tr = run_accelerated(p, None, SmoothPolicy(L=2.0, N0=1), 5, None, make_stream(0))
    assert tr.status == "numerical_failure"


def test_rank_deficient_rejected():
    p = make_random_quadratic(3, {"L": 1.0, "rank_deficient": True}, NOISELESS)
    with pytest.raises(ValueError):
        run_prox_gradient(p, None, StrongPolicy(L=1.0, c=0.5, phi_exo=0.01, zeta=0.9), 3, None,
                          make_stream(0))


def test_zero_noise_contraction():
    p = make_random_quadratic(6, {"L": 1.0, "c": 0.1}, NOISELESS, seed=1, rotate=True)
    pol = StrongPolicy(L=1.0, c=0.1, zeta=0.99, phi_exo=0.01)
    tr = run_prox_gradient(p, None, pol, 50, None, make_stream(0), x0=np.ones(6))
    d = np.sqrt(np.concatenate([[tr.init_dist_sq], tr.dist_sq]))
    assert np.all(d[1:] <= (1 - 0.05) * d[:-1] * (1 + 1e-12))


def test_zero_noise_bitwise():
    assert zero_noise_bitwise(T=60, d=6)
