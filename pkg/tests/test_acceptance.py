"""End-to-end acceptance criteria, one test and one PASS/FAIL line each.

Run directly (``python tests/test_acceptance.py``) to print just the lines.
"""

import pytest

from dynbatch.harness.verify import verify

# criterion -> (title, [(suite, check), ...])
CRITERIA = {
    1: ("accelerated rate exponent", [("theorem1", "gap_rate_exponent")]),
    2: ("accelerated bound audit", [("theorem1", "gap_bound_audit")]),
    3: ("unbounded variance convergence", [("theorem1", "unbounded_variance_decay")]),
    4: ("strongly convex linear rate", [("theorem2", "linear_rate_bound"),
                                        ("theorem2", "geometric_ratio")]),
    5: ("strongly convex oracle complexity", [("complexity", "strong_complexity_slope")]),
    6: ("smooth oracle complexity", [("complexity", "smooth_complexity_slope"),
                                     ("schedules", "batch_growth_law")]),
    7: ("mini-batch error decay", [("oracle", "decay_bound"), ("oracle", "halving_per_4x")]),
    8: ("martingale increments", [("theorem1", "martingale_increments")]),
    9: ("prox properties", [("prox", "three_point_inequality"), ("prox", "grid_oracle_1d")]),
    10: ("deterministic reductions", [("theorem1", "zero_noise_bitwise"),
                                      ("theorem2", "zero_noise_contraction")]),
    11: ("schedule certificates", [("schedules", "t0_smooth_certificate"),
                                   ("schedules", "t0_strong_certificate"),
                                   ("schedules", "linear_beta_residual"),
                                   ("schedules", "t0_clamp_delta44")]),
}

SEED = 0
_reports = {}


def report(suite):
    if suite not in _reports:
        _reports[suite] = verify(suite, seed=SEED)
    return _reports[suite]


def evaluate(n):
    title, checks = CRITERIA[n]
    results = [report(suite).get(name) for suite, name in checks]
    passed = all(c.passed for c in results)
    detail = "; ".join(f"{c.name}={c.value}" for c in results)
    return passed, f"{'PASS' if passed else 'FAIL'} criterion {n:2d} {title}: {detail}"


@pytest.mark.acceptance
@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, acceptance_log):
    passed, line = evaluate(n)
    print(line)
    acceptance_log.append(line)
    assert passed, line


if __name__ == "__main__":
    import sys

    ok = True
    for n in sorted(CRITERIA):
        passed, line = evaluate(n)
        ok &= passed
        print(line, flush=True)
    sys.exit(0 if ok else 1)
