"""Shared solver contracts: orthonormal exactness, the planted
compressive-sensing instance, feasibility/monotonicity/termination
invariants, warm starts, and permutation equivariance."""

import numpy as np
import pytest

import sco
from sco import models
from sco.autodiff import build_objective
from sco.problem import ScoProblem, SolverConfig, restricted_minimize, validate_solution
from sco.solvers import SolverKind, solve

ALL_KINDS = list(SolverKind)
MONOTONE = [SolverKind.FORWARD, SolverKind.OMP, SolverKind.FOBA, SolverKind.SCOPE,
            SolverKind.IHT, SolverKind.HTP]


def _ols_problem(X, y, s, **kw):
    def make(Xm, restrict):
        def program(th):
            return 0.5 * sco.sqnorm(y - Xm @ th)

        return build_objective(program, Xm.shape[1], scale="rss", restrict=restrict)

    oracle = make(X, lambda cols: make(X[:, cols], None))
    return ScoProblem(p=X.shape[1], s=s, oracle=oracle, n=X.shape[0], **kw)


def _orthonormal_instance(seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((20, 10)))
    y = rng.standard_normal(20) * 3.0
    return Q, y


def test_registry_covers_every_kind():
    from sco.solvers import _REGISTRY

    assert set(_REGISTRY) == set(SolverKind)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_orthonormal_design_exact(kind):
    # coordinatewise-separable problem: the solution is the hard-thresholded
    # coefficient vector Q'y, support = its three largest magnitudes
    Q, y = _orthonormal_instance(123)
    coef = Q.T @ y
    expect = np.argsort(-np.abs(coef), kind="stable")[:3]
    prob = _ols_problem(Q, y, 3)
    sol = solve(kind, prob)
    validate_solution(prob, sol)
    assert np.array_equal(sol.support, np.sort(expect)), kind
    assert np.max(np.abs(sol.params[sol.support] - coef[sol.support])) <= 1e-8


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_planted_compressive_sensing(kind):
    # noiseless planted coefficients (9.71, 19.16, 13.53) at (3, 4, 7)
    rng = np.random.default_rng(42)
    X = rng.standard_normal((100, 10))
    coef = np.zeros(10)
    coef[[3, 4, 7]] = [9.71, 19.16, 13.53]
    y = X @ coef
    prob = _ols_problem(X, y, 3)
    sol = solve(kind, prob)
    assert np.array_equal(sol.support, [3, 4, 7]), kind
    assert np.max(np.abs(sol.params - coef)) <= 1e-4


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_feasibility_and_validation(kind):
    spec = models.ModelSpec("linear", 40, 12, 4, 5.0, seed=9)
    ds = models.generate(spec)
    prob = models.build_problem(ds, s=4)
    sol = solve(kind, prob)
    validate_solution(prob, sol)
    assert len(sol.support) <= 4


@pytest.mark.parametrize("kind", MONOTONE)
def test_monotone_trace(kind):
    spec = models.ModelSpec("linear", 50, 15, 4, 3.0, seed=2)
    ds = models.generate(spec)
    prob = models.build_problem(ds, s=4)
    sol = solve(kind, prob)
    objs = [e.objective for e in sol.trace]
    for a, b in zip(objs, objs[1:]):
        assert b <= a + 1e-9 * (1.0 + abs(a)), (kind, objs)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_termination_on_nonconvex_objective(kind):
    # double-well plus kink: many stationary points, bounded below
    def prog(th):
        return sco.vsum(0.25 * th ** 4.0 - 0.5 * th ** 2.0) + 0.1 * sco.vsum(abs(th))

    oracle = build_objective(prog, 8)
    prob = ScoProblem(p=8, s=3, oracle=oracle, n=8)
    cfg = SolverConfig(max_iter=7)
    sol = solve(kind, prob, cfg)
    validate_solution(prob, sol)
    assert sol.iterations <= 7


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_warm_start_consistency(kind):
    spec = models.ModelSpec("linear", 60, 20, 5, 5.0, seed=4)
    ds = models.generate(spec)
    prob = models.build_problem(ds, s=5)
    first = solve(kind, prob)
    again = solve(kind, prob, SolverConfig(warm_start=first.params))
    assert again.objective <= first.objective + 1e-10, kind


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_permutation_equivariance(kind):
    rng = np.random.default_rng(8)
    X = rng.standard_normal((40, 12))
    y = rng.standard_normal(40)
    perm = rng.permutation(12)
    base = solve(kind, _ols_problem(X, y, 3))
    permuted = solve(kind, _ols_problem(X[:, perm], y, 3))
    assert np.array_equal(np.sort(perm[permuted.support]), base.support), kind


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_full_budget_matches_unconstrained(kind):
    rng = np.random.default_rng(14)
    X = rng.standard_normal((30, 8))
    y = rng.standard_normal(30)
    prob = _ols_problem(X, y, 8)
    full = restricted_minimize(prob, np.arange(8), None)
    f_star = prob.oracle.value(full.params)
    sol = solve(kind, prob)
    assert sol.objective <= f_star + 1e-6, kind


@pytest.mark.parametrize("kind", [SolverKind.SCOPE, SolverKind.OMP, SolverKind.IHT,
                                  SolverKind.FOBA])
def test_preselect_always_active(kind):
    rng = np.random.default_rng(21)
    X = rng.standard_normal((40, 6))
    theta = np.array([2.0, 0.0, -3.0, 0.0, 1.5, 0.0])
    y = X @ theta + 0.05 * rng.standard_normal(40)
    prob = _ols_problem(X, y, 2, preselect=[0])
    sol = solve(kind, prob)
    validate_solution(prob, sol)
    assert 0 not in sol.support  # preselected coordinates are not listed
    assert len(sol.support) <= 2
    assert sol.params[0] != 0.0  # but they are fitted


@pytest.mark.parametrize("kind", [SolverKind.SCOPE, SolverKind.OMP, SolverKind.IHT])
def test_group_structure_respected(kind):
    rng = np.random.default_rng(31)
    p, n = 12, 80
    groups = np.repeat(np.arange(6), 2)
    X = rng.standard_normal((n, p))
    theta = np.zeros(p)
    theta[[4, 5, 8, 9]] = [2.0, -1.5, 1.8, 2.2]  # groups 2 and 4
    y = X @ theta + 0.05 * rng.standard_normal(n)
    prob = _ols_problem(X, y, 2, groups=groups)
    sol = solve(kind, prob)
    validate_solution(prob, sol)
    assert np.array_equal(sol.support, [4, 5, 8, 9]), kind


def test_scope_and_foba_match_exhaustive_smoke():
    from sco.bench import exhaustive_oracle

    hits = {SolverKind.SCOPE: 0, SolverKind.FOBA: 0}
    for seed in range(10):
        spec = models.ModelSpec("linear", 40, 10, 3, 5.0, seed=seed)
        ds = models.generate(spec)
        prob = models.build_problem(ds, s=3)
        best = exhaustive_oracle(prob)
        for kind in hits:
            sol = solve(kind, prob)
            assert sol.objective >= best.objective - 1e-9
            if sol.objective <= best.objective + 1e-6:
                hits[kind] += 1
    assert hits[SolverKind.SCOPE] >= 8
    assert hits[SolverKind.FOBA] >= 8


def test_solve_rejects_bad_input():
    with pytest.raises(ValueError):
        solve("nonsense", None)
    with pytest.raises(TypeError):
        solve("omp", "not a problem")
