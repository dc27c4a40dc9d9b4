"""Problem and solution types plus the active-set building blocks every
solver shares: selectable-unit bookkeeping (groups, preselected
coordinates), hard thresholding onto the sparsity budget, and a
limited-memory quasi-Newton minimizer over a fixed support.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .autodiff import ObjectiveOracle

__all__ = [
    "SolverConfig",
    "GroupView",
    "ScoProblem",
    "ScoSolution",
    "RestrictedResult",
    "hard_threshold",
    "top_units",
    "project_feasible",
    "restricted_minimize",
    "validate_solution",
]


@dataclass(frozen=True)
class SolverConfig:
    """Shared solver knobs.

    ``step_size`` is the starting point of the backtracking gradient step
    used by the thresholding solvers (None means backtrack from 1.0).
    ``warm_start`` initializes the iterate / active set when given.
    ``foba_backward_ratio`` is the fraction of the last forward gain below
    which a backward deletion is accepted.
    """

    max_iter: int = 100
    tol: float = 1e-8
    step_size: Optional[float] = None
    inner_max_iter: int = 100
    inner_tol: float = 1e-8
    seed: Optional[int] = None
    warm_start: Optional[np.ndarray] = None
    foba_backward_ratio: float = 0.5

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.inner_max_iter < 1:
            raise ValueError("inner_max_iter must be at least 1")
        if not self.tol > 0.0 or not self.inner_tol > 0.0:
            raise ValueError("tolerances must be positive")
        if self.step_size is not None and not self.step_size > 0.0:
            raise ValueError("step_size must be positive")
        if not 0.0 <= self.foba_backward_ratio:
            raise ValueError("foba_backward_ratio must be nonnegative")
        if self.warm_start is not None:
            object.__setattr__(self, "warm_start", np.asarray(self.warm_start, dtype=float))


class GroupView:
    """Selectable units of a problem.

    A unit is a group of coordinates (or a single coordinate when the
    problem is ungrouped); units partition {0..p-1} minus the preselected
    coordinates, and the sparsity budget counts units.
    """

    def __init__(self, p, groups=None, preselect=None):
        self.p = int(p)
        pre = np.asarray([] if preselect is None else preselect, dtype=int)
        selectable = np.ones(self.p, dtype=bool)
        selectable[pre] = False
        self._sel = np.flatnonzero(selectable)
        if groups is None:
            self.singleton = True
            self.n_units = len(self._sel)
            self._unit_coords = None
            unit_of = np.full(self.p, -1, dtype=int)
            unit_of[self._sel] = np.arange(self.n_units)
            self.unit_of = unit_of
        else:
            groups = np.asarray(groups, dtype=int)
            self.singleton = False
            gids = sorted(set(int(g) for g in groups[self._sel]))
            self._unit_coords = []
            unit_of = np.full(self.p, -1, dtype=int)
            for u, gid in enumerate(gids):
                coords = np.flatnonzero((groups == gid) & selectable)
                self._unit_coords.append(coords)
                unit_of[coords] = u
            gsel = unit_of[self._sel]
            self._gsel = gsel
            self.n_units = len(gids)
            self.unit_of = unit_of

    def unit_norms(self, v):
        """Euclidean norm of ``v`` restricted to each unit's coordinates."""
        v = np.asarray(v, dtype=float)
        if self.singleton:
            return np.abs(v[self._sel])
        sq = np.bincount(self._gsel, weights=np.square(v[self._sel]), minlength=self.n_units)
        return np.sqrt(sq)

    def coords_of(self, units):
        """Sorted coordinate indices covered by the given units."""
        units = np.asarray(units, dtype=int)
        if self.singleton:
            return np.sort(self._sel[units])
        if len(units) == 0:
            return np.asarray([], dtype=int)
        return np.sort(np.concatenate([self._unit_coords[u] for u in units]))

    def units_with_support(self, v):
        """Units whose sub-vector of ``v`` is not identically zero."""
        return np.flatnonzero(self.unit_norms(v) > 0.0)


@dataclass(frozen=True, eq=False)
class ScoProblem:
    """One sparsity-constrained instance: minimize f over at most s units.

    ``preselect`` coordinates are always active and exempt from the
    budget; ``groups`` (array of group ids over all p coordinates) makes
    whole groups enter or leave the support atomically.  ``n`` is the
    sample size, needed only by the information criteria.
    """

    p: int
    s: int
    oracle: ObjectiveOracle
    groups: Optional[np.ndarray] = None
    preselect: Optional[np.ndarray] = None
    n: Optional[int] = None
    view: GroupView = field(init=False, repr=False)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("dimension p must be at least 1")
        if self.oracle.dim != self.p:
            raise ValueError(f"oracle dimension {self.oracle.dim} != p {self.p}")
        pre = np.asarray([] if self.preselect is None else self.preselect, dtype=int)
        pre = np.unique(pre)
        if len(pre) and (pre[0] < 0 or pre[-1] >= self.p):
            raise ValueError("preselect indices out of range")
        if len(pre) >= self.p:
            raise ValueError("preselect cannot cover every coordinate")
        object.__setattr__(self, "preselect", pre)
        groups = self.groups
        if groups is not None:
            groups = np.asarray(groups, dtype=int)
            if groups.shape != (self.p,):
                raise ValueError("groups must assign one id per coordinate")
            ids = np.unique(groups)
            if not np.array_equal(ids, np.arange(len(ids))):
                raise ValueError("group ids must be 0..G-1 with every id present")
            # every group must be entirely selectable or entirely preselected
            pre_mask = np.zeros(self.p, dtype=bool)
            pre_mask[pre] = True
            for gid in ids:
                members = pre_mask[groups == gid]
                if members.any() and not members.all():
                    raise ValueError(f"group {gid} mixes preselected and selectable coordinates")
            object.__setattr__(self, "groups", groups)
        view = GroupView(self.p, groups, pre)
        if view.n_units < 1:
            raise ValueError("no selectable units remain")
        if not 0 < self.s <= view.n_units:
            raise ValueError(f"sparsity budget s={self.s} must lie in 1..{view.n_units}")
        if self.n is not None and self.n < 1:
            raise ValueError("sample size n must be positive")
        object.__setattr__(self, "view", view)

    @property
    def selectable_units(self):
        return self.view.n_units


@dataclass(eq=False)
class ScoSolution:
    """Solver output: parameters, selected support, and diagnostics.

    ``support`` holds the sorted coordinate indices of the selected units
    (preselected coordinates are not listed; they are always active).
    ``trace`` records (iteration, objective, support-change count) per
    outer iteration when the solver produced one.
    """

    params: np.ndarray
    support: np.ndarray
    objective: float
    iterations: int
    converged: bool
    runtime: float = 0.0
    trace: Optional[list] = None


@dataclass(frozen=True)
class RestrictedResult:
    """Outcome of a restricted minimization.

    ``objective`` is the value produced by the (possibly restricted)
    evaluation path; ``last_step`` is the most recently accepted
    line-search step, None when no step was taken.
    """

    params: np.ndarray
    objective: float
    grad_inf: float
    iterations: int
    converged: bool
    last_step: Optional[float]


def top_units(scores, k):
    """Indices of the k largest scores; ties resolved to the lower index."""
    scores = np.asarray(scores, dtype=float)
    if k > len(scores):
        raise ValueError("cannot select more units than exist")
    order = np.argsort(-scores, kind="stable")
    return np.sort(order[:k])


def hard_threshold(v, s, view):
    """Units with the s largest per-unit Euclidean norms of ``v``.

    Deterministic: ties break toward the lower unit index.  Returns sorted
    unit indices (equal to coordinate indices for ungrouped problems
    without preselection).
    """
    return top_units(view.unit_norms(v), s)


def project_feasible(v, problem):
    """Zero every coordinate outside the top-s units plus preselection."""
    v = np.asarray(v, dtype=float)
    units = hard_threshold(v, problem.s, problem.view)
    keep = np.union1d(problem.view.coords_of(units), problem.preselect)
    out = np.zeros_like(v)
    out[keep] = v[keep]
    return out


_DEFAULT_CONFIG = SolverConfig()


class _LbfgsState:
    __slots__ = ("x", "f", "grad_inf", "iters", "converged", "last_step")

    def __init__(self, x, f, grad_inf, iters, converged, last_step):
        self.x = x
        self.f = f
        self.grad_inf = grad_inf
        self.iters = iters
        self.converged = converged
        self.last_step = last_step


def _lbfgs_direction(g, S, Y, R):
    if not S:
        return -g
    q = g.copy()
    alphas = []
    for s, y, r in zip(reversed(S), reversed(Y), reversed(R)):
        a = r * float(s @ q)
        alphas.append(a)
        q -= a * y
    q *= float(S[-1] @ Y[-1]) / float(Y[-1] @ Y[-1])
    for (s, y, r), a in zip(zip(S, Y, R), reversed(alphas)):
        b = r * float(y @ q)
        q += s * (a - b)
    return -q


def _lbfgs(value, value_and_grad, x0, tol, max_iter, memory=10, armijo=1e-4, max_halvings=50):
    """Limited-memory secant updates with Armijo halving line search.

    Trial points whose evaluation leaves the objective's domain count as
    rejected trials; the search only ever accepts finite decreasing steps,
    so the returned iterate is the best one seen.
    """
    from .autodiff import EvaluationError

    x = np.array(x0, dtype=float)
    f, g = value_and_grad(x)
    grad_inf = float(np.max(np.abs(g))) if len(g) else 0.0
    S, Y, R = [], [], []
    last_step = None
    converged = grad_inf <= tol
    it = 0
    while not converged and it < max_iter:
        it += 1
        d = _lbfgs_direction(g, S, Y, R)
        gtd = float(g @ d)
        if gtd >= 0.0:  # curvature went bad; fall back to steepest descent
            d = -g
            gtd = -float(g @ g)
        if -gtd <= 1e-18 * (1.0 + abs(f)):
            break  # no meaningful descent left at this precision
        if S:
            alpha = 1.0
        else:
            alpha = min(1.0, 1.0 / max(np.sqrt(-gtd), 1e-12))
        accepted = False
        for _ in range(max_halvings + 1):
            try:
                ft = value(x + alpha * d)
            except EvaluationError:
                ft = np.inf
            if ft <= f + armijo * alpha * gtd:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break  # line-search failure: report the best iterate so far
        x_new = x + alpha * d
        f_new, g_new = value_and_grad(x_new)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * (float(np.linalg.norm(s)) * float(np.linalg.norm(y)) + 1e-300):
            S.append(s)
            Y.append(y)
            R.append(1.0 / sy)
            if len(S) > memory:
                S.pop(0)
                Y.pop(0)
                R.pop(0)
        x, f, g = x_new, f_new, g_new
        last_step = alpha
        grad_inf = float(np.max(np.abs(g)))
        converged = grad_inf <= tol
    return _LbfgsState(x, f, grad_inf, it, converged, last_step)


def restricted_minimize(problem, support, init=None, config=None):
    """Minimize f over ``support`` plus preselected coordinates.

    All other coordinates stay pinned at zero.  Runs limited-memory
    quasi-Newton iterations (memory 10) with an Armijo backtracking line
    search (sufficient-decrease constant 1e-4, halving steps), stopping
    when the infinity norm of the gradient over the free coordinates drops
    to ``config.inner_tol`` or after ``config.inner_max_iter`` iterations.

    ``init`` must be zero off the free coordinates; the search never
    increases the objective relative to it.  Returns a
    :class:`RestrictedResult` whose ``params`` is the full-length vector.
    """
    cfg = config if config is not None else _DEFAULT_CONFIG
    support = np.asarray(support, dtype=int)
    if len(support) and (support.min() < 0 or support.max() >= problem.p):
        raise ValueError("support indices out of range")
    free = np.union1d(support, problem.preselect).astype(int)
    if init is not None:
        init = np.asarray(init, dtype=float)
        off = np.ones(problem.p, dtype=bool)
        off[free] = False
        if np.any(init[off] != 0.0):
            raise ValueError("init must be zero off support and preselected coordinates")
    if len(free) == 0:
        x = np.zeros(problem.p)
        return RestrictedResult(x, problem.oracle.value(x), 0.0, 0, True, None)
    sub = problem.oracle.restricted(free)
    if sub is not None:
        value, vag = sub.value, sub.value_and_grad
    else:
        oracle = problem.oracle
        template = np.zeros(problem.p)

        def _embed(z):
            full = template.copy()
            full[free] = z
            return full

        def value(z):
            return oracle.value(_embed(z))

        def vag(z):
            f, g = oracle.value_and_grad(_embed(z))
            return f, g[free]

    x0 = init[free] if init is not None else np.zeros(len(free))
    state = _lbfgs(value, vag, x0, cfg.inner_tol, cfg.inner_max_iter)
    params = np.zeros(problem.p)
    params[free] = state.x
    return RestrictedResult(params, state.f, state.grad_inf, state.iters, state.converged, state.last_step)


def validate_solution(problem, solution, tol=1e-12):
    """Check a solution against the ScoSolution invariants; raises ValueError.

    Verifies that the support is a sorted in-range union of whole units
    disjoint from the preselection, that at most s units are selected,
    that the parameters vanish off support plus preselection, and that the
    stored objective matches a fresh oracle evaluation.
    """
    sup = np.asarray(solution.support, dtype=int)
    if len(sup):
        if sup.min() < 0 or sup.max() >= problem.p:
            raise ValueError("support out of range")
        if np.any(np.diff(sup) <= 0):
            raise ValueError("support must be sorted and unique")
        if np.intersect1d(sup, problem.preselect).size:
            raise ValueError("support must not list preselected coordinates")
        units = np.unique(problem.view.unit_of[sup])
        if units.min() < 0:
            raise ValueError("support touches a non-selectable coordinate")
        if not np.array_equal(problem.view.coords_of(units), sup):
            raise ValueError("support must cover whole units")
        if len(units) > problem.s:
            raise ValueError(f"{len(units)} selected units exceed the budget s={problem.s}")
    params = np.asarray(solution.params, dtype=float)
    if params.shape != (problem.p,):
        raise ValueError("params has the wrong shape")
    off = np.ones(problem.p, dtype=bool)
    off[sup] = False
    off[problem.preselect] = False
    if np.any(params[off] != 0.0):
        raise ValueError("params must be exactly zero off support and preselection")
    fresh = problem.oracle.value(params)
    if abs(fresh - solution.objective) > tol * (1.0 + abs(fresh)):
        raise ValueError(f"stored objective {solution.objective!r} != recomputed {fresh!r}")
