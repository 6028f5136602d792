"""Sparse personalized-PageRank instances.

Builds the constrained form: minimize ||D^{1/2} x||_1 subject to
(1/2) x^T Q x - alpha <s, D^{-1/2} x> <= b with
Q = D^{-1/2}(D - (1-alpha)/2 (D + A)) D^{-1/2}, applied implicitly through
sparse mat-vecs. Also provides the synthetic known-solution generator used
as an oracle by the tests and the benchmark reference modes.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .linalg import cg_solve, power_iteration
from .problem import BlockNormObjective, ConstrainedProblem, _vec

__all__ = [
    "Graph",
    "PprInstance",
    "load_graph",
    "build_ppr_problem",
    "spectral_bounds",
    "make_synthetic_instance",
]


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph: symmetric 0/1 CSR adjacency, no self-loops.

    ``components`` reports connectivity; loaders warn on more than one
    component but do not reject (the quadratic stays positive definite for
    alpha > 0 regardless).
    """

    n: int
    adjacency: sp.csr_matrix
    degrees: np.ndarray
    components: int = 1


_NODES_DIRECTIVE = re.compile(r"^#\s*nodes\s+(\d+)\s*$")


def load_graph(path, format: str = "edge-list") -> Graph:
    """Read an undirected graph from a whitespace edge list.

    One edge per line "u v" with 0-based integer ids; '%' and '#' lines are
    comments except for the optional "# nodes N" directive; blank lines are
    skipped. Edges are symmetrized and deduplicated, self-loops dropped.

    Parameters
    ----------
    path : str or os.PathLike
    format : str
        Only "edge-list" is supported.

    Returns
    -------
    Graph

    Raises
    ------
    ValueError
        On malformed lines (reported with their line number), ids outside a
        declared node count, or isolated nodes (D^{-1/2} must exist).
    """
    if format != "edge-list":
        raise ValueError(f"unsupported graph format {format!r}")
    declared_n = None
    edges: set[tuple[int, int]] = set()
    max_id = -1
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _NODES_DIRECTIVE.match(line)
                if m:
                    declared_n = int(m.group(1))
                continue
            if line.startswith("%"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 'u v', got {line!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-integer node id in {line!r}") from None
            if u < 0 or v < 0:
                raise ValueError(f"{path}: line {lineno}: negative node id in {line!r}")
            max_id = max(max_id, u, v)
            if u == v:
                continue  # self-loop
            edges.add((min(u, v), max(u, v)))
    n = declared_n if declared_n is not None else max_id + 1
    if n <= 0:
        raise ValueError(f"{path}: no nodes found")
    if max_id >= n:
        raise ValueError(f"{path}: node id {max_id} exceeds declared count {n}")
    if edges:
        ij = np.array(sorted(edges), dtype=np.intp)
        rows = np.concatenate([ij[:, 0], ij[:, 1]])
        cols = np.concatenate([ij[:, 1], ij[:, 0]])
        adj = sp.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    else:
        adj = sp.csr_matrix((n, n))
    degrees = np.asarray(adj.sum(axis=1)).ravel()
    isolated = np.flatnonzero(degrees == 0)
    if isolated.size:
        raise ValueError(f"{path}: isolated node(s) {isolated.tolist()[:10]}; every node needs degree >= 1")
    ncomp = connected_components(adj, directed=False, return_labels=False)
    if ncomp > 1:
        warnings.warn(f"graph has {ncomp} connected components", stacklevel=2)
    return Graph(n=n, adjacency=adj, degrees=degrees, components=int(ncomp))


@dataclass(frozen=True)
class PprInstance:
    """A built PageRank problem plus the pieces its construction certified.

    ``qmatvec`` applies Q implicitly; ``q_lin`` is alpha * D^{-1/2} s, so the
    constraint is g(x) = (1/2) x'Qx - q_lin'x - b and grad g = Qx - q_lin.
    ``lambda_min``/``lambda_max`` carry the conservative outward rounding
    used for mu and L_X.
    """

    problem: ConstrainedProblem | None
    alpha: float
    b: float
    s: np.ndarray
    q_lin: np.ndarray
    qmatvec: Callable
    n: int
    x_tilde: np.ndarray | None = None
    lambda_min: float | None = None
    lambda_max: float | None = None
    graph: Graph | None = field(default=None, repr=False)


def _spectral_raw(qmatvec, n):
    lam_max = power_iteration(qmatvec, n, tol=1e-10, maxiter=100000, seed=0)
    shifted = lambda x: lam_max * x - qmatvec(x)
    spread = power_iteration(shifted, n, tol=1e-10, maxiter=100000, seed=0)
    return lam_max - spread, lam_max


def spectral_bounds(instance: PprInstance):
    """Extreme eigenvalues of Q by power iteration, rounded outward.

    lambda_max comes from power iteration on Q (deterministic seeded start,
    tol 1e-10), lambda_min from power iteration on lambda_max*I - Q. The
    returned pair is widened by 1e-8 relative (min down, max up) so that
    x'Qx in [lambda_min ||x||^2, lambda_max ||x||^2] holds with certainty.
    """
    lam_min, lam_max = _spectral_raw(instance.qmatvec, instance.n)
    return lam_min * (1.0 - 1e-8), lam_max * (1.0 + 1e-8)


def _resolve_teleport(s, n: int) -> np.ndarray:
    if isinstance(s, str):
        if s == "uniform":
            return np.full(n, 1.0 / n)
        if s.startswith("seed:"):
            try:
                k = int(s[5:])
            except ValueError:
                raise ValueError(f"bad teleport spec {s!r}") from None
            if not 0 <= k < n:
                raise ValueError(f"teleport seed {k} out of range for {n} nodes")
            out = np.zeros(n)
            out[k] = 1.0
            return out
        raise ValueError(f"bad teleport spec {s!r}; expected 'uniform', 'seed:k', or a vector")
    out = _vec(s, n, "s")
    if np.any(out < 0):
        raise ValueError("teleport vector must be nonnegative")
    total = float(out.sum())
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"teleport vector must sum to 1, got {total:.6g}")
    return out / total


def build_ppr_problem(graph: Graph, alpha: float, b: float, s="uniform", r_rule: str = "degree") -> PprInstance:
    """Assemble the personalized-PageRank instance for a graph.

    Parameters
    ----------
    graph : Graph
    alpha : float
        Teleport probability, in (0, 1).
    b : float
        Constraint level; must leave the unconstrained minimum of g strictly
        negative or the instance is rejected.
    s : array_like or str
        Teleport distribution: a simplex vector, "uniform", or "seed:k".
    r_rule : str
        Subgradient floor: "degree" (min_i d_i) or "sqrt-degree"
        (min_i sqrt(d_i), the conservative choice).

    Returns
    -------
    PprInstance

    Notes
    -----
    The strict point is the unconstrained minimizer of g (CG on
    Q x = alpha D^{-1/2} s, tol 1e-12), which maximizes the feasibility
    margin and hence the dual bound's denominator. L_G is the certified
    ball bound lambda_max * (R + ||x_tilde - x_g*||) + ||grad g(x_tilde)||
    (the middle term vanishes here: the ball is centered at the strict
    point).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    if r_rule not in ("degree", "sqrt-degree"):
        raise ValueError("r_rule must be 'degree' or 'sqrt-degree'")
    n = graph.n
    s_vec = _resolve_teleport(s, n)
    dinv_sqrt = 1.0 / np.sqrt(graph.degrees)
    adj = graph.adjacency
    half = (1.0 - alpha) / 2.0

    def qmatvec(x):
        return x - half * (x + dinv_sqrt * (adj @ (dinv_sqrt * x)))

    q_lin = alpha * dinv_sqrt * s_vec
    lam_min_raw, lam_max_raw = _spectral_raw(qmatvec, n)
    lam_min = lam_min_raw * (1.0 - 1e-8)
    lam_max = lam_max_raw * (1.0 + 1e-8)
    x_tilde = cg_solve(qmatvec, q_lin, tol=1e-12)
    g_tilde = float(0.5 * x_tilde @ qmatvec(x_tilde) - q_lin @ x_tilde - b)
    if g_tilde >= 0.0:
        raise ValueError(
            f"target level b={b:.6g} unattainable: the constraint's unconstrained "
            f"minimum is {g_tilde + b:.6g}, need b strictly above it"
        )
    # Certified gradient bound over the working ball around the strict point.
    radius = 2.0 * np.sqrt(-2.0 * g_tilde / lam_min)
    grad_tilde = float(np.linalg.norm(qmatvec(x_tilde) - q_lin))
    l_g = lam_max * radius + grad_tilde
    weights = np.sqrt(graph.degrees)
    objective = BlockNormObjective(blocks=tuple((i, 1) for i in range(n)), weights=weights)
    r = float(graph.degrees.min()) if r_rule == "degree" else float(weights.min())

    def constraints(x):
        return np.array([0.5 * x @ qmatvec(x) - q_lin @ x - b])

    def jacobian(x):
        return (qmatvec(x) - q_lin).reshape(n, 1)

    problem = ConstrainedProblem(
        n=n,
        objective=objective,
        m=1,
        constraints=constraints,
        jacobian=jacobian,
        mu=np.array([lam_min]),
        L_X=lam_max,
        L_G=l_g,
        r=r,
        strict_point=x_tilde,
    )
    return PprInstance(
        problem=problem,
        alpha=alpha,
        b=b,
        s=s_vec,
        q_lin=q_lin,
        qmatvec=qmatvec,
        n=n,
        x_tilde=x_tilde,
        lambda_min=lam_min,
        lambda_max=lam_max,
        graph=graph,
    )


def make_synthetic_instance(n: int, center, level: float):
    """Known-solution instance: unit l1 objective, g(x) = ||x - c||^2/2 - level^2.

    The origin must be infeasible (g(0) > 0), which pins the optimum to the
    constraint boundary and makes the one-parameter KKT system exact:
    x*(y) = soft_threshold(c, 1/y), with y* found by bisection on
    g(x*(y)) = 0 to 1e-14.

    Parameters
    ----------
    n : int
    center : float or array_like
        Constraint center c; a scalar is broadcast to all coordinates.
    level : float
        Sets the feasible-set size; g(c) = -level^2.

    Returns
    -------
    (ConstrainedProblem, x_star, y_star)
    """
    if n < 1:
        raise ValueError("n must be positive")
    if level <= 0:
        raise ValueError("level must be positive")
    c = np.full(n, float(center)) if np.ndim(center) == 0 else _vec(center, n, "center")
    g0 = 0.5 * float(c @ c) - level**2
    if g0 <= 0.0:
        raise ValueError(
            f"instance must make the origin infeasible: g(0) = {g0:.6g} <= 0"
        )

    def constraints(x):
        d = x - c
        return np.array([0.5 * d @ d - level**2])

    def jacobian(x):
        return (x - c).reshape(n, 1)

    objective = BlockNormObjective(blocks=tuple((i, 1) for i in range(n)), weights=np.ones(n))
    radius = 2.0 * np.sqrt(2.0) * level  # 2*sqrt(-2 g(c)/mu)
    problem = ConstrainedProblem(
        n=n,
        objective=objective,
        m=1,
        constraints=constraints,
        jacobian=jacobian,
        mu=np.array([1.0]),
        L_X=1.0,
        L_G=radius,
        r=1.0,
        strict_point=c.copy(),
    )

    def x_of_y(y):
        return np.sign(c) * np.maximum(np.abs(c) - 1.0 / y, 0.0)

    def phi(y):
        return float(constraints(x_of_y(y))[0])

    # phi decreases from g(0) > 0 toward g(c) < 0; bracket by doubling.
    lo = 1.0
    while phi(lo) <= 0.0:
        lo /= 2.0
        if lo < 1e-300:
            raise ValueError("failed to bracket the dual multiplier from below")
    hi = max(2.0 * lo, 1.0)
    while phi(hi) > 0.0:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError("failed to bracket the dual multiplier from above")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = phi(mid)
        if abs(v) <= 1e-14:
            lo = hi = mid
            break
        if v > 0.0:
            lo = mid
        else:
            hi = mid
    y_star = 0.5 * (lo + hi)
    x_star = x_of_y(y_star)
    return problem, x_star, np.array([y_star])
