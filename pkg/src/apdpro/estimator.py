"""Progressive strong-convexity estimation.

Two quantities drive the adaptive solvers: rho_k, a certified lower bound on
(y*)^T mu grown by the Improve procedure from two dual-norm bounds (h1, h2),
and rho_hat_k, the rate coefficient whose recursion ties the step-size decay
to the restart schedule. Both start at user-supplied values (rho_0 defaults
to 0) since no iterate exists to improve from before the first step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "RhoEstimate",
    "h1",
    "h2",
    "improve",
    "rho_hat_update",
    "rho_hat_recursion",
]


def h1(grad_norm: float, beta: float, r: float, L_X: float) -> float:
    """First dual-norm lower bound: r / (grad_norm + L_X*sqrt(2*beta)).

    Valid as a lower bound on ||y*||_1 whenever ||xh - x*||^2 <= 2*beta for
    the point xh at which grad_norm was evaluated.
    """
    denom = grad_norm + L_X * math.sqrt(2.0 * beta)
    if denom <= 0.0:
        raise ValueError("h1 denominator must be positive")
    return r / denom


def h2(grad_norm: float, beta: float, r: float, L_X: float, mu_lb: float) -> float:
    """Second dual-norm lower bound, from the averaged iterate.

    Returns [ (L_X/r)*sqrt(beta/(2*mu_lb)) + sqrt(L_X^2*beta/(2*mu_lb*r^2)
    + grad_norm/r) ]^-2. beta = 0 collapses it to r/grad_norm, and
    beta = inf yields 0 (the bound degenerates gracefully).
    """
    if r <= 0.0 or mu_lb <= 0.0:
        raise ValueError("r and mu_lb must be positive")
    if math.isinf(beta):
        return 0.0
    half = L_X * L_X * beta / (2.0 * mu_lb * r * r)
    bracket = math.sqrt(half) + math.sqrt(half + grad_norm / r)
    if bracket <= 0.0:
        raise ValueError("h2 denominator must be positive")
    return bracket ** -2.0


def improve(
    grad_norm_at_x: float,
    grad_norm_at_xbar: float,
    beta: float,
    beta_bar: float,
    rho_old: float,
    r: float,
    L_X: float,
    mu_lb: float,
) -> float:
    """One Improve step: max(rho_old, mu_lb * max(h1, h2)); never decreases.

    h1 sees the last iterate (grad_norm_at_x, beta), h2 the averaged iterate
    (grad_norm_at_xbar, beta_bar).
    """
    if rho_old < 0.0:
        raise ValueError("rho_old must be nonnegative")
    bound = max(
        h1(grad_norm_at_x, beta, r, L_X),
        h2(grad_norm_at_xbar, beta_bar, r, L_X, mu_lb),
    )
    return max(rho_old, mu_lb * bound)


def rho_hat_recursion(rho_hat_old: float, rho: float, k: int) -> float:
    """The rate-coefficient recursion: sqrt(rho_hat_old^2 k^2 + 3 rho rho_hat_old k)/(k+1).

    k is the index of rho_hat_old, so the call produces rho_hat_{k+1}. Valid
    for any k >= 1 (the seeded sequence enters it first at k = 1).
    """
    return math.sqrt(rho_hat_old * rho_hat_old * k * k + 3.0 * rho * rho_hat_old * k) / (k + 1.0)


def rho_hat_update(rho_hat_old: float, rho: float, k: int, tau_0: float) -> float:
    """Advance the rate coefficient: seed 3*sqrt(rho/tau_0) at k = 1, recursion after.

    For k > 1 this delegates to :func:`rho_hat_recursion` with multiplier k
    and divisor k+1, exactly as the restart schedule's termination rule
    writes it.
    """
    if tau_0 <= 0.0:
        raise ValueError("tau_0 must be positive")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return 3.0 * math.sqrt(rho / tau_0)
    return rho_hat_recursion(rho_hat_old, rho, k)


@dataclass
class RhoEstimate:
    """Mutable estimator state owned by one solver run.

    ``advance`` feeds it the next certified rho (post-Improve, post-cap) and
    maintains the seeded recursion: rho_hat_1 = 3*sqrt(rho_1/tau_0), then
    rho_hat_{j} = rho_hat_recursion(rho_hat_{j-1}, rho_j, j-1). The k = 2
    step therefore uses the recursion at multiplier 1, which the plain
    k-branching of rho_hat_update cannot reach.
    """

    rho: float = 0.0
    rho_hat: float = 0.0
    k: int = 0
    _hat_weighted_sum: float = field(default=0.0, repr=False)

    def advance(self, rho_new: float, tau_0: float) -> None:
        if rho_new < self.rho:
            raise ValueError("rho must be nondecreasing across updates")
        self.k += 1
        self.rho = rho_new
        if self.k == 1:
            self.rho_hat = rho_hat_update(self.rho_hat, rho_new, 1, tau_0)
        else:
            self.rho_hat = rho_hat_recursion(self.rho_hat, rho_new, self.k - 1)
        self._hat_weighted_sum += self.rho_hat * self.k

    def rho_tilde(self) -> float:
        """Aggregate rate 2 * sum_s rho_hat_s * s / (k (k+1)), on demand."""
        if self.k == 0:
            return 0.0
        return 2.0 * self._hat_weighted_sum / (self.k * (self.k + 1.0))

    def reset_epoch(self) -> None:
        """Start a fresh within-epoch rho_hat sequence; rho itself carries over.

        The placeholder rho_hat = 1 is never consumed: the first advance of
        the new epoch takes the seeding branch.
        """
        self.rho_hat = 1.0
        self.k = 0
        self._hat_weighted_sum = 0.0
