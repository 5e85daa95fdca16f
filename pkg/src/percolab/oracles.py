"""Exact branching-process oracles on the k-regular tree.

The root cluster of Bernoulli-p percolation on the k-regular tree is a
branching tree whose root has Binomial(k, p) children while every other vertex
has Binomial(k-1, p) children; that root/non-root distinction is kept explicit
throughout.  Finite supercritical clusters are handled through the dual
parameter q solving q(1-q)^(k-2) = p(1-p)^(k-2) in [0, p_c]: conditioned on
finiteness, the cluster at p has the law of the (unconditioned) cluster at q,
and the finite-cluster mass is 1 - theta(p) = ((1-p)/(1-q))^k.

Every finite cluster with n vertices touches exactly (k-1)(n-1) + k edges
(its n-1 open edges plus the (k-2)(n-1) + k closed ones around it), so tail
laws in the touched-edge variable are affine reparametrizations of the volume
laws and exponential rates convert by a factor 1/(k-1).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, log

import numpy as np
from scipy.optimize import minimize_scalar

PMF_MAX_N = 10 ** 5
RADIUS_MAX_R = 10 ** 4


class DomainError(ValueError):
    """Raised when a parameter is outside an oracle's domain."""


@dataclass(frozen=True)
class TreeOracle:
    k: int

    def __post_init__(self):
        if self.k < 3:
            raise ValueError(f"TreeOracle needs k >= 3, got {self.k}")

    @property
    def p_c(self):
        return 1.0 / (self.k - 1)

    # ----- duality -------------------------------------------------------

    def dual_parameter(self, p, tol=1e-12):
        """The unique q in [0, p_c] with q(1-q)^(k-2) = p(1-p)^(k-2).

        Defined for p in [p_c, 1); bisection, absolute tolerance ``tol``.
        """
        k = self.k
        if not self.p_c <= p < 1.0:
            raise DomainError(f"dual_parameter needs p in [p_c, 1), got {p}")
        if p == self.p_c:
            # fixed point; h is quadratically flat here, so bisection could
            # only locate it to sqrt(eps) accuracy
            return self.p_c

        def h(q):
            return q * (1.0 - q) ** (k - 2)

        target = h(p)
        lo, hi = 0.0, self.p_c
        # h is strictly increasing on [0, p_c]
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if h(mid) < target:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def finite_cluster_measure(self, p):
        """(q, mass): subcritical parameter of the finite part and its weight.

        For p <= p_c this is (p, 1).  For p > p_c, q is the dual parameter and
        mass = 1 - theta(p).
        """
        if p <= self.p_c:
            return p, 1.0
        q = self.dual_parameter(p)
        return q, (1.0 - p) ** self.k / (1.0 - q) ** self.k

    # ----- survival ------------------------------------------------------

    def survival_probability(self, p, tol=1e-14, max_iter=10 ** 5):
        """theta(p) = P_p(root cluster is infinite)."""
        k = self.k
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p={p} outside [0,1]")
        if (k - 1) * p <= 1.0:
            return 0.0

        def f(rho):
            return (1.0 - p + p * rho) ** (k - 1)

        rho = 0.0
        for _ in range(max_iter):
            nxt = f(rho)
            if abs(nxt - rho) < tol:
                rho = nxt
                break
            rho = nxt
        # Newton polish; the smallest fixed point is a simple root of f(x)-x
        for _ in range(60):
            g = f(rho) - rho
            gp = (k - 1) * p * (1.0 - p + p * rho) ** (k - 2) - 1.0
            step = g / gp
            nxt = rho - step
            if not 0.0 <= nxt < 1.0:
                break
            rho = nxt
            if abs(step) < tol:
                break
        return 1.0 - (1.0 - p + p * rho) ** k

    # ----- cluster size --------------------------------------------------

    def cluster_size_pmf(self, p, n_max):
        """P_p(|K_root| = n) for n = 1..n_max, exact to floating accuracy.

        Dynamic programming on convolution powers of the non-root total-progeny
        law: t[n] depends on t[<n] through the Binomial(k-1, p) offspring mix,
        and the root is a Binomial(k, p) mix of up to k independent progenies.
        """
        k = self.k
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p={p} outside [0,1]")
        if not 1 <= n_max <= PMF_MAX_N:
            raise DomainError(f"n_max={n_max} outside 1..{PMF_MAX_N}")
        t = np.zeros(n_max + 1)
        # pows[j] = j-fold convolution of t, maintained progressively
        pows = [np.zeros(n_max) for _ in range(k + 1)]
        if n_max >= 1:
            pows[0][0] = 1.0
        child_w = [comb(k - 1, j) * p ** j * (1.0 - p) ** (k - 1 - j)
                   for j in range(k)]
        for n in range(1, n_max + 1):
            m = n - 1
            pows[1][m] = t[m] if m >= 1 else 0.0
            for j in range(2, k + 1):
                pows[j][m] = float(np.dot(t[1:m], pows[j - 1][m - 1:0:-1])) if m >= j else 0.0
            t[n] = sum(child_w[j] * pows[j][m] for j in range(k))
        root_w = [comb(k, j) * p ** j * (1.0 - p) ** (k - j) for j in range(k + 1)]
        pmf = np.empty(n_max)
        for n in range(1, n_max + 1):
            pmf[n - 1] = sum(root_w[j] * pows[j][n - 1] for j in range(k + 1))
        return pmf

    def volume_tail_finite(self, p, n_max, n_extra=None):
        """P_p(n <= |K_root| < infinity) for n = 1..n_max.

        Combines head sums (1 - cumsum, exact for tails above ~1e-15) with
        suffix sums of the pmf extended ``n_extra`` terms past ``n_max``
        (cancellation-free for exponentially small tails); the elementwise max
        of the two is accurate in both regimes.
        """
        q, mass = self.finite_cluster_measure(p)
        if n_extra is None:
            n_extra = min(n_max, PMF_MAX_N - n_max, 20000)
        pmf = self.cluster_size_pmf(q, n_max + n_extra)
        cum = np.concatenate([[0.0], np.cumsum(pmf)[:-1]])[:n_max]
        head = np.maximum(1.0 - cum, 0.0)
        suffix = np.cumsum(pmf[::-1])[::-1][:n_max]
        return mass * np.maximum(head, suffix)

    def touched_edges_of_volume(self, n):
        """E_v of a finite n-vertex cluster: (k-1)(n-1) + k, exact."""
        return (self.k - 1) * (n - 1) + self.k

    # ----- radius --------------------------------------------------------

    def radius_tail(self, p, r_max):
        """P_p(R_root >= r) for r = 0..r_max via iterated generating functions.

        f(s) = (1-p+ps)^(k-1) drives non-root generations, g(s) = (1-p+ps)^k
        the root; P(R >= r) = 1 - g(f^(r-1)(0)).
        """
        k = self.k
        if not 0.0 <= p <= 1.0:
            raise DomainError(f"p={p} outside [0,1]")
        if not 1 <= r_max <= RADIUS_MAX_R:
            raise DomainError(f"r_max={r_max} outside 1..{RADIUS_MAX_R}")
        out = np.empty(r_max + 1)
        out[0] = 1.0
        # track x_r = P(child subtree reaches depth r) through expm1/log1p so
        # exponentially small tails keep full relative precision
        x = 1.0
        for r in range(1, r_max + 1):
            out[r] = -np.expm1(k * np.log1p(-p * x))
            x = -np.expm1((k - 1) * np.log1p(-p * x))
        return out

    def radius_tail_finite(self, p, r_max):
        """P_p(r <= R_root < infinity) for r = 0..r_max, via duality above p_c."""
        q, mass = self.finite_cluster_measure(p)
        return mass * self.radius_tail(q, r_max)

    # ----- large-deviation rate -----------------------------------------

    def zeta_exact(self, p, statistic="volume", tol=1e-12):
        """Exponential decay rate of P_p(n <= statistic of K_root < infinity).

        Cramer rate of the total-progeny law at its dualized subcritical
        parameter: zeta_vol = sup_theta [theta - (k-1) log(1 - q + q e^theta)].
        ``statistic="edges"`` rescales by the affine edge/volume relation,
        zeta_edge = zeta_vol / (k-1).  Returns exactly 0 at p = p_c.
        """
        k = self.k
        if not 0.0 < p < 1.0:
            raise DomainError(f"zeta_exact needs p in (0,1), got {p}")
        if statistic not in ("volume", "edges"):
            raise DomainError(f"unknown statistic {statistic!r}")
        if p == self.p_c:
            return 0.0
        q = p if p < self.p_c else self.dual_parameter(p)
        # stationary point is explicit, used only to bracket the maximizer
        theta_star = log((1.0 - q) / ((k - 2) * q)) if k > 2 else 1.0

        def negrate(th):
            return -(th - (k - 1) * np.log1p(q * (np.expm1(th))))

        res = minimize_scalar(negrate, bounds=(0.0, theta_star + 2.0),
                              method="bounded", options={"xatol": tol})
        zeta = max(0.0, -res.fun)
        if statistic == "edges":
            zeta /= (k - 1)
        return zeta

    def radius_decay_rate(self, p):
        """Exponential decay rate of P_p(r <= R_root < infinity) in r.

        Subcritical survival to depth r decays like ((k-1)q)^r with q the
        (dualized) subcritical parameter, so the rate is -log((k-1) q).
        """
        if not 0.0 < p < 1.0:
            raise DomainError(f"radius_decay_rate needs p in (0,1), got {p}")
        q = p if p <= self.p_c else self.dual_parameter(p)
        return -log((self.k - 1) * q)

    # ----- moments -------------------------------------------------------

    def truncated_moment(self, p, order):
        """E_p[|K_root|^order ; |K_root| < infinity], exact, order in {1, 2, 3}.

        Closed-form branching recursions for the total-progeny moments at the
        (dualized) subcritical parameter, weighted by the finite-cluster mass.
        """
        if order not in (1, 2, 3):
            raise DomainError(f"order must be 1, 2 or 3, got {order}")
        q, mass = self.finite_cluster_measure(p)
        k = self.k
        mu = (k - 1) * q
        if mu >= 1.0:
            raise DomainError(f"moment diverges at p={p}")
        f2 = (k - 1) * (k - 2) * q * q
        f3 = (k - 1) * (k - 2) * (k - 3) * q ** 3
        m1 = 1.0 / (1.0 - mu)
        m2 = m1 * (1.0 + 2.0 * mu * m1 + f2 * m1 ** 2)
        m3 = m1 * (1.0 + 3.0 * mu * m1 + 3.0 * mu * m2
                   + 3.0 * f2 * m1 ** 2 + 3.0 * f2 * m1 * m2 + f3 * m1 ** 3)
        g1 = k * q
        g2 = k * (k - 1) * q * q
        g3 = k * (k - 1) * (k - 2) * q ** 3
        M1 = 1.0 + g1 * m1
        if order == 1:
            return mass * M1
        M2 = 1.0 + 2.0 * g1 * m1 + g1 * m2 + g2 * m1 ** 2
        if order == 2:
            return mass * M2
        M3 = (1.0 + 3.0 * g1 * m1 + 3.0 * (g1 * m2 + g2 * m1 ** 2)
              + g1 * m3 + 3.0 * g2 * m2 * m1 + g3 * m1 ** 3)
        return mass * M3
