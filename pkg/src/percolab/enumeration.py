"""Exhaustive-enumeration oracles on tiny graphs.

Everything here sums over all 2^|E| open/closed configurations with exact
rational arithmetic, so the Russo identity d/dp E_{p,n}[F] = U - D can be
checked without cancellation noise.  Cluster functionals F receive
``(vertex_bitmask, open_cluster_edges, subgraph)`` and must return a number.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb, exp

from .bridges import FiniteSubgraph, br_statistic, decompose

MAX_ENUM_EDGES = 20


class SizeError(ValueError):
    """Raised when a graph is too large to enumerate."""


class PolynomialInP:
    """Polynomial in p with exact Fraction coefficients."""

    def __init__(self, coeffs):
        cs = [Fraction(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs) if cs else (Fraction(0),)

    @classmethod
    def from_open_counts(cls, weights, n_edges):
        """Sum_o weights[o] * p^o * (1-p)^(n_edges - o), expanded exactly."""
        out = [Fraction(0)] * (n_edges + 1)
        for o, w in enumerate(weights):
            if w == 0:
                continue
            w = Fraction(w)
            c = n_edges - o
            # (1-p)^c = sum_j C(c,j) (-1)^j p^j
            for j in range(c + 1):
                out[o + j] += w * comb(c, j) * (-1) ** j
        return cls(out)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, p):
        acc = Fraction(0)
        pf = Fraction(p)
        for c in reversed(self.coeffs):
            acc = acc * pf + c
        return acc

    def derivative(self):
        return PolynomialInP([i * c for i, c in enumerate(self.coeffs)][1:] or [0])

    def __eq__(self, other):
        return isinstance(other, PolynomialInP) and self.coeffs == other.coeffs

    def __repr__(self):
        return f"PolynomialInP({list(self.coeffs)})"


# ----- configuration scans -----------------------------------------------


def _incidence(subgraph):
    """Per-vertex list of (edge index, other endpoint index)."""
    inc = [[] for _ in range(subgraph.n_vertices)]
    for ei, (u, v) in enumerate(subgraph.edges):
        iu, iv = subgraph.index[u], subgraph.index[v]
        inc[iu].append((ei, iv))
        inc[iv].append((ei, iu))
    return inc


def _cluster_mask(inc, open_mask, start):
    """Bitmask of the connected component of ``start`` under open edges."""
    seen = 1 << start
    stack = [start]
    while stack:
        x = stack.pop()
        for ei, y in inc[x]:
            if open_mask >> ei & 1 and not seen >> y & 1:
                seen |= 1 << y
                stack.append(y)
    return seen


def _touched(inc, subgraph, vmask):
    """Number of edges of the subgraph with at least one endpoint in vmask."""
    count = 0
    for ei, (u, v) in enumerate(subgraph.edges):
        if vmask >> subgraph.index[u] & 1 or vmask >> subgraph.index[v] & 1:
            count += 1
    return count


def configuration_table(subgraph, root):
    """Per-configuration (cluster vertex mask, cluster open-edge mask, E_v).

    Indexed by the open-edge bitmask; the workhorse for all enumerations here.
    """
    ne = subgraph.n_edges
    if ne > MAX_ENUM_EDGES:
        raise SizeError(f"{ne} edges > enumeration cap {MAX_ENUM_EDGES}")
    inc = _incidence(subgraph)
    r = subgraph.index[root]
    endpoint_mask = []
    for u, v in subgraph.edges:
        endpoint_mask.append((1 << subgraph.index[u]) | (1 << subgraph.index[v]))
    out = []
    for omega in range(1 << ne):
        vmask = _cluster_mask(inc, omega, r)
        emask = 0
        touched = 0
        for ei in range(ne):
            if endpoint_mask[ei] & vmask:
                touched += 1
                if omega >> ei & 1 and endpoint_mask[ei] & vmask == endpoint_mask[ei]:
                    emask |= 1 << ei
        out.append((vmask, emask, touched))
    return out


def _popcount(x):
    return bin(x).count("1")


def enumerate_truncated_expectation(subgraph, F, n, root, table=None):
    """Exact polynomial p -> E_p[F(K_root) 1(E_root <= n)]."""
    ne = subgraph.n_edges
    if table is None:
        table = configuration_table(subgraph, root)
    weights = [Fraction(0)] * (ne + 1)
    for omega, (vmask, emask, touched) in enumerate(table):
        if touched <= n:
            val = F(vmask, emask, subgraph)
            if val:
                weights[_popcount(omega)] += Fraction(val)
    return PolynomialInP.from_open_counts(weights, ne)


def u_term(subgraph, F, n, p, root, table=None):
    """Finite-cluster growth term of the truncated Russo decomposition.

    (1/p) sum_e E_{p,n}[(F[K_v] - F[K_v(omega_e)]) 1(omega(e)=1)], with
    omega_e the configuration with e closed.
    """
    ne = subgraph.n_edges
    if table is None:
        table = configuration_table(subgraph, root)
    pf = Fraction(p)
    acc = Fraction(0)
    for omega, (vmask, emask, touched) in enumerate(table):
        if touched > n:
            continue
        contrib = Fraction(0)
        fval = None
        for ei in range(ne):
            if not omega >> ei & 1:
                continue
            if not emask >> ei & 1:
                continue  # e open but outside the cluster: deleting it changes nothing
            if fval is None:
                fval = Fraction(F(vmask, emask, subgraph))
            sub = table[omega & ~(1 << ei)]
            contrib += fval - Fraction(F(sub[0], sub[1], subgraph))
        if contrib:
            o = _popcount(omega)
            acc += contrib * pf ** o * (1 - pf) ** (ne - o)
    return float(acc / pf)


def d_term(subgraph, F, n, p, root, table=None):
    """Truncation-breaking term of the decomposition.

    (1/(1-p)) sum_e E_p[F(K_v) 1(omega(e)=0, E_v <= n < E_v(omega^e))], with
    omega^e the configuration with e opened.
    """
    ne = subgraph.n_edges
    if table is None:
        table = configuration_table(subgraph, root)
    pf = Fraction(p)
    acc = Fraction(0)
    for omega, (vmask, emask, touched) in enumerate(table):
        if touched > n:
            continue
        contrib = Fraction(0)
        fval = None
        for ei in range(ne):
            if omega >> ei & 1:
                continue
            up = table[omega | (1 << ei)]
            if up[2] > n:
                if fval is None:
                    fval = Fraction(F(vmask, emask, subgraph))
                contrib += fval
        if contrib:
            o = _popcount(omega)
            acc += contrib * pf ** o * (1 - pf) ** (ne - o)
    return float(acc / (1 - pf))


# ----- standard cluster functionals ---------------------------------------


def functional_one(vmask, emask, subgraph):
    return 1


def functional_volume(vmask, emask, subgraph):
    return _popcount(vmask)


def functional_volume_sq(vmask, emask, subgraph):
    return _popcount(vmask) ** 2


def make_radius_indicator(r, root):
    """F = 1(intrinsic radius of K_root >= r)."""

    def F(vmask, emask, subgraph):
        inc = _incidence(subgraph)
        start = subgraph.index[root]
        depth = {start: 0}
        frontier = [start]
        d = 0
        while frontier:
            if d >= r:
                return 1
            nxt = []
            for x in frontier:
                for ei, y in inc[x]:
                    if emask >> ei & 1 and y not in depth:
                        depth[y] = d + 1
                        nxt.append(y)
            frontier = nxt
            d += 1
        return 0

    return F


# ----- generating function oracle -----------------------------------------


def genfn_exact(subgraph, root, p, n, k, s, t, table=None):
    """Exact value of the k-point touched-edge/bridge generating function.

    sum over configurations of weight * sum_{x_1..x_k in K_v} e^{s E_v + t Br},
    truncated to E_v <= n.
    """
    if table is None:
        table = configuration_table(subgraph, root)
    ne = subgraph.n_edges
    total = 0.0
    for omega, (vmask, emask, touched) in enumerate(table):
        if touched > n:
            continue
        verts = [subgraph.vertices[i] for i in range(subgraph.n_vertices)
                 if vmask >> i & 1]
        edges = [subgraph.edges[ei] for ei in range(ne) if emask >> ei & 1]
        cluster = FiniteSubgraph(verts, edges)
        dec = decompose(cluster)
        o = _popcount(omega)
        weight = p ** o * (1.0 - p) ** (ne - o)
        inner = 0.0
        for xs in _tuples(verts, k):
            inner += exp(t * br_statistic(dec, root, xs))
        total += weight * exp(s * touched) * inner
    return total


def _tuples(pool, k):
    if k == 0:
        yield ()
        return
    for rest in _tuples(pool, k - 1):
        for x in pool:
            yield rest + (x,)


# ----- root subtree enumeration on the k-regular tree ---------------------


def tree_root_cluster_pmf(model, p, n_max):
    """P(|K_root| = n), n = 1..n_max, by explicit enumeration of root subtrees.

    Walks every connected vertex set containing the root (subtrees of the
    k-regular tree), counting its boundary edges through the model's neighbor
    oracle; P(K = T) = p^(open) (1-p)^(boundary).  Exponential in n_max; meant
    for n_max <= 8 as an independent check on the generating-function pmf.
    """
    if n_max > 8:
        raise SizeError("subtree enumeration is exponential; n_max <= 8")
    counts = {}
    root = model.root

    def record(tset):
        b = 0
        for v in tset:
            for u in model.neighbors(v):
                if u not in tset:
                    b += 1
        d = counts.setdefault(len(tset), {})
        d[b] = d.get(b, 0) + 1

    def explore(tset, candidates, banned):
        # decide boundary candidates in order: each connected superset of the
        # root corresponds to exactly one include/exclude decision sequence
        if not candidates:
            return
        v = candidates[0]
        rest = candidates[1:]
        explore(tset, rest, banned | {v})
        grown = tset | {v}
        record(grown)
        if len(grown) < n_max:
            fresh = [u for u in model.neighbors(v)
                     if u not in grown and u not in banned and u not in rest]
            explore(grown, rest + fresh, banned)

    record(frozenset([root]))
    explore(frozenset([root]), list(model.neighbors(root)), set())
    pmf = []
    for nvert in range(1, n_max + 1):
        acc = 0.0
        for b, cnt in counts.get(nvert, {}).items():
            acc += cnt * p ** (nvert - 1) * (1.0 - p) ** b
        pmf.append(acc)
    return pmf
