"""Bridges, 2-edge-connected components, and the condensation tree of a finite cluster.

``decompose`` runs one iterative DFS with low-link values (no recursion: cluster
depth can exceed Python's stack).  ``br_statistic`` counts the edges of the
minimal subtree of the condensation tree spanning a set of terminal components
by iteratively pruning non-terminal leaves.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass


class ConnectivityError(ValueError):
    """Raised when a subgraph that must be connected is not."""


class MembershipError(ValueError):
    """Raised when a vertex is not part of the subgraph."""


class FiniteSubgraph:
    """A finite connected simple graph over arbitrary hashable vertex ids."""

    def __init__(self, vertices, edges):
        self.vertices = tuple(vertices)
        index = {v: i for i, v in enumerate(self.vertices)}
        if len(index) != len(self.vertices):
            raise ValueError("duplicate vertices")
        self.index = index
        seen = set()
        adj = [[] for _ in self.vertices]
        canon = []
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u!r}")
            try:
                iu, iv = index[u], index[v]
            except KeyError as exc:
                raise MembershipError(f"edge endpoint {exc} not a vertex") from None
            key = (min(iu, iv), max(iu, iv))
            if key in seen:
                raise ValueError(f"parallel edge ({u!r},{v!r})")
            seen.add(key)
            ei = len(canon)
            canon.append((u, v))
            adj[iu].append((iv, ei))
            adj[iv].append((iu, ei))
        self.edges = tuple(canon)
        self.adj = adj
        if self.vertices and not self._connected():
            raise ConnectivityError("subgraph is not connected")

    @classmethod
    def from_cluster_edges(cls, edges, root=None):
        """Build from an open-edge list as recorded by the engine."""
        verts = []
        seen = set()
        if root is not None:
            verts.append(root)
            seen.add(root)
        for u, v in edges:
            for x in (u, v):
                if x not in seen:
                    seen.add(x)
                    verts.append(x)
        return cls(verts, edges)

    def _connected(self):
        seen = bytearray(len(self.vertices))
        seen[0] = 1
        q = deque([0])
        count = 1
        while q:
            x = q.popleft()
            for y, _ in self.adj[x]:
                if not seen[y]:
                    seen[y] = 1
                    count += 1
                    q.append(y)
        return count == len(self.vertices)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)


@dataclass
class BridgeDecomposition:
    """Bridges, the vertex partition into 2-edge-connected classes, and their tree."""

    subgraph: FiniteSubgraph
    bridges: tuple            # edge indices into subgraph.edges
    component_of: tuple       # vertex index -> component id
    n_components: int
    tree_adj: tuple           # component id -> tuple of (other component, bridge edge index)

    def component_of_vertex(self, v):
        try:
            return self.component_of[self.subgraph.index[v]]
        except KeyError:
            raise MembershipError(f"vertex {v!r} not in subgraph") from None

    def bridge_edges(self):
        return tuple(self.subgraph.edges[i] for i in self.bridges)


def decompose(subgraph):
    """Exact bridge decomposition via a single iterative low-link DFS."""
    n = subgraph.n_vertices
    if n == 0:
        raise ConnectivityError("empty subgraph")
    adj = subgraph.adj
    disc = [-1] * n
    low = [0] * n
    bridges = []
    timer = 0
    # stack holds (vertex, parent edge index, iterator position)
    disc[0] = low[0] = timer
    timer += 1
    stack = [(0, -1, 0)]
    while stack:
        x, pe, pos = stack[-1]
        if pos < len(adj[x]):
            stack[-1] = (x, pe, pos + 1)
            y, ei = adj[x][pos]
            if ei == pe:
                continue
            if disc[y] == -1:
                disc[y] = low[y] = timer
                timer += 1
                stack.append((y, ei, 0))
            else:
                if disc[y] < low[x]:
                    low[x] = disc[y]
        else:
            stack.pop()
            if pe != -1:
                parent = stack[-1][0]
                if low[x] < low[parent]:
                    low[parent] = low[x]
                if low[x] > disc[parent]:
                    bridges.append(pe)
    bridge_set = set(bridges)

    # 2-edge-connected classes: components after deleting the bridges
    comp = [-1] * n
    n_comp = 0
    for s in range(n):
        if comp[s] != -1:
            continue
        comp[s] = n_comp
        q = deque([s])
        while q:
            x = q.popleft()
            for y, ei in adj[x]:
                if ei not in bridge_set and comp[y] == -1:
                    comp[y] = n_comp
                    q.append(y)
        n_comp += 1

    tree_adj = [[] for _ in range(n_comp)]
    for ei in bridges:
        u, v = subgraph.edges[ei]
        cu = comp[subgraph.index[u]]
        cv = comp[subgraph.index[v]]
        tree_adj[cu].append((cv, ei))
        tree_adj[cv].append((cu, ei))
    return BridgeDecomposition(subgraph, tuple(sorted(bridges)), tuple(comp),
                               n_comp, tuple(tuple(t) for t in tree_adj))


def br_statistic(decomposition, v, xs):
    """Edge count of the minimal subtree of the condensation tree spanning
    the components of ``v`` and every vertex in ``xs``.

    Repeated or coinciding components are deduplicated; the result is 0 when
    all terminals fall in one component.
    """
    terminals = {decomposition.component_of_vertex(v)}
    for x in xs:
        terminals.add(decomposition.component_of_vertex(x))
    if len(terminals) <= 1:
        return 0
    tree_adj = decomposition.tree_adj
    degree = [len(t) for t in tree_adj]
    removed_edge = set()
    removed_node = [False] * decomposition.n_components
    leaves = deque(c for c in range(decomposition.n_components)
                   if degree[c] == 1 and c not in terminals)
    while leaves:
        c = leaves.popleft()
        if removed_node[c] or degree[c] != 1 or c in terminals:
            continue
        removed_node[c] = True
        for d, ei in tree_adj[c]:
            if ei in removed_edge or removed_node[d]:
                continue
            removed_edge.add(ei)
            degree[d] -= 1
            degree[c] -= 1
            if degree[d] == 1 and d not in terminals:
                leaves.append(d)
    return len(decomposition.bridges) - len(removed_edge)
