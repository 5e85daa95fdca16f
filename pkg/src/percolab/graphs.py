"""Graph models for percolation: implicit infinite transitive graphs and explicit finite ones.

Vertices are canonical immutable addresses so that edge states can be memoized
consistently during lazy exploration:

* ``RegularTree(k)``: reduced words over ``k`` involutive edge labels, stored as
  tuples of ints with no immediate repetition.  The root is the empty word.
* ``TreeTimesCycle(k, m)``: pairs ``(word, j)`` with ``j`` a cycle coordinate.
* ``HypercubicLattice(d)``: integer coordinate tuples.
* ``Finite``: dense 0-based indices over an explicit adjacency list.

Neighbor lists are returned in a fixed lexicographic order so exploration is
reproducible.  All models are immutable and safe to share across workers.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass


class AddressError(ValueError):
    """Raised when a vertex address is malformed for the model."""


class AdjacencyError(ValueError):
    """Raised when an operation requires two adjacent vertices."""


def _word_key(w):
    return (len(w), w)


@dataclass(frozen=True)
class RegularTree:
    """The infinite k-regular tree, k >= 3."""

    k: int

    def __post_init__(self):
        if self.k < 3:
            raise ValueError(f"RegularTree needs k >= 3, got {self.k}")

    @property
    def degree(self):
        return self.k

    @property
    def root(self):
        return ()

    @property
    def p_c(self):
        return 1.0 / (self.k - 1)

    def validate(self, v):
        if not isinstance(v, tuple):
            raise AddressError(f"tree address must be a tuple, got {type(v).__name__}")
        for i, a in enumerate(v):
            if not (0 <= a < self.k):
                raise AddressError(f"label {a} out of range 0..{self.k - 1}")
            if i > 0 and v[i - 1] == a:
                raise AddressError(f"word {v} is not reduced (repeat at {i})")

    def neighbors(self, v):
        self.validate(v)
        out = []
        if v:
            out.append(v[:-1])
        last = v[-1] if v else None
        for a in range(self.k):
            if a != last:
                out.append(v + (a,))
        out.sort(key=_word_key)
        return out

    def distance(self, u, v):
        self.validate(u)
        self.validate(v)
        c = 0
        for a, b in zip(u, v):
            if a != b:
                break
            c += 1
        return len(u) + len(v) - 2 * c

    def sort_key(self, v):
        return _word_key(v)

    def describe(self):
        return f"tree:k={self.k}"


@dataclass(frozen=True)
class TreeTimesCycle:
    """Direct product of the k-regular tree with an m-cycle (degree k + 2)."""

    k: int
    m: int

    def __post_init__(self):
        if self.k < 3:
            raise ValueError(f"TreeTimesCycle needs k >= 3, got {self.k}")
        if self.m < 3:
            raise ValueError(f"TreeTimesCycle needs m >= 3, got {self.m}")

    @property
    def degree(self):
        return self.k + 2

    @property
    def root(self):
        return ((), 0)

    def _tree(self):
        return RegularTree(self.k)

    def validate(self, v):
        if not (isinstance(v, tuple) and len(v) == 2):
            raise AddressError("product address must be (word, cycle coordinate)")
        w, j = v
        self._tree().validate(w)
        if not (isinstance(j, int) and 0 <= j < self.m):
            raise AddressError(f"cycle coordinate {j} out of range 0..{self.m - 1}")

    def neighbors(self, v):
        self.validate(v)
        w, j = v
        out = [(wn, j) for wn in self._tree().neighbors(w)]
        out.append((w, (j + 1) % self.m))
        out.append((w, (j - 1) % self.m))
        out.sort(key=self.sort_key)
        return out

    def distance(self, u, v):
        self.validate(u)
        self.validate(v)
        dj = abs(u[1] - v[1])
        return self._tree().distance(u[0], v[0]) + min(dj, self.m - dj)

    def sort_key(self, v):
        return (_word_key(v[0]), v[1])

    def describe(self):
        return f"treexcycle:k={self.k},m={self.m}"


@dataclass(frozen=True)
class HypercubicLattice:
    """The hypercubic lattice Z^d.  Amenable control model; theorems do not apply."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"HypercubicLattice needs d >= 1, got {self.d}")

    @property
    def degree(self):
        return 2 * self.d

    @property
    def root(self):
        return (0,) * self.d

    def validate(self, v):
        if not (isinstance(v, tuple) and len(v) == self.d):
            raise AddressError(f"lattice address must be a {self.d}-tuple")
        if not all(isinstance(x, int) for x in v):
            raise AddressError("lattice coordinates must be ints")

    def neighbors(self, v):
        self.validate(v)
        out = []
        for i in range(self.d):
            for step in (-1, 1):
                out.append(v[:i] + (v[i] + step,) + v[i + 1:])
        out.sort()
        return out

    def distance(self, u, v):
        self.validate(u)
        self.validate(v)
        return sum(abs(a - b) for a, b in zip(u, v))

    def sort_key(self, v):
        return v

    def describe(self):
        return f"lattice:d={self.d}"


class Finite:
    """Explicit finite graph over dense indices, for oracles and tests."""

    def __init__(self, n_vertices, edges, root=0, path=None):
        adj = [set() for _ in range(n_vertices)]
        seen = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                raise ValueError(f"edge ({u},{v}) out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge ({u},{v})")
            seen.add(key)
            adj[u].add(v)
            adj[v].add(u)
        self.n_vertices = n_vertices
        self.edges = tuple(sorted(seen))
        self._adj = tuple(tuple(sorted(s)) for s in adj)
        self.root = root
        self._path = path
        self.validate(root)

    @property
    def degree(self):
        # maximum degree; Finite graphs need not be regular
        return max((len(a) for a in self._adj), default=0)

    def validate(self, v):
        if not (isinstance(v, int) and 0 <= v < self.n_vertices):
            raise AddressError(f"finite-graph index {v} out of range 0..{self.n_vertices - 1}")

    def neighbors(self, v):
        self.validate(v)
        return list(self._adj[v])

    def distance(self, u, v):
        self.validate(u)
        self.validate(v)
        if u == v:
            return 0
        dist = {u: 0}
        q = deque([u])
        while q:
            x = q.popleft()
            for y in self._adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    if y == v:
                        return dist[y]
                    q.append(y)
        raise AdjacencyError(f"vertices {u} and {v} are not connected")

    def sort_key(self, v):
        return v

    def describe(self):
        if self._path is not None:
            return f"finite:{self._path}"
        return f"finite:<{self.n_vertices}v,{len(self.edges)}e>"

    def __eq__(self, other):
        return (isinstance(other, Finite) and other.n_vertices == self.n_vertices
                and other.edges == self.edges and other.root == self.root)

    def __hash__(self):
        return hash((self.n_vertices, self.edges, self.root))


def canonical_edge(model, u, v):
    """Order-independent identifier of the edge {u, v}.

    Raises AdjacencyError if u and v are not adjacent in the model.
    """
    model.validate(u)
    model.validate(v)
    if u == v:
        raise AdjacencyError(f"no self-loops: ({u},{v})")
    if v not in model.neighbors(u):
        raise AdjacencyError(f"vertices {u} and {v} are not adjacent")
    if model.sort_key(u) <= model.sort_key(v):
        return (u, v)
    return (v, u)


def load_edge_list(path):
    """Read a `u v` pair-per-line 0-based edge list file into a Finite model."""
    edges = []
    top = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'u v', got {line!r}")
            u, v = int(parts[0]), int(parts[1])
            if u < 0 or v < 0:
                raise ValueError(f"{path}:{lineno}: negative vertex index")
            edges.append((u, v))
            top = max(top, u, v)
    return Finite(top + 1, edges, path=str(path))


def parse_model(spec):
    """Parse a model selection string.

    Grammar: ``tree:k=3``, ``treexcycle:k=3,m=6``, ``lattice:d=2``,
    ``finite:<path to edge-list file>``.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "finite":
        if not rest:
            raise ValueError("finite model needs a path: finite:<edge-list file>")
        return load_edge_list(rest)
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise ValueError(f"bad model parameter {item!r} in {spec!r}")
            params[key.strip()] = int(val)
    try:
        if kind == "tree":
            return RegularTree(params.pop("k"))
        if kind == "treexcycle":
            return TreeTimesCycle(params.pop("k"), params.pop("m"))
        if kind == "lattice":
            return HypercubicLattice(params.pop("d"))
    except KeyError as exc:
        raise ValueError(f"model {spec!r} is missing parameter {exc}") from None
    raise ValueError(f"unknown model kind {kind!r} (want tree|treexcycle|lattice|finite)")
