"""Rooted trees and star networks.

Nodes are dense integers ``0..node_count-1``.  Edge ``i`` of a tree carries
channel ``i``.  Heights, predecessors and successor lists are computed once at
construction; trees are immutable afterwards.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterable, Sequence
from functools import cached_property

from .errors import InvalidTopologyError, NoPredecessorError


class RootedTree:
    """A tree network rooted at ``root`` with an end/intermediate node partition."""

    def __init__(
        self,
        node_count: int,
        root: int,
        edges: Iterable[Sequence[int]],
        end_nodes: Iterable[int],
    ):
        if node_count < 1:
            raise InvalidTopologyError("node_count must be positive")
        edges = tuple((int(u), int(v)) for u, v in edges)
        if len(edges) != node_count - 1:
            raise InvalidTopologyError(
                f"a tree on {node_count} nodes has {node_count - 1} edges, got {len(edges)}"
            )
        if not 0 <= root < node_count:
            raise InvalidTopologyError(f"root {root} out of range")
        end_nodes = frozenset(int(v) for v in end_nodes)
        if any(not 0 <= v < node_count for v in end_nodes):
            raise InvalidTopologyError("end node label out of range")

        adjacency: list[list[int]] = [[] for _ in range(node_count)]
        edge_index: dict[frozenset[int], int] = {}
        for i, (u, v) in enumerate(edges):
            if not (0 <= u < node_count and 0 <= v < node_count) or u == v:
                raise InvalidTopologyError(f"bad edge {i}: ({u}, {v})")
            key = frozenset((u, v))
            if key in edge_index:
                raise InvalidTopologyError(f"duplicate edge ({u}, {v})")
            edge_index[key] = i
            adjacency[u].append(v)
            adjacency[v].append(u)

        height = [-1] * node_count
        parent = [-1] * node_count
        height[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in adjacency[u]:
                if height[w] < 0:
                    height[w] = height[u] + 1
                    parent[w] = u
                    queue.append(w)
        if min(height) < 0:
            raise InvalidTopologyError("tree is not connected")

        self.node_count = node_count
        self.root = int(root)
        self.edges = edges
        self.end_nodes = end_nodes
        self.intermediate_nodes = frozenset(range(node_count)) - end_nodes
        self._height = tuple(height)
        self._parent = tuple(parent)
        self._edge_index = edge_index
        self._children = tuple(
            tuple(sorted(w for w in adjacency[u] if parent[w] == u)) for u in range(node_count)
        )

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(node_count={self.node_count}, root={self.root}, "
            f"edges={list(self.edges)}, end_nodes={sorted(self.end_nodes)})"
        )

    @property
    def heights(self) -> dict[int, int]:
        return dict(enumerate(self._height))

    def height(self, v: int) -> int:
        return self._height[v]

    @property
    def h_max(self) -> int:
        return max(self._height)

    def level(self, k: int) -> list[int]:
        """Nodes at height ``k``, ascending."""
        return [v for v, h in enumerate(self._height) if h == k]

    @cached_property
    def levels(self) -> list[list[int]]:
        return [self.level(k) for k in range(self.h_max + 1)]

    @property
    def leaves(self) -> frozenset[int]:
        """Nodes at maximal height (not every childless node is a leaf here)."""
        top = self.h_max
        return frozenset(v for v, h in enumerate(self._height) if h == top)

    @property
    def leaves_are_end_nodes(self) -> bool:
        """True when the childless non-root nodes are exactly the max-height leaves."""
        childless = {v for v in range(self.node_count) if not self._children[v] and v != self.root}
        return childless == set(self.leaves)

    def predecessor(self, v: int) -> int:
        self._check_node(v)
        if v == self.root:
            raise NoPredecessorError(f"root {v} has no predecessor")
        return self._parent[v]

    def successors(self, v: int) -> list[int]:
        self._check_node(v)
        return list(self._children[v])

    def edge_id(self, u: int, v: int) -> int:
        """Channel index carried by the edge joining ``u`` and ``v``."""
        try:
            return self._edge_index[frozenset((u, v))]
        except KeyError:
            raise InvalidTopologyError(f"no edge between {u} and {v}") from None

    def incoming_channel(self, v: int) -> int:
        return self.edge_id(self.predecessor(v), v)

    def _check_node(self, v: int) -> None:
        if not 0 <= v < self.node_count:
            raise InvalidTopologyError(f"node {v} not in tree")


def build_tree(edges, root: int, end_nodes, node_count: int | None = None) -> RootedTree:
    edges = [tuple(e) for e in edges]
    if node_count is None:
        node_count = len(edges) + 1
    return RootedTree(node_count, root, edges, end_nodes)


class StarTopology(RootedTree):
    """Star with end-nodes ``0..n-1`` around intermediate node ``n``, rooted at end-node 0.

    Channel ``j`` is the edge ``(j, n)``.
    """

    def __init__(self, n: int):
        if n < 2:
            raise InvalidTopologyError(f"a star needs at least 2 end-nodes, got n={n}")
        self.n = n
        super().__init__(n + 1, 0, [(j, n) for j in range(n)], range(n))

    def __repr__(self) -> str:
        return f"StarTopology(n={self.n})"

    @property
    def center(self) -> int:
        return self.n


def build_star(n: int) -> StarTopology:
    return StarTopology(n)
