"""Array-backed disjoint-set forest with union by size and path halving."""

from __future__ import annotations


class DisjointSet:
    """Disjoint sets over the integers ``0 .. n-1``.

    Tracks the size of every root so component-size distributions can be
    read without a relabelling pass.
    """

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n
        self.n_components = n

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, a: int, b: int) -> bool:
        """Merge the sets holding ``a`` and ``b``; return True if they were distinct."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.n_components -= 1
        return True

    def component_sizes(self) -> list[int]:
        return sorted(self.size[i] for i in range(len(self.parent)) if self.parent[i] == i)
