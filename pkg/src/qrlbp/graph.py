"""Edge-indexed Tanner graph with contiguous check/variable adjacency."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .gf2 import BitMatrix


@dataclass(frozen=True, eq=False)
class TannerAdjacency:
    """Sparse bipartite graph of a check matrix.

    Edges are numbered row-major over the matrix. ``cn_edges`` / ``vn_edges``
    hold edge ids grouped per check / variable, located by the prefix-sum
    offsets ``cn_ptr`` / ``vn_ptr``. Within a variable the edges follow
    ascending check index, and ``beta[k]`` is ``2**t`` for the edge in
    local position ``t``.
    """

    n_vars: int
    n_checks: int
    edge_check: np.ndarray
    edge_var: np.ndarray
    cn_ptr: np.ndarray
    cn_edges: np.ndarray
    vn_ptr: np.ndarray
    vn_edges: np.ndarray
    beta: np.ndarray

    @property
    def n_edges(self) -> int:
        return int(self.edge_check.size)

    @cached_property
    def var_degree(self) -> np.ndarray:
        return np.diff(self.vn_ptr)

    @cached_property
    def check_degree(self) -> np.ndarray:
        return np.diff(self.cn_ptr)

    @property
    def a_max(self) -> int:
        return int(self.var_degree.max(initial=0))

    @cached_property
    def active(self) -> list[int]:
        """Variables with at least one check."""
        return [i for i in range(self.n_vars) if self.var_degree[i] > 0]

    # Plain Python lists for the per-step hot loops; numpy scalar indexing
    # is several times slower than list indexing.
    @cached_property
    def var_edge_lists(self) -> list[list[int]]:
        ptr, edges = self.vn_ptr.tolist(), self.vn_edges.tolist()
        return [edges[ptr[i] : ptr[i + 1]] for i in range(self.n_vars)]

    @cached_property
    def check_edge_lists(self) -> list[list[int]]:
        ptr, edges = self.cn_ptr.tolist(), self.cn_edges.tolist()
        return [edges[ptr[j] : ptr[j + 1]] for j in range(self.n_checks)]

    @cached_property
    def edge_check_list(self) -> list[int]:
        return self.edge_check.tolist()

    @cached_property
    def edge_var_list(self) -> list[int]:
        return self.edge_var.tolist()

    @cached_property
    def beta_list(self) -> list[int]:
        return self.beta.tolist()

    def check_neighbors(self, j: int) -> np.ndarray:
        if not 0 <= j < self.n_checks:
            raise IndexError(f"check {j} out of range")
        return self.cn_edges[self.cn_ptr[j] : self.cn_ptr[j + 1]]

    def var_neighbors(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n_vars:
            raise IndexError(f"variable {i} out of range")
        return self.vn_edges[self.vn_ptr[i] : self.vn_ptr[i + 1]]

    def to_matrix(self) -> BitMatrix:
        rows = [0] * self.n_checks
        for j, i in zip(self.edge_check.tolist(), self.edge_var.tolist()):
            rows[j] |= 1 << i
        return BitMatrix(rows, self.n_vars)


def build_adjacency(m: BitMatrix) -> TannerAdjacency:
    n_checks, n_vars = m.shape
    checks, vars_ = [], []
    for j, row in enumerate(m.rows):
        while row:
            low = row & -row
            checks.append(j)
            vars_.append(low.bit_length() - 1)
            row ^= low
    edge_check = np.asarray(checks, dtype=np.int64)
    edge_var = np.asarray(vars_, dtype=np.int64)
    K = edge_check.size

    cn_ptr = np.zeros(n_checks + 1, dtype=np.int64)
    np.cumsum(np.bincount(edge_check, minlength=n_checks), out=cn_ptr[1:])
    vn_ptr = np.zeros(n_vars + 1, dtype=np.int64)
    np.cumsum(np.bincount(edge_var, minlength=n_vars), out=vn_ptr[1:])

    # Row-major numbering already groups edges by check.
    cn_edges = np.arange(K, dtype=np.int64)
    # Stable sort by variable keeps ascending check order inside each slice.
    vn_edges = np.argsort(edge_var, kind="stable").astype(np.int64)

    beta = np.zeros(K, dtype=np.int64)
    for i in range(n_vars):
        sl = vn_edges[vn_ptr[i] : vn_ptr[i + 1]]
        beta[sl] = 1 << np.arange(sl.size, dtype=np.int64)

    return TannerAdjacency(
        n_vars=n_vars,
        n_checks=n_checks,
        edge_check=edge_check,
        edge_var=edge_var,
        cn_ptr=cn_ptr,
        cn_edges=cn_edges,
        vn_ptr=vn_ptr,
        vn_edges=vn_edges,
        beta=beta,
    )


def second_order_neighborhood(adj: TannerAdjacency, i: int) -> set[int]:
    out: set[int] = set()
    for k in adj.var_neighbors(i):
        for k2 in adj.check_neighbors(int(adj.edge_check[k])):
            out.add(int(adj.edge_var[k2]))
    return out


def local_state(adj: TannerAdjacency, delta, i: int) -> int:
    """Bitmask of the residual bits on the checks of ``i`` in local order."""
    s = 0
    for k in adj.var_edge_lists[i]:
        if delta[adj.edge_check_list[k]]:
            s |= adj.beta_list[k]
    return s
