"""Triangular Young tableaux, hook walks, and tree linear extensions.

Conventions.  Diagrams are drawn in the French way: row 0 is the bottom row
and rows are numbered upward, so row lengths are weakly decreasing bottom-up.
A standard filling uses each label 1..N once, strictly increasing left to
right along rows and bottom to top along columns.  The triangular shape of
parameters (p, l, n) stacks n blocks of p rows with lengths n*l, (n-1)*l,
..., l from the bottom; it has N = p*l*n*(n+1)/2 cells, and the *corner* is
the last cell of the bottom row.

Sampling uses the classical hook-walk construction: pick a uniformly random
remaining cell, walk by jumping to a uniformly random cell of the current
cell's hook (arm or leg) until reaching a corner of the remaining diagram,
place the largest unplaced label there, remove the cell, repeat.  One pass
removes each corner with exactly the probability that makes the resulting
filling uniform, which the uniformity tests confirm against enumeration.
``sample_corner_entry`` is the same process stopped as soon as the tracked
corner is filled, which leaves the corner label's distribution untouched.

Corner-to-tree correspondence.  The corner label of a uniform standard
filling has the same law as the label of a distinguished vertex under a
uniform linear extension of a caterpillar tree built as follows.  A chain
v_1 .. v_{n*l} carries p pendant leaves at each v_{k*l} for k = 1..n-1 and,
when p >= 2, p-1 leaf children at v_{n*l} (one of which is the chain
terminator of the usual description; for p = 1 the hook length of the corner
cell forces v_{n*l} itself to be the final leaf, so the leftmost branch has
n*l vertices instead of n*l + 1).  That small tree S has n*(p+l) - 1
vertices, and its leftmost-branch subtree sizes reproduce the hook lengths of
the bottom row.  The big tree T adds a root v_0 below v_1 together with
N + 1 - n*(p+l) extra leaf children of v_0, for N + 1 vertices in total.
Under this construction the corner label X of the N-cell shape satisfies,
exactly at every finite size checked (all N <= 12),

    X  =law=  E_T(v_{n*l})             (labels 0..N, no offset), and
    n*(p+l) - 1 - E_S(v_{n*l})  =law=  black count of the period-p urn
                                        with parameter l, b0 = p, w0 = l,
                                        after (n-1)*p steps.

Linear extensions of a tree are ancestor-increasing bijections onto
{0..V-1}; they are counted by V! over the product of subtree sizes, sampled
exactly by repeatedly picking an available root with probability proportional
to its subtree size, and the label law of a fixed vertex is computed exactly
by dynamic programming over the multiset of available subtrees.

Hook walks and tree sampling draw many small scalar variates, so they take a
``random.Random``; the vectorized Monte Carlo elsewhere uses numpy generators.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import BoundExceeded, InconsistentTree, InvalidParams

__all__ = [
    "TableauShape",
    "Tableau",
    "TreeNode",
    "CornerTrees",
    "make_shape",
    "hook_lengths",
    "syt_count",
    "enumerate_syt",
    "sample_syt_hookwalk",
    "sample_corner_entry",
    "sample_corner_entries",
    "corner_entry",
    "corner_statistic",
    "corner_reference_scale",
    "build_trees",
    "count_linear_extensions",
    "enumerate_linear_extensions",
    "sample_linear_extension",
    "linear_extension_label_pmf",
    "write_tableau_csv",
]


# ---------------------------------------------------------------------------
# Shapes and fillings


@dataclass(frozen=True)
class TableauShape:
    p: int
    ell: int
    n: int
    row_lengths: tuple[int, ...]  # bottom-up, weakly decreasing

    @property
    def total_cells(self) -> int:
        return sum(self.row_lengths)

    @property
    def corner(self) -> tuple[int, int]:
        """(row, column) of the last cell of the bottom row."""
        return (0, self.row_lengths[0] - 1)


def make_shape(p: int, ell: int, n: int) -> TableauShape:
    """Triangular shape: n blocks of p rows, block i of length (n+1-i)*l."""
    for name, v in (("p", p), ("ell", ell), ("n", n)):
        if not isinstance(v, int) or v < 1:
            raise InvalidParams(f"{name}={v!r} must be a positive integer")
    rows: list[int] = []
    for i in range(1, n + 1):
        rows.extend([(n + 1 - i) * ell] * p)
    shape = TableauShape(p, ell, n, tuple(rows))
    assert shape.total_cells == p * ell * n * (n + 1) // 2
    return shape


@dataclass(frozen=True)
class Tableau:
    shape: TableauShape
    entries: tuple[tuple[int, ...], ...]  # bottom-up rows

    def is_standard(self) -> bool:
        rows = self.entries
        seen = sorted(v for row in rows for v in row)
        if seen != list(range(1, self.shape.total_cells + 1)):
            return False
        for r, row in enumerate(rows):
            for c, v in enumerate(row):
                if c + 1 < len(row) and not v < row[c + 1]:
                    return False
                if r + 1 < len(rows) and c < len(rows[r + 1]) and not v < rows[r + 1][c]:
                    return False
        return True


def corner_entry(tableau: Tableau) -> int:
    r, c = tableau.shape.corner
    return tableau.entries[r][c]


def _column_heights(row_lengths) -> list[int]:
    if not row_lengths or row_lengths[0] == 0:
        return []
    heights = []
    for c in range(row_lengths[0]):
        h = 0
        for length in row_lengths:
            if length > c:
                h += 1
            else:
                break
        heights.append(h)
    return heights


def hook_lengths(shape: TableauShape) -> dict[tuple[int, int], int]:
    """arm + leg + 1 for every cell."""
    rows = shape.row_lengths
    cols = _column_heights(rows)
    return {
        (r, c): (rows[r] - c - 1) + (cols[c] - r - 1) + 1
        for r in range(len(rows))
        for c in range(rows[r])
    }


def syt_count(shape: TableauShape) -> int:
    """Number of standard fillings: N! over the product of all hooks."""
    hooks = hook_lengths(shape)
    prod = 1
    for h in hooks.values():
        prod *= h
    return math.factorial(shape.total_cells) // prod


def enumerate_syt(shape: TableauShape, bound: int = 18) -> Iterator[Tableau]:
    """Yield every standard filling once (backtracking over label placements).

    Refuses shapes with more than ``bound`` cells; the default keeps the worst
    case well under a minute.
    """
    if shape.total_cells > bound:
        raise BoundExceeded(
            f"shape has {shape.total_cells} cells, enumeration bound is {bound}"
        )
    rows = shape.row_lengths
    nrows = len(rows)
    total = shape.total_cells
    fill = [0] * nrows
    grid = [[0] * length for length in rows]

    def place(label: int) -> Iterator[Tableau]:
        if label > total:
            yield Tableau(shape, tuple(tuple(row) for row in grid))
            return
        for r in range(nrows):
            c = fill[r]
            # next free cell of row r is addable iff the cell below is filled
            if c < rows[r] and (r == 0 or fill[r - 1] > c):
                grid[r][c] = label
                fill[r] += 1
                yield from place(label + 1)
                fill[r] -= 1
                grid[r][c] = 0

    yield from place(1)


# ---------------------------------------------------------------------------
# Hook walk sampling


def _hook_walk_remove(rows: list[int], cols: list[int], rng: random.Random) -> tuple[int, int]:
    """Remove one corner chosen by a hook walk from a uniform start cell;
    returns the removed (row, column)."""
    # uniform remaining cell: rejection inside the bounding box, with a
    # linear-scan fallback for badly filled boxes
    for _ in range(64):
        r = rng.randrange(cols[0])
        c = rng.randrange(rows[0])
        if c < rows[r]:
            break
    else:
        idx = rng.randrange(sum(rows))
        r = 0
        while idx >= rows[r]:
            idx -= rows[r]
            r += 1
        c = idx
    while True:
        arm = rows[r] - c - 1
        leg = cols[c] - r - 1
        span = arm + leg
        if span == 0:
            break
        t = rng.randrange(span)
        if t < arm:
            c += 1 + t
        else:
            r += 1 + (t - arm)
    rows[r] -= 1
    cols[c] -= 1
    return r, c


def sample_syt_hookwalk(shape: TableauShape, rng: random.Random) -> Tableau:
    """One exactly uniform standard filling."""
    rows = list(shape.row_lengths)
    cols = _column_heights(rows)
    grid = [[0] * length for length in rows]
    for label in range(shape.total_cells, 0, -1):
        r, c = _hook_walk_remove(rows, cols, rng)
        grid[r][c] = label
    return Tableau(shape, tuple(tuple(row) for row in grid))


def sample_corner_entry(shape: TableauShape, rng: random.Random) -> int:
    """Corner label of a uniform filling, stopping the walk sequence at the
    corner; distributionally identical to sampling a full tableau first."""
    target = shape.corner
    rows = list(shape.row_lengths)
    cols = _column_heights(rows)
    for label in range(shape.total_cells, 0, -1):
        if _hook_walk_remove(rows, cols, rng) == target:
            return label
    raise AssertionError("corner cell never removed")  # unreachable


def sample_corner_entries(shape: TableauShape, reps: int, seed: int) -> np.ndarray:
    """reps corner labels; replication j owns the stream keyed by (seed, j),
    so any partition of the replication range reproduces the same sample."""
    if reps < 1:
        raise InvalidParams(f"reps must be >= 1, got {reps}")
    out = np.empty(reps, dtype=np.int64)
    for j in range(reps):
        out[j] = sample_corner_entry(shape, random.Random((seed << 64) + j))
    return out


def corner_statistic(x, p: int, ell: int, n: int):
    """Rescaled corner gap: p^delta / (p+l) * (N - x) / n^(1+delta)."""
    for name, v in (("p", p), ("ell", ell), ("n", n)):
        if not isinstance(v, int) or v < 1:
            raise InvalidParams(f"{name}={v!r} must be a positive integer")
    total = p * ell * n * (n + 1) // 2
    delta = p / (p + ell)
    coeff = p**delta / (p + ell)
    result = coeff * (total - np.asarray(x, dtype=np.float64)) / float(n) ** (1.0 + delta)
    return float(result) if np.isscalar(x) else result


def corner_reference_scale(p: int, ell: int) -> float:
    """Deterministic constant kappa = l * p * p^delta / (2 * (p + l)).

    ``corner_statistic`` converges in law to kappa times the product limit
    law of the period-p urn with b0 = p, w0 = l; equivalently the plain gap
    2/(l*p) * (N - X) / n^(1+delta) converges to that law with no constant.
    kappa was pinned down empirically: the exact corner pmf equals the tree
    label pmf at every N <= 12, the resulting exact finite-size laws scale as
    kappa times the urn limit for (p, l) in {(2,1), (1,1), (3,1), (1,2),
    (2,2)} at large n, and the l*p/2 factor is what the cell count
    N = p*l*n*(n+1)/2 contributes to the corner gap per unit of n^(1+delta).
    """
    delta = p / (p + ell)
    return ell * p * p**delta / (2 * (p + ell))


def write_tableau_csv(tableau: Tableau, path: str | Path) -> None:
    """Row-major grid, bottom row first, empty cells blank."""
    width = tableau.shape.row_lengths[0]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in tableau.entries:
            writer.writerow(list(row) + [""] * (width - len(row)))


# ---------------------------------------------------------------------------
# Trees and linear extensions


class TreeNode:
    """Immutable rooted planar tree node; ``size`` counts the whole subtree."""

    __slots__ = ("children", "size")

    def __init__(self, children: tuple["TreeNode", ...] = ()):
        self.children = children
        self.size = 1 + sum(child.size for child in children)

    def __repr__(self):
        return f"TreeNode(size={self.size}, degree={len(self.children)})"

    def walk(self) -> Iterator["TreeNode"]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)


@dataclass(frozen=True)
class CornerTrees:
    """The small chain-with-leaves tree, the rooted big tree, and the tracked
    chain vertex whose linear-extension label mirrors the tableau corner."""

    p: int
    ell: int
    n: int
    small_root: TreeNode
    big_root: TreeNode
    chain: tuple[TreeNode, ...]  # v_1 .. v_{n*l} inside the small tree
    root_extra_leaves: int  # leaf children added beside the chain at v_0

    @property
    def target(self) -> TreeNode:
        """v_{n*l}: the chain vertex mirroring the corner (shared by S and T)."""
        return self.chain[-1]


def build_trees(p: int, ell: int, n: int) -> CornerTrees:
    """Build the small and big corner-correspondence trees.

    Pendant leaf counts follow the module docstring: p leaves at v_{k*l} for
    k = 1..n-1, and p-1 at v_{n*l} when p >= 2.  The big tree must end up
    with exactly N + 1 vertices, which pins the number of extra leaves at the
    root to N + 1 - n*(p+l); a shape for which that count would be negative
    cannot be reconciled.
    """
    for name, v in (("p", p), ("ell", ell), ("n", n)):
        if not isinstance(v, int) or v < 1:
            raise InvalidParams(f"{name}={v!r} must be a positive integer")
    total = p * ell * n * (n + 1) // 2
    chain_len = n * ell
    pendant = [0] * (chain_len + 1)  # 1-indexed
    for k in range(1, n):
        pendant[k * ell] += p
    if p >= 2:
        pendant[chain_len] += p - 1
    below: TreeNode | None = None
    chain_rev: list[TreeNode] = []
    for j in range(chain_len, 0, -1):
        kids = tuple(TreeNode() for _ in range(pendant[j]))
        if below is not None:
            kids = (below,) + kids
        below = TreeNode(kids)
        chain_rev.append(below)
    small_root = chain_rev[-1]
    chain = tuple(reversed(chain_rev))
    if small_root.size != n * (p + ell) - 1:
        raise InconsistentTree(
            f"small tree has {small_root.size} vertices, expected {n * (p + ell) - 1}"
        )
    extra = total + 1 - (small_root.size + 1)
    if extra < 0:
        raise InconsistentTree(
            f"big tree cannot reach {total + 1} vertices: small tree already has "
            f"{small_root.size}"
        )
    big_root = TreeNode((small_root,) + tuple(TreeNode() for _ in range(extra)))
    if big_root.size != total + 1:
        raise InconsistentTree(
            f"big tree has {big_root.size} vertices, expected {total + 1}"
        )
    return CornerTrees(p, ell, n, small_root, big_root, chain, extra)


def count_linear_extensions(root: TreeNode) -> int:
    """V! over the product of all subtree sizes."""
    count = math.factorial(root.size)
    for node in root.walk():
        count //= node.size
    return count


def enumerate_linear_extensions(
    root: TreeNode, max_vertices: int = 16
) -> Iterator[dict[TreeNode, int]]:
    """Yield every ancestor-increasing labeling onto {0..V-1} exactly once."""
    if root.size > max_vertices:
        raise BoundExceeded(
            f"tree has {root.size} vertices, enumeration bound is {max_vertices}"
        )
    labels: dict[TreeNode, int] = {}
    available: list[TreeNode] = [root]

    def assign(label: int) -> Iterator[dict[TreeNode, int]]:
        if not available:
            yield dict(labels)
            return
        for i in range(len(available)):
            node = available.pop(i)
            labels[node] = label
            available.extend(node.children)
            yield from assign(label + 1)
            if node.children:
                del available[-len(node.children) :]
            available.insert(i, node)
            del labels[node]

    yield from assign(0)


def sample_linear_extension(root: TreeNode, rng: random.Random) -> dict[TreeNode, int]:
    """Exactly uniform labeling: repeatedly pick an available root with
    probability proportional to its subtree size."""
    labels: dict[TreeNode, int] = {}
    available: list[TreeNode] = [root]
    remaining = root.size
    for label in range(root.size):
        pick = rng.randrange(remaining)
        for i, node in enumerate(available):
            pick -= node.size
            if pick < 0:
                break
        labels[node] = label
        available[i : i + 1] = node.children
        remaining -= 1
    return labels


def linear_extension_label_pmf(root: TreeNode, target: TreeNode) -> dict[int, Fraction]:
    """Exact law of ``target``'s label under a uniform linear extension.

    Dynamic program over the multiset of available subtrees, collapsing
    isomorphic subtrees (the target's branch is tagged apart).  Fast for the
    caterpillar trees built here; worst-case cost grows with the number of
    distinct available-subtree multisets.
    """
    sig_cache: dict[int, tuple] = {}

    def signature(node: TreeNode) -> tuple:
        cached = sig_cache.get(id(node))
        if cached is not None:
            return cached
        kids = tuple(sorted(signature(ch) for ch in node.children))
        if node is target:
            tag = 1
        elif any(k[0] for k in kids):
            tag = 2
        else:
            tag = 0
        sig = (tag, node.size, kids)
        sig_cache[id(node)] = sig
        return sig

    if not any(node is target for node in root.walk()):
        raise InvalidParams("target vertex is not in the tree")
    # forward propagation over multiset states, one pick per layer; every
    # state still contains exactly one tagged subtree until the target is
    # picked, at which point its probability mass leaves the frontier
    frontier: dict[tuple, Fraction] = {(signature(root),): Fraction(1)}
    pmf: dict[int, Fraction] = {}
    label = 0
    while frontier:
        nxt: dict[tuple, Fraction] = {}
        for avail, prob in frontier.items():
            remaining = sum(s[1] for s in avail)
            i = 0
            while i < len(avail):
                j = i
                while j < len(avail) and avail[j] == avail[i]:
                    j += 1
                sig = avail[i]
                share = prob * Fraction((j - i) * sig[1], remaining)
                if sig[0] == 1:
                    pmf[label] = pmf.get(label, Fraction(0)) + share
                else:
                    rest = tuple(sorted(avail[:i] + avail[i + 1 :] + sig[2]))
                    if rest:
                        nxt[rest] = nxt.get(rest, Fraction(0)) + share
                i = j
        frontier = nxt
        label += 1
    return dict(sorted(pmf.items()))
