"""Ground truth by exhaustion.

Brute-force colouring/partition searches, a reference enumerator over all
labelled tournaments or semicomplete digraphs, and the vectorized kernels
the big exhaustive scans run on.  Everything here is deliberately dumb and
deterministic; the constructive solvers are tested against it.

Assignment encoding used throughout: vertex 0 is pinned (colour 1 / part1),
the remaining vertices form a base-k odometer in which vertex 1 varies
fastest.  "First witness" always means smallest encoded integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, Sequence

import numpy as np

from outcol.digraph import Colouring, Digraph, TwoPartition


class SearchSpaceTooLarge(ValueError):
    pass


class TooLarge(ValueError):
    pass


_GUARD = 1 << 32


# -- single-digraph searches --------------------------------------------------


def brute_force_out_colouring(
    d: Digraph, colours: int = 2, balanced: bool = False
) -> Colouring | None:
    """First k-out-colouring in encoding order, or None.

    balanced (2 colours only) additionally requires class sizes within 1.
    """
    n = d.n
    if colours < 1:
        raise ValueError("colours must be positive")
    if balanced and colours != 2:
        raise ValueError("balanced search is defined for 2 colours")
    if colours**n > _GUARD:
        raise SearchSpaceTooLarge(f"{colours}^{n} assignments")
    if n == 0:
        return Colouring((), colours)
    if colours == 2:
        e = _first_two_colouring_code(d, balanced)
        if e is None:
            return None
        part2 = e << 1
        return Colouring(tuple(2 if part2 >> v & 1 else 1 for v in range(n)), 2)
    # general k: odometer over vertices 1..n-1, vertex 1 fastest
    cols = [1] * n
    out = d.out
    while True:
        if _colouring_ok(out, cols, n):
            return Colouring(tuple(cols), colours)
        v = 1
        while v < n and cols[v] == colours:
            cols[v] = 1
            v += 1
        if v == n:
            return None
        cols[v] += 1


def _colouring_ok(out: list[int], cols: list[int], n: int) -> bool:
    for v in range(n):
        m = out[v]
        first = 0
        ok = False
        while m:
            low = m & -m
            c = cols[low.bit_length() - 1]
            m ^= low
            if first == 0:
                first = c
            elif c != first:
                ok = True
                break
        if not ok:
            return False
    return True


def _first_two_colouring_code(d: Digraph, balanced: bool) -> int | None:
    """Smallest e in 0..2^(n-1)-1 whose induced 2-colouring works, else None."""
    n = d.n
    adj = np.array(d.out, dtype=np.uint64)
    full = np.uint64((1 << n) - 1)
    space = 1 << (n - 1)
    chunk = 1 << 20
    for base in range(0, space, chunk):
        e = np.arange(base, min(base + chunk, space), dtype=np.uint64)
        m2 = e << np.uint64(1)
        good = np.ones(len(e), dtype=bool)
        for v in range(n):
            a = adj[v]
            good &= (a & m2) != 0
            good &= (a & (full ^ m2)) != 0
            if not good.any():
                break
        if balanced:
            sizes = np.bitwise_count(m2)
            good &= np.abs(n - 2 * sizes.astype(np.int64)) <= 1
        hits = np.flatnonzero(good)
        if len(hits):
            return int(e[hits[0]])
    return None


def brute_force_partition_k(
    d: Digraph, k: int, balanced: bool = False
) -> TwoPartition | None:
    """First 2-partition with every vertex having >= k out-neighbours in
    both parts, in encoding order; None if there is none."""
    n = d.n
    if k < 0:
        raise ValueError("k must be >= 0")
    if 1 << n > _GUARD:
        raise SearchSpaceTooLarge(f"2^{n} partitions")
    if n < 2:
        return None
    adj = np.array(d.out, dtype=np.uint64)
    full = np.uint64((1 << n) - 1)
    space = 1 << (n - 1)
    chunk = 1 << 20
    kk = np.uint64(k)
    for base in range(0, space, chunk):
        e = np.arange(base, min(base + chunk, space), dtype=np.uint64)
        if base == 0:
            e = e[1:]  # part2 must be non-empty
        m2 = e << np.uint64(1)
        good = np.ones(len(e), dtype=bool)
        for v in range(n):
            a = adj[v]
            good &= np.bitwise_count(a & m2) >= kk
            good &= np.bitwise_count(a & (full ^ m2)) >= kk
            if not good.any():
                break
        if balanced:
            sizes = np.bitwise_count(m2)
            good &= np.abs(n - 2 * sizes.astype(np.int64)) <= 1
        hits = np.flatnonzero(good)
        if len(hits):
            part2 = int(e[hits[0]]) << 1
            p2 = tuple(v for v in range(n) if part2 >> v & 1)
            p1 = tuple(v for v in range(n) if not part2 >> v & 1)
            return TwoPartition(p1, p2)
    return None


# -- NAE formulas and hypergraphs ----------------------------------------------


def nae_brute_force(
    n_vars: int, clauses: Sequence[tuple[int, int, int]]
) -> tuple[bool, ...] | None:
    """First assignment (variable 0 least significant) where every clause
    sees both a true and a false literal; monotone clauses of 3 variables."""
    if n_vars > 25:
        raise TooLarge(f"{n_vars} variables")
    for cl in clauses:
        if len(cl) != 3 or any(not 0 <= x < n_vars for x in cl):
            raise ValueError(f"bad clause {cl!r}")
    space = 1 << n_vars
    chunk = 1 << 20
    for base in range(0, space, chunk):
        e = np.arange(base, min(base + chunk, space), dtype=np.uint64)
        good = np.ones(len(e), dtype=bool)
        for a, b, c in clauses:
            s = (
                (e >> np.uint64(a) & np.uint64(1))
                + (e >> np.uint64(b) & np.uint64(1))
                + (e >> np.uint64(c) & np.uint64(1))
            )
            good &= (s > 0) & (s < 3)
            if not good.any():
                break
        hits = np.flatnonzero(good)
        if len(hits):
            w = int(e[hits[0]])
            return tuple(bool(w >> i & 1) for i in range(n_vars))
    return None


def nae_brute_force_signed(
    n_vars: int, clauses: Sequence[tuple[int, int, int]]
) -> tuple[bool, ...] | None:
    """Signed variant: literals are 1-based ints, negative for negation."""
    if n_vars > 25:
        raise TooLarge(f"{n_vars} variables")
    for cl in clauses:
        if len(cl) != 3 or any(lit == 0 or abs(lit) > n_vars for lit in cl):
            raise ValueError(f"bad clause {cl!r}")
    space = 1 << n_vars
    chunk = 1 << 20
    one = np.uint64(1)
    for base in range(0, space, chunk):
        e = np.arange(base, min(base + chunk, space), dtype=np.uint64)
        good = np.ones(len(e), dtype=bool)
        for cl in clauses:
            s = np.zeros(len(e), dtype=np.uint64)
            for lit in cl:
                bit = e >> np.uint64(abs(lit) - 1) & one
                s += bit ^ one if lit < 0 else bit
            good &= (s > 0) & (s < 3)
            if not good.any():
                break
        hits = np.flatnonzero(good)
        if len(hits):
            w = int(e[hits[0]])
            return tuple(bool(w >> i & 1) for i in range(n_vars))
    return None


def nice_partition_brute_force(d: Digraph) -> tuple[int, ...] | None:
    """First V1 (as a sorted tuple) of a partition where every vertex has an
    out-neighbour in the other part and every V1 vertex one inside V1.

    The cap is one higher than the other searches: deciding the smallest
    unsatisfiable 3-literal not-all-equal formula (3 variables, 4
    clauses) through its 26-vertex gadget chain must stay in reach."""
    if d.n > 26:
        raise TooLarge(f"{d.n} vertices")
    full = np.uint64((1 << d.n) - 1)
    space = 1 << d.n
    chunk = 1 << 20
    zero = np.uint64(0)
    for base in range(0, space, chunk):
        m1 = np.arange(base, min(base + chunk, space), dtype=np.uint64)
        good = np.ones(len(m1), dtype=bool)
        for v in range(d.n):
            ov = np.uint64(d.out[v])
            in_v1 = (m1 >> np.uint64(v) & np.uint64(1)) != 0
            cross = np.where(in_v1, m1 ^ full, m1)
            good &= (ov & cross) != zero
            good &= ~in_v1 | ((ov & m1) != zero)
            if not good.any():
                break
        hits = np.flatnonzero(good)
        if len(hits):
            w = int(m1[hits[0]])
            return tuple(v for v in range(d.n) if w >> v & 1)
    return None


def hypergraph_2colourable(
    n: int, edges: Sequence[Sequence[int]]
) -> tuple[int, ...] | None:
    """First 2-colouring with no monochromatic edge (bit v=1 means colour 2)."""
    if n > 25:
        raise TooLarge(f"{n} vertices")
    masks = []
    for edge in edges:
        m = 0
        for v in edge:
            if not 0 <= v < n:
                raise ValueError(f"edge vertex {v} out of range")
            m |= 1 << v
        masks.append(np.uint64(m))
    space = 1 << n
    chunk = 1 << 20
    for base in range(0, space, chunk):
        e = np.arange(base, min(base + chunk, space), dtype=np.uint64)
        good = np.ones(len(e), dtype=bool)
        for m in masks:
            hit = e & m
            good &= (hit != 0) & (hit != m)
            if not good.any():
                break
        hits = np.flatnonzero(good)
        if len(hits):
            w = int(e[hits[0]])
            return tuple(2 if w >> v & 1 else 1 for v in range(n))
    return None


# -- labelled enumeration -------------------------------------------------------


@dataclass(frozen=True)
class EnumerationSpec:
    """Scan description: all labelled members of the class on n vertices."""

    n: int
    kind: str  # "tournament" | "semicomplete"
    predicate: Callable[[Digraph], bool] | None = None
    dedup: str = "none"  # "none" | "canonical"

    def __post_init__(self):
        if self.kind not in ("tournament", "semicomplete"):
            raise ValueError(f"unknown class {self.kind!r}")
        if self.dedup not in ("none", "canonical"):
            raise ValueError(f"unknown dedup {self.dedup!r}")
        limit = 7 if self.kind == "tournament" else 6
        if self.n > limit:
            raise SearchSpaceTooLarge(f"{self.kind} scan capped at n={limit}")
        if self.n < 0:
            raise ValueError("negative n")

    @property
    def base(self) -> int:
        return 2 if self.kind == "tournament" else 3

    @property
    def total(self) -> int:
        return self.base ** (self.n * (self.n - 1) // 2)


@dataclass(frozen=True)
class EnumStats:
    total: int
    visited: int  # digraphs passing the predicate
    classes: int | None  # canonical classes among them, if dedup requested


def pair_list(n: int) -> list[tuple[int, int]]:
    """Vertex pairs in odometer order; pair (0,1) is the fastest digit."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def code_to_digraph(code: int, n: int, kind: str) -> Digraph:
    """Digit 0: i->j, 1: j->i, 2 (semicomplete only): both."""
    base = 2 if kind == "tournament" else 3
    arcs = []
    for i, j in pair_list(n):
        code, digit = divmod(code, base)
        if digit != 1:
            arcs.append((i, j))
        if digit >= 1:
            arcs.append((j, i))
    return Digraph(n, arcs)


def enumerate_digraphs(
    spec: EnumerationSpec,
    visitor: Callable[[Digraph, int], None] | None = None,
    threads: int = 1,
) -> EnumStats:
    """Visit every labelled digraph of the class in code order.

    With dedup="canonical" the visitor sees one representative per
    isomorphism class (per worker span when threads > 1); the returned
    class count is global and thread-count independent, as is `visited`.
    """
    if spec.dedup == "canonical":
        from outcol.catalog import canonical_form
    total = spec.total

    def run_span(lo: int, hi: int) -> tuple[int, set[bytes]]:
        seen: set[bytes] = set()
        visited = 0
        for code in range(lo, hi):
            d = code_to_digraph(code, spec.n, spec.kind)
            if spec.predicate is not None and not spec.predicate(d):
                continue
            visited += 1
            if spec.dedup == "canonical":
                key = canonical_form(d)
                if key in seen:
                    continue
                seen.add(key)
            if visitor is not None:
                visitor(d, code)
        return visited, seen

    if threads <= 1 or total < 2 * threads:
        visited, seen = run_span(0, total)
    else:
        step = -(-total // threads)
        spans = [(lo, min(lo + step, total)) for lo in range(0, total, step)]
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda s: run_span(*s), spans))
        visited = sum(p[0] for p in parts)
        seen = set().union(*(p[1] for p in parts))
    classes = len(seen) if spec.dedup == "canonical" else None
    return EnumStats(total, visited, classes)


# -- vectorized scan kernels -----------------------------------------------------


def _mask_dtype(n: int):
    if n <= 8:
        return np.uint8
    if n <= 16:
        return np.uint16
    return np.uint32


def adjacency_block(codes: np.ndarray, n: int, kind: str) -> np.ndarray:
    """Decode codes into out-neighbour bitmasks, shape (len(codes), n).

    Matches code_to_digraph bit for bit.
    """
    base = 2 if kind == "tournament" else 3
    dt = _mask_dtype(n)
    adj = np.zeros((len(codes), n), dtype=dt)
    t = codes.astype(np.int64).copy()
    for i, j in pair_list(n):
        digit = t % base
        t //= base
        adj[:, i] |= (digit != 1).astype(dt) << dt(j)
        adj[:, j] |= (digit >= 1).astype(dt) << dt(i)
    return adj


def adjacency_chunks(
    n: int, kind: str, chunk: int = 1 << 20
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """(codes, adjacency) blocks covering the whole labelled class."""
    base = 2 if kind == "tournament" else 3
    total = base ** (n * (n - 1) // 2)
    for lo in range(0, total, chunk):
        codes = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        yield codes, adjacency_block(codes, n, kind)


def min_out_degrees(adj: np.ndarray) -> np.ndarray:
    return np.bitwise_count(adj).min(axis=1)


def out_colourable_mask(
    adj: np.ndarray, balanced: bool = False, return_first: bool = False
) -> np.ndarray | tuple[np.ndarray, np.ndarray]:
    """Which rows admit a 2-out-colouring; optionally the first witness code.

    Witness codes use the shared encoding (vertex 0 in part 1, bit v-1 of the
    code = vertex v in part 2); -1 where no colouring exists.
    """
    rows, n = adj.shape
    wide = adj.astype(np.uint32)
    full = np.uint32((1 << n) - 1)
    es = np.arange(1 << (n - 1), dtype=np.uint32)
    if balanced:
        sizes = np.bitwise_count(es << np.uint32(1))
        es = es[np.abs(n - 2 * sizes.astype(np.int64)) <= 1]
    m2 = (es << np.uint32(1))[None, :]
    good = np.ones((rows, len(es)), dtype=bool)
    for v in range(n):
        a = wide[:, v][:, None]
        good &= (a & m2) != 0
        good &= (a & (full ^ m2)) != 0
    ok = good.any(axis=1)
    if not return_first:
        return ok
    first = np.full(rows, -1, dtype=np.int64)
    idx = np.argmax(good, axis=1)
    first[ok] = es[idx[ok]].astype(np.int64)
    return ok, first


def colouring_from_code(n: int, e: int) -> Colouring:
    """Decode a witness code from out_colourable_mask / the brute forcer."""
    part2 = e << 1
    return Colouring(tuple(2 if part2 >> v & 1 else 1 for v in range(n)), 2)
