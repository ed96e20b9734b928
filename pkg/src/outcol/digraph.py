"""Digraphs on dense vertex ids with bit-set adjacency.

Everything downstream (solvers, enumeration, reductions) works on this
representation: vertices are 0..n-1, out-neighbourhoods are Python int
bitmasks, values are frozen after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class NotTournament(ValueError):
    pass


class NotStrong(ValueError):
    pass


class LenOutOfRange(ValueError):
    pass


class TooSmall(ValueError):
    pass


class SizeMismatch(ValueError):
    pass


class NotAPartition(ValueError):
    pass


class FormatError(ValueError):
    pass


def bits(mask: int) -> Iterator[int]:
    """Set bit positions of mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def low_bit(mask: int) -> int:
    """Position of the lowest set bit; mask must be non-zero."""
    return (mask & -mask).bit_length() - 1


class Digraph:
    """Immutable digraph; no self-loops, 2-cycles allowed."""

    __slots__ = ("n", "out", "_in")

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]] = ()):
        if n < 0:
            raise ValueError("negative vertex count")
        self.n = n
        out = [0] * n
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"arc ({u},{v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            out[u] |= 1 << v
        self.out = out
        self._in = None

    # -- queries ---------------------------------------------------------

    def has_arc(self, u: int, v: int) -> bool:
        return self.out[u] >> v & 1 == 1

    def out_degree(self, u: int) -> int:
        return self.out[u].bit_count()

    def in_degree(self, u: int) -> int:
        return self.in_masks()[u].bit_count()

    def out_neighbours(self, u: int) -> list[int]:
        return list(bits(self.out[u]))

    def in_masks(self) -> list[int]:
        im = self._in
        if im is None:
            im = [0] * self.n
            for u, m in enumerate(self.out):
                for v in bits(m):
                    im[v] |= 1 << u
            self._in = im
        return im

    def arcs(self) -> Iterator[tuple[int, int]]:
        """All arcs, sorted by (u, v)."""
        for u, m in enumerate(self.out):
            for v in bits(m):
                yield u, v

    def arc_count(self) -> int:
        return sum(m.bit_count() for m in self.out)

    def min_out_degree(self) -> int:
        return min((m.bit_count() for m in self.out), default=0)

    def min_in_degree(self) -> int:
        return min((m.bit_count() for m in self.in_masks()), default=0)

    def mutual_mask(self, u: int) -> int:
        """Vertices forming a 2-cycle with u."""
        return self.out[u] & self.in_masks()[u]

    # -- derived digraphs --------------------------------------------------

    def with_arc(self, u: int, v: int) -> Digraph:
        if u == v:
            raise ValueError(f"self-loop at {u}")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"arc ({u},{v}) out of range for n={self.n}")
        d = Digraph(self.n)
        d.out = list(self.out)
        d.out[u] |= 1 << v
        return d

    def without_arc(self, u: int, v: int) -> Digraph:
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise ValueError(f"arc ({u},{v}) out of range for n={self.n}")
        d = Digraph(self.n)
        d.out = list(self.out)
        d.out[u] &= ~(1 << v)
        return d

    def induced(self, vertices: Sequence[int]) -> Digraph:
        """Subdigraph on the given vertices, relabelled by their sorted order."""
        vs = sorted(vertices)
        pos = {v: i for i, v in enumerate(vs)}
        d = Digraph(len(vs))
        for i, v in enumerate(vs):
            m = 0
            for w in bits(self.out[v]):
                j = pos.get(w)
                if j is not None:
                    m |= 1 << j
            d.out[i] = m
        return d

    def converse(self) -> Digraph:
        d = Digraph(self.n)
        d.out = list(self.in_masks())
        return d

    # -- plumbing ----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Digraph) and self.n == other.n and self.out == other.out
        )

    def __hash__(self) -> int:
        return hash((self.n, tuple(self.out)))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, m={self.arc_count()})"


@dataclass(frozen=True)
class Colouring:
    """Vertex colours in 1..k, index = vertex id."""

    colours: tuple[int, ...]
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        for v, c in enumerate(self.colours):
            if not 1 <= c <= self.k:
                raise ValueError(f"vertex {v} has colour {c}, outside 1..{self.k}")

    @classmethod
    def from_part1(cls, n: int, part1: Iterable[int]) -> Colouring:
        """The 2-colouring defined by a set: members get colour 1."""
        m = mask_of(part1)
        return cls(tuple(1 if m >> v & 1 else 2 for v in range(n)), 2)

    def colour_class(self, c: int) -> tuple[int, ...]:
        return tuple(v for v, cv in enumerate(self.colours) if cv == c)

    def partition(self) -> TwoPartition:
        if self.k != 2:
            raise ValueError("partition view needs exactly 2 colours")
        return TwoPartition(self.colour_class(1), self.colour_class(2))


@dataclass(frozen=True)
class TwoPartition:
    """Two disjoint non-empty parts covering 0..n-1."""

    part1: tuple[int, ...]
    part2: tuple[int, ...]

    def __post_init__(self):
        p1 = tuple(sorted(self.part1))
        p2 = tuple(sorted(self.part2))
        object.__setattr__(self, "part1", p1)
        object.__setattr__(self, "part2", p2)
        if not p1 or not p2:
            raise ValueError("both parts must be non-empty")
        n = len(p1) + len(p2)
        if sorted(p1 + p2) != list(range(n)):
            raise ValueError("parts must be disjoint and cover 0..n-1")

    @property
    def n(self) -> int:
        return len(self.part1) + len(self.part2)

    @property
    def is_balanced(self) -> bool:
        return abs(len(self.part1) - len(self.part2)) <= 1

    def colouring(self) -> Colouring:
        return Colouring.from_part1(self.n, self.part1)


def relabel(d: Digraph, perm: Sequence[int]) -> Digraph:
    """Image of d under vertex map v -> perm[v] (perm a permutation of 0..n-1)."""
    if sorted(perm) != list(range(d.n)):
        raise ValueError("perm must be a permutation of the vertex ids")
    return Digraph(d.n, [(perm[u], perm[v]) for u, v in d.arcs()])


# -- classification ---------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    kind: str  # "tournament" | "semicomplete" | "oriented" | "general"
    min_out: int
    min_in: int


def classify(d: Digraph) -> Classification:
    """Most specific family: tournament < semicomplete, oriented < general."""
    exactly_one = True
    adjacent = True
    two_cycle = False
    for u in range(d.n):
        ou = d.out[u]
        for v in range(u + 1, d.n):
            uv = ou >> v & 1
            vu = d.out[v] >> u & 1
            k = uv + vu
            if k != 1:
                exactly_one = False
            if k == 0:
                adjacent = False
            if k == 2:
                two_cycle = True
    if exactly_one:
        kind = "tournament"
    elif adjacent:
        kind = "semicomplete"
    elif not two_cycle:
        kind = "oriented"
    else:
        kind = "general"
    return Classification(kind, d.min_out_degree(), d.min_in_degree())


def is_tournament(d: Digraph) -> bool:
    return classify(d).kind == "tournament"


def is_semicomplete(d: Digraph) -> bool:
    """Every pair adjacent (tournaments included)."""
    return classify(d).kind in ("tournament", "semicomplete")


# -- strong components -------------------------------------------------------


def strong_components(d: Digraph) -> list[list[int]]:
    """Strongly connected components, topological order of the condensation.

    Arcs only go from earlier to later components.  Deterministic: DFS roots
    and neighbours in ascending id order, components sorted internally.
    """
    n = d.n
    out = d.out
    index = [-1] * n
    low = [0] * n
    on_stack = bytearray(n)
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = 1
        work = [(root, bits(out[root]))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = 1
                    work.append((w, bits(out[w])))
                    advanced = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                pv = work[-1][0]
                if low[v] < low[pv]:
                    low[pv] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = 0
                    comp.append(w)
                    if w == v:
                        break
                comp.sort()
                comps.append(comp)
    comps.reverse()
    return comps


def terminal_components(
    d: Digraph, comps: list[list[int]] | None = None
) -> list[list[int]]:
    """Components with no leaving arcs."""
    if comps is None:
        comps = strong_components(d)
    result = []
    for comp in comps:
        m = mask_of(comp)
        if all(d.out[u] & ~m == 0 for u in comp):
            result.append(comp)
    return result


def is_strong(d: Digraph) -> bool:
    return len(strong_components(d)) <= 1


# -- Moon cycles and in-dominating sets ---------------------------------------


def cycle_through(d: Digraph, v: int, length: int) -> list[int]:
    """A directed cycle of exactly `length` vertices through v.

    d must be a strong tournament; works by growing a 3-cycle one vertex at
    a time.  All choices tie-break on smallest vertex id.
    """
    if not is_tournament(d):
        raise NotTournament("cycle_through needs a tournament")
    if not 3 <= length <= d.n:
        raise LenOutOfRange(f"length {length} outside 3..{d.n}")
    if not is_strong(d):
        raise NotStrong("cycle_through needs a strong tournament")
    out = d.out
    im = d.in_masks()

    # 3-cycle through v: first (w, u) in lex order with v->w->u->v.
    cyc = None
    for w in bits(out[v]):
        hits = out[w] & im[v]
        if hits:
            cyc = [v, w, low_bit(hits)]
            break
    if cyc is None:
        raise AssertionError("strong tournament without a 3-cycle through v")

    while len(cyc) < length:
        cmask = mask_of(cyc)
        rest = [z for z in range(d.n) if not cmask >> z & 1]
        grown = False
        for z in rest:
            if out[z] & cmask and im[z] & cmask:
                # z can be inserted between some consecutive pair.
                l = len(cyc)
                for i in range(l):
                    a, b = cyc[i], cyc[(i + 1) % l]
                    if out[a] >> z & 1 and out[z] >> b & 1:
                        cyc.insert(i + 1, z)
                        grown = True
                        break
                if not grown:
                    raise AssertionError("insertable vertex with no slot")
                break
        if grown:
            continue
        # Every outside vertex is fully dominated by the cycle (X) or fully
        # dominates it (Y); strongness forces an arc X -> Y.  Splice x, y in
        # place of v's predecessor on the cycle.
        xs = [z for z in rest if out[z] & cmask == 0]
        ys = [z for z in rest if im[z] & cmask == 0]
        ymask = mask_of(ys)
        pick = None
        for x in xs:
            hits = out[x] & ymask
            if hits:
                pick = (x, low_bit(hits))
                break
        if pick is None:
            raise AssertionError("strong tournament with no X->Y arc")
        x, y = pick
        while cyc[0] != v:
            cyc.append(cyc.pop(0))
        cyc = cyc[:-1] + [x, y]
    return cyc


@dataclass(frozen=True)
class InDominatingVertex:
    vertex: int


@dataclass(frozen=True)
class InDominatingCycle:
    cycle: tuple[int, ...]


def in_dominating(d: Digraph) -> InDominatingVertex | InDominatingCycle:
    """An in-dominating vertex, or an in-dominating cycle of length <= n-2.

    In-dominating: every vertex outside has an arc to a member.  Tournament,
    n >= 5.  Non-strong inputs are handled through the terminal component;
    strong ones through an (n-2)-cycle with a 3-cycle fallback.
    """
    n = d.n
    if n < 5:
        raise TooSmall("in_dominating needs n >= 5")
    if not is_tournament(d):
        raise NotTournament("in_dominating needs a tournament")
    comps = strong_components(d)
    if len(comps) > 1:
        term = comps[-1]
        if len(term) == 1:
            return InDominatingVertex(term[0])
        if len(term) == 3:
            a = term[0]
            b = next(w for w in term if d.has_arc(a, w))
            c = next(w for w in term if w != a and w != b)
            return InDominatingCycle((a, b, c))
        sub = d.induced(term)
        cyc = cycle_through(sub, 0, len(term) - 1)
        return InDominatingCycle(tuple(term[i] for i in cyc))
    cyc = cycle_through(d, 0, n - 2)
    cmask = mask_of(cyc)
    outside = [z for z in range(n) if not cmask >> z & 1]
    lacking = [z for z in outside if d.out[z] & cmask == 0]
    if not lacking:
        return InDominatingCycle(tuple(cyc))
    # Only one of the two can lack arcs into the cycle; it is dominated by
    # the whole cycle, and its lone out-arc goes to the other one.
    assert len(lacking) == 1
    x = lacking[0]
    y = next(z for z in outside if z != x)
    z = low_bit(d.out[y] & cmask)
    return InDominatingCycle((x, y, z))


# -- verification --------------------------------------------------------------


@dataclass(frozen=True)
class BadVertex:
    vertex: int


@dataclass(frozen=True)
class Violation:
    vertex: int
    which: str  # "V1" | "V2" | "cross"


def verify_out_colouring(
    d: Digraph, colouring: Colouring | Sequence[int]
) -> BadVertex | None:
    """None iff every out-neighbourhood sees >= 2 colours; else smallest offender."""
    cols = colouring.colours if isinstance(colouring, Colouring) else colouring
    if len(cols) != d.n:
        raise SizeMismatch(f"{len(cols)} colours for {d.n} vertices")
    masks: dict[int, int] = {}
    for v, c in enumerate(cols):
        masks[c] = masks.get(c, 0) | 1 << v
    class_masks = list(masks.values())
    for v in range(d.n):
        m = d.out[v]
        seen = 0
        for cm in class_masks:
            if m & cm:
                seen += 1
                if seen == 2:
                    break
        if seen < 2:
            return BadVertex(v)
    return None


def verify_kpartition(d: Digraph, p: TwoPartition, k: int) -> Violation | None:
    """Every vertex needs >= k out-neighbours in its own part and in the other.

    Checks own part before cross, smallest vertex first.
    """
    if p.n != d.n:
        raise NotAPartition(f"partition of {p.n} vertices against n={d.n}")
    m1 = mask_of(p.part1)
    m2 = mask_of(p.part2)
    for v in range(d.n):
        own, other, name = (m1, m2, "V1") if m1 >> v & 1 else (m2, m1, "V2")
        if (d.out[v] & own).bit_count() < k:
            return Violation(v, name)
        if (d.out[v] & other).bit_count() < k:
            return Violation(v, "cross")
    return None


# -- text format ----------------------------------------------------------------


def to_text(d: Digraph) -> str:
    """Canonical text form: `n m` header, then arcs sorted by (u, v)."""
    lines = [f"{d.n} {d.arc_count()}"]
    lines.extend(f"{u} {v}" for u, v in d.arcs())
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Digraph:
    rows = []
    for line in text.splitlines():
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        rows.append(s)
    if not rows:
        raise FormatError("empty input")
    head = rows[0].split()
    if len(head) != 2:
        raise FormatError(f"bad header {rows[0]!r}, want 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as e:
        raise FormatError(f"bad header {rows[0]!r}") from e
    if len(rows) - 1 != m:
        raise FormatError(f"header promises {m} arcs, found {len(rows) - 1}")
    arcs = []
    for row in rows[1:]:
        parts = row.split()
        if len(parts) != 2:
            raise FormatError(f"bad arc line {row!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as e:
            raise FormatError(f"bad arc line {row!r}") from e
        arcs.append((u, v))
    try:
        return Digraph(n, arcs)
    except ValueError as e:
        raise FormatError(str(e)) from e
