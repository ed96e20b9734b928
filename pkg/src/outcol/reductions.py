"""Gadget builders that tie satisfiability questions to digraph partitions.

Each builder returns the constructed digraph together with explicit
index maps and solution translators, so a certificate for one side can
be checked on the other.  The constructions themselves:

- ``total_domination_bridge``: bidirect an undirected graph; partitions
  into two total dominating sets are exactly 2-out-colourings.
- ``hypergraph_to_symmetric_digraph``: bipartite incidence graph plus
  an apex, bidirected; hypergraph 2-colourings are 2-out-colourings.
- ``nae_to_bipartite_tournament``: monotone not-all-equal formulas to
  bipartite tournaments with minimum out-degree 3, duplicating the
  clause vertices of a disjoint clause pair.
- ``nae_to_nice_partition_digraph``: general 3-literal formulas to the
  six-vertex gadget chain whose nice 2-partitions encode assignments.

Brute-force satisfiability and partition search live in the oracle
module; this one only builds and maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from outcol.digraph import Colouring, Digraph, mask_of


class NotMonotone(ValueError):
    """The bipartite-tournament construction needs negation-free clauses."""


class NoDisjointClausePair(ValueError):
    """No two clauses have disjoint variable sets, so the duplicated
    clause-pair trick has nothing to duplicate."""


class EmptyEdge(ValueError):
    """An empty hyperedge can never see two colours."""


@dataclass(frozen=True)
class Hypergraph:
    n_vertices: int
    edges: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.n_vertices < 1:
            raise ValueError("hypergraph needs at least one vertex")
        edges = tuple(tuple(sorted(set(e))) for e in self.edges)
        if not edges:
            raise ValueError("hypergraph needs at least one edge")
        for e in edges:
            for v in e:
                if not 0 <= v < self.n_vertices:
                    raise ValueError(f"edge vertex {v} out of range")
        object.__setattr__(self, "edges", edges)

    @property
    def has_empty_edge(self) -> bool:
        # an empty edge is monochromatic under every colouring
        return any(not e for e in self.edges)


@dataclass(frozen=True)
class NaeFormula:
    """Not-all-equal clauses of three distinct variables.

    Literals are 1-based ints, negative for a negated variable; the
    ``monotone`` field is derived, never supplied.
    """

    n_vars: int
    clauses: tuple[tuple[int, int, int], ...]
    monotone: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.n_vars < 1:
            raise ValueError("formula needs at least one variable")
        clauses = tuple(tuple(cl) for cl in self.clauses)
        for cl in clauses:
            if len(cl) != 3:
                raise ValueError(f"clause {cl!r} must have exactly 3 literals")
            if any(lit == 0 or abs(lit) > self.n_vars for lit in cl):
                raise ValueError(f"clause {cl!r} has a literal out of range")
            if len({abs(lit) for lit in cl}) != 3:
                raise ValueError(f"clause {cl!r} repeats a variable")
        object.__setattr__(self, "clauses", clauses)
        object.__setattr__(
            self, "monotone", all(lit > 0 for cl in clauses for lit in cl)
        )

    def variables(self, j: int) -> tuple[int, ...]:
        """0-based variable ids of clause j."""
        return tuple(abs(lit) - 1 for lit in self.clauses[j])


def parse_nae(text: str) -> NaeFormula:
    """DIMACS-like reader: 'p nae <vars> <clauses>', then '<l> <l> <l> 0' lines."""
    n_vars = expect = None
    clauses: list[tuple[int, int, int]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "nae":
                raise ValueError(f"bad header {line!r}")
            n_vars, expect = int(parts[2]), int(parts[3])
            continue
        if n_vars is None:
            raise ValueError("clause line before 'p nae' header")
        nums = [int(x) for x in line.split()]
        if not nums or nums[-1] != 0:
            raise ValueError(f"clause line {line!r} must end with 0")
        lits = nums[:-1]
        if len(lits) != 3:
            raise ValueError(f"clause {lits!r} must have exactly 3 literals")
        clauses.append(tuple(lits))
    if n_vars is None:
        raise ValueError("missing 'p nae' header")
    if expect != len(clauses):
        raise ValueError(f"header promised {expect} clauses, got {len(clauses)}")
    return NaeFormula(n_vars, tuple(clauses))


def format_nae(f: NaeFormula) -> str:
    lines = [f"p nae {f.n_vars} {len(f.clauses)}"]
    lines += [" ".join(str(lit) for lit in cl) + " 0" for cl in f.clauses]
    return "\n".join(lines) + "\n"


# -- out-neighbourhood hypergraph and the symmetric-digraph bridge ---------------


def out_neighbourhood_hypergraph(d: Digraph) -> Hypergraph:
    """One edge per vertex: its out-neighbourhood.  Proper 2-colourings of
    this hypergraph are exactly the 2-out-colourings of d; an empty edge
    (a sink-like vertex) makes it trivially uncolourable."""
    return Hypergraph(d.n, tuple(tuple(d.out_neighbours(v)) for v in range(d.n)))


@dataclass(frozen=True)
class SymmetricReduction:
    digraph: Digraph
    n_ground: int  # X-side size; E-side follows, apex is last

    @property
    def apex(self) -> int:
        return self.digraph.n - 1

    def edge_vertex(self, j: int) -> int:
        return self.n_ground + j

    def colouring_to_hypergraph(self, c: Colouring) -> tuple[int, ...]:
        return tuple(c.colours[v] for v in range(self.n_ground))

    def hypergraph_to_colouring(self, hyp_colours: Sequence[int]) -> Colouring:
        # ground keeps its colours, edge vertices take 1, the apex 2
        n_edges = self.digraph.n - self.n_ground - 1
        cols = tuple(hyp_colours) + (1,) * n_edges + (2,)
        return Colouring(cols, 2)

    def manifest(self) -> dict:
        return {
            "construction": "hypergraph-incidence-apex",
            "ground_vertices": list(range(self.n_ground)),
            "edge_vertices": list(range(self.n_ground, self.digraph.n - 1)),
            "apex": self.apex,
        }


def hypergraph_to_symmetric_digraph(h: Hypergraph) -> SymmetricReduction:
    """Bidirected incidence graph of h plus an apex tied to every ground
    vertex.  Vertex order: ground set, then one vertex per edge, apex last."""
    if h.has_empty_edge:
        raise EmptyEdge("hypergraph has an empty edge")
    nx = h.n_vertices
    apex = nx + len(h.edges)
    arcs: list[tuple[int, int]] = []
    for j, e in enumerate(h.edges):
        for v in e:
            arcs.append((v, nx + j))
            arcs.append((nx + j, v))
    for v in range(nx):
        arcs.append((v, apex))
        arcs.append((apex, v))
    d = Digraph(apex + 1, arcs)
    for u in range(d.n):  # symmetric by construction
        for w in d.out_neighbours(u):
            assert d.out[w] >> u & 1
    return SymmetricReduction(d, nx)


# -- monotone NAE to bipartite tournament ----------------------------------------


@dataclass(frozen=True)
class BipartiteTournamentReduction:
    digraph: Digraph
    n_vars: int
    # built position -> original clause index; positions 0 and 1 hold the
    # disjoint pair and carry three vertices each
    clause_order: tuple[int, ...]
    clause_groups: tuple[tuple[int, ...], ...]

    @property
    def variable_vertices(self) -> tuple[int, ...]:
        return tuple(range(self.n_vars))

    def assignment_to_colouring(self, assignment: Sequence[bool]) -> Colouring:
        cols = [0] * self.digraph.n
        for i in range(self.n_vars):
            cols[i] = 1 if assignment[i] else 2
        for pos, group in enumerate(self.clause_groups):
            for w in group:
                cols[w] = 1
            if pos < 2:
                cols[group[2]] = 2  # the starred duplicate c** flips
        return Colouring(tuple(cols), 2)

    def colouring_to_assignment(self, c: Colouring) -> tuple[bool, ...]:
        return tuple(c.colours[i] == 1 for i in range(self.n_vars))

    def manifest(self) -> dict:
        return {
            "construction": "nae-bipartite-tournament",
            "variable_vertices": list(self.variable_vertices),
            "clause_order": list(self.clause_order),
            "clause_groups": [list(g) for g in self.clause_groups],
        }


def _first_disjoint_pair(f: NaeFormula) -> tuple[int, int]:
    m = len(f.clauses)
    for i in range(m):
        vi = set(f.variables(i))
        for j in range(i + 1, m):
            if vi.isdisjoint(f.variables(j)):
                return i, j
    raise NoDisjointClausePair("every two clauses share a variable")


def nae_to_bipartite_tournament(f: NaeFormula) -> BipartiteTournamentReduction:
    """Monotone formula to a bipartite tournament with min out-degree 3.

    U-side: one vertex per variable.  V-side: three vertices for each of
    the two (reordered-first) disjoint clauses, one for every other.
    Clause vertices dominate exactly their three literal vertices; all
    other variable vertices dominate the clause vertex.
    """
    if not f.monotone:
        raise NotMonotone("bipartite tournament construction needs monotone clauses")
    if len(f.clauses) < 2:
        raise NoDisjointClausePair("need at least two clauses")
    i, j = _first_disjoint_pair(f)
    order = [i, j] + [p for p in range(len(f.clauses)) if p not in (i, j)]

    n = f.n_vars
    groups: list[tuple[int, ...]] = []
    nxt = n
    for pos in range(len(order)):
        width = 3 if pos < 2 else 1
        groups.append(tuple(range(nxt, nxt + width)))
        nxt += width

    arcs: list[tuple[int, int]] = []
    for pos, orig in enumerate(order):
        lits = set(f.variables(orig))
        for w in groups[pos]:
            for i_var in range(n):
                if i_var in lits:
                    arcs.append((w, i_var))
                else:
                    arcs.append((i_var, w))
    d = Digraph(nxt, arcs)

    # structural guarantees: complete bipartite orientation, delta+ = 3
    for u in range(n):
        for w in range(n, d.n):
            assert (d.out[u] >> w & 1) != (d.out[w] >> u & 1)
    umask = mask_of(range(n))
    for u in range(n):
        assert d.out[u] & umask == 0
    for w in range(n, d.n):
        assert d.out[w] & ~umask == 0
        assert d.out[w].bit_count() == 3
    assert d.min_out_degree() == 3

    return BipartiteTournamentReduction(d, n, tuple(order), tuple(groups))


# -- general NAE to the nice-partition chain -------------------------------------

# gadget offsets within one copy: a, b, v, v', vbar, vbar'
_GADGET_ARCS = (
    (0, 1), (1, 0),          # digon {a, b}
    (0, 3), (1, 5),          # a -> v',  b -> vbar'
    (2, 3), (3, 2),          # digon {v, v'}
    (4, 5), (5, 4),          # digon {vbar, vbar'}
    (2, 4), (4, 3), (3, 5), (5, 2),  # 4-cycle v -> vbar -> v' -> vbar' -> v
)


@dataclass(frozen=True)
class NicePartitionReduction:
    digraph: Digraph
    n_vars: int
    n_clauses: int

    def copy_base(self, i: int) -> int:
        return 6 * i

    def literal_vertex(self, lit: int) -> int:
        base = self.copy_base(abs(lit) - 1)
        return base + 2 if lit > 0 else base + 4

    def d_vertex(self, j: int) -> int:
        return 6 * self.n_vars + 2 * j

    def c_vertex(self, j: int) -> int:
        return 6 * self.n_vars + 2 * j + 1

    def assignment_to_part1(self, assignment: Sequence[bool]) -> tuple[int, ...]:
        """V1 of the nice partition encoding the assignment: every c_j,
        plus {a, v, v'} of true copies and {b, vbar, vbar'} of false ones."""
        part1: list[int] = []
        for i in range(self.n_vars):
            base = self.copy_base(i)
            part1 += [base, base + 2, base + 3] if assignment[i] else [
                base + 1, base + 4, base + 5
            ]
        part1 += [self.c_vertex(j) for j in range(self.n_clauses)]
        return tuple(sorted(part1))

    def part1_to_assignment(self, part1: Sequence[int]) -> tuple[bool, ...]:
        chosen = set(part1)
        return tuple(self.copy_base(i) + 2 in chosen for i in range(self.n_vars))

    def manifest(self) -> dict:
        return {
            "construction": "nae-nice-partition",
            "copy_bases": [self.copy_base(i) for i in range(self.n_vars)],
            "copy_offsets": ["a", "b", "v", "v'", "vbar", "vbar'"],
            "d_vertices": [self.d_vertex(j) for j in range(self.n_clauses)],
            "c_vertices": [self.c_vertex(j) for j in range(self.n_clauses)],
        }


def gadget_x() -> Digraph:
    """The six-vertex gadget whose only nice partitions put {v, v'}
    opposite {vbar, vbar'}."""
    d = Digraph(6, list(_GADGET_ARCS))
    assert d.arc_count() == 12
    return d


def is_nice_partition(d: Digraph, part1: Sequence[int]) -> bool:
    """Every vertex has an out-neighbour across the partition, and every
    part1 vertex also has one inside part1."""
    m1 = mask_of(part1)
    full = (1 << d.n) - 1
    if not 0 < m1 < full and d.n > 0:
        return False
    for v in range(d.n):
        cross = (full ^ m1) if m1 >> v & 1 else m1
        if not d.out[v] & cross:
            return False
        if m1 >> v & 1 and not d.out[v] & m1:
            return False
    return True


def nae_to_nice_partition_digraph(f: NaeFormula) -> NicePartitionReduction:
    """One gadget copy per variable plus forced d_j -> c_j pendants whose
    c_j dominates the three literal vertices of clause j."""
    arcs: list[tuple[int, int]] = []
    for i in range(f.n_vars):
        base = 6 * i
        arcs += [(base + u, base + w) for u, w in _GADGET_ARCS]
    nv = 6 * f.n_vars
    for j, cl in enumerate(f.clauses):
        dj, cj = nv + 2 * j, nv + 2 * j + 1
        arcs.append((dj, cj))
        for lit in cl:
            base = 6 * (abs(lit) - 1)
            arcs.append((cj, base + 2 if lit > 0 else base + 4))
    d = Digraph(nv + 2 * len(f.clauses), arcs)
    red = NicePartitionReduction(d, f.n_vars, len(f.clauses))
    for j in range(len(f.clauses)):  # pendant degrees as designed
        assert d.out[red.d_vertex(j)].bit_count() == 1
        assert d.out[red.c_vertex(j)].bit_count() == 3
    return red


# -- total dominating set bridge --------------------------------------------------


@dataclass(frozen=True)
class TotalDominationReduction:
    digraph: Digraph

    def partition_to_colouring(self, part1: Sequence[int]) -> Colouring:
        return Colouring.from_part1(self.digraph.n, part1)

    def colouring_to_partition(self, c: Colouring) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(c.colour_class(1)), tuple(c.colour_class(2))

    def manifest(self) -> dict:
        return {
            "construction": "total-domination-bidirect",
            "n": self.digraph.n,
            "arcs": self.digraph.arc_count(),
        }


def total_domination_bridge(n: int, edges: Sequence[tuple[int, int]]) -> TotalDominationReduction:
    """Bidirect an undirected graph: partitions into two total dominating
    sets correspond exactly to 2-out-colourings of the result."""
    arcs: list[tuple[int, int]] = []
    for u, v in edges:
        if u == v:
            raise ValueError(f"loop edge ({u},{v})")
        arcs.append((u, v))
        arcs.append((v, u))
    return TotalDominationReduction(Digraph(n, arcs))
