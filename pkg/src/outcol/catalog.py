"""Named digraphs, small-order isomorphism, and the derived exception catalogs.

The two infinite obstruction families have structural recognizers here:
find_cycle_funnel (a vertex whose out-neighbourhood is a short cycle that can
only exit through one vertex) and find_cycle_ring (short cycle -> short cycle
-> single vertex -> back, with exact out-neighbourhoods).  The finite
exception lists are not hardcoded: they are reconstructed by exhaustive
enumeration against the brute-force oracle and shipped as package data.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from outcol.digraph import (
    Digraph,
    bits,
    low_bit,
    mask_of,
    strong_components,
    to_text,
    from_text,
)
from outcol.oracle import (
    SearchSpaceTooLarge,
    TooLarge,
    adjacency_chunks,
    brute_force_out_colouring,
    code_to_digraph,
    out_colourable_mask,
)


class BadParameter(ValueError):
    pass


# -- named digraphs ------------------------------------------------------------


def _cycle(seq: Iterable[int]) -> list[tuple[int, int]]:
    seq = list(seq)
    return [(seq[i], seq[(i + 1) % len(seq)]) for i in range(len(seq))]


def rt5() -> Digraph:
    """Rotational tournament on 5: union of two Hamiltonian cycles."""
    return Digraph(5, _cycle([0, 1, 2, 3, 4]) + _cycle([0, 2, 4, 1, 3]))


def t7() -> Digraph:
    """Two 3-cycles 012 and 345 plus vertex 6: 345 => 6 => 012 => 345."""
    arcs = _cycle([0, 1, 2]) + _cycle([3, 4, 5])
    arcs += [(u, 6) for u in (3, 4, 5)]
    arcs += [(6, v) for v in (0, 1, 2)]
    arcs += [(u, v) for u in (0, 1, 2) for v in (3, 4, 5)]
    return Digraph(7, arcs)


def p7() -> Digraph:
    """3-regular tournament on 7: union of three Hamiltonian cycles."""
    return Digraph(
        7,
        _cycle([0, 1, 2, 3, 4, 5, 6])
        + _cycle([0, 2, 4, 6, 1, 3, 5])
        + _cycle([0, 4, 1, 5, 2, 6, 3]),
    )


def cd3() -> Digraph:
    """Complete digraph on 3 vertices."""
    return Digraph(3, [(u, v) for u in range(3) for v in range(3) if u != v])


def paley(q: int) -> Digraph:
    """Quadratic residue tournament: arc (i, j) iff i - j is a residue mod q."""
    if q < 3 or any(q % p == 0 for p in range(2, int(q**0.5) + 1)):
        raise BadParameter(f"paley({q}): q must be prime")
    if q % 4 != 3:
        raise BadParameter(f"paley({q}): q must be 3 mod 4")
    residues = {x * x % q for x in range(1, q)}
    return Digraph(
        q, [(i, j) for i in range(q) for j in range(q) if (i - j) % q in residues]
    )


def bkr(k: int, r: int) -> Digraph:
    """Bipartite witness that out-degree r*k - 1 is not enough for an
    r-out-colouring: U of size k*r, one vertex per k-subset X of U with
    arcs v_X -> X, every other U-V pair oriented U -> V."""
    if k < 1 or r < 1:
        raise BadParameter("bkr needs k >= 1 and r >= 1")
    u = k * r
    subsets = list(itertools.combinations(range(u), k))
    arcs = []
    for i, sub in enumerate(subsets):
        vi = u + i
        member = set(sub)
        for x in sub:
            arcs.append((vi, x))
        for x in range(u):
            if x not in member:
                arcs.append((x, vi))
    return Digraph(u + len(subsets), arcs)


@dataclass(frozen=True)
class NamedDigraph:
    name: str
    graph: Digraph


def build(name: str) -> Digraph:
    """Resolve a digraph name: rt5, t7, p7, cd3, paley(q), bkr(k,r), or a
    derived catalog class name."""
    simple = {"rt5": rt5, "t7": t7, "p7": p7, "cd3": cd3}
    if name in simple:
        return simple[name]()
    if name.startswith("paley(") and name.endswith(")"):
        try:
            q = int(name[6:-1])
        except ValueError as e:
            raise BadParameter(f"bad paley spec {name!r}") from e
        return paley(q)
    if name.startswith("bkr(") and name.endswith(")"):
        parts = name[4:-1].split(",")
        try:
            k, r = (int(p) for p in parts)
        except ValueError as e:
            raise BadParameter(f"bad bkr spec {name!r}") from e
        return bkr(k, r)
    for cat in (shipped_exceptions_delta2(), shipped_unbalanceable6()):
        for nd in cat.classes:
            if nd.name == name:
                return nd.graph
    raise BadParameter(f"unknown digraph name {name!r}")


# -- canonical forms and isomorphism -----------------------------------------


@lru_cache(maxsize=None)
def _perm_tables(n: int) -> np.ndarray:
    """Flat gather indices for every permutation of n vertices (n <= 8)."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    return (perms[:, :, None] * n + perms[:, None, :]).reshape(len(perms), n * n)


def _pack_order(d: Digraph, order: list[int]) -> bytes:
    total = 0
    for u in order:
        ou = d.out[u]
        for v in order:
            total = total << 1 | ou >> v & 1
    return total.to_bytes((d.n * d.n + 7) // 8, "big")


def canonical_form(d: Digraph) -> bytes:
    """Relabelling-invariant byte string: n, then the minimal row-major
    adjacency bit matrix over a complete set of orderings.  n <= 10."""
    n = d.n
    if n > 10:
        raise TooLarge(f"canonical_form capped at n=10, got {n}")
    if n <= 1:
        return bytes([n]) + b"\x00" * ((n * n + 7) // 8)
    if n <= 8:
        flat = np.zeros(n * n, dtype=np.uint64)
        for u in range(n):
            for v in bits(d.out[u]):
                flat[u * n + v] = 1
        weights = np.array(
            [1 << (n * n - 1 - k) for k in range(n * n)], dtype=np.uint64
        )
        vals = (flat[_perm_tables(n)] * weights).sum(axis=1, dtype=np.uint64)
        best = int(vals.min())
        return bytes([n]) + best.to_bytes((n * n + 7) // 8, "big")
    return bytes([n]) + _canonical_search(d)


def _refine(out: list[int], im: list[int], cells: list[list[int]]) -> list[list[int]]:
    """Equitable refinement; split order is by sorted signature, so the cell
    sequence is relabelling-invariant."""
    changed = True
    while changed:
        changed = False
        for idx in range(len(cells)):
            if len(cells[idx]) == 1:
                continue
            for s in list(cells):
                smask = mask_of(s)
                sig: dict[tuple[int, int], list[int]] = {}
                for v in cells[idx]:
                    key = ((out[v] & smask).bit_count(), (im[v] & smask).bit_count())
                    sig.setdefault(key, []).append(v)
                if len(sig) > 1:
                    cells[idx : idx + 1] = [sig[k] for k in sorted(sig)]
                    changed = True
                    break
            if changed:
                break
    return cells


def _canonical_search(d: Digraph) -> bytes:
    """Minimal packed adjacency over the individualization-refinement leaves."""
    out = d.out
    im = d.in_masks()
    best: bytes | None = None

    def rec(cells: list[list[int]]) -> None:
        nonlocal best
        tgt = next((i for i, c in enumerate(cells) if len(c) > 1), None)
        if tgt is None:
            key = _pack_order(d, [c[0] for c in cells])
            if best is None or key < best:
                best = key
            return
        for v in sorted(cells[tgt]):
            nxt = [list(c) for c in cells]
            rest = [w for w in nxt[tgt] if w != v]
            nxt[tgt : tgt + 1] = [[v], rest]
            rec(_refine(out, im, nxt))

    rec(_refine(out, im, [list(range(d.n))]))
    assert best is not None
    return best


def digraph_from_canonical(form: bytes) -> Digraph:
    """Rebuild the representative encoded by canonical_form."""
    n = form[0]
    total = int.from_bytes(form[1:], "big")
    arcs = []
    for u in range(n):
        for v in range(n):
            if total >> (n * n - 1 - (u * n + v)) & 1:
                arcs.append((u, v))
    return Digraph(n, arcs)


def is_isomorphic(a: Digraph, b: Digraph) -> bool:
    if a.n != b.n:
        return False
    if a.arc_count() != b.arc_count():
        return False
    pairs_a = sorted((a.out_degree(v), a.in_degree(v)) for v in range(a.n))
    pairs_b = sorted((b.out_degree(v), b.in_degree(v)) for v in range(b.n))
    if pairs_a != pairs_b:
        return False
    return canonical_form(a) == canonical_form(b)


# -- obstruction recognizers -----------------------------------------------------


@dataclass(frozen=True)
class CycleFunnel:
    """w's out-neighbourhood is the cycle; the cycle leaves through `exit`.

    pinned means the cycle's joint out-neighbourhood outside itself is exactly
    {exit}.  Unpinned witnesses also let the cycle point back at w."""

    w: int
    cycle: tuple[int, ...]
    exit: int
    pinned: bool = True


@dataclass(frozen=True)
class CycleRing:
    """cycle1 => cycle2 => pivot => cycle1, all out-neighbourhoods exact."""

    cycle1: tuple[int, ...]
    cycle2: tuple[int, ...]
    pivot: int


def exact_cycle(d: Digraph, mask: int) -> tuple[int, ...] | None:
    """The vertices of mask as an induced directed 2- or 3-cycle, else None.

    Induced exactly: inside the mask every vertex has precisely one
    out-neighbour and one in-neighbour (no chords, no missing arcs).
    """
    k = mask.bit_count()
    if k not in (2, 3):
        return None
    im = d.in_masks()
    for v in bits(mask):
        if (d.out[v] & mask).bit_count() != 1 or (im[v] & mask).bit_count() != 1:
            return None
    start = low_bit(mask)
    cyc = [start]
    cur = start
    for _ in range(k - 1):
        cur = low_bit(d.out[cur] & mask)
        cyc.append(cur)
    return tuple(cyc)


def find_cycle_funnel(d: Digraph) -> CycleFunnel | None:
    """Vertex w whose out-neighbourhood is an exact 2-/3-cycle funnelling into
    a single other vertex z.

    A pinned witness has the cycle's joint out-neighbourhood equal to {z}
    exactly.  When every vertex has out-degree at least 2, each cycle vertex
    is then forced to send its second arc to z, every 2-colouring pins the
    whole cycle against z's colour, and w's out-neighbourhood goes
    monochromatic: a pinned witness certifies there is no 2-out-colouring.

    Unpinned witnesses relax the exit set to {z, w}, letting the cycle point
    back at w.  Two shapes are accepted: any 2-cycle, and a 3-cycle that
    dominates z while z dominates at least two of its vertices.  Those shapes
    mark membership of the non-colourable exception families reconstructed by
    derive_exceptions_delta2, which screens every candidate against the
    brute-force oracle first; a digraph can admit an unpinned witness and a
    2-out-colouring at the same time, so unpinned witnesses are not
    certificates on their own.

    Pinned witnesses are searched first, each pass scanning w in ascending
    order, so the result is deterministic and strongest-first.
    """
    out = d.out
    lax: CycleFunnel | None = None
    for w in range(d.n):
        cmask = out[w]
        if cmask.bit_count() not in (2, 3):
            continue
        cyc = exact_cycle(d, cmask)
        if cyc is None:
            continue
        ext = 0
        for c in cyc:
            ext |= out[c]
        ext &= ~cmask
        if ext.bit_count() == 1:
            z = low_bit(ext)
            if z != w:
                return CycleFunnel(w, cyc, z)
        elif lax is None and ext.bit_count() == 2 and ext >> w & 1:
            z = low_bit(ext & ~(1 << w))
            if len(cyc) == 2 or (
                all(out[c] >> z & 1 for c in cyc)
                and (out[z] & cmask).bit_count() >= 2
            ):
                lax = CycleFunnel(w, cyc, z, pinned=False)
    return lax


def find_tournament_funnel(d: Digraph) -> CycleFunnel | None:
    """Tournament variant: a 3-cycle C with a single exit z, plus a vertex w
    outside C (w != z) whose out-arcs all land in C, with z keeping at least
    two out-neighbours outside C.  Only meaningful when the minimum
    out-degree is exactly 2 and n >= 6."""
    n = d.n
    if n < 6 or d.min_out_degree() != 2:
        return None
    out = d.out
    for a in range(n):
        for b in bits(out[a]):
            if b < a:
                continue
            third = out[b] & ~out[a]
            for c in bits(third):
                if c <= a or c == b or not out[c] >> a & 1:
                    continue
                cmask = 1 << a | 1 << b | 1 << c
                if exact_cycle(d, cmask) is None:
                    continue
                ext = (out[a] | out[b] | out[c]) & ~cmask
                if ext.bit_count() != 1:
                    continue
                z = low_bit(ext)
                if (out[z] & ~cmask).bit_count() < 2:
                    continue
                for w in range(n):
                    if w == z or cmask >> w & 1:
                        continue
                    if out[w] & ~cmask == 0:
                        return CycleFunnel(w, (a, b, c), z)
    return None


def find_cycle_ring(d: Digraph) -> CycleRing | None:
    """Exact chain C1 => C2 => z => C1 inside the terminal strong component:
    N+(V(C1)) \\ V(C1) = V(C2), N+(V(C2)) \\ V(C2) = {z}, N+(z) = V(C1).

    Intended for semicomplete inputs (unique terminal component).  Any
    2-colouring must make C2 non-monochromatic against z, which forces C1
    monochromatic in z's colour and starves z; a witness certifies there is
    no 2-out-colouring."""
    comps = strong_components(d)
    term = comps[-1]
    if len(term) < 5:
        return None
    sub = d.induced(term)
    hit = _ring_search(sub)
    if hit is None:
        return None
    c1, c2, z = hit
    return CycleRing(
        tuple(term[i] for i in c1), tuple(term[i] for i in c2), term[z]
    )


def _ring_search(d: Digraph) -> tuple[tuple[int, ...], tuple[int, ...], int] | None:
    n = d.n
    out = d.out
    im = d.in_masks()
    # candidate middle cycles: 2-cycles in (a,b) lex order, then 3-cycles
    cands: list[int] = []
    for a in range(n):
        for b in bits(out[a] & im[a]):
            if b > a:
                cands.append(1 << a | 1 << b)
    for a in range(n):
        for b in range(a + 1, n):
            for c in range(b + 1, n):
                m = 1 << a | 1 << b | 1 << c
                if exact_cycle(d, m) is not None:
                    cands.append(m)
    for c2mask in cands:
        cyc2 = exact_cycle(d, c2mask)
        if cyc2 is None:
            continue
        ext = 0
        for c in cyc2:
            ext |= out[c]
        ext &= ~c2mask
        if ext.bit_count() != 1:
            continue
        z = low_bit(ext)
        c1mask = out[z]
        if c1mask & (c2mask | 1 << z):
            continue
        cyc1 = exact_cycle(d, c1mask)
        if cyc1 is None:
            continue
        ext1 = 0
        for c in cyc1:
            ext1 |= out[c]
        if ext1 & ~c1mask != c2mask:
            continue
        return cyc1, cyc2, z
    return None


# -- derived exception catalogs ----------------------------------------------------


@dataclass
class ExceptionCatalog:
    classes: tuple[NamedDigraph, ...]
    source: str  # "derived" | "shipped"
    _index: dict[int, dict[bytes, str]] | None = field(default=None, repr=False, compare=False)

    def lookup(self, d: Digraph) -> str | None:
        """Class name of the catalog member isomorphic to d, if any."""
        if self._index is None:
            idx: dict[int, dict[bytes, str]] = {}
            for nd in self.classes:
                idx.setdefault(nd.graph.n, {})[canonical_form(nd.graph)] = nd.name
            self._index = idx
        per_n = self._index.get(d.n)
        if not per_n:
            return None
        return per_n.get(canonical_form(d))


def derive_exceptions_delta2(nmax: int = 5) -> ExceptionCatalog:
    """Reconstruct the finite obstruction classes by exhaustion: strongly
    connected semicomplete digraphs with min out-degree >= 2 that have no
    2-out-colouring and are not explained by either recognizer."""
    if nmax > 5:
        raise SearchSpaceTooLarge("exhaustive derivation capped at n=5")
    found: list[tuple[bytes, Digraph]] = []
    seen: set[bytes] = set()
    for n in range(1, nmax + 1):
        per_n: list[bytes] = []
        for code in range(3 ** (n * (n - 1) // 2)):
            d = code_to_digraph(code, n, "semicomplete")
            if d.min_out_degree() < 2:
                continue
            if len(strong_components(d)) != 1:
                continue
            if brute_force_out_colouring(d, 2) is not None:
                continue
            if find_cycle_funnel(d) is not None:
                continue
            if find_cycle_ring(d) is not None:
                continue
            key = canonical_form(d)
            if key not in seen:
                seen.add(key)
                per_n.append(key)
        for key in sorted(per_n):
            found.append((key, digraph_from_canonical(key)))
    classes = []
    counters: dict[int, int] = {}
    for key, g in found:
        if is_isomorphic(g, cd3()):
            name = "cd3"
        elif is_isomorphic(g, rt5()):
            name = "rt5"
        else:
            counters[g.n] = counters.get(g.n, 0) + 1
            name = f"derived-exc{g.n}-{counters[g.n]}"
        classes.append(NamedDigraph(name, g))
    return ExceptionCatalog(tuple(classes), "derived")


def derive_unbalanceable6() -> ExceptionCatalog:
    """All semicomplete digraphs on 6 vertices that admit a 2-out-colouring
    but no balanced one, as isomorphism classes."""
    reps: dict[bytes, Digraph] = {}
    for codes, adj in adjacency_chunks(6, "semicomplete"):
        ok = out_colourable_mask(adj)
        okb = out_colourable_mask(adj, balanced=True)
        for row in np.flatnonzero(ok & ~okb):
            d = code_to_digraph(int(codes[row]), 6, "semicomplete")
            key = canonical_form(d)
            if key not in reps:
                reps[key] = digraph_from_canonical(key)
    classes = tuple(
        NamedDigraph(f"derived-unbal6-{i + 1}", reps[key])
        for i, key in enumerate(sorted(reps))
    )
    return ExceptionCatalog(classes, "derived")


# -- persistence ----------------------------------------------------------------


def save_catalog(cat: ExceptionCatalog, directory) -> None:
    from pathlib import Path

    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["name", "n", "m", "canonical_sha256", "source"])
    for nd in cat.classes:
        (path / f"{nd.name}.txt").write_text(to_text(nd.graph))
        digest = hashlib.sha256(canonical_form(nd.graph)).hexdigest()
        writer.writerow([nd.name, nd.graph.n, nd.graph.arc_count(), digest, cat.source])
    (path / "manifest.csv").write_text(buf.getvalue())


def load_catalog(directory) -> ExceptionCatalog:
    """Read a saved catalog; directory may be a Path or a package resource."""
    manifest = (directory / "manifest.csv").read_text()
    rows = list(csv.reader(io.StringIO(manifest)))
    if not rows or rows[0][:4] != ["name", "n", "m", "canonical_sha256"]:
        raise ValueError("bad catalog manifest")
    classes = []
    source = "shipped"
    for name, n, m, digest, src in rows[1:]:
        g = from_text((directory / f"{name}.txt").read_text())
        if g.n != int(n) or g.arc_count() != int(m):
            raise ValueError(f"catalog entry {name} does not match its manifest row")
        if hashlib.sha256(canonical_form(g)).hexdigest() != digest:
            raise ValueError(f"catalog entry {name} fails its canonical hash")
        source = src
        classes.append(NamedDigraph(name, g))
    return ExceptionCatalog(tuple(classes), source)


@lru_cache(maxsize=None)
def shipped_exceptions_delta2() -> ExceptionCatalog:
    from importlib.resources import files

    return load_catalog(files("outcol").joinpath("data", "exceptions-delta2"))


@lru_cache(maxsize=None)
def shipped_unbalanceable6() -> ExceptionCatalog:
    from importlib.resources import files

    return load_catalog(files("outcol").joinpath("data", "unbalanceable6"))
