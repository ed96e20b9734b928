"""Shared builders for the test suite (kept independent of outcol.catalog)."""

from __future__ import annotations

import random

from outcol.digraph import Digraph


def cycle_arcs(seq):
    return [(seq[i], seq[(i + 1) % len(seq)]) for i in range(len(seq))]


def make_rt5() -> Digraph:
    return Digraph(5, cycle_arcs([0, 1, 2, 3, 4]) + cycle_arcs([0, 2, 4, 1, 3]))


def make_p7() -> Digraph:
    return Digraph(
        7,
        [
            (i, j)
            for i in range(7)
            for j in range(7)
            if i != j and (j - i) % 7 in (1, 2, 4)
        ],
    )


def make_t7() -> Digraph:
    arcs = cycle_arcs([0, 1, 2]) + cycle_arcs([3, 4, 5])
    arcs += [(u, 6) for u in (3, 4, 5)]
    arcs += [(6, v) for v in (0, 1, 2)]
    arcs += [(u, v) for u in (0, 1, 2) for v in (3, 4, 5)]
    return Digraph(7, arcs)


def make_cd3() -> Digraph:
    return Digraph(3, [(u, v) for u in range(3) for v in range(3) if u != v])


def make_transitive(n: int) -> Digraph:
    return Digraph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def make_paley(q: int) -> Digraph:
    residues = {(x * x) % q for x in range(1, q)}
    return Digraph(
        q, [(i, j) for i in range(q) for j in range(q) if (i - j) % q in residues]
    )


def random_tournament(n: int, rng: random.Random) -> Digraph:
    arcs = []
    for i in range(n):
        for j in range(i + 1, n):
            arcs.append((i, j) if rng.random() < 0.5 else (j, i))
    return Digraph(n, arcs)


def random_semicomplete(n: int, rng: random.Random) -> Digraph:
    arcs = []
    for i in range(n):
        for j in range(i + 1, n):
            r = rng.randrange(3)
            if r != 1:
                arcs.append((i, j))
            if r >= 1:
                arcs.append((j, i))
    return Digraph(n, arcs)


def random_digraph(n: int, p: float, rng: random.Random) -> Digraph:
    arcs = [
        (u, v)
        for u in range(n)
        for v in range(n)
        if u != v and rng.random() < p
    ]
    return Digraph(n, arcs)


def near_regular_tournament(n: int, rng: random.Random, flips: int = 2000) -> Digraph:
    """Rotational tournament scrambled by triangle reversals (degree-preserving)."""
    half = n // 2
    out = [0] * n
    for i in range(n):
        for d in range(1, half + 1):
            out[i] |= 1 << ((i + d) % n)
    if n % 2 == 0:
        # even order: vertices i >= n/2 lose the tie-breaking half-arc
        for i in range(half, n):
            out[i] &= ~(1 << ((i + half) % n))
    done = 0
    while done < flips:
        a, b, c = rng.sample(range(n), 3)
        if out[a] >> b & 1 and out[b] >> c & 1 and out[c] >> a & 1:
            out[a] ^= (1 << b) | (1 << c)
            out[b] ^= (1 << c) | (1 << a)
            out[c] ^= (1 << a) | (1 << b)
            done += 1
    return Digraph(n, [(i, j) for i in range(n) for j in range(n) if out[i] >> j & 1])
