"""Randomized balanced 2-partitions with out-degree guarantees to both sides.

The workhorse is a Las-Vegas loop around ``matching_split``: pair the
vertices into a near-perfect matching, flip a fair coin per pair, and
verify the result with ``verify_kpartition``.  The split is balanced by
construction, so only the out-degree conditions need retrying.  For
k=1 on tournaments with minimum out-degree 4 the loop seeds the
matching with up to three forced edges that make the two lowest-degree
vertices safe deterministically, which keeps the per-attempt failure
probability below 7/8.

Randomness is PCG64 keyed by ``SeedSequence([seed, attempt])``, so
attempt j of a run is reproducible in isolation and reordering or
parallelising attempts cannot change which partition is returned for a
given config.

The module also carries the spectral side of the story: the quadratic
residue tournaments have out-neighbourhood discrepancy above sqrt(q)/2
no matter the sign function, which is what makes the 2k + O(sqrt(k log
k)) degree threshold essentially tight.  ``paley_spectrum`` checks the
underlying matrix identity in exact integer arithmetic and
``discrepancy_exhaustive`` measures small instances directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from outcol.catalog import paley
from outcol.digraph import (
    Digraph,
    TwoPartition,
    bits,
    is_tournament,
    mask_of,
    verify_kpartition,
)
from outcol.oracle import TooLarge


class BelowThreshold(ValueError):
    """Minimum degree is under the retry-loop guarantee threshold."""


class RequiredEdgesOverlap(ValueError):
    """Forced matching edges share a vertex or repeat one."""


class DegreeBelow2k(ValueError):
    """A degree under 2k makes the failure exponent meaningless."""


def degree_threshold(k: int, epsilon: float) -> int:
    """Smallest minimum out-degree the retry loop is gated on."""
    if k == 0:
        return 0
    return math.ceil(2 * k + (1.0 + epsilon) * math.sqrt(2 * k * math.log(k)))


@dataclass(frozen=True)
class PartitionConfig:
    k: int
    epsilon: float = 0.1
    max_retries: int = 50
    seed: int = 0
    # Matching edges that must be split across the parts, e.g. the three
    # forced pairs of the degree-4 tournament strategy.  None means the
    # solver may choose its own.
    required_edges: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError(f"k must be non-negative, got {self.k}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.max_retries < 1:
            raise ValueError(f"max_retries must be positive, got {self.max_retries}")

    @property
    def threshold(self) -> int:
        return degree_threshold(self.k, self.epsilon)


@dataclass(frozen=True)
class SignFunction:
    """A vertex-indexed vector of signs; 0 marks an unassigned vertex."""

    values: tuple[int, ...]

    def __post_init__(self) -> None:
        bad = [x for x in self.values if x not in (-1, 0, 1)]
        if bad:
            raise ValueError(f"sign values must be -1, 0 or +1, got {bad[:3]}")

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class AttemptStat:
    attempt: int
    failing_vertices: int
    worst_deficit: int


@dataclass(frozen=True)
class PartitionFound:
    partition: TwoPartition
    attempt: int
    stats: tuple[AttemptStat, ...]


@dataclass(frozen=True)
class Exhausted:
    stats: tuple[AttemptStat, ...]

    @property
    def attempts(self) -> int:
        return len(self.stats)


def _rng(seed: int, attempt: int) -> np.random.Generator:
    # One documented stream per attempt index; attempt j is recoverable
    # without replaying attempts 1..j-1.
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, attempt])))


def _checked_required(d: Digraph, edges: tuple[tuple[int, int], ...]) -> list[tuple[int, int]]:
    seen: set[int] = set()
    for u, v in edges:
        if not (0 <= u < d.n and 0 <= v < d.n):
            raise ValueError(f"required edge ({u},{v}) out of range for n={d.n}")
        if u == v or u in seen or v in seen:
            raise RequiredEdgesOverlap(f"edge ({u},{v}) reuses a matched vertex")
        seen.add(u)
        seen.add(v)
    return [tuple(e) for e in edges]


def matching_split(d: Digraph, cfg: PartitionConfig, attempt: int = 1) -> TwoPartition:
    """One balanced split attempt: pair vertices, flip a coin per pair.

    Required edges are matched first; the remaining vertices are paired
    consecutively after a seeded shuffle.  An odd leftover vertex joins
    a uniformly random part.  The result is balanced by construction
    and NOT yet verified against any out-degree condition.
    """
    if d.n < 2:
        raise ValueError("need at least 2 vertices to split")
    rng = _rng(cfg.seed, attempt)
    pairs = _checked_required(d, cfg.required_edges or ())
    matched = {u for e in pairs for u in e}
    free = [v for v in range(d.n) if v not in matched]
    order = [free[i] for i in rng.permutation(len(free))]
    pairs.extend((order[i], order[i + 1]) for i in range(0, len(order) - 1, 2))
    leftover = order[-1] if len(order) % 2 else None

    part1: list[int] = []
    part2: list[int] = []
    for u, v in pairs:
        if rng.integers(2) == 0:
            part1.append(u)
            part2.append(v)
        else:
            part1.append(v)
            part2.append(u)
    if leftover is not None:
        (part1 if rng.integers(2) == 0 else part2).append(leftover)
    return TwoPartition(tuple(part1), tuple(part2))


def _attempt_stat(d: Digraph, p: TwoPartition, k: int, attempt: int, masks_in: list[int] | None = None) -> AttemptStat:
    m1 = mask_of(p.part1)
    m2 = mask_of(p.part2)
    failing = 0
    worst = 0
    rows = [d.out] if masks_in is None else [d.out, masks_in]
    for v in range(d.n):
        short = min(
            (row[v] & m).bit_count() for row in rows for m in (m1, m2)
        )
        if short < k:
            failing += 1
            worst = max(worst, k - short)
    return AttemptStat(attempt, failing, worst)


def _t11_required_edges(t: Digraph) -> tuple[tuple[int, int], ...]:
    """Forced matching edges for k=1 on a tournament with min out-degree 4.

    With at least two vertices of out-degree exactly 4, match the two
    smallest such x, y to each other and force a pair inside each of
    their out-neighbourhoods; both are then good in every attempt.
    With exactly one, force a single pair inside its out-neighbourhood.
    """
    deg4 = [v for v in range(t.n) if t.out[v].bit_count() == 4]
    if len(deg4) >= 2:
        x, y = deg4[0], deg4[1]
        a = [u for u in t.out_neighbours(x) if u != y]
        b = [u for u in t.out_neighbours(y) if u != x]
        for x1, x2 in combinations(a, 2):
            rest = [u for u in b if u not in (x1, x2)]
            if len(rest) >= 2:
                return ((x, y), (x1, x2), (rest[0], rest[1]))
        # One of a, b has 4 elements, so some choice above is disjoint.
        raise AssertionError("no disjoint out-neighbour pairs")
    if len(deg4) == 1:
        nb = t.out_neighbours(deg4[0])
        return ((nb[0], nb[1]),)
    return ()


def partition_k(
    d: Digraph, cfg: PartitionConfig, force: bool = False
) -> PartitionFound | Exhausted:
    """Balanced 2-partition with >= k out-neighbours in both parts.

    Las-Vegas: repeats ``matching_split`` up to ``cfg.max_retries``
    times and returns the first attempt that verifies, together with
    per-attempt failure statistics.  Gated on the degree threshold
    unless ``force`` is set (for below-threshold experiments).
    """
    k = cfg.k
    if d.min_out_degree() < cfg.threshold and not force:
        raise BelowThreshold(
            f"min out-degree {d.min_out_degree()} below threshold {cfg.threshold}"
        )
    run_cfg = cfg
    if k == 1 and cfg.required_edges is None and d.min_out_degree() >= 4 and is_tournament(d):
        forced = _t11_required_edges(d)
        if forced:
            run_cfg = PartitionConfig(
                k, cfg.epsilon, cfg.max_retries, cfg.seed, forced
            )
    stats: list[AttemptStat] = []
    for attempt in range(1, cfg.max_retries + 1):
        p = matching_split(d, run_cfg, attempt)
        stat = _attempt_stat(d, p, k, attempt)
        stats.append(stat)
        if stat.failing_vertices == 0:
            assert verify_kpartition(d, p, k) is None
            return PartitionFound(p, attempt, tuple(stats))
    return Exhausted(tuple(stats))


def partition_k_inout(
    d: Digraph, cfg: PartitionConfig, force: bool = False
) -> PartitionFound | Exhausted:
    """Same loop, but every vertex needs >= k in- AND out-neighbours in both parts."""
    k = cfg.k
    masks_in = d.in_masks()
    min_in = min((m.bit_count() for m in masks_in), default=0)
    if (d.min_out_degree() < cfg.threshold or min_in < cfg.threshold) and not force:
        raise BelowThreshold(
            f"min degrees ({d.min_out_degree()} out, {min_in} in) "
            f"below threshold {cfg.threshold}"
        )
    stats: list[AttemptStat] = []
    for attempt in range(1, cfg.max_retries + 1):
        p = matching_split(d, cfg, attempt)
        stat = _attempt_stat(d, p, k, attempt, masks_in)
        stats.append(stat)
        if stat.failing_vertices == 0:
            assert verify_kpartition(d, p, k) is None
            assert verify_kpartition(d.converse(), p, k) is None
            return PartitionFound(p, attempt, tuple(stats))
    return Exhausted(tuple(stats))


def partition_r(
    d: Digraph, r: int, k: int, cfg: PartitionConfig, force: bool = False
) -> tuple[tuple[int, ...], ...] | Exhausted:
    """Balanced r-way partition with >= k out-neighbours in every part.

    Generalizes the matching split: shuffle the vertices, cut them into
    blocks of r, and send each block's members to distinct parts via a
    uniform permutation.  The gate (1+epsilon)*r*k is a heuristic; with
    r=2 the process is exactly the 2-part matching split.
    """
    if r < 1:
        raise ValueError(f"r must be positive, got {r}")
    gate = math.ceil((1.0 + cfg.epsilon) * r * k)
    if d.min_out_degree() < gate and not force:
        raise BelowThreshold(
            f"min out-degree {d.min_out_degree()} below heuristic gate {gate}"
        )
    stats: list[AttemptStat] = []
    for attempt in range(1, cfg.max_retries + 1):
        rng = _rng(cfg.seed, attempt)
        order = [int(v) for v in rng.permutation(d.n)]
        parts: list[list[int]] = [[] for _ in range(r)]
        for base in range(0, d.n, r):
            block = order[base : base + r]
            slots = rng.permutation(r)[: len(block)]
            for v, slot in zip(block, slots):
                parts[slot].append(v)
        masks = [mask_of(part) for part in parts]
        failing = 0
        worst = 0
        for v in range(d.n):
            short = min((d.out[v] & m).bit_count() for m in masks)
            if short < k:
                failing += 1
                worst = max(worst, k - short)
        stats.append(AttemptStat(attempt, failing, worst))
        if failing == 0:
            return tuple(tuple(sorted(part)) for part in parts)
    return Exhausted(tuple(stats))


@dataclass(frozen=True)
class ChernoffBound:
    """Upper bounds on the probability that one split attempt fails.

    ``union_sum`` adds the per-vertex terms 2*exp(-(d-2k)^2/(2d))
    directly; ``aggregate`` replaces the degree counts with the
    tournament majorant (at most 2j+1 vertices of degree <= j) and sums
    by parts.  Any value >= 1 guarantees nothing; the loop then simply
    retries without a certified success probability.
    """

    union_sum: float
    aggregate: float

    @property
    def guarantees(self) -> bool:
        return min(self.union_sum, self.aggregate) < 1.0


def _per_degree_term(degree: int, k: int) -> float:
    if degree == 0:
        return 2.0
    return 2.0 * math.exp(-((degree - 2 * k) ** 2) / (2.0 * degree))


def chernoff_failure_bound(degrees, k: int) -> ChernoffBound:
    """Failure-probability bounds for one matching-split attempt."""
    degs = sorted(degrees)
    if not degs:
        raise ValueError("empty degree multiset")
    if degs[0] < 2 * k:
        raise DegreeBelow2k(f"degree {degs[0]} below 2k={2 * k}")
    union_sum = sum(_per_degree_term(dd, k) for dd in degs)

    # Summation by parts: with B_j = min(2j+1, n) >= #(vertices of
    # degree <= j) and p_j non-increasing past 2k, the total is at most
    # B_m*p_m + sum over j >= m of (B_{j+1} - B_j)*p_{j+1}.
    n = len(degs)
    m = degs[0]
    aggregate = min(2 * m + 1, n) * _per_degree_term(m, k)
    j = m
    while 2 * j + 1 < n:
        aggregate += (min(2 * (j + 1) + 1, n) - min(2 * j + 1, n)) * _per_degree_term(
            j + 1, k
        )
        j += 1
    return ChernoffBound(union_sum, aggregate)


# -- quadratic residue tournaments: spectrum and discrepancy ---------------------


def paley_spectrum(q: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Eigenvalues of A^T A for the quadratic residue tournament, exactly.

    Verifies the integer identity A^T A = ((q+1)/4) I + ((q-3)/4) J and
    reads the two eigenvalue/multiplicity pairs off it; no floating
    point eigensolver is involved.
    """
    d = paley(q)
    a = np.zeros((q, q), dtype=np.int64)
    for v in range(q):
        for u in bits(d.out[v]):
            a[v, u] = 1
    ata = a.T @ a
    expected = ((q + 1) // 4) * np.eye(q, dtype=np.int64) + ((q - 3) // 4) * np.ones(
        (q, q), dtype=np.int64
    )
    if not np.array_equal(ata, expected):
        raise AssertionError(f"A^T A identity failed for q={q}")
    return (((q - 1) ** 2 // 4, 1), ((q + 1) // 4, q - 1))


def discrepancy_exhaustive(d: Digraph, chunk: int = 1 << 16) -> tuple[int, SignFunction]:
    """Exact minimax out-neighbourhood discrepancy over all sign functions.

    Minimizes max_v |sum of f over N+(v)| for f: V -> {-1,+1}.  The
    f/-f symmetry pins vertex 0 to +1, halving the search to 2^(n-1)
    candidates, enumerated in chunks with vectorized popcounts.
    """
    n = d.n
    if n > 24:
        raise TooLarge(f"2^{n - 1} sign functions is past the exhaustive budget")
    if n == 0:
        return 0, SignFunction(())
    degrees = [d.out[v].bit_count() for v in range(n)]
    best_val: int | None = None
    best_code = 0
    total = 1 << (n - 1)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        codes = np.arange(start, stop, dtype=np.uint64)
        # Bit i of a code flips vertex i+1 to -1; vertex 0 stays +1.
        shifted = codes << np.uint64(1)
        worst = np.zeros(stop - start, dtype=np.int64)
        for v in range(n):
            hits = np.bitwise_count(shifted & np.uint64(d.out[v]))
            np.maximum(worst, np.abs(degrees[v] - 2 * hits.astype(np.int64)), out=worst)
        i = int(np.argmin(worst))
        if best_val is None or worst[i] < best_val:
            best_val = int(worst[i])
            best_code = start + i
    signs = (1,) + tuple(-1 if best_code >> i & 1 else 1 for i in range(n - 1))
    return int(best_val), SignFunction(signs)
