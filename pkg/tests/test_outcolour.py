from __future__ import annotations

import random

import pytest

from conftest import (
    make_cd3,
    make_p7,
    make_paley,
    make_rt5,
    make_t7,
    make_transitive,
    random_semicomplete,
    random_tournament,
)
from outcol.catalog import CycleFunnel, shipped_unbalanceable6
from outcol.digraph import (
    Colouring,
    Digraph,
    is_strong,
    verify_out_colouring,
)
from outcol.oracle import (
    brute_force_out_colouring,
    code_to_digraph,
)
from outcol.outcolour import (
    ENDGAME_WINDOW,
    InG1,
    InputNotValidColouring,
    InUnbalanceable,
    LowOutDegree,
    NotSemicomplete,
    NotTwoOutRegular,
    OddCycle,
    PreconditionViolated,
    SolveOutcome,
    TerminalIs,
    rebalance,
    solve_2outregular,
    solve_semicomplete,
    solve_tournament_d2,
    solve_tournament_d3,
    three_out_colouring,
    validate_certificate,
)


def make_hub4() -> Digraph:
    return Digraph(4, [(0, 2), (0, 3), (1, 0), (1, 3), (2, 1), (2, 3),
                       (3, 0), (3, 1), (3, 2)])


def square_of_c4() -> Digraph:
    return Digraph(4, [(i, (i + 1) % 4) for i in range(4)]
                   + [(i, (i + 2) % 4) for i in range(4)])


def check_outcome(d: Digraph, outcome: SolveOutcome) -> None:
    if outcome.colouring is not None:
        assert verify_out_colouring(d, outcome.colouring) is None
    else:
        assert validate_certificate(d, outcome.certificate)


class TestExhaustiveAgreement:
    def test_all_semicomplete_up_to_4(self):
        for n in (2, 3, 4):
            pairs = n * (n - 1) // 2
            for code in range(3 ** pairs):
                d = code_to_digraph(code, n, "semicomplete")
                outcome = solve_semicomplete(d)
                assert not outcome.fallback, (n, code)
                check_outcome(d, outcome)
                assert outcome.colourable == (
                    brute_force_out_colouring(d, 2) is not None
                ), (n, code)

    def test_all_tournaments_up_to_5(self):
        for n in (2, 3, 4, 5):
            pairs = n * (n - 1) // 2
            for code in range(1 << pairs):
                d = code_to_digraph(code, n, "tournament")
                outcome = solve_semicomplete(d)
                assert not outcome.fallback, (n, code)
                check_outcome(d, outcome)
                assert outcome.colourable == (
                    brute_force_out_colouring(d, 2) is not None
                ), (n, code)


class TestNamedTerminals:
    def test_the_four_sporadic_refusals(self):
        for build, name in (
            (make_rt5, "rt5"),
            (make_t7, "t7"),
            (make_p7, "p7"),
            (make_cd3, "cd3"),
        ):
            d = build()
            outcome = solve_semicomplete(d)
            assert outcome.certificate == TerminalIs(name)
            assert not outcome.fallback
            assert validate_certificate(d, outcome.certificate)

    def test_cd3_as_terminal_of_a_bigger_digraph(self):
        arcs = [(0, 1), (1, 2), (2, 0)]
        arcs += [(u, v) for u in (0, 1, 2) for v in (3, 4, 5)]
        arcs += [(u, v) for u in (3, 4, 5) for v in (3, 4, 5) if u != v]
        d = Digraph(6, arcs)
        outcome = solve_semicomplete(d)
        assert outcome.certificate == TerminalIs("cd3")
        assert validate_certificate(d, outcome.certificate)

    def test_hub4_gets_an_unpinned_funnel_without_fallback(self):
        d = make_hub4()
        outcome = solve_semicomplete(d)
        assert outcome.certificate == InG1(CycleFunnel(0, (2, 3), 1, False))
        assert not outcome.fallback
        assert validate_certificate(d, outcome.certificate)

    def test_paley_tournaments_are_colourable(self):
        for q in (11, 19):
            outcome = solve_semicomplete(make_paley(q))
            assert outcome.colouring is not None
            assert verify_out_colouring(make_paley(q), outcome.colouring) is None

    def test_p7_plus_one_arc_has_a_unique_split(self):
        d = make_p7().with_arc(1, 0)
        outcome = solve_semicomplete(d)
        assert outcome.colouring is not None
        classes = {
            tuple(sorted(outcome.colouring.colour_class(1))),
            tuple(sorted(outcome.colouring.colour_class(2))),
        }
        assert classes == {(2, 3, 5), (0, 1, 4, 6)}

    def test_sporadics_plus_the_right_digon_become_colourable(self):
        # not every added arc helps: rt5 with (1, 0) lands in another
        # exception class, rt5 with (0, 3) escapes the catalog
        for d in (make_rt5().with_arc(0, 3), make_t7().with_arc(1, 0)):
            outcome = solve_semicomplete(d)
            assert outcome.colouring is not None

    def test_rt5_plus_wrong_digon_stays_exceptional(self):
        outcome = solve_semicomplete(make_rt5().with_arc(1, 0))
        assert isinstance(outcome.certificate, TerminalIs)
        assert validate_certificate(make_rt5().with_arc(1, 0), outcome.certificate)


class TestLowOutDegree:
    def test_transitive_tournament(self):
        outcome = solve_semicomplete(make_transitive(6))
        assert isinstance(outcome.certificate, LowOutDegree)
        assert validate_certificate(make_transitive(6), outcome.certificate)

    def test_certificate_names_a_weak_vertex(self):
        rng = random.Random(3)
        for _ in range(50):
            d = random_semicomplete(rng.randrange(2, 9), rng)
            outcome = solve_semicomplete(d)
            if isinstance(outcome.certificate, LowOutDegree):
                assert d.out_degree(outcome.certificate.vertex) <= 1


class TestCertificateValidation:
    def test_wrong_terminal_name_rejected(self):
        assert not validate_certificate(make_t7(), TerminalIs("rt5"))
        assert not validate_certificate(make_rt5(), TerminalIs("p7"))

    def test_low_out_degree_on_strong_vertex_rejected(self):
        assert not validate_certificate(make_p7(), LowOutDegree(0))
        assert not validate_certificate(make_p7(), LowOutDegree(99))

    def test_tampered_funnel_rejected(self):
        d = make_hub4()
        good = solve_semicomplete(d).certificate
        assert validate_certificate(d, good)
        assert not validate_certificate(
            d, InG1(CycleFunnel(0, (2, 3), 1, True))
        )
        assert not validate_certificate(
            d, InG1(CycleFunnel(1, (2, 3), 0, False))
        )

    def test_certificates_do_not_transfer_between_digraphs(self):
        cert = solve_semicomplete(make_rt5()).certificate
        assert not validate_certificate(make_p7(), cert)

    def test_odd_cycle_must_trace_out_pair_edges(self):
        d = square_of_c4()
        assert not validate_certificate(d, OddCycle((0, 1, 2)))
        assert not validate_certificate(d, OddCycle((0, 1, 1)))
        assert not validate_certificate(d, OddCycle((0, 1, 2, 3)))

    def test_unbalanceable_name_checks_against_catalog(self):
        entry = shipped_unbalanceable6().classes[0]
        assert validate_certificate(entry.graph, InUnbalanceable(entry.name))
        assert not validate_certificate(make_t7(), InUnbalanceable(entry.name))


class TestTournamentSolvers:
    def test_preconditions(self):
        with pytest.raises(PreconditionViolated):
            solve_tournament_d2(make_cd3())  # not a tournament
        with pytest.raises(PreconditionViolated):
            solve_tournament_d2(make_transitive(5))  # not strong
        with pytest.raises(PreconditionViolated):
            solve_tournament_d3(make_rt5())  # min out-degree 2, not 3

    def test_degree2_strong_tournaments_match_oracle(self):
        rng = random.Random(8)
        seen = 0
        while seen < 120:
            t = random_tournament(rng.randrange(5, 9), rng)
            if not is_strong(t) or t.min_out_degree() != 2:
                continue
            seen += 1
            outcome = solve_tournament_d2(t)
            assert not outcome.fallback
            check_outcome(t, outcome)
            assert outcome.colourable == (brute_force_out_colouring(t, 2) is not None)

    def test_degree3_strong_tournaments_colour_or_are_p7(self):
        rng = random.Random(9)
        seen = 0
        while seen < 80:
            t = random_tournament(rng.randrange(7, 12), rng)
            if not is_strong(t) or t.min_out_degree() < 3:
                continue
            seen += 1
            outcome = solve_tournament_d3(t)
            assert not outcome.fallback
            check_outcome(t, outcome)
            if not outcome.colourable:
                assert outcome.certificate == TerminalIs("p7")


class TestRandomSemicompleteSweep:
    def test_no_fallbacks_and_sound_everywhere(self):
        rng = random.Random(20250819)
        for trial in range(800):
            d = random_semicomplete(rng.randrange(4, 12), rng)
            outcome = solve_semicomplete(d)
            assert not outcome.fallback, trial
            check_outcome(d, outcome)
            if d.n <= 9:
                assert outcome.colourable == (
                    brute_force_out_colouring(d, 2) is not None
                ), trial


class TestRebalance:
    def test_catalog_members_are_certified(self):
        for entry in shipped_unbalanceable6().classes:
            d = entry.graph
            outcome = solve_semicomplete(d)
            assert outcome.colouring is not None
            res = rebalance(d, outcome.colouring)
            assert res.certificate == InUnbalanceable(entry.name)
            assert validate_certificate(d, res.certificate)

    def test_random_colourable_instances_balance(self):
        rng = random.Random(7)
        done = 0
        while done < 250:
            d = random_semicomplete(rng.randrange(6, 14), rng)
            outcome = solve_semicomplete(d)
            if outcome.colouring is None:
                continue
            done += 1
            res = rebalance(d, outcome.colouring)
            assert res.colouring is not None, done
            assert not res.fallback
            assert verify_out_colouring(d, res.colouring) is None
            sizes = sorted(
                (len(res.colouring.colour_class(1)), len(res.colouring.colour_class(2)))
            )
            assert sizes[1] - sizes[0] <= 1

    def test_balanced_input_passes_through(self):
        d = make_paley(11)
        outcome = solve_semicomplete(d)
        res = rebalance(d, outcome.colouring)
        assert res.colouring is not None
        assert abs(
            len(res.colouring.colour_class(1)) - len(res.colouring.colour_class(2))
        ) <= 1

    def test_rejects_bad_inputs(self):
        d = make_paley(7)
        with pytest.raises(InputNotValidColouring):
            rebalance(d, Colouring((1, 2, 3, 1, 2, 3, 1), 3))
        with pytest.raises(InputNotValidColouring):
            rebalance(d, Colouring((1, 2, 1), 2))
        # arbitrary labelling that does not 2-out-colour paley(7)... every
        # labelling fails since paley(7) has none at all
        with pytest.raises(InputNotValidColouring):
            rebalance(d, Colouring((1, 2, 1, 2, 1, 2, 1), 2))
        with pytest.raises(NotSemicomplete):
            rebalance(
                Digraph(4, [(i, (i + 1) % 4) for i in range(4)]),
                Colouring((1, 2, 1, 2), 2),
            )


class TestThreeOutColouring:
    def test_sporadic_exceptions_get_three_colours(self):
        for build in (make_rt5, make_t7, make_p7, make_cd3):
            d = build()
            col = three_out_colouring(d)
            assert col.k == 3
            assert verify_out_colouring(d, col) is None
            assert all(col.colour_class(c) for c in (1, 2, 3))

    def test_colourable_instances_also_work(self):
        d = make_paley(11)
        col = three_out_colouring(d)
        assert verify_out_colouring(d, col) is None

    def test_random_sweep(self):
        rng = random.Random(15)
        done = 0
        while done < 150:
            d = random_semicomplete(rng.randrange(3, 11), rng)
            if d.min_out_degree() < 2:
                continue
            done += 1
            col = three_out_colouring(d)
            assert verify_out_colouring(d, col) is None

    def test_preconditions(self):
        with pytest.raises(NotSemicomplete):
            three_out_colouring(Digraph(4, [(i, (i + 1) % 4) for i in range(4)]))
        with pytest.raises(PreconditionViolated):
            three_out_colouring(make_transitive(4))


class TestTwoOutRegular:
    def test_square_of_c4_splits_evens_from_odds(self):
        outcome = solve_2outregular(square_of_c4())
        assert outcome.colouring is not None
        assert tuple(sorted(outcome.colouring.colour_class(1))) == (0, 2)

    def test_rt5_yields_an_odd_cycle(self):
        outcome = solve_2outregular(make_rt5())
        assert outcome.certificate == OddCycle((2, 1, 0, 4, 3))
        assert validate_certificate(make_rt5(), outcome.certificate)

    def test_disjoint_components_are_coloured_independently(self):
        base = square_of_c4()
        arcs = list(base.arcs()) + [(u + 4, v + 4) for u, v in base.arcs()]
        d = Digraph(8, arcs)
        outcome = solve_2outregular(d)
        assert outcome.colouring is not None
        assert verify_out_colouring(d, outcome.colouring) is None

    def test_rejects_wrong_degrees(self):
        with pytest.raises(NotTwoOutRegular):
            solve_2outregular(make_p7())
        with pytest.raises(NotTwoOutRegular):
            solve_2outregular(make_transitive(3))

    def test_random_agreement_with_oracle(self):
        rng = random.Random(12)
        for trial in range(200):
            n = rng.randrange(3, 10)
            d = Digraph(
                n,
                [
                    (v, u)
                    for v in range(n)
                    for u in rng.sample([x for x in range(n) if x != v], 2)
                ],
            )
            outcome = solve_2outregular(d)
            check_outcome(d, outcome)
            assert outcome.colourable == (
                brute_force_out_colouring(d, 2) is not None
            ), trial
            assert outcome.colourable == _gd_bipartite(d), trial


def _gd_bipartite(d: Digraph) -> bool:
    adj: list[set[int]] = [set() for _ in range(d.n)]
    for v in range(d.n):
        a, b = d.out_neighbours(v)
        adj[a].add(b)
        adj[b].add(a)
    side = [-1] * d.n
    for root in range(d.n):
        if side[root] >= 0:
            continue
        side[root] = 0
        queue = [root]
        while queue:
            u = queue.pop()
            for w in adj[u]:
                if side[w] < 0:
                    side[w] = 1 - side[u]
                    queue.append(w)
                elif side[w] == side[u]:
                    return False
    return True


class TestSolveOutcomeShape:
    def test_exactly_one_payload(self):
        with pytest.raises(ValueError):
            SolveOutcome()
        with pytest.raises(ValueError):
            SolveOutcome(
                colouring=Colouring((1, 2), 2), certificate=LowOutDegree(0)
            )

    def test_endgame_window_is_fixed(self):
        assert ENDGAME_WINDOW == 12

    def test_not_semicomplete_rejected(self):
        with pytest.raises(NotSemicomplete):
            solve_semicomplete(Digraph(4, [(i, (i + 1) % 4) for i in range(4)]))
