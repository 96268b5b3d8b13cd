"""Oracle tests: ground evaluation, rewrites, and reachability search."""
import json
from pathlib import Path

import pytest

from hmlmc.contracts import load_contract
from hmlmc.oracle import (
    FiniteDomains,
    OracleLimit,
    check_properties,
    check_reachable,
    eval_formula,
    miniscope,
)
from hmlmc.properties import load_properties
from hmlmc.semantics import System, Transaction, load_trace, replay

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
BET_TRACE_PATH = Path(__file__).resolve().parent / "data" / "bet_trace.json"


def corpus_contract(case: str, variant: str = "v1"):
    return load_contract((CORPUS / case / variant / "contract.sol").read_text())


def corpus_properties(case: str, contract, users):
    return load_properties((CORPUS / case / "properties.hml").read_text(),
                           contract, users)


def prop(props, name):
    for p in props:
        if p.name == name:
            return p.formula
    raise KeyError(name)


@pytest.fixture(scope="module")
def bet():
    contract = corpus_contract("bet")
    system = System(contracts=(contract,), users=("A", "B", "M"))
    props = corpus_properties("bet", contract, system.users)
    domains = FiniteDomains(system=system, contract=contract,
                            int_lo=0, int_hi=10)
    return contract, system, props, domains


@pytest.fixture(scope="module")
def bet_seq(bet):
    """Flagged states along the worked trace, most recent first."""
    _, system, _, _ = bet
    txs = [Transaction.from_json(t)
           for t in json.loads(BET_TRACE_PATH.read_text())]
    states = replay(system, txs)
    return list(reversed(states))


class TestEvalWorkedExample:
    def test_winnability_after_set(self, bet, bet_seq):
        _, _, props, domains = bet
        seq = bet_seq[1:]  # head = state after constructor, join, set
        assert eval_formula(seq, prop(props, "winnability"), domains)

    def test_winnability_forall_fails_after_set(self, bet, bet_seq):
        _, _, props, domains = bet
        seq = bet_seq[1:]
        assert not eval_formula(seq, prop(props, "winnability_forall"),
                                domains)

    def test_winnability_vacuous_before_set(self, bet, bet_seq):
        # rate is 150 > 100 only after the oracle moved; directly after the
        # join the guard is false and the implication holds vacuously.
        _, _, props, domains = bet
        seq = bet_seq[2:]
        assert eval_formula(seq, prop(props, "winnability"), domains)

    def test_singleton_sequences_suffice(self, bet, bet_seq):
        # The checker bounds old-chains by modal depth, so evaluation at a
        # frontier state never looks past the state itself.
        _, _, props, domains = bet
        for name in ("winnability", "liquidity", "frontrunning"):
            assert eval_formula(bet_seq[1:2], prop(props, name), domains)

    def test_last_reverted_via_frontrunning(self, bet, bet_seq):
        _, _, props, domains = bet
        # At the post-set state the oracle can always reset the rate, making
        # any subsequent win revert.
        assert eval_formula(bet_seq[1:], prop(props, "frontrunning"), domains)

    def test_budget_exhaustion_is_reported(self, bet, bet_seq):
        _, _, props, domains = bet
        with pytest.raises(OracleLimit):
            eval_formula(bet_seq[1:], prop(props, "liquidity"), domains,
                         budget=10)

    def test_empty_sequence_rejected(self, bet):
        _, _, props, domains = bet
        with pytest.raises(ValueError):
            eval_formula([], prop(props, "winnability"), domains)


class TestQuantifierSemantics:
    def make(self, src, text, users=("A",), lo=0, hi=3, deltas=(0,)):
        contract = load_contract(src)
        system = System(contracts=(contract,), users=users)
        props = load_properties(text, contract, users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=lo, int_hi=hi, deltas=deltas)
        return system, props, domains

    COUNTER = """
    contract Counter {
        int total;
        constructor() payable {}
        function bump(int n) { require(n > 0); total = total + n; }
    }
    """

    def test_forall_exists_duality(self, bet, bet_seq):
        _, _, props, domains = bet
        # not forall == exists not, on a state where the split is non-trivial
        forall = prop(props, "winnability_forall")
        exists = prop(props, "winnability")
        seq = bet_seq[1:]
        assert eval_formula(seq, exists, domains)
        assert not eval_formula(seq, forall, domains)

    def test_ints_range_over_window(self):
        system, props, domains = self.make(
            self.COUNTER,
            "property p { forall n: int. n <= 3 }\n"
            "property q { exists n: int. n == 3 }\n"
            "property r { exists n: int. n == 4 }\n")
        seq = [system.genesis()]
        assert eval_formula(seq, prop(props, "p"), domains)
        assert eval_formula(seq, prop(props, "q"), domains)
        assert not eval_formula(seq, prop(props, "r"), domains)

    def test_addresses_range_over_roster(self):
        system, props, domains = self.make(
            self.COUNTER,
            "property p { exists a: address. a == Counter }\n"
            "property q { exists a: address. a == null }\n"
            "property r { forall a: address. a == null || a == A"
            " || a == Counter }\n")
        seq = [system.genesis()]
        for name in ("p", "q", "r"):
            assert eval_formula(seq, prop(props, name), domains)

    def test_constant_proc_with_args_variable(self):
        system, props, domains = self.make(
            self.COUNTER,
            "property p { forall x: args. <A, Counter.bump(x), 0>"
            " (Counter.total == old(Counter.total) + 1 || last_reverted) }\n"
            "property q { exists x: args. <A, Counter.bump(x), 0>"
            " Counter.total == 3 }\n")
        constructed = replay(system, [Transaction(
            sender="A", contract="Counter", proc="constructor", args=())])[-1]
        # bump(1) is the only bump that adds exactly 1; bump(0) reverts.
        assert not eval_formula([constructed], prop(props, "p"), domains)
        assert eval_formula([constructed], prop(props, "q"), domains)

    def test_args_deltas_ride_along(self):
        system, props, domains = self.make(
            self.COUNTER,
            "property p { exists x: args. <A, Counter.bump(x), 0>"
            " block.number == old(block.number) + 2 }\n",
            deltas=(0, 2))
        constructed = replay(system, [Transaction(
            sender="A", contract="Counter", proc="constructor", args=())])[-1]
        assert eval_formula([constructed], prop(props, "p"), domains)

    def test_proc_variable_excludes_constructor(self):
        system, props, domains = self.make(
            self.COUNTER,
            "property p { forall f: proc, x: args. <A, Counter.f(x), 0>"
            " (Counter.total > old(Counter.total) || last_reverted) }\n")
        constructed = replay(system, [Transaction(
            sender="A", contract="Counter", proc="constructor", args=())])[-1]
        # Only bump is in the proc domain, and it either bumps or reverts;
        # a constructor replay would hit the construction discipline (and
        # revert), which also satisfies the body - the point is this holds.
        assert eval_formula([constructed], prop(props, "p"), domains)


class TestMiniscope:
    def test_equivalence_on_corpus(self, bet, bet_seq):
        _, _, props, domains = bet
        for p in props:
            rewritten = miniscope(p.formula)
            for k in range(1, len(bet_seq) + 1):
                seq = bet_seq[len(bet_seq) - k:]
                assert (eval_formula(seq, p.formula, domains, budget=10**8)
                        == eval_formula(seq, rewritten, domains,
                                        budget=10**8)), p.name

    def test_quantifier_pushed_below_modal(self):
        contract = corpus_contract("vault")
        props = corpus_properties("vault", contract, ("A",))
        from hmlmc.properties.ast import FForall, FModal, FNot

        def outer_foralls(f):
            n = 0
            while True:
                if isinstance(f, FNot):
                    f = f.body
                elif isinstance(f, FForall):
                    n += 1
                    f = f.body
                else:
                    return n

        original = prop(props, "non_inflation")
        rewritten = miniscope(original)

        def first_modal_prefix(f):
            # quantifiers crossed before the first modal on any path
            if isinstance(f, FModal):
                return 0
            if isinstance(f, FForall):
                return 1 + first_modal_prefix(f.body)
            if isinstance(f, FNot):
                return first_modal_prefix(f.body)
            if hasattr(f, "left"):
                return max(first_modal_prefix(f.left),
                           first_modal_prefix(f.right))
            return 0

        assert first_modal_prefix(rewritten) < first_modal_prefix(original)


class TestCheckReachable:
    def test_depth_zero_trivial_property(self):
        contract = corpus_contract("bet")
        system = System(contracts=(contract,), users=("A",))
        props = load_properties("property t { 1 == 1 }\n", contract,
                                system.users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=0, int_hi=1)
        verdict = check_reachable(prop(props, "t"), 0, domains)
        assert verdict.holds
        assert verdict.explored == 1

    def test_bet_winnability_holds_small(self):
        contract = corpus_contract("bet")
        system = System(contracts=(contract,), users=("A", "B"),
                        initial_balance=4)
        props = corpus_properties("bet", contract, system.users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=0, int_hi=3)
        verdict = check_reachable(prop(props, "winnability"), 2, domains)
        assert verdict.holds

    def test_shortest_witness_and_replay(self):
        # Reference rows: bank v2 breaks additivity in one step, bet v3
        # becomes front-runnable by anyone in one step.
        contract = corpus_contract("bank", "v2")
        system = System(contracts=(contract,), users=("A", "B"),
                        initial_balance=3)
        props = corpus_properties("bank", contract, system.users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=0, int_hi=3)
        verdict = check_reachable(prop(props, "additivity"), 2, domains)
        assert verdict.fails
        assert len(verdict.witness) == 1
        # The witness replays to a state where the property fails.
        states = replay(system, list(verdict.witness))
        assert not eval_formula([states[-1]], prop(props, "additivity"),
                                domains)

    def test_bet_v3_frontrunning_fails_depth_one(self):
        contract = corpus_contract("bet", "v3")
        system = System(contracts=(contract,), users=("A",),
                        initial_balance=4)
        props = corpus_properties("bet", contract, system.users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=0, int_hi=110)
        verdict = check_reachable(prop(props, "frontrunning"), 1, domains)
        assert verdict.fails
        assert len(verdict.witness) == 1

    def test_node_limit_inconclusive(self):
        contract = corpus_contract("bet")
        system = System(contracts=(contract,), users=("A", "B"))
        props = corpus_properties("bet", contract, system.users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=0, int_hi=2)
        verdict = check_reachable(prop(props, "winnability"), 3, domains,
                                  node_limit=5)
        assert verdict.inconclusive
        assert "node limit" in verdict.reason

    def test_budget_inconclusive(self):
        contract = corpus_contract("bet")
        system = System(contracts=(contract,), users=("A", "B"))
        props = corpus_properties("bet", contract, system.users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=0, int_hi=2)
        verdict = check_reachable(prop(props, "frontrunning"), 1, domains,
                                  budget=50)
        assert verdict.inconclusive
        assert "budget" in verdict.reason

    def test_multi_property_sweep_matches_singles(self):
        contract = corpus_contract("bank", "v2")
        system = System(contracts=(contract,), users=("A", "B"),
                        initial_balance=3)
        props = corpus_properties("bank", contract, system.users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=0, int_hi=3)
        swept = check_properties(props, 1, domains)
        for p in props:
            single = check_reachable(p.formula, 1, domains)
            assert swept[p.name].kind == single.kind, p.name
            assert swept[p.name].witness == single.witness, p.name

    def test_monotone_refutation(self):
        # A failure found at depth d is still found at every deeper bound.
        contract = corpus_contract("bank", "v2")
        system = System(contracts=(contract,), users=("A",),
                        initial_balance=2)
        props = corpus_properties("bank", contract, system.users)
        domains = FiniteDomains(system=system, contract=contract,
                                int_lo=0, int_hi=2)
        shallow = check_reachable(prop(props, "additivity"), 1, domains)
        deeper = check_reachable(prop(props, "additivity"), 2, domains)
        assert shallow.fails and deeper.fails
        assert len(shallow.witness) == len(deeper.witness) == 1
