"""Reachability, the next function, and dynamic-oracle optimality."""

import random

import pytest

from discoparse import transitions as tr
from discoparse.oracles import (AlreadyBuilt, dynamic_oracle,
                                next_constituent, reach, reachable)
from discoparse.transitions import SfConfig, combine, label, no_label, shift
from discoparse.tree import (ConstituentSet, InstantiatedConstituent,
                             tree_to_constituents)
from helpers import (DynamicOracleChecker, all_complete_sets,
                     brute_force_reachable, enumerate_sf_configs, project)


def ic(symbol, indices):
    return InstantiatedConstituent(symbol, frozenset(indices))


@pytest.fixture(scope="module")
def fig323_gold(fig323_tree):
    return tree_to_constituents(fig323_tree)


class TestReachable:
    def test_spec_examples(self, fig323_gold):
        c = SfConfig(frozenset({frozenset({1})}), frozenset({2}), 3, 6,
                     frozenset(), 2)
        assert reachable(c, ic("B", {1, 5}))
        c2 = c._replace(focus=frozenset({1, 2}), memory=frozenset())
        assert not reachable(c2, ic("A", {2, 3, 4}))
        c3 = SfConfig(frozenset(), frozenset({1, 2}), 3, 6, frozenset(), 2)
        assert not reachable(c3, ic("X", {1, 2}))  # even step, focus == goal

    def test_already_built(self):
        c = SfConfig(frozenset(), frozenset({1}), 2, 3,
                     frozenset({ic("X", {1})}), 1)
        with pytest.raises(AlreadyBuilt):
            reachable(c, ic("X", {1}))

    def test_agrees_with_brute_force(self):
        # every valid configuration x every candidate constituent, n <= 3
        candidates = [frozenset(s) for s in
                      ({1}, {2}, {3}, {1, 2}, {2, 3}, {1, 3}, {1, 2, 3})]
        for config in enumerate_sf_configs(3, labels=("A",)):
            for s in candidates:
                target = ic("T", s)
                if target in config.constituents:
                    continue
                want = brute_force_reachable(config, target)
                assert reachable(config, target) == want, (config, target)

    def test_agrees_with_brute_force_n4_sampled(self):
        rng = random.Random(99)
        configs = enumerate_sf_configs(4, labels=("A",))
        sample = rng.sample(configs, 300)
        all_sets = [frozenset(s) for k in range(1, 5)
                    for s in __import__("itertools").combinations(range(1, 5), k)]
        for config in sample:
            for s in rng.sample(all_sets, 6):
                target = ic("T", s)
                if target in config.constituents:
                    continue
                assert reachable(config, target) == \
                    brute_force_reachable(config, target)


class TestNextConstituent:
    def test_spec_examples(self, fig323_gold):
        c = SfConfig(frozenset({frozenset({1})}), frozenset({2}), 3, 6,
                     frozenset(), 2)
        assert next_constituent(c, fig323_gold) == ic("A", {2, 3, 4})
        start = tr.init("sf", 5)
        assert next_constituent(start, fig323_gold) == ic("A", {2, 3, 4})
        c2 = SfConfig(frozenset({frozenset({1})}), frozenset({2, 3, 4}), 5, 6,
                      frozenset({ic("A", {2, 3, 4})}), 12)
        assert next_constituent(c2, fig323_gold) == ic("B", {1, 5})


class TestDynamicOracle:
    def test_spec_examples(self, fig323_gold):
        c = SfConfig(frozenset({frozenset({1})}), frozenset({2}), 3, 6,
                     frozenset(), 2)
        decision = dynamic_oracle(c, fig323_gold)
        assert decision.actions == {shift()}
        c_odd = SfConfig(frozenset({frozenset({1})}), frozenset({2, 3, 4}),
                         5, 6, frozenset(), 11)
        assert dynamic_oracle(c_odd, fig323_gold).actions == {label("A")}
        c_nl = SfConfig(frozenset(), frozenset({1}), 2, 6, frozenset(), 1)
        assert dynamic_oracle(c_nl, fig323_gold).actions == {no_label()}

    def test_pick_prefers_combine_highest_max(self):
        gold = ConstituentSet([ic("A", {1, 2, 3}), ic("S", {1, 2, 3, 4})], 4)
        c = SfConfig(frozenset({frozenset({1}), frozenset({2})}),
                     frozenset({3}), 4, 5, frozenset(), 4)
        decision = dynamic_oracle(c, gold)
        assert decision.actions == {combine({1}), combine({2})}
        assert decision.pick == combine({2})

    def test_static_path_agreement(self, fig323_gold):
        # on the gold path the deterministic pick replays the static oracle
        from discoparse.oracles import sf_static_oracle
        config = tr.init("sf", 5)
        for action in sf_static_oracle(fig323_gold):
            assert dynamic_oracle(config, fig323_gold).pick == action
            config = tr.apply("sf", config, action)


class TestOptimality:
    def test_exhaustive_n3(self):
        configs = enumerate_sf_configs(3, labels=("A", "B"))
        for gold in all_complete_sets(3, labels=("A", "B")):
            checker = DynamicOracleChecker(gold)
            states = {project(c, gold) for c in configs}
            for state in states:
                checker.check_state(state)
                checker.check_preservation(state)

    def test_literal_rollouts_n4(self):
        rng = random.Random(5)
        configs = enumerate_sf_configs(4, labels=("A", "B"))
        golds = all_complete_sets(4, labels=("A", "B"))
        for gold in rng.sample(golds, 25):
            checker = DynamicOracleChecker(gold)
            for config in rng.sample(configs, 40):
                checker.check_literal_config(config)
