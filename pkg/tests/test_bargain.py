import itertools
import random

import pytest

from coopspeed.bargain import (
    CharacteristicFunction,
    buyer_seller_cf,
    enumerate_core,
    in_core,
    is_efficient,
    is_individually_rational,
    marginal_contribution,
    marginal_contribution_set,
    satisfies_mc_principle,
)

# One seller (player 1, asking 3) and two buyers valuing the point at 5 and 8.
MARKET = buyer_seller_cf(3.0, (5.0, 8.0))


def brute_force_core(cf, granularity):
    """Oracle: filter the whole lattice of efficient allocations by the
    core conditions, enumerated without the backtracking machinery."""
    units = round(cf.grand_value() / granularity)
    n = len(cf.players)
    out = []
    for combo in itertools.product(range(units + 1), repeat=n):
        if sum(combo) != units:
            continue
        x = tuple(v * granularity for v in combo)
        if in_core(x, cf):
            out.append(x)
    return out


def test_market_characteristic_function_values():
    assert MARKET.value([1]) == 0.0
    assert MARKET.value([2]) == 0.0
    assert MARKET.value([3]) == 0.0
    assert MARKET.value([1, 2]) == pytest.approx(2.0)
    assert MARKET.value([1, 3]) == pytest.approx(5.0)
    assert MARKET.value([2, 3]) == 0.0
    assert MARKET.grand_value() == pytest.approx(5.0)


def test_market_is_superadditive():
    players = list(MARKET.players)
    for r in range(1, len(players) + 1):
        for s in itertools.combinations(players, r):
            rest = [p for p in players if p not in s]
            for r2 in range(1, len(rest) + 1):
                for t in itertools.combinations(rest, r2):
                    assert MARKET.value(s + t) >= MARKET.value(s) + MARKET.value(t) - 1e-9


def test_price_above_all_valuations_gives_zero_game():
    cf = buyer_seller_cf(10.0, (5.0, 8.0))
    for coalition in cf.coalitions():
        assert cf.value(coalition) == 0.0


def test_marginal_contributions():
    assert marginal_contribution(MARKET, 1) == pytest.approx(5.0)
    assert marginal_contribution(MARKET, 2) == pytest.approx(0.0)
    assert marginal_contribution(MARKET, 3) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        marginal_contribution(MARKET, 99)


def test_marginal_contribution_of_full_set_is_grand_value():
    assert marginal_contribution_set(MARKET, MARKET.players) == pytest.approx(5.0)


def test_additive_game_marginal_contribution_is_the_weight():
    weights = {1: 2.0, 2: 5.0, 3: 1.0}
    values = {}
    for r in range(1, 4):
        for s in itertools.combinations(weights, r):
            values[frozenset(s)] = sum(weights[p] for p in s)
    cf = CharacteristicFunction((1, 2, 3), values)
    for p, w in weights.items():
        assert marginal_contribution(cf, p) == pytest.approx(w)


def test_allocation_predicates_on_market_game():
    assert is_individually_rational((2, 0, 3), MARKET)
    assert is_efficient((2, 0, 3), MARKET)
    assert satisfies_mc_principle((2, 0, 3), MARKET)
    assert not is_efficient((5, 5, 5), MARKET)
    # (0, 0, 5): efficient, rational, and buyer 2 gets exactly its MC of 0.
    assert is_efficient((0, 0, 5), MARKET)
    assert is_individually_rational((0, 0, 5), MARKET)
    assert marginal_contribution(MARKET, 2) == 0.0


def test_predicates_accept_mappings():
    x = {1: 2.0, 2: 0.0, 3: 3.0}
    assert is_individually_rational(x, MARKET)
    assert is_efficient(x, MARKET)
    with pytest.raises(ValueError):
        is_efficient({1: 2.0}, MARKET)


def test_in_core_examples():
    assert in_core((3, 0, 2), MARKET)
    # x_1 + x_3 = 4 < f({1, 3}) = 5, so the pair would defect.
    assert not in_core((2, 1, 2), MARKET)
    cf = CharacteristicFunction((1, 2, 3), {frozenset((1, 2, 3)): 4.0})
    assert in_core((4, 0, 0), cf)


def test_enumerate_core_market_exact():
    core = enumerate_core(MARKET, granularity=1.0)
    assert core == [(2.0, 0.0, 3.0), (3.0, 0.0, 2.0), (4.0, 0.0, 1.0), (5.0, 0.0, 0.0)]


def test_majority_game_core_is_empty():
    values = {
        frozenset((1, 2)): 1.0,
        frozenset((1, 3)): 1.0,
        frozenset((2, 3)): 1.0,
        frozenset((1, 2, 3)): 1.0,
    }
    cf = CharacteristicFunction((1, 2, 3), values)
    assert enumerate_core(cf, granularity=0.25) == []
    assert brute_force_core(cf, 0.25) == []


def test_flat_game_core_is_every_composition():
    cf = CharacteristicFunction((1, 2, 3), {frozenset((1, 2, 3)): 2.0})
    core = enumerate_core(cf, granularity=1.0)
    assert len(core) == 6
    assert all(sum(x) == 2.0 for x in core)
    assert core == sorted(core)


def test_enumerate_matches_brute_force_on_random_games():
    rng = random.Random(13)
    for _ in range(10):
        n = rng.randint(2, 4)
        players = tuple(range(1, n + 1))
        values = {}
        for r in range(1, n + 1):
            for s in itertools.combinations(players, r):
                values[frozenset(s)] = float(rng.randint(0, 6))
        values[frozenset(players)] = float(rng.randint(0, 8))
        cf = CharacteristicFunction(players, values)
        assert enumerate_core(cf, 1.0) == brute_force_core(cf, 1.0)


def test_core_members_satisfy_the_theorems():
    rng = random.Random(31)
    for _ in range(10):
        players = (1, 2, 3)
        values = {}
        for r in range(1, 4):
            for s in itertools.combinations(players, r):
                values[frozenset(s)] = float(rng.randint(0, 5))
        cf = CharacteristicFunction(players, values)
        for x in enumerate_core(cf, 1.0):
            assert is_individually_rational(x, cf)
            by_player = dict(zip(players, x))
            for coalition in cf.coalitions():
                if coalition:
                    got = sum(by_player[p] for p in coalition)
                    assert got <= marginal_contribution_set(cf, coalition) + 1e-9


def test_fractional_granularity():
    cf = CharacteristicFunction((1, 2), {frozenset((1,)): 0.5, frozenset((1, 2)): 1.0})
    core = enumerate_core(cf, granularity=0.25)
    assert core == [(0.5, 0.5), (0.75, 0.25), (1.0, 0.0)]
    assert core == brute_force_core(cf, 0.25)


def test_enumerate_core_validation():
    with pytest.raises(ValueError):
        enumerate_core(MARKET, granularity=0.0)
    with pytest.raises(ValueError):
        enumerate_core(MARKET, granularity=2.0)  # 5 is not a multiple of 2


def test_characteristic_function_validation():
    with pytest.raises(ValueError):
        CharacteristicFunction((), {})
    with pytest.raises(ValueError):
        CharacteristicFunction((1, 2), {frozenset((3,)): 1.0})
    with pytest.raises(ValueError):
        CharacteristicFunction((1, 2), {frozenset((1,)): -1.0})
    with pytest.raises(ValueError):
        CharacteristicFunction((1, 1), {})
