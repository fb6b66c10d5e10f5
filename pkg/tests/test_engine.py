import math

import pytest

from mirror_sqkd.adversary import build_full_attack, build_weaker_attack, closed_form_rates, epsilon_star, kappa
from mirror_sqkd.engine import (
    AttackSpec,
    ScenarioConfig,
    Tally,
    derive_rates,
    detection_test,
    exact_distribution,
    mirror_detectability,
    round_half_up,
    parse_grid,
    simulate,
    sweep_epsilon,
)
from mirror_sqkd.fock import Basis, ContractViolation
from mirror_sqkd.protocol import AliceOp, ProtocolVariant, SiftKind, sift_round

from oracles import EPS0, TABLE_6, honest_key_rate, swapall_click_probability

SIMPLIFIED = ProtocolVariant.simplified()
MIRROR = ProtocolVariant.mirror()
EPS_GRID = [i / 10 for i in range(11)]


def cfg(attack="none", eps=None, variant=SIMPLIFIED, **kw):
    return ScenarioConfig(variant, AttackSpec(attack, eps), **kw)


def error_probability(dist):
    bad = {SiftKind.FORBIDDEN}
    return dist.prob(
        lambda r: sift_round(r, dist.variant).kind in bad
        or sift_round(r, dist.variant).passed is False
    )


@pytest.mark.parametrize("variant", [SIMPLIFIED, MIRROR])
@pytest.mark.parametrize("attack, eps", [("none", None), ("full", None), ("weaker", 0.3), ("weaker", 1.0)])
def test_distribution_normalized(variant, attack, eps):
    dist = exact_distribution(cfg(attack, eps, variant))
    assert dist.total() == pytest.approx(1.0, abs=1e-9)
    assert all(p >= 0 for p in dist.probs.values())


def test_no_attack_simplified():
    dist = exact_distribution(cfg())
    assert error_probability(dist) == 0.0
    p = dist.conditional(lambda r: r.alice_clicks.any, lambda r: r.op is AliceOp.SWAP10)
    assert p == pytest.approx(0.5, abs=1e-12)
    assert dist.conditional(lambda r: r.alice_clicks.any, lambda r: r.op is AliceOp.CTRL) == 0.0
    rates = derive_rates(dist)
    assert rates.loss_rate_ctrl == 0.0 and rates.loss_rate_swap == 0.0
    assert rates.error_rate_ctrl == 0.0 and rates.error_rate_swap == 0.0
    assert rates.eve_info_probability is None
    assert rates.key_rate == pytest.approx(honest_key_rate(3), abs=1e-12)


def test_no_attack_mirror_key_rate():
    rates = derive_rates(exact_distribution(cfg(variant=MIRROR)))
    assert rates.key_rate == pytest.approx(honest_key_rate(4), abs=1e-12)
    assert rates.forbidden_event_rate == 0.0


def test_full_attack():
    dist = exact_distribution(cfg("full"))
    assert dist.conditional(lambda r: r.bob_clicks.any, lambda r: r.op is AliceOp.CTRL) == 0.0
    rates = derive_rates(dist)
    assert rates.loss_rate_ctrl == 1.0
    assert rates.eve_info_probability == pytest.approx(1.0, abs=1e-12)
    assert rates.error_rate_ctrl is None  # no CTRL photon ever reaches Bob
    assert error_probability(dist) < 1e-12


@pytest.mark.parametrize("eps", EPS_GRID + [0.25, EPS0])
def test_weaker_engine_matches_closed_form(eps):
    rates = derive_rates(exact_distribution(cfg("weaker", eps)))
    p, rc, rs = closed_form_rates(eps)
    assert rates.eve_info_probability == pytest.approx(p, abs=1e-9)
    assert rates.loss_rate_ctrl == pytest.approx(rc, abs=1e-9)
    assert rates.loss_rate_swap == pytest.approx(rs, abs=1e-9)


def test_weaker_at_0p8():
    rates = derive_rates(exact_distribution(cfg("weaker", 0.8)))
    assert (round_half_up(rates.loss_rate_ctrl), round_half_up(rates.loss_rate_swap),
            round_half_up(rates.eve_info_probability)) == (0.57, 0.58, 0.25)


def test_weaker_at_eps_star_equal_losses():
    rates = derive_rates(exact_distribution(cfg("weaker", epsilon_star())))
    assert abs(rates.loss_rate_ctrl - rates.loss_rate_swap) < 1e-9


def test_weaker_zero_equals_full_per_outcome():
    full = exact_distribution(cfg("full"))
    weak = exact_distribution(cfg("weaker", 0.0))
    for rec in set(full.probs) | set(weak.probs):
        assert abs(full[rec] - weak[rec]) < 1e-12


def test_sweep_rows():
    rows = sweep_epsilon(EPS_GRID)
    assert [r.epsilon for r in rows] == EPS_GRID
    for row in rows:
        assert (round_half_up(row.p_closed), round_half_up(row.r_ctrl_closed),
                round_half_up(row.r_swap_closed)) == TABLE_6[row.epsilon]
        assert row.p_exact == pytest.approx(row.p_closed, abs=1e-9)
    r09 = rows[9]
    assert (round_half_up(r09.p_exact), round_half_up(r09.r_ctrl_exact), round_half_up(r09.r_swap_exact)) == (
        0.15, 0.46, 0.53)
    full = derive_rates(exact_distribution(cfg("full")))
    assert rows[0].p_exact == pytest.approx(full.eve_info_probability, abs=1e-12)
    assert rows[0].r_ctrl_exact == pytest.approx(full.loss_rate_ctrl, abs=1e-12)
    assert rows[0].r_swap_exact == pytest.approx(full.loss_rate_swap, abs=1e-12)


def test_round_half_up():
    assert round_half_up(0.725) == 0.73
    assert round_half_up(1 - (0.25 + 0.3) / 2) == 0.73
    assert round_half_up(0.8333) == 0.83


@pytest.mark.parametrize(
    "attack, expected",
    [
        (build_full_attack(), swapall_click_probability(1 / 3)),
        (build_weaker_attack(EPS0), swapall_click_probability(kappa(EPS0) ** 2)),
        (None, 0.0),
    ],
)
def test_mirror_detectability(attack, expected):
    assert mirror_detectability(attack) == pytest.approx(expected, abs=1e-12)


def test_mirror_detectability_values():
    assert swapall_click_probability(1 / 3) == pytest.approx(2 / 9)
    assert swapall_click_probability((3 - math.sqrt(3)) / 6) == pytest.approx(0.1409, abs=1e-4)
    with pytest.raises(ContractViolation):
        mirror_detectability(build_full_attack(), SIMPLIFIED)


@pytest.mark.parametrize("eps", [0.0, 0.5, EPS0])
def test_both_attacks_detectable_against_mirror(eps):
    assert mirror_detectability(build_weaker_attack(eps)) > 0.1
    assert mirror_detectability(build_full_attack()) > 0.1


def test_mirror_detectability_vanishes_with_eves_information():
    assert mirror_detectability(build_weaker_attack(1.0)) == 0.0


def test_simplified_never_generates_swapall():
    dist = exact_distribution(cfg("full"))
    assert all(r.op is not AliceOp.SWAPALL for r in dist.probs)
    tally, _ = simulate(cfg("full", rounds=5000))
    assert all(r.op is not AliceOp.SWAPALL for r in tally.counts)


def test_config_validation():
    with pytest.raises(ContractViolation):
        AttackSpec("weaker")
    with pytest.raises(ContractViolation):
        AttackSpec("weaker", 1.5)
    with pytest.raises(ContractViolation):
        AttackSpec("full", 0.3)
    with pytest.raises(ContractViolation):
        cfg(rounds=0)
    with pytest.raises(ContractViolation):
        cfg(master_seed=-1)


def test_parse_grid():
    assert parse_grid("0:1:0.1") == EPS_GRID
    assert parse_grid("0.2,0.4") == [0.2, 0.4]
    assert len(parse_grid("0:1:0.01")) == 101


# ---------------------------------------------------------------- Monte Carlo


def _within_sigma(tally, dist, k=4.0):
    n = tally.rounds
    for rec in set(tally.counts) | set(dist.probs):
        p = dist[rec]
        obs = tally.counts.get(rec, 0) / n
        sigma = math.sqrt(p * (1 - p) / n)
        if sigma == 0.0:
            assert obs == p, rec
        else:
            assert abs(obs - p) <= k * sigma, (rec, obs, p)


@pytest.mark.parametrize("attack, eps", [("none", None), ("full", None), ("weaker", 0.0), ("weaker", 0.25),
                                         ("weaker", 0.5), ("weaker", EPS0), ("weaker", 1.0)])
def test_monte_carlo_matches_exact(attack, eps):
    config = cfg(attack, eps, rounds=100_000, master_seed=12345)
    tally, _ = simulate(config)
    assert sum(tally.counts.values()) == config.rounds
    _within_sigma(tally, exact_distribution(config))


def test_monte_carlo_rates_cover_closed_form():
    tally, rates = simulate(cfg("weaker", 0.5, rounds=100_000, master_seed=3))
    p, rc, rs = closed_form_rates(0.5)
    for name, value in (("eve_info_probability", p), ("loss_rate_ctrl", rc), ("loss_rate_swap", rs)):
        lo, hi = rates.intervals[name]
        assert lo <= value <= hi, name


def test_determinism_across_workers():
    config = cfg("weaker", 0.5, rounds=50_001, master_seed=99)
    t1, r1 = simulate(config, workers=1)
    t8, r8 = simulate(config, workers=8)
    assert t1.counts == t8.counts
    assert r1 == r8
    t_other, _ = simulate(cfg("weaker", 0.5, rounds=50_001, master_seed=100))
    assert t_other.counts != t1.counts


def test_detection_test_cases():
    tally, _ = simulate(cfg("weaker", 0.3, rounds=100_000, master_seed=1))
    rep = detection_test(tally)
    assert rep.detected
    assert rep.r_ctrl - rep.r_swap == pytest.approx(0.94 - 0.7937, abs=0.02)
    assert 0.0 <= rep.p_value <= 1.0

    tally, _ = simulate(cfg(rounds=100_000, master_seed=1))
    rep = detection_test(tally)
    assert rep.r_ctrl == 0.0 and rep.r_swap == 0.0
    assert not rep.detected and rep.p_value == 1.0


def test_detection_degenerate():
    rep = detection_test(Tally({}, 0, 0, SIMPLIFIED))
    assert rep.degenerate and not rep.detected and rep.p_value is None
