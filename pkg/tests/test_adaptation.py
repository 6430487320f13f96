"""Machine strategy state machines: frozen examples and recursion properties."""

import math

import pytest

from coadapt.adaptation import (
    ConjVar,
    GradientPlay,
    PolicyGrad,
    best_response_policy,
    conjvar_update_cobbdouglas,
    initial_conjvar,
    initial_policygrad,
)
from coadapt.equilibria import cv_best_response_map, policy_gradient_closed_form
from coadapt.errors import ConjectureUndefinedError
from coadapt.games import CANONICAL_GAME, COBB_GAME, JointAction

G = CANONICAL_GAME
SQRT41 = math.sqrt(41.0)


class TestGradientPlay:
    def test_full_rate_tracks_input(self):
        s = GradientPlay(G, alpha=1.0, m=-0.53, nash_m=-0.2)
        assert s.step(0.37) == pytest.approx(0.37, abs=1e-15)

    def test_zero_rate_pins_nash_action(self):
        s = GradientPlay(G, alpha=0.0, m=0.4, nash_m=-0.2)
        assert s.step(0.9) == -0.2
        assert s.step(-0.9) == -0.2

    def test_exponential_smoothing_form(self):
        s = GradientPlay(G, alpha=0.3, m=0.0, nash_m=-0.2)
        assert s.step(1.0) == pytest.approx(0.3, abs=1e-15)

    def test_frozen_input_converges_at_rate(self):
        # geometric approach to h at rate (1 - alpha)
        s = GradientPlay(G, alpha=0.25, m=0.0, nash_m=-0.2)
        h = 0.6
        errors = []
        for _ in range(8):
            s.step(h)
            errors.append(abs(s.m - h))
        for prev, nxt in zip(errors, errors[1:]):
            assert nxt == pytest.approx(0.75 * prev, rel=1e-9)

    def test_rate_flag(self):
        assert GradientPlay(G, alpha=1.5, m=0, nash_m=0).rate_flagged
        assert not GradientPlay(G, alpha=1.0, m=0, nash_m=0).rate_flagged


class TestConjVar:
    def test_initial_policy_is_follower_line(self):
        s = initial_conjvar(G)
        assert s.conjecture == 0.0
        assert s.policy.slope == pytest.approx(1.0)
        assert s.policy.intercept == 0.0

    def test_estimate_best_responder_unit_slope(self):
        # pair medians from exact best responses to m = h and m = h + 0.1
        from coadapt.games import human_best_response_to_policy

        s = initial_conjvar(G, delta=0.1)
        h0 = human_best_response_to_policy(G, 1.0, 0.0)
        h1 = human_best_response_to_policy(G, 1.0, 0.1)
        est = s.estimate(JointAction(h0, h0), JointAction(h1, h1 + 0.1))
        assert est == pytest.approx(-0.2, abs=1e-12)

    def test_estimate_best_responder_rse_slope(self):
        from coadapt.games import human_best_response_to_policy

        s = ConjVar(G, delta=0.1)
        L = 5 / 11
        h0 = human_best_response_to_policy(G, L, 0.0)
        h1 = human_best_response_to_policy(G, L, 0.1)
        est = s.estimate(JointAction(h0, L * h0), JointAction(h1, L * h1 + 0.1))
        assert est == pytest.approx(1 / 7, abs=1e-12)

    def test_identical_medians_raise(self):
        s = initial_conjvar(G)
        with pytest.raises(ConjectureUndefinedError):
            s.estimate(JointAction(0.1, 0.2), JointAction(0.1, 0.2))

    def test_update_examples(self):
        s = initial_conjvar(G)
        assert s.update(-0.2).slope == pytest.approx(7 / 6, abs=1e-14)
        assert s.update(0.0).slope == pytest.approx(1.0)
        assert s.update((1 - SQRT41) / 10).slope == pytest.approx(
            (-1 + SQRT41) / 4, abs=1e-12)

    def test_estimate_update_composition_realizes_map(self):
        from coadapt.games import human_best_response_to_policy

        s = initial_conjvar(G, delta=0.1)
        L = s.policy.slope
        for _ in range(6):
            h0 = human_best_response_to_policy(G, L, s.policy.intercept)
            h1 = human_best_response_to_policy(G, L, s.policy.intercept + 0.1)
            m0, m1 = L * h0 + s.policy.intercept, L * h1 + s.policy.intercept + 0.1
            s.advance(JointAction(h0, m0), JointAction(h1, m1))
            assert s.policy.slope == pytest.approx(cv_best_response_map(G, L), abs=1e-10)
            L = s.policy.slope

    def test_cobb_update(self):
        policy = conjvar_update_cobbdouglas(COBB_GAME, 0.0)
        assert policy.slope == pytest.approx(-0.22 / 0.7, abs=1e-14)
        assert policy.intercept == pytest.approx(5 / 7, abs=1e-14)

    def test_cobb_denominator_identity(self):
        # when the denominator collapses to a_M, the slope equals -d_M
        lh = -1.0 / COBB_GAME.d_M  # makes b_M + b_M d_M L_H = 0
        policy = conjvar_update_cobbdouglas(COBB_GAME, lh)
        assert policy.slope == pytest.approx(-COBB_GAME.d_M, abs=1e-12)
        assert policy.intercept == pytest.approx(0.0, abs=1e-12)


class TestPolicyGrad:
    def test_initial_state(self):
        s = initial_policygrad(G)
        assert s.slope == pytest.approx(1.0)
        assert s.anchor == pytest.approx(JointAction(0.0, 0.0), abs=1e-12)

    def test_policies_pass_through_anchor(self):
        s = PolicyGrad(G, anchor=JointAction(0.1, -0.1), slope=0.7, Delta=0.1)
        for policy in (s.nominal_policy(), s.perturbed_policy()):
            assert policy(0.1) == pytest.approx(-0.1, abs=1e-15)

    def test_estimate_is_forward_difference(self):
        s = initial_policygrad(G, Delta=0.25)
        assert s.estimate(0.5, 0.6) == pytest.approx(0.4)
        assert s.estimate(0.5, 0.5) == 0.0

    def test_update_examples(self):
        s = initial_policygrad(G)
        s.slope = 5 / 11
        assert s.update(0.0) == pytest.approx(5 / 11)
        s.slope = 1.0
        assert s.update(0.06) == pytest.approx(0.88)

    def test_recursion_with_exact_gradients(self):
        # ten exact-gradient steps land near the steering slope
        s = initial_policygrad(G)
        for _ in range(10):
            s.update(policy_gradient_closed_form(G, s.slope))
        assert abs(s.slope - 5 / 11) < 0.05

    def test_fixed_points_are_quartic_roots(self):
        g = policy_gradient_closed_form(G, 5 / 11)
        assert g == pytest.approx(0.0, abs=1e-14)
        # (11L - 5)(2L^3 + 181L^2 - 380L + 305) factors the numerator
        for L in (0.2, 0.9, 1.7):
            quartic = (11 * L - 5) * (2 * L**3 + 181 * L**2 - 380 * L + 305)
            assert (policy_gradient_closed_form(G, L) == 0) == (quartic == 0)


class TestBestResponsePolicy:
    def test_quadratic_at_zero_conjecture(self):
        policy = best_response_policy(G, 0.0)
        assert policy.slope == 1.0 and policy.intercept == 0.0

    def test_anchored_through_machine_optimum_for_shifted_game(self):
        from coadapt.games import shifted_canonical_machine

        g = shifted_canonical_machine(0.1, -0.1)
        policy = best_response_policy(g, -0.2)
        assert policy(0.1) == pytest.approx(-0.1, abs=1e-12)
