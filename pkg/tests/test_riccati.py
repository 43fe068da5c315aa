"""Riccati layer: canonical solver vs closed forms and scipy, existence
conditions, and the epsilon-interval inversion.

scipy.linalg.solve_continuous_are and numpy.linalg serve as independent
reference implementations only; the package itself never calls them.
"""

import math
import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qsyn import Decomposition, OpoParams, build_plant, rho_bound
from qsyn.errors import NoStabilizingSolution
from qsyn.riccati import (
    RiccatiProblem,
    RiccatiSide,
    assemble_pair,
    eps_upper_by_bisection,
    epsilon_feasibility,
    existence_check,
    existence_inequalities,
    solve_care,
)

GAMMA = 0.05
EPSILON = 1.0


def scalar_problem(a, b, c, side=RiccatiSide.GENERIC):
    one = np.ones((1, 1))
    return RiccatiProblem(a * one, b * one, c * one, side)


def stabilizing_root(a, b, c):
    """Closed-form stabilizing root of 2 a x - b x^2 + c = 0.

    The closed loop is a - b x = -sqrt(a^2 + b c), so the stabilizing
    root is x = (a + sqrt(a^2 + b c)) / b whenever the discriminant is
    positive (any sign of b), and -c / (2 a) in the linear case b = 0,
    a < 0.
    """
    if b == 0.0:
        return -c / (2.0 * a)
    return (a + math.sqrt(a * a + b * c)) / b


class TestProblemValidation:
    def test_rejects_asymmetric_quadratic_coefficient(self):
        with pytest.raises(ValueError, match="bhat"):
            RiccatiProblem(np.zeros((2, 2)), np.array([[0.0, 1.0], [0.0, 0.0]]), np.eye(2))

    def test_rejects_asymmetric_constant_coefficient(self):
        with pytest.raises(ValueError, match="chat"):
            RiccatiProblem(np.zeros((2, 2)), np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_rejects_size_mismatch(self):
        with pytest.raises(ValueError):
            RiccatiProblem(np.zeros((2, 2)), np.eye(2), np.eye(3))

    def test_symmetrizes_roundoff_asymmetry(self):
        bumped = np.eye(2)
        bumped[0, 1] = 1e-13
        problem = RiccatiProblem(np.zeros((2, 2)), bumped, np.eye(2))
        assert_allclose(problem.bhat, problem.bhat.T, atol=0.0)

    def test_quadratic_coefficient_min_eigenvalue(self):
        problem = RiccatiProblem(np.zeros((2, 2)), np.diag([-1.0, 2.0]), np.eye(2))
        assert problem.bhat_min_eigenvalue() == pytest.approx(-1.0)


class TestScalarClosedForm:
    @settings(max_examples=60, deadline=None)
    @given(
        a=st.floats(-5.0, 5.0),
        b=st.floats(0.01, 5.0),
        c=st.floats(0.01, 5.0),
    )
    def test_definite_case_matches_quadratic_formula(self, a, b, c):
        solution = solve_care(scalar_problem(a, b, c))
        assert solution.x[0, 0] == pytest.approx(stabilizing_root(a, b, c), rel=1e-9)
        assert solution.closed_loop_eigs[0].real == pytest.approx(
            -math.sqrt(a * a + b * c), rel=1e-9
        )

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.floats(-3.0, 3.0),
        b=st.floats(-5.0, -0.1),
        margin=st.floats(0.1, 5.0),
    )
    def test_negative_discriminant_has_no_stabilizing_solution(self, a, b, margin):
        # c chosen so a^2 + b c = -margin: the Hamiltonian eigenvalues
        # are the pure imaginary pair +/- i sqrt(margin).
        c = (a * a + margin) / (-b)
        with pytest.raises(NoStabilizingSolution):
            solve_care(scalar_problem(a, b, c))

    def test_linear_case_stable_drift(self):
        solution = solve_care(scalar_problem(-2.0, 0.0, 3.0))
        assert solution.x[0, 0] == pytest.approx(0.75, rel=1e-12)

    def test_linear_case_unstable_drift(self):
        with pytest.raises(NoStabilizingSolution):
            solve_care(scalar_problem(1.0, 0.0, 1.0))

    def test_rotation_generator_sits_on_the_axis(self):
        rotation = np.array([[0.0, 1.0], [-1.0, 0.0]])
        with pytest.raises(NoStabilizingSolution):
            solve_care(RiccatiProblem(rotation, np.zeros((2, 2)), np.zeros((2, 2))))

    def test_indefinite_primal_warns_but_may_still_solve(self):
        problem = scalar_problem(-1.0, -1.0, 0.5, RiccatiSide.PRIMAL)
        with pytest.warns(RuntimeWarning, match="indefinite"):
            solution = solve_care(problem)
        assert solution.x[0, 0] == pytest.approx(stabilizing_root(-1.0, -1.0, 0.5), rel=1e-9)

    def test_indefinite_generic_side_stays_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            solve_care(scalar_problem(-1.0, -1.0, 0.5))


class TestSolveAgainstScipy:
    def test_random_definite_problems(self):
        rng = np.random.Generator(np.random.Philox(814))
        for trial in range(30):
            n = int(rng.integers(2, 7))
            ahat = rng.normal(size=(n, n))
            m = rng.normal(size=(n, n))
            bhat = m @ m.T + 0.1 * np.eye(n)
            l = rng.normal(size=(n, n))
            chat = l.T @ l + 0.1 * np.eye(n)
            problem = RiccatiProblem(ahat, bhat, chat)
            solution = solve_care(problem)
            r = np.linalg.inv(bhat)
            reference = scipy.linalg.solve_continuous_are(
                ahat, np.eye(n), chat, 0.5 * (r + r.T)
            )
            scale = 1.0 + np.linalg.norm(reference)
            gap = np.linalg.norm(solution.x - reference)
            assert gap <= 1e-8 * scale, f"trial {trial}: |X - X_ref| = {gap:.3e}"
            assert solution.closed_loop_eigs.real.max() < 0.0


class TestAssemblePair:
    def test_passive_coefficients_at_reference_point(self, passive_plant):
        k1, k2, chi = 0.0011, 0.8264, 0.0414
        primal, dual = assemble_pair(passive_plant, GAMMA, EPSILON)
        assert primal.side is RiccatiSide.PRIMAL
        assert dual.side is RiccatiSide.DUAL
        eye = np.eye(2)
        # D1^T D1 = I, so the drift correction is +kappa2 I and the
        # regulated-output projection term vanishes.
        assert_allclose(primal.ahat, 0.5 * (k2 - k1) * eye, rtol=1e-12)
        assert_allclose(
            primal.bhat, (k2 - k1 / GAMMA**2 - chi**2) * eye, rtol=1e-12
        )
        assert_allclose(primal.chat, eye, rtol=1e-12)
        assert_allclose(dual.ahat, 0.5 * (k1 - k2) * eye, rtol=1e-12)
        assert_allclose(
            dual.bhat, (GAMMA**2 * k1 - 1.0 - k2) * eye, rtol=1e-12
        )
        assert_allclose(dual.chat, chi**2 * eye, rtol=1e-12)

    def test_active_coefficients_split_by_quadrature(self, active_plant):
        k1, k2, chi = 0.0011, 0.8264, 0.0414
        primal, dual = assemble_pair(active_plant, GAMMA, EPSILON)
        base = 0.5 * (k2 - k1)
        assert_allclose(primal.ahat, np.diag([base + chi, base - chi]), rtol=1e-12)
        # the quadratic and constant coefficients are insensitive to the
        # gain sign, but carry the active bound rho = 2 on a full phase
        # range
        rho = rho_bound(active_plant.params, Decomposition.ACTIVE)
        assert rho == pytest.approx(2.0)
        assert_allclose(
            primal.bhat, (k2 - k1 / GAMMA**2 - chi**2 * rho**2) * np.eye(2), rtol=1e-12
        )
        assert_allclose(dual.chat, chi**2 * rho**2 * np.eye(2), rtol=1e-12)

    def test_nominal_pair_has_no_uncertainty_terms(self, nominal_plant):
        k1, k2 = 0.0011, 0.8264
        primal, dual = assemble_pair(nominal_plant, GAMMA, EPSILON)
        assert_allclose(
            primal.bhat, (k2 - k1 / GAMMA**2) * np.eye(2), rtol=1e-12
        )
        assert_allclose(dual.chat, np.zeros((2, 2)), atol=0.0)

    def test_solutions_match_quadrature_closed_form(self, passive_plant):
        primal, dual = assemble_pair(passive_plant, GAMMA, EPSILON)
        x = solve_care(primal)
        y = solve_care(dual)
        expected_x = stabilizing_root(
            primal.ahat[0, 0], primal.bhat[0, 0], primal.chat[0, 0]
        )
        expected_y = stabilizing_root(dual.ahat[0, 0], dual.bhat[0, 0], dual.chat[0, 0])
        assert_allclose(x.x, expected_x * np.eye(2), rtol=1e-9, atol=1e-12)
        assert_allclose(y.x, expected_y * np.eye(2), rtol=1e-9, atol=1e-14)
        assert x.x[0, 0] == pytest.approx(3.00923434, abs=1e-6)
        assert y.x[0, 0] == pytest.approx(0.00208641, abs=1e-8)

    @pytest.mark.parametrize("gamma,epsilon", [(0.0, 1.0), (-0.1, 1.0), (0.05, 0.0), (0.05, -2.0)])
    def test_rejects_nonpositive_scalings(self, passive_plant, gamma, epsilon):
        with pytest.raises(ValueError):
            assemble_pair(passive_plant, gamma, epsilon)


class TestExistenceConditions:
    def test_passive_reference_point(self, cavity_params):
        report = existence_check(cavity_params, Decomposition.PASSIVE, GAMMA, EPSILON)
        k1, k2, chi = 0.0011, 0.8264, 0.0414
        selector = k2 - k1 / GAMMA**2
        assert report.branch == "primal"
        assert report.satisfied
        names = [name for name, _, _ in report.inequalities]
        assert names == ["definiteness", "spectral_gap"]
        slacks = dict((name, slack) for name, slack, _ in report.inequalities)
        assert slacks["definiteness"] == pytest.approx(selector - chi**2, rel=1e-12)
        bracket = (k1 - k2) ** 2 - 4.0 * chi**2
        assert slacks["spectral_gap"] == pytest.approx(
            EPSILON * GAMMA**2 * bracket + 4.0 * (GAMMA**2 * k2 - k1), rel=1e-12
        )
        assert slacks["definiteness"] == pytest.approx(0.38468604, abs=1e-12)
        assert slacks["spectral_gap"] == pytest.approx(0.0055496606, abs=1e-9)

    def test_active_reference_point_splits_gap_by_axis(self, cavity_params):
        report = existence_check(cavity_params, Decomposition.ACTIVE, GAMMA, EPSILON)
        assert report.branch == "primal"
        assert report.satisfied
        names = [name for name, _, _ in report.inequalities]
        assert names == [
            "definiteness",
            "spectral_gap_plus_axis",
            "spectral_gap_minus_axis",
        ]

    def test_scaling_beyond_interval_fails_definiteness(self, cavity_params):
        report = existence_check(cavity_params, Decomposition.PASSIVE, GAMMA, 226.0)
        assert report.branch == "primal"
        assert not report.satisfied
        name, slack, ok = report.inequalities[0]
        assert name == "definiteness"
        assert slack == pytest.approx(-0.00095496, abs=1e-8)
        assert not ok

    def test_tight_attenuation_switches_to_dual_branch(self, cavity_params):
        report = existence_check(cavity_params, Decomposition.PASSIVE, 0.02, EPSILON)
        assert report.branch == "dual"
        assert not report.satisfied
        name, slack, ok = report.inequalities[0]
        assert name == "epsilon_floor"
        assert slack == pytest.approx(0.0011 * 0.02**2 - 0.8264 - 1.0, rel=1e-12)
        assert not ok

    def test_nominal_reports_single_branch_entry(self, cavity_params):
        primal_side = existence_check(cavity_params, Decomposition.NOMINAL, GAMMA, EPSILON)
        assert primal_side.branch == "primal"
        assert [n for n, _, _ in primal_side.inequalities] == ["definiteness"]
        assert primal_side.satisfied
        dual_side = existence_check(cavity_params, Decomposition.NOMINAL, 0.02, EPSILON)
        assert dual_side.branch == "dual"
        assert [n for n, _, _ in dual_side.inequalities] == ["epsilon_floor"]
        assert not dual_side.satisfied

    def test_dual_branch_satisfiable_point_solves(self):
        # strong measurement coupling, weak control coupling: the branch
        # selector flips sign and the epsilon floor becomes reachable.
        params = OpoParams(kappa1=10.0, kappa2=0.001, chi=0.04)
        report = existence_check(params, Decomposition.PASSIVE, 0.1, 20.0)
        assert report.branch == "dual"
        assert report.satisfied
        floor = dict((n, s) for n, s, _ in report.inequalities)["epsilon_floor"]
        assert floor == pytest.approx(10.0 * 0.01 - 0.001 - 1.0 / 20.0, rel=1e-12)
        plant = build_plant(params, Decomposition.PASSIVE)
        _, dual = assemble_pair(plant, 0.1, 20.0)
        solution = solve_care(dual)
        assert solution.closed_loop_eigs.real.max() < 0.0
        # the primal equation is out of the theory's reach here: its
        # quadratic coefficient is indefinite and its discriminant negative
        primal, _ = assemble_pair(plant, 0.1, 20.0)
        with pytest.warns(RuntimeWarning, match="indefinite"):
            with pytest.raises(NoStabilizingSolution):
                solve_care(primal)

    def test_check_matches_inequalities_at_decomposition_bound(self, cavity_params):
        for decomposition in (Decomposition.PASSIVE, Decomposition.ACTIVE):
            direct = existence_inequalities(
                cavity_params,
                decomposition,
                GAMMA,
                EPSILON,
                rho_bound(cavity_params, decomposition),
            )
            assert existence_check(cavity_params, decomposition, GAMMA, EPSILON) == direct

    @pytest.mark.parametrize(
        "gamma,epsilon,rho", [(0.0, 1.0, 1.0), (0.05, 0.0, 1.0), (0.05, 1.0, -0.5)]
    )
    def test_rejects_bad_arguments(self, cavity_params, gamma, epsilon, rho):
        with pytest.raises(ValueError):
            existence_inequalities(
                cavity_params, Decomposition.PASSIVE, gamma, epsilon, rho
            )


class TestExistenceGovernsBranchEquation:
    """The closed-form conditions characterize the branch-designated
    equation: away from the boundary, satisfied reports must coincide
    with solvable canonical problems, and a violated definiteness slack
    on the primal branch must surface as the indefiniteness warning."""

    def test_property_over_random_operating_points(self):
        rng = np.random.Generator(np.random.Philox(20260814))
        solved = warned = 0
        for _ in range(300):
            k1, k2 = 10.0 ** rng.uniform(-4.0, 1.0, size=2)
            chi = rng.uniform(0.0, 0.6) * (k1 + k2)
            beta = rng.uniform(0.0, 0.9)
            decomposition = (
                Decomposition.PASSIVE if rng.uniform() < 0.5 else Decomposition.ACTIVE
            )
            params = OpoParams(kappa1=k1, kappa2=k2, chi=chi, beta_bound=beta)
            gamma = 10.0 ** rng.uniform(-2.0, 0.5)
            epsilon = 10.0 ** rng.uniform(-2.0, 3.0)
            rho = rho_bound(params, decomposition)
            report = existence_inequalities(params, decomposition, gamma, epsilon, rho)
            primal, dual = assemble_pair(build_plant(params, decomposition), gamma, epsilon)
            target = primal if report.branch == "primal" else dual
            slacks = [slack for _, slack, _ in report.inequalities]
            if report.satisfied and min(slacks) > 1e-6:
                with warnings.catch_warnings():
                    warnings.simplefilter("error")
                    solution = solve_care(target)
                assert solution.closed_loop_eigs.real.max() < 0.0
                solved += 1
            elif report.branch == "primal" and slacks[0] < -1e-6:
                # definiteness violated: the theory is void, the solver
                # must still flag the indefinite quadratic coefficient
                with pytest.warns(RuntimeWarning, match="indefinite"):
                    try:
                        solve_care(target)
                    except NoStabilizingSolution:
                        pass
                warned += 1
        assert solved >= 40, f"only {solved} satisfied draws exercised"
        assert warned >= 30, f"only {warned} indefinite draws exercised"

    def test_gap_slack_never_binds_before_definiteness(self):
        # on the primal branch the spectral-gap slack stays non-negative
        # throughout the closed-form epsilon interval, which is what
        # makes the single-endpoint inversion in epsilon_feasibility
        # exact; probe the interval edge across random operating points
        rng = np.random.Generator(np.random.Philox(77))
        checked = 0
        for _ in range(300):
            k1, k2 = 10.0 ** rng.uniform(-4.0, 1.0, size=2)
            chi = rng.uniform(0.05, 0.6) * (k1 + k2)
            params = OpoParams(kappa1=k1, kappa2=k2, chi=chi)
            gamma = 10.0 ** rng.uniform(-2.0, 0.5)
            rho = rng.uniform(0.1, 2.0)
            selector = k2 - k1 / gamma**2
            if selector <= 0:
                continue
            upper = selector / (chi**2 * rho**2)
            for fraction in (0.5, 0.99, 0.999999):
                report = existence_inequalities(
                    params, Decomposition.PASSIVE, gamma, fraction * upper, rho
                )
                assert report.satisfied
            checked += 1
        assert checked >= 50


class TestEpsilonFeasibility:
    def test_reference_interval(self, cavity_params):
        (record,) = epsilon_feasibility(
            cavity_params, Decomposition.PASSIVE, [GAMMA], [1.0]
        )
        k1, k2, chi = 0.0011, 0.8264, 0.0414
        assert record.feasible
        assert record.eps_lower == 0.0
        assert record.eps_upper == pytest.approx((k2 - k1 / GAMMA**2) / chi**2, rel=1e-12)
        assert record.eps_upper == pytest.approx(225.44283413848635, abs=1e-9)

    def test_doubling_rho_quarters_the_interval(self, cavity_params):
        low, high = epsilon_feasibility(
            cavity_params, Decomposition.PASSIVE, [GAMMA], [1.0, 2.0]
        )
        assert high.eps_upper == pytest.approx(low.eps_upper / 4.0, rel=1e-12)

    def test_zero_rho_is_unbounded(self, cavity_params):
        (record,) = epsilon_feasibility(
            cavity_params, Decomposition.PASSIVE, [GAMMA], [0.0]
        )
        assert record.feasible
        assert math.isinf(record.eps_upper)

    def test_dual_branch_half_line(self):
        params = OpoParams(kappa1=10.0, kappa2=0.001, chi=0.04)
        (record,) = epsilon_feasibility(params, Decomposition.PASSIVE, [0.1], [1.0])
        assert record.feasible
        assert record.eps_lower == pytest.approx(1.0 / (10.0 * 0.01 - 0.001), rel=1e-12)
        assert math.isinf(record.eps_upper)

    def test_dual_branch_infeasible(self, cavity_params):
        (record,) = epsilon_feasibility(
            cavity_params, Decomposition.PASSIVE, [0.02], [1.0]
        )
        assert not record.feasible
        assert (record.eps_lower, record.eps_upper) == (0.0, 0.0)

    def test_rejects_bad_grids(self, cavity_params):
        with pytest.raises(ValueError):
            epsilon_feasibility(cavity_params, Decomposition.PASSIVE, [0.0], [1.0])
        with pytest.raises(ValueError):
            epsilon_feasibility(cavity_params, Decomposition.PASSIVE, [0.05], [-1.0])

    def test_bisection_agrees_with_closed_form(self, cavity_params):
        upper = eps_upper_by_bisection(
            cavity_params, Decomposition.PASSIVE, GAMMA, 1.0
        )
        assert upper == pytest.approx(225.44283413848635, abs=1e-9)

    def test_bisection_degenerate_endpoints(self, cavity_params):
        assert eps_upper_by_bisection(cavity_params, Decomposition.PASSIVE, 0.02, 1.0) == 0.0
        assert math.isinf(
            eps_upper_by_bisection(cavity_params, Decomposition.PASSIVE, GAMMA, 0.0)
        )

    def test_closed_form_matches_direct_inequalities(self):
        rng = np.random.Generator(np.random.Philox(41))
        for _ in range(300):
            k1, k2 = 10.0 ** rng.uniform(-4.0, 1.0, size=2)
            chi = rng.uniform(0.05, 0.6) * (k1 + k2)
            params = OpoParams(kappa1=k1, kappa2=k2, chi=chi)
            gamma = 10.0 ** rng.uniform(-2.0, 0.5)
            rho = rng.uniform(0.0, 2.5)
            epsilon = 10.0 ** rng.uniform(-3.0, 3.0)
            (record,) = epsilon_feasibility(
                params, Decomposition.PASSIVE, [gamma], [rho]
            )
            direct = existence_inequalities(
                params, Decomposition.PASSIVE, gamma, epsilon, rho
            ).satisfied
            inside = record.feasible and record.eps_lower <= epsilon < record.eps_upper
            assert direct == inside, (
                f"closed form and direct check disagree at gamma={gamma}, "
                f"rho={rho}, epsilon={epsilon}"
            )
