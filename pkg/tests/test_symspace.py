import math

import numpy as np
import pytest

from localrep import (
    ATTAINED,
    DIVERGED,
    Field,
    Representation,
    SPDPoint,
    check_symmetry_at_min,
    displacement,
    dist,
    grad_objective,
    minimize_displacement,
)
from localrep.errors import NotAttainedError, NotRealFieldError
from localrep.symspace import _action_matrices, _objective, _sym_exp, act

R = Field.real()
E = math.e


def rep(gens):
    return Representation.from_entries(R, gens)


def random_spd(rng, n):
    a = rng.normal(size=(n, n))
    m = a @ a.T + 0.5 * np.eye(n)
    return SPDPoint.normalized(m)


class TestDist:
    def test_zero_on_diagonal(self):
        x = SPDPoint.identity(3)
        assert dist(x, x) == 0.0

    def test_closed_form(self):
        y = SPDPoint(np.diag([E ** 2, E ** -2]))
        assert abs(dist(SPDPoint.identity(2), y) - 2 * math.sqrt(2)) < 1e-12

    def test_action_is_isometric(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            g = rng.normal(size=(2, 2))
            if abs(np.linalg.det(g)) < 0.2:
                continue
            g /= abs(np.linalg.det(g)) ** 0.5
            x, y = random_spd(rng, 2), random_spd(rng, 2)
            assert abs(dist(act(g, x), act(g, y)) - dist(x, y)) < 1e-9

    def test_triangle_inequality_thousand(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            x, y, z = (random_spd(rng, 2) for _ in range(3))
            assert dist(x, z) <= dist(x, y) + dist(y, z) + 1e-9

    def test_symmetry(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            x, y = random_spd(rng, 3), random_spd(rng, 3)
            assert abs(dist(x, y) - dist(y, x)) < 1e-10


class TestDisplacement:
    def test_identity_rep_is_zero(self):
        rho = rep({"a": [[1, 0], [0, 1]]})
        rng = np.random.default_rng(2)
        for _ in range(5):
            assert displacement(rho, random_spd(rng, 2)) < 1e-7

    def test_closed_form(self):
        rho = rep({"a": [[E, 0], [0, 1 / E]]})
        assert abs(displacement(rho, SPDPoint.identity(2)) - 2 * math.sqrt(2)) < 1e-12

    def test_convex_along_geodesics(self):
        rho = rep({"a": [[2, 1], [0, 0.5]], "b": [[0, 1], [1, 0]]})
        rng = np.random.default_rng(9)
        for _ in range(100):
            x, y = random_spd(rng, 2), random_spd(rng, 2)
            xw, xv = np.linalg.eigh(x.m)
            x_half = (xv * np.sqrt(xw)) @ xv.T
            x_inv_half = (xv / np.sqrt(xw)) @ xv.T
            inner = x_inv_half @ y.m @ x_inv_half
            w, v = np.linalg.eigh(inner)
            mid_inner = (v * np.sqrt(w)) @ v.T
            mid = SPDPoint.normalized(x_half @ mid_inner @ x_half)
            lhs = displacement(rho, mid)
            rhs = 0.5 * (displacement(rho, x) + displacement(rho, y))
            assert lhs <= rhs + 1e-9

    def test_rejects_exact_fields(self):
        with pytest.raises(NotRealFieldError):
            displacement(
                Representation.from_entries(Field.padic(5), {"a": [[1, 0], [0, 1]]}),
                SPDPoint.identity(2))


class TestGradient:
    def test_zero_for_identity_rep(self):
        rho = rep({"a": [[1, 0], [0, 1]]})
        h = np.eye(2) + 0.1
        H = np.array([[1.0, 0.3], [0.3, -1.0]])
        assert abs(grad_objective(rho, h, H)) < 1e-12

    def test_zero_direction(self):
        rho = rep({"a": [[2, 1], [0, 0.5]]})
        assert grad_objective(rho, np.eye(2), np.zeros((2, 2))) == 0.0

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            n = int(rng.integers(2, 4))
            gens = {}
            for sym in ("a", "b"):
                m = rng.normal(size=(n, n))
                while abs(np.linalg.det(m)) < 0.3:
                    m = rng.normal(size=(n, n))
                gens[sym] = m.tolist()
            rho = rep(gens)
            h = np.eye(n) + 0.1 * rng.normal(size=(n, n))
            H = rng.normal(size=(n, n))
            H = 0.5 * (H + H.T)
            H -= np.trace(H) / n * np.eye(n)
            analytic = grad_objective(rho, h, H)
            mats = list(_action_matrices(rho).values())
            eps = 1e-5
            numeric = (_objective(mats, h @ _sym_exp(eps * H))
                       - _objective(mats, h @ _sym_exp(-eps * H))) / (2 * eps)
            assert abs(analytic - numeric) <= 1e-5 * max(1.0, abs(numeric))


class TestMinimize:
    def test_diagonal_attained_closed_form(self):
        report = minimize_displacement(rep({"a": [[E, 0], [0, 1 / E]]}))
        assert report.attained == ATTAINED
        assert abs(report.lambda_est - 2 * math.sqrt(2)) < 1e-4
        # the identity lies on the minimising axis
        assert dist(report.minimizer, SPDPoint.identity(2)) < 1e-6

    def test_unipotent_diverges_to_zero(self):
        report = minimize_displacement(rep({"a": [[1, 1], [0, 1]]}))
        assert report.attained == DIVERGED
        assert report.lambda_est < 1e-3

    def test_irreducible_attained(self):
        th = 1.0
        c, s = math.cos(th), math.sin(th)
        report = minimize_displacement(
            rep({"a": [[c, -s], [s, c]], "b": [[E, 0], [0, 1 / E]]}))
        assert report.attained == ATTAINED

    def test_report_invariant_gradient(self, real_corpus):
        for entry in real_corpus:
            report = minimize_displacement(entry.rep)
            if report.attained == ATTAINED:
                assert report.grad_norm <= 1e-6, entry.name

    def test_lambda_is_class_function(self):
        rng = np.random.default_rng(31)
        base = {"a": [[2.0, 0.0], [0.0, 0.5]], "b": [[0.0, 1.0], [1.0, 0.0]]}
        lam0 = minimize_displacement(rep(base)).lambda_est
        count = 0
        while count < 20:
            g = rng.integers(-2, 3, size=(2, 2)).astype(float)
            if abs(np.linalg.det(g)) < 0.5:
                continue
            gi = np.linalg.inv(g)
            gens = {s: (g @ np.array(m) @ gi).tolist() for s, m in base.items()}
            lam = minimize_displacement(rep(gens)).lambda_est
            assert abs(lam - lam0) <= 1e-6
            count += 1

    def test_rejects_exact_fields(self):
        with pytest.raises(NotRealFieldError):
            minimize_displacement(
                Representation.from_entries(Field.padic(5), {"a": [[2, 0], [0, 3]]}))

    def test_semicontinuity_along_degeneration(self):
        # along an explicit conjugation path rho_i -> rho the minimum
        # displacement cannot jump up in the limit
        from localrep import BlockStructure, FundamentalSequence
        blocks = BlockStructure(2, (1, 1))
        seq = FundamentalSequence.default(blocks, R)
        rho_minus = rep({"a": [[2, 0], [1, 0.5]]})
        rho_plus = rep({"a": [[2, 1], [0, 0.5]]})
        lam_limit = minimize_displacement(rho_minus).lambda_est
        lev = blocks.diagonal_part(rho_minus.gens["a"])
        u = rho_minus.gens["a"] * lev.inv()
        npart = lev.inv() * rho_plus.gens["a"]
        for i in (20, 40):
            rho_i = Representation(R, {"a": u * lev * seq.conjugate_power(npart, i)})
            lam_i = minimize_displacement(rho_i).lambda_est
            assert lam_i <= lam_limit + 1e-3


class TestSymmetryAtMin:
    def test_diagonal_axis_constant(self):
        rho = rep({"a": [[4, 0], [0, 0.25]]})
        report = minimize_displacement(rho)
        assert report.attained == ATTAINED
        assert check_symmetry_at_min(rho, report)

    def test_vacuous_without_flags(self):
        th = 1.0
        c, s = math.cos(th), math.sin(th)
        rho = rep({"a": [[c, -s], [s, c]], "b": [[E, 0], [0, 1 / E]]})
        report = minimize_displacement(rho)
        assert check_symmetry_at_min(rho, report)

    def test_block_diagonal_probes(self):
        rho = rep({"a": [[2, 0, 0], [0, 0.5, 0], [0, 0, 1]]})
        report = minimize_displacement(rho)
        assert report.attained == ATTAINED
        assert check_symmetry_at_min(rho, report)

    def test_requires_attained(self):
        rho = rep({"a": [[1, 1], [0, 1]]})
        report = minimize_displacement(rho)
        with pytest.raises(NotAttainedError):
            check_symmetry_at_min(rho, report)
