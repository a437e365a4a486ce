import cvxpy as cp
import numpy as np
import pytest

from ncsos.gram import SIGMA2, THETA2, assemble, build_basis, general_basis, max_lambda_min_problem
from ncsos.gram import recover_max_lambda_min, with_objective
from ncsos.ncpoly import parse_poly
from ncsos.sdp import SdpProblem, Status, farkas_check, solve_sdp
from ncsos.smk import s_mk_squares


def sparse(M, blk=0):
    n = M.shape[0]
    return [(blk, i, j, float(M[i, j])) for i in range(n) for j in range(i, n) if M[i, j] != 0]


def random_problem(rng, n, m, feasible=True):
    As = []
    for _ in range(m):
        R = rng.standard_normal((n, n))
        As.append((R + R.T) / 2)
    if feasible:
        R = rng.standard_normal((n, n))
        X0 = R @ R.T + 0.1 * np.eye(n)
        b = [float(np.sum(A * X0)) for A in As]
    else:
        # make sum y_l A_l = S PSD with b.y = -1
        y = rng.standard_normal(m)
        R = rng.standard_normal((n, 2))
        S = R @ R.T
        As[-1] = (S - sum(y[l] * As[l] for l in range(m - 1))) / y[-1]
        b = list(rng.standard_normal(m))
        b[-1] = (-1 - sum(b[l] * y[l] for l in range(m - 1))) / y[-1]
    R = rng.standard_normal((n, n))
    C = R @ R.T + np.eye(n)
    return SdpProblem([n], [sparse(A) for A in As], b, objective=sparse(C)), As, b, C


def clarabel(As, b, C):
    n = C.shape[0]
    Xv = cp.Variable((n, n), symmetric=True)
    prob = cp.Problem(cp.Minimize(cp.trace(C @ Xv)), [Xv >> 0] + [cp.trace(A @ Xv) == bl for A, bl in zip(As, b)])
    prob.solve(solver=cp.CLARABEL)
    return prob.status, prob.value


@pytest.mark.parametrize("seed", range(12))
def test_random_feasible_against_clarabel(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(2, 6)), int(rng.integers(1, 6))
    p, As, b, C = random_problem(rng, n, m, feasible=True)
    sol = solve_sdp(p)
    status, value = clarabel(As, b, C)
    assert status == "optimal"
    assert sol.status is Status.FEASIBLE
    assert sol.primal_objective == pytest.approx(value, rel=1e-5, abs=1e-6)
    G = sol.blocks[0]
    assert np.linalg.eigvalsh(G)[0] >= -1e-8
    assert max(abs(np.sum(A * G) - bl) for A, bl in zip(As, b)) <= 1e-6 * max(1, max(map(abs, b)))


@pytest.mark.parametrize("seed", range(8))
def test_random_infeasible_against_clarabel(seed):
    rng = np.random.default_rng(100 + seed)
    n, m = int(rng.integers(2, 6)), int(rng.integers(2, 6))
    p, As, b, C = random_problem(rng, n, m, feasible=False)
    sol = solve_sdp(p)
    status, _ = clarabel(As, b, C)
    assert status in ("infeasible", "infeasible_inaccurate")
    assert sol.status is Status.INFEASIBLE
    y = np.asarray(sol.farkas_y)
    y = y / -float(np.dot(b, y))
    ok, min_eig, by = farkas_check(p, y, tol=1e-9)
    assert ok and by == pytest.approx(-1)


def test_inconsistent_linear_system():
    p = SdpProblem([2], [[(0, 0, 0, 1.0)], [(0, 0, 0, 2.0)]], [1.0, 3.0])
    sol = solve_sdp(p)
    assert sol.status is Status.INFEASIBLE


def test_negative_trace_infeasible():
    p = SdpProblem([3], [[(0, i, i, 1.0) for i in range(3)]], [-1.0])
    sol = solve_sdp(p)
    assert sol.status is Status.INFEASIBLE and sol.farkas_margin > 0


def test_s73_feasible():
    p = assemble(s_mk_squares(7, 3), build_basis(7, 3), THETA2)
    sol = solve_sdp(p)
    assert sol.status is Status.FEASIBLE
    assert np.isfinite(sol.primal_objective)
    assert min(sol.min_eigenvalues()) >= -1e-8


def test_s63_infeasible_with_margin():
    for basis in (build_basis(6, 3), general_basis(s_mk_squares(6, 3))):
        p = assemble(s_mk_squares(6, 3), basis, THETA2)
        sol = solve_sdp(p)
        assert sol.status is Status.INFEASIBLE
        assert sol.farkas_margin > 0
        assert sol.farkas_min_eig >= -1e-9 * max(1.0, float(np.abs(sol.farkas_y).max()))


def test_h_sigma2_infeasible():
    h = parse_poly("X4 + 2 X Y X + 2 X2 + Y2 + 2 Y + 1")
    sol = solve_sdp(assemble(h, general_basis(h, SIGMA2), SIGMA2))
    assert sol.status is Status.INFEASIBLE


def test_status_agrees_with_clarabel_on_gram_problems():
    def oracle(p):
        n = p.block_sizes
        Xs = [cp.Variable((k, k), symmetric=True) for k in n]
        cons = [X >> 0 for X in Xs]
        for row, bl in zip(p.constraints, p.rhs):
            expr = 0
            for blk, i, j, v in row:
                expr = expr + float(v) * (Xs[blk][i, j] if i == j else 2 * Xs[blk][i, j])
            cons.append(expr == float(bl))
        prob = cp.Problem(cp.Minimize(sum(cp.trace(X) for X in Xs)), cons)
        prob.solve(solver=cp.CLARABEL)
        return prob.status
    for m, k in [(6, 3), (7, 3), (8, 4), (8, 3)]:
        p = assemble(s_mk_squares(m, k), build_basis(m, k), THETA2)
        ours = solve_sdp(p).status
        theirs = oracle(p)
        assert (ours is Status.INFEASIBLE) == theirs.startswith("infeasible"), (m, k, ours, theirs)


def test_max_lambda_min_moves_inside():
    p = assemble(s_mk_squares(7, 3), build_basis(7, 3), THETA2)
    base = solve_sdp(p)
    tr = sum(np.trace(G) for G in base.blocks)
    aux = solve_sdp(max_lambda_min_problem(p, 2 * tr))
    G, t = recover_max_lambda_min(p, aux.blocks)
    assert t > 0.1
    assert min(np.linalg.eigvalsh(g)[0] for g in G) == pytest.approx(t, rel=1e-5)
    assert min(base.min_eigenvalues()) < t


def test_zero_objective_and_custom_objective():
    p = assemble(s_mk_squares(7, 3), build_basis(7, 3), THETA2)
    assert solve_sdp(with_objective(p, "zero")).status is Status.FEASIBLE
    C = [np.eye(3) * 2, np.eye(3)]
    sol = solve_sdp(with_objective(p, C))
    assert sol.status is Status.FEASIBLE


def test_iteration_cap_gives_inconclusive():
    p = assemble(s_mk_squares(7, 3), build_basis(7, 3), THETA2)
    assert solve_sdp(p, max_iter=2).status is Status.INCONCLUSIVE
