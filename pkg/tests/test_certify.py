import copy
from fractions import Fraction

import numpy as np
import pytest

from ncsos.certificate import (Certificate, Nonmembership, certificate_from_json, certificate_to_json,
                               farkas_blocks, nonmembership_from_json, nonmembership_to_json,
                               verify_certificate, verify_nonmembership)
from ncsos.certify import CertifyOptions, Inconclusive, certify, check_poly, round_subspace
from ncsos.exact import RatMatrix, psd_check_exact
from ncsos.gram import THETA2, general_basis
from ncsos.ncpoly import cyc_equiv, parse_poly
from ncsos.reproduce import shipped_certificate
from ncsos.smk import s_mk_squares, trace_smk, random_psd


@pytest.mark.parametrize("m,k", [(7, 3), (8, 4), (10, 4), (10, 6)])
def test_certify_finds_fresh_certificates(m, k):
    c = certify(m, k)
    assert isinstance(c, Certificate)
    rep = verify_certificate(c)
    assert rep.passed and all(rep.psd) and rep.cyclic_ok
    assert cyc_equiv(c.gram_sum(), s_mk_squares(m, k))


def test_fresh_73_differs_from_printed():
    fresh, shipped = certify(7, 3), shipped_certificate("s73")
    assert verify_certificate(shipped).passed
    # the printed one carries explicit weighted squares; the solver output is pure Gram blocks
    assert shipped.squares and not fresh.squares
    assert certificate_to_json(fresh) != certificate_to_json(shipped)


@pytest.mark.parametrize("m,k", [(6, 3), (8, 3), (10, 5)])
def test_certify_nonmembership(m, k):
    nm = certify(m, k)
    assert isinstance(nm, Nonmembership)
    rep = verify_nonmembership(nm)
    assert rep.passed and rep.margin > 0
    S, by = farkas_blocks(nm)
    assert by < 0
    assert all(psd_check_exact(B) for B in S)


def test_general_basis_63_still_infeasible():
    f = s_mk_squares(6, 3)
    basis = general_basis(f, THETA2)
    assert sum(basis.sizes) == 20
    res = check_poly(f, THETA2, basis=basis)
    assert isinstance(res, Nonmembership) and verify_nonmembership(res).passed


def test_invalid_pairs():
    for m, k in [(6, 0), (6, 6), (3, 5)]:
        with pytest.raises(ValueError):
            certify(m, k)


def test_perturbed_84_fails_with_mismatch():
    c = shipped_certificate("s84")
    assert verify_certificate(c).passed
    bad = copy.deepcopy(c)
    vec, G = bad.blocks[0]
    rows = G.tolist()
    rows[1][1] = Fraction(5)
    bad.blocks[0] = (vec, RatMatrix(rows))
    rep = verify_certificate(bad)
    assert not rep.passed and not rep.cyclic_ok and rep.mismatch is not None
    cls, expected, got = rep.mismatch
    assert expected != got
    assert "first mismatched class" in rep.summary()


def test_non_psd_block_gives_witness():
    c = shipped_certificate("s84")
    bad = copy.deepcopy(c)
    vec, G = bad.blocks[0]
    rows = G.tolist()
    rows[0][0] = Fraction(-1)
    bad.blocks[0] = (vec, RatMatrix(rows))
    rep = verify_certificate(bad)
    assert not rep.passed and rep.psd[0] is False
    w = rep.witnesses[0]
    assert RatMatrix(rows).quad(w.x) < 0


def test_tampered_farkas_fails():
    nm = certify(6, 3)
    bad = copy.deepcopy(nm)
    label = next(iter(bad.y))
    bad.y[label] += 1000
    assert not verify_nonmembership(bad).passed


def test_certificate_json_round_trip():
    c = certify(8, 4)
    d = certificate_to_json(c)
    back = certificate_from_json(d)
    assert verify_certificate(back).passed
    assert certificate_to_json(back) == d
    nm = certify(6, 3)
    nd = nonmembership_to_json(nm)
    assert verify_nonmembership(nonmembership_from_json(nd)).passed


def test_check_poly_examples():
    h = parse_poly("X4 + 2 X Y X + 2 X2 + Y2 + 2 Y + 1")
    assert isinstance(check_poly(h, "sigma2"), Nonmembership)
    cert = check_poly(h, THETA2)
    assert isinstance(cert, Certificate) and verify_certificate(cert).passed
    trace_only = parse_poly("Y X4 Y + X Y4 X - 3 X Y2 X + 1")
    assert isinstance(check_poly(trace_only, THETA2), Nonmembership)


def test_certified_pairs_have_nonnegative_traces():
    # self-consistency: anything certify accepts must survive random sampling
    for m, k in [(7, 3), (8, 4)]:
        assert isinstance(certify(m, k), Certificate)
        for seed in range(30):
            A, B = random_psd(4, seed), random_psd(4, 500 + seed)
            assert trace_smk(A, B, m, k) >= -1e-8


def test_tiny_iteration_budget_is_inconclusive():
    res = certify(7, 3, CertifyOptions(max_iter=2))
    assert isinstance(res, Inconclusive) and not res


def test_options_validation():
    with pytest.raises(ValueError):
        CertifyOptions(feas_tol=0)
    with pytest.raises(ValueError):
        CertifyOptions(max_den=0)


def test_round_subspace_recovers_rational_kernel():
    # row space spanned by (1,-1,0,0) and (0,0,1,2), mixed and perturbed
    R = np.array([[1.0, -1.0, 0, 0], [0, 0, 1.0, 2.0]])
    R = np.array([[0.6, 0.8], [-0.8, 0.6]]) @ R + 1e-12
    rows = round_subspace(R, 100, 1e-6)
    assert rows is not None
    assert all(r[0] + r[1] == 0 and 2 * r[2] == r[3] for r in rows)
    span = np.array([[float(x) for x in r] for r in rows])
    assert np.linalg.matrix_rank(np.vstack([span, R]), tol=1e-8) == 2
