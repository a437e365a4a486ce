import json
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest

from ncsos.ncpoly import cyc_equiv, parse_poly
from ncsos.reproduce import (CASES, DATA_FILES, LAMBDA_146, LAMBDA_BUMP, mirror_fill, reproduce_paper,
                             shipped_certificate)
from ncsos.smk import s_mk_squares


@pytest.fixture
def data_copy(tmp_path):
    src = resources.files("ncsos.data")
    for name in DATA_FILES.values():
        (tmp_path / name).write_text(src.joinpath(name).read_text(encoding="utf-8"), encoding="utf-8")
    return tmp_path


def edit(path, fn):
    d = json.loads(path.read_text(encoding="utf-8"))
    fn(d)
    path.write_text(json.dumps(d), encoding="utf-8")


@pytest.mark.parametrize("case", list(CASES))
def test_every_case_passes(case):
    res = reproduce_paper(case)
    assert res.passed, "\n".join(res.lines)
    assert res.to_json()["case"] == case


def test_copied_data_still_passes(data_copy):
    for case in CASES:
        assert reproduce_paper(case, data_copy).passed


def test_unknown_case():
    with pytest.raises(ValueError):
        reproduce_paper("s99")


def test_tampered_square_weight_fails(data_copy):
    edit(data_copy / DATA_FILES["s73"], lambda d: d["squares"][0].update(weight="6"))
    assert not reproduce_paper("s73", data_copy).passed


def test_tampered_84_entry_fails(data_copy):
    def bump(d):
        g = d["blocks"][0]["gram"]
        g[0][1] = g[1][0] = str(int(g[0][1]) + 1)
    edit(data_copy / DATA_FILES["s84"], bump)
    assert not reproduce_paper("s84", data_copy).passed


def test_tampered_146_entry_fails(data_copy):
    def bump(d):
        d["B_top"][3][2] = str(Fraction(d["B_top"][3][2]) + 1)
        d["B_top"][2][3] = d["B_top"][3][2]
    edit(data_copy / DATA_FILES["s146"], bump)
    res = reproduce_paper("s146", data_copy)
    assert not res.passed and any("mismatched" in line for line in res.lines)


def test_asymmetric_edit_is_reported_not_raised(data_copy):
    edit(data_copy / DATA_FILES["s146"], lambda d: d["B_top"][3].__setitem__(2, "100"))
    res = reproduce_paper("s146", data_copy)
    assert not res.passed and "symmetric" in res.lines[0]


def test_tampered_farkas_fails(data_copy):
    edit(data_copy / DATA_FILES["s63"], lambda d: d["farkas"].update({"X6 Y6": "-1"}))
    assert not reproduce_paper("s63", data_copy).passed


def test_tampered_144_vector_fails(data_copy):
    def swap(d):
        vec = d["blocks"][0]["vector"]
        vec[0], vec[1] = vec[1], vec[0]
    edit(data_copy / DATA_FILES["s144"], swap)
    assert not reproduce_paper("s144", data_copy).passed


def test_mirror_fill_small():
    # 5x5 with left panel of 3 columns: top rows 1..4, bottom row 5
    full = [[1, 2, 3, 4, 5], [2, 6, 7, 8, 4], [3, 7, 9, 7, 3], [4, 8, 7, 6, 2], [5, 4, 3, 2, 1]]
    top = [r[:3] for r in full[:4]]
    bottom = [r[:3] for r in full[4:]]
    assert mirror_fill(top, bottom, n=5, left=3) == full
    with pytest.raises(ValueError):
        mirror_fill(top, [], n=5, left=3)


def test_146_blocks_shape_and_symmetry():
    c = shipped_certificate("s146")
    sizes = [G.n for _, G in c.blocks]
    assert sizes == [15, 35]
    B = c.blocks[1][1]
    for i in range(35):
        for j in range(35):
            assert B[i, j] == B[j, i]
            if i >= 19 and j >= 19:
                assert B[i, j] == B[34 - j, 34 - i]


def test_lambda_value_and_float_route():
    assert float(LAMBDA_146) == pytest.approx(9.281e-7, rel=1e-3)
    B = np.array(shipped_certificate("s146").blocks[1][1].tolist(), dtype=float)
    J = np.ones_like(B)
    scale = np.abs(B).max()
    at = np.linalg.eigvalsh(B - float(LAMBDA_146) * J)[0]
    above = np.linalg.eigvalsh(B - float(LAMBDA_146 * LAMBDA_BUMP) * J)[0]
    assert at >= -1e-9 * scale
    assert above < at


def test_144_squares_numerically():
    # float route for the weighted squares: traces agree on random symmetric pairs
    from ncsos.smk import eval_poly, random_symmetric
    c = shipped_certificate("g-squares-144")
    assert len(c.squares) == 4 and all(w == 7 for w, _ in c.squares)
    for seed in range(3):
        A, B = random_symmetric(2, seed), random_symmetric(2, 40 + seed)
        lhs = np.trace(eval_poly(s_mk_squares(14, 4), A, B))
        rhs = sum(float(w) * np.trace(eval_poly(q.star() * q, A, B)) for w, q in c.squares)
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_h_factor():
    h = parse_poly("X4 + 2 X Y X + 2 X2 + Y2 + 2 Y + 1")
    q = parse_poly("X2 + Y + 1")
    assert cyc_equiv(h, q.star() * q) and h != q.star() * q
