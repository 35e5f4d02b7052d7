from fractions import Fraction

import pytest

import knva


@pytest.fixture(scope="module")
def g0():
    atlas = knva.genus0(window=10)
    return atlas, knva.compute_tables(atlas)


@pytest.fixture(scope="module")
def g1():
    atlas = knva.genus1(window=4.5, precision=40)
    return atlas, knva.compute_tables(atlas)


def test_genus0_atlas_and_tables(g0):
    atlas, tables = g0
    assert atlas.genus == 0
    assert atlas.window == "10"
    assert knva.duality(atlas)["passed"]
    assert knva.bands(tables)["passed"]
    # sigma gamma_{n,-n} = n at genus 0
    for n in range(-4, 5):
        assert knva.to_number(tables.gamma(str(n), str(-n))) == Fraction(-n)
    assert tables.sigma == -1


def test_genus1_tables_are_antisymmetric(g1):
    atlas, tables = g1
    assert atlas.window == "9/2"
    assert knva.duality(atlas)["passed"]
    a = knva.to_number(tables.gamma("3/2", "-3/2"))
    b = knva.to_number(tables.gamma("-3/2", "3/2"))
    assert abs(a + b) < 1e-25
    assert abs(a) > 0.5


def test_state_field_and_coefficients(g0):
    _, tables = g0
    assert knva.state_field("a[-2]a[-1]|0>") == ":D1 a . D0 a:"
    ctx = knva.FieldContext(tables)
    assert knva.apply(ctx, ":D0 a:", -1, "|0>") == {"a[-1]|0>": "1/1"}
    # a_1 a_{-1} |0> = n * sigma * gamma ... = |0> up to the normalization
    out = knva.apply(ctx, "a", 1, "a[-1]|0>")
    assert list(out) == ["|0>"]
    assert knva.vacuum(ctx, ":D1 a . D0 a:")["passed"]
    assert knva.translation(ctx, ":D0 a . D0 a:", max_degree=2, range=2)["passed"]
    assert knva.locality(ctx, "a", ":D0 a . D0 a:", max_degree=2, range=2)["passed"]
    assert knva.wick(ctx, "a", ":D0 a:", max_degree=2, range=2)["passed"]


def test_affine(g0):
    atlas, tables = g0
    # [e_1, f_{-1}] = h_0 + K at genus 0
    assert knva.affine_bracket(tables, "sl2", "e", "1", "f", "-1") != ""
    assert knva.affine_jacobi(tables, "sl2", range=1)["passed"]
    assert knva.dP_delta(atlas, tables)["passed"]


def test_errors(g0):
    _, tables = g0
    with pytest.raises(knva.ParseError):
        knva.state_field("a[1")
    with pytest.raises(knva.KnvaError):
        tables.gamma("40", "-40")
    with pytest.raises(knva.KnvaError):
        knva.build_atlas({"genus": 0})


def test_cli_in_process():
    code, out, err = knva.cli("verify", "--genus", "0", "--window", "8", "--suite", "bands")
    assert code == 0, err
    assert "all checks passed" in out
    code, _, err = knva.cli("atlas", "--genus", "2")
    assert code == 2
    assert "--load" in err
