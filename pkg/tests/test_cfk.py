from fractions import Fraction

import pytest

from floerforge.cfk import (
    KnotComplex,
    box,
    builtin,
    connected_sum_knots,
    figure8,
    filtration_homology,
    hfk_hat,
    j_in_y,
    jprime_in_yprime,
    knot_numerics,
    mirror_knot,
    reduce_canonical,
    reduced_basis_form,
    staircase_torus,
    unknot,
    validate_knot,
)
from floerforge.fualgebra import homology_decomposition, FUDecomposition

F = Fraction


ALL_BUILDERS = [
    unknot(),
    figure8(),
    staircase_torus(3, "+"),
    staircase_torus(3, "-"),
    staircase_torus(5, "+"),
    staircase_torus(7, "+"),
    staircase_torus(9, "+"),
    j_in_y(),
    jprime_in_yprime(),
    box(F(0)),
    box(F(2), 1),
    box(F(-1, 2)),
]


@pytest.mark.parametrize("kc", ALL_BUILDERS, ids=lambda k: k.name)
def test_builders_validate(kc):
    report = validate_knot(kc)
    assert report.ok, report.violations


def test_box_gradings_match_table():
    b = box(F(0), 0)
    assert b.maslov("a") == 0 and b.alexander["a"] == 0
    assert b.maslov("b") == 1 and b.alexander["b"] == 1
    assert b.maslov("c") == -1 and b.alexander["c"] == -1
    assert b.maslov("d") == 0 and b.alexander["d"] == 0
    assert b.base.differential == {"a": {"b": 1, "c": 0}, "b": {"d": 0}, "c": {"d": 1}}


def test_box_flip_grading_identity():
    b = box(F(3), 0)
    assert b.maslov("c") == b.maslov("b") - 2
    assert b.flip["b"] == "c" and b.flip["a"] == "a"


def test_box_with_alexander_offset():
    b = box(F(2), 1)
    assert (b.maslov("b"), b.alexander["b"]) == (F(3), 2)
    assert (b.maslov("c"), b.alexander["c"]) == (F(1), 0)
    assert b.flip is None


def test_staircase_trefoil_free_rank_one_at_zero():
    h = homology_decomposition(staircase_torus(3, "+").base)
    assert h == FUDecomposition.make([F(0)], [])


SPHERE_KNOTS = [
    unknot(),
    figure8(),
    staircase_torus(3, "+"),
    staircase_torus(3, "-"),
    staircase_torus(5, "+"),
    staircase_torus(7, "+"),
    staircase_torus(9, "+"),
]


@pytest.mark.parametrize("kc", SPHERE_KNOTS, ids=lambda k: k.name)
def test_sphere_knots_have_free_rank_one(kc):
    h = homology_decomposition(kc.base)
    assert len(h.towers) == 1


def test_staircase_five_hat_dims():
    table = hfk_hat(staircase_torus(5, "+")).total
    assert table == {
        (F(0), 2): 1,
        (F(-1), 1): 1,
        (F(-2), 0): 1,
        (F(-3), -1): 1,
        (F(-4), -2): 1,
    }


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_staircase_euler_characteristic_is_alexander_polynomial(n):
    # Alexander polynomial of the (2, n) torus knot: alternating +-1 across
    # n consecutive Alexander gradings.
    table = hfk_hat(staircase_torus(n, "+")).total
    m = (n - 1) // 2
    coeffs = {}
    for (mas, s), d in table.items():
        coeffs[s] = coeffs.get(s, 0) + (-1) ** int(mas) * d
    assert coeffs == {m - i: (-1) ** i for i in range(n)}


def test_builtin_names():
    assert builtin("unknot").generators == ("x",)
    with pytest.raises(ValueError):
        builtin("granny")


def test_builtin_j_in_y_table():
    j = builtin("J_in_Y")
    assert [j.maslov(g) for g in "abcd"] == [F(1, 2), F(-1, 2), F(-3, 2), F(-1, 2)]
    assert [j.alexander[g] for g in "abcd"] == [1, 0, -1, 0]
    assert j.base.differential == {"a": {"b": 0}, "c": {"b": 1}}
    assert j.ambient.b1 == 1 and j.ambient.reduced_trivial


def test_builtin_figure8_shape():
    f8 = builtin("figure8")
    assert len(f8.generators) == 5
    assert f8.base.differential == {"a": {"b": 1, "c": 0}, "b": {"d": 0}, "c": {"d": 1}}


def test_figure8_hat_dims_thin():
    table = hfk_hat(figure8()).total
    assert table == {(F(1), 1): 1, (F(0), 0): 3, (F(-1), -1): 1}


def test_mirror_unknot_is_unknot():
    m = mirror_knot(unknot())
    assert m.base.maslov == {"x": F(0)} and m.alexander == {"x": 0}


def test_mirror_figure8_amphichiral():
    m = mirror_knot(figure8())
    assert validate_knot(m).ok
    assert hfk_hat(m).total == hfk_hat(figure8()).total
    assert homology_decomposition(m.base) == homology_decomposition(figure8().base)
    assert knot_numerics(m) == knot_numerics(figure8())


def test_mirror_staircase_is_negative_builder():
    assert mirror_knot(staircase_torus(3, "+")) == staircase_torus(3, "-")


def test_connected_sum_with_unknot_is_identity():
    k = figure8()
    s = connected_sum_knots(k, unknot())
    assert hfk_hat(s).total == hfk_hat(k).total
    assert homology_decomposition(s.base) == homology_decomposition(k.base)


def k_n(n):
    return connected_sum_knots(staircase_torus(n, "+"), staircase_torus(n, "-"))


def test_k3_nine_generators_and_hat_dims():
    k3 = k_n(3)
    assert len(k3.generators) == 9
    reduced = reduce_canonical(k3)
    assert len(reduced.generators) == 9
    dims_by_alexander = {}
    for (m, s), d in hfk_hat(k3).total.items():
        assert m == s  # thin: supported on the main diagonal
        dims_by_alexander[s] = dims_by_alexander.get(s, 0) + d
    assert dims_by_alexander == {2: 1, 1: 2, 0: 3, -1: 2, -2: 1}


def test_reduce_canonical_on_minimal_box_is_identity():
    b = box(F(0))
    assert reduce_canonical(b) == b


def test_reduce_canonical_cancels_trivial_pair():
    base_pair = KnotComplex(
        staircase_torus(3, "+").base, staircase_torus(3, "+").alexander,
        None, unknot().ambient,
    )
    # A same-Alexander differential pair disappears.
    from floerforge.fualgebra import FreeComplex

    c = FreeComplex([("y", F(0)), ("x", F(-1))], {"y": {"x": 0}})
    kc = KnotComplex(c, {"y": 0, "x": 0})
    assert reduce_canonical(kc).generators == ()
    del base_pair


def test_reduce_canonical_preserves_hat_invariants():
    for kc in (figure8(), k_n(3), k_n(5)):
        reduced = reduce_canonical(kc)
        assert hfk_hat(reduced).total == hfk_hat(kc).total
        for i in range(-3, 4):
            assert filtration_homology(reduced, i) == filtration_homology(kc, i)


def test_hfk_symmetry_on_sums():
    for kc in (k_n(3), connected_sum_knots(figure8(), figure8()), k_n(5)):
        table = hfk_hat(kc).total
        for (m, s), d in table.items():
            assert table.get((m - 2 * s, -s), 0) == d


def test_filtration_homology_unknot():
    u = unknot()
    assert filtration_homology(u, 0) == {F(0): 1}
    assert filtration_homology(u, 3) == {F(0): 1}
    assert filtration_homology(u, -1) == {}


def test_filtration_homology_figure8_levels():
    f8 = figure8()
    assert filtration_homology(f8, -2) == {}
    assert filtration_homology(f8, -1) == {F(-1): 1}
    assert filtration_homology(f8, 0) == {F(0): 2}
    assert filtration_homology(f8, 1) == {F(0): 1}


def test_knot_numerics_unknot():
    assert knot_numerics(unknot()) == {"tau": 0, "genus": 0}


def test_knot_numerics_figure8():
    assert knot_numerics(figure8()) == {"tau": 0, "genus": 1}


def test_knot_numerics_trefoil():
    assert knot_numerics(staircase_torus(3, "+")) == {"tau": 1, "genus": 1}
    assert knot_numerics(staircase_torus(3, "-")) == {"tau": -1, "genus": 1}


@pytest.mark.parametrize("n", [3, 5])
def test_connected_sum_tau_adds_and_genus_sums(n):
    kn = k_n(n)
    numerics = knot_numerics(kn)
    assert numerics["tau"] == 0
    assert numerics["genus"] == n - 1


def test_reduced_basis_form_unknot_empty():
    assert reduced_basis_form(unknot()).pairs == ()


def test_reduced_basis_form_figure8():
    rb = reduced_basis_form(figure8())
    assert set(rb.pairs) == {(F(1), 1, 1), (F(0), 0, 1)}


def test_reduced_basis_form_k3():
    rb = reduced_basis_form(k_n(3))
    assert set(rb.pairs) == {
        (F(2), 2, 1),
        (F(1), 1, 1),
        (F(0), 0, 1),
        (F(-1), -1, 1),
    }
    assert rb.max_maslov() == 2


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_k_n_max_reduced_hat_grading(n):
    # For the ribbon sums of opposite (2, n) torus knots the maximal
    # nontrivial reduced hat grading is n - 1.
    table = hfk_hat(k_n(n))
    assert table.max_reduced_maslov() == n - 1


def test_reduced_basis_form_rejects_nonzero_tau():
    with pytest.raises(ValueError):
        reduced_basis_form(staircase_torus(3, "+"))


def test_j_sum_box_graded_counts():
    # J # B[k] carries the graded generator content of
    # B[k-1/2]^2 + B[k+1/2, 1] + B[k-3/2, -1].
    k = F(2)
    s = connected_sum_knots(j_in_y(), box(k))
    counts = {}
    for g in s.generators:
        key = (s.maslov(g), s.alexander[g])
        counts[key] = counts.get(key, 0) + 1
    expected = {}
    for part in [box(k - F(1, 2)), box(k - F(1, 2)), box(k + F(1, 2), 1), box(k - F(3, 2), -1)]:
        for g in part.generators:
            key = (part.maslov(g), part.alexander[g])
            expected[key] = expected.get(key, 0) + 1
    assert counts == expected


def test_connected_sum_rejects_two_ambient_factors():
    with pytest.raises(ValueError):
        connected_sum_knots(j_in_y(), jprime_in_yprime())


def test_knot_json_round_trip():
    for kc in (figure8(), j_in_y(), box(F(2), 1)):
        data = kc.to_json()
        back = KnotComplex.from_json(data)
        assert back == kc
        assert back.to_json() == data
