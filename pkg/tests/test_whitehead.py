from fractions import Fraction

import pytest

from floerforge.cfk import (
    connected_sum_knots,
    figure8,
    filtration_homology,
    hfk_hat,
    knot_numerics,
    mirror_knot,
    reduced_basis_form,
    staircase_torus,
    validate_knot,
    ReducedBasisForm,
)
from floerforge.surgery import HFPlusResult, surgery_hf
from floerforge.fualgebra import FUDecomposition
from floerforge.whitehead import (
    FormalRankError,
    box_parameters,
    clasp_step,
    clasp_target_pattern,
    hedden_hfk_double,
    is_box_sum,
    negative_double_cfk,
    whitehead_double_cfk,
)

F = Fraction


def k_n(n):
    return connected_sum_knots(staircase_torus(n, "+"), staircase_torus(n, "-"))


def filtration_data(kc, g):
    return {i: filtration_homology(kc, i) for i in range(-g, g + 1)}


# --- the hat-level doubling formula -------------------------------------------


def test_hedden_trivial_knot():
    table = hedden_hfk_double({0: {F(0): 1}}, g=0)
    assert table == {(F(0), 0): 1}


def test_hedden_survivor_only_contribution_cancels():
    # Genus 1, only the surviving class: one F at level 0 and 1.
    filtration = {-1: {}, 0: {F(0): 1}, 1: {F(0): 1}}
    table = hedden_hfk_double(filtration, g=1)
    assert table == {(F(0), 0): 1}


def test_hedden_single_pair_contribution():
    # One extra pair (m, A, d) = (1, 1, 1) on top of the survivor adds
    # two classes at grading m, four at m - 1, two at m - 2.
    filtration = {-1: {}, 0: {F(0): 2}, 1: {F(0): 1}}
    table = hedden_hfk_double(filtration, g=1)
    assert table == {
        (F(1), 1): 2,
        (F(0), 0): 5,
        (F(-1), -1): 2,
    }


def test_hedden_negative_final_rank_rejected():
    with pytest.raises(FormalRankError):
        hedden_hfk_double({0: {F(0): 1}, 1: {}, -1: {}}, g=1)


# --- complex-level doubling -----------------------------------------------------


def test_double_single_pair_two_boxes():
    rb = ReducedBasisForm.make([(F(1), 1, 1)])
    doubled = whitehead_double_cfk(rb)
    assert box_parameters(doubled) == [F(0), F(0)]


def test_double_figure8_shape():
    rb = reduced_basis_form(figure8())
    doubled = whitehead_double_cfk(rb)
    assert box_parameters(doubled) == [F(0), F(0), F(-1), F(-1)]
    assert validate_knot(doubled).ok


def test_double_rejects_trivial_knot():
    with pytest.raises(ValueError):
        whitehead_double_cfk(ReducedBasisForm.make([]))
    with pytest.raises(ValueError):
        negative_double_cfk(ReducedBasisForm.make([]))


@pytest.mark.parametrize("kc", [figure8(), k_n(3), k_n(5)])
def test_double_genus_one_tau_zero(kc):
    doubled = whitehead_double_cfk(reduced_basis_form(kc))
    numerics = knot_numerics(doubled)
    assert numerics == {"tau": 0, "genus": 1}


@pytest.mark.parametrize("kc", [figure8(), k_n(3), k_n(5)])
def test_double_hat_total_dimension(kc):
    rb = reduced_basis_form(kc)
    doubled = whitehead_double_cfk(rb)
    total = sum(hfk_hat(doubled).total.values())
    assert total == 1 + 8 * sum(d for _m, _a, d in rb.pairs)


@pytest.mark.parametrize("kc", [figure8(), k_n(3), k_n(5)])
def test_double_matches_hat_formula(kc):
    rb = reduced_basis_form(kc)
    doubled = whitehead_double_cfk(rb)
    g = knot_numerics(kc)["genus"]
    assert hfk_hat(doubled).total == hedden_hfk_double(filtration_data(kc, g), g)


def test_double_max_box_parameter_is_max_reduced_grading_minus_one():
    for kc in (figure8(), k_n(3), k_n(5)):
        rb = reduced_basis_form(kc)
        params = box_parameters(whitehead_double_cfk(rb))
        assert max(params) == hfk_hat(kc).max_reduced_maslov() - 1


def test_iterated_double_box_pattern():
    # Boxes at k spawn boxes at k and k - 1, squared.
    rb = reduced_basis_form(k_n(3))
    first = whitehead_double_cfk(rb)
    second = whitehead_double_cfk(reduced_basis_form(first))
    params1 = box_parameters(first)
    expected = sorted(
        [k for k in params1 for _ in range(2)] + [k - 1 for k in params1 for _ in range(2)],
        reverse=True,
    )
    assert box_parameters(second) == expected


def test_negative_double_is_mirror_of_positive_on_mirror():
    rb = reduced_basis_form(k_n(3))
    neg = negative_double_cfk(rb)
    via_def = mirror_knot(whitehead_double_cfk(rb.mirror()))
    assert box_parameters(neg) == box_parameters(via_def)
    assert hfk_hat(neg).total == hfk_hat(via_def).total


def test_negative_double_of_amphichiral_shape_mirrors_positive():
    rb = reduced_basis_form(figure8())
    pos = whitehead_double_cfk(rb)
    neg = negative_double_cfk(rb)
    assert box_parameters(neg) == sorted((-k for k in box_parameters(pos)), reverse=True)


def test_is_box_sum_recognition():
    assert is_box_sum(whitehead_double_cfk(reduced_basis_form(figure8())))
    assert not is_box_sum(staircase_torus(3, "+"))
    assert not is_box_sum(k_n(3))


# --- clasp steps -----------------------------------------------------------------


def test_clasp_step_positive_tensors_reduced_part():
    level = surgery_hf(whitehead_double_cfk(reduced_basis_form(k_n(3))), 0)
    descriptor, target = clasp_step("+", level)
    assert descriptor.kind == "positive_clasp"
    assert descriptor.grading_shift == 0
    assert target.decomposition == clasp_target_pattern(level)


def test_clasp_step_positive_single_box():
    # Input reduced part F at 1/2: the target tensors it with two copies
    # each at shifts 0 and -1, so F^2 at 1/2 and F^2 at -1/2.
    level = HFPlusResult(FUDecomposition.make([F(1, 2), F(-1, 2)], [(F(1, 2), 1)]))
    _, target = clasp_step("+", level)
    assert target.decomposition == FUDecomposition.make(
        [F(1, 2), F(-1, 2)],
        [(F(1, 2), 1), (F(1, 2), 1), (F(-1, 2), 1), (F(-1, 2), 1)],
    )


def test_clasp_step_negative_is_zero_map_with_mirrored_target():
    level = HFPlusResult(FUDecomposition.make([F(1, 2), F(-1, 2)], [(F(1, 2), 1)]))
    descriptor, target = clasp_step("-", level)
    assert descriptor.kind == "zero"
    # Boxes at k = 1 mirror to boxes at k + 1 and k: reduced classes at
    # k + 1/2 and k - 1/2, doubled.
    assert target.decomposition == FUDecomposition.make(
        [F(1, 2), F(-1, 2)], [(F(3, 2), 1), (F(3, 2), 1), (F(1, 2), 1), (F(1, 2), 1)]
    )


def test_clasp_step_empty_reduced_part_is_vacuous():
    level = HFPlusResult(FUDecomposition.make([F(1, 2), F(-1, 2)], []))
    descriptor, target = clasp_step("+", level)
    assert descriptor.kind == "positive_clasp"
    assert target.decomposition == level.decomposition


def test_clasp_step_rejects_bad_shape():
    with pytest.raises(ValueError):
        clasp_step("+", HFPlusResult(FUDecomposition.make([F(0)], [])))


def test_iterated_positive_clasp_doubles_top_band():
    level = surgery_hf(whitehead_double_cfk(reduced_basis_form(k_n(3))), 0)
    top = max(level.hf_red())
    ranks = [level.hf_red()[top]]
    for _ in range(2):
        _, level = clasp_step("+", level)
        table = level.hf_red()
        assert max(table) == top
        ranks.append(table[top])
    assert ranks == [ranks[0], 2 * ranks[0], 4 * ranks[0]]
