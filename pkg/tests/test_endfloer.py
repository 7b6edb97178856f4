import random
from fractions import Fraction

import pytest

from floerforge.cfk import connected_sum_knots, reduced_basis_form, staircase_torus, unknot
from floerforge.endfloer import (
    CH_MINUS,
    CH_PLUS,
    CH_STAR,
    CassonHandle,
    ExhaustionSpec,
    INFINITE,
    InconsistentShifts,
    Level,
    RankEntry,
    SliceR4Spec,
    _positive_level_results,
    colimit,
    distinguish,
    grading_shift,
    he_end_sum,
    he_product_end,
    he_slice_r4,
    normalize_level,
    restrict_spec,
    s1xs2_data,
    s3_data,
)
from floerforge.whitehead import StepDescriptor, whitehead_double_cfk

F = Fraction


def k_n(n):
    return connected_sum_knots(staircase_torus(n, "+"), staircase_torus(n, "-"))


def r_spec(n, handle=CH_PLUS, **kw):
    return SliceR4Spec(k_n(n), handle, **kw)


# --- normalisation and shifts ---------------------------------------------------


def test_normalize_level_b1_zero_is_identity():
    table = {F(1): 2, F(-1, 2): 1}
    assert normalize_level(table, 0) == table


def test_normalize_level_examples():
    assert normalize_level({F(1, 2): 1}, 1) == {F(0): 1}
    n = 7
    assert normalize_level({F(n) - F(5, 2): 2}, 1) == {F(n) - 3: 2}


def test_grading_shift_values():
    assert grading_shift(1, 1) == 0
    assert grading_shift(0, 2) == 1
    assert grading_shift(3, 1) == -1


# --- colimits ---------------------------------------------------------------------


def make_levels(tables, b1=0):
    return tuple(Level(b1=b1, module=t, label=f"L{i}") for i, t in enumerate(tables))


def test_colimit_identity_steps_exact():
    table = {F(2): 1, F(0): 2}
    spec = ExhaustionSpec(
        levels=make_levels([table, table, table]),
        steps=(StepDescriptor(kind="iso"), StepDescriptor(kind="iso")),
    )
    report = colimit(spec)
    assert report.vanishes is False
    assert report.entry(F(2)) == RankEntry(1, "exact")
    assert report.entry(F(0)) == RankEntry(2, "exact")
    assert report.max_nontrivial_grading == F(2)


def test_colimit_all_zero_steps_vanishes():
    table = {F(0): 3}
    spec = ExhaustionSpec(
        levels=make_levels([table, table, table]),
        steps=(StepDescriptor(kind="zero"), StepDescriptor(kind="zero")),
    )
    report = colimit(spec)
    assert report.vanishes is True
    assert report.per_grading == ()
    assert report.max_nontrivial_grading is None


def test_colimit_positive_clasp_tower():
    tables = [{F(1): 2, F(0): 1}, {F(1): 4, F(0): 3}, {F(1): 8, F(-2): 1}]
    spec = ExhaustionSpec(
        levels=make_levels(tables),
        steps=(StepDescriptor(kind="positive_clasp"),) * 2,
    )
    report = colimit(spec)
    assert report.entry(F(1)).rank is INFINITE
    assert report.entry(F(1)).tag == "exact"
    assert report.entry(F(-2)) == RankEntry(0, "lower_bound")
    assert report.max_nontrivial_grading == F(1)


def test_colimit_shift_consistency_enforced():
    spec = ExhaustionSpec(
        levels=(
            Level(b1=1, module={F(1, 2): 1}),
            Level(b1=3, module={F(3, 2): 1}),
        ),
        steps=(StepDescriptor(kind="explicit", grading_shift=F(0), matrix={F(1, 2): [1]}),),
    )
    with pytest.raises(InconsistentShifts):
        colimit(spec)


def test_colimit_explicit_stabilized_image():
    # One class dies immediately; the other persists.
    table = {F(0): 2}
    keep_one = StepDescriptor(kind="explicit", grading_shift=F(0), matrix={F(0): [0b01, 0]})
    spec = ExhaustionSpec(
        levels=make_levels([table, table, table, table]),
        steps=(keep_one,) * 3,
    )
    report = colimit(spec)
    assert report.entry(F(0)) == RankEntry(1, "exact")


def test_colimit_non_stabilizing_reported_undetermined():
    # Nilpotent step: ranks keep dropping inside the window.
    table = {F(0): 2}
    shift_down = StepDescriptor(kind="explicit", grading_shift=F(0), matrix={F(0): [0, 0b01]})
    spec = ExhaustionSpec(
        levels=make_levels([table, table, table]),
        steps=(shift_down,) * 2,
    )
    report = colimit(spec)
    assert report.vanishes is None


def random_explicit_spec(rng, levels=6):
    gradings = [F(0), F(2), F(-1, 2)]
    dims = {g: rng.randint(1, 3) for g in gradings}
    table = dict(dims)

    def random_matrix():
        return {
            g: [rng.getrandbits(dims[g]) for _ in range(dims[g])] for g in gradings
        }

    def projection():
        return {
            g: [
                (1 << i) if rng.random() < 0.7 else 0
                for i in range(dims[g])
            ]
            for g in gradings
        }

    steps = [
        StepDescriptor(kind="explicit", grading_shift=F(0), matrix=random_matrix()),
        StepDescriptor(kind="explicit", grading_shift=F(0), matrix=random_matrix()),
    ]
    proj = projection()
    steps += [
        StepDescriptor(kind="explicit", grading_shift=F(0), matrix=proj)
        for _ in range(levels - 3)
    ]
    return ExhaustionSpec(levels=make_levels([table] * levels), steps=tuple(steps))


@pytest.mark.parametrize("seed", [11, 23, 87])
def test_colimit_subsequence_invariance(seed):
    rng = random.Random(seed)
    spec = random_explicit_spec(rng)
    full = colimit(spec)
    for indices in ([0, 2, 4, 5], [1, 3, 4, 5], [0, 3, 4, 5]):
        restricted = colimit(restrict_spec(spec, indices))
        assert restricted.table() == full.table()
        assert restricted.vanishes == full.vanishes


# --- slice pieces ------------------------------------------------------------------


@pytest.mark.parametrize("n,expected", [(3, F(0)), (5, F(2))])
def test_he_slice_positive_max_grading(n, expected):
    report = he_slice_r4(r_spec(n))
    assert report.vanishes is False
    assert report.max_nontrivial_grading == expected
    assert report.entry(expected).rank is INFINITE
    assert report.entry(expected).tag == "exact"


def test_he_slice_per_level_top_rank_doubles():
    results = _positive_level_results(k_n(3), 3)
    tops = []
    for r in results:
        table = r.hf_red()
        tops.append(table[max(table)])
    assert tops == [tops[0], 2 * tops[0], 4 * tops[0]]


def test_he_slice_lower_bounds_below_top():
    report = he_slice_r4(r_spec(3))
    for g, entry in report.per_grading:
        if g != report.max_nontrivial_grading:
            assert entry.tag == "lower_bound"


def test_he_slice_negative_chain_vanishes():
    report = he_slice_r4(r_spec(3, CH_MINUS))
    assert report.vanishes is True


def test_he_slice_orientation_reversal_vanishes():
    report = he_slice_r4(r_spec(3, orientation="-"))
    assert report.vanishes is True


def test_he_slice_trivial_knot_standard():
    report = he_slice_r4(SliceR4Spec(unknot(), CH_PLUS))
    assert report.vanishes is True


def test_he_slice_rejects_nonzero_tau():
    # The doubling pipeline needs tau = 0.
    with pytest.raises(ValueError):
        he_slice_r4(SliceR4Spec(staircase_torus(3, "+"), CH_PLUS))


def test_he_slice_double_replacement_invariance():
    base = he_slice_r4(r_spec(3))
    doubled_knot = whitehead_double_cfk(reduced_basis_form(k_n(3)))
    again = he_slice_r4(SliceR4Spec(doubled_knot, CH_PLUS))
    assert base.max_nontrivial_grading == again.max_nontrivial_grading
    assert base.vanishes == again.vanishes


def test_he_slice_mixed_prefix_then_positive():
    handle = CassonHandle("finite_mixed_then_one_sign", signs=("+",), tail="+")
    report = he_slice_r4(SliceR4Spec(k_n(3), handle))
    # The prefix double has the same maximal reduced grading behaviour.
    assert report.vanishes is False
    assert report.max_nontrivial_grading == F(0)


def test_he_slice_mixed_prefix_then_negative():
    handle = CassonHandle("finite_mixed_then_one_sign", signs=("-",), tail="-")
    report = he_slice_r4(SliceR4Spec(k_n(3), handle))
    assert report.vanishes is True


def test_he_slice_branching_kinds():
    doubled = whitehead_double_cfk(reduced_basis_form(k_n(3)))
    pos_chain = he_slice_r4(SliceR4Spec(doubled, CassonHandle("has_infinite_positive_chain")))
    assert pos_chain.vanishes is False
    assert pos_chain.per_grading == ()
    star = he_slice_r4(SliceR4Spec(doubled, CH_STAR))
    assert star.vanishes is False
    star_rev = he_slice_r4(SliceR4Spec(doubled, CH_STAR, orientation="-"))
    assert star_rev.vanishes is False
    # The branching verdict needs a doubled knot.
    not_double = he_slice_r4(SliceR4Spec(k_n(3), CH_STAR))
    assert not_double.vanishes is None


def test_he_slice_undetermined_kind():
    report = he_slice_r4(SliceR4Spec(k_n(3), CassonHandle("undetermined")))
    assert report.vanishes is None


def test_orientation_double_reversal_identity():
    spec = r_spec(3)
    once = he_slice_r4(spec.reversed())
    twice = he_slice_r4(spec.reversed().reversed())
    plain = he_slice_r4(spec)
    assert twice.to_json() == plain.to_json()
    assert once.vanishes is True


# --- end sums -----------------------------------------------------------------------


def test_end_sum_single_operand_identity():
    report = he_end_sum([r_spec(3)], levels=3)
    assert report.to_json() == he_slice_r4(r_spec(3), levels=3).to_json()


def test_end_sum_with_reversed_copy_vanishes():
    pair = [r_spec(3), r_spec(3, orientation="-")]
    assert he_end_sum(pair).vanishes is True
    assert he_end_sum([s.reversed() for s in pair]).vanishes is True


def test_end_sum_max_gradings_differ_by_gap():
    # Sums against a fixed piece: maxima differ by the gap of the others.
    ab = he_end_sum([r_spec(3), r_spec(5)])
    ac = he_end_sum([r_spec(3), r_spec(7)])
    assert ab.vanishes is False and ac.vanishes is False
    assert ac.max_nontrivial_grading - ab.max_nontrivial_grading == F(7 - 5)


# --- product ends ---------------------------------------------------------------------


@pytest.mark.parametrize("n", [5, 7])
def test_product_end_sphere_consistency(n):
    report = he_product_end(s3_data(), r_spec(n), n)
    slice_report = he_slice_r4(r_spec(n))
    assert report.vanishes is False
    assert report.max_nontrivial_grading == slice_report.max_nontrivial_grading
    assert any("f(S3) = -2" in line for line in report.narrative)


def test_product_end_distinct_values():
    r5 = he_product_end(s3_data(), r_spec(5), 5)
    r7 = he_product_end(s3_data(), r_spec(7), 7)
    assert r5.max_nontrivial_grading != r7.max_nontrivial_grading


def test_product_end_circle_times_sphere():
    report = he_product_end(s1xs2_data(), r_spec(5), 5)
    assert report.vanishes is False
    assert report.max_nontrivial_grading == F(2)
    assert any("f(S1xS2) = -3/2" in line for line in report.narrative)


def test_product_end_small_n_undetermined():
    # A manifold with reduced content far above the tower's gradings.
    from floerforge.fualgebra import FUDecomposition
    from floerforge.surgery import HFPlusResult
    from floerforge.endfloer import ClosedManifoldData

    loud = ClosedManifoldData(
        HFPlusResult(FUDecomposition.make([F(0)], [(F(40), 1)])), b1=0, name="loud"
    )
    report = he_product_end(loud, r_spec(3), 3)
    assert report.vanishes is None
    assert any("dominance" in line for line in report.narrative)


# --- distinguishing --------------------------------------------------------------------


def test_distinguish_r3_r5_distinct():
    verdict = distinguish(r_spec(3), r_spec(5))
    assert verdict.distinct
    assert "0" in verdict.witness and "2" in verdict.witness


def test_distinguish_same_knot_different_disk_indistinguishable():
    verdict = distinguish(r_spec(3), r_spec(3, disk_label="exotic-disk"))
    assert not verdict.distinct
    assert "indistinguishable" in verdict.witness


def test_distinguish_sum_with_reversed_against_plain():
    verdict = distinguish([r_spec(3), r_spec(3, orientation="-")], r_spec(3))
    assert verdict.distinct


def test_distinguish_branching_before_plain():
    doubled = whitehead_double_cfk(reduced_basis_form(k_n(3)))
    star = SliceR4Spec(doubled, CH_STAR)
    verdict = distinguish(star, r_spec(3))
    assert verdict.distinct


def test_distinguish_undetermined_is_inconclusive():
    undet = SliceR4Spec(k_n(3), CassonHandle("undetermined"))
    verdict = distinguish(undet, r_spec(5))
    assert not verdict.distinct
    assert "undetermined" in verdict.witness


def test_report_json_shape():
    report = he_slice_r4(r_spec(3))
    data = report.to_json()
    assert data["vanishes"] is False
    assert data["max_nontrivial_grading"] == "0"
    assert data["per_grading"]["0"] == {"rank": "inf", "tag": "exact"}


def test_end_sum_three_fold_consistency():
    # Level sums chain associatively: the threefold maximum extends the
    # pairwise gap pattern (sum of single-piece maxima plus the number of
    # extra factors).
    triple = he_end_sum([r_spec(3), r_spec(3), r_spec(3)])
    single = he_slice_r4(r_spec(3)).max_nontrivial_grading
    assert triple.vanishes is False
    assert triple.max_nontrivial_grading == 3 * single + 2
