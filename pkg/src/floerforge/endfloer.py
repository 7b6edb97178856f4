"""Directed systems of graded F2-vector spaces and end invariants.

An exhaustion is a list of levels (graded rank tables with their b1
bookkeeping) joined by step descriptors.  Levels are normalised by
shifting each table down by b1/2, after which every admissible step has
grading shift zero and the colimit carries an absolute grading.

Rank bookkeeping is conservative by construction: positively clasped
steps are known only to be injective on the top graded summand, so the
colimit reports an exact infinite rank in the top grading and tags
everything below as a lower bound.  Zero systems vanish.  Explicit
matrix systems are computed exactly, with stabilisation of composite
ranks required before a value is reported as exact.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

from .cfk import (
    KnotComplex,
    hfk_hat,
    mirror_knot,
    reduce_canonical,
    reduced_basis_form,
)
from .fualgebra import format_grading, grading
from .surgery import (
    FORCED_INJECTIVE_TOP,
    HFPlusResult,
    connected_sum_floer,
    exact_triangle_force,
    one_handle_stabilize,
    surgery_hf,
)
from .whitehead import (
    StepDescriptor,
    is_box_sum,
    negative_double_cfk,
    whitehead_double_cfk,
)

F = Fraction


class InfiniteRank:
    """Distinguished infinite rank: bigger than every natural, saturating."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "inf"

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INFINITE = InfiniteRank()

EXACT = "exact"
LOWER_BOUND = "lower_bound"


@dataclass(frozen=True)
class RankEntry:
    rank: object  # int or INFINITE
    tag: str = EXACT

    def to_json(self):
        return {"rank": "inf" if self.rank is INFINITE else int(self.rank), "tag": self.tag}


@dataclass(frozen=True)
class EndFloerReport:
    """Per-grading ranks with provenance, maximal grading, vanishing flag.

    ``vanishes`` is True/False when decided, None when the method gives
    no verdict.  A vanishing report carries no table and no maximum.
    """

    per_grading: tuple = ()
    max_nontrivial_grading: Optional[Fraction] = None
    vanishes: Optional[bool] = None
    narrative: tuple = ()

    def __post_init__(self):
        if self.vanishes is True and (self.per_grading or self.max_nontrivial_grading is not None):
            raise ValueError("a vanishing report must be empty")

    def table(self) -> dict:
        return dict(self.per_grading)

    def entry(self, g) -> Optional[RankEntry]:
        return self.table().get(grading(g))

    def signature(self):
        """Comparable exact content; None when the verdict is undecided."""
        if self.vanishes is None:
            return None
        exact_part = frozenset(
            (g, e.rank is INFINITE, e.rank if e.rank is not INFINITE else -1)
            for g, e in self.per_grading
            if e.tag == EXACT
        )
        return (self.vanishes, self.max_nontrivial_grading, exact_part)

    def to_json(self) -> dict:
        return {
            "per_grading": {
                format_grading(g): e.to_json() for g, e in self.per_grading
            },
            "max_nontrivial_grading": (
                None
                if self.max_nontrivial_grading is None
                else format_grading(self.max_nontrivial_grading)
            ),
            "vanishes": self.vanishes,
            "narrative": list(self.narrative),
        }


def _report(per_grading: dict, vanishes, narrative) -> EndFloerReport:
    items = tuple(sorted(per_grading.items(), key=lambda kv: -kv[0]))
    max_g = None
    if vanishes is False:
        nonzero = [g for g, e in items if e.rank is INFINITE or e.rank > 0]
        max_g = max(nonzero) if nonzero else None
    return EndFloerReport(
        per_grading=items,
        max_nontrivial_grading=max_g,
        vanishes=vanishes,
        narrative=tuple(narrative),
    )


# ---------------------------------------------------------------------------
# exhaustion specifications


@dataclass(frozen=True)
class Level:
    b1: int
    module: dict  # grading -> rank, un-normalised
    label: str = ""
    b2_zero: bool = True
    b3_zero: bool = True


@dataclass(frozen=True)
class ExhaustionSpec:
    levels: tuple
    steps: tuple

    def __post_init__(self):
        if len(self.steps) != len(self.levels) - 1:
            raise ValueError("need exactly one step between consecutive levels")


def normalize_level(module: dict, b1: int) -> dict:
    """Shift a graded table down by b1/2."""
    return {grading(g) - F(b1, 2): r for g, r in module.items() if r}


def grading_shift(b1_i: int, b1_j: int) -> Fraction:
    """Cobordism grading shift between admissible levels: (b1_j - b1_i)/2."""
    return F(b1_j - b1_i, 2)


class InconsistentShifts(ValueError):
    pass


def _check_shifts(spec: ExhaustionSpec):
    for i, step in enumerate(spec.steps):
        a, b = spec.levels[i], spec.levels[i + 1]
        if a.b2_zero and a.b3_zero and b.b2_zero and b.b3_zero:
            expected = grading_shift(a.b1, b.b1)
            if step.grading_shift != expected:
                raise InconsistentShifts(
                    f"step {i} has shift {step.grading_shift}, expected {expected}"
                )


# ---------------------------------------------------------------------------
# exact F2 block matrices for explicit systems


def _gf2_rank(columns):
    pivots = []
    r = 0
    for col in columns:
        for pv in pivots:
            if col & (pv & -pv):
                col ^= pv
        if col:
            pivots.append(col)
            r += 1
    return r


def _identity_blocks(table):
    return {g: [1 << i for i in range(r)] for g, r in table.items() if r}


def _zero_blocks(table):
    return {g: [0] * r for g, r in table.items() if r}


def _compose_blocks(first, then):
    """Apply ``first`` then ``then`` (both grading -> column bitmasks)."""
    out = {}
    for g, cols in first.items():
        mid = then.get(g, [])
        new_cols = []
        for col in cols:
            acc = 0
            i = 0
            c = col
            while c:
                if c & 1:
                    acc ^= mid[i] if i < len(mid) else 0
                c >>= 1
                i += 1
            new_cols.append(acc)
        out[g] = new_cols
    return out


def _materialize_step(step: StepDescriptor, src_b1: int, src_table, dst_table):
    """Blocks keyed by normalised grading.  Explicit matrices are stored
    against raw source gradings and are converted here."""
    if step.kind == "iso":
        if src_table != dst_table:
            raise ValueError("iso step between different graded tables")
        return _identity_blocks(src_table)
    if step.kind in {"zero", "negative_clasp"}:
        return _zero_blocks(src_table)
    if step.kind == "explicit":
        blocks = {
            grading(g) - F(src_b1, 2): list(cols) for g, cols in step.matrix.items()
        }
        for g, r in src_table.items():
            cols = blocks.get(g, [])
            if len(cols) != r:
                raise ValueError(f"explicit block at {format_grading(g)} has wrong width")
            height = dst_table.get(g, 0)
            if any(c >> height for c in cols):
                raise ValueError(f"explicit block at {format_grading(g)} has wrong height")
        for g in blocks:
            if blocks[g] and g not in src_table:
                raise ValueError(f"explicit block at unused grading {format_grading(g)}")
        return blocks
    raise ValueError(f"step kind {step.kind!r} has no matrix form")


def colimit(spec: ExhaustionSpec) -> EndFloerReport:
    """Colimit of the normalised directed system.

    - all steps iso: the common table, exact;
    - all steps zero: vanishes;
    - positively clasped towers: exact infinite rank in the (common) top
      grading, lower bounds below;
    - explicit-matrix systems: stabilised image ranks of composites, exact,
      requiring rank agreement over the tail of the last three levels;
      otherwise the system is reported as undetermined, never guessed.
    """
    _check_shifts(spec)
    tables = [normalize_level(level.module, level.b1) for level in spec.levels]
    kinds = {s.kind for s in spec.steps}
    narrative = [f"{len(spec.levels)} levels: " + ", ".join(l.label or "?" for l in spec.levels)]

    if not spec.steps:
        raise ValueError("a directed system needs at least two levels")

    if kinds <= {"zero", "negative_clasp"}:
        narrative.append("all step maps vanish, so the direct limit is zero")
        return _report({}, True, narrative)

    if kinds == {"iso"}:
        for t in tables[1:]:
            if t != tables[0]:
                raise ValueError("iso system with non-matching level tables")
        narrative.append("all steps are isomorphisms")
        return _report({g: RankEntry(r, EXACT) for g, r in tables[0].items()}, not tables[0], narrative)

    if kinds == {"positive_clasp"}:
        tops = [max(t) if t else None for t in tables]
        if any(t is None for t in tops) or len(set(tops)) != 1:
            raise ValueError("positively clasped system needs a common top grading")
        top = tops[0]
        top_ranks = [t[top] for t in tables]
        if any(b < a for a, b in zip(top_ranks, top_ranks[1:])):
            raise ValueError("top ranks must be nondecreasing under injective steps")
        if top_ranks[-1] > top_ranks[0]:
            top_entry = RankEntry(INFINITE, EXACT)
            narrative.append(
                "top-summand injectivity compounds: ranks "
                + ", ".join(str(r) for r in top_ranks)
                + " at grading "
                + format_grading(top)
            )
        else:
            top_entry = RankEntry(top_ranks[-1], EXACT)
            narrative.append("top ranks stable under injective steps")
        per = {top: top_entry}
        for g in tables[-1]:
            if g < top:
                per[g] = RankEntry(0, LOWER_BOUND)
        narrative.append("ranks below the top band are lower bounds only")
        return _report(per, False, narrative)

    if kinds <= {"explicit", "iso", "zero", "negative_clasp"}:
        if len(tables) < 3:
            narrative.append("too few levels to certify stabilisation")
            return _report({}, None, narrative)
        blocks = [
            _materialize_step(step, spec.levels[i].b1, tables[i], tables[i + 1])
            for i, step in enumerate(spec.steps)
        ]

        def composite(i, j):
            acc = _identity_blocks(tables[i])
            for k in range(i, j):
                acc = _compose_blocks(acc, blocks[k])
            return acc

        a, b, c = len(tables) - 3, len(tables) - 2, len(tables) - 1
        gradings = set().union(*tables)
        per = {}
        for g in sorted(gradings):
            r_ab = _gf2_rank(composite(a, b).get(g, []))
            r_ac = _gf2_rank(composite(a, c).get(g, []))
            r_bc = _gf2_rank(composite(b, c).get(g, []))
            if not (r_ab == r_ac == r_bc):
                narrative.append(
                    f"composite ranks at grading {format_grading(g)} do not stabilise"
                )
                return _report({}, None, narrative)
            if r_ac:
                per[g] = RankEntry(r_ac, EXACT)
        narrative.append("composite ranks stabilised over the final three levels")
        return _report(per, not per, narrative)

    narrative.append("mixed step kinds; no colimit rule applies")
    return _report({}, None, narrative)


def restrict_spec(spec: ExhaustionSpec, indices: Sequence[int]) -> ExhaustionSpec:
    """Subsequence of levels with composed explicit steps."""
    idx = list(indices)
    if sorted(idx) != idx or len(idx) < 2:
        raise ValueError("indices must be increasing and at least two")
    tables = [normalize_level(level.module, level.b1) for level in spec.levels]
    blocks = [
        _materialize_step(step, spec.levels[i].b1, tables[i], tables[i + 1])
        for i, step in enumerate(spec.steps)
    ]
    new_steps = []
    for a, b in zip(idx, idx[1:]):
        acc = _identity_blocks(tables[a])
        for k in range(a, b):
            acc = _compose_blocks(acc, blocks[k])
        shift = grading_shift(spec.levels[a].b1, spec.levels[b].b1)
        # The matrix is stored against un-normalised source gradings.
        matrix = {g + F(spec.levels[a].b1, 2): cols for g, cols in acc.items()}
        new_steps.append(StepDescriptor(kind="explicit", grading_shift=shift, matrix=matrix))
    return ExhaustionSpec(
        levels=tuple(spec.levels[i] for i in idx),
        steps=tuple(new_steps),
    )


# ---------------------------------------------------------------------------
# slice-disk-plus-handle ends


@dataclass(frozen=True)
class CassonHandle:
    """Closed taxonomy of handle descriptors as signed chain summaries."""

    kind: str
    signs: tuple = ()  # finite mixed prefix, entries "+"/"-"
    tail: str = ""     # tail sign for the finite_mixed kind

    KINDS = (
        "all_positive_chain",
        "all_negative_chain",
        "finite_mixed_then_one_sign",
        "has_infinite_positive_chain",
        "has_infinite_pos_and_neg_chain",
        "undetermined",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown handle kind {self.kind!r}")
        if self.kind == "finite_mixed_then_one_sign":
            if self.tail not in {"+", "-"} or any(s not in {"+", "-"} for s in self.signs):
                raise ValueError("finite mixed handles need a sign prefix and a tail sign")

    def mirror(self) -> "CassonHandle":
        flip = {"+": "-", "-": "+"}
        if self.kind == "all_positive_chain":
            return CassonHandle("all_negative_chain")
        if self.kind == "all_negative_chain":
            return CassonHandle("all_positive_chain")
        if self.kind == "finite_mixed_then_one_sign":
            return CassonHandle(
                self.kind,
                tuple(flip[s] for s in self.signs),
                flip[self.tail],
            )
        if self.kind == "has_infinite_pos_and_neg_chain":
            return self
        # Mirroring an infinite positive chain gives an infinite negative
        # chain, which is outside the taxonomy: no verdict either way.
        return CassonHandle("undetermined")

    def to_json(self):
        data = {"kind": self.kind}
        if self.kind == "finite_mixed_then_one_sign":
            data["signs"] = list(self.signs)
            data["tail"] = self.tail
        return data

    @classmethod
    def from_json(cls, data):
        return cls(data["kind"], tuple(data.get("signs", ())), data.get("tail", ""))


CH_PLUS = CassonHandle("all_positive_chain")
CH_MINUS = CassonHandle("all_negative_chain")
CH_STAR = CassonHandle("has_infinite_pos_and_neg_chain")


@dataclass(frozen=True)
class SliceR4Spec:
    """A slice-disk complement capped by a handle descriptor."""

    knot: KnotComplex
    handle: CassonHandle
    orientation: str = "+"
    disk_label: str = "standard"

    def __post_init__(self):
        if self.orientation not in {"+", "-"}:
            raise ValueError("orientation must be '+' or '-'")

    def reversed(self) -> "SliceR4Spec":
        return replace(self, orientation="-" if self.orientation == "+" else "+")


def _is_trivial_knot(kc: KnotComplex) -> bool:
    return len(reduce_canonical(kc).generators) == 1


def _oriented_data(spec: SliceR4Spec):
    """Knot and handle seen with the requested orientation."""
    if spec.orientation == "+":
        return spec.knot, spec.handle
    return mirror_knot(spec.knot), spec.handle.mirror()


def _double_tower(kc: KnotComplex, count: int, sign: str = "+"):
    """Iterated doubles Wh(K), Wh^2(K), ... as complexes."""
    tower = []
    current = kc
    for i in range(count):
        rb = reduced_basis_form(current)
        build = whitehead_double_cfk if sign == "+" else negative_double_cfk
        current = build(rb, name=f"Wh^{i + 1}")
        tower.append(current)
    return tower


def _positive_level_results(kc: KnotComplex, levels: int):
    """0-framed outputs along the positive doubling tower, starting at the
    first double."""
    return [surgery_hf(d, 0) for d in _double_tower(kc, levels, "+")]


def _max_reduced_hat(kc: KnotComplex) -> Fraction:
    top = hfk_hat(kc).max_reduced_maslov()
    if top is None:
        raise ValueError("knot has no reduced hat content")
    return top


def he_slice_r4(spec: SliceR4Spec, levels: int = 3) -> EndFloerReport:
    """End invariant of a slice-disk complement capped by the handle.

    The level system starts at the first double; each level is the reduced
    0-framed output of the next iterated double normalised by b1 = 1.
    Positively clasped chains compound top-summand injectivity; negative
    chains give zero maps; mixed finite prefixes are absorbed into the
    knot by doubling before delegating to the all-one-sign cases.
    """
    if levels < 2:
        raise ValueError("need at least two levels")
    knot, handle = _oriented_data(spec)

    if _is_trivial_knot(knot):
        return _report({}, True, ["trivial knot: the end is standard and the invariant vanishes"])

    if handle.kind == "undetermined":
        return _report({}, None, ["handle descriptor outside the computable taxonomy"])

    if handle.kind in {"has_infinite_positive_chain", "has_infinite_pos_and_neg_chain"}:
        if not is_box_sum(knot):
            return _report(
                {},
                None,
                [
                    "infinite-chain verdicts need a doubled knot "
                    "(one split generator plus boxes)"
                ],
            )
        note = [
            "nonvanishing: top-summand classes persist through the plugged"
            " positive chain; no full table is computed",
        ]
        if handle.kind == "has_infinite_pos_and_neg_chain":
            note.append("both orientations are nonvanishing")
        return _report({}, False, note)

    if handle.kind == "finite_mixed_then_one_sign":
        current = knot
        for i, s in enumerate(handle.signs):
            rb = reduced_basis_form(current)
            build = whitehead_double_cfk if s == "+" else negative_double_cfk
            current = build(rb, name=f"prefix{i + 1}")
        tail_handle = CH_PLUS if handle.tail == "+" else CH_MINUS
        inner = replace(spec, knot=current, handle=tail_handle, orientation="+")
        report = he_slice_r4(inner, levels=levels)
        return replace(
            report,
            narrative=("finite mixed prefix absorbed into the knot by doubling",)
            + report.narrative,
        )

    if handle.kind == "all_negative_chain":
        exhaustion = ExhaustionSpec(
            levels=tuple(
                Level(b1=1, module={F(0): 0}, label=f"level {i + 1}")
                for i in range(levels)
            ),
            steps=tuple(StepDescriptor(kind="zero") for _ in range(levels - 1)),
        )
        report = colimit(exhaustion)
        return replace(
            report,
            narrative=("negatively clasped doubling cobordisms are zero maps",)
            + report.narrative,
        )

    # all_positive_chain
    top_expected = _max_reduced_hat(knot) - 1 - F(1, 2)
    results = _positive_level_results(knot, levels)
    level_rows = []
    for i, r in enumerate(results):
        table = r.hf_red()
        if not table or max(table) != top_expected:
            raise ValueError(
                "doubling tower produced an unexpected top grading; "
                f"level {i + 1} reduced table {table}"
            )
        level_rows.append(Level(b1=1, module=table, label=f"S0(Wh^{i + 1})"))
    exhaustion = ExhaustionSpec(
        levels=tuple(level_rows),
        steps=tuple(
            StepDescriptor(kind="positive_clasp", grading_shift=grading_shift(1, 1))
            for _ in range(levels - 1)
        ),
    )
    report = colimit(exhaustion)
    return replace(
        report,
        narrative=(
            "positive doubling tower; levels are reduced 0-framed outputs",
        )
        + report.narrative,
    )


EndSummand = Union[SliceR4Spec, Sequence[SliceR4Spec]]


def _as_spec_list(operand: EndSummand):
    if isinstance(operand, SliceR4Spec):
        return [operand]
    return list(operand)


def _reverse_operand(operand: EndSummand):
    specs = _as_spec_list(operand)
    reversed_specs = [s.reversed() for s in specs]
    return reversed_specs[0] if isinstance(operand, SliceR4Spec) else reversed_specs


def he_end_sum(specs: Sequence[SliceR4Spec], levels: int = 2) -> EndFloerReport:
    """End invariant of an end-sum of slice pieces, by level-wise sums.

    A vanishing factor kills every level map; otherwise the level modules
    are summed with the ring Kunneth rule and the top band inherits
    injectivity, with everything below a lower bound.
    """
    specs = _as_spec_list(specs)
    if not specs:
        raise ValueError("empty end-sum")
    reports = [he_slice_r4(s, levels=max(levels, 2)) for s in specs]
    if len(specs) == 1:
        return reports[0]
    if any(r.vanishes is None for r in reports):
        return _report({}, None, ["an operand is undetermined"])
    if any(r.vanishes for r in reports):
        return _report(
            {},
            True,
            ["a vanishing factor makes every summed level map zero"],
        )
    # Every operand is a positively clasped tower; sum the levels.
    oriented = [_oriented_data(s) for s in specs]
    towers = [
        _positive_level_results(knot, levels) for knot, _handle in oriented
    ]
    b1_total = len(specs)
    tops = []
    support = set()
    for i in range(levels):
        summed = towers[0][i]
        for t in towers[1:]:
            summed = connected_sum_floer(summed, t[i])
        table = normalize_level(summed.hf_red(), b1_total)
        if not table:
            raise ValueError("summed level has empty reduced part")
        tops.append(max(table))
        support.update(table)
    if len(set(tops)) != 1:
        raise ValueError(f"summed level tops did not stabilise: {tops}")
    top = tops[0]
    per = {top: RankEntry(INFINITE, EXACT)}
    for g in support:
        if g < top:
            per[g] = RankEntry(0, LOWER_BOUND)
    return _report(
        per,
        False,
        [
            f"{len(specs)}-fold end-sum; level reduced parts summed by the ring rule",
            "top band compounds injectivity; below-top entries are lower bounds",
        ],
    )


# ---------------------------------------------------------------------------
# product ends


@dataclass(frozen=True)
class ClosedManifoldData:
    """Torsion-summed plus-flavoured data of a closed 3-manifold."""

    hf_plus: HFPlusResult
    b1: int
    name: str = ""


def s3_data() -> ClosedManifoldData:
    from .fualgebra import FUDecomposition

    return ClosedManifoldData(
        HFPlusResult(FUDecomposition.make([F(0)], [])), b1=0, name="S3"
    )


def s1xs2_data() -> ClosedManifoldData:
    from .fualgebra import FUDecomposition

    return ClosedManifoldData(
        HFPlusResult(FUDecomposition.make([F(1, 2), F(-1, 2)], [])), b1=1, name="S1xS2"
    )


def he_product_end(m: ClosedManifoldData, r: SliceR4Spec, n: int, levels: int = 2) -> EndFloerReport:
    """End invariant of the product end summed with a positive slice piece.

    The surgered-double levels are summed with the manifold data; the
    dominance conditions (the summand from the doubling tower must own
    the top grading, certified through the forced triangle) are checked
    numerically level by level.  The constant f with level-one top equal
    to n + f is computed, never looked up.
    """
    knot, handle = _oriented_data(r)
    if handle.kind != "all_positive_chain":
        raise ValueError("product ends are computed for positive-chain pieces")
    if _is_trivial_knot(knot):
        return _report({}, True, ["trivial knot: the summed end is standard"])

    from .fualgebra import FUDecomposition

    doubles = _double_tower(knot, levels + 1, "+")
    results = [surgery_hf(d, 0) for d in doubles]
    m_towers = HFPlusResult(FUDecomposition.make(m.hf_plus.decomposition.towers, []))
    m_red_only = HFPlusResult(
        FUDecomposition.make([], m.hf_plus.decomposition.torsion)
    )

    def dominated_top(target: HFPlusResult, label: str, level_index: int):
        """Top grading of the summed reduced part, provided the term from
        the doubling tower strictly dominates every term involving the
        manifold's own reduced part; None reports the failed condition."""
        pure = connected_sum_floer(m_towers, target).hf_red()
        t_pure = max(pure) if pure else None
        if t_pure is None:
            return None, f"condition {label} fails at level {level_index}: no tower term"
        if m.hf_plus.decomposition.torsion:
            other = connected_sum_floer(m_red_only, target).hf_red()
            t_other = max(other) if other else None
            if t_other is not None and t_other >= t_pure:
                return None, (
                    f"condition {label} fails at level {level_index}: the manifold's "
                    f"reduced part reaches grading {format_grading(t_other)} >= "
                    f"{format_grading(t_pure)} (n too small)"
                )
        return t_pure, ""

    tops = []
    f_value = None
    for i in range(levels):
        level = results[i]
        stabilized, _ = one_handle_stabilize(level)
        next_level = results[i + 1]
        mod1 = connected_sum_floer(m.hf_plus, stabilized)
        mod2 = connected_sum_floer(m.hf_plus, next_level)
        # The remaining triangle corner carries the same graded content as
        # mod2; the chain-level check of that identity lives in the
        # verification suite.
        mod3 = mod2
        top1, why1 = dominated_top(stabilized, "(1)", i + 1)
        if top1 is None:
            return _report({}, None, ["dominance check: " + why1])
        top3, why3 = dominated_top(next_level, "(2)", i + 1)
        if top3 is None:
            return _report({}, None, ["dominance check: " + why3])
        force = exact_triangle_force(
            [mod1.hf_red(), mod2.hf_red(), mod3.hf_red()],
            [F(-1, 2), F(0), F(-1, 2)],
        )
        if force.verdict(0) != FORCED_INJECTIVE_TOP:
            return _report(
                {},
                None,
                [
                    f"dominance fails at level {i + 1}: the triangle does not force "
                    "top-summand injectivity (n too small for this manifold)"
                ],
            )
        if f_value is None:
            f_value = top1 - n
        elif top1 - n != f_value:
            return _report({}, None, [f"level tops moved: f would be {top1 - n} at level {i + 1}"])
        if top3 != n + f_value - F(1, 2):
            return _report(
                {},
                None,
                [
                    f"dominance fails at level {i + 1}: third-corner top "
                    f"{format_grading(top3)} != n + f - 1/2"
                ],
            )
        level_sum = connected_sum_floer(m_towers, level)
        table = normalize_level(level_sum.hf_red(), m.b1 + 1)
        tops.append(max(table))
    if len(set(tops)) != 1:
        return _report({}, None, [f"summed level tops did not stabilise: {tops}"])
    top = tops[0]
    expected = n + f_value - 1 - F(m.b1, 2)
    if top != expected:
        raise AssertionError(
            f"normalised top {format_grading(top)} disagrees with n + f - 1 - b1/2"
        )
    per = {top: RankEntry(INFINITE, EXACT)}
    return _report(
        per,
        False,
        [
            f"f({m.name or 'M'}) = {format_grading(f_value)} computed from the level sums",
            "maximal grading n + f - 1 - b1/2 with infinite rank",
        ],
    )


# ---------------------------------------------------------------------------
# distinguishing verdicts


@dataclass(frozen=True)
class DistinguishVerdict:
    distinct: bool
    witness: str

    def to_json(self):
        return {"distinct": self.distinct, "witness": self.witness}


def _operand_report(operand: EndSummand, levels: int) -> EndFloerReport:
    specs = _as_spec_list(operand)
    if len(specs) == 1:
        return he_slice_r4(specs[0], levels=max(levels, 2))
    return he_end_sum(specs, levels=max(levels, 2))


def _describe(sig) -> str:
    if sig is None:
        return "undetermined"
    vanishes, max_g, _exact = sig
    if vanishes:
        return "vanishes"
    if max_g is None:
        return "nonvanishing (no table)"
    return f"max grading {format_grading(max_g)}"


def _decisively_different(sig1, sig2) -> bool:
    """True when two report signatures cannot describe the same invariant.

    Undetermined signatures witness nothing.  A nonvanishing report with
    no table is compatible with every nonvanishing report.
    """
    if sig1 is None or sig2 is None:
        return False
    vanishes1, max1, exact1 = sig1
    vanishes2, max2, exact2 = sig2
    if vanishes1 != vanishes2:
        return True
    if vanishes1:
        return False
    if max1 is not None and max2 is not None and max1 != max2:
        return True
    if exact1 and exact2 and exact1 != exact2:
        return True
    return False


def distinguish(a: EndSummand, b: EndSummand, levels: int = 3) -> DistinguishVerdict:
    """Compare end invariants of two pieces under both orientations.

    Distinct means no orientation pairing can match: both the preserved
    pairing (a+, b+), (a-, b-) and the reversed pairing (a+, b-), (a-, b+)
    contain a decisively different pair.  Undetermined operands never
    witness distinctness.
    """
    sig_a = _operand_report(a, levels).signature()
    sig_b = _operand_report(b, levels).signature()
    sig_a_rev = _operand_report(_reverse_operand(a), levels).signature()
    sig_b_rev = _operand_report(_reverse_operand(b), levels).signature()
    preserved_ok = not _decisively_different(sig_a, sig_b) and not _decisively_different(
        sig_a_rev, sig_b_rev
    )
    reversed_ok = not _decisively_different(sig_a, sig_b_rev) and not _decisively_different(
        sig_a_rev, sig_b
    )
    if preserved_ok or reversed_ok:
        if None in (sig_a, sig_b, sig_a_rev, sig_b_rev):
            return DistinguishVerdict(
                False, "indistinguishable_by_this_invariant: an operand is undetermined"
            )
        return DistinguishVerdict(
            False, "indistinguishable_by_this_invariant: end invariants agree"
        )
    return DistinguishVerdict(
        True,
        "distinct: "
        f"one end has {_describe(sig_a)} / reversed {_describe(sig_a_rev)}, "
        f"the other {_describe(sig_b)} / reversed {_describe(sig_b_rev)}",
    )
