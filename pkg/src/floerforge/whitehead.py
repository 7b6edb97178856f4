"""Whitehead doubling at the level of complexes.

Doubling a knot with tau = 0 and reduced pairing (m_j, A_j, d_j) gives
the genus-one complex x + sum_j B[m_j - 1]^(2 d_j); the negative-clasp
double is the mirror of the double of the mirror.  The hat-level rank
formula for doubles is evaluated independently, term by term with its
formal negative corrections, and the two must agree (tested).

``clasp_step`` packages the effect of one doubling cobordism on the
0-framed surgery output as a step descriptor for directed systems:
positively clasped steps are injective on the top graded summand with
grading shift 0; negatively clasped steps are zero maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cfk import (
    KnotComplex,
    ReducedBasisForm,
    box,
    direct_sum,
    mirror_knot,
    reduce_canonical,
    reduced_basis_form,
    unknot,
)
from .fualgebra import FUDecomposition, grading
from .surgery import HFPlusResult, surgery_hf

F = Fraction


class FormalRankError(ValueError):
    """A final hat-rank table came out negative: invalid input data."""


def hedden_hfk_double(filtration, g: int) -> dict:
    """Hat ranks of the untwisted positive double from filtration data.

    ``filtration`` maps each level i in [-g, g] to a graded dimension
    table of the sub-level homology.  The three-case formula contributes,
    at clasp gradings s = 1, 0, -1, twice the level homologies shifted up,
    four times unshifted, and twice shifted down, against formal
    corrections -(2g+2), -(4g+3), -(2g+2) at gradings 1, 0, -1.
    Intermediate values may be negative; the final table must not be.
    """
    g = int(g)
    table: dict[tuple[Fraction, int], int] = {}

    def add(m, s, n):
        key = (grading(m), s)
        table[key] = table.get(key, 0) + n

    add(1, 1, -(2 * g + 2))
    add(0, 0, -(4 * g + 3))
    add(-1, -1, -(2 * g + 2))
    for i in range(-g, g + 1):
        dims = filtration.get(i, {})
        for m, n in dims.items():
            add(grading(m) + 1, 1, 2 * n)
            add(grading(m), 0, 4 * n)
            add(grading(m) - 1, -1, 2 * n)
    negatives = {k: v for k, v in table.items() if v < 0}
    if negatives:
        raise FormalRankError(f"negative final ranks at {sorted(negatives)}")
    return {k: v for k, v in table.items() if v}


def whitehead_double_cfk(rb: ReducedBasisForm, name: str = "") -> KnotComplex:
    """x + sum of 2 d_j boxes B[m_j - 1] per reduced pair.

    The trivial knot (empty pair list) has no box content and is
    rejected; doubling it does not produce a genus-one complex.
    """
    if not rb.pairs:
        raise ValueError("doubling needs a nontrivial knot (no reduced pairs)")
    parts = [unknot()]
    for m, _a, d in rb.pairs:
        parts.extend(box(m - 1) for _ in range(2 * d))
    return direct_sum(parts, name=name or "Wh")


def negative_double_cfk(rb: ReducedBasisForm, name: str = "") -> KnotComplex:
    """Mirror of the positive double of the mirrored pairing."""
    if not rb.pairs:
        raise ValueError("doubling needs a nontrivial knot (no reduced pairs)")
    doubled = whitehead_double_cfk(rb.mirror())
    out = mirror_knot(doubled)
    out.name = name or "Wh-"
    return out


def box_parameters(kc: KnotComplex) -> list[Fraction]:
    """Corner gradings of the box summands of a reduced x + boxes complex.

    Raises when the complex is not, after canonical reduction, a direct
    sum of one generator at (0, 0) and 1x1 boxes.
    """
    reduced = reduce_canonical(kc)
    remaining = set(reduced.generators)
    diff = reduced.base.differential
    params: list[Fraction] = []
    x_seen = False
    # Box corners are the generators with two outgoing arrows.
    for a in sorted(remaining):
        row = diff.get(a, {})
        if len(row) != 2:
            continue
        powered = [t for t, p in row.items() if p == 1]
        plain = [t for t, p in row.items() if p == 0]
        if len(powered) != 1 or len(plain) != 1:
            raise ValueError(f"generator {a} is not a box corner")
        b, c = powered[0], plain[0]
        d_row = diff.get(b, {})
        if len(d_row) != 1 or list(d_row.values()) != [0]:
            raise ValueError(f"box at {a} has a malformed vertical edge")
        d = next(iter(d_row))
        if diff.get(c, {}) != {d: 1}:
            raise ValueError(f"box at {a} has a malformed horizontal edge")
        if reduced.alexander[a] != 0 or reduced.alexander[d] != 0:
            raise ValueError(f"box at {a} is Alexander-offset")
        params.append(reduced.maslov(a))
        remaining -= {a, b, c, d}
    for g in sorted(remaining):
        if diff.get(g):
            raise ValueError(f"leftover generator {g} has a differential")
        if reduced.maslov(g) != 0 or reduced.alexander[g] != 0:
            raise ValueError(f"leftover generator {g} is not at (0, 0)")
        if x_seen:
            raise ValueError("more than one split generator")
        x_seen = True
    if not x_seen:
        raise ValueError("no split generator at (0, 0)")
    return sorted(params, reverse=True)


def is_box_sum(kc: KnotComplex) -> bool:
    try:
        box_parameters(kc)
    except ValueError:
        return False
    return True


@dataclass(frozen=True)
class StepDescriptor:
    """One cobordism step of a directed system of graded vector spaces."""

    kind: str  # positive_clasp | negative_clasp | zero | iso | explicit
    grading_shift: Fraction = F(0)
    matrix: Optional[dict] = None  # explicit: grading -> list of column bitmasks

    def __post_init__(self):
        if self.kind not in {"positive_clasp", "negative_clasp", "zero", "iso", "explicit"}:
            raise ValueError(f"unknown step kind {self.kind!r}")
        if (self.kind == "explicit") != (self.matrix is not None):
            raise ValueError("explicit steps carry a matrix; others must not")


def _expect_zero_surgery_shape(level: HFPlusResult) -> list[Fraction]:
    dec = level.decomposition
    if tuple(sorted(dec.towers)) != (F(-1, 2), F(1, 2)):
        raise ValueError(f"not a 0-framed surgery output: towers {dec.towers}")
    if any(k != 1 for _g, k in dec.torsion):
        raise ValueError("reduced part must be length-1 torsion")
    return [g + F(1, 2) for g, _k in dec.torsion]


def clasp_step(sign: str, level: HFPlusResult):
    """Target level and step descriptor for one doubling cobordism.

    ``level`` must be the 0-framed output of a genus-one x + boxes
    complex: towers at +1/2 and -1/2, reduced part all length 1.  The
    target is recomputed through the doubling pipeline on a complex
    reconstructed from the reduced part.
    """
    if sign not in {"+", "-"}:
        raise ValueError("clasp sign must be '+' or '-'")
    params = _expect_zero_surgery_shape(level)
    if sign == "+":
        descriptor = StepDescriptor(kind="positive_clasp", grading_shift=F(0))
    else:
        descriptor = StepDescriptor(kind="zero", grading_shift=F(0))
    if not params:
        # No reduced content: doubling the trivial complex keeps the two
        # towers and an empty reduced part; the step is vacuous.
        return descriptor, level
    rebuilt = direct_sum(
        [unknot()] + [box(k) for k in params], name="rebuilt"
    )
    rb = reduced_basis_form(rebuilt)
    doubled = whitehead_double_cfk(rb) if sign == "+" else negative_double_cfk(rb)
    target = surgery_hf(doubled, 0)
    return descriptor, target


def clasp_target_pattern(level: HFPlusResult) -> FUDecomposition:
    """Positive-clasp target by the closed pattern: towers stay, reduced
    part tensors with two copies each at shifts 0 and -1."""
    dec = level.decomposition
    torsion = []
    for g, k in dec.torsion:
        if k != 1:
            raise ValueError("pattern applies to length-1 reduced parts")
        torsion.extend([(g, 1), (g, 1), (g - 1, 1), (g - 1, 1)])
    return FUDecomposition.make(dec.towers, torsion)
