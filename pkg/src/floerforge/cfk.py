"""Knot complexes over F2[U]: builders, sums, mirrors, and hat invariants.

A :class:`KnotComplex` is a free graded complex together with an integer
Alexander grading on generators (U drops it by one), an optional flip
involution realising the (i, j)-symmetry on a symmetric basis, and a
little ambient-manifold metadata.  The built-in zoo covers the trivial
knot, the figure-eight, (2, n) torus staircases, and the two surgered
ambient complexes used by the surgery pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .fualgebra import (
    FreeComplex,
    InvalidComplex,
    ValidationReport,
    _Reducer,
    format_grading,
    grading,
    homology_decomposition,
    tensor_complexes,
    validate_complex,
)

F = Fraction


@dataclass(frozen=True)
class Ambient:
    name: str = "S3"
    b1: int = 0
    reduced_trivial: bool = True

    @property
    def is_sphere(self) -> bool:
        return self.b1 == 0

    def to_json(self) -> dict:
        return {"name": self.name, "b1": self.b1, "reduced_trivial": self.reduced_trivial}

    @classmethod
    def from_json(cls, data) -> "Ambient":
        return cls(data["name"], int(data["b1"]), bool(data["reduced_trivial"]))


class KnotComplex:
    """A bifiltered free complex: Maslov grading plus Alexander filtration."""

    __slots__ = ("base", "alexander", "flip", "ambient", "name")

    def __init__(self, base: FreeComplex, alexander: Mapping[str, int],
                 flip: Optional[Mapping[str, str]] = None,
                 ambient: Ambient = Ambient(), name: str = ""):
        self.base = base
        self.alexander = {g: int(alexander[g]) for g in base.generators}
        self.flip = dict(flip) if flip is not None else None
        self.ambient = ambient
        self.name = name

    @property
    def generators(self):
        return self.base.generators

    def maslov(self, g: str) -> Fraction:
        return self.base.maslov[g]

    def genus_bound(self) -> int:
        """Largest |Alexander| over generators (the working genus)."""
        return max((abs(a) for a in self.alexander.values()), default=0)

    def __eq__(self, other):
        if not isinstance(other, KnotComplex):
            return NotImplemented
        return (
            self.base == other.base
            and self.alexander == other.alexander
            and self.flip == other.flip
            and self.ambient == other.ambient
        )

    def __repr__(self):
        return f"KnotComplex({self.name or 'unnamed'}, {len(self.generators)} generators)"

    def to_json(self) -> dict:
        data = self.base.to_json()
        data["alexander"] = {g: self.alexander[g] for g in self.generators}
        if self.flip is not None:
            data["flip"] = sorted([a, b] for a, b in self.flip.items() if a <= b)
        data["ambient"] = self.ambient.to_json()
        if self.name:
            data["name"] = self.name
        return data

    @classmethod
    def from_json(cls, data) -> "KnotComplex":
        base = FreeComplex.from_json(data)
        flip = None
        if "flip" in data:
            flip = {}
            for a, b in data["flip"]:
                flip[a] = b
                flip[b] = a
        return cls(
            base,
            {g: int(v) for g, v in data["alexander"].items()},
            flip,
            Ambient.from_json(data["ambient"]) if "ambient" in data else Ambient(),
            data.get("name", ""),
        )


def validate_knot(kc: KnotComplex) -> ValidationReport:
    """Base-complex validity, Alexander filtration, flip axioms, symmetry."""
    base_report = validate_complex(kc.base)
    violations = list(base_report.violations)
    A = kc.alexander
    for src, tgt, p in kc.base.entries():
        if A[tgt] - p > A[src]:
            violations.append(
                f"entry {src}->U^{p}.{tgt} raises the Alexander filtration"
            )
    if kc.flip is not None:
        flip_ok = True
        for g in kc.generators:
            img = kc.flip.get(g)
            if img is None or img not in A:
                violations.append(f"flip undefined on {g}")
                flip_ok = False
                continue
            if kc.flip.get(img) != g:
                violations.append(f"flip not involutive at {g}")
            if A[img] != -A[g]:
                violations.append(f"flip image of {g} has Alexander {A[img]} != {-A[g]}")
            if kc.maslov(img) != kc.maslov(g) - 2 * A[g]:
                violations.append(f"flip image of {g} has wrong Maslov grading")
        if flip_ok and base_report.ok:
            violations.extend(_flip_chain_map_violations(kc))
    if base_report.ok and kc.flip is not None:
        # A flip-equipped complex must have symmetric hat dimensions:
        # dim(m, s) = dim(m - 2s, -s).  Flipless pieces (offset boxes)
        # are asymmetric halves and are exempt.
        table = _graded_homology_dims(kc, list(kc.generators), keep_alexander=True)
        for (m, s), d in table.items():
            if table.get((m - 2 * s, -s), 0) != d:
                violations.append(
                    f"hat dimensions asymmetric at (m, s) = ({format_grading(m)}, {s})"
                )
    return ValidationReport(ok=not violations, violations=tuple(violations))


def _flip_chain_map_violations(kc: KnotComplex) -> list[str]:
    """Check that x -> U^(-A(x)) flip(x) intertwines the differentials."""
    A, flip = kc.alexander, kc.flip
    out = []
    for x in kc.generators:
        lhs: dict[str, int] = {}
        for y, p in kc.base.differential.get(x, {}).items():
            lhs[flip[y]] = p - A[y] + A[x]
        rhs = dict(kc.base.differential.get(flip[x], {}))
        if lhs != rhs:
            out.append(f"flip fails to be a chain map at {x}")
    return out


def _require_valid(kc: KnotComplex, what="knot complex"):
    validate_knot(kc).require(what)


# ---------------------------------------------------------------------------
# builders


def box(k, j: int = 0, prefix: str = "") -> KnotComplex:
    """The four-generator square summand B[k, j].

    Corner ``a`` sits at Maslov k, Alexander j, with da = Ub + c,
    db = d, dc = Ud.  For j = 0 the square is symmetric and carries the
    flip (a, d fixed, b <-> c); for j != 0 no flip is attached.
    """
    k = grading(k)
    a, b, c, d = (prefix + n for n in "abcd")
    base = FreeComplex(
        [(a, k), (b, k + 1), (c, k - 1), (d, k)],
        {a: {b: 1, c: 0}, b: {d: 0}, c: {d: 1}},
    )
    alexander = {a: j, b: j + 1, c: j - 1, d: j}
    flip = {a: a, d: d, b: c, c: b} if j == 0 else None
    return KnotComplex(base, alexander, flip, Ambient(), name=f"B[{format_grading(k)},{j}]")


def staircase_torus(n: int, sign: str = "+") -> KnotComplex:
    """The (2, n) torus-knot staircase for odd n >= 3.

    2m+1 generators (n = 2m+1) with Maslov 0, -1, ..., -2m and Alexander
    m, m-1, ..., -m; each odd generator maps onto its neighbours by
    d g(2i+1) = U g(2i) + g(2i+2).  The flip is the index reversal.
    Sign "-" gives the mirror.
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"staircase needs odd n >= 3, got {n}")
    if sign not in {"+", "-"}:
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    m = (n - 1) // 2
    names = [f"s{i}" for i in range(2 * m + 1)]
    base = FreeComplex(
        [(names[i], F(-i)) for i in range(2 * m + 1)],
        {
            names[2 * i + 1]: {names[2 * i]: 1, names[2 * i + 2]: 0}
            for i in range(m)
        },
    )
    alexander = {names[i]: m - i for i in range(2 * m + 1)}
    flip = {names[i]: names[2 * m - i] for i in range(2 * m + 1)}
    kc = KnotComplex(base, alexander, flip, Ambient(), name=f"T(2,{n})")
    if sign == "-":
        kc = mirror_knot(kc)
        kc.name = f"T(2,-{n})"
    return kc


def unknot() -> KnotComplex:
    base = FreeComplex([("x", F(0))])
    return KnotComplex(base, {"x": 0}, {"x": "x"}, Ambient(), name="unknot")


def figure8() -> KnotComplex:
    """The five-generator thin complex: a free summand x plus one square."""
    b = box(F(0), 0)
    gens = [("x", F(0))] + [(g, b.maslov(g)) for g in b.generators]
    base = FreeComplex(gens, b.base.differential)
    alexander = {"x": 0, **b.alexander}
    flip = {"x": "x", **b.flip}
    return KnotComplex(base, alexander, flip, Ambient(), name="figure8")


def j_in_y() -> KnotComplex:
    """The four-generator complex of the companion knot inside 0-surgery
    on the (2,3) torus knot: da = b, dc = Ub, with d a split generator.

    The ambient has b1 = 1 and trivial reduced homology.
    """
    base = FreeComplex(
        [("a", F(1, 2)), ("b", F(-1, 2)), ("c", F(-3, 2)), ("d", F(-1, 2))],
        {"a": {"b": 0}, "c": {"b": 1}},
    )
    alexander = {"a": 1, "b": 0, "c": -1, "d": 0}
    flip = {"a": "c", "c": "a", "b": "b", "d": "d"}
    return KnotComplex(base, alexander, flip, Ambient("Y", 1, True), name="J")


def jprime_in_yprime() -> KnotComplex:
    """The six-generator companion complex inside 0-surgery on the
    figure-eight knot: two split generators u, v plus a vertical pair
    p -> q and a horizontal pair r -> Us.

    The picture fixes only the arrow pattern and Alexander gradings; the
    Maslov gradings below are forced by two constraints and frozen here:
    the ambient homology must be towers at +1/2 and -1/2 with one length-1
    torsion class (u, v free; the pair r -> Us contributes the torsion),
    and -1-surgery on the companion must give two towers at +1/2 and -1/2
    with the same d-invariants as the ambient.  Both are asserted in the
    regression tests.
    """
    base = FreeComplex(
        [
            ("u", F(1, 2)),
            ("v", F(-1, 2)),
            ("p", F(3, 2)),
            ("q", F(1, 2)),
            ("r", F(-1, 2)),
            ("s", F(1, 2)),
        ],
        {"p": {"q": 0}, "r": {"s": 1}},
    )
    alexander = {"u": 0, "v": 0, "p": 1, "q": 0, "r": -1, "s": 0}
    flip = {"u": "u", "v": "v", "p": "r", "r": "p", "q": "s", "s": "q"}
    return KnotComplex(base, alexander, flip, Ambient("Y'", 1, False), name="J'")


_BUILTINS = {
    "unknot": unknot,
    "figure8": figure8,
    "J_in_Y": j_in_y,
    "Jprime_in_Yprime": jprime_in_yprime,
}


def builtin(name: str) -> KnotComplex:
    """Return a built-in table complex by name."""
    try:
        return _BUILTINS[name]()
    except KeyError:
        raise ValueError(f"unknown builtin {name!r}; have {sorted(_BUILTINS)}") from None


# ---------------------------------------------------------------------------
# constructions


def mirror_knot(kc: KnotComplex) -> KnotComplex:
    """Dual complex: Maslov and Alexander negate, the differential is
    transposed, and the gradings are renormalised so that the surviving
    free homology class sits in grading 0 (the sphere convention).
    """
    if not kc.ambient.is_sphere:
        raise ValueError("mirror is only defined for complexes with trivial ambient")
    _require_valid(kc)
    gens = [(g, -kc.maslov(g)) for g in kc.generators]
    transposed: dict[str, dict[str, int]] = {}
    for src, tgt, p in kc.base.entries():
        transposed.setdefault(tgt, {})[src] = p
    base = FreeComplex(gens, transposed)
    h = homology_decomposition(base)
    if len(h.towers) != 1:
        raise InvalidComplex("mirror normalisation expects free rank 1")
    base = base.shift(-h.towers[0])
    return KnotComplex(
        base,
        {g: -a for g, a in kc.alexander.items()},
        dict(kc.flip) if kc.flip is not None else None,
        kc.ambient,
        name=f"m({kc.name})" if kc.name else "",
    )


def connected_sum_knots(k1: KnotComplex, k2: KnotComplex) -> KnotComplex:
    """Tensor product of knot complexes; Alexander gradings add.

    At most one factor may live in a nontrivial ambient manifold.
    """
    if not k1.ambient.is_sphere and not k2.ambient.is_sphere:
        raise ValueError("at most one connected-sum factor may have b1 > 0")
    base = tensor_complexes(k1.base, k2.base)
    name = lambda a, b: f"({a}|{b})"
    alexander = {
        name(a, b): k1.alexander[a] + k2.alexander[b]
        for a in k1.generators
        for b in k2.generators
    }
    flip = None
    if k1.flip is not None and k2.flip is not None:
        flip = {
            name(a, b): name(k1.flip[a], k2.flip[b])
            for a in k1.generators
            for b in k2.generators
        }
    ambient = k1.ambient if not k1.ambient.is_sphere else k2.ambient
    label = f"{k1.name}#{k2.name}" if k1.name and k2.name else ""
    return KnotComplex(base, alexander, flip, ambient, name=label)


def reduce_canonical(kc: KnotComplex) -> KnotComplex:
    """Cancel every U^0 entry with zero Alexander drop.

    The output is filtered-homotopy-equivalent to the input and minimal
    in that sense.  The stored flip survives only if it is still a valid
    flip on the surviving basis (cancellation can mix it away).
    """
    r = _Reducer(kc.base, alexander=kc.alexander)
    r.cancel_u0(same_alexander=True)
    base = r.current_complex()
    alexander = {g: kc.alexander[g] for g in base.generators}
    flip = None
    if kc.flip is not None:
        survivors = set(base.generators)
        candidate = {g: kc.flip[g] for g in base.generators if kc.flip[g] in survivors}
        if len(candidate) == len(base.generators):
            trial = KnotComplex(base, alexander, candidate, kc.ambient, kc.name)
            if not _flip_chain_map_violations(trial):
                flip = candidate
    return KnotComplex(base, alexander, flip, kc.ambient, name=kc.name)


# ---------------------------------------------------------------------------
# hat-level invariants


@dataclass(frozen=True)
class HfkTable:
    """Bigraded hat dimensions; ``reduced`` drops the surviving generator
    at (0, tau) and is only defined over the sphere."""

    total: dict
    reduced: Optional[dict] = None

    def max_reduced_maslov(self) -> Optional[Fraction]:
        if not self.reduced:
            return None
        return max(m for (m, _s) in self.reduced)


def _vertical_differential(kc: KnotComplex):
    """U = 0 differential (entries with exponent 0), Alexander-filtered."""
    return {
        src: sorted(tgt for tgt, p in row.items() if p == 0)
        for src, row in kc.base.differential.items()
        if any(p == 0 for p in row.values())
    }


def _gf2_rank(rows: list[int]) -> int:
    pivots: list[int] = []
    for m in rows:
        for pv in pivots:
            if m & (pv & -pv):
                m ^= pv
        if m:
            pivots.append(m)
    return len(pivots)


def _graded_homology_dims(kc: KnotComplex, gens: list[str], keep_alexander: bool):
    """Homology dims of the U=0 complex on ``gens``; with ``keep_alexander``
    only Alexander-preserving arrows count (associated graded)."""
    index = {g: i for i, g in enumerate(gens)}
    A = kc.alexander
    vert = _vertical_differential(kc)
    masks = {}
    for g in gens:
        mask = 0
        for tgt in vert.get(g, ()):
            if tgt in index and (not keep_alexander or A[tgt] == A[g]):
                mask |= 1 << index[tgt]
        masks[g] = mask
    keys = sorted({(kc.maslov(g), A[g]) if keep_alexander else kc.maslov(g) for g in gens})
    dims = {}
    for key in keys:
        if keep_alexander:
            here = [g for g in gens if (kc.maslov(g), A[g]) == key]
            above = [g for g in gens if (kc.maslov(g), A[g]) == (key[0] + 1, key[1])]
        else:
            here = [g for g in gens if kc.maslov(g) == key]
            above = [g for g in gens if kc.maslov(g) == key + 1]
        d = len(here) - _gf2_rank([masks[g] for g in here]) - _gf2_rank([masks[g] for g in above])
        if d:
            dims[key] = d
    return dims


def hfk_hat(kc: KnotComplex) -> HfkTable:
    """Bigraded hat homology: U = 0, Alexander-preserving arrows only.

    Over the sphere the reduced table removes one generator at (0, tau).
    """
    total = _graded_homology_dims(kc, list(kc.generators), keep_alexander=True)
    reduced = None
    if kc.ambient.is_sphere:
        tau = knot_numerics(kc)["tau"]
        reduced = dict(total)
        spot = (F(0), tau)
        if reduced.get(spot, 0) < 1:
            raise InvalidComplex("no surviving generator at (0, tau)")
        if reduced[spot] == 1:
            del reduced[spot]
        else:
            reduced[spot] -= 1
    return HfkTable(total=total, reduced=reduced)


def filtration_homology(kc: KnotComplex, i: int) -> dict:
    """Graded homology of the U=0 subcomplex on generators with A <= i."""
    gens = [g for g in kc.generators if kc.alexander[g] <= i]
    return _graded_homology_dims(kc, gens, keep_alexander=False)


def knot_numerics(kc: KnotComplex) -> dict:
    """tau and genus of a complex over the sphere.

    tau is the least i for which the filtration-level homology surjects
    onto the one-dimensional total U=0 homology; genus is the largest
    |Alexander| surviving canonical reduction.
    """
    if not kc.ambient.is_sphere:
        raise ValueError("tau/genus need the trivial ambient manifold")
    total = _graded_homology_dims(kc, list(kc.generators), keep_alexander=False)
    if sum(total.values()) != 1:
        raise InvalidComplex("U=0 homology is not one-dimensional")
    gens = list(kc.generators)
    index = {g: i for i, g in enumerate(gens)}
    vert = _vertical_differential(kc)

    def mask_of(g):
        m = 0
        for tgt in vert.get(g, ()):
            m |= 1 << index[tgt]
        return m

    full_boundaries = [mask_of(g) for g in gens]
    levels = sorted(set(kc.alexander.values()))
    for i in levels:
        sub = [g for g in gens if kc.alexander[g] <= i]
        sub_cycles = _cycle_masks(sub, index, mask_of)
        # Surjectivity onto H(total) = F: some subcomplex cycle survives
        # modulo all boundaries of the full complex.
        pool = full_boundaries + sub_cycles
        if _gf2_rank(pool) > _gf2_rank(full_boundaries):
            tau = i
            break
    else:
        raise InvalidComplex("no filtration level carries the surviving class")
    reduced = reduce_canonical(kc)
    return {"tau": tau, "genus": reduced.genus_bound()}


def _cycle_masks(gens, index, mask_of):
    """Basis of cycles of the U=0 differential restricted to ``gens``."""
    cols = []
    for g in gens:
        vec = 1 << index[g]
        bdry = mask_of(g)
        cols.append((bdry, vec))
    # Gaussian elimination on boundaries, carrying the combination vectors.
    pivots = []
    cycles = []
    for bdry, vec in cols:
        for pb, pv in pivots:
            if bdry & (pb & -pb):
                bdry ^= pb
                vec ^= pv
        if bdry:
            pivots.append((bdry, vec))
        else:
            cycles.append(vec)
    return cycles


# ---------------------------------------------------------------------------
# the reduced hat-basis normal form


@dataclass(frozen=True)
class ReducedBasisForm:
    """Canonical pairing x, (y_j -> z_j) of the reduced U=0 complex.

    Each pair is recorded as (maslov of y_j, Alexander of y_j, drop d_j);
    the surviving generator x sits at Maslov and Alexander zero.
    """

    pairs: tuple[tuple[Fraction, int, int], ...]

    @staticmethod
    def make(pairs) -> "ReducedBasisForm":
        return ReducedBasisForm(
            tuple(sorted(((grading(m), int(a), int(d)) for m, a, d in pairs),
                         key=lambda t: (-t[0], -t[1], t[2])))
        )

    def mirror(self) -> "ReducedBasisForm":
        """Pairing of the mirror complex: (m, A, d) -> (1 - m, d - A, d)."""
        return ReducedBasisForm.make((1 - m, d - a, d) for m, a, d in self.pairs)

    def max_maslov(self) -> Fraction:
        if not self.pairs:
            raise ValueError("empty pairing has no maximal grading")
        return max(m for m, _a, _d in self.pairs)


def reduced_basis_form(kc: KnotComplex) -> ReducedBasisForm:
    """Extract the (m_j, A_j, d_j) pairing from the reduced U=0 complex.

    Requires the trivial ambient and tau = 0; the vertical differential
    must pair all generators but one.  The pairing is produced by
    filtration-ordered column reduction (persistence pairing), which is a
    filtered change of basis, so the triples are well defined.
    """
    if not kc.ambient.is_sphere:
        raise ValueError("reduced basis form needs the trivial ambient manifold")
    numerics = knot_numerics(kc)
    if numerics["tau"] != 0:
        raise ValueError(f"reduced basis form needs tau = 0, got {numerics['tau']}")
    reduced = reduce_canonical(kc)
    order = sorted(reduced.generators, key=lambda g: (reduced.alexander[g], str(reduced.maslov(g)), g))
    pos = {g: i for i, g in enumerate(order)}
    vert = _vertical_differential(reduced)

    def mask_of(g):
        m = 0
        for tgt in vert.get(g, ()):
            m |= 1 << pos[tgt]
        return m

    columns = {g: mask_of(g) for g in order}
    pivot_owner: dict[int, str] = {}
    pairs = []
    unpaired = []
    for g in order:
        col = columns[g]
        while col:
            low = col.bit_length() - 1
            if low not in pivot_owner:
                break
            col ^= columns[pivot_owner[low]]
        columns[g] = col
        if col:
            low = col.bit_length() - 1
            pivot_owner[low] = g
            z = order[low]
            pairs.append((reduced.maslov(g), reduced.alexander[g],
                          reduced.alexander[g] - reduced.alexander[z]))
        else:
            unpaired.append(g)
    survivors = [g for g in unpaired if pos[g] not in pivot_owner]
    if len(survivors) != 1:
        raise InvalidComplex(
            "vertical pairing failed; unmatched generators: " + ", ".join(survivors)
        )
    x = survivors[0]
    if reduced.maslov(x) != 0 or reduced.alexander[x] != 0:
        raise InvalidComplex(
            f"surviving generator {x} sits at "
            f"({format_grading(reduced.maslov(x))}, {reduced.alexander[x]}), not (0, 0)"
        )
    if any(d <= 0 for _m, _a, d in pairs):
        raise InvalidComplex("vertical pairing produced a non-positive drop")
    return ReducedBasisForm.make(pairs)


def direct_sum(parts: list[KnotComplex], name: str = "") -> KnotComplex:
    """Direct sum of knot complexes over a common ambient."""
    if not parts:
        raise ValueError("empty direct sum")
    ambient = parts[0].ambient
    gens = []
    diff = {}
    alexander = {}
    flip: Optional[dict] = {}
    for i, part in enumerate(parts):
        if part.ambient != ambient:
            raise ValueError("direct sum needs a common ambient manifold")
        tag = lambda g, i=i: f"{i}.{g}"
        for g in part.generators:
            gens.append((tag(g), part.maslov(g)))
            alexander[tag(g)] = part.alexander[g]
        for src, row in part.base.differential.items():
            diff[tag(src)] = {tag(t): p for t, p in row.items()}
        if flip is not None and part.flip is not None:
            for g in part.generators:
                flip[tag(g)] = tag(part.flip[g])
        else:
            flip = None
    return KnotComplex(FreeComplex(gens, diff), alexander, flip, ambient, name=name)
