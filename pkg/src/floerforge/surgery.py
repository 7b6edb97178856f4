"""The integer-surgery mapping cone over F2[U] and its graded output.

For a flip-equipped knot complex C the cone assembles quotient-region
summands A_s (region max(i, j-s) >= 0, realised internally by their free
subcomplex models) and B_s (region i >= 0) over a finite window of s,
joined by the vertical projections v_s and the flip-translated maps h_s.
The maps v_s + h_s lower the cone grading by one.  Absolute gradings are
anchored on B_0:

- framing -1 keeps the grading B_0 inherits,
- framing 0 shifts B_0 down by 1/2 (only the s = 0 summand is formed:
  that is the torsion structure output),
- framing +1 is calibrated so that +1-framed surgery on the trivial
  knot returns a single tower at grading 0.

The window uses s in [-g+1, g-1] for the A-summands (v_s is an
isomorphism above genus and h_s below minus genus), with B-summands
[-g, g-1] for framing -1 and [-g+2, g-1] for framing +1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .cfk import KnotComplex, validate_knot
from .fualgebra import (
    FreeComplex,
    FUDecomposition,
    _Reducer,
    format_grading,
    grading,
    homology_decomposition,
    plus_presentation,
    tensor_complexes,
    validate_complex,
)

F = Fraction

TORSION_SPINC = "torsion-summed [s0]"


class MissingFlip(ValueError):
    """Surgery needs the flip involution; the complex has none."""


@dataclass(frozen=True)
class HFPlusResult:
    """Plus-flavoured homology: towers plus torsion, with d-invariants."""

    decomposition: FUDecomposition
    spinc: str = TORSION_SPINC

    @property
    def d_invariants(self) -> tuple[Fraction, ...]:
        return tuple(sorted(self.decomposition.towers))

    def hf_red(self) -> dict[Fraction, int]:
        return self.decomposition.torsion_rank_table()

    def top_reduced_grading(self) -> Optional[Fraction]:
        table = self.hf_red()
        return max(table) if table else None

    def to_json(self) -> dict:
        return {
            "decomposition": self.decomposition.to_json(),
            "spinc": self.spinc,
            "d_invariants": [format_grading(d) for d in self.d_invariants],
        }

    @classmethod
    def from_json(cls, data) -> "HFPlusResult":
        return cls(FUDecomposition.from_json(data["decomposition"]), data.get("spinc", TORSION_SPINC))


@dataclass
class MappingCone:
    """Summands and edge maps of a truncated surgery cone.

    Edge maps are stored on generator names of the underlying knot
    complex; ``total_complex`` assembles the cone with its absolute
    gradings baked in.
    """

    n: int
    a_window: tuple[int, ...]
    b_window: tuple[int, ...]
    a_complexes: dict
    b_complexes: dict
    a_shifts: dict
    b_shifts: dict
    edges: dict  # (s, "v"|"h") -> {src: {tgt: power}} between summand bases
    anchor: str

    def total_complex(self) -> FreeComplex:
        gens = []
        diff: dict[str, dict[str, int]] = {}

        def xor_entry(src, tgt, p):
            # F2 coefficients: coinciding contributions cancel.
            row = diff.setdefault(src, {})
            if tgt in row:
                if row[tgt] != p:
                    raise AssertionError(f"inhomogeneous cone entry {src}->{tgt}")
                del row[tgt]
            else:
                row[tgt] = p

        for s in self.a_window:
            c = self.a_complexes[s]
            for g in c.generators:
                gens.append((f"A{s}|{g}", c.maslov[g] + self.a_shifts[s]))
            for src, row in c.differential.items():
                for t, p in row.items():
                    xor_entry(f"A{s}|{src}", f"A{s}|{t}", p)
        for t in self.b_window:
            c = self.b_complexes[t]
            for g in c.generators:
                gens.append((f"B{t}|{g}", c.maslov[g] + self.b_shifts[t]))
            for src, row in c.differential.items():
                for tg, p in row.items():
                    xor_entry(f"B{t}|{src}", f"B{t}|{tg}", p)
        for (s, kind), entries in self.edges.items():
            t = s if kind == "v" else s + self.n
            for src, row in entries.items():
                for tg, p in row.items():
                    xor_entry(f"A{s}|{src}", f"B{t}|{tg}", p)
        return FreeComplex(gens, diff)


def _b_shift(n: int, t: int, c0: Fraction) -> Fraction:
    """Anchor propagation c_{s+n} = c_s + 2s starting from c_0."""
    if n == 0:
        if t != 0:
            raise ValueError("framing 0 only forms the s = 0 summand")
        return c0
    c = c0
    if n == 1:
        if t >= 0:
            for u in range(t):  # c_{u+1} = c_u + 2u
                c += 2 * u
        else:
            for u in range(0, t, -1):  # c_{u-1} = c_u - 2(u-1)
                c -= 2 * (u - 1)
    else:
        if t <= 0:
            for u in range(0, t, -1):  # c_{u-1} = c_u + 2u
                c += 2 * u
        else:
            for u in range(t):  # c_{u+1} = c_u - 2(u+1)
                c -= 2 * (u + 1)
    return c


_ANCHORS = {0: F(-1, 2), -1: F(0), 1: F(-1)}


def build_cone(kc: KnotComplex, n: int, reduce_summands: bool = False) -> MappingCone:
    """Assemble the truncated cone for framing n in {-1, 0, +1}.

    With ``reduce_summands`` each A_s and B_t is first reduced to its
    minimal model (all U^0 entries cancelled) and the edge maps are
    transported through the reduction; the cone homology is unchanged
    and the two routes are cross-checked in the tests.
    """
    if kc.flip is None:
        raise MissingFlip(f"complex {kc.name or ''} has no flip involution")
    if n not in (-1, 0, 1):
        raise ValueError("absolute gradings are supported for framings -1, 0, +1 only")
    validate_knot(kc).require("surgery input")
    g_hat = max(kc.genus_bound(), 1)
    if n == 0:
        a_window = (0,)
        b_window = (0,)
    elif n == -1:
        a_window = tuple(range(-g_hat + 1, g_hat))
        b_window = tuple(range(-g_hat, g_hat))
    else:
        a_window = tuple(range(-g_hat + 1, g_hat))
        b_window = tuple(range(-g_hat + 2, g_hat))

    c0 = _ANCHORS[n]
    b_shifts = {t: _b_shift(n, t, c0) for t in b_window}
    a_shifts = {}
    for s in a_window:
        a_shifts[s] = (_b_shift(n, s, c0) if n != 0 else c0) + 1

    A = kc.alexander
    flip = kc.flip
    base = kc.base

    a_complexes = {}
    edges = {}
    for s in a_window:
        offset = {x: max(0, A[x] - s) for x in base.generators}
        gens = [(x, base.maslov[x] - 2 * offset[x]) for x in base.generators]
        diff = {}
        for src, row in base.differential.items():
            diff[src] = {
                tgt: offset[src] + p - offset[tgt] for tgt, p in row.items()
            }
        a_complexes[s] = FreeComplex(gens, diff)
        if s in b_window:
            edges[(s, "v")] = {x: {x: offset[x]} for x in base.generators}
        if s + n in b_window:
            edges[(s, "h")] = {
                x: {flip[x]: max(0, s - A[x])} for x in base.generators
            }
    b_complexes = {t: base for t in b_window}

    mc = MappingCone(
        n=n,
        a_window=a_window,
        b_window=b_window,
        a_complexes=a_complexes,
        b_complexes=dict(b_complexes),
        a_shifts=a_shifts,
        b_shifts=b_shifts,
        edges=edges,
        anchor={0: "B0 down 1/2", -1: "B0 inherited", 1: "calibrated +1"}[n],
    )
    if len(mc.a_window) + len(mc.b_window) > 1:
        for s in mc.a_window:
            if (s, "v") not in mc.edges and (s, "h") not in mc.edges:
                raise ValueError(f"cone summand A_{s} is disconnected from the window")
    if reduce_summands:
        mc = _reduce_cone_summands(mc)
    return mc


def _reduce_with_maps(c: FreeComplex):
    r = _Reducer(c, track=True)
    r.cancel_u0()
    return r.current_complex(), r.iota, r.pi


def _compose_entries(entries, post):
    """Compose a map given by ``entries`` with the coordinate change ``post``."""
    out: dict[str, dict[str, int]] = {}
    for src, row in entries.items():
        acc: dict[str, int] = {}
        for mid, p in row.items():
            for tgt, q in post.get(mid, {}).items():
                key = tgt
                power = p + q
                if key in acc:
                    if acc[key] != power:
                        raise AssertionError("inhomogeneous composition")
                    del acc[key]
                else:
                    acc[key] = power
        if acc:
            out[src] = acc
    return out


def _precompose_entries(iota, entries):
    out: dict[str, dict[str, int]] = {}
    for src, row in iota.items():
        acc: dict[str, int] = {}
        for mid, p in row.items():
            for tgt, q in entries.get(mid, {}).items():
                power = p + q
                if tgt in acc:
                    if acc[tgt] != power:
                        raise AssertionError("inhomogeneous composition")
                    del acc[tgt]
                else:
                    acc[tgt] = power
        if acc:
            out[src] = acc
    return out


def _reduce_cone_summands(mc: MappingCone) -> MappingCone:
    a_red, a_iota = {}, {}
    for s in mc.a_window:
        reduced, iota, _pi = _reduce_with_maps(mc.a_complexes[s])
        a_red[s] = reduced
        a_iota[s] = iota
    b_red, b_pi = {}, {}
    for t in mc.b_window:
        reduced, _iota, pi = _reduce_with_maps(mc.b_complexes[t])
        b_red[t] = reduced
        b_pi[t] = pi
    edges = {}
    for (s, kind), entries in mc.edges.items():
        t = s if kind == "v" else s + mc.n
        composed = _precompose_entries(a_iota[s], _compose_entries(entries, b_pi[t]))
        edges[(s, kind)] = composed
    return MappingCone(
        n=mc.n,
        a_window=mc.a_window,
        b_window=mc.b_window,
        a_complexes=a_red,
        b_complexes=b_red,
        a_shifts=mc.a_shifts,
        b_shifts=mc.b_shifts,
        edges=edges,
        anchor=mc.anchor + " (reduced summands)",
    )


def surgery_hf(kc: KnotComplex, n: int, reduce_summands: bool = False) -> HFPlusResult:
    """Graded homology of n-framed surgery, in the torsion structure class."""
    mc = build_cone(kc, n, reduce_summands=reduce_summands)
    total = mc.total_complex()
    report = validate_complex(total)
    report.require("mapping cone")
    h = homology_decomposition(total)
    return HFPlusResult(plus_presentation(h, convention="minus"))


def extract_invariants(result: HFPlusResult) -> dict:
    """d-invariants (sorted tower bottoms) and the reduced rank table."""
    return {"d": list(result.d_invariants), "hf_red": result.hf_red()}


@dataclass(frozen=True)
class OneHandleMap:
    """Descriptor of the stabilisation map: inclusion into the +1/2 copy."""

    kind: str = "inclusion"
    target_shift: Fraction = F(1, 2)


def one_handle_stabilize(result: HFPlusResult):
    """Tensor with one F_(1/2) + F_(-1/2) pair: every summand doubles."""
    dec = result.decomposition
    towers = [t + F(1, 2) for t in dec.towers] + [t - F(1, 2) for t in dec.towers]
    torsion = [(g + F(1, 2), k) for g, k in dec.torsion] + [
        (g - F(1, 2), k) for g, k in dec.torsion
    ]
    return (
        HFPlusResult(FUDecomposition.make(towers, torsion), result.spinc),
        OneHandleMap(),
    )


def _encode_decomposition(dec: FUDecomposition, tag: str) -> FreeComplex:
    """Free-complex model with the decomposition as homology.

    A tower at d becomes a free generator at d; torsion (top g, length k)
    becomes a pair dy = U^k x with m(x) = g + 1, so that taking homology
    and re-presenting in plus terms is the identity.
    """
    gens = []
    diff = {}
    for i, d in enumerate(dec.towers):
        gens.append((f"{tag}t{i}", d))
    for i, (g, k) in enumerate(dec.torsion):
        x, y = f"{tag}x{i}", f"{tag}y{i}"
        gens.append((x, g + 1))
        gens.append((y, g + 2 - 2 * k))
        diff[y] = {x: k}
    return FreeComplex(gens, diff)


def _torsion_pair_block(k1: int, k2: int) -> FUDecomposition:
    """Product of two base torsion encodings (tops at 0), computed once
    per length pair; general gradings are shifts of this block."""
    c1 = _encode_decomposition(FUDecomposition.make([], [(F(0), k1)]), "L")
    c2 = _encode_decomposition(FUDecomposition.make([], [(F(0), k2)]), "R")
    return homology_decomposition(tensor_complexes(c1, c2))


_TORSION_BLOCKS: dict = {}


def connected_sum_floer(r1: HFPlusResult, r2: HFPlusResult) -> HFPlusResult:
    """Tensor the plus decompositions over the ground ring.

    Tensor and homology both distribute over the summand decomposition,
    so the product is assembled from pairs of summands: tower x tower and
    tower x torsion blocks are immediate, torsion x torsion blocks are
    computed by the engine once per length pair (they are grading-shift
    invariant) and then shifted.  Normalised so that summing with the
    single-tower unit at grading 0 is the identity.
    """
    dec1, dec2 = r1.decomposition, r2.decomposition
    towers = []
    torsion = []
    # Working in the subcomplex-model reading throughout: a torsion
    # summand with plus-top g has its model top at g + 1; the final
    # presentation step shifts every torsion top back down by one.
    for d1 in dec1.towers:
        for d2 in dec2.towers:
            towers.append(d1 + d2)
        for g2, k2 in dec2.torsion:
            torsion.append((g2 + 1 + d1, k2))
    for g1, k1 in dec1.torsion:
        for d2 in dec2.towers:
            torsion.append((g1 + 1 + d2, k1))
        for g2, k2 in dec2.torsion:
            key = (k1, k2)
            if key not in _TORSION_BLOCKS:
                _TORSION_BLOCKS[key] = _torsion_pair_block(k1, k2)
            block = _TORSION_BLOCKS[key].shift(g1 + g2)
            towers.extend(block.towers)
            torsion.extend(block.torsion)
    h_total = FUDecomposition.make(towers, torsion)
    return HFPlusResult(plus_presentation(h_total, convention="minus"))


# ---------------------------------------------------------------------------
# exact-triangle rank and grading forcing


FORCED_ZERO = "forced-zero"
FORCED_INJECTIVE_TOP = "forced-injective-on-top-summand"
UNDETERMINED = "undetermined"


class InconsistentTriangle(ValueError):
    """No exact triangle exists with the given graded ranks."""


@dataclass(frozen=True)
class TriangleForce:
    """Per-map verdicts around an exact triangle M1 -> M2 -> M3 -> M1."""

    ranks: tuple[int, int, int]
    verdicts: tuple[str, str, str]

    def verdict(self, index: int) -> str:
        return self.verdicts[index]


def exact_triangle_force(modules, shifts) -> TriangleForce:
    """Force map behaviour from exactness of a rank/grading triangle.

    ``modules`` are three graded rank tables, ``shifts`` the grading
    shifts of the maps M1 -> M2, M2 -> M3, M3 -> M1.  The total ranks of
    the maps are pinned by exactness; a map is forced zero when its rank
    is zero, and forced injective on the top summand of its domain when
    nothing can map onto that summand: the incoming module has no rank in
    the one grading that would hit the top.
    """
    tables = [
        {grading(g): int(r) for g, r in m.items() if r} for m in modules
    ]
    dims = [sum(t.values()) for t in tables]
    doubled = [
        dims[0] + dims[1] - dims[2],
        dims[1] + dims[2] - dims[0],
        dims[2] + dims[0] - dims[1],
    ]
    if any(d < 0 or d % 2 for d in doubled):
        raise InconsistentTriangle(
            f"graded ranks {dims} admit no exact triangle"
        )
    ranks = tuple(d // 2 for d in doubled)
    shifts = [grading(s) for s in shifts]
    verdicts = []
    for i in range(3):
        if ranks[i] == 0:
            verdicts.append(FORCED_ZERO)
            continue
        source = tables[i]
        incoming = tables[(i - 1) % 3]
        shift_in = shifts[(i - 1) % 3]
        if source:
            top = max(source)
            if incoming.get(top - shift_in, 0) == 0:
                verdicts.append(FORCED_INJECTIVE_TOP)
                continue
        verdicts.append(UNDETERMINED)
    return TriangleForce(ranks=ranks, verdicts=tuple(verdicts))
