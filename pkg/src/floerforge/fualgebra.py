"""Exact homological algebra for free graded chain complexes over F2[U].

Everything here is exact: gradings are ``fractions.Fraction``, coefficients
live in F2 (an entry is present or absent), and the variable U carries
grading -2.  A differential entry from generator ``x`` to generator ``y``
is a single monomial ``U^p``; homogeneity forces the exponent
``p = (maslov(x) - 1 - maslov(y)) / 2``, so a sum of distinct powers
between the same pair of generators can never arise in a homogeneous
complex (two contributions with the same endpoints have equal exponent
and cancel mod 2).

Homology of a free complex is computed by change of basis alone:

1. cancel every U^0 entry (the cancellation lemma), then
2. on the resulting minimal complex, pivot on entries of minimal
   U-exponent.  F2[U] is a local PID, so this Smith-style sweep
   terminates and splits the complex into free summands and pairs
   ``partner -> U^k . top``.

The result is reported as an :class:`FUDecomposition`: free summands
(one grading each) plus torsion summands F2[U]/U^k (top grading and
length).

>>> c = FreeComplex([("y", Fraction(-4)), ("x", Fraction(-1))],
...                 {"y": {"x": 2}})
>>> homology_decomposition(c)
FUDecomposition(towers=(), torsion=((Fraction(-1, 1), 2),))
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional

Grading = Fraction

U_DEGREE = -2


def grading(value) -> Fraction:
    """Coerce ints, strings like ``"-3/2"``, or Fractions to an exact grading."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"not an exact grading: {value!r}")


def format_grading(g: Fraction) -> str:
    """Canonical fraction string: ``"0"``, ``"2"``, ``"-3/2"``."""
    g = Fraction(g)
    if g.denominator == 1:
        return str(g.numerator)
    return f"{g.numerator}/{g.denominator}"


class InvalidComplex(ValueError):
    """Raised when an operation is handed a complex that fails validation."""


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def require(self, what: str = "complex"):
        if not self.ok:
            detail = "; ".join(self.violations)
            raise InvalidComplex(f"invalid {what}: {detail}")


class FreeComplex:
    """A finitely generated free chain complex over F2[U].

    ``generators`` is an ordered list of ``(name, maslov)`` pairs and
    ``differential`` maps source name -> {target name: U-exponent}.
    Instances are treated as immutable values; all operations return
    new complexes.
    """

    __slots__ = ("generators", "maslov", "differential")

    def __init__(self, generators, differential=None):
        gens = []
        maslov = {}
        for name, m in generators:
            if name in maslov:
                raise ValueError(f"duplicate generator name {name!r}")
            gens.append(name)
            maslov[name] = grading(m)
        self.generators: tuple[str, ...] = tuple(gens)
        self.maslov: dict[str, Fraction] = maslov
        diff = {}
        for src, row in (differential or {}).items():
            if row:
                diff[src] = {tgt: int(p) for tgt, p in row.items()}
        self.differential: dict[str, dict[str, int]] = diff

    def entry(self, src: str, tgt: str) -> Optional[int]:
        return self.differential.get(src, {}).get(tgt)

    def entries(self):
        for src, row in self.differential.items():
            for tgt, p in row.items():
                yield src, tgt, p

    def graded_counts(self) -> dict[Fraction, int]:
        counts: dict[Fraction, int] = {}
        for g in self.generators:
            m = self.maslov[g]
            counts[m] = counts.get(m, 0) + 1
        return counts

    def shift(self, by) -> "FreeComplex":
        """The same complex with every grading shifted up by ``by``."""
        by = grading(by)
        return FreeComplex(
            [(g, self.maslov[g] + by) for g in self.generators],
            self.differential,
        )

    def __eq__(self, other):
        if not isinstance(other, FreeComplex):
            return NotImplemented
        return (
            self.generators == other.generators
            and self.maslov == other.maslov
            and self.differential == other.differential
        )

    def __repr__(self):
        return f"FreeComplex({len(self.generators)} generators, {sum(len(r) for r in self.differential.values())} entries)"

    def to_json(self) -> dict:
        return {
            "generators": [
                {"name": g, "maslov": format_grading(self.maslov[g])}
                for g in self.generators
            ],
            "differential": sorted(
                (
                    {"from": src, "to": tgt, "upower": p}
                    for src, tgt, p in self.entries()
                ),
                key=lambda e: (e["from"], e["to"]),
            ),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FreeComplex":
        gens = [(g["name"], grading(g["maslov"])) for g in data["generators"]]
        diff: dict[str, dict[str, int]] = {}
        for e in data.get("differential", ()):
            diff.setdefault(e["from"], {})[e["to"]] = int(e["upower"])
        return cls(gens, diff)


def validate_complex(c: FreeComplex) -> ValidationReport:
    """Check d^2 = 0 and grading homogeneity, listing every violation."""
    violations = []
    for src, tgt, p in c.entries():
        if tgt not in c.maslov:
            violations.append(f"entry {src}->{tgt}: unknown target")
            continue
        if src not in c.maslov:
            violations.append(f"entry {src}->{tgt}: unknown source")
            continue
        if p < 0:
            violations.append(f"entry {src}->{tgt}: negative U-power {p}")
        if c.maslov[tgt] + U_DEGREE * p != c.maslov[src] - 1:
            violations.append(
                f"entry {src}->U^{p}.{tgt}: grading {format_grading(c.maslov[src])} "
                f"-> {format_grading(c.maslov[tgt] + U_DEGREE * p)} is not degree -1"
            )
    # d^2 over F2[U]: contributions to (src, tgt) cancel in pairs.
    for src in c.differential:
        square: dict[str, set[int]] = {}
        for mid, p in c.differential[src].items():
            for tgt, q in c.differential.get(mid, {}).items():
                square.setdefault(tgt, set()).symmetric_difference_update({p + q})
        for tgt, powers in square.items():
            if powers:
                violations.append(f"d^2 from {src} to {tgt} has surviving powers {sorted(powers)}")
    return ValidationReport(ok=not violations, violations=tuple(violations))


def tensor_complexes(c1: FreeComplex, c2: FreeComplex, name=None) -> FreeComplex:
    """Tensor product over F2[U]: gradings add, Leibniz differential.

    Generator names are ``(a|b)``; pass ``name`` to customise.
    """
    validate_complex(c1).require("left tensor factor")
    validate_complex(c2).require("right tensor factor")
    if name is None:
        name = lambda a, b: f"({a}|{b})"
    gens = []
    for a in c1.generators:
        for b in c2.generators:
            gens.append((name(a, b), c1.maslov[a] + c2.maslov[b]))
    diff: dict[str, dict[str, int]] = {}
    for a in c1.generators:
        for b in c2.generators:
            row: dict[str, int] = {}
            for tgt, p in c1.differential.get(a, {}).items():
                row[name(tgt, b)] = p
            for tgt, p in c2.differential.get(b, {}).items():
                row[name(a, tgt)] = p
            if row:
                diff[name(a, b)] = row
    return FreeComplex(gens, diff)


@dataclass(frozen=True)
class FUDecomposition:
    """A finitely generated graded F2[U]-module, split into summands.

    ``towers`` lists one grading per free summand; ``torsion`` lists
    ``(top_grading, length)`` for each F2[U]/U^k summand, the top grading
    being that of the top nonzero element.  Both are stored sorted
    (gradings descending) so equality is multiset equality.
    """

    towers: tuple[Fraction, ...] = ()
    torsion: tuple[tuple[Fraction, int], ...] = ()

    @staticmethod
    def make(towers: Iterable, torsion: Iterable) -> "FUDecomposition":
        tw = tuple(sorted((grading(t) for t in towers), reverse=True))
        to = tuple(
            sorted(((grading(g), int(k)) for g, k in torsion), key=lambda x: (-x[0], x[1]))
        )
        return FUDecomposition(tw, to)

    def shift(self, by) -> "FUDecomposition":
        by = grading(by)
        # A uniform shift preserves the stored ordering.
        return FUDecomposition(
            tuple(t + by for t in self.towers),
            tuple((g + by, k) for g, k in self.torsion),
        )

    def is_zero(self) -> bool:
        return not self.towers and not self.torsion

    def torsion_rank_table(self) -> dict[Fraction, int]:
        """Graded F-dimension of the torsion part (U spreads a length-k
        summand over gradings top, top-2, ..., top-2(k-1))."""
        table: dict[Fraction, int] = {}
        for top, k in self.torsion:
            for i in range(k):
                g = top + U_DEGREE * i
                table[g] = table.get(g, 0) + 1
        return table

    def to_json(self) -> dict:
        return {
            "towers": [format_grading(t) for t in sorted(self.towers)],
            "torsion": [
                {"grading": format_grading(g), "length": k}
                for g, k in sorted(self.torsion)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "FUDecomposition":
        return cls.make(
            data.get("towers", ()),
            ((e["grading"], e["length"]) for e in data.get("torsion", ())),
        )


class _Reducer:
    """Change-of-basis engine for free F2[U]-complexes.

    The one primitive is ``mix(g, h, s)``, the basis change
    ``g := g + U^s h`` (h kept).  It adjusts the differential out of g
    and reroutes arrows that hit g into arrows hitting h; both effects
    together are an exact change of basis, so d^2 = 0 is preserved.

    When ``track`` is set the reducer also maintains the inclusion
    ``iota`` (surviving basis vector expressed in the original basis)
    and the projection ``pi`` (original generator expressed in the
    surviving basis), which turn the reduction into an explicit
    homotopy equivalence once cancelled pairs are split off.
    """

    def __init__(self, c: FreeComplex, alexander=None, track=False):
        self.maslov = dict(c.maslov)
        self.alexander = dict(alexander) if alexander is not None else None
        self.diff: dict[str, dict[str, int]] = {
            src: dict(row) for src, row in c.differential.items()
        }
        self.into: dict[str, set[str]] = {}
        for src, row in self.diff.items():
            for tgt in row:
                self.into.setdefault(tgt, set()).add(src)
        self.alive: list[str] = list(c.generators)
        self.alive_set = set(self.alive)
        self.torsion: list[tuple[Fraction, int]] = []
        self._created: list[tuple[str, str, int]] = []
        self.track = track
        if track:
            self.iota: dict[str, dict[str, int]] = {g: {g: 0} for g in c.generators}
            self.pi: dict[str, dict[str, int]] = {g: {g: 0} for g in c.generators}
            self.pi_into: dict[str, set[str]] = {g: {g} for g in c.generators}

    # -- low-level dictionary surgery ------------------------------------

    def _toggle(self, src: str, tgt: str, p: int):
        row = self.diff.setdefault(src, {})
        if tgt in row:
            if row[tgt] != p:
                raise AssertionError(
                    f"inhomogeneous toggle {src}->{tgt}: powers {row[tgt]} vs {p}"
                )
            del row[tgt]
            if not row:
                del self.diff[src]
            self.into[tgt].discard(src)
        else:
            if p < 0:
                raise AssertionError(f"negative U-power in toggle {src}->{tgt}")
            row[tgt] = p
            self.into.setdefault(tgt, set()).add(src)
            self._created.append((src, tgt, p))

    def mix(self, g: str, h: str, s: int):
        """Basis change g := g + U^s h."""
        if self.maslov[g] != self.maslov[h] + U_DEGREE * s:
            raise AssertionError(f"inhomogeneous mix {g} += U^{s}.{h}")
        if self.alexander is not None:
            if self.alexander[h] - s > self.alexander[g]:
                raise AssertionError(f"filtration-breaking mix {g} += U^{s}.{h}")
        for tgt, p in list(self.diff.get(h, {}).items()):
            self._toggle(g, tgt, p + s)
        for y in list(self.into.get(g, set())):
            self._toggle(y, h, self.diff[y][g] + s)
        if self.track:
            for old, p in list(self.iota[h].items()):
                row = self.iota[g]
                key = p + s
                if old in row:
                    if row[old] != key:
                        raise AssertionError("inhomogeneous iota update")
                    del row[old]
                else:
                    row[old] = key
            for e in list(self.pi_into.get(g, set())):
                c = self.pi[e][g]
                row = self.pi[e]
                key = c + s
                if h in row:
                    if row[h] != key:
                        raise AssertionError("inhomogeneous pi update")
                    del row[h]
                    self.pi_into[h].discard(e)
                else:
                    row[h] = key
                    self.pi_into.setdefault(h, set()).add(e)

    def _drop(self, g: str):
        self.alive_set.discard(g)
        for tgt in list(self.diff.get(g, {})):
            self.into[tgt].discard(g)
        self.diff.pop(g, None)
        for src in list(self.into.get(g, set())):
            row = self.diff.get(src)
            if row and g in row:
                del row[g]
                if not row:
                    del self.diff[src]
        self.into.pop(g, None)
        if self.track:
            self.iota.pop(g, None)
            for e in list(self.pi_into.get(g, set())):
                del self.pi[e][g]
            self.pi_into.pop(g, None)

    # -- pivoting ---------------------------------------------------------

    def _split_pair(self, alpha: str, beta: str, k: int):
        """Clear row and column of a pivot alpha -> U^k beta, then delete.

        After clearing, d(alpha) = U^k beta exactly, nothing else touches
        the pair, and d(beta) = 0 is forced by d^2 = 0 and freeness.
        """
        for z in list(self.into.get(beta, set())):
            if z != alpha:
                self.mix(z, alpha, self.diff[z][beta] - k)
        for w, q in list(self.diff.get(alpha, {}).items()):
            if w != beta:
                self.mix(beta, w, q - k)
        if self.diff.get(alpha) != {beta: k}:
            raise AssertionError("pivot row failed to clear")
        if self.diff.get(beta):
            raise AssertionError("cancelled partner has nonzero differential")
        if self.into.get(alpha):
            raise AssertionError("arrows into a cleared pivot source")
        if k > 0:
            self.torsion.append((self.maslov[beta], k))
        self._drop(alpha)
        self._drop(beta)

    def cancel_u0(self, same_alexander=False):
        """Cancel every U^0 entry, smallest (source, target) pair first.

        With ``same_alexander`` only entries with zero Alexander drop are
        cancelled (filtered reduction); the triggered basis changes are
        then automatically filtered.
        """
        heap = []
        for src, tgt, p in list(self._live_entries()):
            if p == 0 and self._u0_ok(src, tgt, same_alexander):
                heapq.heappush(heap, (src, tgt))
        while heap:
            src, tgt = heapq.heappop(heap)
            if self.diff.get(src, {}).get(tgt) != 0:
                continue
            if src not in self.alive_set or tgt not in self.alive_set:
                continue
            self._created.clear()
            self._split_pair(src, tgt, 0)
            for s2, t2, p2 in self._created:
                if p2 == 0 and self._u0_ok(s2, t2, same_alexander) and self.diff.get(s2, {}).get(t2) == 0:
                    heapq.heappush(heap, (s2, t2))

    def _u0_ok(self, src, tgt, same_alexander):
        if not same_alexander:
            return True
        return self.alexander is not None and self.alexander[src] == self.alexander[tgt]

    def _live_entries(self):
        for src, row in self.diff.items():
            for tgt, p in row.items():
                yield src, tgt, p

    def diagonalize(self):
        """Pivot on minimal-exponent entries until the differential is empty."""
        heap = [(p, src, tgt) for src, tgt, p in self._live_entries()]
        heapq.heapify(heap)
        while heap:
            p, src, tgt = heapq.heappop(heap)
            if self.diff.get(src, {}).get(tgt) != p:
                continue
            if src not in self.alive_set or tgt not in self.alive_set:
                continue
            self._created.clear()
            self._split_pair(src, tgt, p)
            for s2, t2, p2 in self._created:
                if self.diff.get(s2, {}).get(t2) == p2:
                    heapq.heappush(heap, (p2, s2, t2))

    def current_complex(self) -> FreeComplex:
        alive = [g for g in self.alive if g in self.alive_set]
        return FreeComplex(
            [(g, self.maslov[g]) for g in alive],
            {
                src: dict(row)
                for src, row in self.diff.items()
                if src in self.alive_set
            },
        )


def reduce_u0(c: FreeComplex) -> FreeComplex:
    """Cancel all U^0 entries; the result is a minimal model of ``c``."""
    r = _Reducer(c)
    r.cancel_u0()
    return r.current_complex()


def split_components(c: FreeComplex) -> list[FreeComplex]:
    """Direct-sum decomposition along connectivity of the differential."""
    parent = {g: g for g in c.generators}

    def find(g):
        while parent[g] != g:
            parent[g] = parent[parent[g]]
            g = parent[g]
        return g

    for src, tgt, _p in c.entries():
        ra, rb = find(src), find(tgt)
        if ra != rb:
            parent[ra] = rb
    buckets: dict[str, list[str]] = {}
    for g in c.generators:
        buckets.setdefault(find(g), []).append(g)
    if len(buckets) <= 1:
        return [c]
    rows_by_root: dict[str, dict] = {root: {} for root in buckets}
    for src, row in c.differential.items():
        rows_by_root[find(src)][src] = row
    parts = []
    for root in sorted(buckets, key=lambda r: buckets[r][0]):
        members = buckets[root]
        parts.append(
            FreeComplex(
                [(g, c.maslov[g]) for g in members],
                rows_by_root[root],
            )
        )
    return parts


def homology_decomposition(c: FreeComplex) -> FUDecomposition:
    """Homology of a free complex as towers (free part) plus torsion.

    Computed componentwise (homology is additive over direct summands).
    The torsion summand produced by a pivot ``alpha -> U^k beta`` has its
    top element in the grading of ``beta``:

    >>> c = FreeComplex([("y", Fraction(-1)), ("x", Fraction(0))], {"y": {"x": 1}})
    >>> homology_decomposition(c)
    FUDecomposition(towers=(), torsion=((Fraction(0, 1), 1),))
    """
    validate_complex(c).require()
    towers = []
    torsion = []
    for part in split_components(c):
        r = _Reducer(part)
        r.cancel_u0()
        r.diagonalize()
        towers.extend(r.maslov[g] for g in r.alive if g in r.alive_set)
        torsion.extend(r.torsion)
    return FUDecomposition.make(towers, torsion)


def plus_presentation(h: FUDecomposition, convention: str = "minus") -> FUDecomposition:
    """Re-express a decomposition in plus-flavoured (tower) terms.

    The engine computes homology of free complexes built from subcomplex
    regions of U-localised complexes.  Presenting that answer in the
    quotient-region (plus) normalisation keeps each free summand's
    generator grading as the tower's bottom grading -- the constant is
    calibrated once by the split 0-framed pipeline on the trivial knot,
    which must come out as towers at +1/2 and -1/2 -- while every torsion
    summand's top grading moves down by 1 (the connecting map of the
    region sequence has degree -1).  With ``convention="plus"`` the input
    already uses the quotient normalisation and passes through unchanged.
    """
    if convention == "plus":
        return h
    if convention != "minus":
        raise ValueError(f"unknown convention {convention!r}")
    # The torsion shift is uniform, so the stored ordering survives.
    return FUDecomposition(
        h.towers,
        tuple((g - 1, k) for g, k in h.torsion),
    )
