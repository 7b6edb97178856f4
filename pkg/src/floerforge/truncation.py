"""Truncated-coefficient homology oracle.

An independent check on :func:`floerforge.fualgebra.homology_decomposition`:
tensor a free complex with F2[U]/U^N, run plain Gaussian elimination over
F2 in each grading, and compare the graded dimensions against what the
claimed tower/torsion decomposition predicts.  A free summand contributes
one dimension in each of its top N gradings; a torsion summand of length k
contributes k dimensions at its top (the module) and k more shifted by the
truncation (the Tor correction).  Torsion multisets are pinned down by
agreement at two consecutive cutoffs.
"""

from __future__ import annotations

from fractions import Fraction

from .fualgebra import FUDecomposition, FreeComplex, U_DEGREE


def truncated_graded_dimensions(c: FreeComplex, cutoff: int) -> dict[Fraction, int]:
    """Graded dims of H(c tensor F2[U]/U^cutoff), by row reduction over F2."""
    basis = [(g, p) for g in c.generators for p in range(cutoff)]
    index = {b: i for i, b in enumerate(basis)}
    deg = {b: c.maslov[b[0]] + U_DEGREE * b[1] for b in basis}

    # Boundary of each basis vector as a bitmask over the full basis.
    bdry = []
    for g, p in basis:
        mask = 0
        for tgt, q in c.differential.get(g, {}).items():
            if p + q < cutoff:
                mask |= 1 << index[(tgt, p + q)]
        bdry.append(mask)

    def rank(masks):
        pivots = []
        r = 0
        for m in masks:
            for pv in pivots:
                low = pv & -pv
                if m & low:
                    m ^= pv
            if m:
                pivots.append(m)
                r += 1
        return r

    dims: dict[Fraction, int] = {}
    gradings = sorted(set(deg.values()))
    for d in gradings:
        here = [b for b in basis if deg[b] == d]
        boundary_rank = rank([bdry[index[b]] for b in here])
        image_rank = rank([bdry[index[b]] for b in basis if deg[b] == d + 1])
        dim = len(here) - boundary_rank - image_rank
        if dim:
            dims[d] = dim
    return dims


def expected_truncated_dimensions(h: FUDecomposition, cutoff: int) -> dict[Fraction, int]:
    """Graded dims that a decomposition predicts after tensoring with F2[U]/U^cutoff."""
    dims: dict[Fraction, int] = {}

    def add(g, n=1):
        dims[g] = dims.get(g, 0) + n

    for top in h.towers:
        for i in range(cutoff):
            add(top + U_DEGREE * i)
    for top, k in h.torsion:
        span = min(k, cutoff)
        for i in range(span):
            add(top + U_DEGREE * i)
        # Tor: kernel classes at the bottom of the truncated partner column.
        partner_top = top + 1 - 2 * k
        for p in range(max(cutoff - k, 0), cutoff):
            add(partner_top + U_DEGREE * p)
    return {g: n for g, n in dims.items() if n}
