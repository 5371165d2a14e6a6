from typing import Any

import structlog

from khrefine.algebra.matrices import make_matrix
from khrefine.models.complexes import GradedComplex

log = structlog.get_logger()


def _is_unit(ring, c: Any) -> bool:
    if ring.is_field:
        return bool(c)
    return c in (1, -1)


def gaussian_eliminate(complex_: GradedComplex) -> GradedComplex:
    """
    Cancel pairs x -> y joined by a unit entry of δ with j(x) = j(y).

    After cancelling, every other z with δ(z, y) ≠ 0 is updated by
    δ(z) -= δ(z, y)·δ(x, y)^{-1}·δ(x), and x, y are dropped. The result is
    chain homotopy equivalent to the input through filtered maps, so homology
    ranks (per bigrading for the Khovanov flavor) are unchanged. Generators
    keep their enhanced-state labels but the differential is no longer the
    cube differential.
    """
    ring = complex_.ring
    degrees = complex_.degrees
    alive = {h: set(range(complex_.dimension(h))) for h in degrees}
    out: dict[int, dict[int, dict[int, Any]]] = {}
    into: dict[int, dict[int, set[int]]] = {h: {} for h in degrees}
    for h in degrees:
        if h + 1 not in alive:
            continue
        out[h] = {}
        for x, row in enumerate(complex_.differential(h).rows):
            entries = dict(ring.items(row))
            out[h][x] = entries
            for y in entries:
                into[h + 1].setdefault(y, set()).add(x)

    cancelled = 0
    for h in degrees:
        if h not in out:
            continue
        qs_h = complex_.quantum_gradings(h)
        qs_next = complex_.quantum_gradings(h + 1)
        for x in sorted(alive[h]):
            row_x = out[h][x]
            y = next(
                (y for y in sorted(row_x) if qs_next[y] == qs_h[x] and _is_unit(ring, row_x[y])),
                None,
            )
            if y is None:
                continue
            inverse = ring.inverse(row_x[y])
            del out[h][x]
            for z in sorted(into[h + 1].get(y, set()) - {x}):
                row_z = out[h][z]
                factor = row_z[y] * inverse
                for t, value in row_x.items():
                    new = ring.element(row_z.get(t, 0) - factor * value)
                    if new:
                        row_z[t] = new
                        into[h + 1].setdefault(t, set()).add(z)
                    else:
                        row_z.pop(t, None)
                        into[h + 1].get(t, set()).discard(z)
            for t in row_x:
                into[h + 1][t].discard(x)
            for w in into[h].pop(x, set()):
                out[h - 1][w].pop(x, None)
            if h + 1 in out:
                for t in out[h + 1].pop(y):
                    into[h + 2][t].discard(y)
            into[h + 1].pop(y, None)
            alive[h].discard(x)
            alive[h + 1].discard(y)
            cancelled += 1

    kept = {h: sorted(alive[h]) for h in degrees}
    position = {h: {old: new for new, old in enumerate(kept[h])} for h in degrees}
    generators = {h: [complex_.generators[h][i] for i in kept[h]] for h in degrees}
    qgradings = {h: [complex_.qgradings[h][i] for i in kept[h]] for h in degrees}
    differentials = {}
    for h in out:
        rows = [
            ring.vector((position[h + 1][t], c) for t, c in out[h][x].items())
            for x in kept[h]
        ]
        differentials[h] = make_matrix(ring, len(kept[h]), len(kept[h + 1]), rows)
    log.debug(
        "Simplified complex",
        diagram=complex_.diagram.name,
        cancelled=cancelled,
        remaining=sum(len(k) for k in kept.values()),
    )
    return GradedComplex(complex_.diagram, complex_.flavor, ring, generators, qgradings, differentials)
