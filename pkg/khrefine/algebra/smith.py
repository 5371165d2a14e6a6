from dataclasses import dataclass
from typing import Optional, Sequence

import sympy

from khrefine.algebra.matrices import Matrix
from khrefine.algebra.rings import IntegerRing

_Z = IntegerRing()


def exgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _lincomb(a: int, x: dict[int, int], b: int, y: dict[int, int]) -> dict[int, int]:
    return _Z.axpy(_Z.scale(x, a), b, y)


def to_invariant_factors(diagonal: Sequence[int]) -> list[int]:
    """Turn any nonzero diagonal into the divisibility chain d1 | d2 | ... of the same group."""
    diagonal = [abs(d) for d in diagonal if d]
    exponents: dict[int, list[int]] = {}
    for d in diagonal:
        for prime, exponent in sympy.factorint(d).items():
            exponents.setdefault(prime, []).append(exponent)
    factors = [1] * len(diagonal)
    for prime, powers in exponents.items():
        powers.sort(reverse=True)
        for k, exponent in enumerate(powers):
            factors[len(factors) - 1 - k] *= prime ** exponent
    return factors


def elementary_divisors(factors: Sequence[int]) -> list[int]:
    """Prime-power decomposition of the torsion described by invariant factors."""
    out = []
    for d in factors:
        if abs(d) > 1:
            out.extend(prime ** exponent for prime, exponent in sympy.factorint(abs(d)).items())
    return sorted(out)


def invariant_factors(matrix: Matrix) -> list[int]:
    """
    Nonzero invariant factors of an integer matrix, without transforms.

    Pivots are chosen with the smallest absolute value, preferring units, which keeps
    entries small on the sparse +-1/+-2 matrices of Khovanov complexes.
    """
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for r, row in enumerate(matrix.rows):
        entries = {c: int(v) for c, v in matrix.ring.items(row) if int(v)}
        if entries:
            rows[r] = entries
            for c in entries:
                cols.setdefault(c, set()).add(r)

    diagonal = []
    while rows:
        r, c, a = _smallest_pivot(rows)

        # Clear the pivot column with row operations
        clean = True
        for other in sorted(cols[c] - {r}):
            q = rows[other][c] // a
            _add_row(rows, cols, other, r, -q)
            if other in rows and c in rows[other]:
                clean = False
        if not clean:
            continue

        # The pivot column now meets only the pivot row, so column operations stay local
        pivot_row = rows[r]
        for c2 in [k for k in pivot_row if k != c]:
            remainder = pivot_row[c2] % a
            if remainder:
                pivot_row[c2] = remainder
                clean = False
            else:
                del pivot_row[c2]
                cols[c2].discard(r)
        if not clean:
            continue

        diagonal.append(abs(a))
        cols[c].discard(r)
        del rows[r]
    return to_invariant_factors(diagonal)


def _smallest_pivot(rows: dict[int, dict[int, int]]) -> tuple[int, int, int]:
    best: Optional[tuple[int, int, int]] = None
    for r, row in rows.items():
        for c, value in row.items():
            if best is None or abs(value) < abs(best[2]):
                best = (r, c, value)
                if abs(value) == 1:
                    return best
    assert best is not None
    return best


def _add_row(rows: dict[int, dict[int, int]], cols: dict[int, set[int]], target: int, source: int, q: int):
    row = rows[target]
    for c, value in rows[source].items():
        new = row.get(c, 0) + q * value
        if new:
            row[c] = new
            cols.setdefault(c, set()).add(target)
        else:
            row.pop(c, None)
            cols[c].discard(target)
    if not row:
        del rows[target]


@dataclass(frozen=True)
class SmithResult:
    """U·M·V = D with U, V unimodular and D diagonal with d1 | d2 | ..."""
    factors: tuple[int, ...]
    diagonal: list[list[int]]
    left: list[list[int]]
    right: list[list[int]]

    @property
    def rank(self) -> int:
        return len(self.factors)


def smith_normal_form(matrix: Matrix) -> SmithResult:
    """Dense Smith normal form with unimodular transforms; meant for small matrices."""
    m, n = matrix.nrows, matrix.ncols
    a = [[int(x) for x in row] for row in matrix.to_dense()]
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    v = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(target, source, q):
        a[target] = [x + q * y for x, y in zip(a[target], a[source])]
        u[target] = [x + q * y for x, y in zip(u[target], u[source])]

    def add_col(target, source, q):
        for row in a:
            row[target] += q * row[source]
        for row in v:
            row[target] += q * row[source]

    t = 0
    while t < min(m, n):
        candidates = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n) if a[i][j]]
        if not candidates:
            break
        _, i, j = min(candidates)
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // a[t][t]))
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // a[t][t]))
            leftovers = [(abs(a[i][t]), i, t) for i in range(t + 1, m) if a[i][t]]
            leftovers += [(abs(a[t][j]), t, j) for j in range(t + 1, n) if a[t][j]]
            if not leftovers:
                break
            _, i, j = min(leftovers)
            swap_rows(t, i)
            swap_cols(t, j)
        t += 1

    # Fix divisibility pairwise: diag(a, b) -> diag(g, ab/g)
    r = sum(1 for k in range(min(m, n)) if a[k][k])
    for i in range(r):
        for j in range(i + 1, r):
            x, y = a[i][i], a[j][j]
            if y % x == 0:
                continue
            g, s, t2 = exgcd(x, y)
            left = [[s, t2], [-y // g, x // g]]
            right = [[1, -t2 * y // g], [1, s * x // g]]
            u[i], u[j] = (
                [left[0][0] * p + left[0][1] * q for p, q in zip(u[i], u[j])],
                [left[1][0] * p + left[1][1] * q for p, q in zip(u[i], u[j])],
            )
            for row in v:
                row[i], row[j] = (
                    row[i] * right[0][0] + row[j] * right[1][0],
                    row[i] * right[0][1] + row[j] * right[1][1],
                )
            a[i][i], a[j][j] = g, x * y // g

    for k in range(r):
        if a[k][k] < 0:
            a[k][k] = -a[k][k]
            u[k] = [-x for x in u[k]]

    return SmithResult(
        factors=tuple(a[k][k] for k in range(r)),
        diagonal=a,
        left=u,
        right=v,
    )


class IntegerEchelon:
    """
    Integer row echelon form built by unimodular row operations.

    Pivots are leading (lowest) indices and are distinct. Clashing pivots are merged
    with the 2x2 unimodular step [[s, t], [-b/g, a/g]], so the stored rows together
    with the zero rows met so far always form a unimodular transform of the input.
    """

    def __init__(self, track: bool = False):
        self.track = track
        self.rows: dict[int, dict[int, int]] = {}
        self.combos: dict[int, dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self.rows)

    def insert(self, v: dict[int, int], combo: Optional[dict[int, int]] = None) -> Optional[dict[int, int]]:
        """Insert a vector; returns the dependency combination when it reduces to zero."""
        v = {i: int(c) for i, c in v.items() if int(c)}
        if combo is None:
            combo = {}
        while v:
            p = min(v)
            row = self.rows.get(p)
            if row is None:
                if v[p] < 0:
                    v = _Z.scale(v, -1)
                    combo = _Z.scale(combo, -1)
                self.rows[p] = v
                if self.track:
                    self.combos[p] = combo
                return None
            a, b = row[p], v[p]
            if b % a == 0:
                q = b // a
                v = _Z.axpy(v, -q, row)
                if self.track:
                    combo = _Z.axpy(combo, -q, self.combos[p])
                continue
            g, s, t = exgcd(a, b)
            new_row = _lincomb(s, row, t, v)
            v = _lincomb(-b // g, row, a // g, v)
            if self.track:
                row_combo = self.combos[p]
                self.combos[p] = _lincomb(s, row_combo, t, combo)
                combo = _lincomb(-b // g, row_combo, a // g, combo)
            self.rows[p] = new_row
        return combo

    def rows_from(self, start: int) -> list[dict[int, int]]:
        """Stored rows whose pivot is at least `start`."""
        return [self.rows[p] for p in sorted(self.rows) if p >= start]


def integer_kernel(matrix: Matrix) -> list[dict[int, int]]:
    """A Z-basis of {x in Z^nrows : x·M = 0}."""
    echelon = IntegerEchelon(track=True)
    basis = []
    for r, row in enumerate(matrix.rows):
        dependency = echelon.insert(dict(matrix.ring.items(row)), {r: 1})
        if dependency is not None:
            basis.append(dependency)
    return basis


def _divides(g: int, h: int) -> bool:
    if g == 0:
        return h == 0
    return h % g == 0


@dataclass(frozen=True)
class AbelianGroup:
    """A finitely generated abelian group Z^free_rank ⊕ Z/t1 ⊕ ... with t1 | t2 | ... all > 1."""
    free_rank: int = 0
    torsion: tuple[int, ...] = ()

    @classmethod
    def cyclic(cls, m: int) -> 'AbelianGroup':
        """Z/m, with Z/0 = Z and Z/1 = 0."""
        if m == 0:
            return cls(free_rank=1)
        if abs(m) == 1:
            return cls()
        return cls(torsion=(abs(m),))

    @classmethod
    def from_factors(cls, factors: Sequence[int], free_rank: int = 0) -> 'AbelianGroup':
        return cls(free_rank=free_rank, torsion=tuple(d for d in to_invariant_factors(factors) if d > 1))

    @property
    def invariant_factors(self) -> tuple[int, ...]:
        """Invariant factors in increasing divisibility order, 0 standing for a copy of Z."""
        return self.torsion + (0,) * self.free_rank

    def __add__(self, other: 'AbelianGroup') -> 'AbelianGroup':
        return AbelianGroup.from_factors(self.torsion + other.torsion, self.free_rank + other.free_rank)

    def surjects_onto(self, target: 'AbelianGroup') -> bool:
        source_factors = self.invariant_factors
        target_factors = target.invariant_factors
        if len(target_factors) > len(source_factors):
            return False
        return all(
            _divides(g, h)
            for g, h in zip(reversed(target_factors), reversed(source_factors))
        )

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion


def cokernel_group(generators: Sequence[dict[int, int]], ambient_rank: int) -> AbelianGroup:
    """Z^ambient_rank modulo the span of the generators."""
    from khrefine.algebra.matrices import IntMatrix
    factors = invariant_factors(IntMatrix(_Z, len(generators), max(ambient_rank, 1), list(generators)))
    return AbelianGroup(
        free_rank=ambient_rank - len(factors),
        torsion=tuple(d for d in factors if d > 1),
    )
