import re
from fractions import Fraction
from typing import Any, ClassVar, Iterable, Optional, Sequence

import sympy

#: A sparse vector. Bit-packed `int` over F2, `dict[int, element]` otherwise.
Vec = Any


class Ring:
    """
    Coefficient ring descriptor and the sparse-vector arithmetic over it.

    Vectors are treated as immutable values: every operation returns a new
    vector. Indices are non-negative integers; the leading index of a vector
    is its lowest nonzero index.
    """

    #: Family id of the ring, used to look rings up by name. Set it in the subclass.
    id: ClassVar[str]

    name: str
    characteristic: int
    is_field: bool = True

    @classmethod
    def from_name(cls, name: str) -> Optional['Ring']:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Ring) and other.name == self.name

    def __hash__(self) -> int:
        return hash(self.name)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.name!r})"

    # Scalars

    def element(self, value: Any) -> Any:
        raise NotImplementedError

    def inverse(self, value: Any) -> Any:
        raise NotImplementedError

    def to_json(self, value: Any) -> Any:
        return int(value)

    # Vectors

    def zero(self) -> Vec:
        raise NotImplementedError

    def vector(self, entries: Iterable[tuple[int, Any]]) -> Vec:
        raise NotImplementedError

    def items(self, v: Vec) -> list[tuple[int, Any]]:
        raise NotImplementedError

    def entry(self, v: Vec, index: int) -> Any:
        raise NotImplementedError

    def leading(self, v: Vec) -> int:
        raise NotImplementedError

    def is_zero(self, v: Vec) -> bool:
        return not v

    def nnz(self, v: Vec) -> int:
        return len(v)

    def axpy(self, v: Vec, coefficient: Any, w: Vec) -> Vec:
        """Return v + coefficient * w."""
        raise NotImplementedError

    def scale(self, v: Vec, coefficient: Any) -> Vec:
        return self.axpy(self.zero(), coefficient, v)

    def add(self, v: Vec, w: Vec) -> Vec:
        return self.axpy(v, self.element(1), w)

    def sub(self, v: Vec, w: Vec) -> Vec:
        return self.axpy(v, self.element(-1), w)

    def window(self, v: Vec, start: int, stop: int) -> Vec:
        """Entries with index in [start, stop), shifted down by start."""
        return self.vector((i - start, c) for i, c in self.items(v) if start <= i < stop)

    def permute(self, v: Vec, positions: Sequence[int]) -> Vec:
        """Move the entry at index i to index positions[i]; entries mapped to -1 are dropped."""
        return self.vector((positions[i], c) for i, c in self.items(v) if positions[i] >= 0)

    def support(self, v: Vec) -> list[int]:
        return [i for i, _ in self.items(v)]

    def max_index(self, v: Vec) -> int:
        indices = self.support(v)
        return indices[-1] if indices else -1

    def dense(self, v: Vec, length: int) -> list[Any]:
        out = [self.element(0)] * length
        for i, c in self.items(v):
            out[i] = c
        return out

    def from_dense(self, values: Sequence[Any]) -> Vec:
        return self.vector((i, c) for i, c in enumerate(values))


class F2Ring(Ring):
    id = "f2"
    name = "f2"
    characteristic = 2

    @classmethod
    def from_name(cls, name: str) -> Optional['F2Ring']:
        return cls() if name == "f2" else None

    def element(self, value: Any) -> int:
        return int(value) % 2

    def inverse(self, value: Any) -> int:
        if value % 2 == 0:
            raise ZeroDivisionError("0 is not invertible in F2")
        return 1

    def zero(self) -> int:
        return 0

    def vector(self, entries: Iterable[tuple[int, Any]]) -> int:
        v = 0
        for i, c in entries:
            if int(c) % 2:
                v ^= 1 << i
        return v

    def items(self, v: int) -> list[tuple[int, int]]:
        out = []
        while v:
            low = v & -v
            out.append((low.bit_length() - 1, 1))
            v ^= low
        return out

    def entry(self, v: int, index: int) -> int:
        return (v >> index) & 1

    def leading(self, v: int) -> int:
        return (v & -v).bit_length() - 1

    def nnz(self, v: int) -> int:
        return bin(v).count("1")

    def axpy(self, v: int, coefficient: Any, w: int) -> int:
        return v ^ w if int(coefficient) % 2 else v

    def scale(self, v: int, coefficient: Any) -> int:
        return v if int(coefficient) % 2 else 0

    def add(self, v: int, w: int) -> int:
        return v ^ w

    def sub(self, v: int, w: int) -> int:
        return v ^ w

    def window(self, v: int, start: int, stop: int) -> int:
        return (v >> start) & ((1 << (stop - start)) - 1)

    def max_index(self, v: int) -> int:
        return v.bit_length() - 1


class _DictRing(Ring):
    """Rings whose vectors are `dict[int, element]` without stored zeros."""

    def reduce(self, value: Any) -> Any:
        raise NotImplementedError

    def element(self, value: Any) -> Any:
        return self.reduce(value)

    def zero(self) -> dict[int, Any]:
        return {}

    def vector(self, entries: Iterable[tuple[int, Any]]) -> dict[int, Any]:
        v: dict[int, Any] = {}
        for i, c in entries:
            c = self.reduce(v.get(i, 0) + c)
            if c:
                v[i] = c
            else:
                v.pop(i, None)
        return v

    def items(self, v: dict[int, Any]) -> list[tuple[int, Any]]:
        return sorted(v.items())

    def entry(self, v: dict[int, Any], index: int) -> Any:
        return v.get(index, self.reduce(0))

    def leading(self, v: dict[int, Any]) -> int:
        return min(v) if v else -1

    def axpy(self, v: dict[int, Any], coefficient: Any, w: dict[int, Any]) -> dict[int, Any]:
        coefficient = self.reduce(coefficient)
        out = dict(v)
        if not coefficient:
            return out
        for i, c in w.items():
            value = self.reduce(out.get(i, 0) + coefficient * c)
            if value:
                out[i] = value
            else:
                out.pop(i, None)
        return out

    def max_index(self, v: dict[int, Any]) -> int:
        return max(v) if v else -1


class PrimeFieldRing(_DictRing):
    id = "fp"

    def __init__(self, p: int):
        if p < 3 or p >= 1 << 16 or not sympy.isprime(p):
            raise ValueError(f"Unsupported prime field characteristic: {p}")
        self.characteristic = p
        self.name = f"f{p}"

    @classmethod
    def from_name(cls, name: str) -> Optional['PrimeFieldRing']:
        match = re.fullmatch(r"f(\d+)", name)
        if match is None or int(match.group(1)) == 2:
            return None
        return cls(int(match.group(1)))

    def reduce(self, value: Any) -> int:
        return int(value) % self.characteristic

    def inverse(self, value: Any) -> int:
        value = self.reduce(value)
        if not value:
            raise ZeroDivisionError(f"0 is not invertible in {self.name}")
        return pow(value, -1, self.characteristic)


class RationalRing(_DictRing):
    id = "q"
    name = "q"
    characteristic = 0

    @classmethod
    def from_name(cls, name: str) -> Optional['RationalRing']:
        return cls() if name == "q" else None

    def reduce(self, value: Any) -> Fraction:
        return Fraction(value)

    def inverse(self, value: Any) -> Fraction:
        return 1 / Fraction(value)

    def to_json(self, value: Any) -> Any:
        value = Fraction(value)
        return value.numerator if value.denominator == 1 else str(value)


class IntegerRing(_DictRing):
    id = "z"
    name = "z"
    characteristic = 0
    is_field = False

    @classmethod
    def from_name(cls, name: str) -> Optional['IntegerRing']:
        return cls() if name == "z" else None

    def reduce(self, value: Any) -> int:
        return int(value)

    def inverse(self, value: Any) -> int:
        if value not in (1, -1):
            raise ZeroDivisionError(f"{value} is not a unit in Z")
        return int(value)


def get_ring(name: str) -> Ring:
    name = name.strip().lower()
    for ring_class in Ring.__subclasses__() + _DictRing.__subclasses__():
        if ring_class is _DictRing:
            continue
        ring = ring_class.from_name(name)
        if ring is not None:
            return ring
    raise ValueError(f"Unknown ring: {name}")


def get_field(name: str) -> Ring:
    ring = get_ring(name)
    if not ring.is_field:
        raise ValueError(f"Ring {name} is not a field")
    return ring
