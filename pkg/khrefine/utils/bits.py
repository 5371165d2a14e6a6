def popcount(x: int) -> int:
    return bin(x).count("1")


def reverse_bits(x: int, width: int) -> int:
    """Bit i of x becomes bit width-1-i; sorting by it orders masks lexicographically from bit 0."""
    out = 0
    for _ in range(width):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


def from_bit_tuple(bits) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"Bit {i} must be 0 or 1, got {b!r}")
        out |= b << i
    return out
