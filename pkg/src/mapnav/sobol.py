"""Quasi-random space-filling sequences and sampling plans.

The generator produces the classic base-2 digital sequence in Gray-code
order: point i is obtained from point i-1 by XOR-ing one direction number
per dimension. The first coordinate is the van der Corput sequence; higher
dimensions use the published Joe-Kuo order-6 primitive-polynomial
parameters, embedded below for dimensions 2..64.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import DesignSpace

BITS = 32
MAX_DIMENSION = 64

# (a, (m_1..m_s)) per dimension 2..64, from the Joe-Kuo order-6 table.
# a encodes the inner coefficients of the degree-s primitive polynomial.
_JOE_KUO: tuple[tuple[int, tuple[int, ...]], ...] = (
    (0, (1,)),
    (1, (1, 3)),
    (1, (1, 3, 1)),
    (2, (1, 1, 1)),
    (1, (1, 1, 3, 3)),
    (4, (1, 3, 5, 13)),
    (2, (1, 1, 5, 5, 17)),
    (4, (1, 1, 5, 5, 5)),
    (7, (1, 1, 7, 11, 19)),
    (11, (1, 1, 5, 1, 1)),
    (13, (1, 1, 1, 3, 11)),
    (14, (1, 3, 5, 5, 31)),
    (1, (1, 3, 3, 9, 7, 49)),
    (13, (1, 1, 1, 15, 21, 21)),
    (16, (1, 3, 1, 13, 27, 49)),
    (19, (1, 1, 1, 15, 7, 5)),
    (22, (1, 3, 1, 15, 13, 25)),
    (25, (1, 1, 5, 5, 19, 61)),
    (1, (1, 3, 7, 11, 23, 15, 103)),
    (4, (1, 3, 7, 13, 13, 15, 69)),
    (7, (1, 1, 3, 13, 7, 35, 63)),
    (8, (1, 3, 5, 9, 1, 25, 53)),
    (14, (1, 3, 1, 13, 9, 35, 107)),
    (19, (1, 3, 1, 5, 27, 61, 31)),
    (21, (1, 1, 5, 11, 19, 41, 61)),
    (28, (1, 3, 5, 3, 3, 13, 69)),
    (31, (1, 1, 7, 13, 1, 19, 1)),
    (32, (1, 3, 7, 5, 13, 19, 59)),
    (37, (1, 1, 3, 9, 25, 29, 41)),
    (41, (1, 3, 5, 13, 23, 1, 55)),
    (42, (1, 3, 7, 3, 13, 59, 17)),
    (50, (1, 3, 1, 3, 5, 53, 69)),
    (55, (1, 1, 5, 5, 23, 33, 13)),
    (56, (1, 1, 7, 7, 1, 61, 123)),
    (59, (1, 1, 7, 9, 13, 61, 49)),
    (62, (1, 3, 3, 5, 3, 55, 33)),
    (14, (1, 3, 1, 15, 31, 13, 49, 245)),
    (21, (1, 3, 5, 15, 31, 59, 63, 97)),
    (22, (1, 3, 1, 11, 11, 11, 77, 249)),
    (38, (1, 3, 1, 11, 27, 43, 71, 9)),
    (47, (1, 1, 7, 15, 21, 11, 81, 45)),
    (49, (1, 3, 7, 3, 25, 31, 65, 79)),
    (50, (1, 3, 1, 1, 19, 11, 3, 205)),
    (52, (1, 1, 5, 9, 19, 21, 29, 157)),
    (56, (1, 3, 7, 11, 1, 33, 89, 185)),
    (67, (1, 3, 3, 3, 15, 9, 79, 71)),
    (70, (1, 3, 7, 11, 15, 39, 119, 27)),
    (84, (1, 1, 3, 1, 11, 31, 97, 225)),
    (97, (1, 1, 1, 3, 23, 43, 57, 177)),
    (103, (1, 3, 7, 7, 17, 17, 37, 71)),
    (115, (1, 3, 1, 5, 27, 63, 123, 213)),
    (122, (1, 1, 3, 5, 11, 43, 53, 133)),
    (8, (1, 3, 5, 5, 29, 17, 47, 173, 479)),
    (13, (1, 3, 3, 11, 3, 1, 109, 9, 69)),
    (16, (1, 1, 1, 5, 17, 39, 23, 5, 343)),
    (22, (1, 3, 1, 5, 25, 15, 31, 103, 499)),
    (25, (1, 1, 1, 11, 11, 17, 63, 105, 183)),
    (44, (1, 1, 5, 11, 9, 29, 97, 231, 363)),
    (47, (1, 1, 5, 15, 19, 45, 41, 7, 383)),
    (52, (1, 3, 7, 7, 31, 19, 83, 137, 221)),
    (55, (1, 1, 1, 3, 23, 15, 111, 223, 83)),
    (59, (1, 1, 5, 13, 31, 15, 55, 25, 161)),
    (62, (1, 1, 3, 13, 25, 47, 39, 87, 257)),
)


def direction_integers(dim_index: int, n_bits: int = BITS) -> np.ndarray:
    """Direction numbers for one dimension as left-aligned n_bits integers.

    dim_index 0 is the van der Corput dimension; higher indices use the
    embedded table. The recurrence extends the s published m-values:
    m_k = 2 a_1 m_{k-1} XOR 4 a_2 m_{k-2} XOR ... XOR 2^s m_{k-s} XOR m_{k-s}.
    """
    if not (0 <= dim_index < MAX_DIMENSION):
        raise ValueError(
            f"dimension index {dim_index} outside the direction-number table "
            f"(supported: 0..{MAX_DIMENSION - 1})"
        )
    v = np.zeros(n_bits, dtype=np.uint64)
    if dim_index == 0:
        for k in range(n_bits):
            v[k] = 1 << (BITS - 1 - k)
        return v
    a, m_init = _JOE_KUO[dim_index - 1]
    s = len(m_init)
    m = list(m_init)
    for k in range(s, n_bits):
        new = m[k - s] ^ (m[k - s] << s)
        for j in range(1, s):
            if (a >> (s - 1 - j)) & 1:
                new ^= m[k - j] << j
        m.append(new)
    for k in range(n_bits):
        v[k] = m[k] << (BITS - 1 - k)
    return v


class SobolSequence:
    """Stateful generator over [0, 1)^dim, Gray-code ordering, index 0 = origin."""

    def __init__(self, dim: int):
        if not (1 <= dim <= MAX_DIMENSION):
            raise ValueError(f"dimension must be in 1..{MAX_DIMENSION}, got {dim}")
        self.dim = dim
        self._v = np.stack([direction_integers(j) for j in range(dim)])  # (dim, BITS)
        self._state = np.zeros(dim, dtype=np.uint64)
        self._cursor = 0

    @property
    def cursor(self) -> int:
        """Index of the next point to be generated."""
        return self._cursor

    def take(self, n: int) -> np.ndarray:
        """Next n points as an (n, dim) float64 array."""
        if n < 0:
            raise ValueError("n must be non-negative")
        if self._cursor + n > 2**BITS:
            raise ValueError("sequence exhausted: cursor would exceed 2^32")
        out = np.empty((n, self.dim), dtype=np.float64)
        scale = 2.0 ** -BITS
        state = self._state
        v = self._v
        for row in range(n):
            i = self._cursor
            if i == 0:
                state[:] = 0
            else:
                # lowest zero bit of i-1 names the direction number to fold in
                c = (~(i - 1) & i).bit_length() - 1
                state ^= v[:, c]
            out[row] = state * scale
            self._cursor += 1
        return out

    def next_point(self) -> np.ndarray:
        return self.take(1)[0]


def unit_samples(dim: int, n: int, skip_first: bool = True) -> np.ndarray:
    """First n points of a fresh sequence; skip_first drops the all-zero origin."""
    seq = SobolSequence(dim)
    if skip_first:
        seq.take(1)
    return seq.take(n)


@dataclass(frozen=True)
class SamplePlan:
    """A reproducible design-of-experiments request against a design space."""

    space: DesignSpace
    n_samples: int
    skip_first: bool = True

    def __post_init__(self) -> None:
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.space.dimension > MAX_DIMENSION:
            raise ValueError(
                f"space has {self.space.dimension} decision variables; "
                f"the direction-number table supports {MAX_DIMENSION}"
            )

    def unit_points(self) -> np.ndarray:
        return unit_samples(self.space.dimension, self.n_samples, self.skip_first)


def sample(plan: SamplePlan) -> list[dict]:
    """Generate the plan's decision vectors in physical units."""
    pts = plan.unit_points()
    return [plan.space.denormalize(row) for row in pts]
