"""Two-universal Toeplitz hashing over GF(2) and privacy amplification.

A hash from n bits to l bits is a Toeplitz matrix determined by n + l - 1
parameter bits (first row plus the rest of the first column).  The family of
all parameter choices is two-universal, which is what the privacy
amplification bound needs: extracting l bits from a source with conditional
smooth min-entropy H against side information of q qubits leaves a state
within (1/2) * 2^(-(H - q - l)/2) + 2*eps of uniform-and-independent.

verify_pa computes the family-averaged trace distance exactly (full
enumeration over all 2^(n+l-1) hashes), so it is only usable for n <= 8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import qsim
from .distrib import JointDistribution, smooth_min_entropy_conditional

SLACK = 1e-9


def _bits(value, n: int) -> np.ndarray:
    if isinstance(value, (int, np.integer)):
        return np.array([(int(value) >> (n - 1 - i)) & 1 for i in range(n)],
                        dtype=np.uint8)
    arr = np.asarray(value, dtype=np.uint8)
    if arr.shape != (n,) or arr.max(initial=0) > 1:
        raise ValueError(f"expected {n} bits, got {value!r}")
    return arr


@dataclass(frozen=True)
class ToeplitzHash:
    """Toeplitz matrix hash GF(2)^n -> GF(2)^l.

    ``first_row`` has n bits, ``first_col`` has l bits, and they share the
    top-left entry; the free parameters are the n + l - 1 bits
    first_row ++ first_col[1:].
    """

    input_bits: int
    output_bits: int
    first_row: tuple[int, ...]
    first_col: tuple[int, ...]

    def __init__(self, first_row: Sequence[int], first_col: Sequence[int]):
        row = tuple(int(b) & 1 for b in first_row)
        col = tuple(int(b) & 1 for b in first_col)
        if not row or not col:
            raise ValueError("row and column must be non-empty")
        if row[0] != col[0]:
            raise ValueError("first_row[0] and first_col[0] must agree")
        object.__setattr__(self, "input_bits", len(row))
        object.__setattr__(self, "output_bits", len(col))
        object.__setattr__(self, "first_row", row)
        object.__setattr__(self, "first_col", col)

    def matrix(self) -> np.ndarray:
        n, l = self.input_bits, self.output_bits
        t = np.empty((l, n), dtype=np.uint8)
        for i in range(l):
            for j in range(n):
                t[i, j] = self.first_col[i - j] if i >= j else self.first_row[j - i]
        return t

    @property
    def parameter_bits(self) -> tuple[int, ...]:
        return self.first_row + self.first_col[1:]

    def to_hex(self) -> str:
        """Compact descriptor: first_row then first_col packed to hex,
        most significant bit first, zero padded at the tail."""
        bits = self.first_row + self.first_col
        value = 0
        for b in bits:
            value = (value << 1) | b
        width = -(-len(bits) // 4)
        value <<= 4 * width - len(bits)
        return format(value, f"0{width}x")

    @classmethod
    def from_hex(cls, n: int, l: int, descriptor: str) -> "ToeplitzHash":
        total = n + l
        value = int(descriptor, 16)
        value >>= 4 * len(descriptor) - total
        bits = [(value >> (total - 1 - i)) & 1 for i in range(total)]
        return cls(bits[:n], bits[n:])

    def to_json(self) -> dict:
        return {"inputBits": self.input_bits, "outputBits": self.output_bits,
                "firstRow": list(self.first_row),
                "firstCol": list(self.first_col), "hex": self.to_hex()}

    @classmethod
    def from_json(cls, data) -> "ToeplitzHash":
        if "firstRow" in data:
            return cls(data["firstRow"], data["firstCol"])
        return cls.from_hex(data["inputBits"], data["outputBits"], data["hex"])


def sample_hash(n: int, l: int, rng: np.random.Generator) -> ToeplitzHash:
    """Uniform member of the Toeplitz family for n input and l output bits."""
    n, l = int(n), int(l)
    if n < 1 or l < 1:
        raise ValueError("need n >= 1 and l >= 1")
    row = rng.integers(0, 2, size=n)
    col = rng.integers(0, 2, size=l)
    col[0] = row[0]
    return ToeplitzHash(row.tolist(), col.tolist())


def apply_hash(h: ToeplitzHash, x) -> tuple[int, ...]:
    """Hash an input bit string (sequence of bits or integer).

    Inputs shorter than ``input_bits`` are zero-padded on the right, so only
    the first ``len(x)`` columns of the matrix act; longer inputs are
    rejected.
    """
    if isinstance(x, (int, np.integer)):
        xb = _bits(x, h.input_bits)
    else:
        xb = np.asarray(x, dtype=np.uint8)
        if xb.ndim != 1 or xb.size > h.input_bits or xb.max(initial=0) > 1:
            raise ValueError(f"input must be at most {h.input_bits} bits")
        if xb.size < h.input_bits:
            xb = np.concatenate([xb, np.zeros(h.input_bits - xb.size, dtype=np.uint8)])
    out = (h.matrix() @ xb.astype(np.int64)) & 1
    return tuple(int(b) for b in out)


def apply_hash_fft(h: ToeplitzHash, x: Sequence[int]) -> tuple[int, ...]:
    """apply_hash for long inputs, without materializing the matrix.

    Toeplitz-vector products are convolutions, so this goes through
    scipy's FFT-based matmul_toeplitz and rounds back to integers.  The
    convolution values are bounded by the input length, far below where
    float64 rounding could flip a parity; a guard asserts the rounding
    residue anyway.
    """
    from scipy.linalg import matmul_toeplitz

    xb = np.asarray(x, dtype=np.uint8)
    if xb.ndim != 1 or xb.size > h.input_bits or xb.max(initial=0) > 1:
        raise ValueError(f"input must be at most {h.input_bits} bits")
    if xb.size < h.input_bits:
        xb = np.concatenate([xb, np.zeros(h.input_bits - xb.size, dtype=np.uint8)])
    col = np.asarray(h.first_col, dtype=float)
    row = np.asarray(h.first_row, dtype=float)
    counts = matmul_toeplitz((col, row), xb.astype(float))
    rounded = np.rint(counts)
    if np.abs(counts - rounded).max(initial=0.0) > 1e-6:
        raise ArithmeticError("FFT Toeplitz product strayed from integers")
    return tuple(int(b) & 1 for b in rounded.astype(np.int64))


def enumerate_hash_family(n: int, l: int) -> list[ToeplitzHash]:
    """All 2^(n+l-1) members of the Toeplitz family, fixed order."""
    n, l = int(n), int(l)
    if n + l - 1 > 20:
        raise ValueError("family too large to enumerate")
    out = []
    for params in range(2 ** (n + l - 1)):
        bits = [(params >> (n + l - 2 - i)) & 1 for i in range(n + l - 1)]
        row = bits[:n]
        col = [row[0]] + bits[n:]
        out.append(ToeplitzHash(row, col))
    return out


def hash_output_table(h: ToeplitzHash, m: int | None = None) -> np.ndarray:
    """Outputs (as integers) for all 2^m inputs, m defaulting to input_bits."""
    n = h.input_bits
    m = n if m is None else int(m)
    if m > n:
        raise ValueError("m exceeds input_bits")
    t = h.matrix()[:, :m].astype(np.int64)
    xs = np.arange(2 ** m)
    bits = (xs[:, None] >> (m - 1 - np.arange(m))[None, :]) & 1
    out_bits = (bits @ t.T) & 1
    weights = 1 << (h.output_bits - 1 - np.arange(h.output_bits))
    return out_bits @ weights


def pa_bound(h_smooth: float, q: int, l: int, eps: float) -> float:
    """Privacy amplification distance bound
    (1/2) * 2^(-(h_smooth - q - l)/2) + 2*eps."""
    if q < 0 or l < 1 or eps < 0.0:
        raise ValueError("need q >= 0, l >= 1, eps >= 0")
    return 0.5 * 2.0 ** (-0.5 * (float(h_smooth) - q - l)) + 2.0 * float(eps)


@dataclass(frozen=True)
class PrivacyAmpReport:
    """Exact family-averaged distance from uniform versus its bound."""

    n: int
    l: int
    q: int
    eps: float
    h_smooth: float
    exact_distance: float
    bound: float
    holds: bool

    def to_json(self) -> dict:
        return {"n": self.n, "l": self.l, "q": self.q, "eps": self.eps,
                "hSmooth": self.h_smooth, "exactDistance": self.exact_distance,
                "bound": self.bound, "holds": self.holds}


def _quantum_bit_count(dims: Sequence[int]) -> int:
    total = int(np.prod(dims))
    q = int(round(math.log2(total)))
    if 2 ** q != total:
        raise ValueError(f"quantum register dimension {total} is not a power of two")
    return q


def verify_pa(cq: qsim.CqState, l: int, eps: float) -> PrivacyAmpReport:
    """Exact check of the privacy amplification bound on a ccq-state.

    ``cq`` holds branches keyed by (x, u): x a tuple of bits (the source), u
    any hashable side-information symbol; the quantum register is the
    adversary memory E.  The reported distance is the exact trace distance
    between (F(X), F, U, E) and (uniform, F, U, E) for a uniformly random
    Toeplitz hash F, computed by enumerating the full family.  Keep the
    source at n <= 8 bits.
    """
    keys = list(cq.branches)
    if not keys:
        raise ValueError("empty cq-state")
    first = keys[0]
    if not (isinstance(first, tuple) and len(first) == 2 and isinstance(first[0], tuple)):
        raise ValueError("branches must be keyed by (x bits, u)")
    n = len(first[0])
    if n > 8:
        raise ValueError("source too long for exact family enumeration")
    l = int(l)
    if l > n:
        raise ValueError("output longer than input")
    q = _quantum_bit_count(cq.quantum_dims)
    dim = int(np.prod(cq.quantum_dims))

    u_values = sorted({k[1] for k in keys}, key=repr)
    u_index = {u: i for i, u in enumerate(u_values)}
    ops = np.zeros((len(u_values), 2 ** n, dim, dim), dtype=np.complex128)
    for (x, u), op in cq.branches.items():
        if len(x) != n:
            raise ValueError("inconsistent source lengths")
        xi = int("".join(str(int(b) & 1) for b in x), 2)
        ops[u_index[u], xi] += op.matrix

    family = enumerate_hash_family(n, l)
    dist = 0.0
    for h in family:
        table = hash_output_table(h)
        for ui in range(len(u_values)):
            ideal = ops[ui].sum(axis=0) / 2 ** l
            for s in range(2 ** l):
                real = ops[ui][table == s].sum(axis=0)
                dist += 0.5 * qsim.trace_norm(real - ideal)
    dist /= len(family)

    weights = {}
    for (x, u), op in cq.branches.items():
        weights[(x, u)] = weights.get((x, u), 0.0) + op.trace
    joint = JointDistribution(("x", "u"), weights)
    h_smooth = smooth_min_entropy_conditional(joint, eps, given=("u",))
    bound = pa_bound(h_smooth, q, l, eps)
    return PrivacyAmpReport(n=n, l=l, q=q, eps=float(eps), h_smooth=h_smooth,
                            exact_distance=dist, bound=bound,
                            holds=dist <= bound + SLACK)
