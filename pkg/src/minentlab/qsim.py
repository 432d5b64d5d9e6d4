"""Exact linear algebra for small quantum registers.

Dense state vectors and density operators over a list of subsystem
dimensions, projective measurements with sub-normalized branch operators,
partial trace, trace distance and Haar-random bases.  Everything is exact at
desk scale (up to roughly twelve qubits); there is no sparse or stabilizer
path and no approximation anywhere.

All functions are pure.  Randomness enters only through an explicitly passed
``numpy.random.Generator``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12
ORTHO_TOL = 1e-10

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class DimensionMismatchError(ValueError):
    """Operands act on registers of different shape."""


def _as_dims(dims: Sequence[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if not out or any(d < 1 for d in out):
        raise ValueError(f"invalid subsystem dimensions {dims!r}")
    return out


def _frozen_array(a, shape=None) -> np.ndarray:
    arr = np.asarray(a, dtype=np.complex128)
    if shape is not None and arr.shape != shape:
        raise DimensionMismatchError(f"array shape {arr.shape} != expected {shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateVector:
    """Pure state on a register of subsystems.

    Attributes
    ----------
    dims:
        Dimension of each subsystem, e.g. ``(2, 2, 2)`` for three qubits.
    amplitudes:
        Complex vector of length ``prod(dims)``, unit norm within 1e-12.
    """

    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __init__(self, dims: Sequence[int], amplitudes) -> None:
        dims = _as_dims(dims)
        total = int(np.prod(dims))
        amps = _frozen_array(amplitudes, (total,))
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"state vector norm {norm} is not 1")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def to_density(self) -> "DensityOperator":
        a = self.amplitudes
        return DensityOperator(self.dims, np.outer(a, a.conj()))

    def tensor(self, other: "StateVector") -> "StateVector":
        return StateVector(self.dims + other.dims,
                           np.kron(self.amplitudes, other.amplitudes))

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "re": self.amplitudes.real.tolist(),
            "im": self.amplitudes.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "StateVector":
        amps = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(tuple(data["dims"]), amps)


@dataclass(frozen=True)
class DensityOperator:
    """Possibly sub-normalized density operator on a register.

    Hermitian within 1e-12, eigenvalues >= -1e-10, trace in (0, 1 + 1e-12].
    Sub-normalized operators represent measurement branches and event-
    restricted states, so the trace may be well below one.
    """

    dims: tuple[int, ...]
    matrix: np.ndarray

    def __init__(self, dims: Sequence[int], matrix, validate: bool = True) -> None:
        dims = _as_dims(dims)
        total = int(np.prod(dims))
        mat = _frozen_array(matrix, (total, total))
        if validate:
            herm = float(np.max(np.abs(mat - mat.conj().T))) if total else 0.0
            if herm > 1e-9:
                raise ValueError(f"matrix is not Hermitian (deviation {herm:g})")
            tr = float(mat.trace().real)
            if tr > 1.0 + 1e-9 or tr <= -PSD_TOL:
                raise ValueError(f"trace {tr} outside (0, 1]")
            # eigvalsh here is plumbing: the trusted spectral path used by
            # trace_distance is the self-contained Jacobi solver below.
            if total > 1:
                lo = float(np.linalg.eigvalsh(mat)[0])
                if lo < -PSD_TOL * max(1.0, tr):
                    raise ValueError(f"operator has negative eigenvalue {lo:g}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def trace(self) -> float:
        return float(self.matrix.trace().real)

    def normalized(self) -> "DensityOperator":
        tr = self.trace
        if tr <= 0.0:
            raise ValueError("cannot normalize an all-zero operator")
        return DensityOperator(self.dims, self.matrix / tr, validate=False)

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "DensityOperator":
        mat = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(tuple(data["dims"]), mat)


@dataclass(frozen=True)
class Basis:
    """Orthonormal basis of a d-dimensional subsystem.

    ``vectors[:, j]`` is the j-th basis vector; the matrix is unitary within
    1e-10.  ``label`` is an opaque identifier used in transcripts.
    """

    label: str
    vectors: np.ndarray

    def __init__(self, label: str, vectors) -> None:
        vec = _frozen_array(vectors)
        if vec.ndim != 2 or vec.shape[0] != vec.shape[1]:
            raise DimensionMismatchError("basis matrix must be square")
        gram = vec.conj().T @ vec
        if float(np.max(np.abs(gram - np.eye(vec.shape[0])))) > ORTHO_TOL:
            raise ValueError(f"basis {label!r} is not orthonormal")
        object.__setattr__(self, "label", str(label))
        object.__setattr__(self, "vectors", vec)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def vector(self, j: int) -> np.ndarray:
        return self.vectors[:, j]

    def to_json(self) -> dict:
        return {"label": self.label,
                "re": self.vectors.real.tolist(),
                "im": self.vectors.imag.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> "Basis":
        mat = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return cls(data["label"], mat)


def standard_bases_qubit() -> tuple[Basis, Basis, Basis]:
    """The computational, diagonal and circular qubit bases.

    Computational: |0>, |1>.  Diagonal: (|0> +- |1>)/sqrt2.  Circular:
    (|0> +- i|1>)/sqrt2.  Any two of the three have all mutual overlaps of
    magnitude 1/sqrt2.
    """
    comp = Basis("+", np.eye(2))
    diag = Basis("x", np.array([[_INV_SQRT2, _INV_SQRT2],
                                [_INV_SQRT2, -_INV_SQRT2]]))
    circ = Basis("o", np.array([[_INV_SQRT2, _INV_SQRT2],
                                [1j * _INV_SQRT2, -1j * _INV_SQRT2]]))
    return comp, diag, circ


def epr_pair() -> StateVector:
    """Maximally entangled two-qubit state (|00> + |11>)/sqrt2."""
    return StateVector((2, 2), np.array([_INV_SQRT2, 0.0, 0.0, _INV_SQRT2]))


# ---------------------------------------------------------------------------
# Self-contained Hermitian eigensolver (cyclic Jacobi).
#
# trace_distance is the central closeness measure of every checker in this
# package, so its spectral decomposition does not lean on LAPACK: a cyclic
# Jacobi iteration is slow but transparent and accurate to ~1e-14 at the
# matrix sizes that occur here (<= a few hundred).  Tests cross-check it
# against numpy's eigvalsh on random Hermitian matrices.
# ---------------------------------------------------------------------------

def hermitian_eigenvalues(matrix, max_sweeps: int = 60,
                          tol: float = 1e-13) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Converges when the off-diagonal Frobenius mass drops below ``tol`` times
    the matrix scale.  Raises RuntimeError if that does not happen within
    ``max_sweeps`` sweeps (does not occur for Hermitian input).
    """
    a = np.array(matrix, dtype=np.complex128)
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionMismatchError("matrix must be square")
    herm = float(np.max(np.abs(a - a.conj().T))) if n else 0.0
    scale = max(1.0, float(np.max(np.abs(a))) if n else 0.0)
    if herm > 1e-9 * scale:
        raise ValueError(f"matrix is not Hermitian (deviation {herm:g})")
    a = 0.5 * (a + a.conj().T)
    if n < 2:
        return a.real.diagonal().copy()
    for _ in range(max_sweeps):
        # Off-diagonal Frobenius mass, summed directly.  Subtracting the
        # diagonal mass from the total cancels to ~sqrt(eps)*scale and can
        # never reach tol.
        off_part = a.copy()
        np.fill_diagonal(off_part, 0.0)
        off = math.sqrt(float(np.sum(np.abs(off_part) ** 2)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= 1e-18 * scale:
                    continue
                phase = apq / r
                tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # A <- N^dag A N with N = [[c*u, s*u], [-s, c]] on the
                # (p, q) plane; kills the pivot, keeps Hermiticity.
                u = phase
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * np.conj(u) * row_p - s * row_q
                a[q, :] = s * np.conj(u) * row_p + c * row_q
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * u * col_p - s * col_q
                a[:, q] = s * u * col_p + c * col_q
                a[p, q] = 0.0
                a[q, p] = 0.0
    else:
        raise RuntimeError("Jacobi eigensolver failed to converge")
    vals = a.real.diagonal().copy()
    vals.sort()
    return vals


def _operand_matrix(x) -> tuple[tuple[int, ...] | None, np.ndarray]:
    if isinstance(x, DensityOperator):
        return x.dims, x.matrix
    if isinstance(x, StateVector):
        a = x.amplitudes
        return x.dims, np.outer(a, a.conj())
    arr = np.asarray(x, dtype=np.complex128)
    return None, arr


def trace_distance(a, b) -> float:
    """Trace distance (1/2)*tr|a - b| between two (sub-normalized) operators.

    Accepts DensityOperator, StateVector or a raw Hermitian matrix for either
    argument.  Eigenvalues of the difference come from the self-contained
    Jacobi solver.
    """
    dims_a, mat_a = _operand_matrix(a)
    dims_b, mat_b = _operand_matrix(b)
    if mat_a.shape != mat_b.shape:
        raise DimensionMismatchError(
            f"operator shapes differ: {mat_a.shape} vs {mat_b.shape}")
    if dims_a is not None and dims_b is not None and dims_a != dims_b:
        raise DimensionMismatchError(f"register shapes differ: {dims_a} vs {dims_b}")
    vals = hermitian_eigenvalues(mat_a - mat_b)
    return 0.5 * float(np.sum(np.abs(vals)))


def trace_norm(matrix) -> float:
    """tr|M| for Hermitian M, via the same Jacobi path as trace_distance."""
    vals = hermitian_eigenvalues(matrix)
    return float(np.sum(np.abs(vals)))


def partial_trace(op: DensityOperator, keep: Sequence[int]) -> DensityOperator:
    """Trace out every subsystem not listed in ``keep`` (order preserved).

    ``keep`` is a list of distinct subsystem indices; an empty list is
    rejected (the result would be a scalar, use ``op.trace``).
    """
    keep = [int(k) for k in keep]
    n = len(op.dims)
    if len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise IndexError(f"invalid subsystem indices {keep} for {n} subsystems")
    if sorted(keep) != keep:
        raise IndexError("keep indices must be strictly increasing")
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    dims = op.dims
    t = op.matrix.reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    for count, i in enumerate(drop):
        # axes shift left as earlier subsystems are traced out
        shift = sum(1 for j in drop[:count] if j < i)
        ax = i - shift
        rem = n - count
        t = np.trace(t, axis1=ax, axis2=ax + rem)
    new_dims = tuple(dims[k] for k in keep)
    total = int(np.prod(new_dims))
    return DensityOperator(new_dims, t.reshape(total, total), validate=False)


def _contract_axis(tensor: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    """Replace axis content z by sum_z mat[x, z] * tensor[..., z, ...]."""
    t = np.tensordot(mat, tensor, axes=([1], [axis]))
    return np.moveaxis(t, 0, axis)


def measure(state, bases: Mapping[int, Basis] | Sequence[Basis],
            subsystems: Sequence[int] | None = None,
            return_branches: bool = False):
    """Projective measurement of selected subsystems in product bases.

    Parameters
    ----------
    state:
        StateVector or DensityOperator.
    bases:
        Either a mapping {subsystem index: Basis} or a sequence of Basis
        objects aligned with ``subsystems``.
    subsystems:
        Indices to measure.  Defaults to all subsystems when ``bases`` is a
        sequence covering the full register.
    return_branches:
        When true, also return the sub-normalized branch operators
        P_x rho P_x (on the full register) for each outcome.

    Returns
    -------
    probabilities: dict mapping outcome tuples (ordered by increasing
    subsystem index) to floats summing to tr(rho).
    branches: dict mapping outcome tuples to DensityOperator (only when
    ``return_branches`` is set).  Zero-probability outcomes are kept in the
    probability dict but omitted from the branch dict.
    """
    if isinstance(bases, Mapping):
        basis_for = {int(i): b for i, b in bases.items()}
        targets = sorted(basis_for)
        if subsystems is not None and sorted(int(i) for i in subsystems) != targets:
            raise ValueError("subsystems argument disagrees with bases mapping")
    else:
        seq = list(bases)
        if subsystems is None:
            if isinstance(state, (StateVector, DensityOperator)) and len(seq) == len(state.dims):
                subsystems = range(len(seq))
            else:
                raise ValueError("subsystems required when bases is a partial sequence")
        idx = [int(i) for i in subsystems]
        if len(seq) != len(idx) or len(set(idx)) != len(idx):
            raise DimensionMismatchError("one basis required per measured subsystem")
        basis_for = dict(zip(idx, seq))
        targets = sorted(idx)

    if not isinstance(state, (StateVector, DensityOperator)):
        raise TypeError("state must be a StateVector or DensityOperator")
    dims = state.dims
    n = len(dims)
    if not targets:
        raise ValueError("no subsystems selected")
    if any(i < 0 or i >= n for i in targets):
        raise IndexError(f"invalid subsystem index in {targets}")
    for i in targets:
        if basis_for[i].dim != dims[i]:
            raise DimensionMismatchError(
                f"basis {basis_for[i].label!r} dim {basis_for[i].dim} != subsystem dim {dims[i]}")

    out_dims = tuple(dims[i] for i in targets)
    sum_axes = tuple(i for i in range(n) if i not in targets)

    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape(dims)
        for i in targets:
            psi = _contract_axis(psi, basis_for[i].vectors.conj().T, i)
        prob_tensor = (np.abs(psi) ** 2)
    else:
        rho = state.matrix.reshape(dims + dims)
        for i in targets:
            u = basis_for[i].vectors
            rho = _contract_axis(rho, u.conj().T, i)      # rows: U^dagger rho
            rho = _contract_axis(rho, u.T, i + n)         # cols: rho U
        diag = np.diagonal(rho.reshape(state.dim, state.dim)).real
        prob_tensor = diag.reshape(dims)
    probs = prob_tensor.sum(axis=sum_axes) if sum_axes else prob_tensor

    prob_map: dict[tuple[int, ...], float] = {}
    for outcome in np.ndindex(*out_dims):
        prob_map[tuple(int(o) for o in outcome)] = float(probs[outcome])

    if not return_branches:
        return prob_map

    branches: dict[tuple[int, ...], DensityOperator] = {}
    _, rho_full = _operand_matrix(state)
    total = int(np.prod(dims))
    rho_t = rho_full.reshape(dims + dims)
    for outcome, p in prob_map.items():
        if p <= 1e-15:
            continue
        t = rho_t
        for k, i in enumerate(targets):
            v = basis_for[i].vectors[:, outcome[k]]
            proj = np.outer(v, v.conj())
            t = _contract_axis(t, proj, i)        # P rho (projector, Hermitian)
            t = _contract_axis(t, proj.T, i + n)  # rho P on the column side
        branches[outcome] = DensityOperator(dims, t.reshape(total, total), validate=False)
    return prob_map, branches


def haar_random_basis(dim: int, rng: np.random.Generator) -> Basis:
    """Haar-distributed orthonormal basis of dimension ``dim``.

    Complex Gaussian matrix, QR decomposition, each R diagonal entry phase-
    normalized to positive real so the distribution is exactly Haar.
    """
    dim = int(dim)
    if dim < 1:
        raise ValueError("dim must be positive")
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    phases = d / np.abs(d)
    q = q * phases  # broadcasts over columns
    tag = rng.integers(0, 2 ** 32)
    return Basis(f"haar-{tag:08x}", q)


@dataclass(frozen=True)
class CqState:
    """Classical-quantum state: classical symbols paired with branch operators.

    ``branches`` maps classical tuples to sub-normalized DensityOperators on
    a shared quantum register; branch traces are the classical probabilities
    and sum to at most one.  The quantum register may be trivial
    (``quantum_dims == (1,)``) for purely classical states.
    """

    quantum_dims: tuple[int, ...]
    branches: dict

    def __init__(self, quantum_dims: Sequence[int], branches: Mapping) -> None:
        qd = _as_dims(quantum_dims)
        bmap = {}
        total = 0.0
        for key, op in branches.items():
            if not isinstance(op, DensityOperator):
                op = DensityOperator(qd, op)
            if op.dims != qd:
                raise DimensionMismatchError(
                    f"branch {key!r} dims {op.dims} != {qd}")
            bmap[key] = op
            total += op.trace
        if total > 1.0 + 1e-9:
            raise ValueError(f"branch traces sum to {total} > 1")
        object.__setattr__(self, "quantum_dims", qd)
        object.__setattr__(self, "branches", bmap)

    @property
    def mass(self) -> float:
        return float(sum(op.trace for op in self.branches.values()))

    def classical_weights(self) -> dict:
        return {key: op.trace for key, op in self.branches.items()}

    def average_operator(self) -> DensityOperator:
        total = int(np.prod(self.quantum_dims))
        acc = np.zeros((total, total), dtype=np.complex128)
        for op in self.branches.values():
            acc += op.matrix
        return DensityOperator(self.quantum_dims, acc, validate=False)


def cq_trace_distance(a: CqState, b: CqState) -> float:
    """Trace distance between two cq-states with a shared classical alphabet.

    Decomposes branch-by-branch: distinct classical symbols are perfectly
    distinguishable, so the distance is the sum of branch trace distances.
    """
    if a.quantum_dims != b.quantum_dims:
        raise DimensionMismatchError("quantum registers differ")
    total = int(np.prod(a.quantum_dims))
    zero = np.zeros((total, total), dtype=np.complex128)
    keys = set(a.branches) | set(b.branches)
    dist = 0.0
    for key in keys:
        ma = a.branches[key].matrix if key in a.branches else zero
        mb = b.branches[key].matrix if key in b.branches else zero
        dist += 0.5 * trace_norm(ma - mb)
    return dist
