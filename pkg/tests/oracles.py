"""Independent reference computations used by the test suite.

Everything here is deliberately written through different algorithms and
different libraries than the package code: scipy linprog for smoothing,
numpy eigvalsh/svd for spectra, mpmath for high-precision scalars, and
plain dictionary bookkeeping for protocol state enumeration.  Agreement
between a package routine and its oracle is evidence, not tautology.
"""

from __future__ import annotations

import itertools
import math

import mpmath
import numpy as np
from scipy.optimize import linprog

from minentlab import hashing, qsim


def lp_smooth_cap(weights, group_mass, eps: float) -> float:
    """Smallest achievable max conditional atom after removing eps mass.

    One linear program: variables (q_1..q_m, t), minimize t subject to
    q_i <= w_i, q_i <= g_i * t, sum q_i >= mass - eps, q >= 0.
    """
    w = np.asarray(weights, dtype=float)
    g = np.asarray(group_mass, dtype=float)
    m = w.size
    c = np.zeros(m + 1)
    c[-1] = 1.0
    a_ub = np.zeros((m + 1, m + 1))
    b_ub = np.zeros(m + 1)
    for i in range(m):
        a_ub[i, i] = 1.0
        a_ub[i, -1] = -g[i]
    a_ub[m, :m] = -1.0
    b_ub[m] = -(w.sum() - eps)
    bounds = [(0.0, float(wi)) for wi in w] + [(0.0, None)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"linprog failed: {res.message}")
    return float(res.x[-1])


def lp_smooth_min_entropy(weights, eps: float) -> float:
    w = np.asarray(weights, dtype=float)
    return -math.log2(lp_smooth_cap(w, np.ones_like(w), eps))


def trace_norm_svd(m) -> float:
    return float(np.linalg.svd(np.asarray(m, dtype=complex),
                               compute_uv=False).sum())


def helstrom_value(m0, m1) -> float:
    """Optimal two-outcome discrimination value for PSD operator rewards:
    sup over POVMs of tr(M0 E0) + tr(M1 E1)."""
    m0 = np.asarray(m0, dtype=complex)
    m1 = np.asarray(m1, dtype=complex)
    return 0.5 * float(np.trace(m0 + m1).real + trace_norm_svd(m0 - m1))


def diagonal_povm_value(ops) -> float:
    """Discrimination value for simultaneously diagonal reward operators:
    the optimal POVM is diagonal, so each basis vector goes to the best
    reward."""
    diags = np.stack([np.real(np.diagonal(op)) for op in ops])
    return float(diags.max(axis=0).sum())


def binomial_tail_exact(n: int, lam: float) -> float:
    """P[sum of n fair +-1 steps >= lam*n], exact rational arithmetic."""
    threshold = lam * n
    total = 0
    for k in range(n + 1):
        if 2 * k - n >= threshold:
            total += math.comb(n, k)
    return total / 2 ** n


def harmonic_bound(d: int) -> float:
    """(sum_{k=2}^{d} 1/k) / ln 2 at 50 digits."""
    with mpmath.workdps(50):
        s = mpmath.fsum(mpmath.mpf(1) / k for k in range(2, d + 1))
        return float(s / mpmath.log(2))


def entropy_threshold_mp(h: float) -> float:
    """Solve H_b(p) = h for p in (0, 1/2) with mpmath's root finder."""
    with mpmath.workdps(40):
        hh = mpmath.mpf(h)

        def f(p):
            return (-p * mpmath.log(p, 2)
                    - (1 - p) * mpmath.log(1 - p, 2) - hh)

        bracket = (mpmath.mpf("1e-6"), mpmath.mpf("0.499999"))
        return float(mpmath.findroot(f, bracket, solver="anderson",
                                     tol=1e-30))


def shannon_bits(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 1e-300]
    return float(-(p * np.log2(p)).sum())


# ---------------------------------------------------------------------------
# Protocol-level enumeration oracles
# ---------------------------------------------------------------------------

def adversary_cq_table(adv):
    """Exact measurement records of a bounded receiver, state by state.

    Returns (k_count, mem_dim, table) where table[(x, theta)] is a list of
    (k, memory amplitude vector) pairs with squared norms summing to one.
    Everything is computed by direct matrix action on each sent state,
    avoiding the package's tensor-contraction path.
    """
    n, a = adv.n, adv.ancillas
    wires = n + a
    iso = adv.isometry()
    kept = list(adv.kept)
    measured = [w for w in range(wires) if w not in kept]
    mem_dim = 2 ** len(kept)
    k_count = 2 ** len(measured)
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)

    table = {}
    for theta in itertools.product((0, 1), repeat=n):
        for x in itertools.product((0, 1), repeat=n):
            vec = np.array([1.0])
            for xi, ti in zip(x, theta):
                qubit = np.zeros(2)
                qubit[xi] = 1.0
                if ti:
                    qubit = h @ qubit
                vec = np.kron(vec, qubit)
            out = (iso @ vec).reshape((2,) * wires)
            out = np.transpose(out, measured + kept).reshape(k_count, mem_dim)
            table[(x, theta)] = [(k, out[k].copy()) for k in range(k_count)
                                 if np.abs(out[k]).max() > 1e-14]
    return k_count, mem_dim, table


def min_entropy_alpha_oracle(adv) -> float:
    """H_inf(X | Theta, K) from the enumerated record table."""
    n = adv.n
    _, _, table = adversary_cq_table(adv)
    best = 0.0
    for theta in itertools.product((0, 1), repeat=n):
        cond = {}
        for x in itertools.product((0, 1), repeat=n):
            for k, amp in table[(x, theta)]:
                cond.setdefault(k, {})[x] = float(np.vdot(amp, amp).real)
        for branch in cond.values():
            total = sum(branch.values())
            if total > 1e-15:
                best = max(best, max(branch.values()) / total)
    return -math.log2(best)


def sender_distance_oracle(adv, tau: float) -> tuple[float, float]:
    """Family-averaged real-vs-ideal distance by explicit enumeration.

    Iterates every basis string and every (f0, f1) pair of one-bit Toeplitz
    hashes, accumulates the classical-quantum branch operators of the real
    and idealized experiments, and sums trace-norm differences via SVD.
    Also returns P[C' = 1].  Exponential everywhere: keep n <= 4.
    """
    n = adv.n
    _, mem_dim, table = adversary_cq_table(adv)
    family = hashing.enumerate_hash_family(n, 1)
    theta_prior = 2.0 ** (-n)
    x_prior = 2.0 ** (-n)
    pair_prior = 1.0 / len(family) ** 2
    total = 0.0
    prob_c1 = 0.0

    for theta in itertools.product((0, 1), repeat=n):
        i0 = [i for i in range(n) if theta[i] == 0]
        i1 = [i for i in range(n) if theta[i] == 1]

        # split bit: per (x1 substring, k) conditional probability of x1
        sub_mass = {}
        k_mass = {}
        for x in itertools.product((0, 1), repeat=n):
            x1 = tuple(x[i] for i in i1)
            for k, amp in table[(x, theta)]:
                w = x_prior * float(np.vdot(amp, amp).real)
                sub_mass[(x1, k)] = sub_mass.get((x1, k), 0.0) + w
                k_mass[k] = k_mass.get(k, 0.0) + w
        split = {key: (1 if sub_mass[key] / k_mass[key[1]] >= tau - 1e-12
                       else 0) for key in sub_mass}
        prob_c1 += theta_prior * sum(w for key, w in sub_mass.items()
                                     if split[key] == 1)

        for f0 in family:
            for f1 in family:
                real = {}
                ideal = {}
                for x in itertools.product((0, 1), repeat=n):
                    x0 = tuple(x[i] for i in i0)
                    x1 = tuple(x[i] for i in i1)
                    s0 = hashing.apply_hash(f0, np.array(x0, dtype=np.uint8))
                    s1 = hashing.apply_hash(f1, np.array(x1, dtype=np.uint8))
                    for k, amp in table[(x, theta)]:
                        c = split[(x1, k)]
                        kept_s = s1 if c == 1 else s0
                        other_s = s0 if c == 1 else s1
                        op = x_prior * np.outer(amp, amp.conj())
                        key = (c, kept_s, other_s, k)
                        real[key] = real.get(key, 0.0) + op
                        for guess in ((0,), (1,)):
                            ikey = (c, kept_s, guess, k)
                            ideal[ikey] = ideal.get(ikey, 0.0) + 0.5 * op
                branch_sum = 0.0
                for key in set(real) | set(ideal):
                    diff = (real.get(key, np.zeros((mem_dim, mem_dim)))
                            - ideal.get(key, np.zeros((mem_dim, mem_dim))))
                    branch_sum += trace_norm_svd(diff)
                total += theta_prior * pair_prior * 0.5 * branch_sum
    return total, prob_c1


def ml_syndrome_decode_oracle(h_mat, syndrome, y):
    """Exhaustive maximum-likelihood syndrome decoding.

    Returns the minimal Hamming distance to ``y`` among all strings with
    the given syndrome.  Cost 2^M; keep M small.
    """
    h_mat = np.asarray(h_mat, dtype=np.uint8)
    syndrome = tuple(int(b) for b in syndrome)
    y = np.asarray(y, dtype=np.uint8)
    m = h_mat.shape[1]
    best = None
    for bits in itertools.product((0, 1), repeat=m):
        x = np.array(bits, dtype=np.uint8)
        if tuple((h_mat @ x) & 1) != syndrome:
            continue
        dist = int((x ^ y).sum())
        if best is None or dist < best:
            best = dist
    return best


def random_density(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
