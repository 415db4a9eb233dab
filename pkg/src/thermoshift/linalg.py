"""Nonnegative-matrix machinery: primitivity tests, Perron eigendata, exact rational solves.

The floating-point Perron solver is a plain power iteration with
Collatz-Wielandt stopping, which is all a primitive nonnegative matrix needs.
The exact solver finds a rational Perron root (when one exists) from the
characteristic polynomial and certifies it with a strictly positive
eigenvector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConvergenceError, ExactArithmeticError, NonPrimitiveError

DEFAULT_PERRON_TOL = 1e-13
DEFAULT_PERRON_MAX_ITER = 500_000

FractionMatrix = tuple[tuple[Fraction, ...], ...]
FractionVector = tuple[Fraction, ...]


def wielandt_bound(k: int) -> int:
    """Classical bound on the primitivity exponent of a k x k matrix."""
    return (k - 1) * (k - 1) + 1 if k > 1 else 1


def _bool_step(power: np.ndarray, step: np.ndarray) -> np.ndarray:
    return (power.astype(np.uint8) @ step.astype(np.uint8)) > 0


def primitivity_exponent(support: np.ndarray) -> int | None:
    """Smallest m with support^m entrywise positive, or None within the Wielandt bound."""
    s = np.asarray(support).astype(bool)
    power = s.copy()
    for m in range(1, wielandt_bound(s.shape[0]) + 1):
        if power.all():
            return m
        power = _bool_step(power, s)
    return None


def bool_matpow(support: np.ndarray, exponent: int) -> np.ndarray:
    """support^exponent over the boolean semiring (walks of the exact length)."""
    s = np.asarray(support).astype(bool)
    if exponent == 0:
        return np.eye(s.shape[0], dtype=bool)
    result = None
    base = s
    e = exponent
    while e:
        if e & 1:
            result = base.copy() if result is None else _bool_step(result, base)
        e >>= 1
        if e:
            base = _bool_step(base, base)
    return result


def int_matpow(matrix: list[list[int]], exponent: int) -> list[list[int]]:
    """Integer matrix power with Python big ints (for overflow-free word counts)."""
    k = len(matrix)

    def mul(a, b):
        return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(k)]
                for i in range(k)]

    result = [[1 if i == j else 0 for j in range(k)] for i in range(k)]
    base = [row[:] for row in matrix]
    e = exponent
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


@dataclass(eq=False)
class PerronData:
    """Perron eigendata of a primitive nonnegative matrix.

    right and left are strictly positive; left is scaled so that
    sum(left * right) == 1. residual is the achieved relative fixed-point
    residual max over the two eigenvector equations.
    """

    matrix: np.ndarray
    rho: float
    right: np.ndarray
    left: np.ndarray
    residual: float
    iterations: int


def perron(matrix, tol: float = DEFAULT_PERRON_TOL,
           max_iter: int = DEFAULT_PERRON_MAX_ITER) -> PerronData:
    """Dominant eigendata of a primitive nonnegative matrix by power iteration.

    Raises NonPrimitiveError when the support pattern is not primitive and
    ConvergenceError (with the last residual) when max_iter is exhausted.
    """
    b = np.asarray(matrix, dtype=float)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"matrix must be square, got shape {b.shape}")
    if (b < 0).any() or not np.isfinite(b).all():
        raise ValueError("matrix entries must be finite and nonnegative")
    support = b > 0
    if primitivity_exponent(support) is None:
        raise NonPrimitiveError(
            "matrix support is not primitive; Perron iteration refused")

    k = b.shape[0]
    bt = b.T.copy()
    h = np.full(k, 1.0 / k)
    nu = np.full(k, 1.0 / k)
    rho = 0.0
    spread = math.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        wh = b @ h
        wn = bt @ nu
        qh = wh / h
        qn = wn / nu
        rho = float(wh.sum() / h.sum())
        spread = max(qh.max() - qh.min(), qn.max() - qn.min())
        h = wh / wh.sum()
        nu = wn / wn.sum()
        if spread <= tol * rho:
            break
    else:
        raise ConvergenceError(
            f"Perron iteration did not converge in {max_iter} iterations "
            f"(last Collatz-Wielandt spread {spread:.3e}, rho ~ {rho:.6g})",
            residual=spread / rho if rho else math.inf,
            iterations=max_iter)

    nu = nu / float(nu @ h)
    res_right = float(np.abs(b @ h - rho * h).max() / (rho * np.abs(h).max()))
    res_left = float(np.abs(bt @ nu - rho * nu).max() / (rho * np.abs(nu).max()))
    return PerronData(matrix=b, rho=rho, right=h, left=nu,
                      residual=max(res_right, res_left), iterations=iterations)


@dataclass(eq=False)
class ExactPerronData:
    """Rational Perron eigendata; left is scaled so sum(left * right) == 1."""

    matrix: FractionMatrix
    rho: Fraction
    right: FractionVector
    left: FractionVector


def charpoly(matrix: FractionMatrix) -> list[Fraction]:
    """Coefficients c[0..k] of det(tI - M) = sum c[j] t^j via Faddeev-LeVerrier."""
    k = len(matrix)
    m = [[Fraction(x) for x in row] for row in matrix]
    coeffs = [Fraction(0)] * (k + 1)
    coeffs[k] = Fraction(1)
    aux = [[Fraction(0)] * k for _ in range(k)]
    for step in range(1, k + 1):
        # aux <- M @ (aux + c_{k-step+1} I)
        shifted = [row[:] for row in aux]
        for i in range(k):
            shifted[i][i] += coeffs[k - step + 1]
        aux = [[sum(m[i][t] * shifted[t][j] for t in range(k)) for j in range(k)]
               for i in range(k)]
        trace = sum(aux[i][i] for i in range(k))
        coeffs[k - step] = -trace / step
    return coeffs


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    d = 1
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            out.append(n // d)
        d += 1
    return sorted(set(out))


def rational_roots(coeffs: list[Fraction]) -> list[Fraction]:
    """All rational roots of a polynomial with Fraction coefficients."""
    # clear denominators to an integer polynomial
    denom_lcm = 1
    for c in coeffs:
        denom_lcm = denom_lcm * c.denominator // math.gcd(denom_lcm, c.denominator)
    ints = [int(c * denom_lcm) for c in coeffs]
    # strip zero roots (trailing zero coefficients in ascending order)
    roots = set()
    low = 0
    while low < len(ints) - 1 and ints[low] == 0:
        low += 1
        roots.add(Fraction(0))
    ints = ints[low:]
    if len(ints) <= 1:
        return sorted(roots)
    lead = ints[-1]
    const = ints[0]
    if abs(const) > 10**14 or abs(lead) > 10**14:
        raise ExactArithmeticError(
            "characteristic polynomial coefficients too large for exact root search")

    def evaluate(x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(ints):
            acc = acc * x + c
        return acc

    for p in _divisors(const):
        for q in _divisors(lead):
            for sign in (1, -1):
                cand = Fraction(sign * p, q)
                if evaluate(cand) == 0:
                    roots.add(cand)
    return sorted(roots)


def fraction_nullspace(matrix: list[list[Fraction]]) -> list[list[Fraction]]:
    """Basis of the nullspace of a square Fraction matrix (Gauss elimination)."""
    k = len(matrix)
    m = [[Fraction(x) for x in row] for row in matrix]
    pivots = []
    row = 0
    for col in range(k):
        pivot = next((r for r in range(row, k) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[row], m[pivot] = m[pivot], m[row]
        inv = m[row][col]
        m[row] = [x / inv for x in m[row]]
        for r in range(k):
            if r != row and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[row])]
        pivots.append(col)
        row += 1
        if row == k:
            break
    free = [c for c in range(k) if c not in pivots]
    basis = []
    for f in free:
        vec = [Fraction(0)] * k
        vec[f] = Fraction(1)
        for r, c in enumerate(pivots):
            vec[c] = -m[r][f]
        basis.append(vec)
    return basis


def _positive_eigenvector(matrix: list[list[Fraction]], rho: Fraction):
    k = len(matrix)
    shifted = [[matrix[i][j] - (rho if i == j else 0) for j in range(k)]
               for i in range(k)]
    basis = fraction_nullspace(shifted)
    if len(basis) != 1:
        return None
    vec = basis[0]
    if all(x <= 0 for x in vec):
        vec = [-x for x in vec]
    if any(x <= 0 for x in vec):
        return None
    return vec


def perron_exact(matrix) -> ExactPerronData:
    """Exact rational Perron eigendata, when the Perron root is rational.

    Raises ExactArithmeticError if no rational eigenvalue carries a strictly
    positive eigenvector pair, and NonPrimitiveError for non-primitive support.
    """
    m = tuple(tuple(Fraction(x) for x in row) for row in matrix)
    k = len(m)
    if any(len(row) != k for row in m):
        raise ValueError("matrix must be square")
    if any(x < 0 for row in m for x in row):
        raise ValueError("matrix entries must be nonnegative")
    support = np.array([[x > 0 for x in row] for row in m])
    if primitivity_exponent(support) is None:
        raise NonPrimitiveError(
            "matrix support is not primitive; Perron data refused")

    candidates = [r for r in rational_roots(charpoly(m)) if r > 0]
    rows = [list(row) for row in m]
    cols = [[m[j][i] for j in range(k)] for i in range(k)]
    for rho in sorted(candidates, reverse=True):
        right = _positive_eigenvector(rows, rho)
        if right is None:
            continue
        left = _positive_eigenvector(cols, rho)
        if left is None:
            continue
        total = sum(r for r in right)
        right = [r / total for r in right]
        inner = sum(l * r for l, r in zip(left, right))
        left = [l / inner for l in left]
        return ExactPerronData(matrix=m, rho=rho,
                               right=tuple(right), left=tuple(left))
    raise ExactArithmeticError(
        "no rational Perron root with positive eigenvectors; "
        "run this computation in float mode")


def max_times_vec(matrix: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Max-times semiring matvec: out[i] = max_j matrix[i,j] * vec[j]."""
    return (matrix * vec[None, :]).max(axis=1)


def min_times_vec(matrix: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Min-times matvec over the support: zero entries mean 'no edge'.

    Entries of vec equal to +inf mean 'unreachable' and propagate.
    """
    with np.errstate(invalid="ignore"):
        prod = matrix * vec[None, :]
    prod[(matrix == 0) | ~np.isfinite(prod)] = np.inf
    return prod.min(axis=1)
