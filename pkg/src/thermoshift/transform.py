"""Fiber-measure transforms: reference measures on an unstable fiber with
density exp(S_n G2 - S_n G1), their shift pushforwards, and the averaged
measures whose limits are equilibrium states of G2.

Every quantity is a ratio K_{n,A} / Z_n of weighted sums over fiber cylinders
of depth n + r - 1. The fast path contracts a vector through per-step weight
matrices W(b, b') = Q1(b, b') exp((G2 - G1)(bb')) in O(n k^2); constrained
coordinates replace the free sum at their steps. A brute-force enumeration
oracle for the same sums lives in the enumeration module. Float evaluation is
log-scaled (Z_n grows like exp(n (P(G2) - P(G1)))); the exact engine works in
plain rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence, Union

import numpy as np

from .equilibrium import (EquilibriumMarkovState, UnstableFiberMeasure, block_form,
                          conditional_unstable_measure, equilibrium_state)
from .errors import ExactArithmeticError
from .linalg import DEFAULT_PERRON_MAX_ITER, DEFAULT_PERRON_TOL
from .potentials import LocallyConstantPotential
from .shiftspace import (FiberConstraint, PastWord, ShiftSpace, TwoSidedCylinder,
                         Word, WordLike, as_word, higher_block_recode,
                         shifted_cylinder_constraints)

RAW = "raw"
PRESSURE = "pressure"

Number = Union[float, Fraction]
ConstraintLike = Union[FiberConstraint, tuple[int, WordLike], None]


def frac_log(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


@dataclass(eq=False)
class ExactEngine:
    q1: tuple[tuple[Fraction, ...], ...]
    w: tuple[tuple[Fraction, ...], ...]
    rho1: Fraction


@dataclass(eq=False)
class TransformJob:
    """A fixed transform experiment: spaces, potentials, base fiber, engine.

    g1 plays the smooth reference role (its conditional Gibbs measure lives on
    the fiber of `past`); g2 is the target. Both must be one-sided (apply
    shift_reduce first) and the space must be primitive. normalization only
    rescales Z_n and K_{n,A} by exp(n P(G1)); the measures lambda_n, the
    pushforwards and mu_n are unchanged because the factor cancels.
    """

    space: ShiftSpace
    g1: LocallyConstantPotential
    g2: LocallyConstantPotential
    past: PastWord
    fiber: UnstableFiberMeasure
    state1: EquilibriumMarkovState
    state2: EquilibriumMarkovState
    normalization: str
    arith: str
    pinned: Word
    w_matrix: np.ndarray
    exact_engine: Optional[ExactEngine] = None

    @property
    def block_length(self) -> int:
        return self.state1.recoding.length

    @property
    def entry_block(self) -> int:
        return self.fiber.entry_block

    @cached_property
    def pin_constraints(self) -> dict[int, int]:
        return {t: s for t, s in enumerate(self.pinned)}

    @property
    def exact(self) -> bool:
        return self.arith == "exact"

    def require_exact(self) -> ExactEngine:
        if self.exact_engine is None:
            raise ExactArithmeticError(
                "job was not built with arith='exact'")
        return self.exact_engine

    def pressure_gap(self) -> float:
        return self.state2.pressure - self.state1.pressure


def transform_job(space: ShiftSpace, g1: LocallyConstantPotential,
                  g2: LocallyConstantPotential, past: PastWord, *,
                  normalization: str = RAW, pinned: WordLike = (),
                  arith: str = "float",
                  tol: float = DEFAULT_PERRON_TOL,
                  max_iter: int = DEFAULT_PERRON_MAX_ITER) -> TransformJob:
    """Validate and precompute a transform job.

    Refuses non-primitive spaces (the construction needs topological mixing)
    and two-sided potentials (shift_reduce them first; the reduction is
    homologous so pressures and equilibrium states are unchanged).
    """
    space.require_primitive("transform_job")
    if normalization not in (RAW, PRESSURE):
        raise ValueError(f"normalization must be '{RAW}' or '{PRESSURE}'")
    if arith not in ("float", "exact"):
        raise ValueError("arith must be 'float' or 'exact'")
    for name, g in (("g1", g1), ("g2", g2)):
        if g.space != space:
            raise ValueError(f"{name} lives on a different shift space")
        if not g.one_sided:
            raise ValueError(
                f"{name} is two-sided (window {g.window}); apply shift_reduce first")
    n_blocks = max(1, g1.future_window - 1, g2.future_window - 1)
    rec = higher_block_recode(space, n_blocks)
    exact = arith == "exact"
    state1 = equilibrium_state(g1, recoding=rec, exact=exact, tol=tol,
                               max_iter=max_iter)
    state2 = equilibrium_state(g2, recoding=rec, exact=exact, tol=tol,
                               max_iter=max_iter)
    fiber = conditional_unstable_measure(past, g1, state=state1, pinned=pinned,
                                         exact=exact)
    form1, form2 = state1.form, state2.form
    rel = np.where(form1.support, np.exp(form2.values - form1.values), 0.0)
    w_matrix = state1.q * rel

    engine = None
    if exact:
        ex1 = state1.require_exact()
        wf1 = form1.exact_weights
        wf2 = form2.exact_weights
        size = len(rec.blocks)
        wx = tuple(tuple(
            (ex1.q[i][j] * wf2[i][j] / wf1[i][j]) if wf1[i][j] else Fraction(0)
            for j in range(size)) for i in range(size))
        engine = ExactEngine(q1=ex1.q, w=wx, rho1=ex1.rho)

    return TransformJob(space=space, g1=g1, g2=g2, past=past, fiber=fiber,
                        state1=state1, state2=state2,
                        normalization=normalization, arith=arith,
                        pinned=as_word(pinned), w_matrix=w_matrix,
                        exact_engine=engine)


def _merge_constraints(job: TransformJob,
                       extra: dict[int, int]) -> Optional[dict[int, int]]:
    cons = dict(job.pin_constraints)
    for c, s in extra.items():
        if cons.get(c, s) != s:
            return None
        cons[c] = s
    return cons


def _as_constraint_dict(constraint: ConstraintLike) -> dict[int, int]:
    if constraint is None:
        return {}
    if isinstance(constraint, FiberConstraint):
        return constraint.coordinates()
    offset, word = constraint
    if offset < 0:
        raise ValueError("constraint offset must be >= 0")
    return {int(offset) + t: s for t, s in enumerate(as_word(word))}


def _chain_log(job: TransformJob, n: int, constraints: dict[int, int]) -> float:
    """log of the raw weighted sum over the fiber; -inf for the empty set."""
    nb = job.block_length
    q = job.state1.q
    w = job.w_matrix
    last = job.state1.recoding.last_symbols
    top = max(nb + n - 1, max(constraints, default=-1))
    v = np.zeros(q.shape[0])
    v[job.entry_block] = 1.0
    acc = 0.0
    for s in range(top + 1):
        v = v @ (w if nb <= s <= nb + n - 1 else q)
        sym = constraints.get(s)
        if sym is not None:
            v = np.where(last == sym, v, 0.0)
        total = float(v.sum())
        if total <= 0.0:
            return -math.inf
        v /= total
        acc += math.log(total)
    return acc


def _chain_exact(job: TransformJob, n: int,
                 constraints: dict[int, int]) -> Fraction:
    engine = job.require_exact()
    nb = job.block_length
    rec = job.state1.recoding
    size = len(rec.blocks)
    top = max(nb + n - 1, max(constraints, default=-1))
    v = [Fraction(0)] * size
    v[job.entry_block] = Fraction(1)
    for s in range(top + 1):
        m = engine.w if nb <= s <= nb + n - 1 else engine.q1
        v = [sum(v[i] * m[i][j] for i in range(size) if v[i]) for j in range(size)]
        sym = constraints.get(s)
        if sym is not None:
            v = [x if rec.blocks[j][-1] == sym else Fraction(0)
                 for j, x in enumerate(v)]
        if not any(v):
            return Fraction(0)
    return sum(v, Fraction(0))


def _log_z(job: TransformJob, n: int) -> float:
    return _chain_log(job, n, job.pin_constraints)


def _z_exact(job: TransformJob, n: int) -> Fraction:
    return _chain_exact(job, n, job.pin_constraints)


@dataclass(frozen=True)
class PartitionSums:
    """Z_n and, when constrained, K_{n,A}; log fields avoid overflow for raw
    values that grow like exp(n (P(G2) - P(G1)))."""

    n: int
    z: Number
    k: Optional[Number]
    log_z: float
    log_k: Optional[float]
    normalization: str
    depth: int


def partition_sum(job: TransformJob, n: int,
                  constraint: ConstraintLike = None) -> PartitionSums:
    """Z_n (and K_{n,A} for a fiber constraint A) over the job's fiber."""
    if n < 1:
        raise ValueError("partition sums need n >= 1")
    extra = _as_constraint_dict(constraint)
    depth = n + job.block_length
    shift = n * job.state1.pressure if job.normalization == PRESSURE else 0.0
    if job.exact:
        factor = job.require_exact().rho1 ** n if job.normalization == PRESSURE else 1
        pin_mass = job.fiber._pin_mass_exact if job.pinned else Fraction(1)
        z = _z_exact(job, n) * factor / pin_mass
        k = None
        cons = _merge_constraints(job, extra)
        if constraint is not None:
            k = (_chain_exact(job, n, cons) * factor / pin_mass
                 if cons is not None else Fraction(0))
        log_z = frac_log(z) if z else -math.inf
        log_k = None if k is None else (frac_log(k) if k else -math.inf)
        return PartitionSums(n=n, z=z, k=k, log_z=log_z, log_k=log_k,
                             normalization=job.normalization, depth=depth)
    pin_log = math.log(job.fiber._pin_mass) if job.pinned else 0.0
    log_z = _log_z(job, n) + shift - pin_log
    log_k = None
    if constraint is not None:
        cons = _merge_constraints(job, extra)
        log_k = (-math.inf if cons is None
                 else _chain_log(job, n, cons) + shift - pin_log)
    z = math.exp(log_z) if log_z < 700 else math.inf
    k = None
    if log_k is not None:
        k = math.exp(log_k) if log_k < 700 else math.inf
    return PartitionSums(n=n, z=z, k=k, log_z=log_z, log_k=log_k,
                         normalization=job.normalization, depth=depth)


def lambda_n_eval(job: TransformJob, n: int, constraint: WordLike,
                  offset: int = 0) -> Number:
    """lambda_n of the fiber set {y : y[offset+t] = constraint[t]}.

    A constraint describing the empty set evaluates to 0. The value does not
    depend on the normalization flag: the exp(n P(G1)) factor cancels in the
    ratio K / Z.
    """
    if n < 1:
        raise ValueError("lambda_n needs n >= 1")
    word = as_word(constraint)
    extra = {offset + t: s for t, s in enumerate(word)}
    if offset < 0:
        raise ValueError("constraint offset must be >= 0")
    cons = _merge_constraints(job, extra)
    if job.exact:
        if cons is None:
            return Fraction(0)
        return _chain_exact(job, n, cons) / _z_exact(job, n)
    if cons is None:
        return 0.0
    num = _chain_log(job, n, cons)
    if num == -math.inf:
        return 0.0
    return math.exp(num - _log_z(job, n))


def pushforward_eval(job: TransformJob, n: int, i: int,
                     cyl: TwoSidedCylinder) -> Number:
    """(sigma^i)_* lambda_n of a two-sided cylinder.

    Handles all regimes of i: constraint coordinates below 0 are matched
    against the base point's past, bulk coordinates become fiber constraints,
    and coordinates beyond the weight horizon n + r - 1 are still exact
    because the fiber measure extends to any depth.
    """
    if n < 1 or i < 0:
        raise ValueError("pushforward needs n >= 1 and i >= 0")
    fc = shifted_cylinder_constraints(job.space, cyl, job.past, i)
    zero = Fraction(0) if job.exact else 0.0
    one = Fraction(1) if job.exact else 1.0
    if fc is None:
        return zero
    cons = _merge_constraints(job, fc.coordinates())
    if cons is None:
        return zero
    if cons == job.pin_constraints:
        return one
    if job.exact:
        return _chain_exact(job, n, cons) / _z_exact(job, n)
    num = _chain_log(job, n, cons)
    if num == -math.inf:
        return 0.0
    return math.exp(num - _log_z(job, n))


def endpoint_eval(job: TransformJob, n: int, cyl: TwoSidedCylinder) -> Number:
    """(sigma^n)_* lambda_n (A): the un-averaged endpoint.

    For the Bernoulli example this equals mu^u_{G1}[future part] *
    mu_{G2}[past part], which does not converge to mu_{G2}(A); it is the
    reason the averaged measures mu_n exist at all.
    """
    m_a = max(0, -cyl.start)
    n_a = max(0, cyl.end)
    if n <= m_a + n_a:
        raise ValueError(
            f"endpoint_eval needs n > M + N = {m_a + n_a} for this cylinder")
    return pushforward_eval(job, n, n, cyl)


def mu_n_eval(job: TransformJob, n: int, cyl: TwoSidedCylinder) -> Number:
    """mu_n(A) = (1/n) sum_{i=0}^{n-1} (sigma^i)_* lambda_n (A)."""
    if n < 1:
        raise ValueError("mu_n needs n >= 1")
    if job.exact:
        den = _z_exact(job, n)
        total = Fraction(0)
        for i in range(n):
            fc = shifted_cylinder_constraints(job.space, cyl, job.past, i)
            if fc is None:
                continue
            cons = _merge_constraints(job, fc.coordinates())
            if cons is None:
                continue
            if cons == job.pin_constraints:
                total += 1
            else:
                total += _chain_exact(job, n, cons) / den
        return total / n
    return _mu_n_float(job, n, cyl)


def _mu_n_float(job: TransformJob, n: int, cyl: TwoSidedCylinder) -> float:
    nb = job.block_length
    q = job.state1.q
    w = job.w_matrix
    rec = job.state1.recoding
    last = rec.last_symbols
    size = q.shape[0]
    pins = job.pin_constraints
    max_pin = max(pins, default=-1)
    log_z = _log_z(job, n)

    length = cyl.span
    word = cyl.symbols
    bulk: list[int] = []          # i with shared full-word constraint in the bulk
    specials: list[dict[int, int]] = []
    ones = 0
    for i in range(n):
        fc = shifted_cylinder_constraints(job.space, cyl, job.past, i)
        if fc is None:
            continue
        cons = _merge_constraints(job, fc.coordinates())
        if cons is None:
            continue
        if cons == pins:
            ones += 1
            continue
        offset = fc.offset
        if (fc.symbols == word and offset > max_pin and offset >= nb
                and offset + length - 1 <= nb + n - 1):
            bulk.append(offset)
        else:
            specials.append(cons)

    total = float(ones)
    for cons in specials:
        num = _chain_log(job, n, cons)
        if num > -math.inf:
            total += math.exp(num - log_z)

    if bulk:
        top = nb + n - 1
        # prefix vectors (pin masks applied), normalized with running logs
        pref = np.zeros((top + 1, size))
        pref_log = np.zeros(top + 1)
        v = np.zeros(size)
        v[job.entry_block] = 1.0
        acc = 0.0
        for s in range(top + 1):
            v = v @ (w if nb <= s <= nb + n - 1 else q)
            sym = pins.get(s)
            if sym is not None:
                v = np.where(last == sym, v, 0.0)
            tot = float(v.sum())
            if tot <= 0.0:
                raise ArithmeticError("pinned fiber has zero mass")
            v /= tot
            acc += math.log(tot)
            pref[s] = v
            pref_log[s] = acc
        # suffix vectors: value after step s dotted with suf[s]
        suf = np.zeros((top + 1, size))
        suf_log = np.zeros(top + 1)
        u = np.ones(size)
        acc = 0.0
        suf[top] = u
        for s in range(top, 0, -1):
            u = (w if nb <= s <= nb + n - 1 else q) @ u
            tot = float(u.max())
            u /= tot
            acc += math.log(tot)
            suf[s - 1] = u
            suf_log[s - 1] = acc
        offsets = np.array(sorted(bulk), dtype=int)
        x = pref[offsets - 1]
        for t, sym in enumerate(word):
            x = x @ w
            x = np.where(last[None, :] == sym, x, 0.0)
        ends = offsets + length - 1
        dots = np.einsum("ij,ij->i", x, suf[ends])
        with np.errstate(divide="ignore"):
            lognums = np.where(dots > 0, np.log(np.where(dots > 0, dots, 1.0))
                               + pref_log[offsets - 1] + suf_log[ends], -np.inf)
        total += float(np.exp(lognums[lognums > -np.inf] - log_z).sum())

    return total / n


@dataclass(frozen=True)
class GrowthSeries:
    """(1/n) log Z_n and successive differences against the target gap
    P(G2) - P(G1); raw normalization only."""

    ns: tuple[int, ...]
    values: tuple[float, ...]
    diffs: tuple[float, ...]
    target: float

    @property
    def final_gap(self) -> float:
        return abs(self.diffs[-1] - self.target)


def growth_series(job: TransformJob, ns: Sequence[int]) -> GrowthSeries:
    """Growth-rate series of the fiber integrals; the limit of the successive
    differences is the pressure gap of the two potentials."""
    if job.normalization != RAW:
        raise ValueError("growth_series needs raw normalization "
                         "(the exp(n P(G1)) factor would shift the limit)")
    ns = tuple(int(n) for n in ns)
    if not ns or any(n < 1 for n in ns) or list(ns) != sorted(set(ns)):
        raise ValueError("n values must be strictly increasing and >= 1")
    top = ns[-1] + 1
    if job.exact:
        logs = {n: (frac_log(_z_exact(job, n)
                             / (job.fiber._pin_mass_exact if job.pinned else 1)))
                for n in range(1, top + 1)}
    elif job.pinned:
        pin_log = math.log(job.fiber._pin_mass)
        logs = {n: _chain_log(job, n, job.pin_constraints) - pin_log
                for n in range(1, top + 1)}
    else:
        logs = {}
        nb = job.block_length
        q = job.state1.q
        w = job.w_matrix
        v = np.zeros(q.shape[0])
        v[job.entry_block] = 1.0
        for _ in range(nb):
            v = v @ q
        acc = 0.0
        for j in range(1, top + 1):
            v = v @ w
            tot = float(v.sum())
            v /= tot
            acc += math.log(tot)
            logs[j] = acc
    values = tuple(logs[n] / n for n in ns)
    diffs = tuple(logs[n + 1] - logs[n] for n in ns)
    return GrowthSeries(ns=ns, values=values, diffs=diffs,
                        target=job.pressure_gap())


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    mu: Number
    abs_error: Number
    n_times_error: Number


@dataclass(frozen=True)
class ConvergenceReport:
    """mu_n(A) against the exactly computable limit mu_{G2}(A).

    fitted_c is the mean of n * error over the tail half of the sampled n;
    bounded says whether n * error stays within 10% of it (plus a tiny
    absolute floor for the degenerate already-converged case).
    """

    cylinder: TwoSidedCylinder
    reference: Number
    rows: tuple[ConvergenceRow, ...]
    fitted_c: float
    bounded: bool


def convergence_report(job: TransformJob, cyl: TwoSidedCylinder,
                       ns: Sequence[int]) -> ConvergenceReport:
    ns = tuple(int(n) for n in ns)
    if not ns or any(n < 1 for n in ns) or list(ns) != sorted(set(ns)):
        raise ValueError("n values must be strictly increasing and >= 1")
    if job.exact:
        reference = job.state2.cylinder_measure_exact(cyl.symbols)
    else:
        reference = job.state2.cylinder_measure(cyl.symbols)
    rows = []
    for n in ns:
        mu = mu_n_eval(job, n, cyl)
        err = abs(mu - reference)
        rows.append(ConvergenceRow(n=n, mu=mu, abs_error=err, n_times_error=n * err))
    tail = rows[len(rows) // 2:]
    fitted = float(sum(float(r.n_times_error) for r in tail)) / len(tail)
    worst = max(float(r.n_times_error) for r in rows)
    bounded = worst <= 1.1 * fitted + 1e-9
    return ConvergenceReport(cylinder=cyl, reference=reference, rows=tuple(rows),
                             fitted_c=fitted, bounded=bounded)
