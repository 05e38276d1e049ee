"""Trace upper bound, relative difference, proportional efficiency and parameter sweeps."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .covmodels import (Kernel, KernelFamily, MarkovScenario, ProportionalScenario, case_scenario,
                        omega_matrices, vstar)
from .designs import Design, classify, make_oa, shift_matrix
from .errors import ClassViolationError, CrossoverError, InvalidInputError
from .infomat import info_markov, info_proportional, starred_traces
from .matlib import DEFAULT_TOL, Tolerance, centering


@dataclass(frozen=True)
class TraceComponents:
    c11: float
    c12: float
    c22: float
    c22_11: float
    c22_22: float

    @property
    def bound(self) -> float:
        return self.c11 - self.c12 ** 2 / self.c22


def _check_square_class(t: int, p: int):
    if p != t or t < 3:
        raise ClassViolationError(f"the trace bound needs p = t >= 3, got t={t}, p={p}")


def trace_components(s: MarkovScenario, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> TraceComponents:
    omega1, _, omega4 = omega_matrices(s, p, tol)
    psi = shift_matrix(p)
    Hp = centering(p)

    def quad(omega):
        return float(np.trace(Hp @ psi.T @ omega @ psi))

    c22_11 = quad(omega1)
    c22_22 = quad(omega4)
    return TraceComponents(
        c11=n * float(np.trace(omega1) + np.trace(omega4)),
        c12=n * float(np.trace(omega1 @ psi) + np.trace(omega4 @ psi)),
        c22=n * (c22_11 + c22_22),
        c22_11=c22_11,
        c22_22=c22_22,
    )


def upper_bound_u(s: MarkovScenario, t: int, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> float:
    """Upper bound on tr(C_{d(s2)}) over binary designs with p = t."""
    _check_square_class(t, p)
    a1, b1, c1 = starred_traces(vstar(s.v1(p), tol))
    aR, bR, cR = starred_traces(vstar(s.vr(p), tol))
    k = (1.0 + s.rho_bar ** 2) / s.sigma12
    return n * (a1 + k * aR - (b1 + k * bR) ** 2 / (c1 + k * cR))


def bound_gap(s: MarkovScenario, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> float:
    """u - tr(C_{d*(s2)}) for an orthogonal array, as an explicit non-negative quadratic."""
    _, b1, c1 = starred_traces(vstar(s.v1(p), tol))
    _, bR, cR = starred_traces(vstar(s.vr(p), tol))
    w = 1.0 + s.rho_bar ** 2
    return n * w * (b1 * cR - bR * c1) ** 2 / ((s.sigma12 * c1 + w * cR) * c1 * cR)


def attains_bound(s: MarkovScenario, p: int, tol: Tolerance = DEFAULT_TOL) -> bool:
    _, b1, c1 = starred_traces(vstar(s.v1(p), tol))
    _, bR, cR = starred_traces(vstar(s.vr(p), tol))
    lhs, rhs = b1 * cR, bR * c1
    return abs(lhs - rhs) <= tol.eq_tol * max(abs(lhs), abs(rhs))


def rd_terms(d: Design, s: MarkovScenario, tol: Tolerance = DEFAULT_TOL) -> Tuple[float, float, float]:
    """(trace, u, RD) for a binary design with p = t."""
    if d.p != d.t or not classify(d).binary:
        raise ClassViolationError(f"{d.label()}: RD is defined for binary designs with p = t")
    _check_square_class(d.t, d.p)
    trace = info_markov(d, s, tol=tol).trace
    u = upper_bound_u(s, d.t, d.n, d.p, tol)
    rd = 1.0 - trace / u
    # rounding can push an attained bound a hair past u
    if -tol.eq_tol <= rd < 0.0:
        rd = 0.0
    return trace, u, rd


def relative_difference(d: Design, s: MarkovScenario, tol: Tolerance = DEFAULT_TOL) -> float:
    """RD = 1 - tr(C_{d(s2)}) / u."""
    return rd_terms(d, s, tol)[2]


def univariate_upper_bound(V, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> float:
    """n (e11 - e12^2 / e22): the largest tr(C_{d(uni)}) over binary designs with p = t."""
    e11, e12, e22 = starred_traces(vstar(V, tol))
    return n * (e11 - e12 ** 2 / e22)


def efficiency_proportional(d: Design, dstar: Design, s: ProportionalScenario,
                            tol: Tolerance = DEFAULT_TOL) -> float:
    if (d.t, d.n, d.p) != (dstar.t, dstar.n, dstar.p):
        raise InvalidInputError(
            f"designs differ in (t, n, p): {(d.t, d.n, d.p)} vs {(dstar.t, dstar.n, dstar.p)}"
        )
    return info_proportional(d, s, tol=tol).trace / info_proportional(dstar, s, tol=tol).trace


# --- SWEEPS ---

def kernel_family(name) -> str:
    try:
        return KernelFamily(name).value
    except ValueError:
        raise InvalidInputError(f"unknown kernel family {name!r}") from None


@dataclass(frozen=True)
class SweepRow:
    structure: str
    case: str
    design: str
    t: int
    n: int
    p: int
    r: float
    rho: Optional[float]
    sigma11: float
    sigma22: float
    trace: Optional[float]
    upper_bound: Optional[float]
    rd: Optional[float]
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepAggregate:
    design: str
    case: str
    r: float
    min_rd: Optional[float]
    max_rd: Optional[float]


@dataclass
class SweepResult:
    rows: List[SweepRow] = field(default_factory=list)
    aggregates: List[SweepAggregate] = field(default_factory=list)

    def max_rd(self, design: str, case: Optional[str] = None) -> float:
        values = [a.max_rd for a in self.aggregates
                  if a.design == design and (case is None or a.case == case) and a.max_rd is not None]
        return max(values)

    def aggregate(self, design: str, case: str, r: float) -> SweepAggregate:
        for a in self.aggregates:
            if a.design == design and a.case == case and math.isclose(a.r, r, rel_tol=0, abs_tol=1e-12):
                return a
        raise KeyError((design, case, r))

    @property
    def errors(self) -> List[SweepRow]:
        return [row for row in self.rows if row.error]


def _markov_cell(design_id: str, d: Design, case: int, r: float, rho: float,
                 sigma11: float, sigma22: float, tol: Tolerance) -> SweepRow:
    common = dict(structure="markov", case=str(case), design=design_id, t=d.t, n=d.n, p=d.p,
                  r=r, rho=rho, sigma11=sigma11, sigma22=sigma22)
    try:
        trace, u, rd = rd_terms(d, case_scenario(case, r, rho, sigma11, sigma22), tol)
        return SweepRow(trace=trace, upper_bound=u, rd=rd, **common)
    except CrossoverError as e:
        return SweepRow(trace=None, upper_bound=None, rd=None, error=e.code, **common)


def _proportional_cell(design_id: str, d: Design, family: str, r: float, reference: Optional[Design],
                       tol: Tolerance) -> SweepRow:
    common = dict(structure="proportional", case=family, design=design_id, t=d.t, n=d.n, p=d.p,
                  r=r, rho=None, sigma11=1.0, sigma22=1.0)
    try:
        s = ProportionalScenario(np.eye(1), Kernel(family, r))
        trace = info_proportional(d, s, tol=tol).trace
        if reference is None:
            raise InvalidInputError(f"{design_id}: no orthogonal-array reference for t={d.t}, n={d.n}")
        best = info_proportional(reference, s, tol=tol).trace
        rd = 1.0 - trace / best
        if -tol.eq_tol <= rd < 0.0:
            rd = 0.0
        return SweepRow(trace=trace, upper_bound=best, rd=rd, **common)
    except CrossoverError as e:
        return SweepRow(trace=None, upper_bound=None, rd=None, error=e.code, **common)


def _reference_design(d: Design) -> Optional[Design]:
    if d.p != d.t or d.t < 2 or d.n % (d.t * (d.t - 1)):
        return None
    try:
        return make_oa(d.t, d.n // (d.t * (d.t - 1)))
    except CrossoverError:
        return None


def _aggregate(rows: Sequence[SweepRow]) -> List[SweepAggregate]:
    groups: Dict[Tuple[str, str, float], List[float]] = {}
    order: List[Tuple[str, str, float]] = []
    for row in rows:
        key = (row.design, row.case, row.r)
        if key not in groups:
            groups[key] = []
            order.append(key)
        if row.rd is not None:
            groups[key].append(row.rd)
    out = []
    for key in order:
        values = groups[key]
        out.append(SweepAggregate(key[0], key[1], key[2],
                                  min(values) if values else None,
                                  max(values) if values else None))
    return out


def sweep(designs: Sequence[Tuple[str, Design]], cases: Sequence, r_grid: Sequence[float],
          rho_grid: Sequence[float] = (), structure: str = "markov", sigma11: float = 1.0,
          sigma22: float = 1.0, threads: int = 1, tol: Tolerance = DEFAULT_TOL, logger=None) -> SweepResult:
    """Evaluate every (design, case, r, rho) cell.

    Markov sweeps take cases 1-7 and report trace, u and RD. Proportional
    sweeps take kernel families as cases, leave rho empty, and report the
    univariate trace against the orthogonal-array reference (rd = 1 - e).
    Rows come back ordered by design (input order), case, r, rho.
    """
    if not designs:
        raise InvalidInputError("sweep needs at least one design")
    if structure not in ("markov", "proportional"):
        raise InvalidInputError(f"structure must be 'markov' or 'proportional', got {structure!r}")
    r_values = sorted(float(r) for r in r_grid)
    rho_values = sorted(float(v) for v in rho_grid)
    if structure == "markov" and not rho_values:
        raise InvalidInputError("a Markov sweep needs a non-empty rho grid")

    tasks = []
    for design_id, d in designs:
        if structure == "markov":
            for case in cases:
                for r in r_values:
                    for rho in rho_values:
                        tasks.append((_markov_cell, (design_id, d, int(case), r, rho, sigma11, sigma22, tol)))
        else:
            reference = _reference_design(d)
            for case in cases:
                family = kernel_family(case)
                for r in r_values:
                    tasks.append((_proportional_cell, (design_id, d, family, r, reference, tol)))

    if logger:
        logger.log(f"Sweep: {len(tasks)} cells, structure={structure}, threads={threads}")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda task: task[0](*task[1]), tasks))
    else:
        rows = [fn(*args) for fn, args in tasks]

    result = SweepResult(rows=rows, aggregates=_aggregate(rows))
    if logger:
        failed = len(result.errors)
        logger.log(f"Sweep finished: {len(rows) - failed} ok, {failed} error cells")
    return result
