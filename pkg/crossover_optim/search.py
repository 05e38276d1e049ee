"""Enumeration and sampling of binary p = t designs, ranked by information trace."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import islice, product
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from .covmodels import Scenario
from .designs import Design, all_permutations, fixture_designs, format_design, make_oa
from .errors import CapacityError, CrossoverError, InvalidInputError
from .infomat import batch_traces, precision_blocks
from .matlib import DEFAULT_TOL, Tolerance

DEFAULT_CAP = 10 ** 7


@dataclass
class SearchReport:
    evaluated: int
    best_designs: List[Tuple[Design, float]]
    oa_rank: Optional[int]
    ties: int
    oa_trace: Optional[float] = None
    seed: Optional[int] = None
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def best_trace(self) -> float:
        return self.best_designs[0][1]

    def to_dict(self) -> Dict[str, object]:
        out = {
            "evaluated": self.evaluated,
            "best": [{"design": format_design(d), "trace": trace} for d, trace in self.best_designs],
            "oa_rank": self.oa_rank,
            "oa_trace": self.oa_trace,
            "ties": self.ties,
            "seed": self.seed,
        }
        out.update(self.extra)
        return out


def enumerate_binary(t: int, n: int, cap: int = DEFAULT_CAP) -> Iterator[Design]:
    """Every design whose columns are permutations of 1..t, lexicographic order."""
    if t < 1 or n < 1:
        raise InvalidInputError(f"t and n must be positive, got t={t}, n={n}")
    total = math.factorial(t) ** n
    if total > cap:
        raise CapacityError(
            f"{total} binary designs for t={t}, n={n} exceed the enumeration cap {cap}; use sampling instead"
        )
    return _enumerate(t, n)


def _enumerate(t: int, n: int) -> Iterator[Design]:
    perms = all_permutations(t)
    for idx in product(range(len(perms)), repeat=n):
        yield Design(t, n, t, perms[list(idx)].T)


def _fixtures_for(t: int, n: int) -> List[Design]:
    found = []
    for name in ("p3", "p4", "gene"):
        for d in fixture_designs(name).values():
            if (d.t, d.n, d.p) == (t, n, t) and d not in found:
                found.append(d)
    return found


def sample_binary(t: int, n: int, count: int, seed: int, include_fixtures: bool = False) -> Iterator[Design]:
    """`count` seeded random binary designs; fixtures with matching (t, n) come first when asked."""
    if t < 1 or n < 1 or count < 0:
        raise InvalidInputError(f"invalid sample request t={t}, n={n}, count={count}")
    if include_fixtures:
        yield from _fixtures_for(t, n)
    rng = np.random.default_rng(seed)
    block = 4096
    remaining = count
    base = np.arange(t)
    while remaining > 0:
        size = min(block, remaining)
        stack = rng.permuted(np.broadcast_to(base, (size, n, t)).copy(), axis=2)
        for cols in stack:
            yield Design(t, n, t, cols.T)
        remaining -= size


def _chunks(designs: Iterable[Design], size: int) -> Iterator[List[Design]]:
    it = iter(designs)
    while True:
        chunk = list(islice(it, size))
        if not chunk:
            return
        yield chunk


def _chunk_traces(chunk: List[Design], W: np.ndarray, t: int, tol: Tolerance) -> np.ndarray:
    return batch_traces(np.stack([d.assignment for d in chunk]), W, t, tol)


def _order_with_ties(candidates: List[Tuple[Design, float]], tol: Tolerance) -> List[Tuple[Design, float]]:
    """Descending trace; designs within eq_tol of a group's leader are ordered lexicographically."""
    ordered = sorted(candidates, key=lambda c: -c[1])
    out: List[Tuple[Design, float]] = []
    i = 0
    while i < len(ordered):
        lead = ordered[i][1]
        j = i
        while j < len(ordered) and lead - ordered[j][1] <= tol.eq_tol * abs(lead):
            j += 1
        out.extend(sorted(ordered[i:j], key=lambda c: c[0].key()))
        i = j
    return out


def _oa_reference(t: int, n: int) -> Optional[Design]:
    if t < 2 or n % (t * (t - 1)):
        return None
    try:
        return make_oa(t, n // (t * (t - 1)))
    except CrossoverError:
        return None


def rank_by_trace(designs: Iterable[Design], scenario: Scenario, top: int = 5, chunk_size: int = 4096,
                  threads: int = 1, tol: Tolerance = DEFAULT_TOL, logger=None) -> SearchReport:
    """Closed-form traces for a stream of designs sharing (t, n, p)."""
    stream = iter(designs)
    first = next(stream, None)
    if first is None:
        raise InvalidInputError("rank_by_trace needs at least one design")
    t, n, p = first.t, first.n, first.p
    W = precision_blocks(scenario, p, tol)

    def evaluate(chunk):
        for d in chunk:
            if (d.t, d.n, d.p) != (t, n, p):
                raise InvalidInputError(f"design {d.label()} has (t, n, p) = {(d.t, d.n, d.p)}, expected {(t, n, p)}")
        return chunk, _chunk_traces(chunk, W, t, tol)

    all_traces: List[np.ndarray] = []
    candidates: List[Tuple[Design, float]] = []
    chunks = _chunks(_prepend(first, stream), chunk_size)

    def absorb(chunk, traces):
        all_traces.append(traces)
        k = min(top, len(traces))
        kth = np.partition(traces, len(traces) - k)[len(traces) - k]
        keep = np.nonzero(traces >= kth - tol.eq_tol * abs(kth))[0]
        candidates.extend((chunk[i], float(traces[i])) for i in keep)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            while True:
                window = list(islice(chunks, threads * 2))
                if not window:
                    break
                for chunk, traces in pool.map(evaluate, window):
                    absorb(chunk, traces)
    else:
        for chunk in chunks:
            absorb(*evaluate(chunk))

    traces = np.concatenate(all_traces)
    ordered = _order_with_ties(candidates, tol)
    best = ordered[0][1]
    ties = int(np.sum(best - traces <= tol.eq_tol * abs(best)))

    oa_rank = None
    oa_trace = None
    reference = _oa_reference(t, n) if p == t else None
    if reference is not None:
        oa_trace = float(_chunk_traces([reference], W, t, tol)[0])
        oa_rank = 1 + int(np.sum(traces > oa_trace + tol.eq_tol * abs(oa_trace)))

    if logger:
        logger.log(f"Ranked {traces.size} designs: best trace {best:.12g}, ties {ties}, oa_rank {oa_rank}")
    return SearchReport(evaluated=int(traces.size), best_designs=ordered[:top], oa_rank=oa_rank,
                        ties=ties, oa_trace=oa_trace)


def _prepend(first: Design, rest: Iterator[Design]) -> Iterator[Design]:
    yield first
    yield from rest
