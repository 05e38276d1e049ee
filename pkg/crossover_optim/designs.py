"""Crossover designs: representation, incidence matrices, named families, classification.

A design is a p x n array of treatment labels (rows = periods, columns =
subjects). Labels are 0-based inside the package and 1-based in files and
displays. Observations are ordered subject-major: row (j-1)p + i of T_d holds
subject j in period i.
"""

from dataclasses import dataclass, replace
from itertools import permutations
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError, UnsupportedError
from .matlib import Matrix


def _integer_labels(values) -> np.ndarray:
    """Treatment labels as int64; non-integral values are rejected, not truncated."""
    try:
        arr = np.asarray(values)
    except ValueError:
        raise InvalidInputError("design rows must all have the same length") from None
    if arr.dtype.kind in "iub":
        return arr.astype(np.int64)
    try:
        as_float = arr.astype(float)
    except (TypeError, ValueError):
        raise InvalidInputError("treatment labels must be integers") from None
    if not np.all(np.isfinite(as_float)) or np.any(as_float != np.round(as_float)):
        raise InvalidInputError("treatment labels must be integers")
    return as_float.astype(np.int64)


@dataclass(frozen=True, eq=False)
class Design:
    t: int
    n: int
    p: int
    assignment: np.ndarray
    name: str = ""

    def __post_init__(self):
        arr = np.array(_integer_labels(self.assignment), copy=True)
        if min(self.t, self.n, self.p) < 1:
            raise InvalidInputError(f"t, n, p must be positive, got ({self.t}, {self.n}, {self.p})")
        if arr.shape != (self.p, self.n):
            raise InvalidInputError(f"assignment shape {arr.shape} does not match p x n = ({self.p}, {self.n})")
        if arr.min() < 0 or arr.max() >= self.t:
            raise InvalidInputError(f"treatment labels must lie in 1..{self.t}")
        arr.setflags(write=False)
        object.__setattr__(self, "assignment", arr)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], t: Optional[int] = None, name: str = "") -> "Design":
        """Build from 1-based period rows as displayed in the literature."""
        arr = _integer_labels(rows)
        if arr.ndim != 2:
            raise InvalidInputError("design rows must form a 2-D array")
        if t is None:
            t = int(arr.max())
        return cls(t=t, n=arr.shape[1], p=arr.shape[0], assignment=arr - 1, name=name)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], t: int, name: str = "") -> "Design":
        """Build from 0-based subject sequences."""
        arr = _integer_labels(columns).T
        return cls(t=t, n=arr.shape[1], p=arr.shape[0], assignment=arr, name=name)

    def rows(self) -> List[List[int]]:
        return (self.assignment + 1).tolist()

    def key(self) -> Tuple[int, ...]:
        """Lexicographic ordering key (subject by subject)."""
        return tuple(self.assignment.T.ravel().tolist())

    def replicate(self, times: int) -> "Design":
        """Repeat every column block `times` times."""
        arr = np.tile(self.assignment, (1, times))
        return Design(self.t, self.n * times, self.p, arr, self.name)

    def label(self) -> str:
        return self.name or f"design_t{self.t}_n{self.n}_p{self.p}"

    def __eq__(self, other):
        if not isinstance(other, Design):
            return NotImplemented
        return (self.t, self.n, self.p) == (other.t, other.n, other.p) and np.array_equal(
            self.assignment, other.assignment
        )

    def __hash__(self):
        return hash((self.t, self.n, self.p, self.key()))


@dataclass(frozen=True)
class DesignClassFlags:
    binary: bool
    uniform_on_periods: bool
    uniform_on_subjects: bool
    uniform: bool
    balanced_uniform: bool
    oa_type1_strength2_lambda: Optional[int]

    def to_dict(self) -> Dict[str, object]:
        return {
            "binary": self.binary,
            "uniform_on_periods": self.uniform_on_periods,
            "uniform_on_subjects": self.uniform_on_subjects,
            "uniform": self.uniform,
            "balanced_uniform": self.balanced_uniform,
            "oa_type1_strength2_lambda": self.oa_type1_strength2_lambda,
        }


# --- INCIDENCE MATRICES ---

def shift_matrix(p: int) -> Matrix:
    """psi: p x p with ones on the sub-diagonal."""
    if p < 1:
        raise InvalidInputError(f"shift_matrix needs p >= 1, got {p}")
    return np.eye(p, k=-1)


def treatment_matrix(d: Design) -> Matrix:
    T = np.zeros((d.n * d.p, d.t))
    labels = d.assignment.T.ravel()
    T[np.arange(d.n * d.p), labels] = 1.0
    return T


def carryover_matrix(d: Design) -> Matrix:
    """F_d = (I_n kron psi) T_d."""
    return np.kron(np.eye(d.n), shift_matrix(d.p)) @ treatment_matrix(d)


# --- CLASSIFICATION ---

def _counts_per_line(labels: np.ndarray, t: int) -> np.ndarray:
    """Treatment counts for every row of `labels` -> shape (rows, t)."""
    out = np.zeros((labels.shape[0], t), dtype=np.int64)
    for row in range(labels.shape[0]):
        out[row] = np.bincount(labels[row], minlength=t)
    return out


def _pair_counts(first: np.ndarray, second: np.ndarray, t: int) -> np.ndarray:
    counts = np.zeros((t, t), dtype=np.int64)
    np.add.at(counts, (first, second), 1)
    return counts


def verify_oa_type1_strength2(d: Design) -> Optional[int]:
    """Return lambda if d is an orthogonal array of Type I and strength 2, else None."""
    if d.t < 2 or d.p < 2:
        return None
    columns = d.assignment.T
    if any(len(set(col.tolist())) != d.p for col in columns):
        return None
    off = ~np.eye(d.t, dtype=bool)
    lam = None
    for r1 in range(d.p):
        for r2 in range(d.p):
            if r1 == r2:
                continue
            counts = _pair_counts(d.assignment[r1], d.assignment[r2], d.t)[off]
            if counts.min() != counts.max() or counts[0] == 0:
                return None
            if lam is None:
                lam = int(counts[0])
            elif counts[0] != lam:
                return None
    return lam


def classify(d: Design) -> DesignClassFlags:
    binary = all(len(set(col.tolist())) == d.p for col in d.assignment.T)
    uniform_on_periods = d.n % d.t == 0 and bool(
        np.all(_counts_per_line(d.assignment, d.t) == d.n // d.t)
    )
    uniform_on_subjects = d.p % d.t == 0 and bool(
        np.all(_counts_per_line(d.assignment.T, d.t) == d.p // d.t)
    )
    uniform = uniform_on_periods and uniform_on_subjects
    balanced_uniform = False
    if uniform and d.p > 1:
        counts = _pair_counts(d.assignment[:-1].ravel(), d.assignment[1:].ravel(), d.t)
        off = counts[~np.eye(d.t, dtype=bool)]
        balanced_uniform = bool(off.size > 0 and off.min() == off.max())
    return DesignClassFlags(
        binary=binary,
        uniform_on_periods=uniform_on_periods,
        uniform_on_subjects=uniform_on_subjects,
        uniform=uniform,
        balanced_uniform=balanced_uniform,
        oa_type1_strength2_lambda=verify_oa_type1_strength2(d),
    )


# --- NAMED FAMILIES ---

def make_uniform(t: int, reps: int) -> Design:
    """Cyclic Latin square columns repeated `reps` times (p = t, n = t * reps)."""
    if t < 2 or reps < 1:
        raise InvalidInputError(f"make_uniform needs t >= 2 and reps >= 1, got t={t}, reps={reps}")
    n = t * reps
    periods = np.arange(t)[:, None]
    subjects = np.arange(n)[None, :]
    return Design(t, n, t, (periods + subjects) % t, name=f"uniform_t{t}")


def _williams_sequence(t: int) -> List[int]:
    seq = [0]
    low, high = 1, t - 1
    for i in range(1, t):
        if i % 2:
            seq.append(low)
            low += 1
        else:
            seq.append(high)
            high -= 1
    return seq


def make_balanced_uniform(t: int, reps: int) -> Design:
    """Williams square for even t, columns repeated `reps` times."""
    if t % 2 or t < 4:
        raise UnsupportedError(f"balanced uniform designs are built for even t >= 4 only, got t={t}")
    if reps < 1:
        raise InvalidInputError(f"reps must be >= 1, got {reps}")
    base = np.array(_williams_sequence(t))
    square = (base[:, None] + np.arange(t)[None, :]) % t
    return Design(t, t, t, square, name=f"balanced_uniform_t{t}").replicate(reps)


OA_BASE_ROWS = {
    3: [
        [1, 2, 3, 1, 2, 3],
        [2, 3, 1, 3, 1, 2],
        [3, 1, 2, 2, 3, 1],
    ],
    4: [
        [1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4],
        [2, 3, 4, 1, 3, 4, 1, 2, 4, 1, 2, 3],
        [3, 4, 2, 4, 1, 3, 2, 4, 1, 3, 1, 2],
        [4, 2, 3, 3, 4, 1, 4, 1, 2, 2, 3, 1],
    ],
}


def make_oa(t: int, lam: int) -> Design:
    """OA_I(n = lam * t(t-1), p = t, t, 2) by column replication of a lambda = 1 array."""
    if t not in OA_BASE_ROWS:
        raise UnsupportedError(
            f"no orthogonal array construction for t={t}; supply a design file and check it "
            f"with verify_oa_type1_strength2"
        )
    if lam < 1:
        raise InvalidInputError(f"lambda must be >= 1, got {lam}")
    base = Design.from_rows(OA_BASE_ROWS[t], t=t, name=f"dstar_t{t}")
    return base.replicate(lam)


def gene_design() -> Design:
    """3 x 3 study design: 6 subjects each on ABC, CAB, BCA (A, B, C read as 1, 2, 3)."""
    sequences = [[1, 2, 3]] * 6 + [[3, 1, 2]] * 6 + [[2, 3, 1]] * 6
    return Design.from_rows(np.array(sequences).T, t=3, name="d0")


def fixture_designs(name: str) -> Dict[str, Design]:
    """Named fixture sets: p3 (d1, dstar), p4 (d1, d2, dstar), gene (d0, dstar)."""
    if name == "p3":
        d1 = Design.from_rows([
            [1, 2, 3, 1, 2, 3],
            [2, 3, 1, 2, 3, 1],
            [3, 1, 2, 3, 1, 2],
        ], t=3, name="d1")
        return {"d1": d1, "dstar": replace(make_oa(3, 1), name="dstar")}
    if name == "p4":
        d1 = Design.from_rows([
            [1, 4, 3, 2] * 3,
            [2, 1, 4, 3] * 3,
            [3, 2, 1, 4] * 3,
            [4, 3, 2, 1] * 3,
        ], t=4, name="d1")
        d2 = Design.from_rows([
            [1, 2, 3, 4] * 3,
            [4, 1, 2, 3] * 3,
            [2, 3, 4, 1] * 3,
            [3, 4, 1, 2] * 3,
        ], t=4, name="d2")
        return {"d1": d1, "d2": d2, "dstar": replace(make_oa(4, 1), name="dstar")}
    if name == "gene":
        return {"d0": gene_design(), "dstar": replace(make_oa(3, 3), name="dstar")}
    raise InvalidInputError(f"unknown fixture set {name!r}; expected p3, p4 or gene")


def all_permutations(t: int) -> np.ndarray:
    """Every permutation of 0..t-1 as rows, lexicographic."""
    return np.array(list(permutations(range(t))), dtype=np.int64)


# --- TEXT FORMAT ---

def format_design(d: Design) -> str:
    lines = [f"{d.t} {d.n} {d.p}"]
    lines.extend(" ".join(str(v) for v in row) for row in d.rows())
    return "\n".join(lines) + "\n"


def parse_design(text: str, source: str = "<string>") -> Design:
    """Parse 't n p' followed by p rows of n labels; '#' starts a comment."""
    tokens: List[List[str]] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.append(line.split())
    if not tokens:
        raise InvalidInputError(f"{source}: empty design file")
    try:
        header = [int(v) for v in tokens[0]]
        body = [[int(v) for v in row] for row in tokens[1:]]
    except ValueError as e:
        raise InvalidInputError(f"{source}: non-integer entry ({e})") from e
    if len(header) != 3:
        raise InvalidInputError(f"{source}: header must be 't n p', got {tokens[0]}")
    t, n, p = header
    if len(body) != p:
        raise InvalidInputError(f"{source}: expected {p} period rows, found {len(body)}")
    for i, row in enumerate(body, start=1):
        if len(row) != n:
            raise InvalidInputError(f"{source}: row {i} has {len(row)} labels, expected {n}")
    name = Path(source).stem if source != "<string>" else ""
    try:
        return Design.from_rows(body, t=t, name=name)
    except InvalidInputError as e:
        raise InvalidInputError(f"{source}: {e}") from e


def load_design(path) -> Design:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidInputError(f"cannot read design file {path}: {e}") from e
    return parse_design(text, source=str(path))


def save_design(d: Design, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(format_design(d))
    except OSError as e:
        raise InvalidInputError(f"cannot write design file {path}: {e}") from e
    return path

