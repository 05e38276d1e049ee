"""Within-period covariance kernels, dispersion builders and the starred matrices.

Kernels are stationary in the lag k = |i1 - i2| between periods:

    Mat05   r^k
    Mat15   (1 - k ln r) r^k
    MatInf  r^(k^2)

A proportional scenario uses Sigma = Gamma kron (I_n kron V). A Markov-type
scenario (two responses) uses V1 = sigma11 * V_C for the first response and a
second correlation matrix V_R for the part of response two not explained by
response one.
"""

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np
from scipy import linalg

from .errors import InvalidInputError, NotPositiveDefiniteError
from .matlib import DEFAULT_TOL, Matrix, Tolerance, check_positive_definite, symmetrize


class KernelFamily(str, Enum):
    MAT05 = "Mat05"
    MAT15 = "Mat15"
    MATINF = "MatInf"


@dataclass(frozen=True)
class Kernel:
    family: KernelFamily
    r: float
    scale: float = 1.0

    def __post_init__(self):
        try:
            family = KernelFamily(self.family)
        except ValueError:
            raise InvalidInputError(
                f"unknown kernel family {self.family!r}; expected one of "
                f"{', '.join(f.value for f in KernelFamily)}"
            ) from None
        object.__setattr__(self, "family", family)
        if not (0.0 < self.r < 1.0):
            raise InvalidInputError(f"kernel parameter r must lie in (0, 1), got {self.r!r}")
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise InvalidInputError(f"kernel scale must be positive, got {self.scale!r}")

    def matrix(self, p: int) -> Matrix:
        return build_kernel_matrix(self, p)

    def describe(self) -> Dict[str, object]:
        return {"family": self.family.value, "r": self.r}


@dataclass(frozen=True, eq=False)
class ExplicitCovariance:
    """A user-supplied p x p covariance matrix standing in for a kernel."""

    values: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidInputError(f"explicit covariance must be square, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidInputError("explicit covariance has non-finite entries")
        if np.max(np.abs(arr - arr.T)) > 1e-12 * max(1.0, float(np.max(np.abs(arr)))):
            raise InvalidInputError("explicit covariance is not symmetric")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    def matrix(self, p: int) -> Matrix:
        if p != self.values.shape[0]:
            raise InvalidInputError(
                f"explicit covariance is {self.values.shape[0]} x {self.values.shape[0]}, design has p={p}"
            )
        return self.scale * np.array(self.values)

    def describe(self) -> Dict[str, object]:
        return {"family": "explicit", "values": self.values.tolist()}


Covariance = Union[Kernel, ExplicitCovariance]


def build_kernel_matrix(k: Kernel, p: int) -> Matrix:
    if p < 1:
        raise InvalidInputError(f"kernel matrix size must be >= 1, got {p}")
    lag = np.arange(p, dtype=float)
    if k.family is KernelFamily.MAT05:
        column = k.r ** lag
    elif k.family is KernelFamily.MAT15:
        column = (1.0 - lag * math.log(k.r)) * k.r ** lag
    else:
        column = k.r ** (lag ** 2)
    return k.scale * linalg.toeplitz(column)


# --- SCENARIOS ---

@dataclass(frozen=True, eq=False)
class ProportionalScenario:
    gamma: np.ndarray
    kernel: Covariance

    def __post_init__(self):
        gamma = np.array(self.gamma, dtype=float, copy=True)
        if gamma.ndim == 0:
            gamma = gamma.reshape(1, 1)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise InvalidInputError(f"gamma must be a square matrix, got shape {gamma.shape}")
        if not np.all(np.isfinite(gamma)):
            raise InvalidInputError("gamma has non-finite entries")
        if np.max(np.abs(gamma - gamma.T)) > 1e-12 * max(1.0, float(np.max(np.abs(gamma)))):
            raise InvalidInputError("gamma is not symmetric")
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)

    @property
    def g(self) -> int:
        return self.gamma.shape[0]

    @property
    def structure(self) -> str:
        return "proportional"

    def gamma_inverse(self, tol: Tolerance = DEFAULT_TOL) -> Matrix:
        check_positive_definite(self.gamma, "gamma", tol)
        return symmetrize(linalg.inv(self.gamma))

    def v(self, p: int) -> Matrix:
        return self.kernel.matrix(p)

    def describe(self) -> Dict[str, object]:
        return {"structure": "proportional", "g": self.g, "gamma": self.gamma.tolist(),
                "kernelV": self.kernel.describe()}


@dataclass(frozen=True)
class MarkovScenario:
    """Two-response generalized Markov-type scenario.

    `kernel_v1` carries sigma11 as its scale; `kernel_vr` is a correlation
    kernel (scale 1).
    """

    sigma11: float
    sigma22: float
    rho: float
    kernel_v1: Covariance
    kernel_vr: Covariance
    case: int = field(default=0, compare=False)

    def __post_init__(self):
        if not (self.sigma11 > 0.0 and self.sigma22 > 0.0):
            raise InvalidInputError(f"sigma11 and sigma22 must be positive, got {self.sigma11}, {self.sigma22}")
        if not (0.0 < abs(self.rho) < 1.0):
            raise InvalidInputError(f"rho must satisfy 0 < |rho| < 1, got {self.rho!r}")
        object.__setattr__(self, "kernel_v1", replace(self.kernel_v1, scale=self.sigma11))
        object.__setattr__(self, "kernel_vr", replace(self.kernel_vr, scale=1.0))

    @property
    def g(self) -> int:
        return 2

    @property
    def structure(self) -> str:
        return "markov"

    @property
    def rho_bar(self) -> float:
        return self.rho * math.sqrt(self.sigma22 / self.sigma11)

    @property
    def sigma12(self) -> float:
        return self.sigma22 * (1.0 - self.rho ** 2)

    def v1(self, p: int) -> Matrix:
        return self.kernel_v1.matrix(p)

    def vr(self, p: int) -> Matrix:
        return self.kernel_vr.matrix(p)

    def describe(self) -> Dict[str, object]:
        return {"structure": "markov", "g": 2, "case": self.case or None,
                "kernelV1": self.kernel_v1.describe(), "kernelVR": self.kernel_vr.describe(),
                "sigma11": self.sigma11, "sigma22": self.sigma22, "rho": self.rho}


Scenario = Union[ProportionalScenario, MarkovScenario]


# Cases 1-7: (family of V1 / V_C, family of V_R, V_R uses r squared)
CASES: Dict[int, Tuple[KernelFamily, KernelFamily, bool]] = {
    1: (KernelFamily.MAT05, KernelFamily.MAT15, False),
    2: (KernelFamily.MAT05, KernelFamily.MATINF, False),
    3: (KernelFamily.MAT15, KernelFamily.MAT05, False),
    4: (KernelFamily.MAT15, KernelFamily.MATINF, False),
    5: (KernelFamily.MATINF, KernelFamily.MAT05, False),
    6: (KernelFamily.MATINF, KernelFamily.MAT15, False),
    7: (KernelFamily.MAT05, KernelFamily.MAT05, True),
}


def case_scenario(case: int, r: float, rho: float, sigma11: float = 1.0, sigma22: float = 1.0) -> MarkovScenario:
    """Markov scenario for one of Cases 1-7 at correlation r."""
    if case not in CASES:
        raise InvalidInputError(f"unknown case {case!r}; expected 1-7")
    fam1, fam_r, squared = CASES[case]
    kr = r * r if squared else r
    return MarkovScenario(sigma11, sigma22, rho, Kernel(fam1, r), Kernel(fam_r, kr), case=case)


# --- DISPERSION MATRICES ---

def build_proportional_sigma(s: ProportionalScenario, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    check_positive_definite(s.gamma, "gamma", tol)
    V = check_positive_definite(s.v(p), "V", tol)
    return np.kron(s.gamma, np.kron(np.eye(n), V))


def build_markov_sigma(s: MarkovScenario, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    In = np.eye(n)
    sigma11 = np.kron(In, s.v1(p))
    sigma12 = s.rho_bar * sigma11
    sigma22 = s.rho_bar ** 2 * sigma11 + s.sigma12 * np.kron(In, s.vr(p))
    sigma = np.block([[sigma11, sigma12], [sigma12, sigma22]])
    return check_positive_definite(sigma, "Sigma", tol)


# --- STARRED MATRICES ---

def vstar(V, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """V* = V^-1 - (1'V^-1 1)^-1 V^-1 J V^-1; zero row and column sums."""
    V = check_positive_definite(V, "V", tol)
    try:
        factor = linalg.cho_factor(V)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"V is not positive definite: {e}") from e
    Vinv = linalg.cho_solve(factor, np.eye(V.shape[0]))
    u = Vinv.sum(axis=1, keepdims=True)
    return symmetrize(Vinv - (u @ u.T) / float(u.sum()))


def omega_matrices(s: MarkovScenario, p: int, tol: Tolerance = DEFAULT_TOL) -> Tuple[Matrix, Matrix, Matrix]:
    v1s = vstar(s.v1(p), tol)
    vrs = vstar(s.vr(p), tol)
    omega4 = vrs / s.sigma12
    omega2 = s.rho_bar * omega4
    omega1 = v1s + s.rho_bar ** 2 * omega4
    return omega1, omega2, omega4


# --- SCENARIO FILES ---

_KERNEL_KEYS = {"family", "r"}
_PROPORTIONAL_KEYS = {"structure", "g", "gamma", "kernelV", "explicit"}
_MARKOV_KEYS = {"structure", "g", "kernelV1", "kernelVR", "sigma11", "sigma22", "rho", "case", "explicit"}


def _kernel_from_dict(data, where: str) -> Kernel:
    if not isinstance(data, dict):
        raise InvalidInputError(f"{where} must be an object with 'family' and 'r'")
    unknown = set(data) - _KERNEL_KEYS
    if unknown:
        raise InvalidInputError(f"{where}: unknown keys {sorted(unknown)}")
    if "family" not in data or "r" not in data:
        raise InvalidInputError(f"{where}: 'family' and 'r' are required")
    return Kernel(data["family"], float(data["r"]))


def _require(data: dict, key: str):
    if key not in data:
        raise InvalidInputError(f"scenario: missing required key {key!r}")
    return data[key]


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise InvalidInputError("scenario must be a JSON object")
    structure = _require(data, "structure")
    explicit = data.get("explicit")
    if structure == "proportional":
        unknown = set(data) - _PROPORTIONAL_KEYS
        if unknown:
            raise InvalidInputError(f"scenario: unknown keys {sorted(unknown)}")
        try:
            gamma = np.asarray(_require(data, "gamma"), dtype=float)
        except (TypeError, ValueError):
            raise InvalidInputError("scenario: gamma must be a numeric square matrix") from None
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise InvalidInputError(f"scenario: gamma must be a square matrix, got shape {gamma.shape}")
        if "g" in data and int(data["g"]) != gamma.shape[0]:
            raise InvalidInputError(f"scenario: g={data['g']} but gamma is {gamma.shape[0]} x {gamma.shape[0]}")
        if explicit is not None:
            kernel = ExplicitCovariance(np.asarray(explicit, dtype=float))
        else:
            kernel = _kernel_from_dict(_require(data, "kernelV"), "kernelV")
        return ProportionalScenario(gamma, kernel)
    if structure == "markov":
        unknown = set(data) - _MARKOV_KEYS
        if unknown:
            raise InvalidInputError(f"scenario: unknown keys {sorted(unknown)}")
        if "g" in data and int(data["g"]) != 2:
            raise InvalidInputError("scenario: the Markov-type structure is defined for g=2 only")
        sigma11 = float(_require(data, "sigma11"))
        sigma22 = float(_require(data, "sigma22"))
        rho = float(_require(data, "rho"))
        if explicit is not None:
            if not isinstance(explicit, dict) or set(explicit) != {"VC", "VR"}:
                raise InvalidInputError("scenario: markov 'explicit' must hold exactly 'VC' and 'VR'")
            v1 = ExplicitCovariance(np.asarray(explicit["VC"], dtype=float))
            vr = ExplicitCovariance(np.asarray(explicit["VR"], dtype=float))
        else:
            v1 = _kernel_from_dict(_require(data, "kernelV1"), "kernelV1")
            vr = _kernel_from_dict(_require(data, "kernelVR"), "kernelVR")
        return MarkovScenario(sigma11, sigma22, rho, v1, vr, case=int(data.get("case") or 0))
    raise InvalidInputError(f"scenario: structure must be 'proportional' or 'markov', got {structure!r}")


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise InvalidInputError(f"cannot read scenario file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InvalidInputError(f"invalid JSON in scenario file {path}: {e}") from e
    try:
        return scenario_from_dict(data)
    except InvalidInputError as e:
        raise InvalidInputError(f"{path}: {e}") from e
    except (TypeError, ValueError) as e:
        raise InvalidInputError(f"{path}: malformed scenario ({e})") from e
