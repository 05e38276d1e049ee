"""Direct-effect information matrices.

Every information matrix here is a Schur complement

    C = Z_T' A Z_T - Z_T' A Z_F (Z_F' A Z_F)^- Z_F' A Z_T

where A annihilates the nuisance columns (intercepts, periods, subjects),
Z_T = I_g kron T_d and Z_F = I_g kron F_d (or F_d H_t). The brute path builds
A* from the dense dispersion matrix; the closed paths use the structured
forms of A*. Both have to agree, so the brute path never borrows from the
closed forms.

Responses are stacked response-major: the row for response k, subject j,
period i sits at k*n*p + j*p + i, and C is indexed (k*t + treatment).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .covmodels import (MarkovScenario, ProportionalScenario, Scenario, build_markov_sigma,
                        build_proportional_sigma, omega_matrices, vstar)
from .designs import Design, carryover_matrix, shift_matrix, treatment_matrix
from .errors import InvalidInputError, NumericalError
from .matlib import (DEFAULT_TOL, Matrix, Tolerance, centering, is_completely_symmetric, pinv, proj_perp,
                     sym_inv_sqrt, symmetrize)

METHODS = ("brute", "closed")
REPRESENTATIONS = ("z4", "z42", "z43")


@dataclass(frozen=True, eq=False)
class InfoMatrix:
    matrix: Matrix
    structure: str
    method: str
    design_id: str
    scenario: Optional[Scenario] = None
    representation: str = ""

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def is_completely_symmetric(self, tol: Tolerance = DEFAULT_TOL) -> bool:
        return is_completely_symmetric(self.matrix, tol)


@dataclass(frozen=True)
class NuisanceBasis:
    g: int
    n: int
    p: int

    @property
    def P(self) -> Matrix:
        return np.kron(np.ones((self.n, 1)), np.eye(self.p))

    @property
    def U(self) -> Matrix:
        return np.kron(np.eye(self.n), np.ones((self.p, 1)))

    @property
    def z1(self) -> Matrix:
        """[I_g kron 1_np, I_g kron [P U]]."""
        Ig = np.eye(self.g)
        intercept = np.kron(Ig, np.ones((self.n * self.p, 1)))
        return np.hstack([intercept, np.kron(Ig, np.hstack([self.P, self.U]))])


def nuisance_basis(g: int, n: int, p: int) -> NuisanceBasis:
    if min(g, n, p) < 1:
        raise InvalidInputError(f"g, n, p must be positive, got ({g}, {n}, {p})")
    return NuisanceBasis(g, n, p)


# --- A* ---

def astar_brute(sigma, z1: NuisanceBasis, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """Sigma^{-1/2} pr_perp(Sigma^{-1/2} Z1) Sigma^{-1/2}."""
    root = sym_inv_sqrt(sigma, tol)
    basis = z1.z1 if isinstance(z1, NuisanceBasis) else np.asarray(z1, dtype=float)
    if basis.shape[0] != root.shape[0]:
        raise InvalidInputError(f"Z1 has {basis.shape[0]} rows, Sigma is {root.shape[0]} square")
    return symmetrize(root @ proj_perp(root @ basis, tol) @ root)


def astar_proportional_closed(s: ProportionalScenario, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """Gamma^-1 kron (H_n kron V*)."""
    return np.kron(s.gamma_inverse(tol), np.kron(centering(n), vstar(s.v(p), tol)))


def _markov_blocks(s: MarkovScenario, outer: Matrix, p: int, tol: Tolerance) -> Matrix:
    omega1, omega2, omega4 = omega_matrices(s, p, tol)
    return np.block([
        [np.kron(outer, omega1), -np.kron(outer, omega2)],
        [-np.kron(outer, omega2), np.kron(outer, omega4)],
    ])


def astar_markov_closed(s: MarkovScenario, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """[[H_n kron Omega1, -H_n kron Omega2], [-H_n kron Omega2, H_n kron Omega4]]."""
    return _markov_blocks(s, centering(n), p, tol)


def astar_markov_noperiod_closed(s: MarkovScenario, n: int, p: int, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """Same blocks with I_n in place of H_n: only subject effects are projected out."""
    return _markov_blocks(s, np.eye(n), p, tol)


def precision_blocks(s: Scenario, p: int, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """W (gp x gp) with A* equal to H_n kron W after a subject-major reordering."""
    if isinstance(s, ProportionalScenario):
        return np.kron(s.gamma_inverse(tol), vstar(s.v(p), tol))
    omega1, omega2, omega4 = omega_matrices(s, p, tol)
    return np.block([[omega1, -omega2], [-omega2, omega4]])


# --- SCHUR COMPLEMENTS ---

def schur_information(A: Matrix, ZT: Matrix, ZF: Matrix, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    AT = A @ ZT
    AF = A @ ZF
    c11 = ZT.T @ AT
    c12 = ZT.T @ AF
    c22 = ZF.T @ AF
    if not (np.all(np.isfinite(c11)) and np.all(np.isfinite(c12)) and np.all(np.isfinite(c22))):
        raise NumericalError("information blocks have non-finite entries")
    return symmetrize(c11 - c12 @ pinv(symmetrize(c22), tol) @ c12.T)


def _check_method(method: str):
    if method not in METHODS:
        raise InvalidInputError(f"method must be one of {METHODS}, got {method!r}")


def info_univariate(d: Design, V, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """C_{d(uni)} = C11 - C12 C22^- C21 with A = H_n kron V* and the uncentered F_d."""
    A = np.kron(centering(d.n), vstar(V, tol))
    return schur_information(A, treatment_matrix(d), carryover_matrix(d), tol)


def info_proportional(d: Design, s: ProportionalScenario, method: str = "closed",
                      tol: Tolerance = DEFAULT_TOL) -> InfoMatrix:
    _check_method(method)
    if method == "closed":
        C = np.kron(s.gamma_inverse(tol), info_univariate(d, s.v(d.p), tol))
    else:
        sigma = build_proportional_sigma(s, d.n, d.p, tol)
        A = astar_brute(sigma, nuisance_basis(s.g, d.n, d.p), tol)
        Ig = np.eye(s.g)
        C = schur_information(A, np.kron(Ig, treatment_matrix(d)), np.kron(Ig, carryover_matrix(d)), tol)
    return InfoMatrix(C, "proportional", method, d.label(), s, "z4")


def _carryover_columns(d: Design, representation: str) -> Matrix:
    F = carryover_matrix(d)
    if representation == "z4":
        return F
    return F @ centering(d.t)


def info_markov(d: Design, s: MarkovScenario, method: str = "closed", representation: str = "z43",
                tol: Tolerance = DEFAULT_TOL) -> InfoMatrix:
    """C_{d(s2)}. `z4` uses F_d, `z43` uses F_d H_t, `z42` is the projector form on dense Sigma."""
    _check_method(method)
    if representation not in REPRESENTATIONS:
        raise InvalidInputError(f"representation must be one of {REPRESENTATIONS}, got {representation!r}")
    I2 = np.eye(2)
    ZT = np.kron(I2, treatment_matrix(d))
    ZF = np.kron(I2, _carryover_columns(d, representation))
    if representation == "z42":
        sigma = build_markov_sigma(s, d.n, d.p, tol)
        root = sym_inv_sqrt(sigma, tol)
        nuisance = np.hstack([nuisance_basis(2, d.n, d.p).z1, ZF])
        M = root @ proj_perp(root @ nuisance, tol) @ root
        C = symmetrize(ZT.T @ M @ ZT)
        return InfoMatrix(C, "markov", "brute", d.label(), s, representation)
    if method == "closed":
        A = astar_markov_closed(s, d.n, d.p, tol)
    else:
        A = astar_brute(build_markov_sigma(s, d.n, d.p, tol), nuisance_basis(2, d.n, d.p), tol)
    return InfoMatrix(schur_information(A, ZT, ZF, tol), "markov", method, d.label(), s, representation)


def info_markov_noperiod(d: Design, s: MarkovScenario, method: str = "closed",
                         tol: Tolerance = DEFAULT_TOL) -> InfoMatrix:
    """C-tilde: the information matrix of a model without period effects."""
    _check_method(method)
    I2 = np.eye(2)
    if method == "closed":
        A = astar_markov_noperiod_closed(s, d.n, d.p, tol)
    else:
        sigma = build_markov_sigma(s, d.n, d.p, tol)
        root = sym_inv_sqrt(sigma, tol)
        U = nuisance_basis(2, d.n, d.p).U
        A = symmetrize(root @ proj_perp(root @ np.kron(I2, U), tol) @ root)
    ZT = np.kron(I2, treatment_matrix(d))
    ZF = np.kron(I2, _carryover_columns(d, "z43"))
    return InfoMatrix(schur_information(A, ZT, ZF, tol), "markov", method, d.label(), s, "z43")


# --- ORTHOGONAL-ARRAY CLOSED FORMS ---

def _oa_lambda(t: int, n: int) -> int:
    if t < 2 or n % (t * (t - 1)) != 0 or n == 0:
        raise InvalidInputError(f"n={n} is not of the form lambda * t(t-1) for t={t}")
    return n // (t * (t - 1))


def starred_traces(Vs: Matrix) -> tuple:
    """(tr V*, tr V* psi, tr H_p psi' V* psi) for a starred p x p matrix."""
    p = Vs.shape[0]
    psi = shift_matrix(p)
    return (float(np.trace(Vs)), float(np.trace(Vs @ psi)),
            float(np.trace(centering(p) @ psi.T @ Vs @ psi)))


def info_univariate_oa_closed(V, t: int, n: int, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """(n/(t-1)) (e11 - e12^2/e22) H_t for an OA_I(n, p=t, t, 2)."""
    _oa_lambda(t, n)
    V = np.asarray(V, dtype=float)
    if V.shape != (t, t):
        raise InvalidInputError(f"V must be {t} x {t} for p = t, got {V.shape}")
    e11, e12, e22 = starred_traces(vstar(V, tol))
    return (n / (t - 1)) * (e11 - e12 ** 2 / e22) * centering(t)


def info_markov_oa_closed(s: MarkovScenario, t: int, n: int, tol: Tolerance = DEFAULT_TOL) -> InfoMatrix:
    """(n/(t-1)) [[Lambda1, Lambda2], [Lambda2, Lambda4]] for an OA_I(n, p=t, t, 2)."""
    _oa_lambda(t, n)
    a1, b1, c1 = starred_traces(vstar(s.v1(t), tol))
    aR, bR, cR = starred_traces(vstar(s.vr(t), tol))
    kappa = aR - bR ** 2 / cR
    rb, s12 = s.rho_bar, s.sigma12
    Ht = centering(t)
    lam1 = (a1 + rb ** 2 / s12 * aR - b1 ** 2 / c1 - rb ** 2 / s12 * bR ** 2 / cR) * Ht
    lam4 = (kappa / s12) * Ht
    lam2 = -rb * lam4
    C = (n / (t - 1)) * np.block([[lam1, lam2], [lam2, lam4]])
    return InfoMatrix(C, "markov", "closed", f"oa_t{t}_n{n}", s, "oa")


# --- BATCHED CLOSED-FORM TRACES ---

def batch_traces(assignments: np.ndarray, W: Matrix, t: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """tr(C) for a stack of designs sharing (t, n, p).

    `assignments` has shape (B, p, n) with 0-based labels; W is the gp x gp
    block from precision_blocks. Uses A* = H_n kron W per subject, so each
    quadratic form is a sum over subjects minus the 1/n cross term.
    """
    B, p, n = assignments.shape
    g = W.shape[0] // p
    columns = assignments.transpose(0, 2, 1).reshape(-1, p)
    unique, inverse = np.unique(columns, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(B, n)

    Tu = np.zeros((unique.shape[0], p, t))
    Tu[np.arange(unique.shape[0])[:, None], np.arange(p)[None, :], unique] = 1.0
    Fu = shift_matrix(p) @ Tu @ centering(t)
    Ig = np.eye(g)
    Xu = np.einsum("kl,uia->ukila", Ig, Tu).reshape(-1, g * p, g * t)
    Yu = np.einsum("kl,uia->ukila", Ig, Fu).reshape(-1, g * p, g * t)

    q11 = np.einsum("uia,ij,ujb->uab", Xu, W, Xu)[inverse].sum(axis=1)
    q12 = np.einsum("uia,ij,ujb->uab", Xu, W, Yu)[inverse].sum(axis=1)
    q22 = np.einsum("uia,ij,ujb->uab", Yu, W, Yu)[inverse].sum(axis=1)
    sx = Xu[inverse].sum(axis=1)
    sy = Yu[inverse].sum(axis=1)
    c11 = q11 - np.einsum("bia,ij,bjc->bac", sx, W, sx) / n
    c12 = q12 - np.einsum("bia,ij,bjc->bac", sx, W, sy) / n
    c22 = q22 - np.einsum("bia,ij,bjc->bac", sy, W, sy) / n
    c22 = 0.5 * (c22 + c22.transpose(0, 2, 1))
    inv22 = np.linalg.pinv(c22, tol.rank_tol, hermitian=True)
    correction = np.einsum("bac,bcd,bed->bae", c12, inv22, c12)
    return np.trace(c11 - correction, axis1=1, axis2=2)
