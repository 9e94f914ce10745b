"""Spectra of steady-state ensembles: eigensolvers, memory cost and tail fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, eigsh
from scipy.special import polygamma

from .classical import entropy_bits
from .errors import DomainError, InsufficientDataError, SizeError, SolverError
from .quantum import QmsEnsemble

EIG_FLOOR = 1e-14
NEG_TOL = 1e-12
DENSE_MAX = 8192
DIRECT_MAX_DIM = 4096
POWER_LAW_RESIDUAL = 0.05


@dataclass(frozen=True, eq=False)
class GramSpectrum:
    """Eigenvalues sorted descending; ``residual`` is the trace mass below the floor."""

    eigenvalues: np.ndarray
    residual: float
    eigenvectors: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.eigenvalues)


def _finish(vals: np.ndarray, trace: float, eig_floor: float, vecs=None) -> GramSpectrum:
    if vals.size and vals.min() < -NEG_TOL:
        raise SolverError(f"matrix is not positive semidefinite: eigenvalue {vals.min():.3e}")
    vals = np.where(vals < 0, 0.0, vals)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    keep = vals >= eig_floor
    kept = vals[keep]
    if vecs is not None:
        vecs = vecs[:, order][:, keep]
    residual = max(0.0, trace - math.fsum(kept))
    return GramSpectrum(eigenvalues=kept, residual=residual, eigenvectors=vecs)


def eigen_spectrum(
    G: np.ndarray,
    eig_floor: float = EIG_FLOOR,
    *,
    vectors: bool = False,
    dense_max: int = DENSE_MAX,
) -> GramSpectrum:
    """Spectrum of a symmetric PSD matrix.

    Matrices up to ``dense_max`` use LAPACK's symmetric solver. Larger ones
    use Lanczos (ARPACK) for the leading eigenvalues, doubling the number
    requested until one below ``max(eig_floor, 1e-12)`` is found; the mass
    that is not captured is reported as ``residual``.
    """
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise DomainError("expected a square matrix")
    if G.size and np.abs(G - G.T).max() > 1e-12:
        raise DomainError("matrix is not symmetric within 1e-12")
    trace = float(np.trace(G))
    n = G.shape[0]
    if n <= dense_max:
        try:
            if vectors:
                vals, vecs = scipy.linalg.eigh(G)
            else:
                vals, vecs = scipy.linalg.eigh(G, eigvals_only=True), None
        except scipy.linalg.LinAlgError as exc:
            raise SolverError(f"dense eigensolver failed on a {n}x{n} matrix: {exc}") from None
        return _finish(vals, trace, eig_floor, vecs)

    target = max(eig_floor, 1e-12)
    k = min(256, n - 2)
    while True:
        try:
            vals, vecs = eigsh(G, k=k, which="LA", tol=1e-13, v0=np.ones(n) / math.sqrt(n))
        except ArpackNoConvergence as exc:
            raise SolverError(
                f"Lanczos did not converge for k={k} on a {n}x{n} matrix "
                f"({len(exc.eigenvalues)} eigenvalues converged)"
            ) from None
        if vals.min() <= target or k >= n - 2:
            break
        k = min(2 * k, n - 2)
    return _finish(vals, trace, eig_floor, vecs if vectors else None)


def quantum_memory(s: GramSpectrum) -> float:
    """Von Neumann entropy (bits) of the ensemble, from its spectrum."""
    return entropy_bits(s.eigenvalues)


def density_matrix_direct(e: QmsEnsemble, max_dim: int = DIRECT_MAX_DIM, eig_floor: float = EIG_FLOOR) -> GramSpectrum:
    """Spectrum of ``sum_s w_s |s><s|`` assembled explicitly in the full basis."""
    window = max(s.window for s in e.states)
    dim = window * e.states[0].n_symbols * e.states[0].n_modes
    if dim > max_dim:
        raise SizeError(f"basis dimension {dim} exceeds the direct-assembly guard {max_dim}")
    V = np.stack([s.flat(window) for s in e.states])
    used = np.flatnonzero(np.any(V != 0, axis=0))
    V = V[:, used]
    rho = (V.T * e.weights) @ V
    rho = (rho + rho.T) / 2
    vals = scipy.linalg.eigh(rho, eigvals_only=True)
    return _finish(vals, float(np.trace(rho)), eig_floor)


@dataclass(frozen=True)
class TailFit:
    exponent: float
    amplitude: float
    residual: float
    n_lo: int
    n_hi: int
    beta: float | None = None

    @property
    def power_law(self) -> bool:
        return self.residual <= POWER_LAW_RESIDUAL

    def as_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "amplitude": self.amplitude,
            "residual": self.residual,
            "n_lo": self.n_lo,
            "n_hi": self.n_hi,
            "beta": self.beta,
            "power_law": self.power_law,
        }


def tail_fit(s: GramSpectrum, n_lo: int, n_hi: int, beta_from: int | None = None) -> TailFit:
    """Least-squares line through ``(log n, log lambda_n)`` over ranks ``n_lo..n_hi`` (1-based).

    ``residual`` is the RMS deviation in natural-log units. With
    ``beta_from = n0`` the amplitude ``beta`` of a ``beta / n^2`` law is also
    returned, chosen so that ``sum_{n >= n0} beta / n^2`` equals the
    eigenvalue mass from rank ``n0`` on.
    """
    if n_lo < 2:
        raise DomainError("n_lo must be at least 2")
    if n_hi > len(s.eigenvalues):
        raise InsufficientDataError(f"n_hi={n_hi} exceeds the {len(s.eigenvalues)} eigenvalues above the floor")
    if n_hi - n_lo + 1 < 8:
        raise InsufficientDataError("a tail fit needs at least 8 ranks")
    ranks = np.arange(n_lo, n_hi + 1)
    x = np.log(ranks)
    y = np.log(s.eigenvalues[n_lo - 1 : n_hi])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    beta = None
    if beta_from is not None:
        if not 1 <= beta_from <= len(s.eigenvalues):
            raise DomainError("beta_from must be a valid rank")
        beta = math.fsum(s.eigenvalues[beta_from - 1 :]) / float(polygamma(1, beta_from))
    return TailFit(
        exponent=float(slope),
        amplitude=float(math.exp(intercept)),
        residual=float(np.sqrt(np.mean(resid**2))),
        n_lo=n_lo,
        n_hi=n_hi,
        beta=beta,
    )


def default_fit_range(count: int) -> tuple[int, int] | None:
    """Ranks used for the per-level tail fit; (32, 256) once 1024+ eigenvalues exist."""
    n_hi = min(256, count // 4)
    n_lo = max(2, n_hi // 8)
    if n_hi - n_lo + 1 < 8:
        return None
    return n_lo, n_hi
