"""Joint eigenvalue densities and normalization constants.

Three unnormalized eigenvalue densities on the simplex (all permutation
symmetric; ``prod`` runs over pairs i < j):

* Hilbert-Schmidt:  prod (l_i - l_j)^2
* superfidelity:    prod (l_i - l_j)^2 / sqrt(1 - sum l_i^2)
* Bures:            prod (l_i - l_j)^2 / (l_i + l_j) / sqrt(l_1 ... l_N)

plus their normalization constants: exact closed forms where known
(Hilbert-Schmidt for all N; superfidelity for N = 2, 3), a Jensen upper
bound, Monte-Carlo and series estimators, and quadrature evaluation for
N = 2, 3.  Also the qubit eigenvalue CDF/PDF for the superfidelity measure
and the qutrit density grids with a boundary-extrapolated integration rule.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from math import lgamma, log, pi, sqrt
from typing import Literal

import numpy as np

from .errors import DomainError, InstabilityWarning, SingularityError, UnsupportedDimensionError
from .qstate import Measure
from .rng import RngStream
from .statlab import mc_mean, simplex_quadrature

__all__ = [
    "NormalizationEstimate", "DensityGrid",
    "density_g_unnormalized", "density_bures_unnormalized", "density_hs_unnormalized",
    "log_density_g_unnormalized", "log_density_bures_unnormalized",
    "log_density_hs_unnormalized",
    "c_hs", "c_g_exact", "c_g_jensen_bound", "c_g_monte_carlo", "c_g_series",
    "c_g_quadrature", "c_bures_quadrature",
    "purity_mean_hs", "purity_variance_hs", "purity_moment_hs",
    "projective_unitary_volume", "cdf_g2", "pdf_g2_marginal",
    "density_grid_qutrit", "grid_integral",
]

EstimateMethod = Literal["exact", "jensen-upper-bound", "series", "monte-carlo", "quadrature"]

PURE_DISCARD_EPS = 1e-14          # discard HS samples with tr rho^2 >= 1 - eps
DISCARD_WARN_FRACTION = 1e-4      # "instability" threshold on the discard rate
_ZETA_HALF = 1.4603545088095868   # |zeta(1/2)|; strip-mass constant for u^(-1/2) edges


@dataclass(frozen=True)
class NormalizationEstimate:
    """Value of (or bound on) a density normalization constant C_N."""

    dim: int
    value: float
    method: EstimateMethod
    std_error: float | None = None
    terms_or_samples: int = 0
    truncation_last_term: float | None = None  # series only: last term of the 1/C sum

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError(f"normalization constant must be positive, got {self.value}")
        if (self.std_error is not None) != (self.method == "monte-carlo"):
            raise ValueError("std_error is present exactly for monte-carlo estimates")


# ---------------------------------------------------------------------------
# unnormalized densities
# ---------------------------------------------------------------------------

def _canonical(eigs: np.ndarray) -> np.ndarray:
    # Descending sort makes permuted inputs bitwise identical downstream.
    eigs = np.asarray(eigs, dtype=float)
    if eigs.shape[-1] < 2:
        raise ValueError("need at least 2 eigenvalues")
    return -np.sort(-eigs, axis=-1)


def _vandermonde_sq(eigs: np.ndarray) -> np.ndarray:
    n = eigs.shape[-1]
    i, j = np.triu_indices(n, k=1)
    return np.prod((eigs[..., i] - eigs[..., j]) ** 2, axis=-1)


def _maybe_scalar(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


def density_hs_unnormalized(eigs: np.ndarray):
    """prod_{i<j} (l_i - l_j)^2; zero when two eigenvalues coincide."""
    return _maybe_scalar(_vandermonde_sq(_canonical(eigs)))


def density_g_unnormalized(eigs: np.ndarray):
    """prod_{i<j} (l_i - l_j)^2 / sqrt(1 - sum l_i^2).

    Defined strictly inside the simplex; pure points (sum l_i^2 = 1) raise
    :class:`SingularityError` (the divergence there is integrable).
    """
    eigs = _canonical(eigs)
    radicand = 1.0 - np.sum(eigs ** 2, axis=-1)
    if np.any(radicand <= 0):
        raise SingularityError("superfidelity density diverges at pure states")
    return _maybe_scalar(_vandermonde_sq(eigs) / np.sqrt(radicand))


def density_bures_unnormalized(eigs: np.ndarray):
    """prod_{i<j} (l_i - l_j)^2 / (l_i + l_j) / sqrt(l_1 ... l_N); needs all l_i > 0."""
    eigs = _canonical(eigs)
    if np.any(eigs <= 0):
        raise SingularityError("Bures density diverges on the simplex boundary (some l_i = 0)")
    n = eigs.shape[-1]
    i, j = np.triu_indices(n, k=1)
    pair = np.prod((eigs[..., i] - eigs[..., j]) ** 2 / (eigs[..., i] + eigs[..., j]), axis=-1)
    return _maybe_scalar(pair / np.sqrt(np.prod(eigs, axis=-1)))


def log_density_hs_unnormalized(eigs: np.ndarray):
    """log of the Hilbert-Schmidt density; -inf at degeneracies."""
    eigs = _canonical(eigs)
    n = eigs.shape[-1]
    i, j = np.triu_indices(n, k=1)
    with np.errstate(divide="ignore"):
        return _maybe_scalar(2.0 * np.sum(np.log(np.abs(eigs[..., i] - eigs[..., j])), axis=-1))


def log_density_g_unnormalized(eigs: np.ndarray):
    eigs = _canonical(eigs)
    radicand = 1.0 - np.sum(eigs ** 2, axis=-1)
    if np.any(radicand <= 0):
        raise SingularityError("superfidelity density diverges at pure states")
    return _maybe_scalar(np.asarray(log_density_hs_unnormalized(eigs)) - 0.5 * np.log(radicand))


def log_density_bures_unnormalized(eigs: np.ndarray):
    eigs = _canonical(eigs)
    if np.any(eigs <= 0):
        raise SingularityError("Bures density diverges on the simplex boundary (some l_i = 0)")
    n = eigs.shape[-1]
    i, j = np.triu_indices(n, k=1)
    with np.errstate(divide="ignore"):
        pair = np.sum(2.0 * np.log(np.abs(eigs[..., i] - eigs[..., j]))
                      - np.log(eigs[..., i] + eigs[..., j]), axis=-1)
    return _maybe_scalar(pair - 0.5 * np.sum(np.log(eigs), axis=-1))


def density_unnormalized(measure: Measure | str):
    """The unnormalized eigenvalue density function for ``measure``."""
    measure = Measure(measure)
    return {
        Measure.HILBERT_SCHMIDT: density_hs_unnormalized,
        Measure.BURES: density_bures_unnormalized,
        Measure.SUPERFIDELITY: density_g_unnormalized,
    }[measure]


# ---------------------------------------------------------------------------
# normalization constants
# ---------------------------------------------------------------------------

def c_hs(dim: int) -> NormalizationEstimate:
    """Hilbert-Schmidt constant Gamma(N^2) / prod_k Gamma(k) Gamma(k+1)."""
    if dim < 2:
        raise UnsupportedDimensionError(f"need dim >= 2, got {dim}")
    lg = lgamma(dim * dim) - sum(lgamma(k) + lgamma(k + 1) for k in range(1, dim + 1))
    return NormalizationEstimate(dim=dim, value=float(np.exp(lg)), method="exact")


def c_g_exact(dim: int) -> NormalizationEstimate:
    """Closed-form superfidelity constants: known for N = 2 and N = 3 only."""
    if dim == 2:
        value = (2.0 * sqrt(2.0) / (3.0 * pi)) * c_hs(2).value
    elif dim == 3:
        value = (432.0 * sqrt(2.0) / (317.0 * pi)) * c_hs(3).value
    else:
        raise UnsupportedDimensionError(
            f"no closed form for dim {dim}; use the Jensen bound, series, or Monte Carlo")
    return NormalizationEstimate(dim=dim, value=value, method="exact")


def c_g_jensen_bound(dim: int) -> NormalizationEstimate:
    """Guaranteed upper bound C_N^HS sqrt(1 - 2N/(N^2+1)) from Jensen's inequality."""
    if dim < 2:
        raise UnsupportedDimensionError(f"need dim >= 2, got {dim}")
    value = c_hs(dim).value * sqrt(1.0 - 2.0 * dim / (dim * dim + 1.0))
    return NormalizationEstimate(dim=dim, value=value, method="jensen-upper-bound")


def _hs_purities(dim: int, samples: int, rng: RngStream) -> np.ndarray:
    from . import samplers  # deferred: samplers imports this module at top level
    return samplers.hs_purity_batch(dim, samples, rng)


def c_g_monte_carlo(dim: int, samples: int, rng: RngStream) -> NormalizationEstimate:
    """Monte-Carlo constant from 1/C_G = (1/C_HS) E_HS[1 / sqrt(1 - tr rho^2)].

    The standard error follows from the delta method on the reciprocal.
    Samples with tr rho^2 >= 1 - 1e-14 are discarded (and counted); more than
    0.01% of them triggers an :class:`InstabilityWarning`.
    """
    if dim < 2:
        raise UnsupportedDimensionError(f"need dim >= 2, got {dim}")
    if samples < 1000:
        raise ValueError(f"need at least 1000 samples, got {samples}")
    p = _hs_purities(dim, samples, rng)
    keep = p < 1.0 - PURE_DISCARD_EPS
    discarded = int(samples - keep.sum())
    if discarded > DISCARD_WARN_FRACTION * samples:
        warnings.warn(
            f"{discarded}/{samples} samples at numerically pure states were discarded",
            InstabilityWarning, stacklevel=2)
    y = 1.0 / np.sqrt(1.0 - p[keep])
    mean, se = mc_mean(y)
    chs = c_hs(dim).value
    return NormalizationEstimate(
        dim=dim, value=chs / mean, method="monte-carlo",
        std_error=chs * se / mean ** 2, terms_or_samples=int(keep.sum()))


def series_coefficients(k_max: int) -> np.ndarray:
    """Taylor coefficients of 1/sqrt(1-x): c_k = (2k-1)!! / (k! 2^k)."""
    c = np.empty(k_max + 1)
    c[0] = 1.0
    for k in range(1, k_max + 1):
        c[k] = c[k - 1] * (2 * k - 1) / (2 * k)
    return c


def c_g_series(dim: int, k_max: int, rng: RngStream, samples: int = 10 ** 5,
               moment_source: str = "monte-carlo-oracle",
               return_partial_sums: bool = False):
    """Series estimator 1/C_G = (1/C_HS) sum_k c_k E[(tr rho^2)^k], truncated at k_max.

    All terms are positive, so partial sums of 1/C increase with ``k_max`` and
    the C estimate decreases toward the true constant from above.  The last
    term of the 1/C sum is reported as a truncation indicator.  Purity moments
    come from a shared Hilbert-Schmidt Monte-Carlo batch; the closed-form
    moment formula is unvalidated and refused.
    """
    if dim < 2:
        raise UnsupportedDimensionError(f"need dim >= 2, got {dim}")
    if k_max < 1:
        raise ValueError(f"k_max must be >= 1, got {k_max}")
    if moment_source != "monte-carlo-oracle":
        raise ValueError(
            f"moment source {moment_source!r} is not validated; "
            "use moment_source='monte-carlo-oracle'")
    p = _hs_purities(dim, samples, rng)
    coeff = series_coefficients(k_max)
    inv_chs = 1.0 / c_hs(dim).value

    partial = np.empty(k_max + 1)
    p_pow = np.ones_like(p)
    acc = 0.0
    last_term = 0.0
    for k in range(k_max + 1):
        if k > 0:
            p_pow = p_pow * p
        last_term = coeff[k] * float(p_pow.mean()) * inv_chs
        acc += last_term
        partial[k] = acc

    estimate = NormalizationEstimate(
        dim=dim, value=1.0 / acc, method="series",
        terms_or_samples=k_max, truncation_last_term=last_term)
    if return_partial_sums:
        return estimate, partial
    return estimate


def c_g_quadrature(dim: int, tolerance: float = 1e-9) -> NormalizationEstimate:
    """Reciprocal of the simplex integral of the unnormalized density (N = 2, 3)."""
    if dim not in (2, 3):
        raise UnsupportedDimensionError(f"quadrature constants available for dim 2 and 3, not {dim}")
    integral = simplex_quadrature(density_g_unnormalized, dim, tolerance)
    return NormalizationEstimate(dim=dim, value=1.0 / integral, method="quadrature")


@lru_cache(maxsize=None)
def c_bures_quadrature(dim: int, tolerance: float = 1e-9) -> NormalizationEstimate:
    """Bures normalization constant by quadrature (no closed form is assumed)."""
    if dim not in (2, 3):
        raise UnsupportedDimensionError(f"quadrature constants available for dim 2 and 3, not {dim}")
    integral = simplex_quadrature(density_bures_unnormalized, dim, tolerance)
    return NormalizationEstimate(dim=dim, value=1.0 / integral, method="quadrature")


def normalized_density(measure: Measure | str, dim: int):
    """Normalized eigenvalue density for ``measure`` at dimension ``dim`` (2 or 3)."""
    measure = Measure(measure)
    if measure is Measure.HILBERT_SCHMIDT:
        const = c_hs(dim).value
    elif measure is Measure.SUPERFIDELITY:
        const = c_g_exact(dim).value if dim in (2, 3) else None
    else:
        const = c_bures_quadrature(dim).value
    if const is None:
        raise UnsupportedDimensionError(f"no normalization available for {measure} at dim {dim}")
    base = density_unnormalized(measure)
    return lambda eigs: const * np.asarray(base(eigs))


# ---------------------------------------------------------------------------
# purity statistics under the Hilbert-Schmidt measure
# ---------------------------------------------------------------------------

def purity_mean_hs(dim: int) -> float:
    """E[tr rho^2] = 2N / (N^2 + 1)."""
    if dim < 2:
        raise UnsupportedDimensionError(f"need dim >= 2, got {dim}")
    return 2.0 * dim / (dim * dim + 1.0)


def purity_variance_hs(dim: int) -> float:
    """Var[tr rho^2] = 2 (N^2-1)^2 / ((N^2+1)^2 (N^2+2) (N^2+3))."""
    if dim < 2:
        raise UnsupportedDimensionError(f"need dim >= 2, got {dim}")
    n2 = dim * dim
    return 2.0 * (n2 - 1.0) ** 2 / ((n2 + 1.0) ** 2 * (n2 + 2.0) * (n2 + 3.0))


def purity_moment_hs(dim: int, k: int, rng: RngStream, samples: int = 10 ** 5
                     ) -> tuple[float, float]:
    """Monte-Carlo moment E[(tr rho^2)^k] with standard error (oracle for the series)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    p = _hs_purities(dim, samples, rng)
    return mc_mean(p ** k)


def projective_unitary_volume(dim: int) -> float:
    """Volume of projective U(N): pi^(N(N-1)/2) / prod_{d<N} d!."""
    if dim < 2:
        raise UnsupportedDimensionError(f"need dim >= 2, got {dim}")
    lg = (dim * (dim - 1) / 2.0) * log(pi) - sum(lgamma(d + 1) for d in range(1, dim))
    return float(np.exp(lg))


# ---------------------------------------------------------------------------
# qubit marginal under the superfidelity measure
# ---------------------------------------------------------------------------

def cdf_g2(t):
    """Eigenvalue CDF for one qubit under the superfidelity measure.

    F(t) = (2/pi) (sqrt(t(1-t)) (1-2t) + arcsin sqrt(t)); evaluated through
    the identity arcsin sqrt(t) = pi/4 + arcsin(2t-1)/2 so that F(0) = 0,
    F(1/2) = 1/2 and F(1) = 1 hold exactly in floating point.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("cdf_g2 is defined on [0, 1]")
    val = 0.5 + (2.0 / pi) * (np.sqrt(arr * (1.0 - arr)) * (1.0 - 2.0 * arr)
                              + 0.5 * np.arcsin(2.0 * arr - 1.0))
    return _maybe_scalar(np.clip(val, 0.0, 1.0))


def pdf_g2_marginal(t):
    """Eigenvalue PDF for one qubit: (2/pi) (2t-1)^2 / sqrt(t(1-t)) on (0, 1)."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("pdf_g2_marginal is defined on (0, 1)")
    if np.any(arr == 0.0) or np.any(arr == 1.0):
        raise SingularityError("pdf_g2_marginal diverges at the endpoints (integrably)")
    return _maybe_scalar((2.0 / pi) * (2.0 * arr - 1.0) ** 2 / np.sqrt(arr * (1.0 - arr)))


# ---------------------------------------------------------------------------
# qutrit density grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityGrid:
    """Normalized qutrit eigenvalue density sampled on a barycentric lattice.

    Lattice points are (i/R, j/R, 1-(i+j)/R) for i + j <= R.  Points where
    the density diverges are flagged and carry NaN instead of a value: the
    three pure corners for the superfidelity measure, the whole simplex
    boundary for Bures.
    """

    measure: Measure
    resolution: int
    lambda1: np.ndarray
    lambda2: np.ndarray
    density: np.ndarray
    singular: np.ndarray


def density_grid_qutrit(resolution: int,
                        measure: Measure | str = Measure.SUPERFIDELITY) -> DensityGrid:
    """Evaluate the normalized qutrit eigenvalue density on a barycentric grid."""
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    measure = Measure(measure)
    if measure is Measure.HILBERT_SCHMIDT:
        const = c_hs(3).value
    elif measure is Measure.SUPERFIDELITY:
        const = c_g_exact(3).value
    else:
        const = c_bures_quadrature(3).value
    base = density_unnormalized(measure)

    ii, jj = [], []
    for i in range(resolution + 1):
        for j in range(resolution + 1 - i):
            ii.append(i)
            jj.append(j)
    ii = np.array(ii)
    jj = np.array(jj)
    kk = resolution - ii - jj
    # all three coordinates as k/resolution so permuted lattice points carry
    # bitwise-identical triples (the densities then match exactly)
    l1 = ii / resolution
    l2 = jj / resolution
    l3 = kk / resolution

    on_boundary = (ii == 0) | (jj == 0) | (kk == 0)
    if measure is Measure.BURES:
        singular = on_boundary
    else:
        singular = (ii == resolution) | (jj == resolution) | (kk == resolution)

    lam = np.stack([l1, l2, l3], axis=-1)
    density = np.full(len(ii), np.nan)
    ok = ~singular
    density[ok] = const * np.asarray(base(lam[ok]))
    return DensityGrid(measure=measure, resolution=resolution,
                       lambda1=l1, lambda2=l2, density=density, singular=singular)


# Fit f(u) = a u^(-1/2) + b + c u on rows u = h, 2h, 3h; columns are the
# basis evaluated with a scaled as a*h^(-1/2) and c as c*h.
_EDGE_BASIS_INV = np.linalg.inv(np.array([
    [1.0, 1.0, 1.0],
    [1.0 / sqrt(2.0), 1.0, 2.0],
    [1.0 / sqrt(3.0), 1.0, 3.0],
]))


def grid_integral(grid: DensityGrid) -> float:
    """Riemann sum of a density grid with boundary-margin extrapolation.

    Interior lattice points contribute plainly.  For each of the three
    simplex edges, the density along the first three interior rows is fitted
    per station to a one-dimensional profile a u^(-1/2) + b + c u in the edge
    distance u; the missing mass is then |zeta(1/2)| a sqrt(h) for the
    inverse-sqrt part (strip plus all row-discretization deficits), b h / 2
    and c h^2 / 8 for the regular part (its missing half cell).  The linear
    term keeps a normal gradient from being misread as a singularity.  This
    recovers the boundary mass that pointwise samples cannot see, which for
    the Bures measure is substantial (~24% of the total at resolution 400).
    Accurate to well under 1e-2 for the qutrit densities at resolution >= 200.
    """
    res = grid.resolution
    if res < 6:
        raise ValueError("grid_integral needs resolution >= 6")
    h = 1.0 / res
    full = np.full((res + 1, res + 1), np.nan)
    i_idx = np.rint(grid.lambda1 * res).astype(int)
    j_idx = np.rint(grid.lambda2 * res).astype(int)
    full[i_idx, j_idx] = grid.density

    ii, jj = np.meshgrid(np.arange(res + 1), np.arange(res + 1), indexing="ij")
    interior = (ii >= 1) & (jj >= 1) & (ii + jj <= res - 1)
    plain = float(np.nansum(np.where(interior, full, 0.0)) * h * h)

    k = np.arange(1, res - 3)  # stations whose three rows are all interior
    edges = [
        np.stack([full[1, k], full[2, k], full[3, k]]),                            # l1 = 0
        np.stack([full[k, 1], full[k, 2], full[k, 3]]),                            # l2 = 0
        np.stack([full[k, res - 1 - k], full[k, res - 2 - k], full[k, res - 3 - k]]),  # l3 = 0
    ]
    corr = 0.0
    sqrt_h = sqrt(h)
    for rows in edges:
        coef = _EDGE_BASIS_INV @ np.nan_to_num(rows)
        a = coef[0] * sqrt_h
        b = coef[1]
        c = coef[2] / h
        corr += float(np.sum(_ZETA_HALF * a * sqrt_h + 0.5 * b * h + c * h * h / 8.0) * h)
    return plain + corr
