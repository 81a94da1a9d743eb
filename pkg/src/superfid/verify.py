"""Built-in verification suites exposed through the command line.

Each suite runs a battery of deterministic (seeded) checks against the
closed-form values, bounds, and distributional claims implemented by the
package, at sizes small enough for interactive use.  The pytest acceptance
suite runs the same checks at full scale.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from . import eigendensities as ed
from . import samplers as sm
from . import similarity as si
from . import statlab as st
from .qstate import Measure, check_density_matrix, haar_unitary, random_tangent
from .rng import RngStream

SUITE_NAMES = ("metric", "density", "sampler", "purity", "all")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _result(suite, name, passed, detail):
    return CheckResult(suite=suite, name=name, passed=bool(passed), detail=detail)


def _mixed_pairs(dim: int, count: int, rng: RngStream, floor: float = 0.0):
    """Stacked random state pairs, optionally pulled toward I/N for mixedness."""
    gen = rng.generator()
    a = sm._hs_matrix_batch(dim, count, gen)
    b = sm._hs_matrix_batch(dim, count, gen)
    if floor > 0.0:
        eye = np.eye(dim) / dim
        a = (1 - floor) * a + floor * eye
        b = (1 - floor) * b + floor * eye
    return a, b


# ---------------------------------------------------------------------------
# metric suite
# ---------------------------------------------------------------------------

def _metric_checks(seed: int, scale: float = 1.0) -> list[CheckResult]:
    out = []
    n_pairs = max(50, int(300 * scale))

    a, b = _mixed_pairs(2, n_pairs, RngStream(seed, 1))
    gap = np.abs(si.fidelity(a, b) - si.superfidelity(a, b))
    out.append(_result("metric", "fidelity-equals-superfidelity-qubits",
                       gap.max() <= 1e-9, f"max |F-G| = {gap.max():.2e} over {n_pairs} pairs"))

    worst = -np.inf
    for dim in (3, 4, 5):
        a, b = _mixed_pairs(dim, n_pairs, RngStream(seed, dim))
        worst = max(worst, float(np.max(si.fidelity(a, b) - si.superfidelity(a, b))))
    out.append(_result("metric", "fidelity-below-superfidelity",
                       worst <= 1e-9, f"max F-G = {worst:.2e} for N=3,4,5"))

    worst_slack = -np.inf
    worst_self = 0.0
    for dim in (2, 3, 4):
        gen = RngStream(seed, 10 + dim).generator()
        n_tri = max(200, int(3000 * scale))
        x = sm._hs_matrix_batch(dim, n_tri, gen)
        y = sm._hs_matrix_batch(dim, n_tri, gen)
        z = sm._hs_matrix_batch(dim, n_tri, gen)
        viol = si.dist_g(x, z) - si.dist_g(x, y) - si.dist_g(y, z)
        worst_slack = max(worst_slack, float(viol.max()))
        worst_self = max(worst_self, float(np.max(si.dist_g(x, x))))
    out.append(_result("metric", "triangle-inequality",
                       worst_slack <= 1e-12, f"max violation = {worst_slack:.2e}"))
    out.append(_result("metric", "zero-self-distance",
                       worst_self <= 1e-10, f"max d_G(rho,rho) = {worst_self:.2e}"))

    a, b = _mixed_pairs(4, n_pairs, RngStream(seed, 20))
    sym_g = np.max(np.abs(np.asarray(si.superfidelity(a, b)) - si.superfidelity(b, a)))
    sym_f = np.max(np.abs(np.asarray(si.fidelity(a, b)) - si.fidelity(b, a)))
    out.append(_result("metric", "symmetry",
                       max(sym_g, sym_f) <= 1e-12,
                       f"max asymmetry G {sym_g:.2e}, F {sym_f:.2e}"))

    gen = RngStream(seed, 21).generator()
    a, b = _mixed_pairs(3, n_pairs, RngStream(seed, 22))
    worst_u = 0.0
    for k in range(min(50, n_pairs)):
        u = haar_unitary(3, gen)
        g0 = si.superfidelity(a[k], b[k])
        g1 = si.superfidelity(u @ a[k] @ u.conj().T, u @ b[k] @ u.conj().T)
        worst_u = max(worst_u, abs(g0 - g1))
    out.append(_result("metric", "unitary-invariance",
                       worst_u <= 1e-10, f"max |G(U.U^,U.U^) - G| = {worst_u:.2e}"))

    worst_fd = 0.0
    for dim in (2, 3):
        gen = RngStream(seed, 30 + dim).generator()
        for _ in range(max(10, int(30 * scale))):
            rho = 0.8 * sm._hs_matrix_batch(dim, 1, gen)[0] + 0.2 * np.eye(dim) / dim
            drho = random_tangent(dim, gen)
            analytic = si.line_element_g(rho, drho)
            fd = si.fd_second_derivative(lambda x, y: si.dist_g(x, y) ** 2, rho, drho, 1e-3)
            worst_fd = max(worst_fd, abs(fd - analytic))
    out.append(_result("metric", "line-element-fd-match",
                       worst_fd <= 1e-4, f"max |FD - analytic| = {worst_fd:.2e}"))

    gen = RngStream(seed, 40).generator()
    worst_eq = 0.0
    for _ in range(max(10, int(30 * scale))):
        rho = 0.8 * sm._hs_matrix_batch(2, 1, gen)[0] + 0.2 * np.eye(2) / 2
        drho = random_tangent(2, gen)
        worst_eq = max(worst_eq, abs(si.line_element_g(rho, drho)
                                     - si.line_element_bprime(rho, drho)))
    out.append(_result("metric", "qubit-line-elements-coincide",
                       worst_eq <= 1e-8, f"max |g - bprime| = {worst_eq:.2e} (N=2)"))
    return out


# ---------------------------------------------------------------------------
# density suite
# ---------------------------------------------------------------------------

def _density_checks(seed: int, scale: float = 1.0) -> list[CheckResult]:
    out = []
    val = st.simplex_quadrature(ed.density_g_unnormalized, 2, 1e-9)
    out.append(_result("density", "qubit-g-normalization",
                       abs(val - pi / (2 * sqrt(2))) <= 1e-6,
                       f"integral = {val:.9f}, pi/(2 sqrt 2) = {pi / (2 * sqrt(2)):.9f}"))
    val = st.simplex_quadrature(ed.density_bures_unnormalized, 2, 1e-9)
    out.append(_result("density", "qubit-bures-normalization",
                       abs(val - pi / 2) <= 1e-6, f"integral = {val:.9f}"))
    val = st.simplex_quadrature(ed.density_hs_unnormalized, 2, 1e-11)
    out.append(_result("density", "qubit-hs-normalization",
                       abs(val - 1 / 3) <= 1e-10, f"integral = {val:.12f}"))
    val = st.simplex_quadrature(ed.density_hs_unnormalized, 3, 1e-11)
    out.append(_result("density", "qutrit-hs-normalization",
                       abs(val * 1680 - 1) <= 1e-8, f"1/integral = {1 / val:.6f}"))
    val = st.simplex_quadrature(ed.density_g_unnormalized, 3, 1e-10)
    c3 = ed.c_g_exact(3).value
    out.append(_result("density", "qutrit-g-normalization",
                       abs(val * c3 - 1) <= 1e-3,
                       f"1/integral = {1 / val:.4f}, closed form = {c3:.4f}"))

    lam = np.linspace(0.01, 0.99, 99)
    pts = np.stack([lam, 1 - lam], axis=-1)
    g_norm = ed.c_g_exact(2).value * np.asarray(ed.density_g_unnormalized(pts))
    b_norm = ed.c_bures_quadrature(2).value * np.asarray(ed.density_bures_unnormalized(pts))
    gap = np.max(np.abs(g_norm - b_norm))
    out.append(_result("density", "qubit-g-measure-equals-bures",
                       gap <= 1e-10, f"max pointwise gap = {gap:.2e}"))

    # away from the sqrt endpoints, where the h = 1e-5 stencil resolves the pdf
    t = np.linspace(0.05, 0.95, 501)
    h = 1e-5
    fd = (np.asarray(ed.cdf_g2(t + h)) - np.asarray(ed.cdf_g2(t - h))) / (2 * h)
    gap = np.max(np.abs(fd - np.asarray(ed.pdf_g2_marginal(t))))
    out.append(_result("density", "qubit-pdf-is-cdf-derivative",
                       gap <= 1e-6, f"max |pdf - dCDF| = {gap:.2e}"))

    grid = np.linspace(0.0, 1.0, 10_001)
    mono = np.all(np.diff(np.asarray(ed.cdf_g2(grid))) >= -1e-15)
    out.append(_result("density", "qubit-cdf-monotone", mono, "10^4-point grid"))

    ok = True
    details = []
    for dim in (2, 3):
        bound = ed.c_g_jensen_bound(dim).value
        exact = ed.c_g_exact(dim).value
        ok &= exact <= bound
        details.append(f"N={dim}: {exact:.4g} <= {bound:.4g}")
    for dim in (4, 5):
        bound = ed.c_g_jensen_bound(dim).value
        est = ed.c_g_monte_carlo(dim, max(20_000, int(10 ** 5 * scale)), RngStream(seed, 50 + dim))
        ok &= est.value <= bound + 3 * est.std_error
        details.append(f"N={dim}: {est.value:.4g} (3SE {3 * est.std_error:.2g}) <= {bound:.4g}")
    out.append(_result("density", "jensen-upper-bound", ok, "; ".join(details)))

    est, partial = ed.c_g_series(2, 24, RngStream(seed, 60), samples=max(20_000, int(10 ** 5 * scale)),
                                 return_partial_sums=True)
    mono = np.all(np.diff(partial) >= 0)
    k0 = 1.0 / partial[0]
    out.append(_result("density", "series-monotone-partial-sums",
                       mono and abs(k0 - ed.c_hs(2).value) < 1e-9,
                       f"k=0 estimate = C_HS = {k0:.4f}, partial sums increasing: {mono}"))

    res = 200  # boundary extrapolation is accurate from ~200 subdivisions up
    details = []
    ok = True
    for measure in (Measure.SUPERFIDELITY, Measure.BURES):
        grid_obj = ed.density_grid_qutrit(res, measure)
        total = ed.grid_integral(grid_obj)
        ok &= abs(total - 1.0) <= 0.02
        details.append(f"{measure.value}@res{res}: {total:.4f}")
    out.append(_result("density", "qutrit-grid-integrates-to-one", ok, "; ".join(details)))
    return out


# ---------------------------------------------------------------------------
# sampler suite
# ---------------------------------------------------------------------------

def _sampler_checks(seed: int, scale: float = 1.0) -> list[CheckResult]:
    out = []
    n = max(5000, int(20_000 * scale))

    batch, _, _ = sm.sample_batch(Measure.HILBERT_SCHMIDT, 2, n, RngStream(seed, 70))
    res = st.chi_square_gof(batch.eigen_records[:, 0], lambda x: (2 * x - 1) ** 2,
                            bins=40, support=(0.5, 1.0))
    out.append(_result("sampler", "hs-qubit-eigenvalue-law",
                       res.p_value > 0.01, f"chi2 p = {res.p_value:.4f}"))

    batch, _, _ = sm.sample_batch(Measure.BURES, 2, n, RngStream(seed, 71))
    bures_cdf = st.numeric_cdf(
        lambda x: np.asarray(ed.density_bures_unnormalized(np.stack([x, 1 - x], axis=-1))),
        support=(0.5, 1.0))
    res = st.ks_test(batch.eigen_records[:, 0], bures_cdf)
    out.append(_result("sampler", "bures-qubit-eigenvalue-law",
                       res.p_value > 0.01, f"KS p = {res.p_value:.4f}"))

    gen = RngStream(seed, 72).generator()
    u = gen.random(n)
    lam = np.asarray(sm.invert_cdf_g2(u))
    res = st.ks_test(lam, ed.cdf_g2)
    out.append(_result("sampler", "g-qubit-inverse-cdf-law",
                       res.p_value > 0.01, f"KS p = {res.p_value:.4f}"))

    _, eg = sm.sample_g_qubit_batch(n, RngStream(seed, 73), keep_matrices=False)
    bb, _, _ = sm.sample_batch(Measure.BURES, 2, n, RngStream(seed, 74))
    res = st.ks_test_two_sample(eg[:, 0], bb.eigen_records[:, 0])
    out.append(_result("sampler", "g-qubit-matches-bures",
                       res.p_value > 0.01, f"two-sample KS p = {res.p_value:.4f}"))

    audit = sm.audit_sup_density_ratio(3, RngStream(seed, 75), probes=n)
    out.append(_result("sampler", "envelope-audit-qutrit", audit.passed,
                       f"max ratio {audit.max_ratio:.12f} vs bound {audit.bound:.12f}"))

    count = max(2000, int(5000 * scale))
    _, eigs, rep = sm.sample_g_rejection_batch(3, count, RngStream(seed, 76))
    target = ed.normalized_density(Measure.SUPERFIDELITY, 3)
    res = st.chi_square_gof_simplex(eigs, target, grid=10, rng=RngStream(seed, 77))
    out.append(_result("sampler", "rejection-gof-qutrit",
                       res.p_value > 0.01,
                       f"chi2 p = {res.p_value:.4f}, acceptance rate {rep.empirical_rate:.3f}"))

    ok = True
    for measure in Measure:
        for dim in (2, 3, 4):
            if measure is Measure.SUPERFIDELITY and dim == 4:
                continue  # rejection at N=4 is slow; covered by the acceptance suite
            b, mats, _ = sm.sample_batch(measure, dim, 50, RngStream(seed, 80 + dim),
                                         keep_matrices=True)
            for k in range(0, 50, 7):
                check_density_matrix(mats[k])
            ok &= abs(b.eigen_records.sum(axis=-1) - 1).max() < 1e-9
    out.append(_result("sampler", "sampled-states-valid", ok,
                       "spot-checked density-matrix invariants"))

    psi = np.zeros(3, dtype=complex)
    psi[0] = 1.0
    gen = RngStream(seed, 90).generator()
    u = haar_unitary(3, gen)
    rot = u @ psi
    m = max(4000, int(10_000 * scale))
    _, mats, _ = sm.sample_batch(Measure.BURES, 3, m, RngStream(seed, 91), keep_matrices=True)
    ev_fixed = np.real(np.einsum("i,nij,j->n", psi.conj(), mats, psi))
    ev_rot = np.real(np.einsum("i,nij,j->n", rot.conj(), mats, rot))
    res = st.ks_test_two_sample(ev_fixed, ev_rot)
    out.append(_result("sampler", "unitary-invariance-of-measure",
                       res.p_value > 0.01, f"two-sample KS p = {res.p_value:.4f}"))
    return out


# ---------------------------------------------------------------------------
# purity suite
# ---------------------------------------------------------------------------

def _purity_checks(seed: int, scale: float = 1.0,
                   dims: tuple[int, ...] = (2, 3)) -> list[CheckResult]:
    out = []
    n = max(50_000, int(200_000 * scale))
    for dim in dims:
        p = sm.hs_purity_batch(dim, n, RngStream(seed, 100 + dim))
        mean, se_m = st.mc_mean(p)
        var, se_v = st.mc_variance(p)
        ok = (abs(mean - ed.purity_mean_hs(dim)) <= 3 * se_m
              and abs(var - ed.purity_variance_hs(dim)) <= 3 * se_v)
        out.append(_result("purity", f"hs-purity-moments-n{dim}", ok,
                           f"mean {mean:.5f} (expect {ed.purity_mean_hs(dim):.5f} "
                           f"+- {3 * se_m:.1e}), var {var:.6f} "
                           f"(expect {ed.purity_variance_hs(dim):.6f} +- {3 * se_v:.1e})"))

    p = sm.hs_purity_batch(2, n, RngStream(seed, 110))
    y = 1.0 / np.sqrt(1.0 - p)
    mean, se = st.mc_mean(y)
    target = 3 * pi / (2 * sqrt(2))
    out.append(_result("purity", "reciprocal-radical-expectation",
                       abs(mean - target) <= 3 * se,
                       f"E[1/sqrt(1-purity)] = {mean:.5f}, expect {target:.5f} +- {3 * se:.1e}"))

    _, eg = sm.sample_g_qubit_batch(n, RngStream(seed, 111), keep_matrices=False)
    pg = np.sum(eg ** 2, axis=-1)
    mean, se = st.mc_mean(pg)
    quad = st.simplex_quadrature(
        lambda lam: float(np.sum(lam ** 2)) * ed.c_g_exact(2).value
        * float(ed.density_g_unnormalized(lam)), 2, 1e-9)
    ok = abs(mean - quad) <= 3 * se and mean > ed.purity_mean_hs(2)
    out.append(_result("purity", "g-qubit-mean-purity", ok,
                       f"mean {mean:.5f}, quadrature {quad:.5f}, HS mean 0.8"))

    count = max(10_000, int(30_000 * scale))
    _, eigs, _ = sm.sample_g_rejection_batch(3, count, RngStream(seed, 112))
    pg3 = np.sum(eigs ** 2, axis=-1)
    mean, se = st.mc_mean(pg3)
    z = (mean - ed.purity_mean_hs(3)) / se
    out.append(_result("purity", "g-qutrit-purity-exceeds-hs",
                       z > 5.0, f"mean {mean:.5f} vs HS 0.6, z = {z:.1f}"))

    moment, se = ed.purity_moment_hs(2, 2, RngStream(seed, 113), samples=n)
    target = ed.purity_mean_hs(2) ** 2 + ed.purity_variance_hs(2)
    out.append(_result("purity", "hs-second-purity-moment",
                       abs(moment - target) <= 3 * se,
                       f"E[p^2] = {moment:.6f}, expect {target:.6f} +- {3 * se:.1e}"))
    return out


_SUITE_FUNCS = {
    "metric": _metric_checks,
    "density": _density_checks,
    "sampler": _sampler_checks,
    "purity": _purity_checks,
}


def run_suite(suite: str, seed: int, scale: float = 1.0,
              dim: int | None = None) -> list[CheckResult]:
    """Run one named suite (or ``all``); returns per-check results.

    ``dim`` restricts the purity suite to one dimension; the other suites
    sweep their fixed dimension sets regardless.
    """
    if suite not in SUITE_NAMES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITE_NAMES}")
    if dim is not None and dim < 2:
        raise ValueError("dim must be >= 2")
    names = [s for s in SUITE_NAMES if s != "all"] if suite == "all" else [suite]
    results = []
    for name in names:
        if name == "purity" and dim is not None:
            results.extend(_purity_checks(seed, scale, dims=(dim,)))
        else:
            results.extend(_SUITE_FUNCS[name](seed, scale))
    return results
