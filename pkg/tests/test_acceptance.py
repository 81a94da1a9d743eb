"""Acceptance criteria, one test per criterion, at full stated scale.

Each test prints a single PASS/FAIL line (run with ``pytest -s`` to see them
for passing tests).  Criterion 9 is expected to fail: the moment series for
the qubit normalization constant has a 1/sqrt(k) tail, so a k_max = 20
truncation sits ~28% above the true constant, far outside the demanded 1%;
see notes on the series estimator in the test body.  The estimator itself is
correct: its partial sums are monotone and converge at large k_max (covered
in test_eigendensities).
"""
import io
import subprocess
import sys
import time
from contextlib import redirect_stdout

import numpy as np
import pytest

import superfid as sf
from superfid import cli
from superfid.eigendensities import normalized_density
from superfid.qstate import Measure
from superfid.rng import RngStream

PI_OVER_2SQRT2 = 1.1107207345395915
THREE_PI_OVER_2SQRT2 = 3.332162203618774
C2G = 0.9003163161571068
C3G_TARGET = 1030.67  # acceptance target; the exact closed form is 1030.6207722...


class Criterion:
    def __init__(self, num, desc, limit_s):
        self.num = num
        self.desc = desc
        self.limit = limit_s
        self.checks = []

    def check(self, passed, detail):
        self.checks.append((bool(passed), detail))

    def __enter__(self):
        self.t0 = time.time()
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            return False
        elapsed = time.time() - self.t0
        passed = all(ok for ok, _ in self.checks) and elapsed < self.limit
        detail = "; ".join(f"{'ok' if ok else 'VIOLATED'}: {d}" for ok, d in self.checks)
        line = (f"{'PASS' if passed else 'FAIL'} criterion {self.num:2d} "
                f"[{elapsed:5.1f}s/{self.limit}s] {self.desc} | {detail}")
        print(line)
        assert passed, line
        return False


def _hs_stack(dim, count, stream):
    return sf.sample_hs_batch(dim, count, RngStream(12_000 + stream))


def test_c01_superfidelity_equals_fidelity_on_qubits():
    with Criterion(1, "F = G on qubits (10^3 pairs, tol 1e-9)", 5) as c:
        a = _hs_stack(2, 1000, 1)
        b = _hs_stack(2, 1000, 2)
        gap = np.max(np.abs(sf.fidelity(a, b) - sf.superfidelity(a, b)))
        c.check(gap <= 1e-9, f"max |F-G| = {gap:.2e}")


def test_c02_superfidelity_upper_bounds_fidelity():
    with Criterion(2, "F <= G + 1e-9 for N=3,4,5 (10^3 pairs each)", 30) as c:
        for dim in (3, 4, 5):
            a = _hs_stack(dim, 1000, 10 + dim)
            b = _hs_stack(dim, 1000, 20 + dim)
            worst = np.max(sf.fidelity(a, b) - sf.superfidelity(a, b))
            c.check(worst <= 1e-9, f"N={dim}: max F-G = {worst:.2e}")


def test_c03_metric_axioms():
    with Criterion(3, "d_G triangle inequality and zero self-distance", 60) as c:
        for dim in (2, 3, 4):
            x = _hs_stack(dim, 10_000, 30 + dim)
            y = _hs_stack(dim, 10_000, 40 + dim)
            z = _hs_stack(dim, 10_000, 50 + dim)
            viol = np.max(sf.dist_g(x, z) - sf.dist_g(x, y) - sf.dist_g(y, z))
            self_d = np.max(sf.dist_g(x, x))
            c.check(viol <= 1e-12, f"N={dim}: max triangle violation = {viol:.2e}")
            c.check(self_d <= 1e-10, f"N={dim}: max self-distance = {self_d:.2e}")


def test_c04_line_element_checks():
    with Criterion(4, "FD(d_G^2) matches the analytic line element", 60) as c:
        dg2 = lambda a, b: sf.dist_g(a, b) ** 2
        for dim in (2, 3):
            gaps, ratios, eq_gaps = [], [], []
            gen = RngStream(60 + dim).generator()
            for _ in range(100):
                # mixedness floor keeps the FD stencil inside its O(h^2) regime
                rho = 0.8 * sf.sample_hs_batch(dim, 1, gen)[0] + 0.2 * np.eye(dim) / dim
                drho = sf.random_tangent(dim, gen)
                analytic = sf.line_element_g(rho, drho)
                fd = sf.fd_second_derivative(dg2, rho, drho, 1e-3)
                gaps.append(abs(fd - analytic))
                e1 = abs(sf.fd_second_derivative(dg2, rho, drho, 1e-2) - analytic)
                e2 = abs(sf.fd_second_derivative(dg2, rho, drho, 5e-3) - analytic)
                if e1 > 1e-12:
                    ratios.append(e1 / e2)
                if dim == 2:
                    eq_gaps.append(abs(analytic - sf.line_element_bprime(rho, drho)))
            c.check(max(gaps) <= 1e-4, f"N={dim}: max |FD - analytic| = {max(gaps):.2e}")
            med = float(np.median(ratios))
            c.check(2.5 <= med <= 6.0, f"N={dim}: median error ratio h->h/2 = {med:.2f}")
            if dim == 2:
                c.check(max(eq_gaps) <= 1e-8,
                        f"N=2: max |g - bprime line element| = {max(eq_gaps):.2e}")


def test_c05_normalization_constants_by_quadrature():
    with Criterion(5, "simplex quadrature reproduces 1/C for N=2,3", 120) as c:
        val2 = sf.simplex_quadrature(sf.density_g_unnormalized, 2, 1e-9)
        c.check(abs(val2 - PI_OVER_2SQRT2) <= 1e-6,
                f"N=2 integral = {val2:.9f} vs pi/(2 sqrt 2)")
        val3 = sf.simplex_quadrature(sf.density_g_unnormalized, 3, 1e-10)
        rel = abs(val3 - 1 / C3G_TARGET) / (1 / C3G_TARGET)
        c.check(rel <= 1e-3, f"N=3 1/integral = {1 / val3:.4f} vs {C3G_TARGET} (rel {rel:.1e})")


def test_c06_monte_carlo_identity():
    with Criterion(6, "E_HS[1/sqrt(1 - purity)] for N=2 (10^6 samples)", 120) as c:
        p = sf.hs_purity_batch(2, 10 ** 6, RngStream(70))
        y = 1.0 / np.sqrt(1.0 - p[p < 1.0 - 1e-14])
        mean, se = sf.mc_mean(y)
        gap = abs(mean - THREE_PI_OVER_2SQRT2)
        c.check(gap <= 3 * se, f"estimate {mean:.5f} vs 3pi/(2 sqrt 2) "
                               f"= {THREE_PI_OVER_2SQRT2:.5f} (gap {gap:.1e}, 3SE {3 * se:.1e})")


def test_c07_jensen_bound():
    with Criterion(7, "C_N^G <= C_N^HS sqrt(1 - 2N/(N^2+1))", 300) as c:
        for dim in (2, 3):
            est = sf.c_g_quadrature(dim)
            bound = sf.c_g_jensen_bound(dim).value
            c.check(est.value <= bound, f"N={dim}: {est.value:.4g} <= {bound:.4g}")
        for dim in (4, 5):
            est = sf.c_g_monte_carlo(dim, 10 ** 6, RngStream(80 + dim))
            bound = sf.c_g_jensen_bound(dim).value
            c.check(est.value <= bound + 3 * est.std_error,
                    f"N={dim}: {est.value:.5g} (3SE {3 * est.std_error:.2g}) <= {bound:.5g}")


def test_c08_purity_statistics():
    with Criterion(8, "HS purity mean and variance for N=2,3 (10^6 samples)", 120) as c:
        for dim in (2, 3):
            p = sf.hs_purity_batch(dim, 10 ** 6, RngStream(90 + dim))
            mean, se_m = sf.mc_mean(p)
            var, se_v = sf.mc_variance(p)
            gap_m = abs(mean - sf.purity_mean_hs(dim))
            gap_v = abs(var - sf.purity_variance_hs(dim))
            c.check(gap_m <= 3 * se_m, f"N={dim} mean {mean:.6f} (gap {gap_m:.1e} <= {3 * se_m:.1e})")
            c.check(gap_v <= 3 * se_v, f"N={dim} var {var:.7f} (gap {gap_v:.1e} <= {3 * se_v:.1e})")


def test_c09_series_estimator_at_k20():
    # Target: k_max = 20, Monte-Carlo moments, accuracy 1% of 0.900316.  The
    # series 1/C = (1/C_HS) sum_k c_k E[p^k] has terms ~ 3 c_k / k ~ k^(-3/2)
    # for N = 2 (E[p^k] decays only algebraically since purity can approach
    # 1), so the truncated tail is ~ 2 * 20 * t_20 ~ 0.7, i.e. ~21% of the
    # sum: the 1% target is mathematically unreachable at k_max = 20 and this
    # criterion fails.  The truncation indicator (the last term, ~0.5% of the
    # sum) vastly understates the tail.  test_eigendensities.py demonstrates
    # the same estimator is within 2.5% of the constant by k_max = 20000, and
    # the truncation is harmless for N >= 3 where purity concentrates low.
    with Criterion(9, "series estimator at k_max=20 within 1% (known unattainable)",
                   300) as c:
        est, partial = sf.c_g_series(2, 20, RngStream(100), samples=10 ** 6,
                                     return_partial_sums=True)
        monotone = np.all(np.diff(partial) > 0)
        c.check(monotone, "partial sums of 1/C monotone increasing")
        rel = abs(est.value - C2G) / C2G
        c.check(rel <= 0.01,
                f"k_max=20 estimate {est.value:.4f} vs {C2G:.6f} (rel err {rel:.1%}; "
                f"last-term indicator {est.truncation_last_term:.2e})")


def test_c10_qubit_sampler():
    with Criterion(10, "qubit superfidelity sampler follows F_G,2 (10^5)", 60) as c:
        c.check(sf.cdf_g2(0.5) == 0.5, "F_G,2(1/2) = 1/2 exactly")
        gen = RngStream(110).generator()
        lam = np.asarray(sf.invert_cdf_g2(gen.random(10 ** 5)))
        res = sf.ks_test(lam, sf.cdf_g2)
        c.check(res.p_value > 0.01, f"KS of sampled eigenvalues vs F_G,2: p = {res.p_value:.4f}")

        _, eigs_g = sf.sample_g_qubit_batch(10 ** 5, RngStream(111), keep_matrices=False)

        def lam_max_cdf(x):
            x = np.asarray(x, dtype=float)
            return np.asarray(sf.cdf_g2(np.clip(x, 0.5, 1.0))) - \
                np.asarray(sf.cdf_g2(np.clip(1.0 - x, 0.0, 0.5)))

        res = sf.ks_test(eigs_g[:, 0], lam_max_cdf)
        c.check(res.p_value > 0.01, f"KS of lambda_max vs reflected F_G,2: p = {res.p_value:.4f}")

        bures, _, _ = sf.sample_batch(Measure.BURES, 2, 10 ** 5, RngStream(112))
        res = sf.ks_test_two_sample(eigs_g[:, 0], bures.eigen_records[:, 0])
        c.check(res.p_value > 0.01,
                f"two-sample KS vs Bures qubit sampler: p = {res.p_value:.4f}")


def test_c11_rejection_sampler_qutrit():
    with Criterion(11, "qutrit rejection sampler is exact (10^5 accepted)", 600) as c:
        audit = sf.audit_sup_density_ratio(3, RngStream(120), probes=10 ** 5)
        c.check(audit.max_ratio <= audit.bound + 1e-9,
                f"envelope audit: max ratio {audit.max_ratio:.12f} vs bound {audit.bound:.12f}")
        _, eigs, report = sf.sample_g_rejection_batch(3, 10 ** 5, RngStream(121))
        res = sf.chi_square_gof_simplex(eigs, normalized_density(Measure.SUPERFIDELITY, 3),
                                        grid=12, rng=RngStream(122))
        c.check(res.p_value > 0.01,
                f"chi^2 GoF vs C_3^G * density: p = {res.p_value:.4f} "
                f"({res.bins_or_n} cells, acceptance rate {report.empirical_rate:.4f})")
        mean, se = sf.mc_mean(np.sum(eigs ** 2, axis=-1))
        z = (mean - sf.purity_mean_hs(3)) / se
        c.check(z > 5.0, f"mean purity {mean:.5f} vs HS 0.6 at z = {z:.1f}")


def test_c12_rejection_constant():
    with Criterion(12, "rejection bound constant c matches its factorization", 10) as c:
        alt = (sf.c_g_jensen_bound(3).value / sf.c_bures_quadrature(3).value
               * sf.sup_density_ratio_unnormalized(3))
        rel = abs(sf.rejection_constant_c(3) / alt - 1.0)
        c.check(rel <= 1e-6, f"c(3) = {sf.rejection_constant_c(3):.6f}, "
                             f"(jensen/C_B^quad)*sup = {alt:.6f} (rel {rel:.1e})")
        values = [sf.rejection_constant_c(n) for n in range(3, 9)]
        c.check(all(b > a for a, b in zip(values, values[1:])),
                f"c increasing on N=3..8: {', '.join(f'{v:.3g}' for v in values)}")


def test_c13_density_grids():
    with Criterion(13, "qutrit density grids at resolution 400", 60) as c:
        for measure in (Measure.SUPERFIDELITY, Measure.BURES):
            grid = sf.density_grid_qutrit(400, measure)
            total = sf.grid_integral(grid)
            c.check(abs(total - 1.0) <= 0.02,
                    f"{measure.value}: boundary-extrapolated integral = {total:.4f}")
            table = {}
            for l1, l2, d in zip(grid.lambda1, grid.lambda2, grid.density):
                key = tuple(sorted((l1, l2, round(1 - l1 - l2, 12))))
                table.setdefault(key, []).append(d)
            sym = all(
                (all(np.isnan(v) for v in vals) or all(v == vals[0] for v in vals))
                for vals in table.values())
            c.check(sym, f"{measure.value}: permutation-symmetric to round-off")


def _run_cli(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(argv)
    return code, buf.getvalue()


def test_c14_cli_determinism():
    with Criterion(14, "CLI byte-identical across reruns", 60) as c:
        commands = [
            ["sample", "--measure", "hs", "--dim", "3", "--count", "200", "--seed", "7"],
            ["sample", "--measure", "bures", "--dim", "2", "--count", "100", "--seed", "7",
             "--format", "json"],
            ["sample", "--measure", "g", "--dim", "2", "--count", "100", "--seed", "7",
             "--full-matrix"],
            ["sample", "--measure", "g", "--dim", "3", "--count", "50", "--seed", "7",
             "--workers", "2"],
            ["estimate", "--dim", "3", "--method", "mc", "--samples", "20000",
             "--seed", "7"],
            ["estimate", "--dim", "2", "--method", "series", "--samples", "5000",
             "--k-max", "10", "--seed", "7"],
            ["grid", "--measure", "g", "--resolution", "25"],
            ["verify", "purity", "--seed", "2", "--scale", "0.05", "--format", "json"],
        ]
        for argv in commands:
            code1, out1 = _run_cli(argv)
            code2, out2 = _run_cli(argv)
            c.check(code1 == code2 and out1 == out2 and len(out1) > 0,
                    f"{' '.join(argv[:4])}... identical")
        proc = [sys.executable, "-m", "superfid.cli", "sample", "--measure", "hs",
                "--dim", "2", "--count", "20", "--seed", "3"]
        r1 = subprocess.run(proc, capture_output=True, check=True)
        r2 = subprocess.run(proc, capture_output=True, check=True)
        c.check(r1.stdout == r2.stdout, "subprocess run byte-identical")
