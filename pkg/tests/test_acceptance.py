"""Acceptance suite: one test per criterion, each printing a PASS line with
its measured figures.  Simulation seeds are frozen; every tolerance is the
one stated up front, nothing is calibrated after the fact.
"""

import math
import time

import numpy as np
import pytest

from stablefield import coeffs as cf
from stablefield import innovations as innov
from stablefield import lattice as lat
from stablefield import montecarlo as mc
from stablefield import normalizer as nz
from stablefield import slowvary as sv
from stablefield import weights as wt
from stablefield.stable import StableLaw

L1 = sv.constant(1.0)
EX1 = cf.DoublyGeometric(0.5, 0.5)
STABLE15 = innov.ExactStable(StableLaw(1.5, 1.0, 0.0))


def report(cid, ok, detail):
    print(f"\nACCEPTANCE {cid}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{cid}: {detail}"


@pytest.fixture(scope="module")
def example1_n32():
    field = wt.build_weights(EX1, lat.cube(32, 2), 1.5, L1)
    result = nz.solve_Bn(field, 1.5, L1)
    law = nz.limit_law(result.c_hat, 1.5, 1.0, 0.0)
    return field, result, law


@pytest.fixture(scope="module")
def example1_n32_samples_2e5(example1_n32):
    field, result, law = example1_n32
    plan = mc.SimPlan(field, STABLE15, result.B_n, 200_000, 4242)
    return plan, mc.simulate(plan), law


def test_c1_normalizer_oracle_equivalence():
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        n = int(rng.integers(2, 64))
        vals = rng.normal(size=n) * rng.uniform(0.5, 20.0)
        alpha = float(rng.uniform(0.3, 2.0))
        closed = float(np.sum(np.abs(vals) ** alpha)) ** (1.0 / alpha)
        if closed <= 1.0:
            vals *= 2.0 / closed
            closed = float(np.sum(np.abs(vals) ** alpha)) ** (1.0 / alpha)
        field = wt.WeightField(vals, (0,), 0.0, False)
        got = nz.solve_Bn(field, alpha, L1).B_n
        worst = max(worst, abs(got - closed) / closed)
    dt = time.perf_counter() - t0
    report("C1 normalizer-oracle", worst < 1e-9 and dt < 5.0,
           f"max rel err {worst:.2e}, {dt:.2f} s")


def test_c2_stable_numerics_closed_forms():
    t0 = time.perf_counter()
    xs = np.linspace(-10.0, 10.0, 401)
    gauss = StableLaw(2.0, 1.0)
    cauchy = StableLaw(1.0, 1.0)
    g_pdf = max(abs(gauss.pdf(float(x))
                    - math.exp(-x * x / 4.0) / (2.0 * math.sqrt(math.pi)))
                for x in xs)
    g_cdf = max(abs(gauss.cdf(float(x)) - 0.5 * (1.0 + math.erf(x / 2.0)))
                for x in xs)
    c_pdf = max(abs(cauchy.pdf(float(x)) - 1.0 / (math.pi * (1.0 + x * x)))
                for x in xs)
    c_cdf = max(abs(cauchy.cdf(float(x)) - (0.5 + math.atan(x) / math.pi))
                for x in xs)
    f0 = StableLaw(1.5, 1.0).pdf(0.0)
    f0_err = abs(f0 - math.gamma(1.0 + 1.0 / 1.5) / math.pi)
    dt = time.perf_counter() - t0
    sup = max(g_pdf, g_cdf, c_pdf, c_cdf)
    report("C2 stable-closed-forms", sup < 1e-6 and f0_err < 1e-6 and dt < 10.0,
           f"sup err {sup:.2e}, f(0) err {f0_err:.2e}, {dt:.2f} s")


def test_c3_weak_convergence_exact_path(example1_n32):
    field, result, law = example1_n32
    plan = mc.SimPlan(field, STABLE15, result.B_n, 100_000, 42)
    t0 = time.perf_counter()
    samples = mc.simulate(plan)
    ks = mc.ks_against(samples / result.B_n, law)
    dt = time.perf_counter() - t0
    report("C3 weak-convergence-exact", ks < 0.01,
           f"KS = {ks:.5f} at n=32, R=1e5, B_n = {result.B_n:.2f}, {dt:.0f} s")


def test_c4_weak_convergence_pareto_path():
    pm = innov.ParetoMix(1.5, 0.5)
    L = pm.canonical_L()
    c_alpha, c_err = innov.estimate_c_alpha(pm)
    law = nz.limit_law(1.0, 1.5, c_alpha, 0.0)
    ks = {}
    for n, R in ((16, 50_000), (64, 50_000)):
        field = wt.build_weights(EX1, lat.cube(n, 2), 1.5, L)
        result = nz.solve_Bn(field, 1.5, L)
        plan = mc.SimPlan(field, pm, result.B_n, R, 20250809)
        ks[n] = mc.ks_against(mc.simulate(plan) / result.B_n, law)
    ok = ks[64] < 0.05 and ks[64] < ks[16]
    report("C4 weak-convergence-pareto", ok,
           f"KS(16) = {ks[16]:.4f} > KS(64) = {ks[64]:.4f} < 0.05, "
           f"c_alpha = {c_alpha:.4f}±{c_err:.1e}")


def test_c5_local_limit_interval(example1_n32_samples_2e5):
    plan, samples, law = example1_n32_samples_2e5
    row = mc.interval_prob(plan, law, -1.0, 1.0, samples=samples)
    target = 2.0 * law.pdf(0.0)
    rel = abs(row["value"] - target) / target
    z = abs(row["value"] - row["target"]) / row["std_err"]
    ok = rel < 0.20 and z < 3.0
    report("C5 llt-interval", ok,
           f"B·P = {row['value']:.4f} vs 2f(0) = {target:.4f}, "
           f"rel {rel:.3f} < 0.20, z = {z:.2f} < 3")


def test_c6_llt_functional_form(example1_n32_samples_2e5):
    plan, samples, law = example1_n32_samples_2e5
    B = plan.B_n
    rows = mc.llt_estimate(plan, law, "tent", [0.0, B / 2.0, B],
                           samples=samples)
    zs = [abs(r["value"] - r["target"]) / r["std_err"] for r in rows]
    ok = all(z < 3.0 for z in zs)
    report("C6 llt-functional", ok,
           "z = " + ", ".join(f"{z:.2f}" for z in zs) + " (all < 3)")


def test_c7_example_rates():
    t0 = time.perf_counter()
    # a: doubly geometric ratio at n = 256
    field = wt.build_weights(EX1, lat.cube(256, 2), 1.5, L1)
    b256 = nz.solve_Bn(field, 1.5, L1).B_n
    ratio = b256 / (4.0 * 256.0 ** (2.0 / 1.5))
    ok_a = 0.98 <= ratio <= 1.05

    # b: isotropic slopes over n in {64..512}
    iso = cf.Isotropic(1.5, 2)
    ns = [64, 128, 256, 512]
    bs, sups = [], []
    for n in ns:
        f = wt.build_weights(iso, lat.symmetric_box(n, [1.0, 1.0]), 1.8, L1)
        r = nz.solve_Bn(f, 1.8, L1)
        bs.append(r.B_n)
        sups.append(wt.diagnostics(f, r.B_n)["sup_b"])
    k = len(ns) // 2
    slope_b = float(np.polyfit(np.log(ns[k:]), np.log(bs[k:]), 1)[0])
    slope_s = float(np.polyfit(np.log(ns[k:]), np.log(sups[k:]), 1)[0])
    want_b = (1.0 + 1.0 / 1.8) * 2.0 - 1.5
    ok_b = abs(slope_b - want_b) < 0.05 and abs(slope_s - 0.5) < 0.05

    # c: anisotropic slope, Q = 1.5
    ani = cf.Anisotropic([1.0, 2.0], 1.2)
    abs_ns, abs_bs = [64, 128, 256, 512], []
    for n in abs_ns:
        f = wt.build_weights(ani, lat.anisotropic_box(n, [1.0, 2.0]), 1.8, L1)
        abs_bs.append(nz.solve_Bn(f, 1.8, L1).B_n)
    slope_c = float(np.polyfit(np.log(abs_ns[2:]), np.log(abs_bs[2:]), 1)[0])
    want_c = (1.0 + 1.0 / 1.8) * 1.5 - 1.2
    ok_c = abs(slope_c - want_c) < 0.10
    dt = time.perf_counter() - t0
    report("C7 example-rates", ok_a and ok_b and ok_c and dt < 900.0,
           f"ratio = {ratio:.4f} in [0.98, 1.05]; "
           f"slopes {slope_b:.4f}/{want_b:.4f}, {slope_s:.4f}/0.5, "
           f"{slope_c:.4f}/{want_c:.4f}; {dt:.0f} s")


def test_c8_increment_bound_randomized():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    checked = 0
    for _ in range(1000):
        kind = rng.random()
        if kind < 0.6:
            support = {
                (int(rng.integers(-3, 4)), int(rng.integers(-3, 4))):
                    float(rng.normal())
                for _ in range(rng.integers(1, 8))
            }
            model = cf.Finite(support)
            p = float(rng.uniform(1.2, 3.0))
        elif kind < 0.85:
            model = cf.DoublyGeometric(float(rng.uniform(-0.8, 0.8)),
                                       float(rng.uniform(-0.8, 0.8)))
            p = float(rng.uniform(1.2, 3.0))
        else:
            b = float(rng.uniform(0.1, 0.4))
            model = cf.Farima(b, b)
            p = float(rng.uniform(1.0 / (1.0 - b) + 0.2, 3.5))
        region = lat.scattered(int(rng.integers(1, 17)), 2, 30, 4, rng)
        res = wt.delta_bound_check(model, region, p)
        assert res["holds"], (model, p, res)
        checked += 1
    dt = time.perf_counter() - t0
    report("C8 increment-bound", checked == 1000,
           f"held on {checked}/1000 instances, {dt:.0f} s")


def test_c9_invariant_suites(example1_n32):
    t0 = time.perf_counter()
    failures = []

    # determinism: bitwise identical samples across 1 and 8 workers
    field = wt.build_weights(EX1, lat.cube(6, 2), 1.5, L1)
    res = nz.solve_Bn(field, 1.5, L1)
    plan = mc.SimPlan(field, STABLE15, res.B_n, 256, 777)
    if not np.array_equal(mc.simulate(plan, workers=1),
                          mc.simulate(plan, workers=8)):
        failures.append("worker determinism")

    # zero-argument convention is exact
    for L in (L1, sv.pareto_canonical(1.5), sv.log_power(2.0)):
        if sv.weighted_term(L, 1.5, 0.0, 3.0) != 0.0:
            failures.append("convention at zero")

    # normalizer equation residuals
    rng = np.random.default_rng(5)
    for _ in range(20):
        vals = rng.normal(size=rng.integers(2, 40)) * 4.0
        f = wt.WeightField(vals, (0,), 0.0, False)
        for L in (L1, sv.pareto_canonical(1.3)):
            r = nz.solve_Bn(f, 1.3, L, tol=1e-10)
            if not r.boundary and r.residual > 1e-8:
                failures.append("F(B)=1 residual")

    # partition identity
    vals = rng.normal(size=64)
    cond = nz.check_conditions(wt.WeightField(vals, (0,), 0.0, False),
                               1.5, L1, 3.0)
    if cond["A1"] != cond["S1"] + cond["S2"]:
        failures.append("S1+S2=A1")

    # tail balance frequencies
    pm = innov.ParetoMix(1.5, 0.5)
    x = pm.sample(np.random.default_rng(6), 10**5)
    for thr in (2.0, 4.0, 8.0):
        if abs(np.mean(np.abs(x) > thr) - thr**-1.5) > 0.01:
            failures.append(f"tail balance at {thr}")

    # truncated-moment ratio approaches (2 - alpha)/alpha
    for alpha in (0.8, 1.5):
        xx = 1e4
        ratio = (xx * xx * xx**-alpha
                 / (alpha * (xx ** (2 - alpha) - 1.0) / (2.0 - alpha)))
        if abs(ratio - (2 - alpha) / alpha) / ((2 - alpha) / alpha) > 0.02:
            failures.append(f"moment ratio alpha={alpha}")

    dt = time.perf_counter() - t0
    report("C9 invariant-suites", not failures and dt < 120.0,
           f"{'all green' if not failures else failures}, {dt:.0f} s")
