"""Acceptance criteria 1-9, one test each, one PASS/FAIL line each."""

import itertools
import time

import numpy as np
import pytest

from dualmink import estimates as es
from dualmink._util import spawn_generators
from dualmink.bodies import Ellipsoid
from dualmink.measures import lp_dual_raw
from dualmink.solver import ProblemSpec, _random_perturbation, solve, solve_curve, uniqueness_probe
from dualmink.sphere import build_grid, eigenvalue, laplacian, spherical_harmonic_field


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit


def _near_isotropic(grid, seed, even=False, size=0.05):
    rng = spawn_generators(seed, 1)[0]
    return 1.0 + _random_perturbation(grid, rng, size, even, max_degree=4)


def test_criterion_1_isotropic_exactness(report):
    start = time.perf_counter()
    worst_err, worst_it, failures = 0.0, 0, []
    for n, p, dq in itertools.product((2, 3), (-0.5, 0.0, 0.5), (-0.5, 0.0, 0.5)):
        q = n + dq
        sol = solve(ProblemSpec(n, p, q, 1.0))
        err = float(np.abs(sol.u.values - 1).max())
        worst_err, worst_it = max(worst_err, err), max(worst_it, sol.iterations)
        if not (sol.converged and err <= 1e-8 and sol.iterations <= 10):
            failures.append((n, p, q))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed <= 300
    report(1, ok, f"18 cases, max |u-1| = {worst_err:.2e}, max iterations = {worst_it}, {elapsed:.1f}s, failures {failures}")
    assert ok


def test_criterion_2_linear_response(report):
    g = build_grid(3)
    Y = spherical_harmonic_field(g, 2, 0).values
    ratios = []
    for eps in (0.02, 0.01, 0.005):
        sol = solve(ProblemSpec(3, 0.0, 3.0, 1 + eps * Y), g)
        assert sol.converged
        err = np.abs(sol.u.values - (1 - eps * Y / 3)).max()
        ratios.append(err / eps**2)
    ok = max(ratios) <= 5 and max(ratios) / min(ratios) < 3
    report(2, ok, f"err/eps^2 = {[round(float(r), 4) for r in ratios]}")
    assert ok


def test_criterion_3_measure_identities(report):
    rep = es.measure_identities(build_grid(3), mc_samples=1_000_000, seed=0)
    bad = [r.params for r in rep.rows if not r.passed]
    mc = [(r.params["q"], round(float(r.lhs / r.rhs * 3), 2)) for r in rep.rows if "mc_estimate" in r.params]
    report(3, rep.passed, f"{len(rep.rows)} rows; MC deviations in SE {mc}; failing {bad}")
    assert rep.passed and rep.audit()


def test_criterion_4_spectral_correctness(report):
    g = build_grid(3, 32)
    eig_err = 0.0
    for k in range(9):
        for m in range(-k, k + 1):
            Y = spherical_harmonic_field(g, k, m).values
            eig_err = max(eig_err, np.abs(laplacian(g, Y).values + eigenvalue(3, k) * Y).max())
    jac_err = 0.0
    h = 1e-4
    for n, p in itertools.product((2, 3), (-0.5, 0.0, 0.5)):
        grid = g if n == 3 else build_grid(2, 64)
        one = np.ones(grid.size)
        for k in range(7):
            Y = spherical_harmonic_field(grid, k, min(k, 1) if n == 3 else "cos").values
            fd = (lp_dual_raw(grid, one + h * Y, p, n) - lp_dual_raw(grid, one - h * Y, p, n)) / (2 * h)
            expected = (n - p - eigenvalue(n, k)) * Y
            jac_err = max(jac_err, np.abs(fd - expected).max() / np.abs(expected).max())
    ok = eig_err <= 1e-6 and jac_err <= 1e-5
    report(4, ok, f"eigencheck {eig_err:.2e} (<= 1e-6), FD Jacobian relative error {jac_err:.2e} (<= 1e-5)")
    assert ok


def test_criterion_5_cross_implementation(report):
    g = build_grid(2, 512)
    cases = [(0.0, 2.0), (0.5, 2.0), (-0.5, 1.5), (0.0, 2.5), (0.5, 3.0)]
    gaps = []
    for i, (p, q) in enumerate(cases):
        spec = ProblemSpec(2, p, q, _near_isotropic(g, 100 + i))
        a, b = solve(spec, g), solve_curve(spec, M=512)
        assert a.converged and b.converged
        gaps.append(float(np.abs(a.u.values - b.u.values).max()))
    ok = max(gaps) <= 1e-6
    report(5, ok, f"sup-norm gaps {[f'{x:.1e}' for x in gaps]}")
    assert ok


def test_criterion_6_uniqueness_probes(report):
    g = build_grid(3)
    cases = [
        ("(i) f=1, (3,0,3)", ProblemSpec(3, 0.0, 3.0), False),
        ("(ii) even f, (3,0.5,2.5)", ProblemSpec(3, 0.5, 2.5, _near_isotropic(g, 7, even=True)), True),
        ("(iii) f=1, (3,2,1)", ProblemSpec(3, 2.0, 1.0), False),
        ("(iv) f, (3,-0.5,3)", ProblemSpec(3, -0.5, 3.0, _near_isotropic(g, 7)), False),
        ("(iv) f, (3,-0.5,2.9)", ProblemSpec(3, -0.5, 2.9, _near_isotropic(g, 7)), False),
    ]
    lines, ok = [], True
    for label, spec, even in cases:
        if not np.isscalar(spec.f):
            assert abs(np.abs(spec.f - 1).max() - 0.05) < 1e-12
        res = uniqueness_probe(spec, g, num_starts=10, seed=0, perturb_scale=0.2, even=even)
        good = res["converged"] == 10 and res["spread"] <= 1e-6
        ok &= good
        lines.append(f"{label}: {res['converged']}/10 spread {res['spread']:.1e}")
    report(6, ok, "; ".join(lines))
    assert ok


def test_criterion_7_estimates_suite(report):
    parts = {}
    rs = [es.singular_axis_integral(3, s) for s in (0.25, 0.5, 0.75)]
    exact_ok = all(abs(r.metadata["exact"] - 4 * np.pi / (1 - r.metadata["s"])) <= 1e-8 * r.metadata["exact"] for r in rs)
    parts["singular integral"] = exact_ok and all(r.passed for r in rs)
    parts["power difference"] = es.check_power_diff(1.0, [0.1, 0.01, 0.001]).passed
    zoo = es.body_zoo()
    parts["hmax sandwich"] = all(es.hmax_sandwich(b, g).passed for b in zoo.values() for g in (0.5, 1.0, 2.0))
    parts["moment bounds (i)/(ii)"] = all(
        es.ellipsoid_moments(b, 0.5, family=None, decay_check=False).passed
        for b in zoo.values() if isinstance(b, Ellipsoid)
    )
    r8 = es.ellipsoid_moments(Ellipsoid([1.0, 1.0, 8.0]), 0.5)
    spread = next(r for r in r8.rows if r.params.get("check") == "band ratio spread")
    family = next(r for r in r8.rows if r.params.get("check") == "a_n^{-s} proportionality")
    parts["family proportionality"] = family.passed
    parts["band decay within 2x"] = spread.passed
    ok = all(parts.values())
    detail = ", ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in parts.items())
    report(7, ok, f"{detail}; band ratio spread {spread.lhs:.4f} (limit 2)")
    assert ok


def test_criterion_8_c0_shadows(report):
    Rs = [2.0, 4.0, 8.0, 16.0]
    scans = [es.family_scan("ellipsoid", Rs, 0.5, q) for q in (3.0, 2.9)]
    balls = es.family_scan("ball", [0.5, 1.0, 2.0], 0.5, 3.0)
    ok = all(s.passed for s in scans) and balls.passed
    ratios = {s.metadata["q"]: [round(float(m["ratio_normalized"]), 3) for m in s.metadata["members"]] for s in scans}
    report(8, ok, f"normalized ratios {ratios}; ball identity {'ok' if balls.passed else 'FAIL'}")
    assert ok


def test_criterion_9_weak_convergence(report):
    rep = es.weak_convergence(Ellipsoid([1.0, 2.0, 3.0]), p=0.5, grid=build_grid(3, 32))
    ratios = [round(r.lhs, 3) for r in rep.rows]
    report(9, rep.passed, f"successive gap ratios {ratios} (need [8, 12])")
    assert rep.passed
