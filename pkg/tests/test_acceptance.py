"""Acceptance gate: every release-blocking property in one module.

Each test covers one numbered criterion, prints one PASS/FAIL line with the
measured quantity and its tolerance, and asserts the stated runtime budget.
Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import itertools
import time

import numpy as np
import pytest

from mpfkit import dense
from mpfkit.bch import (
    check_truncated_generator,
    compute_phi,
    oracle_phi_from_logs,
    phi_report,
)
from mpfkit.bounds import (
    admissibility_chain,
    bch_time_condition,
    build_report,
    helper_inequality_check,
    matched_mpf_spec,
    mpf_time_condition,
    report_from_parts,
    self_consistency,
    step_error_bound,
    truncation_order,
    trotter_number,
)
from mpfkit.commutators import (
    factorial_commutator_bound,
    insertion_bound,
    inserted_commutator_sum,
    mu_from_alphas,
    mu_window_bound,
    nested_commutator_sum,
    power_commutator_bound,
)
from mpfkit.hamiltonians import heisenberg_chain, long_range_zz_chain, make_spec
from mpfkit.mpf import (
    MPFEvaluator,
    build_mpf,
    solve_coefficients,
    vandermonde_residuals,
)
from mpfkit.pauli import PauliSum, PauliTerm
from mpfkit.trotter import (
    TrotterEvaluator,
    build_plan,
    geometric_grid,
    loglog_slope,
)


def report(number: int, ok: bool, detail: str, elapsed: float, budget: float):
    verdict = "PASS" if ok and elapsed < budget else "FAIL"
    print(
        f"criterion {number:02d} {verdict}: {detail} [{elapsed:.1f}s of {budget:.0f}s]"
    )
    assert ok, detail
    assert elapsed < budget, f"criterion {number} exceeded {budget}s ({elapsed:.1f}s)"


def desk_chain(n_sites: int = 4):
    return heisenberg_chain(n_sites, field=0.8)


def test_criterion_01_pauli_oracle_exhaustive():
    start = time.monotonic()
    worst = 0.0
    for n in (1, 2, 3):
        labels = ["".join(s) for s in itertools.product("IXYZ", repeat=n)]
        mats = {
            lab: dense.from_pauli_sum(PauliSum.from_label(lab)) for lab in labels
        }
        for la, lb in itertools.product(labels, repeat=2):
            ta = PauliTerm.from_label(la)
            tb = PauliTerm.from_label(lb)
            prod = ta * tb
            dev = np.max(
                np.abs(prod.coeff * mats[prod.label] - mats[la] @ mats[lb])
            )
            worst = max(worst, float(dev))
            comm = ta.commutator(tb)
            target = mats[la] @ mats[lb] - mats[lb] @ mats[la]
            got = (
                comm.coeff * mats[comm.label]
                if comm is not None
                else np.zeros_like(target)
            )
            worst = max(worst, float(np.max(np.abs(got - target))))
    report(
        1,
        worst <= 1e-12,
        f"exhaustive product/commutator deviation {worst:.2e} <= 1e-12",
        time.monotonic() - start,
        10.0,
    )


def test_criterion_02_trotter_order_and_envelope():
    start = time.monotonic()
    spec = desk_chain()
    details = []
    ok = True
    for p, (lo, hi) in ((1, (0.01, 0.3)), (2, (0.01, 0.3)), (4, (0.05, 0.5))):
        plan = build_plan(spec.n_groups, p)
        taus = geometric_grid(lo, hi, 12)
        errors = TrotterEvaluator(spec, plan).error_sweep(taus)
        slope, _ = loglog_slope(taus, errors)
        alpha = nested_commutator_sum(spec, p + 1, "exact")
        model = alpha * taus ** (p + 1)
        prefactor = float(np.exp(np.mean(np.log(errors / model))))
        envelope_ok = bool(np.all(errors <= 1.5 * prefactor * model))
        ok = ok and slope >= p + 0.8 and envelope_ok
        details.append(f"p={p} slope {slope:.2f} >= {p + 0.8}")
    report(
        2,
        ok,
        "; ".join(details) + "; errors within 1.5x fitted envelope",
        time.monotonic() - start,
        60.0,
    )


def test_criterion_03_commutator_bounds_and_insertion():
    start = time.monotonic()
    violations = 0
    checked = 0
    for n in (3, 4, 5, 6):
        spec = desk_chain(n)
        for q in (2, 3, 4, 5):
            alpha = nested_commutator_sum(spec, q, "exact")
            factorial = factorial_commutator_bound(
                q, spec.locality, spec.extensiveness, spec.n_sites
            )
            one_norm = power_commutator_bound(q, spec.total_one_norm)
            checked += 2
            violations += alpha > factorial
            violations += alpha > one_norm
        obs = PauliSum.from_label("X" + "I" * (n - 1), 0.9)
        obs_norm = dense.spectral_norm(dense.from_pauli_sum(obs))
        for q in (2, 3, 4):
            cap = insertion_bound(q, spec.locality, spec.extensiveness, obs_norm)
            for pos in range(1, q + 1):
                checked += 1
                violations += inserted_commutator_sum(spec, obs, q, pos) > cap
    report(
        3,
        violations == 0,
        f"{checked} bound comparisons on 3..6-site chains, {violations} violations",
        time.monotonic() - start,
        300.0,
    )


def random_two_site_spec(rng: np.random.Generator):
    labels = ["XI", "IX", "ZI", "IZ", "XX", "YY", "ZZ", "XZ"]
    terms = []
    for i, lab in enumerate(labels):
        group = 1 if i % 2 == 0 else 2
        terms.append((PauliTerm.from_label(lab, float(rng.uniform(-1, 1))), group))
    return make_spec(2, terms)


def test_criterion_04_series_coefficients():
    start = time.monotonic()
    spec = desk_chain()
    worst_zero = 0.0
    worst_herm = 0.0
    bound_ok = True
    shape_ok = True
    for p in (1, 2):
        plan = build_plan(spec.n_groups, p)
        for q in range(2, 6):
            rep = phi_report(plan, spec, q)
            if q <= p:
                worst_zero = max(worst_zero, rep.norm_exact)
            worst_herm = max(worst_herm, rep.hermiticity_defect)
            bound_ok = bound_ok and rep.norm_exact <= rep.norm_bound * (1 + 1e-12)
            shape_ok = shape_ok and rep.locality <= rep.locality_bound
            shape_ok = (
                shape_ok
                and rep.extensiveness <= rep.extensiveness_bound * (1 + 1e-12)
            )
    rng = np.random.default_rng(23)
    taus = np.linspace(0.008, 0.1, 28)
    worst_oracle = 0.0
    for _ in range(4):
        rand_spec = random_two_site_spec(rng)
        for order in (1, 2):
            plan = build_plan(2, order)
            oracle = oracle_phi_from_logs(plan, rand_spec, 9, taus)
            for q in (2, 3, 4):
                diff = compute_phi(plan, rand_spec, q) - oracle[q - 1]
                dev = max((abs(c) for _, c in diff.items()), default=0.0)
                worst_oracle = max(worst_oracle, dev)
    ok = (
        worst_zero <= 1e-10
        and worst_herm <= 1e-10
        and bound_ok
        and shape_ok
        and worst_oracle <= 1e-6
    )
    report(
        4,
        ok,
        f"vanishing {worst_zero:.1e} <= 1e-10, hermiticity {worst_herm:.1e} <= "
        f"1e-10, norm/locality/extensiveness bounds hold, matrix-log oracle "
        f"deviation {worst_oracle:.1e} <= 1e-6",
        time.monotonic() - start,
        300.0,
    )


def test_criterion_05_truncated_generator():
    start = time.monotonic()
    spec = desk_chain()
    plan = build_plan(spec.n_groups, 2)
    eps = 0.25
    p0 = truncation_order(spec.n_sites, eps)
    assert p0 == 4
    boundary = bch_time_condition(
        spec.n_sites, eps, plan.stage_factor, spec.locality, spec.extensiveness
    )
    check = check_truncated_generator(
        plan,
        spec,
        eps,
        p0,
        boundary,
        slope_grid=geometric_grid(0.02, 0.2, 10),
    )
    ok = check.passed and check.slope is not None and check.slope >= p0 + 0.8
    report(
        5,
        ok,
        f"defect {max(check.defects):.2e} <= {eps} at tau <= {boundary:.2e}, "
        f"slope {check.slope:.2f} >= {p0 + 0.8}",
        time.monotonic() - start,
        120.0,
    )


def test_criterion_06_extrapolation_order():
    start = time.monotonic()
    spec = desk_chain()
    plan = build_plan(spec.n_groups, 2)
    taus = geometric_grid(0.01, 0.3, 12)
    slope_ok = True
    slopes = []
    residual_ok = True
    for j in (1, 2, 3):
        mspec = build_mpf(j)
        errors = MPFEvaluator(mspec, plan, spec).error_sweep(taus)
        slope, _ = loglog_slope(taus, errors)
        slopes.append(slope)
        slope_ok = slope_ok and slope >= mspec.m + 0.8
        residual_ok = (
            residual_ok
            and float(
                np.max(vandermonde_residuals(mspec.k_values, mspec.c_values))
            )
            <= 1e-10
        )
    pair = solve_coefficients((1, 2))
    exact_ok = (
        abs(pair.c_values[0] + 1.0 / 3.0) <= 1e-12
        and abs(pair.c_values[1] - 4.0 / 3.0) <= 1e-12
    )
    ok = slope_ok and residual_ok and exact_ok
    report(
        6,
        ok,
        f"slopes {', '.join(f'{s:.2f}' for s in slopes)} vs thresholds 2.8/4.8/6.8, "
        "residuals <= 1e-10, pair weights match -1/3 and 4/3 to 1e-12",
        time.monotonic() - start,
        120.0,
    )


def test_criterion_07_step_bound_with_enumerated_mu():
    start = time.monotonic()
    spec = desk_chain()
    plan = build_plan(spec.n_groups, 2)
    eps = 0.25
    p0 = truncation_order(spec.n_sites, eps)
    alphas = {
        q: nested_commutator_sum(spec, q, "exact") for q in range(3, p0 + 1)
    }
    ceiling = mu_window_bound(
        spec.n_sites, 2, p0, spec.locality, spec.extensiveness
    )
    boundary = bch_time_condition(
        spec.n_sites, eps, plan.stage_factor, spec.locality, spec.extensiveness
    )
    violations = 0
    details = []
    for j in (1, 2):
        mspec = build_mpf(j)
        mu = mu_from_alphas(alphas, 2, mspec.m, p0)
        tau = 0.8 * min(boundary, mpf_time_condition(plan.stage_factor, mu.value))
        bound = step_error_bound(
            tau,
            mspec.norm_c_1,
            mspec.norm_k_1,
            plan.stage_factor,
            mu.value,
            mspec.m,
            eps,
            boundary,
        )
        measured = MPFEvaluator(mspec, plan, spec).error(tau)
        violations += not bound.admissible
        violations += measured > bound.value
        violations += mu.value > ceiling
        details.append(f"J={j} measured {measured:.1e} <= bound {bound.value:.1e}")
    report(
        7,
        violations == 0,
        "; ".join(details) + f", mu {mu.value:.2f} <= ceiling {ceiling:.0f}",
        time.monotonic() - start,
        300.0,
    )


def test_criterion_08_step_count_self_consistency():
    start = time.monotonic()
    cases = 0
    violations = 0
    for n, g, t, eps, k in itertools.product(
        (4, 16, 64, 256, 1024, 4096),
        (1.0, 6.5),
        (0.1, 1.0),
        (1e-2, 1e-3, 1e-4),
        (2, 3),
    ):
        mspec = matched_mpf_spec(n, g, t, eps)
        rep = build_report(n, k, g, 3, 2.0, mspec, t, eps)
        cases += 1
        consistent = self_consistency(rep)
        chain = admissibility_chain(rep)
        violations += not (consistent.holds and chain.holds)
    helper_cases = 0
    for a, m in itertools.product(
        (0.2, 0.05, 1e-3, 1e-6, 1e-9), range(1, 13)
    ):
        helper_cases += 1
        violations += not helper_inequality_check(a, m).holds
    report(
        8,
        violations == 0,
        f"{cases} step-count cases and {helper_cases} helper-inequality cases, "
        f"{violations} violations",
        time.monotonic() - start,
        60.0,
    )


def test_criterion_09_long_time_desk_simulation():
    start = time.monotonic()
    spec = desk_chain()
    plan = build_plan(spec.n_groups, 2)
    mspec = build_mpf(2)
    rep = report_from_parts(spec, plan, mspec, 1.0, 1e-3)
    error = MPFEvaluator(mspec, plan, spec).long_time_error(1.0, rep.r)
    report(
        9,
        error <= 1e-3,
        f"r = {rep.r}, measured long-time error {error:.2e} <= 1e-3",
        time.monotonic() - start,
        120.0,
    )


def test_criterion_10_scaling_exponents():
    start = time.monotonic()
    sizes = (64, 128, 256, 512)
    gs = [long_range_zz_chain(n, 0.5).extensiveness for n in sizes]
    g_slope = float(np.polyfit(np.log(sizes), np.log(gs), 1)[0])
    g_ok = abs(g_slope - 0.5) <= 0.1

    kwargs = dict(
        k=2, g=2.0, t=1.0, p=2, c_p=2.0, m=12, norm_c_1=5.0 / 3.0, norm_k_1=3.0
    )
    big = (1e14, 1e15, 1e16, 1e17)
    numbers = [trotter_number(n_sites=n, eps=1e-3, **kwargs) for n in big]
    dominated = all(tn.r1 >= tn.r2 for tn in numbers)
    r_slope = float(
        np.polyfit(np.log(big), np.log([tn.r for tn in numbers]), 1)[0]
    )
    r_ok = dominated and abs(r_slope - 1.0 / 3.0) <= 0.05

    spec = desk_chain()
    eps_grid = [10.0 ** (-2.0 - 0.5 * i) for i in range(13)]
    rs = []
    for eps in eps_grid:
        mspec = matched_mpf_spec(4, spec.extensiveness, 1.0, eps)
        rep = build_report(
            4, spec.locality, spec.extensiveness, 3, 2.0, mspec, 1.0, eps
        )
        rs.append(rep.r)
    log_inv = np.log([1.0 / e for e in eps_grid])
    log_r = np.log(rs)
    power = float(np.polyfit(log_inv, log_r, 1)[0])
    half = len(rs) // 2
    early = float(np.polyfit(log_inv[:half], log_r[:half], 1)[0])
    late = float(np.polyfit(log_inv[half:], log_r[half:], 1)[0])
    sub_poly = power <= 0.15 and late <= early + 0.02

    report(
        10,
        g_ok and r_ok and sub_poly,
        f"g slope {g_slope:.3f} within 0.1 of 0.5, step slope {r_slope:.3f} "
        f"within 0.05 of 1/3 (r1-dominated), eps power exponent {power:.3f} "
        "sub-polynomial",
        time.monotonic() - start,
        60.0,
    )
