"""Effective-generator series of a product formula.

A product-formula step is exactly ``exp(-i H_eff(tau) tau)`` with

    H_eff(tau) = H + sum_{q >= 2} Phi_q tau^{q-1}

and this module computes the operators ``Phi_q`` symbolically.  Each one is
assembled from the log of a product of exponentials: summing over
compositions ``(q_1..q_V)`` of q across the product's factors (leftmost
factor first) with weight ``prod_v alpha_v^{q_v} / q_v!``, of a fixed
permutation average

    phi_q(A_1..A_q) = (1/q^2) sum_{sigma} (-1)^{d_sigma} / C(q-1, d_sigma)
                      [A_{sigma(1)}, [A_{sigma(2)}, ... A_{sigma(q)}]]

where ``d_sigma`` counts adjacent descents, times an overall ``(-i)^{q-1}``.
Permutation weights are aggregated as exact fractions per argument sequence,
so sequences whose weights cancel exactly are never evaluated; the surviving
nested commutators are shared along common suffixes.

Orders ``q <= p`` vanish for an order-p plan, every ``Phi_q`` is Hermitian,
and the series truncated at order p0 reproduces the step unitary to
``3 N e^{-p0}`` accuracy inside the admissible time window.  Those are the
facts the verification helpers at the bottom measure.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from . import dense
from .commutators import nested_commutator_sum
from .hamiltonians import HamiltonianSpec
from .pauli import PauliSum
from .trotter import ProductFormulaPlan, TrotterEvaluator, loglog_slope

__all__ = [
    "compute_phi",
    "compute_phi_range",
    "phi_norm_bound",
    "phi_locality_bound",
    "phi_extensiveness_bound",
    "PhiReport",
    "phi_report",
    "effective_generator",
    "truncated_step_unitary",
    "truncation_defect",
    "TruncationCheck",
    "check_truncated_generator",
    "oracle_phi_from_logs",
]


@lru_cache(maxsize=16)
def _perm_weights(q: int) -> tuple[tuple[tuple[int, ...], Fraction], ...]:
    """All permutations of 0..q-1 with their exact descent weights."""
    out = []
    for sigma in itertools.permutations(range(q)):
        d = sum(1 for i in range(q - 1) if sigma[i] > sigma[i + 1])
        out.append((sigma, Fraction((-1) ** d, math.comb(q - 1, d))))
    return tuple(out)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def compute_phi(
    plan: ProductFormulaPlan,
    spec: HamiltonianSpec,
    q: int,
) -> PauliSum:
    """The order-q coefficient of the effective-generator series.

    ``q = 1`` returns the Hamiltonian itself (the stage fractions sum to one
    per group).  Cost grows roughly as ``V^q`` nested commutators with V the
    merged stage count, so keep q at desk scale (<= 6 or so).
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if plan.n_groups != spec.n_groups:
        raise ValueError("plan and spec disagree on the group count")
    slots = plan.merged_stages()[::-1]  # leftmost product factor first
    v_count = len(slots)
    group_of = [g for g, _ in slots]
    alpha_of = [a for _, a in slots]

    # aggregate the exact permutation weights per group sequence
    agg: dict[tuple[int, ...], float] = {}
    for comp in _compositions(q, v_count):
        comp_factor = 1.0
        positions: list[int] = []
        for v, q_v in enumerate(comp):
            if q_v:
                comp_factor *= alpha_of[v] ** q_v / math.factorial(q_v)
                positions.extend([group_of[v]] * q_v)
        local: dict[tuple[int, ...], Fraction] = {}
        for sigma, w in _perm_weights(q):
            key = tuple(positions[i] for i in sigma)
            local[key] = local.get(key, Fraction(0)) + w
        for key, fr in local.items():
            if fr:
                agg[key] = agg.get(key, 0.0) + float(fr) * comp_factor

    # evaluate the surviving nested commutators, sharing common suffixes
    acc: dict[tuple[int, int], complex] = {}
    stack: list[PauliSum | None] = [None] * q
    prev: tuple[int, ...] | None = None
    for seq in sorted(agg, key=lambda s: s[::-1]):
        weight = agg[seq]
        if abs(weight) < 1e-300:
            continue
        if prev is None:
            start = q - 1
        else:
            l = q
            while l > 0 and prev[l - 1] == seq[l - 1]:
                l -= 1
            start = l - 1
        for j in range(start, -1, -1):
            h = spec.group_sum(seq[j])
            stack[j] = h if j == q - 1 else h.commutator(stack[j + 1])
        prev = seq
        nest = stack[0]
        if nest:
            for key, c in nest.items():
                acc[key] = acc.get(key, 0.0) + weight * c

    overall = (-1j) ** (q - 1) / (q * q)
    return PauliSum(spec.n_sites, {k: overall * c for k, c in acc.items()})


def compute_phi_range(
    plan: ProductFormulaPlan,
    spec: HamiltonianSpec,
    q_max: int,
    q_min: int = 2,
) -> dict[int, PauliSum]:
    return {q: compute_phi(plan, spec, q) for q in range(q_min, q_max + 1)}


def phi_norm_bound(stage_factor: float, alpha_q: float, q: int) -> float:
    """Series-coefficient bound: (stage factor)^q alpha_q / q^2."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return stage_factor**q * alpha_q / (q * q)


def phi_locality_bound(q: int, k: int) -> int:
    """Nested commutators of q k-local factors act on at most q k sites."""
    return q * k


def phi_extensiveness_bound(
    q: int, stage_factor: float, k: int, g: float
) -> float:
    """Extensiveness ceiling ((q-1)!/q) (2 c k g)^{q-1} c g for c = stage factor."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return (
        math.factorial(q - 1)
        / q
        * (2.0 * stage_factor * k * g) ** (q - 1)
        * stage_factor
        * g
    )


@dataclass(frozen=True)
class PhiReport:
    """One series coefficient with its measured and bounded sizes."""

    q: int
    operator: PauliSum
    norm_exact: float | None
    norm_bound: float
    hermiticity_defect: float
    locality: int
    locality_bound: int
    extensiveness: float
    extensiveness_bound: float


def phi_report(
    plan: ProductFormulaPlan,
    spec: HamiltonianSpec,
    q: int,
    *,
    alpha_q: float | None = None,
    norm_mode: str = "exact",
    cap: int = dense.DEFAULT_DENSE_CAP,
) -> PhiReport:
    """Compute Phi_q together with every bound the tables need.

    ``alpha_q`` may be passed in when a commutator table is already built;
    otherwise it is enumerated here with the requested norm mode.
    """
    op = compute_phi(plan, spec, q)
    if alpha_q is None:
        alpha_q = nested_commutator_sum(spec, q, norm_mode, cap)
    norm_exact: float | None = None
    if norm_mode == "exact" and spec.n_sites <= cap:
        norm_exact = (
            dense.spectral_norm(dense.from_pauli_sum(op, cap)) if op else 0.0
        )
    return PhiReport(
        q=q,
        operator=op,
        norm_exact=norm_exact,
        norm_bound=phi_norm_bound(plan.stage_factor, alpha_q, q),
        hermiticity_defect=op.hermiticity_defect(),
        locality=op.locality(),
        locality_bound=phi_locality_bound(q, spec.locality),
        extensiveness=op.extensiveness(),
        extensiveness_bound=phi_extensiveness_bound(
            q, plan.stage_factor, spec.locality, spec.extensiveness
        ),
    )


# -- truncated effective generator ----------------------------------------


def effective_generator(
    plan: ProductFormulaPlan,
    spec: HamiltonianSpec,
    tau: float,
    p0: int,
    phis: dict[int, PauliSum] | None = None,
) -> PauliSum:
    """H + sum_{q=2}^{p0} Phi_q tau^{q-1}, the generator of one step."""
    if p0 < 1:
        raise ValueError("truncation order must be >= 1")
    gen = spec.full_sum()
    if phis is None:
        phis = compute_phi_range(plan, spec, p0)
    for q in range(2, p0 + 1):
        gen = gen + phis[q].scale(tau ** (q - 1))
    return gen


def truncated_step_unitary(
    plan: ProductFormulaPlan,
    spec: HamiltonianSpec,
    tau: float,
    p0: int,
    phis: dict[int, PauliSum] | None = None,
    cap: int = dense.DEFAULT_DENSE_CAP,
) -> np.ndarray:
    """exp(-i (H tau + sum Phi_q tau^q)) through the dense backend."""
    gen = effective_generator(plan, spec, tau, p0, phis)
    mat = dense.from_pauli_sum(gen, cap)
    # the series coefficients carry float-product noise; symmetrized check
    return dense.expm_minus_i(mat, tau, herm_tol=1e-8)


def truncation_defect(
    evaluator: TrotterEvaluator,
    phis: dict[int, PauliSum],
    tau: float,
    p0: int,
    cap: int = dense.DEFAULT_DENSE_CAP,
) -> float:
    """|| T(tau) - exp(-i H_eff^{(p0)}(tau) tau) || at one time argument."""
    u = evaluator.formula_unitary(tau)
    v = truncated_step_unitary(evaluator.plan, evaluator.spec, tau, p0, phis, cap)
    return dense.spectral_norm(u - v)


@dataclass(frozen=True)
class TruncationCheck:
    """Measured truncation defects at and below the admissible boundary."""

    p0: int
    epsilon: float
    tau_boundary: float
    taus: tuple[float, ...]
    defects: tuple[float, ...]
    passed: bool
    margin: float
    slope: float | None
    slope_points: int


def check_truncated_generator(
    plan: ProductFormulaPlan,
    spec: HamiltonianSpec,
    epsilon: float,
    p0: int,
    tau_boundary: float,
    *,
    subdivisions: Sequence[float] = (1.0, 0.5, 0.25),
    slope_grid: np.ndarray | None = None,
    cap: int = dense.DEFAULT_DENSE_CAP,
) -> TruncationCheck:
    """Verify the truncated series reproduces the step to epsilon.

    Measures the defect at ``tau_boundary`` scaled by each subdivision (all
    must come in below epsilon) and, when a slope grid is supplied, fits the
    defect's convergence order on it (expected about p0 + 1).
    """
    phis = compute_phi_range(plan, spec, p0)
    ev = TrotterEvaluator(spec, plan, cap)
    taus = tuple(tau_boundary * s for s in subdivisions)
    defects = tuple(truncation_defect(ev, phis, t, p0, cap) for t in taus)
    worst = max(defects)
    slope = None
    n_used = 0
    if slope_grid is not None:
        errs = np.array(
            [truncation_defect(ev, phis, t, p0, cap) for t in slope_grid]
        )
        slope, n_used = loglog_slope(np.asarray(slope_grid), errs)
    return TruncationCheck(
        p0=p0,
        epsilon=epsilon,
        tau_boundary=tau_boundary,
        taus=taus,
        defects=defects,
        passed=worst <= epsilon,
        margin=epsilon - worst,
        slope=slope,
        slope_points=n_used,
    )


def oracle_phi_from_logs(
    plan: ProductFormulaPlan,
    spec: HamiltonianSpec,
    max_order: int,
    taus: np.ndarray,
    cap: int = dense.DEFAULT_DENSE_CAP,
) -> list[PauliSum]:
    """Independent route to the series: polynomial fit of dense matrix logs.

    Samples ``log T(tau)`` on the given grid, fits orders ``1..max_order``,
    and converts ``C_q = -i Phi_q`` back to Hermitian Pauli sums.  Purely a
    cross-check; agreement with :func:`compute_phi` pins the sign and
    ordering conventions of the series.
    """
    ev = TrotterEvaluator(spec, plan, cap)
    unitaries = [ev.formula_unitary(t) for t in taus]
    mats = dense.log_series_fit(np.asarray(taus), unitaries, max_order)
    out = []
    for m in mats:
        out.append(dense.pauli_decompose(1j * m, spec.n_sites, tol=1e-12))
    return out
