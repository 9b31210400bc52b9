"""Nested-commutator sums, their closed-form bounds, and the window constant.

The central quantity is the order-q commutator sum of a grouped Hamiltonian,

    alpha_q = sum over (g_1..g_q) of || [H_{g_q}, ... [H_{g_2}, H_{g_1}]] ||

with the rightmost pair innermost.  It is enumerated exactly by depth-first
search over group tuples with the partial nests shared along prefixes and
zero branches pruned.  Two closed forms dominate it: the factorial/locality
form  (q-1)! (2 k g)^{q-1} N g  and the crude power form  (2 L)^q  with L the
total one-norm.  An observable can be spliced into the nest at any depth;
the corresponding sum is bounded by  q! (2 k g)^q ||O||.

On top of the alpha table sits the step-size constant mu: a supremum over
composition sums of alpha values whose (q+n-1)-th root controls how far the
multi-product step can be pushed.  Enumeration is windowed in the part count
n; the result records its witness and whether the window was wide enough.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping

from . import dense
from .hamiltonians import HamiltonianSpec
from .pauli import PauliSum

__all__ = [
    "DEFAULT_TUPLE_BUDGET",
    "nested_commutator_sum",
    "factorial_commutator_bound",
    "power_commutator_bound",
    "CommutatorTable",
    "build_commutator_table",
    "inserted_commutator_sum",
    "insertion_bound",
    "MuResult",
    "mu_from_alphas",
    "mu_window_bound",
]

DEFAULT_TUPLE_BUDGET = 10**6


def _sum_norm(
    s: PauliSum, mode: str, cap: int
) -> float:
    if mode == "one-norm":
        return s.one_norm()
    if mode == "exact":
        if not s:
            return 0.0
        return dense.spectral_norm(dense.from_pauli_sum(s, cap))
    raise ValueError(f"unknown norm mode {mode!r} (use 'exact' or 'one-norm')")


def nested_commutator_sum(
    spec: HamiltonianSpec,
    q: int,
    mode: str = "exact",
    cap: int = dense.DEFAULT_DENSE_CAP,
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> float:
    """Exact enumeration of the order-q commutator sum.

    ``mode="exact"`` measures spectral norms through the dense backend;
    ``mode="one-norm"`` replaces every norm by the coefficient one-norm of
    the same symbolically exact nest (an upper bound, no dense work).

    Cost grows as n_groups^q tuples; a budget guard refuses runaway calls.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    n_groups = spec.n_groups
    if n_groups**q > budget:
        raise ValueError(
            f"{n_groups}^{q} tuples exceed the budget {budget}; "
            "raise it explicitly for big enumerations"
        )
    if mode == "exact":
        dense.check_dense_cap(spec.n_sites, cap)
    sums = spec.group_sums
    if q == 1:
        return sum(_sum_norm(s, mode, cap) for s in sums)

    total = 0.0

    def descend(depth: int, nest: PauliSum) -> None:
        nonlocal total
        if depth == q:
            for h in sums:
                final = h.commutator(nest)
                if final:
                    total += _sum_norm(final, mode, cap)
            return
        for h in sums:
            nxt = h.commutator(nest)
            if nxt:
                descend(depth + 1, nxt)

    for first in sums:
        descend(2, first)
    return total


def factorial_commutator_bound(q: int, k: int, g: float, n_sites: int) -> float:
    """Closed form (q-1)! (2 k g)^{q-1} N g for k-local, g-extensive input."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return math.factorial(q - 1) * (2.0 * k * g) ** (q - 1) * n_sites * g


def power_commutator_bound(q: int, total_one_norm: float) -> float:
    """Crude bound (2 L)^q with L the summed absolute term weights."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return (2.0 * total_one_norm) ** q


@dataclass(frozen=True)
class CommutatorTable:
    """alpha_q values and bounds for a contiguous range of orders."""

    q_values: tuple[int, ...]
    alpha_exact: tuple[float | None, ...]
    alpha_one_norm: tuple[float, ...]
    factorial_bound: tuple[float, ...]
    power_bound: tuple[float, ...]
    locality: int
    extensiveness: float
    n_sites: int
    total_one_norm: float

    def alpha(self, q: int, source: str = "exact") -> float:
        """Look up one α value by order and source column."""
        try:
            i = self.q_values.index(q)
        except ValueError:
            raise KeyError(f"q={q} not tabulated (have {self.q_values})") from None
        col = {
            "exact": self.alpha_exact,
            "one-norm": self.alpha_one_norm,
            "factorial": self.factorial_bound,
            "power": self.power_bound,
        }.get(source)
        if col is None:
            raise ValueError(f"unknown source {source!r}")
        val = col[i]
        if val is None:
            raise ValueError(f"alpha(q={q}) not computed for source {source!r}")
        return val

    def as_mapping(self, source: str = "exact") -> dict[int, float]:
        return {q: self.alpha(q, source) for q in self.q_values}


def build_commutator_table(
    spec: HamiltonianSpec,
    q_max: int,
    q_min: int = 2,
    *,
    with_exact: bool = True,
    cap: int = dense.DEFAULT_DENSE_CAP,
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> CommutatorTable:
    """Tabulate alpha_q for q in [q_min, q_max] with both norm modes.

    Set ``with_exact=False`` to skip the dense spectral norms (the one-norm
    column and closed-form bounds are always present).
    """
    if not 1 <= q_min <= q_max:
        raise ValueError("need 1 <= q_min <= q_max")
    qs = tuple(range(q_min, q_max + 1))
    exact: list[float | None] = []
    one_norm: list[float] = []
    for q in qs:
        one_norm.append(nested_commutator_sum(spec, q, "one-norm", cap, budget))
        exact.append(
            nested_commutator_sum(spec, q, "exact", cap, budget)
            if with_exact
            else None
        )
    return CommutatorTable(
        q_values=qs,
        alpha_exact=tuple(exact),
        alpha_one_norm=tuple(one_norm),
        factorial_bound=tuple(
            factorial_commutator_bound(q, spec.locality, spec.extensiveness, spec.n_sites)
            for q in qs
        ),
        power_bound=tuple(
            power_commutator_bound(q, spec.total_one_norm) for q in qs
        ),
        locality=spec.locality,
        extensiveness=spec.extensiveness,
        n_sites=spec.n_sites,
        total_one_norm=spec.total_one_norm,
    )


def inserted_commutator_sum(
    spec: HamiltonianSpec,
    observable: PauliSum,
    q: int,
    insert_after: int,
    mode: str = "exact",
    cap: int = dense.DEFAULT_DENSE_CAP,
    budget: int = DEFAULT_TUPLE_BUDGET,
) -> float:
    """Commutator sum with an observable spliced into the nest.

    ``insert_after = j`` (1 <= j <= q) places the observable outside the
    innermost j group factors:

        j = q:  sum || [O, [H_{g_q}, ... [H_{g_2}, H_{g_1}]]] ||
        j = 1:  sum || [H_{g_q}, ... [H_{g_2}, [O, H_{g_1}]]] ||

    Every position obeys the same  q! (2 k g)^q ||O||  bound.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if not 1 <= insert_after <= q:
        raise ValueError(f"insert_after must be in 1..{q}")
    if observable.n_sites != spec.n_sites:
        raise ValueError("observable site count differs from spec")
    n_groups = spec.n_groups
    if n_groups**q > budget:
        raise ValueError(
            f"{n_groups}^{q} tuples exceed the budget {budget}"
        )
    if mode == "exact":
        dense.check_dense_cap(spec.n_sites, cap)
    sums = spec.group_sums

    total = 0.0

    def descend(depth: int, nest: PauliSum) -> None:
        # depth counts how many group factors have been consumed so far
        nonlocal total
        current = nest
        if depth == insert_after:
            current = observable.commutator(current)
            if not current:
                return
        if depth == q:
            total += _sum_norm(current, mode, cap)
            return
        for h in sums:
            nxt = h.commutator(current)
            if nxt:
                descend(depth + 1, nxt)

    for first in sums:
        descend(1, first)
    return total


def insertion_bound(q: int, k: int, g: float, observable_norm: float) -> float:
    """Closed form q! (2 k g)^q ||O|| for the spliced commutator sum."""
    if q < 1:
        raise ValueError("q must be >= 1")
    return math.factorial(q) * (2.0 * k * g) ** q * observable_norm


# -- the window constant mu ------------------------------------------------


@dataclass(frozen=True)
class MuResult:
    """Windowed supremum defining the admissible-step constant.

    ``witness`` is the (q, n) pair attaining the supremum (lexicographically
    smallest among ties), ``best_per_n`` the per-part-count maxima, and
    ``converged`` whether the witness sat strictly inside the n window with
    the edge values already decreasing.
    """

    value: float
    witness: tuple[int, int] | None
    converged: bool
    n_max: int
    best_per_n: tuple[float, ...]
    source: str


def _composition_sums(
    alphas: Mapping[int, float], n: int, lo: int, hi: int
) -> dict[int, float]:
    """sum over (q_1..q_n), lo <= q_i <= hi, of prod alpha_{q_i}, keyed by total."""
    current = {0: 1.0}
    for _ in range(n):
        nxt: dict[int, float] = {}
        for s, w in current.items():
            for v in range(lo, hi + 1):
                a = alphas.get(v)
                if a is None:
                    raise KeyError(f"alpha({v}) missing from the table")
                if a == 0.0:
                    continue
                nxt[s + v] = nxt.get(s + v, 0.0) + w * a
        current = nxt
    return current


def mu_from_alphas(
    alphas: Mapping[int, float],
    p: int,
    m: int,
    p0: int,
    n_max: int = 8,
    source: str = "exact",
) -> MuResult:
    """Enumerate the windowed supremum over (q, n) candidates.

    Candidates are ``(sum over compositions of q+n-1 into n parts from
    [p+1, p0] of the alpha product) ** (1/(q+n-1))`` for q >= m+1 and
    n >= 1; parts constrain q to [n p + 1, n (p0 - 1) + 1].  The alphas
    mapping must cover [p+1, p0].
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if p0 < p + 1:
        raise ValueError("p0 must be at least p+1")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    lo, hi = p + 1, p0
    best: float = 0.0
    witness: tuple[int, int] | None = None
    best_per_n: list[float] = []
    candidates: list[tuple[float, int, int]] = []
    for n in range(1, n_max + 1):
        by_total = _composition_sums(alphas, n, lo, hi)
        n_best = 0.0
        q_lo = max(m + 1, n * p + 1)
        q_hi = n * (p0 - 1) + 1
        for q in range(q_lo, q_hi + 1):
            s = by_total.get(q + n - 1, 0.0)
            if s <= 0.0:
                continue
            val = s ** (1.0 / (q + n - 1))
            candidates.append((val, q, n))
            n_best = max(n_best, val)
        best_per_n.append(n_best)
    if candidates:
        best = max(v for v, _, _ in candidates)
        ties = [
            (q, n) for v, q, n in candidates if v >= best * (1.0 - 1e-12)
        ]
        witness = min(ties)
    if witness is None:
        converged = True
    else:
        inside = witness[1] <= n_max - 2
        tail_flat = (
            n_max >= 3
            and best_per_n[-1] <= best_per_n[-2] * (1.0 + 1e-12)
            and best_per_n[-2] <= best_per_n[-3] * (1.0 + 1e-12)
        )
        converged = inside and tail_flat
    return MuResult(
        value=best,
        witness=witness,
        converged=converged,
        n_max=n_max,
        best_per_n=tuple(best_per_n),
        source=source,
    )


def mu_window_bound(n_sites: int, p: int, p0: int, k: int, g: float) -> float:
    """Closed-form ceiling 4 max((p+1) N^{1/(p+1)}, e^3 p0) k g."""
    if p < 1 or p0 < p + 1:
        raise ValueError("need p >= 1 and p0 >= p+1")
    return (
        4.0
        * max((p + 1) * n_sites ** (1.0 / (p + 1)), math.e**3 * p0)
        * k
        * g
    )
