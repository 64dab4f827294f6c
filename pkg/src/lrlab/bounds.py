"""Bound formulas built on the extracted constants and chain counts.

The series route evaluates M * sum_n (sqrt(2 h0 h1 K) t)^n / n! * c_n with the
exact chain coefficients, plus a certified tail: beyond the table the
coefficients are dominated by (sqrt(2) nu)^n, so the tail is a Taylor
remainder of e^{x} at x = sqrt(2) nu sqrt(2 h0 h1 K) t.  The closed form
sums that envelope in closed form and carries the familiar
exp(v (lambda/xi) ... t - lambda d) shape; it dominates the series term by
term, and minimizing over lambda recovers the velocity 2 (gamma/xi) e
sqrt(h0 h1 K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import minimize_scalar

from .chains import ChainCountTable
from .lattice import BoundConstants, ObservableConditions


@dataclass(frozen=True)
class BoundCurve:
    method: str
    d: int
    times: tuple
    values: tuple


def _series_rate(consts: BoundConstants) -> float:
    return math.sqrt(2.0 * consts.h0 * consts.h1 * consts.K)


def _tail_remainder(x: float, n_last: int) -> float:
    """Upper bound on sum_{n > n_last} x^n / n! via the geometric majorant."""
    if x == 0.0:
        return 0.0
    ratio = x / (n_last + 2)
    if ratio >= 1.0:
        return math.inf
    term = 1.0
    for n in range(1, n_last + 2):
        term *= x / n
    return term / (1.0 - ratio)


def series_terms_needed(consts: BoundConstants, t: float, tol: float) -> int:
    """Smallest order N whose certified tail drops below `tol`."""
    x_env = consts.gamma * _series_rate(consts) * abs(t)
    n = 0
    while consts.M * _tail_remainder(x_env, n) >= tol:
        n += 1
        if n > 10_000:
            raise ValueError("series tail does not certify; tolerance too tight")
    return n


def series_bound(
    consts: BoundConstants,
    table: ChainCountTable,
    t: float,
    tol: float = 1e-9,
) -> float:
    """Exact-coefficient partial sum plus the certified envelope tail.

    Raises if the table is too short for the requested tolerance at this t,
    naming the order that would be needed.
    """
    n_needed = series_terms_needed(consts, t, tol)
    if n_needed > table.n_max:
        raise ValueError(
            f"chain table covers orders <= {table.n_max}; tolerance {tol} at "
            f"t = {t} needs orders through n = {n_needed}"
        )
    rate = _series_rate(consts)
    x_env = consts.gamma * rate * abs(t)
    total = 0.0
    term = 1.0  # rate^n t^n / n!
    for n in range(n_needed + 1):
        if n > 0:
            term *= rate * abs(t) / n
        total += term * table.counts[n]
    return consts.M * (total + _tail_remainder(x_env, n_needed))


def closed_form_bound(
    consts: BoundConstants, t: float, d: int, lam: float | None = None
) -> float:
    """Mtildetilde * exp(2 sqrt(h0 h1 K) gamma e^{lam/xi} t - lam d)."""
    lam = consts.lam if lam is None else lam
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    rate = 2.0 * math.sqrt(consts.h0 * consts.h1 * consts.K) * consts.gamma
    exponent = rate * math.exp(lam / consts.xi) * abs(t) - lam * d
    return consts.Mtildetilde * math.exp(exponent)


def lr_velocity(consts: BoundConstants) -> float:
    return 2.0 * (consts.gamma / consts.xi) * math.e * math.sqrt(
        consts.h0 * consts.h1 * consts.K
    )


def optimize_lambda(consts: BoundConstants) -> tuple:
    """Minimize the slope e^{lam/xi}/lam of the closed form over lam > 0.

    Returns (lam_star, v_min); analytically lam_star = xi and v_min equals
    lr_velocity, so this doubles as a consistency check on the rate algebra.
    """
    xi = consts.xi

    def slope(lam: float) -> float:
        return math.exp(lam / xi) / lam

    res = minimize_scalar(
        slope,
        bounds=(xi * 1e-3, xi * 1e3),
        method="bounded",
        options={"xatol": xi * 1e-9},
    )
    lam_star = float(res.x)
    v_min = 2.0 * consts.gamma * math.sqrt(
        consts.h0 * consts.h1 * consts.K
    ) * slope(lam_star)
    return lam_star, v_min


def observable_bound(
    consts: BoundConstants,
    conditions: ObservableConditions,
    t: float,
    lam: float | None = None,
) -> float:
    """F_P F_Q n_P (n_P + 1) times the closed form at the pair's separation."""
    pref = conditions.F_P * conditions.F_Q * conditions.n_P * (conditions.n_P + 1)
    return pref * closed_form_bound(consts, t, conditions.d, lam=lam)


def bounded_reference_bound(
    consts: BoundConstants,
    op_norm: float,
    oq_norm: float,
    n_p: int,
    t: float,
    d: int,
    lam: float | None = None,
) -> float:
    """Norm-based reference bound for bounded terms; no K under the square root.

    The prefactor carries ||O_P|| ||O_Q||, so on truncated bosonic models it
    grows with the truncation while the commutator-based route stays put.
    """
    lam = consts.lam if lam is None else lam
    if lam <= 0.0:
        raise ValueError(f"lambda must be positive, got {lam}")
    rate = 2.0 * math.sqrt(consts.h0 * consts.h1) * consts.gamma
    exponent = rate * math.exp(lam / consts.xi) * abs(t) - lam * d
    return op_norm * oq_norm * n_p * consts.Mtildetilde * math.exp(exponent)


def bounded_term_check(model, consts: BoundConstants | None = None) -> dict:
    """For models with bounded terms, Ktilde = max_a h_a max_i ||Phi_a^i||
    controls the commutator constants: K <= 2 Ktilde^2 and Q <= 4 Ktilde^3.
    Returns the three constants and whether both inequalities hold."""
    from .lattice import compute_bound_constants
    from .operators import spectral_norm

    if consts is None:
        consts = compute_bound_constants(model)
    ktilde = max(
        model.coupling(t.family) * spectral_norm(t.payload) for t in model.terms
    )
    slack = 1e-9 * max(1.0, ktilde) ** 3
    ok = (consts.K <= 2.0 * ktilde**2 + slack) and (
        consts.Q <= 4.0 * ktilde**3 + slack
    )
    return {"Ktilde": ktilde, "K": consts.K, "Q": consts.Q, "ok": ok}


def bound_curve(values_fn, method: str, d: int, times) -> BoundCurve:
    ts = tuple(float(t) for t in times)
    return BoundCurve(
        method=method, d=d, times=ts, values=tuple(values_fn(t) for t in ts)
    )
