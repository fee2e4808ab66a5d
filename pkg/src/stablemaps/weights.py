"""Non-generic weight sequences and the two-type offspring laws they induce.

A weight sequence q = (q_k) assigns multiplicative weight q_{deg/2} to each
face of a bipartite map.  Everything downstream (tree samplers, bijections,
scaling constants) is driven by three derived quantities:

* ``z_q``     smallest fixed point of g(x) = 1 + sum_k C(2k-1, k-1) q_k x^k,
* ``s_q``     amplitude of the alpha-stable singular part of g at z_q,
* the offspring laws ``mu_circ`` (geometric) and ``mu_bullet`` of the
  alternating two-type branching process.

Series evaluation is exact head-sum plus a certified tail: the Kazakov
family telescopes in closed form, tuned families use a Hurwitz-zeta
estimate of the algebraic tail, and custom tables are finite polynomials.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln, zeta

__all__ = [
    "WeightSequence",
    "TwoTypeOffspring",
    "GqValue",
    "WeightError",
    "NotAdmissibleError",
    "SeriesDomainError",
    "kazakov_weights",
    "tune_base_sequence",
    "custom_weights",
    "custom_offspring",
    "eval_gq",
    "eval_gq_prime",
    "solve_zq",
    "offspring_laws",
    "grandchild_law",
    "weights_to_text",
    "weights_from_text",
]

_SQRT_PI = math.sqrt(math.pi)
_HEAD_TERMS = 1 << 21  # head length for slowly-decaying tuned series


class WeightError(ValueError):
    pass


class NotAdmissibleError(WeightError):
    pass


class SeriesDomainError(WeightError):
    pass


@dataclass(frozen=True)
class GqValue:
    """Partial sum of g (or g') together with a certified tail bound."""

    value: float
    tail_bound: float
    terms: int

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Immutable weight sequence with derived constants.

    ``q(k)`` evaluates weights for any k: closed formulas for the kazakov
    and tuned families, table lookup (zero beyond ``k_max``) for custom
    sequences.  ``log_coeff(k)`` returns log of the series coefficient
    b_k = C(2k-1, k-1) q_k.
    """

    alpha: float
    family: str  # "kazakov" | "tuned" | "custom"
    z_q: float
    s_q: float | None
    k_max: int
    _log_q_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    tuned_params: tuple[float, float] | None = None  # (C, beta)

    def q(self, k) -> np.ndarray:
        k = np.atleast_1d(np.asarray(k, dtype=np.int64))
        if np.any(k < 1):
            raise WeightError("weights are indexed from k = 1")
        with np.errstate(over="ignore"):
            out = np.exp(self._log_q_fn(k))
        return out

    def log_q(self, k: np.ndarray) -> np.ndarray:
        return self._log_q_fn(np.asarray(k, dtype=np.int64))

    def log_coeff(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        kf = k.astype(np.float64)
        logbinom = gammaln(2 * kf) - gammaln(kf) - gammaln(kf + 1)
        return logbinom + self._log_q_fn(k)


# ---------------------------------------------------------------------------
# families


def _kazakov_log_q(alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    log_gamma_neg_alpha = math.log(math.gamma(-alpha))  # positive on (1,2)

    def log_q(k: np.ndarray) -> np.ndarray:
        kf = k.astype(np.float64)
        out = (math.log(2.0) - kf * math.log(4.0 * alpha)
               + 0.5 * math.log(math.pi)
               - gammaln(kf + 0.5) + gammaln(np.maximum(kf, 2.0) - alpha)
               - log_gamma_neg_alpha)
        return np.where(k >= 2, out, -np.inf)

    return log_q


def kazakov_weights(alpha: float, k_max: int = 100_000) -> WeightSequence:
    """Explicit one-parameter family with q_k ~ (4 alpha)^{-k} k^{-alpha-1/2}.

    The generating function is g(x) = x + (1 - x/alpha)^alpha, so the fixed
    point is exactly alpha and the sequence is critical.  ``z_q`` is still
    produced by the generic solver as a cross-check.
    """
    if not (1.0 < alpha < 2.0):
        raise WeightError(f"alpha must lie in (1, 2), got {alpha}")
    w = WeightSequence(alpha=alpha, family="kazakov", z_q=alpha,
                       s_q=2.0 ** alpha, k_max=k_max,
                       _log_q_fn=_kazakov_log_q(alpha))
    z = solve_zq(w)
    object.__setattr__(w, "z_q", z)
    return w


def _binom_quarter_log(k: np.ndarray) -> np.ndarray:
    # log of C(2k-1, k-1) 4^{-k} = Gamma(k+1/2) / (2 sqrt(pi) Gamma(k+1))
    kf = k.astype(np.float64)
    return gammaln(kf + 0.5) - gammaln(kf + 1.0) - math.log(2.0 * _SQRT_PI)


def _sum_base_series(q_base: Callable[[np.ndarray], np.ndarray],
                     alpha: float, derivative: bool) -> float:
    """sum_k C(2k-1,k-1) 4^{-k} q0_k (optionally times k), zeta-corrected.

    Requires q0_k ~ const * k^{-alpha-1/2}; the tail beyond the head sum is
    estimated by fitting that amplitude on the last computed block.
    """
    total = 0.0
    chunk = 1 << 17
    k_hi = 0
    last_block = None
    while k_hi < _HEAD_TERMS:
        k = np.arange(k_hi + 1, min(k_hi + chunk, _HEAD_TERMS) + 1)
        vals = np.exp(_binom_quarter_log(k)) * np.asarray(q_base(k), dtype=np.float64)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise WeightError("base sequence must be nonnegative and finite")
        if derivative:
            vals = vals * k
        total += float(vals.sum())
        k_hi = int(k[-1])
        last_block = (k, vals)
    k, vals = last_block
    s = (alpha + 1.0) - (1.0 if derivative else 0.0)
    tail_k = k[-256:]
    amps = vals[-256:] * tail_k.astype(np.float64) ** s
    amp = float(np.median(amps))
    if amp <= 0 or not np.isfinite(amp):
        raise WeightError("base series does not have the required k^{-alpha-1/2} tail")
    if float(np.max(amps) - np.min(amps)) > 0.05 * amp:
        raise WeightError("base series tail is not regular enough to certify the sum")
    total += amp * float(zeta(s, k_hi + 1))
    return total


def tune_base_sequence(q_base: Callable[[np.ndarray], np.ndarray] | np.ndarray,
                       alpha: float, k_max: int = 100_000) -> WeightSequence:
    """Tune a base sequence q0_k ~ k^{-alpha-1/2} into a critical one.

    Returns q_k = C (beta/4)^{k-1} q0_k where C and beta are the unique
    constants making the sequence admissible, critical and non-generic of
    exponent alpha; then z_q = 1/beta.
    """
    if not (1.0 < alpha < 2.0):
        raise WeightError(f"alpha must lie in (1, 2), got {alpha}")
    if isinstance(q_base, np.ndarray):
        table = np.asarray(q_base, dtype=np.float64)

        def q_fn(k: np.ndarray) -> np.ndarray:
            out = np.zeros(len(k))
            ok = k <= len(table)
            out[ok] = table[k[ok] - 1]
            return out

        q_base = q_fn
    probe = np.asarray(q_base(np.arange(1, 1025)), dtype=np.float64)
    if np.all(probe == 0.0):
        raise WeightError("base sequence is identically zero")
    g0 = 1.0 + _sum_base_series(q_base, alpha, derivative=False)
    gp0 = 4.0 * _sum_base_series(q_base, alpha, derivative=True)
    big_c = 1.0 / gp0
    beta = 1.0 - 4.0 * (g0 - 1.0) / gp0
    if not (0.0 < beta < 1.0):
        raise WeightError(f"tuning produced beta = {beta} outside (0, 1)")
    s_q = 2.0 ** (alpha + 1.0) * big_c * math.gamma(-alpha) / (beta * _SQRT_PI)
    log_c, log_beta4 = math.log(big_c), math.log(beta / 4.0)

    def log_q(k: np.ndarray) -> np.ndarray:
        base = np.asarray(q_base(k), dtype=np.float64)
        with np.errstate(divide="ignore"):
            return log_c + (k - 1) * log_beta4 + np.log(base)

    return WeightSequence(alpha=alpha, family="tuned", z_q=1.0 / beta,
                          s_q=s_q, k_max=k_max, _log_q_fn=log_q,
                          tuned_params=(big_c, beta))


def custom_weights(q_table, alpha: float | None = None,
                   s_q: float | None = None) -> WeightSequence:
    """Finite user table q_1..q_K; q_k = 0 beyond the table.

    ``s_q`` must be supplied by the caller when needed (there is no stable
    numeric recipe to extract it from an arbitrary table).
    """
    table = np.asarray(q_table, dtype=np.float64)
    if table.ndim != 1 or len(table) == 0:
        raise WeightError("q table must be a nonempty 1-d array")
    if np.any(table < 0) or not np.any(table > 0):
        raise WeightError("weights must be nonnegative with at least one positive entry")

    def log_q(k: np.ndarray) -> np.ndarray:
        out = np.full(len(k), -np.inf)
        ok = k <= len(table)
        with np.errstate(divide="ignore"):
            out[ok] = np.log(table[k[ok] - 1])
        return out

    w = WeightSequence(alpha=alpha if alpha is not None else float("nan"),
                       family="custom", z_q=float("nan"), s_q=s_q,
                       k_max=len(table), _log_q_fn=log_q)
    z = solve_zq(w)
    object.__setattr__(w, "z_q", z)
    return w


# ---------------------------------------------------------------------------
# series evaluation


def _kazakov_tail(w: WeightSequence, big_k: int, derivative: bool) -> float:
    # telescoped closed form of sum_{k > K} b_k z^k (or k b_k z^{k-1})
    a, z = w.alpha, w.z_q
    lg = gammaln(big_k + 1.0 - a) - math.log(math.gamma(-a))
    if derivative:
        return math.exp(lg - gammaln(float(big_k))) / ((a - 1.0) * z)
    return math.exp(lg - gammaln(big_k + 1.0)) / a


def _upper_gamma(a: float, x: float) -> float:
    # upper incomplete Gamma(a, x) for possibly negative non-integer a
    from scipy.special import gammaincc
    if a > 0:
        return math.gamma(a) * float(gammaincc(a, x))
    # Gamma(a, x) = (Gamma(a+1, x) - x^a e^{-x}) / a
    return (_upper_gamma(a + 1.0, x) - x ** a * math.exp(-x)) / a


def _algebraic_exp_tail(s: float, lam: float, start: float) -> float:
    # integral_{start}^inf t^{-s} e^{-lam t} dt, s > 1, lam >= 0
    if lam <= 0.0:
        return start ** (1.0 - s) / (s - 1.0)
    return lam ** (s - 1.0) * _upper_gamma(1.0 - s, lam * start)


def _near_radius_tail(w: WeightSequence, big_k: int, rho: float,
                      derivative: bool, amp: float | None) -> float:
    """Estimate of sum_{k > K} (coefficient tail) rho^k, rho close to 1.

    The summand is asymptotically amp * k^{-s} rho^k; the midpoint
    Euler-Maclaurin integral has a closed form through the upper
    incomplete gamma function, and the first 1/k correction of the
    coefficient ratio is included, leaving an O(K^{-2}) relative error.
    """
    a, z = w.alpha, w.z_q
    lam = -math.log(rho) if rho < 1.0 else 0.0
    start = big_k + 0.5
    if w.family == "kazakov":
        s = (a + 1.0) - (1.0 if derivative else 0.0)
        amp = 1.0 / math.gamma(-a) / (z if derivative else 1.0)
        # Gamma(t-a)/Gamma(t+1) = t^{-a-1} (1 + a(a+1)/(2t) + O(t^-2))
        corr = a * (a + 1.0) / 2.0 if not derivative else (a - 1.0) * a / 2.0
    else:
        s = (a + 1.0) - (1.0 if derivative else 0.0)
        corr = 0.0  # folded into the fitted amplitude
    return amp * (_algebraic_exp_tail(s, lam, start)
                  + corr * _algebraic_exp_tail(s + 1.0, lam, start))


def _coeff_cache(w: WeightSequence, big_k: int) -> np.ndarray:
    cache = getattr(w, "_coeffs", None)
    if cache is None or len(cache) < big_k:
        k = np.arange(1, big_k + 1)
        cache = w.log_coeff(k)
        object.__setattr__(w, "_coeffs", cache)
    return cache[:big_k]


def _eval_series(w: WeightSequence, x: float, derivative: bool) -> GqValue:
    if x < 0:
        raise SeriesDomainError("series defined for x >= 0")
    if x == 0.0:
        return GqValue(0.0 if derivative else 1.0, 0.0, 0)

    if w.family == "custom":
        k = np.arange(1, w.k_max + 1)
        logs = _coeff_cache(w, w.k_max) + (k - 1 if derivative else k) * math.log(x)
        vals = np.exp(logs)
        if derivative:
            vals = vals * k
        return GqValue(float(vals.sum()) + (0.0 if derivative else 1.0), 0.0, w.k_max)

    z = w.z_q
    rho = x / z
    if rho > 1.0 + 1e-9:
        raise SeriesDomainError(
            f"x = {x} lies beyond the radius of convergence z_q = {z}")
    rho = min(rho, 1.0)

    big_k = max(w.k_max, 4096)
    k = np.arange(1, big_k + 1)
    logs = _coeff_cache(w, big_k) + (k - 1 if derivative else k) * math.log(x)
    with np.errstate(invalid="ignore"):
        vals = np.exp(logs)
    if derivative:
        vals = vals * k
    head = float(np.nansum(vals))

    if w.family == "kazakov":
        tail_at_z = _kazakov_tail(w, big_k, derivative)
        if rho == 1.0:
            head += tail_at_z
            bound = 1e-15 * abs(head)
        elif rho > 0.999:
            head += _near_radius_tail(w, big_k, rho, derivative, None)
            bound = 1e-12 * tail_at_z
        else:
            bound = tail_at_z * rho ** (big_k + 1)
    else:  # tuned: algebraic tail, amplitude fitted on the last block
        s = (w.alpha + 1.0) - (1.0 if derivative else 0.0)
        amps = vals[-256:] * k[-256:].astype(np.float64) ** s
        amp = float(np.median(amps))
        if rho == 1.0:
            head += amp * float(zeta(s, big_k + 1))
            bound = 2.0 * abs(amp) * float(zeta(s + 1.0, big_k + 1)) / 8.0
        elif rho > 0.999:
            head += _near_radius_tail(w, big_k, rho, derivative, amp)
            bound = 2.0 * abs(amp) * float(zeta(s + 1.0, big_k + 1)) / 8.0
        else:
            t_last = float(vals[-1])
            bound = t_last * rho / max(1.0 - rho, 1e-300)
    value = head + (0.0 if derivative else 1.0)
    return GqValue(value, bound, big_k)


def eval_gq(w: WeightSequence, x: float) -> GqValue:
    """g(x) = 1 + sum_k C(2k-1, k-1) q_k x^k with a certified tail bound."""
    return _eval_series(w, x, derivative=False)


def eval_gq_prime(w: WeightSequence, x: float) -> GqValue:
    """Derivative g'(x), same tail handling as :func:`eval_gq`."""
    return _eval_series(w, x, derivative=True)


def solve_zq(w: WeightSequence, rel_tol: float = 1e-12,
             touch_tol: float = 1e-8) -> float:
    """Smallest fixed point of g, or raise :class:`NotAdmissibleError`.

    h(x) = g(x) - x is convex with h(0) = 1, so the smallest fixed point is
    either a strict crossing (subcritical: bisection between 0 and the
    argmin of h) or a tangency at the argmin (critical).  The argmin is
    found by bisecting the increasing function g' - 1; for the closed
    families, x beyond the radius of convergence counts as g' = +inf.
    """

    def h(x: float) -> float:
        return eval_gq(w, x).value - x

    def slope_above_one(x: float) -> bool:
        try:
            return eval_gq_prime(w, x).value >= 1.0
        except SeriesDomainError:
            return True

    # bracket the argmin of h by doubling until g' >= 1 (or give up)
    hi = 1.0
    doublings = 0
    while not slope_above_one(hi) and doublings <= 40:
        hi *= 2.0
        doublings += 1

    if doublings > 40:
        # g' < 1 everywhere reached: h is decreasing, look for a plain crossing
        lo, hi = 0.0, 1.0
        doublings = 0
        while h(hi) > 0 and doublings <= 40:
            lo, hi = hi, hi * 2.0
            doublings += 1
        if doublings > 40:
            raise NotAdmissibleError("g(x) > x up to 2^40: sequence is not admissible")
        return _bisect_root(h, lo, hi, rel_tol)

    lo = 0.0
    while hi - lo > rel_tol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if slope_above_one(mid):
            hi = mid
        else:
            lo = mid
    x_min = 0.5 * (lo + hi)

    h_min = h(x_min)
    if h_min < -touch_tol * max(1.0, x_min):
        return _bisect_root(h, 0.0, x_min, rel_tol)  # subcritical crossing
    if h_min <= touch_tol * max(1.0, x_min):
        return x_min  # tangency: critical sequence
    raise NotAdmissibleError(
        f"min of g(x) - x is {h_min} > 0: sequence is not admissible")


def _bisect_root(h, lo: float, hi: float, rel_tol: float) -> float:
    while hi - lo > rel_tol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if h(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# offspring laws


@dataclass(eq=False)
class TwoTypeOffspring:
    """Offspring laws of the alternating two-type branching process.

    White vertices have a geometric number of black children,
    mu_circ(k) = z^{-1} (1 - z^{-1})^k; black vertices have mu_bullet(k)
    proportional to z^{k+1} C(2k+1, k) q_{k+1}.  ``mu_grand`` caches the
    law of the number of white grandchildren (see :func:`grandchild_law`).
    """

    z: float
    alpha: float
    mu_bullet: np.ndarray
    mu_bullet_hat: np.ndarray
    m_circ: float
    m_bullet: float
    truncation_mass: float
    truncation_warning: bool
    mu_grand: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def mu_circ(self, k) -> np.ndarray:
        k = np.asarray(k)
        return (1.0 / self.z) * (1.0 - 1.0 / self.z) ** k

    @property
    def k_max(self) -> int:
        return len(self.mu_bullet) - 1

    def ensure_grand(self, big_g: int, method: str = "auto") -> np.ndarray:
        if len(self.mu_grand) < big_g + 1:
            self.mu_grand = grandchild_law(self, big_g, method=method)
        return self.mu_grand


def offspring_laws(w: WeightSequence, k_max: int = 10_000,
                   truncation_threshold: float = 1e-6) -> TwoTypeOffspring:
    """Materialize mu_bullet and its size-biased version up to ``k_max``."""
    if k_max < 1:
        raise WeightError("k_max must be >= 1")
    z = w.z_q
    k = np.arange(0, k_max + 1)
    kf = k.astype(np.float64)
    logb = ((kf + 1.0) * math.log(z)
            + gammaln(2 * kf + 2.0) - gammaln(kf + 1.0) - gammaln(kf + 2.0)
            + w.log_q(k + 1) - math.log(z - 1.0))
    mu_b = np.exp(logb)
    mass = float(mu_b.sum())
    trunc = max(0.0, 1.0 - mass)
    if w.family in ("kazakov", "tuned"):
        m_circ, m_bullet = z - 1.0, 1.0 / (z - 1.0)  # critical: exact means
    else:
        m_circ = z - 1.0
        m_bullet = float((kf * mu_b).sum())
    mu_hat = kf * mu_b / m_bullet
    return TwoTypeOffspring(
        z=z, alpha=w.alpha, mu_bullet=mu_b, mu_bullet_hat=mu_hat,
        m_circ=m_circ, m_bullet=m_bullet, truncation_mass=trunc,
        truncation_warning=trunc > truncation_threshold)


def custom_offspring(z: float, mu_bullet, alpha: float = float("nan")) -> TwoTypeOffspring:
    """Offspring laws from an explicit (z, mu_bullet) pair, for toy models."""
    mu_b = np.asarray(mu_bullet, dtype=np.float64)
    if z <= 1.0 or np.any(mu_b < 0) or abs(mu_b.sum() - 1.0) > 1e-9:
        raise WeightError("need z > 1 and mu_bullet a probability vector")
    k = np.arange(len(mu_b), dtype=np.float64)
    m_bullet = float((k * mu_b).sum())
    return TwoTypeOffspring(
        z=z, alpha=alpha, mu_bullet=mu_b,
        mu_bullet_hat=k * mu_b / m_bullet if m_bullet > 0 else np.zeros_like(mu_b),
        m_circ=z - 1.0, m_bullet=m_bullet, truncation_mass=0.0,
        truncation_warning=False)


# ---------------------------------------------------------------------------
# grandchild law


def _grand_dp(off: TwoTypeOffspring, big_g: int) -> np.ndarray:
    mu_b = off.mu_bullet
    c = 1.0 - 1.0 / off.z
    denom = 1.0 - c * (mu_b[0] if len(mu_b) else 0.0)
    out = np.zeros(big_g + 1)
    out[0] = (1.0 / off.z) / denom
    for g in range(1, big_g + 1):
        hi = min(g, len(mu_b) - 1)
        acc = float(np.dot(mu_b[1:hi + 1], out[g - 1::-1][:hi])) if hi >= 1 else 0.0
        out[g] = c * acc / denom
    return out


def _grand_series(off: TwoTypeOffspring, big_g: int) -> np.ndarray:
    # g_grand = z^{-1} sum_b (1 - z^{-1})^b g_bullet^b, truncated power sums
    mu_b = off.mu_bullet[:big_g + 1].copy()
    c = 1.0 - 1.0 / off.z
    out = np.zeros(big_g + 1)
    power = np.zeros(big_g + 1)
    power[0] = 1.0
    weight = 1.0 / off.z
    b = 0
    while weight > 1e-20 and b <= 64 * max(1, int(math.log(off.z / (off.z - 1)) + 2)):
        out += weight * power
        power = np.convolve(power, mu_b)[:big_g + 1]
        weight *= c
        b += 1
    return out


def _grand_newton_fft(off: TwoTypeOffspring, big_g: int) -> np.ndarray:
    # reciprocal of A(x) = 1 - (1 - z^{-1}) g_bullet(x), by Newton doubling
    n = big_g + 1
    a = np.zeros(n)
    mu_b = off.mu_bullet[:n]
    a[:len(mu_b)] = -(1.0 - 1.0 / off.z) * mu_b
    a[0] += 1.0
    inv = np.zeros(n)
    inv[0] = 1.0 / a[0]
    size = 1
    while size < n:
        size = min(2 * size, n)
        prod = _poly_mul(a[:size], inv[:size], size)
        corr = -prod
        corr[0] += 2.0
        inv[:size] = _poly_mul(inv[:size], corr, size)
    out = inv / off.z
    np.clip(out, 0.0, 1.0, out=out)
    return out


def _poly_mul(p: np.ndarray, q: np.ndarray, keep: int) -> np.ndarray:
    m = len(p) + len(q) - 1
    nfft = 1 << (m - 1).bit_length()
    res = np.fft.irfft(np.fft.rfft(p, nfft) * np.fft.rfft(q, nfft), nfft)[:keep]
    return res


def grandchild_law(off: TwoTypeOffspring, big_g: int,
                   method: str = "auto") -> np.ndarray:
    """Law of the number of white grandchildren, entries 0..big_g.

    Solves the renewal identity
    mu(g) = z^{-1} 1{g=0} + (1 - z^{-1}) (mu_bullet * mu)(g)
    by forward dynamic programming.  ``method="series"`` recomputes it by
    composing generating functions (independent route, used as an oracle),
    ``method="fft"`` by a Newton power-series reciprocal (fast for large g).
    """
    if big_g < 0:
        raise WeightError("big_g must be >= 0")
    if method == "auto":
        method = "dp" if big_g <= 20_000 else "fft"
    if method == "dp":
        out = _grand_dp(off, big_g)
    elif method == "series":
        out = _grand_series(off, big_g)
    elif method == "fft":
        out = _grand_newton_fft(off, big_g)
    else:
        raise WeightError(f"unknown method {method!r}")
    np.clip(out, 0.0, 1.0, out=out)
    total = float(out.sum())
    if total > 1.0 + 1e-9:
        raise WeightError(f"grandchild law mass {total} exceeds 1")
    return out


# ---------------------------------------------------------------------------
# serialization


def weights_to_text(w: WeightSequence, truncation_mass: float | None = None) -> str:
    buf = io.StringIO()
    pairs = [("family", w.family), ("alpha", repr(w.alpha)),
             ("k_max", w.k_max), ("z_q", repr(w.z_q)),
             ("s_q", "" if w.s_q is None else repr(w.s_q)),
             ("truncation_mass", "" if truncation_mass is None else repr(truncation_mass))]
    for key, val in pairs:
        buf.write(f"{key}={val}\n")
    return buf.getvalue()


def weights_from_text(text: str) -> dict:
    out: dict = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or "=" not in line:
            continue
        key, val = line.split("=", 1)
        out[key] = val
    for key in ("alpha", "z_q", "s_q", "truncation_mass"):
        if out.get(key):
            out[key] = float(out[key])
    if "k_max" in out:
        out["k_max"] = int(out["k_max"])
    return out
