"""Bennet-style tail machinery for sub-Poissonian concentration bounds.

The central object is the function ``h(u) = ((1+u)log(1+u) - u) / (u^2/2)``,
which interpolates Gaussian behaviour (h -> 1 as u -> 0) and Poissonian
behaviour (h ~ 2 log(u)/u as u -> oo).  A tail envelope with variance proxy
``v`` and scale ``k`` asserts ``log E e^{tX} <= v (e^{kt} - kt - 1) / k^2``;
optimizing the Chernoff bound under that envelope yields the tail

    P{X >= u} <= exp(-(u^2 / 2v) * h(k u / v)).

Also provided: the classical Poisson tail bound, and the piecewise upper
bound ``psi(t, p)`` on the reduced moment generating function of the
single-row projection error together with its scale-k envelope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

#: Envelope scale used throughout; h(25 eps/p) in the dimension bound is
#: h(DEFAULT_ENVELOPE_SCALE * eps / (2 p)).
DEFAULT_ENVELOPE_SCALE = 50.0

#: Largest sparsity fraction for which the psi envelope is established.
MAX_SPARSITY = 1.0 / 30.0

_H_SERIES_CUTOFF = 1e-4
# Taylor coefficients of h at 0: h(u) = sum_j (-1)^j u^j / T_{j+1} with
# triangular numbers T_k = k(k+1)/2.  Eight terms keep the truncation error
# below 1e-17 for u <= 1e-2, well past the 1e-4 switch point.
_H_COEFFS = [1.0, -1 / 3, 1 / 6, -1 / 10, 1 / 15, -1 / 21, 1 / 28, -1 / 36]


def _bennet_h_series(u: float) -> float:
    acc = 0.0
    for c in reversed(_H_COEFFS):
        acc = acc * u + c
    return acc


def bennet_h(u: float) -> float:
    """Bennet function h(u) = ((1+u)log(1+u) - u) / (u^2/2).

    Strictly decreasing on (0, oo) with h(0+) = 1.  Below u = 1e-4 the
    closed form loses roughly 2*log10(1/u) digits to cancellation, so a
    Taylor series is used there instead.
    """
    if u < 0:
        raise DomainError(f"bennet_h requires u >= 0, got {u}")
    if u < _H_SERIES_CUTOFF:
        return _bennet_h_series(u)
    return ((1.0 + u) * math.log1p(u) - u) / (u * u / 2.0)


def poisson_tail_bound(lam: float, eps: float) -> float:
    """Chernoff bound e^{-lam} (e lam / eps)^eps on P{Poiss(lam) >= eps}.

    Dominates the exact upper tail for eps >= lam; the returned value is
    clamped to [0, 1] (the raw bound is vacuous for eps < lam).
    """
    if lam <= 0:
        raise DomainError(f"poisson_tail_bound requires lam > 0, got {lam}")
    if eps <= 0:
        raise DomainError(f"poisson_tail_bound requires eps > 0, got {eps}")
    log_bound = -lam + eps * (1.0 + math.log(lam) - math.log(eps))
    return min(1.0, math.exp(log_bound))


@dataclass(frozen=True)
class PsiDomain:
    """Validated (t, p) argument pair for :func:`psi`.

    ``t`` must lie in the open interval (0, log(1/p)/2) and ``p`` in
    (0, 1/30]; both branch denominators are then strictly positive.
    """

    t: float
    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= MAX_SPARSITY:
            raise DomainError(f"sparsity fraction p must lie in (0, 1/30], got {self.p}")
        limit = math.log(1.0 / self.p) / 2.0
        if not 0.0 < self.t < limit:
            raise DomainError(
                f"t must lie in (0, log(1/p)/2) = (0, {limit:.6g}), got {self.t}"
            )


def psi(t: float, p: float) -> float:
    """Piecewise envelope on the reduced MGF remainder of one projection row.

    For 0 < t < 1/2:
        e^{4t} - 8t^2 - 4t - 1 + 8 e^3 p t^3 / (1 - 2 e p t)
    For 1/2 <= t < log(1/p)/2:
        e^{4t} - 8t^2 - 4t - 1 + p e^{6t} / (1 - p e^{2t})

    The shared cubic part is evaluated as expm1(4t) - 4t - 8t^2 so that
    psi(t, p) = O(t^3) survives in floating point as t -> 0.
    """
    dom = PsiDomain(t, p)
    t, p = dom.t, dom.p
    base = math.expm1(4.0 * t) - 4.0 * t - 8.0 * t * t
    if t < 0.5:
        tail = 8.0 * math.exp(3.0) * p * t**3 / (1.0 - 2.0 * math.e * p * t)
    else:
        tail = p * math.exp(6.0 * t) / (1.0 - p * math.exp(2.0 * t))
    return base + tail


def mgf_envelope_bound(t: float, p: float, scale: float = DEFAULT_ENVELOPE_SCALE) -> float:
    """Upper bound 1 + 2 p^2 (e^{Kt} - Kt - 1) / K^2 on the row MGF.

    Valid for 0 < t <= log(1/(2p))/2 and p <= 1/30 at the default scale
    K = 50; always >= 1.
    """
    if not 0.0 < p <= MAX_SPARSITY:
        raise DomainError(f"sparsity fraction p must lie in (0, 1/30], got {p}")
    limit = math.log(1.0 / (2.0 * p)) / 2.0
    if not 0.0 < t <= limit:
        raise DomainError(
            f"t must lie in (0, log(1/(2p))/2] = (0, {limit:.6g}], got {t}"
        )
    kt = scale * t
    return 1.0 + 2.0 * p * p * (math.expm1(kt) - kt) / (scale * scale)


@dataclass(frozen=True)
class TailEnvelope:
    """MGF envelope log E e^{tX} <= v (e^{kt} - kt - 1) / k^2.

    ``v`` is the variance proxy (2 m p^2 for an m-row projection) and ``k``
    the envelope scale.
    """

    v: float
    k: float

    def __post_init__(self):
        if self.v < 0:
            raise DomainError(f"variance proxy v must be >= 0, got {self.v}")
        if self.k <= 0:
            raise DomainError(f"envelope scale k must be > 0, got {self.k}")

    def tail(self, u: float) -> float:
        return sub_poisson_tail(self, u)

    def chernoff_residual(self, u: float) -> float:
        return chernoff_optimum_check(self, u)


def sub_poisson_tail(env: TailEnvelope, u: float) -> float:
    """Optimized Chernoff tail exp(-(u^2/2v) h(ku/v)) under ``env``.

    Coincides with the Gaussian bound exp(-u^2/2v) as ku/v -> 0.  A zero
    variance proxy is the point mass at 0, so the tail is 0 for u > 0.
    """
    if u <= 0:
        raise DomainError(f"sub_poisson_tail requires u > 0, got {u}")
    if env.v == 0.0:
        return 0.0
    exponent = -(u * u / (2.0 * env.v)) * bennet_h(env.k * u / env.v)
    return min(1.0, math.exp(exponent))


def chernoff_optimum_check(env: TailEnvelope, u: float) -> float:
    """Residual between the optimized Chernoff exponent and its closed form.

    Evaluates the envelope exponent at the optimizer t* = log(1 + ku/v)/k
    and returns |(v (e^{kt*} - kt* - 1)/k^2 - t* u) - (-(u^2/2v) h(ku/v))|.
    Both routes describe the same quantity, so the residual is a pure
    floating-point check (<= 1e-12 for well-scaled inputs).
    """
    if u <= 0:
        raise DomainError(f"chernoff_optimum_check requires u > 0, got {u}")
    if env.v == 0.0:
        raise DomainError("chernoff_optimum_check requires a positive variance proxy")
    v, k = env.v, env.k
    t_star = math.log1p(k * u / v) / k
    optimized = v * (math.expm1(k * t_star) - k * t_star) / (k * k) - t_star * u
    closed_form = -(u * u / (2.0 * v)) * bennet_h(k * u / v)
    return abs(optimized - closed_form)
