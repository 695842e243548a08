"""Exact small-instance and Monte Carlo verification oracles.

The projection analysis reduces to the random quadratic form
``Z = sum_{i != j} x_i x_j eta_i eta_j r_i r_j`` with Bernoulli selectors
``eta`` and Rademacher signs ``r``.  This module computes its moments
exactly by exhaustive enumeration, checks the combinatorial and envelope
inequalities the tail bound rests on, and estimates end-to-end failure
probabilities with exact binomial confidence intervals.  Enumeration
budgets are hard errors: an oracle that silently subsamples is not an
oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np
from scipy.stats import beta as _beta_dist

from . import streams, transform
from .concentration import DEFAULT_ENVELOPE_SCALE, MAX_SPARSITY, TailEnvelope, chernoff_optimum_check, psi
from .errors import BudgetError, ConstraintViolation, DomainError

_UNIT_NORM_TOL = 1e-12
_MOMENT_MAX_DIM = 14
MAJORIZATION_BUDGET = 10**7

_PM1_CACHE: dict[int, np.ndarray] = {}


def _pm1(width: int) -> np.ndarray:
    """All 2^width sign patterns as a (+-1) matrix of shape (2^width, width)."""
    arr = _PM1_CACHE.get(width)
    if arr is None:
        codes = np.arange(1 << width, dtype=np.int64)
        arr = ((codes[:, None] >> np.arange(width)) & 1) * 2 - 1
        arr = arr.astype(np.float64)
        _PM1_CACHE[width] = arr
    return arr


def _check_unit(x: np.ndarray) -> None:
    norm_sq = float(np.dot(x, x))
    if abs(norm_sq - 1.0) > _UNIT_NORM_TOL:
        raise ConstraintViolation(f"x must be a unit vector, got |x|^2 = {norm_sq!r}")


@dataclass(frozen=True)
class MomentSpec:
    """Exact moment query for Z: unit vector x, selector rate p, order q."""

    x: tuple[float, ...]
    p: float
    q: int

    def __post_init__(self):
        if len(self.x) > _MOMENT_MAX_DIM:
            raise BudgetError(
                f"enumeration budget exceeded: dimension {len(self.x)} > {_MOMENT_MAX_DIM} "
                f"(4^n selector/sign configurations)"
            )
        if len(self.x) == 0:
            raise DomainError("x must be non-empty")
        _check_unit(np.asarray(self.x, dtype=np.float64))
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"selector rate p must lie in (0, 1), got {self.p}")
        if not (isinstance(self.q, int) and self.q >= 1):
            raise DomainError(f"moment order q must be a positive integer, got {self.q}")


def exact_moment_Z(spec: MomentSpec) -> float:
    """Exact E[Z^q] by enumerating all selector masks and sign patterns.

    Per selector mask eta the conditional expectation over signs uses the
    identity Z = S^2 - T with S = sum_i x_i eta_i r_i and
    T = sum_i x_i^2 eta_i; masks selecting fewer than two coordinates
    contribute zero.  Accumulation uses exact (fsum) summation.
    """
    x = np.asarray(spec.x, dtype=np.float64)
    n, p, q = len(x), spec.p, spec.q
    x_sq = x * x
    contributions = []
    for mask_bits in range(1 << n):
        k = mask_bits.bit_count()
        if k < 2:
            continue
        idx = [i for i in range(n) if mask_bits >> i & 1]
        weight = p**k * (1.0 - p) ** (n - k)
        signs = _pm1(k)
        s_vals = signs @ x[idx]
        vals = s_vals * s_vals - float(np.sum(x_sq[idx]))
        inner = math.fsum(vals**q) / (1 << k)
        contributions.append(weight * inner)
    return math.fsum(contributions)


def moment_bound_rhs(p: float, q: int) -> float:
    """Closed moment bound 2^q sum_{r=2}^{q} p^r r^q dominating E[Z^q]."""
    if not (isinstance(q, int) and q >= 2):
        raise DomainError(f"the moment bound starts at q = 2, got q = {q}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"selector rate p must lie in (0, 1), got {p}")
    return 2**q * math.fsum(p**r * r**q for r in range(2, q + 1))


def compositions(total: int):
    """All ordered tuples of positive integers summing to ``total``."""
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in compositions(total - first):
            yield (first,) + rest


def _multinomial(total: int, parts) -> int:
    out = math.factorial(total)
    for d in parts:
        out //= math.factorial(d)
    return out


@dataclass(frozen=True)
class MultinomialCheckReport:
    """Exhaustive verification of the squared-multinomial inequality."""

    q_max: int
    total_checked: int
    checked_per_q: dict[int, int]
    violations: list[tuple[int, tuple[int, ...]]]
    central_binomial_ok: bool

    @property
    def ok(self) -> bool:
        return self.central_binomial_ok and not self.violations


def check_multinomial_inequality(q_max: int) -> MultinomialCheckReport:
    """Check binom(2q; 2d_1..2d_r) <= 2^q binom(q; d_1..d_r)^2 exhaustively.

    Runs over every composition d of every q <= q_max in exact integer
    arithmetic, and additionally verifies that central binomial
    coefficients satisfy binom(2k, k) >= 2^k.
    """
    if not (isinstance(q_max, int) and q_max >= 1):
        raise DomainError(f"q_max must be a positive integer, got {q_max}")
    if q_max > 20:
        raise BudgetError(f"q_max = {q_max} exceeds the exact-arithmetic budget of 20")
    violations = []
    checked_per_q = {}
    for q in range(1, q_max + 1):
        count = 0
        for parts in compositions(q):
            count += 1
            lhs = _multinomial(2 * q, [2 * d for d in parts])
            rhs = 2**q * _multinomial(q, parts) ** 2
            if lhs > rhs:
                violations.append((q, parts))
        checked_per_q[q] = count
    central_ok = all(math.comb(2 * k, k) >= 2**k for k in range(1, q_max + 1))
    return MultinomialCheckReport(
        q_max=q_max,
        total_checked=sum(checked_per_q.values()),
        checked_per_q=checked_per_q,
        violations=violations,
        central_binomial_ok=central_ok,
    )


@dataclass(frozen=True)
class MajorizationSpec:
    """Exact comparison instance: without-replacement columns vs iid entries."""

    n: int
    m: int
    s: int
    q: int
    x: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= self.n <= 4:
            raise DomainError(f"n must lie in [1, 4], got {self.n}")
        if not 1 <= self.m <= 5:
            raise DomainError(f"m must lie in [1, 5], got {self.m}")
        if not 1 <= self.s <= self.m:
            raise DomainError(f"s must lie in [1, m], got s={self.s}, m={self.m}")
        if self.q % 2 != 0 or not 2 <= self.q <= 6:
            raise DomainError(f"q must be an even integer in [2, 6], got {self.q}")
        if len(self.x) != self.n:
            raise DomainError(f"x must have length n={self.n}, got {len(self.x)}")
        _check_unit(np.asarray(self.x, dtype=np.float64))
        size = math.comb(self.m, self.s) ** self.n * 2 ** (self.m * self.n)
        if size > MAJORIZATION_BUDGET:
            raise BudgetError(
                f"enumeration budget exceeded: C(m,s)^n * 2^(m n) = {size} > {MAJORIZATION_BUDGET}"
            )


def _quadratic_form_moment(positions, coeffs, s, q):
    """E over signs of ((sum_k S_k^2 - T)/s)^q for fixed selected positions.

    ``positions`` maps each selected (row, col) to a row index and
    ``coeffs`` to its x coordinate; T is the sum of selected x_i^2.
    """
    w = len(positions)
    t_total = math.fsum(c * c for c in coeffs)
    if w < 1:
        return ((0.0 - t_total) / s) ** q
    rows_of = np.asarray(positions, dtype=np.int64)
    coef_mat = np.zeros((w, int(rows_of.max()) + 1))
    coef_mat[np.arange(w), rows_of] = coeffs
    s_vals = _pm1(w) @ coef_mat
    vals = ((s_vals * s_vals).sum(axis=1) - t_total) / s
    return math.fsum(vals**q) / (1 << w)


def check_majorization(spec: MajorizationSpec) -> tuple[float, float]:
    """Exact E[(x^T B x)^q] under both selector models; contract lhs <= rhs.

    The left value draws each column's s row indices uniformly without
    replacement; the right replaces the selectors by iid Bernoulli(s/m)
    entries.  Both are full enumerations over selections and signs.
    """
    x = np.asarray(spec.x, dtype=np.float64)
    n, m, s, q = spec.n, spec.m, spec.s, spec.q

    subset_weight = 1.0 / math.comb(m, s) ** n
    lhs_terms = []
    for assignment in product(combinations(range(m), s), repeat=n):
        positions = []
        coeffs = []
        for col, subset in enumerate(assignment):
            for row in subset:
                positions.append(row)
                coeffs.append(x[col])
        lhs_terms.append(subset_weight * _quadratic_form_moment(positions, coeffs, s, q))
    lhs = math.fsum(lhs_terms)

    p = s / m
    rhs_terms = []
    cells = [(row, col) for row in range(m) for col in range(n)]
    for mask_bits in range(1 << (m * n)):
        w = mask_bits.bit_count()
        weight = p**w * (1.0 - p) ** (m * n - w)
        positions = []
        coeffs = []
        for idx, (row, col) in enumerate(cells):
            if mask_bits >> idx & 1:
                positions.append(row)
                coeffs.append(x[col])
        rhs_terms.append(weight * _quadratic_form_moment(positions, coeffs, s, q))
    rhs = math.fsum(rhs_terms)
    return lhs, rhs


@dataclass(frozen=True)
class PsiEnvelopeReport:
    """Grid verification of psi(t, p) against its scale-K envelope."""

    p: float
    scale: float
    grid_points: int
    max_violation: float
    worst_t: float
    violation_count: int
    slack: float

    @property
    def ok(self) -> bool:
        return self.violation_count == 0


def check_psi_envelope(
    p: float,
    scale: float = DEFAULT_ENVELOPE_SCALE,
    grid_points: int = 10_000,
    slack: float = 1e-12,
) -> PsiEnvelopeReport:
    """Verify psi(t, p) <= (e^{Kt} - K^2 t^2/2 - Kt - 1)/(K^2/2) on a t-grid.

    The grid covers (0, log(1/(2p))/2] with ``grid_points`` equispaced
    points; a point counts as a violation when psi exceeds the envelope by
    more than ``slack``.
    """
    if not 0.0 < p <= MAX_SPARSITY:
        raise DomainError(f"sparsity fraction p must lie in (0, 1/30], got {p}")
    if grid_points < 1:
        raise DomainError(f"grid_points must be >= 1, got {grid_points}")
    t_max = math.log(1.0 / (2.0 * p)) / 2.0
    worst = -math.inf
    worst_t = math.nan
    count = 0
    for i in range(1, grid_points + 1):
        t = t_max * i / grid_points
        kt = scale * t
        envelope = (math.expm1(kt) - kt - kt * kt / 2.0) * 2.0 / (scale * scale)
        violation = psi(t, p) - envelope
        if violation > worst:
            worst, worst_t = violation, t
        if violation > slack:
            count += 1
    return PsiEnvelopeReport(
        p=p,
        scale=scale,
        grid_points=grid_points,
        max_violation=worst,
        worst_t=worst_t,
        violation_count=count,
        slack=slack,
    )


def chernoff_residual_grid(
    nv: int = 5, nk: int = 5, nu: int = 4
) -> tuple[int, float]:
    """Max optimizer-vs-closed-form residual over a log-spaced (v, k, u) lattice.

    Covers v in [0.1, 10], k in [1, 100], u in [0.01, 10]; the default
    lattice has 100 points.  Returns (points_checked, max_residual).
    """
    vs = np.geomspace(0.1, 10.0, nv)
    ks = np.geomspace(1.0, 100.0, nk)
    us = np.geomspace(0.01, 10.0, nu)
    worst = 0.0
    count = 0
    for v in vs:
        for k in ks:
            env = TailEnvelope(float(v), float(k))
            for u in us:
                worst = max(worst, chernoff_optimum_check(env, float(u)))
                count += 1
    return count, worst


@dataclass(frozen=True)
class TrialReport:
    """Monte Carlo failure-probability estimate with its exact 99% interval."""

    n: int
    m: int
    s: int
    eps: float
    trials: int
    failures: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int


def clopper_pearson(failures: int, trials: int, confidence: float = 0.99) -> tuple[float, float]:
    """Exact (Clopper-Pearson) two-sided binomial confidence interval."""
    if not 0 <= failures <= trials:
        raise DomainError(f"failures must lie in [0, trials], got {failures}/{trials}")
    alpha = 1.0 - confidence
    low = 0.0 if failures == 0 else float(_beta_dist.ppf(alpha / 2, failures, trials - failures + 1))
    high = 1.0 if failures == trials else float(_beta_dist.ppf(1 - alpha / 2, failures + 1, trials - failures))
    return low, high


def squared_norm_samples(
    n: int, m: int, s: int, x, trials: int, seed: int
) -> np.ndarray:
    """|A_t x|^2 for independent matrices A_t, t = 0..trials-1.

    Matrix t is exactly ``build_matrix(n, m, s, substream(seed, t))``;
    trials are evaluated in vectorized blocks whose layout does not affect
    the result.
    """
    transform._validate_build_args(n, m, s)
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n,):
        raise DomainError(f"x must have shape ({n},), got {x.shape}")
    _check_unit(x)
    seed = seed & streams.MASK64
    scale = 1.0 / math.sqrt(s)

    samples = np.empty(trials, dtype=np.float64)
    block = max(1, transform._CHUNK_ENTRIES // (m * n))
    col_ids = np.arange(n, dtype=np.int64)
    for start in range(0, trials, block):
        stop = min(trials, start + block)
        t_blk = stop - start
        trial_seeds = streams.substream_vec(seed, np.arange(start, stop, dtype=np.uint64))
        roots = streams.substream_pairs_vec(
            np.repeat(trial_seeds, n), np.tile(col_ids, t_blk).astype(np.uint64)
        )
        rows = np.empty((t_blk * n, s), dtype=np.uint32)
        signs = np.empty((t_blk * n, s), dtype=np.int8)
        lane_block = max(1, transform._CHUNK_ENTRIES // m)
        for lo in range(0, t_blk * n, lane_block):
            hi = min(t_blk * n, lo + lane_block)
            rows[lo:hi], signs[lo:hi] = transform.sample_columns(m, s, roots[lo:hi])
        weights = signs * x[np.tile(col_ids, t_blk)][:, None]
        flat = np.repeat(np.arange(t_blk, dtype=np.int64), n)[:, None] * m + rows
        y = np.bincount(flat.ravel(), weights=weights.ravel(), minlength=t_blk * m)
        y = y.reshape(t_blk, m)
        y *= scale
        samples[start:stop] = (y * y).sum(axis=1)
    return samples


def estimate_failure_prob(
    n: int, m: int, s: int, x, eps: float, trials: int, seed: int
) -> TrialReport:
    """Empirical P{| |Ax|^2 - 1 | > eps} over independent matrices.

    Failures are counted with strict inequality; the report carries the
    exact 99% Clopper-Pearson interval and is reproducible from ``seed``.
    """
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    samples = squared_norm_samples(n, m, s, x, trials, seed)
    failures = int(np.count_nonzero(np.abs(samples - 1.0) > eps))
    ci_low, ci_high = clopper_pearson(failures, trials)
    return TrialReport(
        n=n,
        m=m,
        s=s,
        eps=eps,
        trials=trials,
        failures=failures,
        p_hat=failures / trials,
        ci_low=ci_low,
        ci_high=ci_high,
        seed=seed & streams.MASK64,
    )
