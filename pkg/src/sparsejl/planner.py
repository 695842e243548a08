"""Embedding-dimension planning for sparse random projections.

Given a distortion ``eps``, failure probability ``delta`` and sparsity
fraction ``p``, the certified minimal embedding dimension is

    m  >=  (4 log(2/delta) / eps^2) * h(25 eps / p)^{-1},

valid for p <= 1/30 and eps <= p log(1/(2p)).  Since h <= 1 this never
beats the optimal dense-projection reference 4 log(2/delta)/eps^2, and it
approaches it as eps/p -> 0.  A comparison table of published alternative
bounds (evaluated with configurable leading constants where only an
unspecified constant is known) is also provided.
"""

from __future__ import annotations

import io
import csv
import math
import warnings
from dataclasses import dataclass

from .concentration import DEFAULT_ENVELOPE_SCALE, MAX_SPARSITY, bennet_h
from .errors import ConstraintViolation, DomainError

#: Row label under which this package's own bound appears in the table.
BENNET_ROW = "bennet"


@dataclass(frozen=True)
class PlanRequest:
    """Validated (eps, delta, p) planning request.

    Requires 0 < eps < 1, 0 < delta < 1, 0 < p <= 1/30 and the validity
    constraint eps <= p log(1/(2p)).
    """

    eps: float
    delta: float
    p: float

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise DomainError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0.0 < self.delta < 1.0:
            raise DomainError(f"delta must lie in (0, 1), got {self.delta}")
        if not 0.0 < self.p <= MAX_SPARSITY:
            raise ConstraintViolation(
                f"sparsity constraint p ⩽ 1/30 violated: p = {self.p}"
            )
        if self.eps > self.eps_limit:
            raise ConstraintViolation(
                f"validity constraint ε ⩽ p log(1/2p) violated: "
                f"eps = {self.eps} > {self.eps_limit:.6g}"
            )

    @property
    def eps_limit(self) -> float:
        return self.p * math.log(1.0 / (2.0 * self.p))

    @classmethod
    def from_counts(cls, eps: float, delta: float, s: int, m: int) -> "PlanRequest":
        """Build a request from integer sparsity s and dimension m (p = s/m)."""
        if m <= 0 or s <= 0:
            raise DomainError(f"s and m must be positive, got s={s}, m={m}")
        return cls(eps, delta, s / m)


@dataclass(frozen=True)
class PlanResult:
    """Planner output: certified dimension plus diagnostics."""

    m_min: int
    h_value: float
    gaussian_reference: float
    slack: float
    s_implied: int


def min_dimension(req: PlanRequest, envelope_scale: float = DEFAULT_ENVELOPE_SCALE) -> PlanResult:
    """Minimal certified embedding dimension for ``req``.

    Returns ceil((4 log(2/delta)/eps^2) / h(K eps / 2p)) with K = 50 by
    default, together with the h value, the eps/p -> 0 Gaussian reference
    4 log(2/delta)/eps^2, the slack in the validity constraint, and the
    implied per-column sparsity round(p * m).
    """
    h_value = bennet_h(envelope_scale * req.eps / (2.0 * req.p))
    gaussian_reference = 4.0 * math.log(2.0 / req.delta) / (req.eps * req.eps)
    m_min = math.ceil(gaussian_reference / h_value)
    s_exact = req.p * m_min
    if s_exact < 1.0:
        warnings.warn(
            f"p * m_min = {s_exact:.3g} < 1; implied sparsity clamped to s = 1",
            stacklevel=2,
        )
    s_implied = max(1, round(s_exact))
    return PlanResult(
        m_min=m_min,
        h_value=h_value,
        gaussian_reference=gaussian_reference,
        slack=req.eps_limit - req.eps,
        s_implied=s_implied,
    )


def sparsity_tradeoff(
    eps: float, delta: float, B: float, sparsity_constant: float = 1.0
) -> tuple[int, int]:
    """Asymptotic dimension/sparsity pair trading dimension for sparsity.

    Returns (ceil(4 B log(2/delta) / (eps^2 log B)), ceil(c / (eps log B)))
    for B > 2.  This is asymptotic guidance with an unspecified sparsity
    constant c (default 1), not a certified bound.
    """
    if B <= 2.0:
        raise DomainError(f"tradeoff parameter B must exceed 2, got {B}")
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    log_b = math.log(B)
    m = math.ceil(4.0 * B * math.log(2.0 / delta) / (eps * eps * log_b))
    s = math.ceil(sparsity_constant / (eps * log_b))
    return m, s


@dataclass(frozen=True)
class BoundsRow:
    """One evaluated dimension bound: label, value, constant used, validity."""

    source: str
    value: float
    constant: float
    valid: bool


def _row(source: str, raw: float, constant: float, valid: bool, ceil: bool = True) -> BoundsRow:
    if not (math.isfinite(raw) and raw > 0):
        valid = False
    value = float(math.ceil(raw)) if (ceil and math.isfinite(raw)) else raw
    return BoundsRow(source=source, value=value, constant=constant, valid=valid)


def bounds_table(
    eps: float, delta: float, p: float, B: float, constant: float = 1.0
) -> list[BoundsRow]:
    """Published dimension bounds evaluated side by side.

    ``constant`` replaces the unspecified leading constants; rows with
    explicit published constants ignore it.  Rows whose preconditions fail
    (the B > 2 requirement, this package's p and eps constraints, or inner
    logarithms leaving their domain) are marked invalid rather than
    omitted.  The two published lower bounds are rendered as the single
    optimal-dimension reference line 4 log(2/delta)/eps^2.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")

    l2 = math.log(2.0 / delta)
    l1 = math.log(1.0 / delta)
    inv_eps2 = 1.0 / (eps * eps)
    inv_peps = 1.0 / (p * eps)
    rows: list[BoundsRow] = []

    rows.append(_row("lower_bound_reference", 4.0 * l2 * inv_eps2, 1.0, True, ceil=False))
    rows.append(_row("rademacher_chaos", constant * max(l2 * inv_eps2, l2 * l2 * inv_peps), constant, True))

    # The triple-log refinement needs log log(2/delta) > 0 to evaluate.
    ll2 = math.log(l2) if l2 > 0 else math.nan
    if ll2 > 0:
        refine = l1 * l1 * (math.log(ll2) / ll2) * inv_peps
    else:
        refine = math.nan
    rows.append(_row("graph_enumeration_loglog", constant * max(l2 * inv_eps2, refine)
                     if math.isfinite(refine) else math.nan, constant, math.isfinite(refine)))

    rows.append(_row("graph_enumeration", constant * max(l2 * inv_eps2, l2 * inv_peps), constant, True))

    if B > 2.0:
        chernoff = constant * max(B * l2 * inv_eps2, (l2 / math.log(B)) * inv_peps)
        rows.append(_row("matrix_chernoff", chernoff, constant, True))
    else:
        rows.append(BoundsRow("matrix_chernoff", math.nan, constant, False))

    rows.append(_row("hanson_wright", constant * max(l2 * inv_eps2, l2 * inv_peps), constant, True))
    rows.append(_row("decoupling_explicit",
                     max(128.0 * l1 * inv_eps2, 8.0 * math.sqrt(2.0) * l2 * inv_peps), 1.0, True))

    try:
        result = min_dimension(PlanRequest(eps, delta, p))
        rows.append(BoundsRow(BENNET_ROW, float(result.m_min), 1.0, True))
    except (ConstraintViolation, DomainError):
        rows.append(BoundsRow(BENNET_ROW, math.nan, 1.0, False))
    return rows


def bounds_to_csv(rows: list[BoundsRow]) -> str:
    """Serialize table rows as CSV with columns source,formula_value,constant,valid."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "formula_value", "constant", "valid"])
    for row in rows:
        writer.writerow([row.source, repr(row.value), repr(row.constant), row.valid])
    return buf.getvalue()
