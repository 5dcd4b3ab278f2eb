"""Audit planning: minimal draw counts and workload comparison tables.

Planning answers two questions before any ballot is pulled. First, how
many PPEB draws guarantee the audit can stop at the risk limit if the
hand counts come back no worse than a hypothesized taint pattern (for
example, five taints of 0.04 and the rest clean). Second, how the
simultaneous audit's workload compares with auditing each race
independently, where the independent audits must either split the risk
limit across races (FWER accounting, a stricter per-race risk) or accept
a weaker per-race guarantee (PCER accounting, risk limit per race).

Planning tables quantize per-batch bounds to 4 decimals, the precision
at which such tables are normally published, so every figure in an
emitted table can be reproduced by hand from the table itself.
"""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass

from .bounds import total_error_bound
from .election import ElectionSpec
from .errors import (
    BoundNotAboveOne,
    InvalidRiskLimit,
    Unattainable,
    UnknownReference,
    ValidationError,
)
from .sampling import (
    expected_ballots,
    expected_combined_independent,
    expected_distinct_batches,
    expected_votes,
)

DEFAULT_SCAN_CEILING = 10**6

_PATTERN_TERM = re.compile(r"^(\d+)x(-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)$")


@dataclass(frozen=True)
class TaintHypothesis:
    """A hypothesized worst acceptable audit outcome, as (value, count) pairs.

    Values must be below 1 (a taint of 1 can never certify); counts are
    non-negative. ``taints(n)`` expands the pattern to a draw sequence of
    length n with the nonzero taints first and zeros filling the rest, the
    convention that makes planned P-values reproducible.
    """

    pattern: tuple[tuple[float, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "pattern", tuple((float(v), int(c)) for v, c in self.pattern)
        )
        for value, count in self.pattern:
            if not value < 1.0:
                raise ValidationError(
                    f"hypothesized taint must be < 1, got {value}"
                )
            if count < 0:
                raise ValidationError(f"taint count must be >= 0, got {count}")

    @classmethod
    def parse(cls, text: str) -> "TaintHypothesis":
        """Parse the flag grammar COUNTxVALUE[,COUNTxVALUE...], e.g. 5x0.04."""
        terms = []
        for raw in text.split(","):
            m = _PATTERN_TERM.match(raw.strip())
            if m is None:
                raise ValidationError(
                    f"bad taint-hypothesis term {raw.strip()!r}; "
                    f"expected COUNTxVALUE like 5x0.04"
                )
            terms.append((float(m.group(2)), int(m.group(1))))
        return cls(pattern=tuple(terms))

    def taints(self, n: int) -> list[float]:
        if n < 0:
            raise ValidationError(f"draw count must be >= 0, got {n}")
        nonzero = [v for v, c in self.pattern for _ in range(c) if v != 0.0]
        out = nonzero[:n]
        out.extend([0.0] * (n - len(out)))
        return out


ZERO_HYPOTHESIS = TaintHypothesis(pattern=())


def minimal_draws(
    total_bound: float,
    risk_limit: float,
    hypothesis: TaintHypothesis = ZERO_HYPOTHESIS,
    ceiling: int = DEFAULT_SCAN_CEILING,
) -> int:
    """Smallest n whose planned P-value beats the risk limit.

    Scans n upward, extending the hypothesis sequence one draw at a time
    (each extension appends a factor, so the scan reproduces km_pvalue at
    every n exactly). Raises Unattainable when no n up to the ceiling
    works, which happens when the hypothesis includes a taint of 1, or the
    ceiling is simply too small for the margin.
    """
    if not total_bound > 1.0:
        raise BoundNotAboveOne(
            f"total error bound must exceed 1, got {total_bound}"
        )
    if not 0.0 < risk_limit < 1.0:
        raise InvalidRiskLimit(f"risk limit must be in (0, 1), got {risk_limit}")
    shrink = 1.0 - 1.0 / total_bound
    head_len = min(ceiling, sum(c for v, c in hypothesis.pattern if v != 0.0))
    head = hypothesis.taints(head_len)
    product = 1.0
    prefix_min = 1.0
    for n in range(1, ceiling + 1):
        t = head[n - 1] if n - 1 < len(head) else 0.0
        factor = math.inf if t == 1.0 else shrink / (1.0 - t)
        product *= factor
        prefix_min = min(prefix_min, product)
        if prefix_min < risk_limit:
            return n
    raise Unattainable(
        f"no draw count up to {ceiling} reaches P < {risk_limit} "
        f"under the hypothesis"
    )


def plan_or_certify(
    total_bound: float,
    risk_limit: float,
    hypothesis: TaintHypothesis = ZERO_HYPOTHESIS,
    ceiling: int = DEFAULT_SCAN_CEILING,
) -> tuple[int, bool]:
    """(draws, certified_without_audit) for a bound table's total.

    A total bound below 1 proves every audited outcome correct with no
    sampling at all; exactly 1 cannot certify and cannot run the
    sequential test, so it demands a full hand count.
    """
    if total_bound < 1.0:
        return 0, True
    return minimal_draws(total_bound, risk_limit, hypothesis, ceiling), False


def fwer_split(risk_limit: float, races: int) -> float:
    """Per-race risk a' with (1 - a')^R = 1 - a: equal familywise split."""
    if not 0.0 < risk_limit < 1.0:
        raise InvalidRiskLimit(f"risk limit must be in (0, 1), got {risk_limit}")
    if races < 1:
        raise ValidationError(f"race count must be >= 1, got {races}")
    return 1.0 - (1.0 - risk_limit) ** (1.0 / races)


@dataclass(frozen=True)
class PlanRow:
    """One audit design: scope, risk accounting, and expected workload."""

    scope: str
    model: str  # "fwer", "pcer", or "marrop"
    risk: float
    total_bound: float | None
    draws: int | None
    batches: float
    ballots: float
    votes: float


@dataclass(frozen=True)
class PlanTable:
    """Side-by-side comparison of independent and simultaneous audit designs."""

    risk_limit: float
    hypothesis: TaintHypothesis
    rows: tuple[PlanRow, ...]

    def filtered(self, models) -> "PlanTable":
        keep = tuple(r for r in self.rows if r.model in set(models))
        return PlanTable(self.risk_limit, self.hypothesis, keep)

    def row(self, scope: str, model: str) -> PlanRow:
        for r in self.rows:
            if r.scope == scope and r.model == model:
                return r
        raise KeyError((scope, model))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            [
                "scope", "model", "risk", "total_bound", "draws",
                "expected_batches", "expected_ballots", "expected_votes",
            ]
        )
        for r in self.rows:
            writer.writerow(
                [
                    r.scope,
                    r.model,
                    repr(r.risk),
                    "" if r.total_bound is None else repr(r.total_bound),
                    "" if r.draws is None else r.draws,
                    repr(r.batches),
                    repr(r.ballots),
                    repr(r.votes),
                ]
            )
        return buf.getvalue()

    def to_text(self) -> str:
        headers = [
            "scope", "model", "risk", "U", "draws",
            "E[batches]", "E[ballots]", "E[votes]",
        ]
        body = []
        for r in self.rows:
            body.append(
                [
                    r.scope,
                    r.model.upper() if r.model != "marrop" else "MARROP",
                    f"{r.risk:.4f}",
                    "" if r.total_bound is None else f"{r.total_bound:.3f}",
                    "" if r.draws is None else str(r.draws),
                    f"{r.batches:.2f}",
                    f"{r.ballots:.2f}",
                    f"{r.votes:.2f}",
                ]
            )
        widths = [
            max(len(h), *(len(row[i]) for row in body)) if body else len(h)
            for i, h in enumerate(headers)
        ]
        def fmt(cells):
            return "  ".join(c.rjust(w) for c, w in zip(cells, widths)).rstrip()

        lines = [fmt(headers), fmt(["-" * w for w in widths])]
        lines.extend(fmt(row) for row in body)
        return "\n".join(lines) + "\n"


def compare_plans(
    spec: ElectionSpec,
    risk_limit: float,
    hypothesis: TaintHypothesis = ZERO_HYPOTHESIS,
    races=None,
    decimals: int | None = 4,
    ceiling: int = DEFAULT_SCAN_CEILING,
) -> PlanTable:
    """Build the full comparison: per-race FWER and PCER rows, combined
    "all" rows for each accounting, and the simultaneous MARROP row.

    Per-race rows use that race's own bound table; the "all" rows combine
    the independent audits' inclusion probabilities, counting shared
    batches once for retrieval but per-race for vote reading. Draw counts
    are this implementation's own minima (n-1 always fails);
    published tables may differ where their own arithmetic disagrees.
    """
    if races is None:
        race_ids = list(spec.race_ids)
    else:
        race_ids = sorted(set(races))
        for r in race_ids:
            if r not in spec.race_by_id:
                raise UnknownReference(f"unknown race {r!r}")
        if not race_ids:
            raise ValidationError("no races selected")
    split = fwer_split(risk_limit, len(race_ids))

    rows: list[PlanRow] = []
    per_race = {}
    for r in race_ids:
        bounds_r = total_error_bound(spec, [r], decimals=decimals)
        per_race[r] = bounds_r
        for model, risk in (("fwer", split), ("pcer", risk_limit)):
            n = minimal_draws(bounds_r.total, risk, hypothesis, ceiling)
            rows.append(
                PlanRow(
                    scope=r,
                    model=model,
                    risk=risk,
                    total_bound=bounds_r.total,
                    draws=n,
                    batches=expected_distinct_batches(bounds_r, n),
                    ballots=expected_ballots(spec, bounds_r, n),
                    votes=expected_votes(spec, bounds_r, n),
                )
            )

    if len(race_ids) > 1:
        for model, risk in (("fwer", split), ("pcer", risk_limit)):
            audits = []
            for r in race_ids:
                n = next(
                    row.draws for row in rows if row.scope == r and row.model == model
                )
                audits.append((per_race[r], n))
            combined = expected_combined_independent(spec, audits)
            rows.append(
                PlanRow(
                    scope="all",
                    model=model,
                    risk=risk_limit,
                    total_bound=None,
                    draws=sum(n for _, n in audits),
                    batches=combined.batches,
                    ballots=combined.ballots,
                    votes=combined.votes,
                )
            )

    bounds_all = total_error_bound(spec, race_ids, decimals=decimals)
    n_m = minimal_draws(bounds_all.total, risk_limit, hypothesis, ceiling)
    rows.append(
        PlanRow(
            scope="+".join(race_ids) if len(race_ids) > 1 else race_ids[0],
            model="marrop",
            risk=risk_limit,
            total_bound=bounds_all.total,
            draws=n_m,
            batches=expected_distinct_batches(bounds_all, n_m),
            ballots=expected_ballots(spec, bounds_all, n_m),
            votes=expected_votes(spec, bounds_all, n_m),
        )
    )
    return PlanTable(risk_limit=risk_limit, hypothesis=hypothesis, rows=tuple(rows))
