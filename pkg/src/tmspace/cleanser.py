"""Completion of divergence-censored integer sequences.

A sequence profile holds the 21 values a machine produced over inputs
0..20, with -1 marking inputs whose run hit the step bound.  Completion
fills holes in two passes.

The contiguous pass forward-fills: the first run of at least four
consecutive convergent values seeds an exact model fit, the model
predicts the next divergent position, every convergent value passed
along the way joins the fitted segment, and the model is refitted at
each new hole.  A convergent value that no candidate model can
reconcile with the segment stops filling at that point.

The periodic pass handles machines that halt only on a residue class
of inputs.  It runs solely when no contiguous seed exists, so the
forward-fill examples keep their documented behaviour.  It searches
the smallest period (up to 5) under which every residue class reads
as an optional divergent prefix, a convergent run, then a divergent
tail.
A class whose run has at least four values and a non-empty tail is
censored rather than divergent, so the run is fitted as a subsequence
and extrapolated over the tail; classes that diverge throughout are
left alone, which is what preserves genuinely partial functions.

Candidate models, tried in order at each hole:

  1. polynomial via finite differences, smallest degree first;
  2. constant-coefficient linear recurrence with a constant term,
     a(n) = c1 a(n-1) + ... + cr a(n-r) + c0, minimal order first,
     solved exactly over the rationals and refused when the system
     leaves no equations for cross-validation.

All fitting is exact rational arithmetic; a model must reproduce its
whole fitted segment, and predictions that are fractional or negative
abort filling.  Two guards tie fills to the run evidence.  A runtime
fill must exceed the step bound the cell already survived (`floor`):
a smaller prediction is refuted by the run itself, which marks the
cell as truly divergent, not censored.  Output and space fills are
restricted to positions where the runtime row filled (`allow`), so no
function value is ever claimed without a halting-time account.

Verification re-runs filled positions at a raised step bound and
classifies each as confirmed, unconfirmable (still divergent), or
contradicted (the deep run disagrees, or halts where nothing was
predicted).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import (
    Container,
    Dict,
    List,
    Optional,
    Sequence,
    Tuple,
    Union,
)

SEQUENCE_LENGTH = 21
MIN_SEGMENT = 4
MAX_POLY_DEGREE = 4
PERIOD_MAX = 5
VERIFICATION_BOUND = 200_000


class SequenceKind(enum.Enum):
    OUTPUT = "output"
    RUNTIME = "runtime"
    SPACE = "space"


@dataclass(frozen=True)
class SequenceProfile:
    """One machine's value sequence over the standard inputs."""

    values: Tuple[int, ...]
    kind: SequenceKind
    provenance: str = "raw"
    rule_number: Optional[int] = None

    def __post_init__(self) -> None:
        if any(v < -1 for v in self.values):
            raise ValueError("sequence entries must be >= -1")
        if self.provenance not in ("raw", "cleansed"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def convergent_positions(self) -> Tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.values) if v != -1)


@dataclass(frozen=True)
class FitModel:
    """An exact sequence law fitted to a run of convergent values.

    Polynomial models store the leading column of the finite-difference
    table (Newton forward coefficients); recurrence models store the
    recurrence weights c1..cr followed by the constant term c0.  Either
    kind can be re-evaluated at any index at or beyond its segment
    start, so every filled value can be audited against its model.
    """

    family: str
    coefficients: Tuple[Fraction, ...]
    segment_start: int
    segment_values: Tuple[int, ...]
    degree: Optional[int] = None
    order: Optional[int] = None

    def value_at(self, index: int) -> Fraction:
        t = index - self.segment_start
        if t < 0:
            raise ValueError("index precedes the fitted segment")
        if self.family == "polynomial":
            return sum(
                (c * comb(t, j) for j, c in enumerate(self.coefficients)),
                Fraction(0),
            )
        history: List[Fraction] = [Fraction(v) for v in self.segment_values]
        r = self.order or 0
        weights = self.coefficients[:r]
        constant = self.coefficients[r]
        while len(history) <= t:
            nxt = sum(
                (w * history[-j] for j, w in enumerate(weights, start=1)),
                constant,
            )
            history.append(nxt)
        return history[t]

    def describe(self) -> str:
        if self.family == "polynomial":
            return f"polynomial degree {self.degree}"
        terms = ", ".join(str(c) for c in self.coefficients[: self.order])
        return f"recurrence order {self.order} weights [{terms}] + {self.coefficients[self.order]}"


@dataclass(frozen=True)
class CompletionResult:
    completed: SequenceProfile
    filled_positions: Tuple[int, ...]
    models_used: Tuple[FitModel, ...]
    gave_up_at: Optional[int]

    @property
    def filled(self) -> Dict[int, int]:
        return {p: self.completed.values[p] for p in self.filled_positions}


def _difference_table(values: Sequence[int]) -> Optional[List[List[Fraction]]]:
    rows = [[Fraction(v) for v in values]]
    while rows[-1] and any(x != rows[-1][0] for x in rows[-1]):
        prev = rows[-1]
        rows.append([b - a for a, b in zip(prev, prev[1:])])
    if not rows[-1]:
        return None
    return rows

def _poly_degree_cap(m: int) -> int:
    return min(MAX_POLY_DEGREE, m // 2)


def _solve_exact(
    matrix: List[List[Fraction]], rhs: List[Fraction]
) -> Optional[List[Fraction]]:
    rows = [row[:] + [b] for row, b in zip(matrix, rhs)]
    ncols = len(matrix[0])
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        pv = rows[r][c]
        rows[r] = [x / pv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    for i in range(r, len(rows)):
        if rows[i][-1] != 0 and all(x == 0 for x in rows[i][:-1]):
            return None
    if len(pivots) < ncols:
        return None
    solution = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        solution[c] = rows[i][-1]
    return solution


def fit_sequence(segment: Sequence[int], start: int = 0) -> Optional[FitModel]:
    """Minimal exact model for a fully convergent segment, or None.

    Tries polynomials (smallest degree first, capped so at least half
    the segment confirms the fit) and then linear recurrences with a
    constant term (minimal order first, refused when fewer than one
    spare equation would remain to cross-check the solution).
    """
    m = len(segment)
    if m < MIN_SEGMENT:
        return None
    if any(v < 0 for v in segment):
        return None
    table = _difference_table(segment)
    if table is not None and len(table) - 1 <= _poly_degree_cap(m):
        return FitModel(
            family="polynomial",
            coefficients=tuple(row[0] for row in table),
            segment_start=start,
            segment_values=tuple(segment),
            degree=len(table) - 1,
        )
    for order in range(1, max(1, m // 2)):
        n_eq = m - order
        if n_eq < order + 2:
            continue
        matrix = [
            [Fraction(segment[i - j]) for j in range(1, order + 1)] + [Fraction(1)]
            for i in range(order, m)
        ]
        rhs = [Fraction(segment[i]) for i in range(order, m)]
        solution = _solve_exact(matrix, rhs)
        if solution is not None:
            return FitModel(
                family="linear_recurrence",
                coefficients=tuple(solution),
                segment_start=start,
                segment_values=tuple(segment),
                order=order,
            )
    return None


def _admissible(
    prediction: Fraction,
    position: int,
    floor: Optional[int],
    allow: Optional[Container[int]],
) -> bool:
    if prediction.denominator != 1 or prediction < 0:
        return False
    if floor is not None and prediction <= floor:
        return False
    if allow is not None and position not in allow:
        return False
    return True


def _periodic_plan(
    values: Sequence[int],
) -> Optional[List[Tuple[List[int], List[int]]]]:
    """Residue-class fill plan for interleaved divergence, or None.

    Returns, for the smallest admissible period, the fill candidates as
    (convergent run values, tail positions) pairs in class order.
    """
    n = len(values)
    for period in range(2, PERIOD_MAX + 1):
        plan: List[Tuple[List[int], List[int]]] = []
        valid = True
        for r in range(period):
            positions = list(range(r, n, period))
            flags = [values[p] != -1 for p in positions]
            k = 0
            while k < len(flags) and not flags[k]:
                k += 1
            j = k
            while j < len(flags) and flags[j]:
                j += 1
            if any(flags[j:]):
                valid = False
                break
            run = [values[p] for p in positions[k:j]]
            tail = positions[j:]
            if len(run) >= MIN_SEGMENT and tail:
                plan.append((run, tail))
        if valid and plan:
            return plan
    return None


def _complete_list(
    values: Sequence[int],
    floor: Optional[int],
    allow: Optional[Container[int]],
) -> Tuple[List[int], List[int], List[FitModel], Optional[int]]:
    out = list(values)
    n = len(out)
    filled: List[int] = []
    models: List[FitModel] = []
    gave_up_at: Optional[int] = None
    start = None
    end = 0
    i = 0
    while i < n:
        if out[i] != -1:
            j = i
            while j < n and out[j] != -1:
                j += 1
            if j - i >= MIN_SEGMENT:
                start, end = i, j
                break
            i = j
        else:
            i += 1
    if start is not None:
        segment = out[start:end]
        pos = end
        while pos < n:
            if out[pos] != -1:
                segment.append(out[pos])
                pos += 1
                continue
            model = fit_sequence(segment, start)
            if model is None:
                gave_up_at = pos
                break
            prediction = model.value_at(pos)
            if not _admissible(prediction, pos, floor, allow):
                gave_up_at = pos
                break
            out[pos] = int(prediction)
            segment.append(int(prediction))
            filled.append(pos)
            models.append(model)
            pos += 1
    if start is None and any(v == -1 for v in out):
        plan = _periodic_plan(out)
        if plan is not None:
            for run, tail in plan:
                model = fit_sequence(run, 0)
                if model is None:
                    continue
                for k, pos in enumerate(tail):
                    prediction = model.value_at(len(run) + k)
                    if not _admissible(prediction, pos, floor, allow):
                        break
                    out[pos] = int(prediction)
                    filled.append(pos)
                    models.append(model)
    return out, sorted(filled), models, gave_up_at


def complete(
    profile: SequenceProfile,
    floor: Optional[int] = None,
    allow: Optional[Container[int]] = None,
) -> CompletionResult:
    """Fill divergent entries per the module rules."""
    values, filled, models, gave_up_at = _complete_list(
        profile.values, floor, allow
    )
    completed = SequenceProfile(
        values=tuple(values),
        kind=profile.kind,
        provenance="cleansed",
        rule_number=profile.rule_number,
    )
    return CompletionResult(completed, tuple(filled), tuple(models), gave_up_at)


def complete_values(
    values: Sequence[int],
    floor: Optional[int] = None,
    allow: Optional[Container[int]] = None,
) -> List[int]:
    """Completion of a bare value list (fast path for bulk cleansing)."""
    return _complete_list(values, floor, allow)[0]


CONFIRMED = "confirmed"
UNCONFIRMABLE = "unconfirmable"
CONTRADICTED = "contradicted"


@dataclass(frozen=True)
class PositionVerdict:
    position: int
    predicted: Optional[int]
    actual: Optional[int]
    outcome: str


@dataclass(frozen=True)
class VerificationReport:
    rule_number: int
    kind: SequenceKind
    verdicts: Tuple[PositionVerdict, ...]

    def count(self, outcome: str) -> int:
        return sum(1 for v in self.verdicts if v.outcome == outcome)

    @property
    def all_confirmed(self) -> bool:
        return all(v.outcome == CONFIRMED for v in self.verdicts)


class DeepIndex:
    """Columnar lookup over a deep-rerun store, shared across verify calls."""

    def __init__(self, store) -> None:
        rules, runtimes, spaces, outs, wide = store.columnar()
        self.inputs = store.inputs
        self._order = {int(r): i for i, r in enumerate(rules)}
        self._runtimes = runtimes
        self._spaces = spaces
        self._outs = outs
        self._wide = wide

    def value(self, rule: int, position: int, kind: SequenceKind) -> Optional[int]:
        """Deep-run value, or None when still divergent or absent."""
        row = self._order.get(rule)
        if row is None:
            return None
        if self._runtimes[row, position] < 0:
            return None
        if kind is SequenceKind.RUNTIME:
            return int(self._runtimes[row, position])
        if kind is SequenceKind.SPACE:
            return int(self._spaces[row, position])
        code = int(self._outs[row, position])
        if code >= 0:
            return code
        return self._wide[(rule, self.inputs[position])]


def verify(
    completion: CompletionResult, deep: Union["DeepIndex", object]
) -> VerificationReport:
    """Classify each raw-divergent position against deep re-runs.

    Filled positions come out confirmed, unconfirmable, or contradicted;
    an unfilled position where the deep run halts is contradicted too
    (the completion missed a value).
    """
    if not isinstance(deep, DeepIndex):
        deep = DeepIndex(deep)
    profile = completion.completed
    if profile.rule_number is None:
        raise ValueError("profile carries no rule number to verify against")
    rule = profile.rule_number
    filled = set(completion.filled_positions)
    verdicts: List[PositionVerdict] = []
    for pos, value in enumerate(profile.values):
        if pos in filled:
            actual = deep.value(rule, pos, profile.kind)
            if actual is None:
                outcome = UNCONFIRMABLE
            elif actual == value:
                outcome = CONFIRMED
            else:
                outcome = CONTRADICTED
            verdicts.append(PositionVerdict(pos, value, actual, outcome))
        elif value == -1:
            actual = deep.value(rule, pos, profile.kind)
            if actual is not None:
                verdicts.append(PositionVerdict(pos, None, actual, CONTRADICTED))
    return VerificationReport(rule, profile.kind, tuple(verdicts))


def reconciled_values(
    completion: CompletionResult, report: VerificationReport
) -> Tuple[int, ...]:
    """Completed values with deep-run actuals taking precedence.

    Where the deep run halted, its value replaces the prediction; where
    it stayed divergent the prediction stands.  Unfilled positions are
    left as they were, so sequences the completer refused to touch keep
    their holes.
    """
    values = list(completion.completed.values)
    filled = set(completion.filled_positions)
    for verdict in report.verdicts:
        if verdict.position in filled and verdict.actual is not None:
            values[verdict.position] = verdict.actual
    return tuple(values)


def report_rows(completions: Sequence[CompletionResult]) -> str:
    """Cleansing report CSV: one row per sequence with filling activity."""
    lines = ["rule_number,kind,filled_count,gave_up_at,models"]
    for c in completions:
        if not c.filled_positions and c.gave_up_at is None:
            continue
        models = "; ".join(dict.fromkeys(m.describe() for m in c.models_used))
        gave = "" if c.gave_up_at is None else str(c.gave_up_at)
        rule = "" if c.completed.rule_number is None else str(c.completed.rule_number)
        lines.append(
            f"{rule},{c.completed.kind.value},{len(c.filled_positions)},{gave},\"{models}\""
        )
    return "\n".join(lines) + "\n"
