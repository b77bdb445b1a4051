"""Cross-space comparison of function catalogs.

Functions match across spaces by exact equality of their cleansed
21-output tuples.  The runtime metric of an algorithm is the average
of its convergent runtimes over inputs 0..20 (an exact rational, so
ties stay ties), and each function contributes its fastest and slowest
algorithm per space.

The class-distribution table covers the five growth classes O(n) to
O(Exp).  An algorithm counts as constant, and is excluded, when its
runtime sequence has at least one divergent entry and all its
convergent entries are equal (the all-divergent sequence included);
every included algorithm whose growth is at most linear lands in the
O(n) row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .analyzer import (
    AlgorithmProfile,
    ComplexityClass,
    FunctionProfile,
    SpaceAnalysis,
    classify_complexity,
)

GROWTH_CLASSES = (
    ComplexityClass.On,
    ComplexityClass.On2,
    ComplexityClass.On3,
    ComplexityClass.On4,
    ComplexityClass.OExp,
)


def _is_table_constant(runtimes: Sequence[int]) -> bool:
    conv = [r for r in runtimes if r != -1]
    if len(conv) == len(runtimes):
        return False
    return all(v == conv[0] for v in conv) if conv else True


def table_class(runtimes: Sequence[int]) -> Optional[ComplexityClass]:
    """Growth-class row of an algorithm, or None when excluded as constant."""
    if _is_table_constant(runtimes):
        return None
    cls = classify_complexity(runtimes)
    if cls is None or cls <= ComplexityClass.On:
        return ComplexityClass.On
    return cls


def class_distribution(
    analysis_or_algorithms,
) -> Dict[ComplexityClass, float]:
    """Per-class fractions over non-constant algorithms, summing to 1."""
    algorithms = (
        analysis_or_algorithms.algorithms
        if isinstance(analysis_or_algorithms, SpaceAnalysis)
        else list(analysis_or_algorithms)
    )
    counts = {cls: 0 for cls in GROWTH_CLASSES}
    included = 0
    for alg in algorithms:
        cls = table_class(alg.runtimes)
        if cls is None:
            continue
        counts[cls] += 1
        included += 1
    if included == 0:
        raise ValueError("no non-constant algorithms to tabulate")
    return {cls: counts[cls] / included for cls in GROWTH_CLASSES}


def _metric(alg: AlgorithmProfile) -> Optional[Fraction]:
    conv = [r for r in alg.runtimes if r != -1]
    return Fraction(sum(conv), len(conv)) if conv else None


@dataclass(frozen=True)
class FunctionMatch:
    outputs: Tuple[int, ...]
    algorithms_a: Tuple[AlgorithmProfile, ...]
    algorithms_b: Tuple[AlgorithmProfile, ...]

    def fastest(self, side: str) -> Optional[Fraction]:
        algs = self.algorithms_a if side == "a" else self.algorithms_b
        metrics = [m for m in (_metric(a) for a in algs) if m is not None]
        return min(metrics) if metrics else None

    def slowest(self, side: str) -> Optional[Fraction]:
        algs = self.algorithms_a if side == "a" else self.algorithms_b
        metrics = [m for m in (_metric(a) for a in algs) if m is not None]
        return max(metrics) if metrics else None


def match_functions(
    space_a: SpaceAnalysis,
    space_b: SpaceAnalysis,
    expect_containment: Optional[bool] = None,
) -> List[FunctionMatch]:
    """Join two catalogs on output tuples.

    With expect_containment (defaulting to true when both stores cover
    their full spaces and b has at least as many states), every
    function of a must appear in b; a miss is a fatal consistency
    error.
    """
    if expect_containment is None:
        full_a = space_a.store.metadata["machine_set"]["kind"] == "all"
        full_b = space_b.store.metadata["machine_set"]["kind"] == "all"
        expect_containment = (
            full_a and full_b and space_b.params.states >= space_a.params.states
        )
    by_out_b = {f.outputs: f for f in space_b.functions}
    matches: List[FunctionMatch] = []
    missing: List[Tuple[int, ...]] = []
    for fa in space_a.functions:
        fb = by_out_b.get(fa.outputs)
        if fb is None:
            missing.append(fa.outputs)
            continue
        matches.append(
            FunctionMatch(
                outputs=fa.outputs,
                algorithms_a=fa.algorithms,
                algorithms_b=fb.algorithms,
            )
        )
    if expect_containment and missing:
        raise RuntimeError(
            f"{len(missing)} functions of the smaller space are missing from "
            f"the larger one; first: {missing[0]}"
        )
    return matches


@dataclass(frozen=True)
class FunctionSpeedup:
    outputs: Tuple[int, ...]
    fastest_a: Optional[Fraction]
    fastest_b: Optional[Fraction]
    slowest_a: Optional[Fraction]
    slowest_b: Optional[Fraction]
    faster_algorithms_b: int
    slower_algorithms_b: int


@dataclass(frozen=True)
class SpeedupReport:
    functions: Tuple[FunctionSpeedup, ...]
    total_algorithms_b: int

    @property
    def functions_with_speedup(self) -> int:
        return sum(
            1
            for f in self.functions
            if f.fastest_a is not None
            and f.fastest_b is not None
            and f.fastest_b < f.fastest_a
        )

    @property
    def speedup_fraction(self) -> float:
        return self.functions_with_speedup / len(self.functions)

    @property
    def faster_algorithm_count(self) -> int:
        return sum(f.faster_algorithms_b for f in self.functions)

    @property
    def mean_speedup_factor(self) -> float:
        """Average of fastest_a / fastest_b over functions sped up in b."""
        factors = [
            f.fastest_a / f.fastest_b
            for f in self.functions
            if f.fastest_a is not None
            and f.fastest_b is not None
            and f.fastest_b < f.fastest_a
        ]
        if not factors:
            return math.nan
        return sum(factors) / len(factors)

    def slowdown_factors(self) -> List[float]:
        """Worst algorithm in b against the best in a, per function."""
        return [
            f.slowest_b / f.fastest_a
            for f in self.functions
            if f.fastest_a is not None
            and f.slowest_b is not None
            and f.slowest_b > f.fastest_a
        ]

    @property
    def mean_slowdown_factor(self) -> float:
        factors = self.slowdown_factors()
        return sum(factors) / len(factors) if factors else math.nan

    @property
    def max_slowdown_factor(self) -> float:
        factors = self.slowdown_factors()
        return max(factors) if factors else math.nan


def speedup_stats(matches: Sequence[FunctionMatch]) -> SpeedupReport:
    """Quantify speed-ups and slow-downs from space a to space b."""
    rows: List[FunctionSpeedup] = []
    total_b = 0
    for m in matches:
        fast_a = m.fastest("a")
        total_b += len(m.algorithms_b)
        faster = slower = 0
        if fast_a is not None:
            for alg in m.algorithms_b:
                metric = _metric(alg)
                if metric is None:
                    continue
                if metric < fast_a:
                    faster += 1
                elif metric > fast_a:
                    slower += 1
        rows.append(
            FunctionSpeedup(
                outputs=m.outputs,
                fastest_a=fast_a,
                fastest_b=m.fastest("b"),
                slowest_a=m.slowest("a"),
                slowest_b=m.slowest("b"),
                faster_algorithms_b=faster,
                slower_algorithms_b=slower,
            )
        )
    return SpeedupReport(functions=tuple(rows), total_algorithms_b=total_b)


def minimal_class(algorithms: Sequence[AlgorithmProfile]) -> Optional[ComplexityClass]:
    classes = [
        c for c in (classify_complexity(a.runtimes) for a in algorithms) if c is not None
    ]
    return min(classes) if classes else None


def essential_speedup_violations(
    matches: Sequence[FunctionMatch],
) -> List[Tuple[Tuple[int, ...], ComplexityClass, ComplexityClass]]:
    """Matched functions whose best growth class improves in space b.

    Expected empty: a richer space may be faster by constants but not
    drop a complexity class.
    """
    violations = []
    for m in matches:
        cls_a = minimal_class(m.algorithms_a)
        cls_b = minimal_class(m.algorithms_b)
        if cls_a is not None and cls_b is not None and cls_b < cls_a:
            violations.append((m.outputs, cls_a, cls_b))
    return violations


def class_correlation(
    dist_a: Dict[ComplexityClass, float], dist_b: Dict[ComplexityClass, float]
) -> float:
    """Pearson coefficient between two class-fraction vectors."""
    xs = [dist_a[c] for c in GROWTH_CLASSES]
    ys = [dist_b[c] for c in GROWTH_CLASSES]
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    if vx == 0 or vy == 0:
        raise ValueError("zero-variance distribution has no correlation")
    return cov / math.sqrt(vx * vy)


def export_class_distribution_csv(
    distributions: Dict[str, Dict[ComplexityClass, float]]
) -> str:
    names = list(distributions)
    lines = ["class," + ",".join(names)]
    for cls in GROWTH_CLASSES:
        row = ",".join(f"{distributions[n][cls]:.6f}" for n in names)
        lines.append(f"{cls.label()},{row}")
    return "\n".join(lines) + "\n"


def export_function_classes_csv(matches: Sequence[FunctionMatch]) -> str:
    lines = ["outputs,classes_a,classes_b,fastest_a,fastest_b"]
    for m in matches:
        cls_a = sorted(
            {c.label() for c in (classify_complexity(a.runtimes) for a in m.algorithms_a) if c}
        )
        cls_b = sorted(
            {c.label() for c in (classify_complexity(a.runtimes) for a in m.algorithms_b) if c}
        )
        out = " ".join(str(v) for v in m.outputs)
        fa = m.fastest("a")
        fb = m.fastest("b")
        lines.append(
            f"\"{out}\",\"{'; '.join(cls_a)}\",\"{'; '.join(cls_b)}\","
            f"{'' if fa is None else fa},{'' if fb is None else fb}"
        )
    return "\n".join(lines) + "\n"
