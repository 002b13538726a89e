"""
Analysis Orchestrator — Verification Suite Controller
Builds prefractal pairs level by level, then runs the collar, inner-cube and
exterior-cube conditions for every level in parallel.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Callable, Optional

from analysis.thickness import check_cond1, check_cond2, check_cond3
from config import settings
from geometry.prefractal import PrefractalPair, build_pair

logger = logging.getLogger(__name__)

CONDITIONS = ("cond1", "cond2", "cond3")


@dataclass
class VerificationResult:
    family: str
    levels: list[int]
    reports: dict[int, dict] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        if self.errors:
            return False
        return all(r.get("satisfied", False) for level in self.reports.values() for r in level.values())

    def to_summary(self) -> str:
        parts = []
        for j in sorted(self.reports):
            flags = " ".join(f"{name}={'ok' if r.get('satisfied') else 'FAIL'}" for name, r in sorted(self.reports[j].items()))
            parts.append(f"j={j}: {flags}")
        if self.errors:
            parts.append(f"{len(self.errors)} error(s)")
        return " | ".join(parts) if parts else "No levels verified"

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "levels": self.levels,
            "satisfied": self.satisfied,
            "reports": {str(j): dict(sorted(r.items())) for j, r in sorted(self.reports.items())},
            "errors": sorted(self.errors),
        }


def _run_condition(name: str, pair: PrefractalPair, samples: Optional[int]) -> dict:
    if name == "cond1":
        return check_cond1(pair, samples=samples).model_dump()
    if name == "cond2":
        return check_cond2(pair, samples).model_dump()
    return check_cond3(pair, samples).model_dump()


def run_suite(
    family: str,
    levels: list[int],
    beta: Optional[float] = None,
    samples: Optional[int] = None,
    progress_callback: Optional[Callable[[str, float], None]] = None,
) -> VerificationResult:
    """
    Verify the three conditions of the general thickness theorem at each level.

    Args:
        family: 'classical' | 'square'
        levels: prefractal levels to check
        beta: apex half-angle for the classical family
        samples: cap on query points per condition (all when None)
        progress_callback: optional callable(stage_name, pct)

    Returns:
        VerificationResult with one report per (level, condition) and any task errors
    """
    result = VerificationResult(family=family, levels=list(levels))

    def _update(stage: str, pct: float):
        if progress_callback:
            progress_callback(stage, pct)

    # ── Stage 1: Build pairs ────────────────────────────────────
    pairs: dict[int, PrefractalPair] = {}
    for n, j in enumerate(levels):
        _update(f"Building level {j}...", 0.3 * n / max(1, len(levels)))
        try:
            pairs[j] = build_pair(family, j, beta)
        except ValueError as e:
            result.errors.append(f"level {j}: {e}")

    # ── Stage 2: Parallel condition checks ──────────────────────
    _update("Checking conditions...", 0.3)
    tasks = {(j, name): (pair, name) for j, pair in pairs.items() for name in CONDITIONS}
    done = 0
    with ThreadPoolExecutor(max_workers=settings.threads) as executor:
        future_map = {
            executor.submit(_run_condition, name, pair, samples): key
            for key, (pair, name) in tasks.items()
        }
        for future in as_completed(future_map):
            j, name = future_map[future]
            try:
                result.reports.setdefault(j, {})[name] = future.result()
            except Exception as e:
                logger.warning("%s at level %d failed: %s", name, j, e)
                result.errors.append(f"level {j} {name}: {e}")
            done += 1
            _update(f"{name} j={j}", 0.3 + 0.7 * done / max(1, len(tasks)))

    _update("Done", 1.0)
    logger.info("suite %s levels=%s: %s", family, levels, result.to_summary())
    return result
