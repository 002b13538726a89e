"""
Analysis: Function-Space Index Calculus
Decision procedures over smoothness indices: nullity of closed sets, thick-domain
equalities, density windows between supported spaces, point-supported spans,
trace codomain sizes and the trace-kernel window.

Every definite answer carries the tag of the statement it rests on; anything the
statements do not cover comes back Unknown or Borderline.
"""
import logging
import math
from enum import Enum
from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

from geometry.classical import ClassicalParams, classical_dimension
from geometry.square import square_dimension
from utils.numeric import Number, as_exact, ceil_exact, compare, floor_exact, is_integer, to_float

logger = logging.getLogger(__name__)

SetKind = Literal[
    "dset", "point", "hyperplane", "snowflake_boundary", "thick_domain_closure", "custom", "smooth_disc",
]
_ENDPOINT_NULL_KINDS = ("hyperplane", "snowflake_boundary", "smooth_disc")
_DSET_KINDS = ("dset", "point", "hyperplane", "snowflake_boundary", "smooth_disc")
_SMOOTH_KINDS = ("hyperplane", "smooth_disc")


class Answer(str, Enum):
    YES = "Yes"
    NO = "No"
    BORDERLINE = "Borderline"
    UNKNOWN = "Unknown"
    NULL = "Null"
    NON_NULL = "NonNull"
    DENSE = "Dense"
    NOT_DENSE = "NotDense"
    TRIVIAL = "Trivial"
    EQUAL = "Equal"


_POSITIVE = {Answer.YES, Answer.NULL, Answer.DENSE, Answer.TRIVIAL, Answer.EQUAL}
_NEGATIVE = {Answer.NO, Answer.NON_NULL, Answer.NOT_DENSE}


class SpaceParams(BaseModel):
    """A^s_{p,q}(ℝⁿ); family H is F with q = 2 and needs 1 < p < ∞."""
    family: Literal["B", "F", "H"]
    s: float
    p: float = Field(gt=0.0)
    q: float = Field(default=2.0, gt=0.0)
    n: int = Field(ge=1)

    @model_validator(mode="after")
    def _h_scale(self):
        if not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ValueError("p and q must be finite")
        if self.family == "H":
            if self.q != 2.0:
                raise ValueError(f"family H fixes q = 2, got q={self.q}")
            if not self.p > 1.0:
                raise ValueError(f"family H needs 1 < p < inf, got p={self.p}")
        return self


class SetDescriptor(BaseModel):
    """A closed set Γ ⊂ ℝⁿ (or a domain Ω through its boundary flags)."""
    kind: SetKind
    d: float = Field(ge=0.0)
    n: Optional[int] = Field(default=None, ge=1)
    compact: bool = True
    boundary_measure_zero: bool = False
    thick: bool = False
    e_thick: bool = False
    i_thick: bool = False
    regular_closure: bool = False

    @model_validator(mode="after")
    def _consistent(self):
        if self.kind == "point" and self.d != 0.0:
            raise ValueError(f"a point set has d = 0, got d={self.d}")
        if self.n is not None and self.d > self.n:
            raise ValueError(f"d must not exceed n={self.n}, got d={self.d}")
        if self.kind == "hyperplane" and self.compact:
            self.compact = False
        if self.thick:
            self.e_thick = self.i_thick = True
        elif self.e_thick and self.i_thick:
            self.thick = True
        return self

    @classmethod
    def snowflake_boundary(cls, family: str, beta: Optional[float] = None) -> "SetDescriptor":
        return cls(kind="snowflake_boundary", d=_snowflake_d(family, beta), n=2, compact=True)

    @classmethod
    def snowflake_domain(cls, family: str, beta: Optional[float] = None) -> "SetDescriptor":
        """The snowflake domain: thick, |∂Ω| = 0 and (Ω̄)° = Ω, described by its boundary dimension."""
        return cls(kind="thick_domain_closure", d=_snowflake_d(family, beta), n=2, compact=True,
                   boundary_measure_zero=True, thick=True, regular_closure=True)


def _snowflake_d(family: str, beta: Optional[float]) -> float:
    if family == "classical":
        if beta is None:
            raise ValueError("the classical family needs beta")
        return classical_dimension(ClassicalParams(beta))
    if family == "square":
        return square_dimension()
    raise ValueError(f"family must be classical or square, got {family!r}")


class Verdict(BaseModel):
    answer: Answer
    theorem: Optional[str] = None
    window: Optional[tuple[float, float]] = None
    reason: Optional[str] = None
    details: dict = Field(default_factory=dict)

    @property
    def polarity(self) -> Optional[Answer]:
        """Yes/No reading of the answer; None for Borderline and Unknown."""
        if self.answer in _POSITIVE:
            return Answer.YES
        if self.answer in _NEGATIVE:
            return Answer.NO
        return None

    @model_validator(mode="after")
    def _tagged(self):
        if self.polarity is not None and not self.theorem:
            raise ValueError(f"a {self.answer.value} verdict needs a theorem tag")
        return self


def _unknown(reason: str, **kwargs) -> Verdict:
    return Verdict(answer=Answer.UNKNOWN, reason=reason, **kwargs)


# ── Exponents and thresholds ──────────────────────────────────
def _conjugate(p: Number) -> Number:
    p = as_exact(p)
    if compare(p, 1) <= 0:
        raise ValueError(f"conjugate exponent needs p > 1, got {p}")
    return p / (p - 1)


def conjugate_exponent(p: float) -> float:
    """p′ with 1/p + 1/p′ = 1."""
    if not math.isfinite(float(p)):
        raise ValueError(f"conjugate exponent needs finite p > 1, got {p}")
    return to_float(_conjugate(p))


def nullity_threshold(n: int, d: Number, p: Number) -> Number:
    """(d−n)/p′ for 1 < p < ∞, n(1/p − 1) for 0 < p ≤ 1."""
    p = as_exact(p)
    if compare(p, 1) > 0:
        return (as_exact(d) - n) / _conjugate(p)
    return n * (1 / p - 1)


def _check_codimension(n: int, d: Number) -> None:
    if compare(as_exact(d), n) >= 0:
        raise ValueError(f"the set must have zero Lebesgue measure (d < n={n}), got d={d}")


def _endpoint_null(sp: SpaceParams, gamma: SetDescriptor) -> bool:
    """H^{(d−n)/p′}_{p,Γ} = {0} for compact d-sets and hyperplanes with 0 < d < n."""
    if sp.family != "H" or not (0.0 < gamma.d < sp.n):
        return False
    if gamma.kind == "dset":
        return gamma.compact
    return gamma.kind in _ENDPOINT_NULL_KINDS


# ── Nullity ───────────────────────────────────────────────────
def nullity_classify(sp: SpaceParams, gamma: SetDescriptor) -> Verdict:
    _check_codimension(sp.n, gamma.d)
    s = as_exact(sp.s)
    large_p = compare(as_exact(sp.p), 1) > 0
    thr = nullity_threshold(sp.n, gamma.d, sp.p)
    details = {"threshold": to_float(thr)}
    side = compare(s, thr)
    if side > 0:
        tag = "nullity:above-threshold" if large_p else "nullity:above-threshold-small-p"
        return Verdict(answer=Answer.NULL, theorem=tag, details=details)
    if side < 0:
        tag = "nullity:below-threshold" if large_p else "nullity:below-threshold-small-p"
        return Verdict(answer=Answer.NON_NULL, theorem=tag, details=details)
    if large_p and _endpoint_null(sp, gamma):
        return Verdict(answer=Answer.NULL, theorem="nullity:endpoint-compact-dset", details=details)
    return Verdict(answer=Answer.BORDERLINE, theorem="nullity:threshold",
                   reason="s sits on the nullity threshold where behaviour depends on the set", details=details)


# ── Thick-domain equality ─────────────────────────────────────
def _positive_branch_floor(sp: SpaceParams) -> Number:
    p, q = as_exact(sp.p), as_exact(sp.q)
    low = min(1, p, q) if sp.family == "F" else min(1, p)
    return sp.n * (1 / low - 1)


def q1_equality_decide(domain: SetDescriptor, sp: SpaceParams) -> Verdict:
    """
    Decide Ã^s_{p,q}(Ω) = A^s_{p,q,Ω̄}. Answers Yes from the thick-domain corollaries or
    the one-sided E-thick / I-thick results, and Unknown otherwise; never No, since
    thickness is sufficient but not necessary.
    """
    s, p, q = as_exact(sp.s), as_exact(sp.p), as_exact(sp.q)
    if not domain.boundary_measure_zero:
        return _unknown("the boundary must have zero Lebesgue measure")
    banach = compare(p, 1) > 0 and compare(q, 1) > 0
    if sp.family == "H":
        if domain.thick:
            return Verdict(answer=Answer.YES, theorem="thick-domain-equality:H")
        if compare(s, 0) == 0:
            return Verdict(answer=Answer.YES, theorem="lp-boundary-null",
                           reason="s = 0 needs only a null boundary")
        if domain.e_thick and compare(s, 0) > 0:
            return Verdict(answer=Answer.YES, theorem="e-thick-one-sided:H")
    elif domain.thick and banach and compare(s, 0) != 0:
        return Verdict(answer=Answer.YES, theorem="thick-domain-equality:A")
    if domain.e_thick and compare(s, _positive_branch_floor(sp)) > 0:
        return Verdict(answer=Answer.YES, theorem="e-thick-one-sided")
    if domain.i_thick and domain.regular_closure and banach and compare(s, 0) < 0:
        return Verdict(answer=Answer.YES, theorem="i-thick-one-sided")
    if compare(s, 0) == 0:
        return _unknown("s = 0 on the A-scale is outside the thick-domain corollaries")
    return _unknown("no thickness result applies to this domain and index range")


# ── Density ───────────────────────────────────────────────────
def _window_exact(n: int, d: Number, p: Number, m: int) -> tuple[Number, Number]:
    hi = -(n - as_exact(d)) / _conjugate(p) - m
    return hi - 1, hi


def density_window(n: int, d: float, p: float, m: int) -> tuple[float, float]:
    """Open window (−(n−d)/p′−m−1, −(n−d)/p′−m) on which supported spaces are dense in each other."""
    if not 0.0 < d < n:
        raise ValueError(f"d must lie in (0, n={n}), got {d}")
    if not (1.0 < p and math.isfinite(p)):
        raise ValueError(f"p must lie in (1, inf), got {p}")
    if m < 0 or int(m) != m:
        raise ValueError(f"m must be a non-negative integer, got {m}")
    lo, hi = _window_exact(n, d, p, int(m))
    return to_float(lo), to_float(hi)


def density_decide(s1: Number, s2: Number, sp: SpaceParams, gamma: SetDescriptor) -> Verdict:
    """Is A^{s₁}_{p,q,Γ} dense in A^{s₂}_{p,q,Γ}? (s₁ ≥ s₂, the inclusion holds)."""
    s1, s2 = as_exact(s1), as_exact(s2)
    if compare(s1, s2) < 0:
        raise ValueError(f"need s1 >= s2, got s1={to_float(s1)}, s2={to_float(s2)}")
    n, p = sp.n, as_exact(sp.p)
    if gamma.kind == "point" or gamma.d == 0.0:
        return d0_density_decide(s1, sp.p, sp.q, s2, sp.p, sp.q, n)
    _check_codimension(n, gamma.d)
    if compare(s1, s2) == 0:
        return Verdict(answer=Answer.DENSE, theorem="inclusion:identity", reason="s1 = s2 gives the same space")
    if compare(p, 1) <= 0:
        return _unknown("density results need 1 < p < inf")

    thr = -(n - as_exact(gamma.d)) / _conjugate(p)
    above1, above2 = compare(s1, thr), compare(s2, thr)
    at_s1 = SpaceParams(family=sp.family, s=to_float(s1), p=sp.p, q=sp.q, n=n)
    s1_null = above1 > 0 or (above1 == 0 and _endpoint_null(at_s1, gamma))
    if s1_null and above2 < 0:
        return Verdict(answer=Answer.NOT_DENSE, theorem="density:nullity-gap",
                       reason="nullity", details={"threshold": to_float(thr)})
    if s1_null and above2 > 0:
        return Verdict(answer=Answer.TRIVIAL, theorem="nullity:above-threshold",
                       reason="both spaces are {0}", details={"threshold": to_float(thr)})
    if above1 >= 0:
        return _unknown("s1 sits on the nullity threshold", details={"threshold": to_float(thr)})

    if sp.family == "F" and sp.q != 2.0:
        return _unknown("density windows are established for the B and H scales only")
    if sp.family == "B" and compare(as_exact(sp.q), 1) <= 0:
        return _unknown("density windows need 1 < q < inf")
    if gamma.kind not in _DSET_KINDS:
        return _unknown("density windows need a d-set")

    m = ceil_exact(thr - s1) - 1
    lo, hi = _window_exact(n, gamma.d, p, m)
    window = (to_float(lo), to_float(hi))
    if compare(s2, lo) > 0:
        return Verdict(answer=Answer.DENSE, theorem="density:window", window=window, details={"m": m})
    if compare(s2, lo) == 0:
        if gamma.kind == "hyperplane" and sp.family == "H" and is_integer(gamma.d) and gamma.d == n - 1:
            return Verdict(answer=Answer.DENSE, theorem="density:hyperplane-endpoint", window=window,
                           details={"m": m})
        return _unknown("s2 is the limiting endpoint of the density window", window=window,
                        details={"m": m})

    if gamma.kind in _SMOOTH_KINDS and is_integer(gamma.d):
        big_m = floor_exact(thr - s1) + 1
        cut = thr - big_m
        if big_m >= 1 and compare(s2, cut) < 0 and compare(cut, s1) < 0:
            return Verdict(answer=Answer.NOT_DENSE, theorem="density:counterexample", window=window,
                           reason="counterexample", details={"M": big_m, "s_M": to_float(-cut)})
        return _unknown("the indices straddle a window endpoint without a strict counterexample",
                        window=window)
    return _unknown("optimality of density windows is open for this set", window=window)


# ── Point-supported spaces ────────────────────────────────────
def _span_threshold(n: int, p: Number, s: Number) -> Number:
    return -as_exact(s) - n * (1 - 1 / as_exact(p))


def point_space_dimension(n: int, p: float, s: float) -> int:
    """dim span{D^βδ : |β| < −s − n(1 − 1/p)}."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not p > 0.0:
        raise ValueError(f"p must be positive, got {p}")
    t = _span_threshold(n, p, s)
    if compare(t, 0) <= 0:
        return 0
    top = ceil_exact(t) - 1
    return math.comb(top + n, n)


def d0_density_decide(s1: Number, p1: float, q1: float, s2: Number, p2: float, q2: float, n: int) -> Verdict:
    """Inclusion A^{s₁}_{p₁,q₁,Γ} ⊂ A^{s₂}_{p₂,q₂,Γ} for a finite point set Γ."""
    for name, v in (("p1", p1), ("q1", q1), ("p2", p2), ("q2", q2)):
        if not v > 0.0:
            raise ValueError(f"{name} must be positive, got {v}")
    t1 = as_exact(s1) + n * (1 - 1 / as_exact(p1))
    t2 = as_exact(s2) + n * (1 - 1 / as_exact(p2))
    dims = {"dim1": point_space_dimension(n, p1, s1), "dim2": point_space_dimension(n, p2, s2)}
    if compare(t1, 0) >= 0 and compare(t2, 0) >= 0:
        return Verdict(answer=Answer.TRIVIAL, theorem="point-support:trivial", details=dims)
    f1, f2 = floor_exact(t1), floor_exact(t2)
    if f1 == f2 < 0:
        return Verdict(answer=Answer.EQUAL, theorem="point-support:equal", details=dims)
    if f2 < 0 and f1 > f2:
        dims["difference"] = dims["dim2"] - dims["dim1"]
        return Verdict(answer=Answer.NOT_DENSE, theorem="point-support:not-dense", details=dims)
    return _unknown("the floors do not describe an inclusion of point-supported spaces", details=dims)


# ── Traces ────────────────────────────────────────────────────
def trace_codomain_size(n: int, m: int) -> int:
    """N_m = |{β ∈ ℕ₀ⁿ : |β| ≤ m}|."""
    if n < 1 or m < 0:
        raise ValueError(f"need n >= 1 and m >= 0, got n={n}, m={m}")
    return math.comb(n + m, n)


KERNEL_CONSEQUENCES = (
    "ker Tr_{Γ,m} = H̃^s_p(Γᶜ)",
    "the dual of the trace space identifies with A^{-s}_{p′,Γ} isomorphically",
    "Ã^{s₂}(Γᶜ) ∩ A^{s₁} = Ã^{s₁}(Γᶜ) for s₂ ≤ s₁ in the window",
    "H^s_{p,0}(Ω) = ker Tr^Ω_{Γ,m} for interior regular Ω with ∂Ω = Γ",
)


def kernel_window_check(n: int, d: float, p: float, m: int, s: float) -> Verdict:
    """Does s lie strictly inside ((n−d)/p + m, (n−d)/p + m + 1)?"""
    if not 0.0 < d < n:
        raise ValueError(f"d must lie in (0, n={n}), got {d}")
    if not (1.0 < p and math.isfinite(p)):
        raise ValueError(f"p must lie in (1, inf), got {p}")
    if m < 0 or int(m) != m:
        raise ValueError(f"m must be a non-negative integer, got {m}")
    lo = (n - as_exact(d)) / as_exact(p) + int(m)
    hi = lo + 1
    window = (to_float(lo), to_float(hi))
    s = as_exact(s)
    if compare(s, lo) > 0 and compare(s, hi) < 0:
        return Verdict(answer=Answer.YES, theorem="trace-kernel-window", window=window,
                       details={"consequences": list(KERNEL_CONSEQUENCES),
                                "trace_components": trace_codomain_size(n, int(m))})
    if compare(s, hi) == 0:
        return _unknown("the right endpoint of the trace-kernel window is an open problem", window=window)
    return _unknown("hypothesis fails: s lies outside the trace-kernel window", window=window)
