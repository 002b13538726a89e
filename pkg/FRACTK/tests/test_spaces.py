import itertools
import math

import pytest
from pydantic import ValidationError

from analysis.spaces import (
    Answer, SetDescriptor, SpaceParams, Verdict, conjugate_exponent, d0_density_decide, density_decide,
    density_window, kernel_window_check, nullity_classify, nullity_threshold, point_space_dimension,
    q1_equality_decide, trace_codomain_size,
)

KOCH_D = math.log(4.0) / math.log(3.0)


def _h(s: float, n: int = 2, p: float = 2.0) -> SpaceParams:
    return SpaceParams(family="H", s=s, p=p, n=n)


def _koch_set() -> SetDescriptor:
    return SetDescriptor(kind="dset", d=KOCH_D, n=2)


# ── Exponents ─────────────────────────────────────────────────
@pytest.mark.parametrize("p, expected", [(2.0, 2.0), (4.0, 4.0 / 3.0), (1.5, 3.0)])
def test_conjugate_exponent(p, expected):
    assert conjugate_exponent(p) == pytest.approx(expected)


@pytest.mark.parametrize("p", [1.0, 0.5, math.inf])
def test_conjugate_exponent_range(p):
    with pytest.raises(ValueError):
        conjugate_exponent(p)


def test_nullity_threshold_branches():
    assert float(nullity_threshold(2, 1, 2)) == pytest.approx(-0.5)
    assert float(nullity_threshold(1, 0.5, 0.5)) == pytest.approx(1.0)


# ── Nullity ───────────────────────────────────────────────────
def test_koch_boundary_nullity():
    assert nullity_classify(_h(0.0), _koch_set()).answer is Answer.NULL
    verdict = nullity_classify(_h(-1.0), _koch_set())
    assert verdict.answer is Answer.NON_NULL
    assert verdict.polarity is Answer.NO


def test_endpoint_of_a_compact_dset_is_null():
    verdict = nullity_classify(_h((KOCH_D - 2.0) / 2.0), _koch_set())
    assert verdict.answer is Answer.NULL
    assert verdict.theorem == "nullity:endpoint-compact-dset"


def test_endpoint_of_a_custom_set_is_borderline():
    gamma = SetDescriptor(kind="custom", d=KOCH_D, n=2)
    verdict = nullity_classify(_h((KOCH_D - 2.0) / 2.0), gamma)
    assert verdict.answer is Answer.BORDERLINE
    assert verdict.polarity is None


@pytest.mark.parametrize("family", ["B", "F"])
def test_small_p_nullity(family):
    sp = SpaceParams(family=family, s=3.0, p=0.5, n=1)
    verdict = nullity_classify(sp, SetDescriptor(kind="dset", d=0.5, n=1))
    assert verdict.answer is Answer.NULL
    assert verdict.theorem == "nullity:above-threshold-small-p"


def test_nullity_needs_a_null_set():
    with pytest.raises(ValueError):
        nullity_classify(_h(0.0), SetDescriptor(kind="custom", d=2.0, n=2))


# ── Thick-domain equality ─────────────────────────────────────
def _thick_domain() -> SetDescriptor:
    return SetDescriptor(kind="thick_domain_closure", d=1.5, n=2, thick=True, boundary_measure_zero=True)


def test_thick_domain_equality_on_the_h_scale():
    verdict = q1_equality_decide(_thick_domain(), _h(-7.0))
    assert verdict.answer is Answer.YES
    assert verdict.theorem == "thick-domain-equality:H"


def test_a_scale_at_zero_smoothness_is_unknown():
    verdict = q1_equality_decide(_thick_domain(), SpaceParams(family="B", s=0.0, p=2.0, q=3.0, n=2))
    assert verdict.answer is Answer.UNKNOWN
    assert verdict.reason


def test_a_scale_away_from_zero():
    verdict = q1_equality_decide(_thick_domain(), SpaceParams(family="B", s=-0.5, p=2.0, q=3.0, n=2))
    assert verdict.theorem == "thick-domain-equality:A"


def test_without_thickness_the_answer_is_unknown():
    domain = SetDescriptor(kind="custom", d=1.5, n=2, boundary_measure_zero=True)
    assert q1_equality_decide(domain, _h(-1.0)).answer is Answer.UNKNOWN
    assert q1_equality_decide(domain, _h(0.0)).theorem == "lp-boundary-null"


def test_boundary_of_positive_measure_is_unknown():
    domain = SetDescriptor(kind="custom", d=1.5, n=2, thick=True)
    assert q1_equality_decide(domain, _h(1.0)).answer is Answer.UNKNOWN


def test_e_thick_one_sided():
    domain = SetDescriptor(kind="custom", d=1.5, n=2, e_thick=True, boundary_measure_zero=True)
    assert not domain.thick
    assert q1_equality_decide(domain, _h(0.5)).theorem == "e-thick-one-sided:H"
    verdict = q1_equality_decide(domain, SpaceParams(family="B", s=0.5, p=2.0, q=2.0, n=2))
    assert verdict.theorem == "e-thick-one-sided"


@pytest.mark.parametrize("family", ["classical", "square"])
def test_snowflake_domains_are_thick(family):
    domain = SetDescriptor.snowflake_domain(family, math.pi / 6.0)
    assert domain.thick and domain.regular_closure
    assert q1_equality_decide(domain, _h(0.3)).answer is Answer.YES


# ── Density ───────────────────────────────────────────────────
@pytest.mark.parametrize("n, d, p, m, window", [
    (2, 1.0, 2.0, 0, (-1.5, -0.5)),
    (2, 1.5, 2.0, 1, (-2.25, -1.25)),
])
def test_density_window(n, d, p, m, window):
    assert density_window(n, d, p, m) == pytest.approx(window)


def test_density_window_shifts_with_m():
    lo0, hi0 = density_window(3, 2.0, 3.0, 0)
    lo1, hi1 = density_window(3, 2.0, 3.0, 1)
    assert (lo1, hi1) == pytest.approx((lo0 - 1.0, hi0 - 1.0))


@pytest.mark.parametrize("args", [(2, 0.0, 2.0, 0), (2, 1.0, 1.0, 0), (2, 1.0, 2.0, -1)])
def test_density_window_arguments(args):
    with pytest.raises(ValueError):
        density_window(*args)


def test_dense_inside_the_window():
    gamma = SetDescriptor(kind="hyperplane", d=2.0, n=3)
    verdict = density_decide(-0.9, -1.4, _h(0.0, n=3), gamma)
    assert verdict.answer is Answer.DENSE
    assert verdict.theorem == "density:window"
    assert verdict.window == pytest.approx((-1.5, -0.5))


def test_not_dense_across_the_nullity_threshold():
    verdict = density_decide(0.0, -1.0, _h(0.0), _koch_set())
    assert verdict.answer is Answer.NOT_DENSE
    assert verdict.theorem == "density:nullity-gap"


def test_smooth_counterexample():
    gamma = SetDescriptor(kind="smooth_disc", d=2.0, n=3)
    verdict = density_decide(-1.4, -1.6, _h(0.0, n=3), gamma)
    assert verdict.answer is Answer.NOT_DENSE
    assert verdict.theorem == "density:counterexample"
    assert verdict.details["M"] == 1


def test_window_endpoint_is_unknown_for_dsets():
    gamma = SetDescriptor(kind="dset", d=2.0, n=3)
    assert density_decide(-0.9, -1.5, _h(0.0, n=3), gamma).answer is Answer.UNKNOWN


def test_window_endpoint_for_hyperplanes():
    gamma = SetDescriptor(kind="hyperplane", d=2.0, n=3)
    verdict = density_decide(-0.9, -1.5, _h(0.0, n=3), gamma)
    assert verdict.answer is Answer.DENSE
    assert verdict.theorem == "density:hyperplane-endpoint"


def test_both_spaces_trivial():
    verdict = density_decide(0.0, -0.1, _h(0.0), _koch_set())
    assert verdict.answer is Answer.TRIVIAL
    assert verdict.polarity is Answer.YES


def test_density_index_order():
    with pytest.raises(ValueError):
        density_decide(-1.0, 0.0, _h(0.0), _koch_set())
    assert density_decide(-0.5, -0.5, _h(0.0), _koch_set()).theorem == "inclusion:identity"


def test_f_scale_off_two_is_unknown():
    sp = SpaceParams(family="F", s=0.0, p=2.0, q=3.0, n=3)
    gamma = SetDescriptor(kind="hyperplane", d=2.0, n=3)
    assert density_decide(-0.9, -1.4, sp, gamma).answer is Answer.UNKNOWN


def test_point_sets_use_the_point_rule():
    verdict = density_decide(-1.0, -2.0, _h(0.0, n=1), SetDescriptor(kind="point", d=0.0, n=1))
    assert verdict.answer is Answer.NOT_DENSE
    assert verdict.theorem == "point-support:not-dense"


# ── Point-supported spaces ────────────────────────────────────
@pytest.mark.parametrize("n, p, s, dim", [(2, 2.0, -3.0, 3), (1, 2.0, -2.0, 2), (2, 2.0, -1.0, 0), (3, 2.0, 0.0, 0)])
def test_point_space_dimension(n, p, s, dim):
    assert point_space_dimension(n, p, s) == dim


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_point_space_dimension_counts_multi_indices(n):
    for half_steps in range(0, 21):
        t = half_steps / 2.0
        s = -t - n * 0.5
        top = math.ceil(t)
        brute = sum(1 for beta in itertools.product(range(top + 1), repeat=n) if sum(beta) < t)
        assert point_space_dimension(n, 2.0, s) == brute


def test_point_inclusion_not_dense():
    verdict = d0_density_decide(-1.0, 2.0, 2.0, -2.0, 2.0, 2.0, 1)
    assert verdict.answer is Answer.NOT_DENSE
    assert verdict.details["dim1"] == 1
    assert verdict.details["dim2"] == 2
    assert verdict.details["difference"] == 1


def test_point_inclusion_trivial_and_equal():
    assert d0_density_decide(0.0, 2.0, 2.0, 0.0, 2.0, 2.0, 1).answer is Answer.TRIVIAL
    assert d0_density_decide(-1.2, 2.0, 2.0, -1.4, 2.0, 2.0, 1).answer is Answer.EQUAL


# ── Traces ────────────────────────────────────────────────────
@pytest.mark.parametrize("n, m, size", [(2, 0, 1), (2, 1, 3), (3, 2, 10)])
def test_trace_codomain_size(n, m, size):
    assert trace_codomain_size(n, m) == size


def test_kernel_window():
    verdict = kernel_window_check(2, 1.5, 2.0, 0, 0.4)
    assert verdict.answer is Answer.YES
    assert verdict.window == pytest.approx((0.25, 1.25))
    assert verdict.details["trace_components"] == 1
    assert kernel_window_check(2, 1.5, 2.0, 0, 1.25).answer is Answer.UNKNOWN
    assert kernel_window_check(2, 1.5, 2.0, 0, 0.1).answer is Answer.UNKNOWN


# ── Validation ────────────────────────────────────────────────
def test_definite_verdicts_need_a_theorem():
    with pytest.raises(ValidationError):
        Verdict(answer=Answer.YES)
    assert Verdict(answer=Answer.UNKNOWN, reason="open").polarity is None


@pytest.mark.parametrize("kwargs", [
    {"family": "H", "s": 0.0, "p": 2.0, "q": 3.0, "n": 2},
    {"family": "H", "s": 0.0, "p": 1.0, "n": 2},
    {"family": "B", "s": 0.0, "p": 0.0, "n": 2},
])
def test_space_params_validation(kwargs):
    with pytest.raises(ValidationError):
        SpaceParams(**kwargs)


def test_set_descriptor_normalisation():
    with pytest.raises(ValidationError):
        SetDescriptor(kind="point", d=1.0)
    with pytest.raises(ValidationError):
        SetDescriptor(kind="dset", d=3.0, n=2)
    assert not SetDescriptor(kind="hyperplane", d=2.0, n=3).compact
    thick = SetDescriptor(kind="custom", d=1.5, thick=True)
    assert thick.e_thick and thick.i_thick
    assert SetDescriptor(kind="custom", d=1.5, e_thick=True, i_thick=True).thick
