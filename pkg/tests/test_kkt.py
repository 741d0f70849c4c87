import numpy as np
import pytest

from ivkkt.kkt import (
    CERTIFIED,
    HYP_UNVERIFIED,
    SHAPE_ERROR,
    THEOREMS,
    VIOLATED,
    Certificate,
    InfeasibleCandidateError,
    Multipliers,
    ProbeSet,
    ShapeError,
    active_set,
    check_shape,
    check_slackness,
    default_decomposition,
    feasible_direction_probe,
    search_multipliers,
    verify,
    verify_gh_kkt,
    verify_split_kkt,
    verify_strong_kkt,
    verify_weighted_kkt,
)


def cert(text):
    return Certificate.parse(text)


# -- certificates and shapes -----------------------------------------------------


def test_certificate_text_roundtrip():
    for text in [
        "theorem=T32a lamL=1,1 lamU=1,1 mu=1,7,0,0,4.5",
        "theorem=T37a mu=0,1,0 c=2 bound=U",
        "theorem=T33 mu=1,0,0,0,2 Q=1|2|3|4,5",
        "theorem=T32b lamC=0.1,2 lamW=0.30000000000000004,1 mu=0,0",
    ]:
        c = cert(text)
        assert c.format() == text
        assert Certificate.parse(c.format()) == c
    c = cert("theorem=T37a mu=0,1,0 c=2 bound=U")
    assert c.multipliers.c == 1 and c.claimed_class == "strong-I"


@pytest.mark.parametrize(
    "text",
    ["lamL=1", "theorem=T99 mu=1", "theorem=T32a lamL=1 lamL=2", "theorem=T32a lamL=x", "theorem=T32a junk"],
)
def test_certificate_parse_errors(text):
    with pytest.raises(ShapeError):
        Certificate.parse(text)


@pytest.mark.parametrize(
    "text,match",
    [
        ("theorem=T32a lamL=1,1 mu=0,0,0", "missing lamU"),
        ("theorem=T32a lamL=1,1 lamU=1,1 mu=0,0,0 muL=1,1,1", "unexpected muL"),
        ("theorem=T32a lamL=1 lamU=1,1 mu=0,0,0", "needs 2 entries"),
        ("theorem=T32a lamL=0,1 lamU=1,1 mu=0,0,0", "> 0"),
        ("theorem=T32a lamL=1,1 lamU=1,1 mu=0,-1,0", ">= 0"),
        ("theorem=T32a lamL=1,1 lamU=1,1 mu=0,0", "needs 3 entries"),
        ("theorem=T32c lamL=1,2 lamU=2,2 mu=0,0,0", "lamL < lamU"),
        ("theorem=T35a lamL=1 lamU=1 mu=0,0,0", "index c is required"),
        ("theorem=T35a lamL=1 lamU=1 mu=0,0,0 c=3", "out of range"),
        ("theorem=T32a lamL=1,1 lamU=1,1 mu=0,0,0 c=1", "no objective index"),
        ("theorem=T37a mu=0,0,0 c=1 bound=C", "bound must be"),
        ("theorem=T36a muL=0,0,0 muU=0,0,0 c=1 bound=L", "no bound"),
        ("theorem=T33 mu=0,0,0", "t >= 2l"),
    ],
)
def test_shape_errors(text, match):
    with pytest.raises(ShapeError, match=match):
        check_shape(cert(text), 2, 3)


def test_decompositions():
    assert default_decomposition(5, 2) == ((0,), (1,), (2,), (3, 4))
    with pytest.raises(ShapeError):
        default_decomposition(3, 2)
    for q, match in [("1|2|3", "4 blocks"), ("1|2|3|3,4,5", "overlap"), ("1|2|3|4", "cover"), ("1|2|3|4,9", "range")]:
        with pytest.raises(ShapeError, match=match):
            check_shape(cert(f"theorem=T33 mu=0,0,0,0,0 Q={q}"), 2, 5)
    with pytest.raises(ShapeError, match="needs a decomposition"):
        check_shape(cert("theorem=T33 mu=0,0,0,0,0"), 2, 5)


def test_every_theorem_has_a_class_and_family():
    assert set(THEOREMS) == {
        "T32a", "T32b", "T32c", "T33", "T34a", "T34b", "T35a", "T35b", "T35c",
        "T36a", "T36b", "T37a", "T37b", "T38a", "T38b", "T41",
    }  # fmt: skip
    for spec in THEOREMS.values():
        assert spec.family in ("weighted", "split", "strong", "gh")


# -- problem helpers -------------------------------------------------------------


def test_active_set_and_slackness(mivop3, mivop4, mivop5):
    assert active_set(mivop3, mivop3.candidate) == {0, 1, 2, 4}
    assert active_set(mivop4, mivop4.candidate) == {2, 3, 4}
    assert active_set(mivop5, mivop5.candidate) == {0, 2}
    assert check_slackness(mivop3, mivop3.candidate, [[1, 7, 0, 0, 4.5]])
    assert not check_slackness(mivop3, mivop3.candidate, {"mu": [0, 0, 0, 1, 0]})
    with pytest.raises(InfeasibleCandidateError):
        active_set(mivop3, np.array([2.0, 2.0]))


def test_probe_sets(mivop3, relaxed):
    ps = ProbeSet.sample(mivop3, mivop3.candidate, 50, seed=3)
    assert len(ps) == 50 and ps.seed == 3 and "seed 3" in ps.label()
    again = ProbeSet.sample(mivop3, mivop3.candidate, 50, seed=3)
    assert all(np.array_equal(a, b) for a, b in zip(ps.directions, again.directions))
    dropped = ProbeSet.from_points(mivop3, mivop3.candidate, [mivop3.candidate, np.array([2.0, 1.0])])
    assert len(dropped) == 1 and dropped.requested == 2
    feas = ProbeSet.sample(relaxed, relaxed.candidate, 100, scope="feasible")
    assert 0 < len(feas) < 100
    assert all(g(p) <= 1e-8 for p in feas.sources for g in relaxed.constraints)
    with pytest.raises(ValueError):
        ProbeSet.sample(mivop3, mivop3.candidate, 10, scope="nearby")


# -- verification ----------------------------------------------------------------


def test_mivop3_certified(mivop3, probes3):
    v = verify(mivop3, mivop3.candidate, mivop3.certificate("T32a"), probes3)
    assert v.status == CERTIFIED and v.certified
    assert abs(v.min_residual) < 1e-8
    assert len(v.hypotheses) == 7 and all(h.holds for h in v.hypotheses)
    kv = v.key_values()
    assert kv["seed"] == "42" and kv["probes"] == "200" and kv["status"] == "certified"
    assert "seed 42" in v.report() and "status=certified" in v.report()


def test_wrong_multipliers_violate(mivop3, probes3):
    v = verify(mivop3, mivop3.candidate, cert("theorem=T32a lamL=1,1 lamU=1,1 mu=1,6,0,0,4.5"), probes3)
    assert v.status == VIOLATED and v.min_residual < -0.1
    assert v.worst["condition"] == "weighted L/U sum" and "source" in v.worst
    assert not v.hypotheses


def test_slackness_violation(mivop3, probes3):
    v = verify(mivop3, mivop3.candidate, cert("theorem=T32a lamL=1,1 lamU=1,1 mu=1,7,0,1,4.5"), probes3)
    # psi4 is inactive (-6), so mu4 = 1 breaks slackness and the linear cancellation
    assert v.status == VIOLATED
    assert v.slackness["mu"] == pytest.approx(6.0)


def test_shape_error_verdict(mivop3, probes3):
    v = verify(mivop3, mivop3.candidate, cert("theorem=T32a lamL=1,1 lamU=1,1 mu=1,7"), probes3)
    assert v.status == SHAPE_ERROR and "needs 5 entries" in v.message
    v = verify_weighted_kkt(mivop3, mivop3.candidate, cert("theorem=T34a lamL=1,1 lamU=1,1 muL=0,0,0,0,0 muU=0,0,0,0,0"), probes3)
    assert v.status == SHAPE_ERROR


def test_infeasible_candidate_is_violated(mivop3, probes3):
    v = verify(mivop3, np.array([1.5, 1.5]), mivop3.certificate("T32a"), probes3)
    assert v.status == VIOLATED and "violates" in v.message


def test_mivop4_split_certificate(mivop4, probes4):
    v = verify_split_kkt(mivop4, mivop4.candidate, mivop4.certificate("T34a"), probes4)
    assert v.status == CERTIFIED and not v.warnings


def test_hypotheses_unverified(mivop4, probes4):
    # conditions hold, but the weighted theorem needs LU-convex objectives and phi1 is not
    c = cert("theorem=T32a lamL=1,1 lamU=1,1 mu=0,0,4,2,6")
    v = verify(mivop4, mivop4.candidate, c, probes4)
    assert v.status == HYP_UNVERIFIED and v.conditions_hold and not v.certified
    failed = [h for h in v.hypotheses if not h.holds]
    assert failed and failed[0].name == "phi1 LU-convexity"
    assert verify(mivop4, mivop4.candidate, c, probes4, hypotheses=False).status == CERTIFIED


def test_zero_multipliers_on_active_set_warn(mivop4, probes4):
    c = cert("theorem=T36a muL=0,0,0,0,0 muU=0,0,0,0,0 c=1")
    v = verify(mivop4, mivop4.candidate, c, probes4, hypotheses=False)
    assert v.status == CERTIFIED
    assert any("zero on the whole active set" in w for w in v.warnings)


def test_strong_theorems(mivop4, probes4):
    c = cert("theorem=T37a mu=0,0,0,0,0 c=1 bound=L")
    assert verify_strong_kkt(mivop4, mivop4.candidate, c, probes4, hypotheses=False).status == CERTIFIED
    # T38a needs (phi^L)' < (phi^U)' strictly; both vanish for phi1
    c = cert("theorem=T38a mu=0,0,0,0,0 c=1 bound=L")
    v = verify_strong_kkt(mivop4, mivop4.candidate, c, probes4, hypotheses=False)
    assert v.status == VIOLATED and v.worst.get("strict")


def test_mivop5_gh_certificate(mivop5, probes5):
    v = verify_gh_kkt(mivop5, mivop5.candidate, mivop5.certificate("T41"), probes5)
    assert v.status == CERTIFIED
    assert len(v.gh_intervals) == len(probes5)
    assert max(max(abs(i.lo), abs(i.hi)) for i in v.gh_intervals) <= 1e-6
    bad = verify_gh_kkt(mivop5, mivop5.candidate, cert("theorem=T41 lam=3,1 mu=1,0,1"), probes5)
    assert bad.status == VIOLATED and "gH condition interval" in bad.message


def test_feasible_direction_probe(relaxed):
    ps = ProbeSet.sample(relaxed, relaxed.candidate, 100)
    rep = feasible_direction_probe(relaxed, relaxed.candidate, ps)
    assert rep.holds and rep.checked > 0


# -- search -------------------------------------------------------------------------


def test_search_finds_verifiable_certificates(mivop3, mivop4, mivop5, probes3, probes4, probes5):
    for prob, ps, tag in [(mivop3, probes3, "T32a"), (mivop4, probes4, "T34a"), (mivop5, probes5, "T41")]:
        res = search_multipliers(prob, prob.candidate, tag, ps)
        assert res.feasible, res.message
        assert res.certificate.theorem == tag
        assert verify(prob, prob.candidate, res.certificate, ps, hypotheses=False).conditions_hold
        assert min(min(v) for k, v in res.certificate.multipliers.values.items() if k.startswith("lam")) >= 1e-6


def test_search_single_index_reports_choice(mivop4, probes4):
    res = search_multipliers(mivop4, mivop4.candidate, "T37a", probes4)
    assert res.feasible and res.certificate.multipliers.c is not None
    assert res.certificate.multipliers.bound in ("L", "U")


def test_search_infeasible(relaxed, mivop3, probes3):
    ps = ProbeSet.sample(relaxed, relaxed.candidate, 100)
    res = search_multipliers(relaxed, relaxed.candidate, "T32a", ps)
    assert not res.feasible and "no multipliers" in res.message
    res = search_multipliers(mivop3, mivop3.candidate, "T38a", probes3)
    assert not res.feasible and len(res.tried) == 4
    res = search_multipliers(mivop3, np.array([1.5, 1.5]), "T32a", probes3)
    assert not res.feasible and "violates" in res.message
