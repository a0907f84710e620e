import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import _oracle
from chshzones.measures import (ContextQuad, batch_functionals, binary_entropy,
                                chsh_e_value, chsh_value, chsh_variants,
                                entropic_variants, joint_entropy, marginal_entropy)
from chshzones.quantum import DomainError, JointDistribution, joint_distribution
from conftest import PI4, TABLE1_ROW1, TABLE1_ROW3, TABLE3_ROW1

TSIRELSON = 2 * math.sqrt(2)


def quantum_quad(angles, alpha=PI4):
    a0, a1, b0, b1 = angles
    return ContextQuad(*(joint_distribution(a, b, alpha) for a in (a0, a1) for b in (b0, b1)))


def quad_from_correlators(e):
    return ContextQuad(*(JointDistribution(((1 + x) / 4, (1 - x) / 4, (1 - x) / 4, (1 + x) / 4))
                         for x in e))


def test_binary_entropy_examples():
    assert binary_entropy(0) == 0
    assert binary_entropy(1) == 0
    assert binary_entropy(0.5) == 1
    assert binary_entropy(0.0224) == pytest.approx(0.15471169944056903, abs=1e-12)


def test_binary_entropy_domain():
    with pytest.raises(DomainError):
        binary_entropy(1.1)
    with pytest.raises(DomainError):
        binary_entropy(-1e-6)
    assert binary_entropy(-1e-13) == 0.0


def test_joint_entropy_examples():
    assert joint_entropy(quad_from_correlators([0] * 4).d00) == pytest.approx(2.0)
    assert joint_entropy(JointDistribution((0.5, 0, 0, 0.5))) == pytest.approx(1.0)
    assert joint_entropy(quad_from_correlators([-0.9552] * 4).d00) == pytest.approx(1.154711699440569, abs=1e-12)


def test_marginal_entropy_examples():
    assert marginal_entropy(joint_distribution(0.3, 2.0, PI4), "A") == pytest.approx(1.0, abs=1e-12)
    assert marginal_entropy(joint_distribution(0.0, 1.0, 0.0), "A") == 0.0
    assert marginal_entropy(joint_distribution(math.pi / 3, 0.2, math.pi / 8), "A") == pytest.approx(
        0.9078523006019283, abs=1e-12)
    with pytest.raises(ValueError):
        marginal_entropy(joint_distribution(0, 0, PI4), "C")


def test_quad_rejects_signalling():
    good = JointDistribution((0.25, 0.25, 0.25, 0.25))
    skew = JointDistribution((0.5, 0.25, 0.0, 0.25))
    with pytest.raises(DomainError):
        ContextQuad(good, skew, good, good)
    ContextQuad(good, skew, good, good, ns_tol=0.5)


def test_chsh_variants_examples():
    assert chsh_variants(quad_from_correlators([1, 1, 1, 1])).as_tuple() == (2, 2, 2, 2)
    sv = chsh_variants(quantum_quad(TABLE3_ROW1))
    assert sv.as_tuple() == pytest.approx((-1.7137, -2.1565, 1.4263, 1.5552), abs=1e-4)
    assert chsh_variants(quantum_quad(TABLE1_ROW3)).s1 == pytest.approx(-2.8284, abs=1e-4)


def test_chsh_value_examples():
    assert chsh_value(quantum_quad(TABLE1_ROW1)) == pytest.approx(2.248, abs=0.01)
    assert chsh_value(quantum_quad((1.97, 1.31, 1.22, 0.83))) == pytest.approx(2.22, abs=0.02)
    assert chsh_value(quad_from_correlators([0, 0, 0, 0])) == 0


def test_entropic_examples():
    for signs in itertools.product((1, -1), repeat=4):
        ev = entropic_variants(quad_from_correlators(signs))
        assert ev.as_tuple() == pytest.approx((0, 0, 0, 0), abs=1e-12)
    ev = entropic_variants(quantum_quad(TABLE3_ROW1))
    assert ev.t11 == pytest.approx(0.103, abs=0.01)
    assert (ev.t00, ev.t01, ev.t10) == pytest.approx((-1.264, -0.855, -0.519), abs=0.01)
    assert chsh_e_value(quantum_quad(TABLE1_ROW1)) == pytest.approx(0.2369, abs=0.005)
    assert chsh_e_value(quantum_quad(TABLE1_ROW3)) == pytest.approx(-1.205, abs=0.01)
    assert chsh_e_value(quad_from_correlators([0, 0, 0, 0])) == pytest.approx(-2.0)


def test_against_oracle_random_alpha():
    rng = np.random.default_rng(11)
    for _ in range(50):
        ang = rng.uniform(0, 2 * math.pi, 4)
        alpha = rng.uniform(0, PI4)
        e, s, t = _oracle.functionals(ang[:2], ang[2:], alpha)
        q = quantum_quad(ang, alpha)
        assert chsh_variants(q).as_tuple() == pytest.approx(s, abs=1e-10)
        ev = entropic_variants(q)
        for (i, j), v in t.items():
            assert ev.get(i, j) == pytest.approx(v, abs=1e-9)


correlators = st.lists(st.floats(-1, 1), min_size=4, max_size=4)


@settings(max_examples=300, deadline=None)
@given(correlators)
def test_sign_variant_identities(e):
    sv = chsh_variants(quad_from_correlators(e))
    e00, e01, e10, _ = e
    assert sv.s1 + sv.s2 == pytest.approx(2 * (e00 + e01), abs=1e-12)
    assert sv.s1 + sv.s3 == pytest.approx(2 * (e00 + e10), abs=1e-12)
    assert sv.s1 + sv.s4 == pytest.approx(2 * (e01 + e10), abs=1e-12)


def test_at_most_one_variant_exceeds_two():
    rng = np.random.default_rng(0)
    from chshzones.measures import sign_variants_from_correlators
    s = np.abs(np.array(sign_variants_from_correlators(*rng.uniform(-1, 1, (4, 100_000)))))
    assert (np.sum(s > 2, axis=0) <= 1).all()


def test_tsirelson_bound_and_batch_agreement():
    rng = np.random.default_rng(1)
    ang = rng.uniform(0, 2 * math.pi, (100_000, 4))
    for alpha in (0.0, 0.2, 0.5, PI4):
        corr, s1, t11 = batch_functionals(*ang.T, alpha)
        from chshzones.measures import sign_variants_from_correlators
        s = np.abs(np.array(sign_variants_from_correlators(*corr)))
        assert s.max() <= TSIRELSON + 1e-9
    for x in ang[:20]:
        q = quantum_quad(x, 0.5)
        _, s1, t11 = batch_functionals(*x, 0.5)
        assert float(s1) == pytest.approx(chsh_variants(q).s1, abs=1e-12)
        assert float(t11) == pytest.approx(chsh_e_value(q), abs=1e-12)


def _all_variants(ang, alpha):
    corr, _, _ = batch_functionals(*ang.T, alpha)
    from chshzones.measures import sign_variants_from_correlators
    return corr, np.array(sign_variants_from_correlators(*corr))


def test_entropic_violation_needs_correlative_violation():
    rng = np.random.default_rng(2)
    ang = rng.uniform(0, 2 * math.pi, (100_000, 4))
    _, s1, t11 = batch_functionals(*ang.T, PI4)
    _, s = _all_variants(ang, PI4)
    violating = t11 > 0
    assert violating.sum() > 1000
    assert (np.abs(s[:, violating]).max(axis=0) > 2).all()


def test_single_positive_entropic_variant():
    rng = np.random.default_rng(3)
    ang = rng.uniform(0, 2 * math.pi, (100_000, 4))
    # entropic variants are canonical t11 on the four within-party relabelings
    a0, a1, b0, b1 = ang.T
    t = [batch_functionals(x0, x1, y0, y1, PI4)[2]
         for x0, x1, y0, y1 in [(a0, a1, b0, b1), (a0, a1, b1, b0), (a1, a0, b0, b1), (a1, a0, b1, b0)]]
    positive = (np.array(t) > 0).sum(axis=0)
    assert positive.max() == 1
    for x in ang[:200]:
        ev = entropic_variants(quantum_quad(x))
        assert sum(v > 0 for v in ev.as_tuple()) <= 1


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_joint_entropy_closed_form_at_pi4(a, b):
    d = joint_distribution(a, b, PI4)
    expected = 1 + binary_entropy(min(1.0, max(0.0, (1 + d.correlator) / 2)))
    assert joint_entropy(d) == pytest.approx(expected, abs=1e-10)


def test_singles_consistent_across_contexts():
    q = quantum_quad((0.3, 1.2, 2.2, 5.0), 0.4)
    assert marginal_entropy(q.d00, "A") == pytest.approx(marginal_entropy(q.d01, "A"), abs=1e-12)
    assert marginal_entropy(q.d00, "B") == pytest.approx(marginal_entropy(q.d10, "B"), abs=1e-12)
