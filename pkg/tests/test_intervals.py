import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from posthoc import evalues as ev
from posthoc.errors import DomainError, EmptyIntervalError, InsufficientSamplesError, NoRootError
from posthoc.intervals import (ConfSeqHandle, Interval, Method, anchor_lambda, anchor_ratio, ci_iwr,
                               ci_mix_iwr, ci_mix_reg, ci_reg, ci_rws, ci_wald, cs_rws, invert_evalue,
                               solve_y_star, width_factor)
from posthoc.summary import SampleSummary, summarize


def random_summaries(seed, k=40, n_range=(20, 5000)):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(k):
        n = int(rng.integers(*n_range))
        sd = float(rng.uniform(0.1, 10))
        mean = float(rng.normal(0, 5))
        ssd = sd * sd * float(rng.chisquare(n - 1))
        out.append((SampleSummary(n, mean, ssd), float(rng.uniform(0.001, 0.5))))
    return out


def all_methods(lam=2.5):
    return [Method("iwr", lam=lam), Method("mix-iwr"), Method("mix-iwr", kappa=5.0), Method("rws"),
            Method("rws", delta=0.1), Method("reg", lam=lam), Method("mix-reg")]


class TestInterval:
    def test_kinds(self):
        b = Interval.around(1.0, 0.5)
        assert (b.lo, b.hi, b.width) == (0.5, 1.5, 1.0)
        assert b.contains(1.2) and not b.contains(1.5)
        r = Interval.real_line()
        assert r.vacuous and r.width == math.inf and r.contains(1e300)
        e = Interval.empty(2.0)
        assert e.width == 0 and not e.contains(2.0) and not e.vacuous

    def test_subset(self):
        small, big = Interval.around(0, 1), Interval.around(0, 2)
        assert small.is_subset_of(big) and not big.is_subset_of(small)
        assert Interval.empty().is_subset_of(small) and big.is_subset_of(Interval.real_line())
        assert not Interval.real_line().is_subset_of(big)


class TestWald:
    def test_zero_variance(self):
        iv = ci_wald(SampleSummary(5, 3.0, 0.0), 0.05)
        assert iv.lo == iv.hi == 3.0

    def test_reference_half_width(self):
        iv = ci_wald(SampleSummary(100, 0.0, 99.0), 0.05)
        assert iv.hi == pytest.approx(0.1959964, abs=1e-6)

    def test_width_decreasing_in_alpha(self):
        s = SampleSummary(50, 0.0, 49.0)
        w = [ci_wald(s, a).width for a in np.linspace(0.01, 0.99, 50)]
        assert np.all(np.diff(w) < 0)

    def test_errors(self):
        with pytest.raises(InsufficientSamplesError):
            ci_wald(SampleSummary(1, 0.0, 0.0), 0.05)
        for a in (0.0, 1.0, 1.5):
            with pytest.raises(DomainError):
                ci_wald(SampleSummary(10, 0.0, 9.0), a)


class TestAnchoring:
    def test_unit_lambda(self):
        assert anchor_lambda(2 * math.exp(-0.5)) == pytest.approx(1.0, rel=1e-15)

    def test_formula(self):
        assert anchor_lambda(0.05) == math.sqrt(2 * math.log(40))

    def test_minimizes_a(self):
        lam0 = anchor_lambda(0.05)
        a = lambda lam: width_factor(lam, 0.05) / math.sqrt(100)
        assert a(lam0) <= a(lam0 + 0.01) and a(lam0) <= a(lam0 - 0.01)
        assert width_factor(lam0, 0.05) == pytest.approx(math.sqrt(2 * math.log(40)))

    def test_anchor_domain(self):
        with pytest.raises(DomainError):
            anchor_lambda(2.0)

    def test_ratio(self):
        assert anchor_ratio(0.05, 0.05) == 1.0
        assert anchor_ratio(0.01, 0.2) == anchor_ratio(0.2, 0.01)
        lam0 = anchor_lambda(0.2)
        for a in (0.001, 0.01, 0.1):
            assert anchor_ratio(a, 0.2) == pytest.approx(width_factor(lam0, a) / width_factor(anchor_lambda(a), a))

    @settings(max_examples=200)
    @given(st.floats(1e-6, 1.9), st.floats(1e-6, 1.9))
    def test_ratio_at_least_one(self, a, a0):
        assert anchor_ratio(a, a0) >= 1.0 - 1e-15


class TestIwr:
    def test_hand(self):
        # α = 2 makes log(2/α) = 0, so A = (λ²/2)/(λ√n) = 0.5
        iv = ci_iwr(SampleSummary(4, 0.0, 4.0), 2.0, 2.0)
        assert iv.hi == pytest.approx(0.5 / math.sqrt(0.75), rel=1e-15)

    def test_vacuous_below_threshold(self):
        g = width_factor(2.0, 0.05)
        assert ci_iwr(SampleSummary(int(g * g), 0.0, 10.0), 0.05, 2.0).vacuous
        assert not ci_iwr(SampleSummary(int(g * g) + 1, 0.0, 10.0), 0.05, 2.0).vacuous

    def test_single_observation(self):
        assert ci_iwr(SampleSummary(1, 0.0, 0.0), 0.05, 2.0).vacuous

    def test_empty_for_huge_alpha(self):
        lam = 2.0
        assert ci_iwr(SampleSummary(100, 0.0, 99.0), 2 * math.exp(lam**2 / 2) * 1.001, lam).kind == "empty"

    @pytest.mark.parametrize("s,alpha", random_summaries(1, 20))
    def test_boundary_plug_back(self, s, alpha):
        lam = anchor_lambda(0.05)
        iv = ci_iwr(s, alpha, lam)
        if iv.kind != "bounded":
            pytest.skip("vacuous at this n")
        assert ev.e_iwr(s, iv.hi, -lam) == pytest.approx(2 / alpha, rel=1e-8)
        assert ev.e_iwr(s, iv.lo, lam) == pytest.approx(2 / alpha, rel=1e-8)


class TestYStar:
    def test_monotone(self):
        ys = [solve_y_star(a) for a in (0.001, 0.01, 0.05, 0.1, 0.5, 1.0)]
        assert np.all(np.diff(ys) < 0)

    def test_limit(self):
        y = solve_y_star(0.05, ev.MixParams(50, 1))
        assert y == pytest.approx(2 * math.sqrt(math.log(math.sqrt(2) / 0.05)), rel=0.01)

    @pytest.mark.parametrize("alpha,kappa", [(0.001, 1.0), (0.05, 1.0), (0.05, 5.0), (0.3, 0.5), (1.2, 1.0)])
    def test_plug_back(self, alpha, kappa):
        p = ev.MixParams(20, kappa)
        y = solve_y_star(alpha, p)
        assert ev.i_r_kernel(y, p.u, p.r) == pytest.approx(p.normalizer / alpha, rel=1e-6)

    def test_no_root(self):
        with pytest.raises(NoRootError):
            solve_y_star(1.5, ev.MixParams(20, 1))


class TestMixIwr:
    def test_vacuous_small_n(self):
        y = solve_y_star(0.05)
        assert ci_mix_iwr(SampleSummary(int(y * y), 0.0, 5.0), 0.05).vacuous

    def test_no_root_gives_empty(self):
        iv = ci_mix_iwr(SampleSummary(100, 0.0, 99.0), 3.0)
        assert iv.kind == "empty" and "no_root" in iv.flags

    @pytest.mark.parametrize("s,alpha", random_summaries(2, 20))
    def test_plug_back(self, s, alpha):
        iv = ci_mix_iwr(s, alpha)
        assert ev.e_mix_iwr(s, iv.hi, ev.MixParams()) == pytest.approx(1 / alpha, rel=1e-7)
        assert ev.e_mix_iwr(s, iv.lo, ev.MixParams()) == pytest.approx(1 / alpha, rel=1e-7)


class TestRws:
    def test_truncation_vacuous(self):
        iv = ci_rws(SampleSummary(10, 0.0, 9.0), 0.05, ev.RwsParams(c=1.0))
        assert iv.vacuous and "truncated" in iv.flags

    def test_default_never_truncates(self):
        assert ev.RwsParams().truncation(2) > 20
        assert not ci_rws(SampleSummary(2, 0.0, 1.0), 0.05).vacuous

    @pytest.mark.parametrize("s,alpha", random_summaries(3, 20))
    def test_plug_back(self, s, alpha):
        p = ev.RwsParams(c=1e9)
        iv = ci_rws(s, alpha, p)
        assert ev.e_rws(s, iv.hi, p) == pytest.approx(1 / alpha, rel=1e-7)
        assert ev.e_rws(s, iv.lo, p) == pytest.approx(1 / alpha, rel=1e-7)

    def test_empty_when_log_term_nonpositive(self):
        s = SampleSummary(10, 0.0, 9.0)
        u = 10 * (0.9 + 1 / math.log(10))
        assert ci_rws(s, math.sqrt(2 * u + 1) * 1.01, ev.RwsParams(c=1e9)).kind == "empty"


class TestReg:
    def test_small_eta_limit(self):
        s = SampleSummary(1000, 0.0, 999.0 * 4)
        lam, alpha = 2.0, 0.05
        a = width_factor(lam, alpha) / math.sqrt(1000)
        assert ci_reg(s, alpha, lam, 1e-6).hi == pytest.approx(a * s.sigma_hat, rel=1e-3)

    def test_vacuous(self):
        assert ci_reg(SampleSummary(5, 0.0, 4.0), 0.05, 2.0, 1.0).vacuous

    @pytest.mark.parametrize("s,alpha", random_summaries(4, 20))
    def test_plug_back(self, s, alpha):
        lam, eta = 2.0, 0.01
        iv = ci_reg(s, alpha, lam, eta)
        if iv.kind != "bounded":
            pytest.skip("vacuous at this n")
        assert ev.e_reg(s, iv.hi, ev.RegParams(-lam, eta)) == pytest.approx(2 / alpha, rel=1e-7)
        assert ev.e_reg(s, iv.lo, ev.RegParams(lam, eta)) == pytest.approx(2 / alpha, rel=1e-7)


class TestMixReg:
    def test_small_eta_limit(self):
        s = SampleSummary(100_000, 0.0, 99_999.0)
        assert ci_mix_reg(s, 0.05, eta=1e-6).width == pytest.approx(ci_mix_iwr(s, 0.05).width, rel=1e-3)

    def test_vacuous(self):
        assert ci_mix_reg(SampleSummary(10, 0.0, 9.0), 0.05, eta=1.0).vacuous

    @pytest.mark.parametrize("n", [10_000, 100_000])
    def test_wider_than_mix_iwr(self, n):
        s = summarize(np.random.default_rng(n).normal(size=n))
        for eta in (1e-3, 1e-2):
            for alpha in (0.01, 0.05, 0.2):
                assert ci_mix_reg(s, alpha, eta=eta).width >= ci_mix_iwr(s, alpha).width

    def test_order_reverses_when_eta_below_y_star_ratio(self):
        # widths ≈ ŝy*(1+η)/√n against ŝy*(1 + y*²/2n)/√n
        s = SampleSummary(1000, 0.0, 999.0)
        y = solve_y_star(0.01)
        assert 1e-3 < y * y / 2000
        assert ci_mix_reg(s, 0.01, eta=1e-3).width < ci_mix_iwr(s, 0.01).width

    @pytest.mark.parametrize("s,alpha", random_summaries(5, 20))
    def test_plug_back_biased_variance(self, s, alpha):
        iv = ci_mix_reg(s, alpha, eta=0.01)
        if iv.kind != "bounded":
            pytest.skip("vacuous at this n")
        for end in (iv.lo, iv.hi):
            e = ev.e_mix_reg(s, end, ev.MixParams(), 0.01, variance="biased")
            assert e == pytest.approx(1 / alpha, rel=1e-7)


class TestConfSeq:
    def test_first_step_equals_ci(self):
        x = np.random.default_rng(0).normal(size=200)
        h = ConfSeqHandle.start(x, 200)
        a, b = cs_rws(h, 0.05), ci_rws(summarize(x), 0.05)
        assert a.lo == pytest.approx(b.lo, rel=1e-14) and a.hi == pytest.approx(b.hi, rel=1e-14)

    def test_width_nonincreasing_in_alpha(self):
        x = np.random.default_rng(1).normal(size=300)
        h = ConfSeqHandle.start(x[:100], 100)
        for v in x[100:]:
            h = h.advance(v)
        w = [cs_rws(h, a).width for a in np.linspace(0.01, 1.0, 50)]
        assert np.all(np.diff(w) <= 0)

    def test_out_of_range_flag(self):
        h = ConfSeqHandle.start(np.arange(10.0), 10)
        floor = h.range_floor
        assert "out_of_range" in cs_rws(h, floor).flags
        assert "out_of_range" not in cs_rws(h, floor * 1.01).flags

    def test_validation(self):
        with pytest.raises(DomainError):
            ConfSeqHandle(1, SampleSummary(5, 0, 1))
        with pytest.raises(DomainError):
            ConfSeqHandle(10, SampleSummary(5, 0, 1))
        with pytest.raises(InsufficientSamplesError):
            ConfSeqHandle.start([1.0, 2.0], 5)

    def test_advance_matches_summary(self):
        x = np.random.default_rng(2).normal(size=50)
        h = ConfSeqHandle.start(x, 20)
        for v in x[20:]:
            h = h.advance(v)
        s = summarize(x)
        assert h.k == 50 and h.summary.mean == pytest.approx(s.mean) and h.summary.ssd == pytest.approx(s.ssd)

    def test_running_sup_risk(self):
        # sup over k ∈ [m, 10m] of the mixture e-process at the true mean; risk over α ≤ 1
        rng = np.random.default_rng(20)
        m, streams, rho = 1000, 400, 2.0
        x = rng.normal(0, 2, size=(streams, 10 * m))
        k = np.arange(1, 10 * m + 1)
        csum, csq = np.cumsum(x, axis=1), np.cumsum(x * x, axis=1)
        mean = csum / k
        s2 = csq / k - mean**2
        u = k * (s2 + 1 / math.log(m))
        log_e = -0.5 * np.log1p(rho * u) + rho * csum**2 / (2 * rho * u + 2)
        sup_e = np.exp(log_e[:, m - 1:].max(axis=1))
        contrib = np.where(sup_e >= 1, sup_e, 0.0)
        se = contrib.std(ddof=1) / math.sqrt(streams)
        assert contrib.mean() <= 1 + 3 * se


class TestInvert:
    @pytest.mark.parametrize("s,alpha", random_summaries(6, 15))
    def test_matches_closed_forms(self, s, alpha):
        lam, eta = anchor_lambda(0.05), 0.01
        mp, rp = ev.MixParams(), ev.RwsParams(c=1e9)
        cases = [
            ([lambda t: ev.e_iwr(s, t, lam), lambda t: ev.e_iwr(s, t, -lam)], ci_iwr(s, alpha, lam)),
            (lambda t: ev.e_mix_iwr(s, t, mp), ci_mix_iwr(s, alpha, mp)),
            (lambda t: ev.e_rws(s, t, rp), ci_rws(s, alpha, rp)),
            ([lambda t: ev.e_reg(s, t, ev.RegParams(lam, eta)), lambda t: ev.e_reg(s, t, ev.RegParams(-lam, eta))],
             ci_reg(s, alpha, lam, eta)),
            (lambda t: ev.e_mix_reg(s, t, mp, eta, variance="biased"), ci_mix_reg(s, alpha, mp, eta)),
        ]
        for fn, closed in cases:
            if closed.kind != "bounded":
                continue
            iv = invert_evalue(fn, s.mean, alpha, scale=s.s_hat / math.sqrt(s.n))
            assert iv.lo == pytest.approx(closed.lo, abs=1e-6) and iv.hi == pytest.approx(closed.hi, abs=1e-6)

    def test_minimum_above_threshold(self):
        s = SampleSummary(100, 0.0, 99.0)
        with pytest.raises(EmptyIntervalError):
            invert_evalue(lambda t: ev.e_rws(s, t), 0.0, 100.0)

    def test_never_crosses(self):
        s = SampleSummary(5, 0.0, 4.0)
        # bounded e-variable: exp(λ√n - λ²/2) < 2/α for tiny α
        iv = invert_evalue([lambda t: ev.e_iwr(s, t, 1.0), lambda t: ev.e_iwr(s, t, -1.0)], 0.0, 1e-6)
        assert iv.vacuous


class TestStructure:
    @settings(max_examples=150, deadline=None)
    @given(st.integers(2, 3000), st.floats(0.01, 100), st.floats(1e-4, 500), st.floats(1e-4, 500))
    def test_nesting(self, n, sd, a1, a2):
        a1, a2 = sorted((a1, a2))
        s = SampleSummary(n, 1.0, sd * sd * (n - 1))
        for m in all_methods():
            assert m.interval(s, a2).is_subset_of(m.interval(s, a1)), m

    @pytest.mark.parametrize("s,alpha", random_summaries(7, 25, (2, 3000)))
    def test_symmetric_and_centered(self, s, alpha):
        for m in all_methods() + [Method("wald")]:
            iv = m.interval(s, alpha)
            if iv.kind == "bounded":
                assert iv.contains(s.mean) or iv.width == 0
                assert abs((s.mean - iv.lo) - (iv.hi - s.mean)) <= 1e-12 * max(1.0, abs(s.mean), iv.width)

    def test_method_validation(self):
        with pytest.raises(DomainError):
            Method("iwr")
        with pytest.raises(DomainError):
            Method("bogus")
        assert Method("rws").params() == {"rho": 2.0, "delta": 1.0, "c": 100.0}
