#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "qpw/wkb.hpp"

using namespace qpw;

namespace {

// Affine synthetic profile: Φ₀ = p0 - s0·E, Φ_π = pp + sp·E, constant actions.
struct Linear {
    double p0 = 3.0, s0 = 1.0, pp = 0.0, sp = 1.0;
    double sv0 = 5.0, sv_pi = 5.0, sh0 = 0.5, sh_pi = 0.5;

    ActionSet operator()(double E) const
    {
        ActionSet a;
        a.E = E;
        a.phi0 = p0 - s0 * E;
        a.phi_pi = pp + sp * E;
        a.dphi0 = -s0;
        a.dphi_pi = sp;
        a.sv0 = sv0;
        a.sv_pi = sv_pi;
        a.sh0 = sh0;
        a.sh_pi = sh_pi;
        a.sh = sh0 + sh_pi;
        return a;
    }
    ActionTable table(double lo, double hi) const { return ActionTable::sample(*this, lo, hi, 9); }
};

const ActionTable& table_two_gap()
{
    static const ActionTable t = ActionTable::from_window(fx::two_gap_dispersion(), 1, 2.0, 5.2, 5.6, 25);
    return t;
}

ActionSet pair_actions(double sh, double sv0, double sv_pi, double dphi0 = -0.5, double dphi_pi = 0.6)
{
    ActionSet a;
    a.sh0 = a.sh_pi = sh / 2;
    a.sh = sh;
    a.sv0 = sv0;
    a.sv_pi = sv_pi;
    a.dphi0 = dphi0;
    a.dphi_pi = dphi_pi;
    return a;
}

}  // namespace

TEST_SUITE("wkb") {

TEST_CASE("Chebyshev table reproduces smooth data")
{
    const ActionTable& t = table_two_gap();
    const ActionSet a = t.at(5.4);
    CHECK(std::abs(a.phi0 - 0.48612333132991) < 1e-9);
    CHECK(std::abs(a.sh0 - 0.66929655930438) < 1e-9);
    const ActionTable lin = Linear{}.table(1, 2);
    CHECK(std::abs(lin.at(1.2345).phi_pi - 1.2345) < 1e-14);
}

TEST_CASE("quantization of Φ_π = E on [1, 2] with ε = 0.1")
{
    const QuantizedSequence q = quantize(Linear{}.table(1, 2), 0.1, SeqType::type_pi);
    std::vector<double> ref;
    for (int l = 0; l < 10; ++l) {
        const double e = 0.1 * (pi / 2 + pi * l);
        if (e >= 1 && e <= 2) ref.push_back(e);
    }
    REQUIRE(q.energies.size() == ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(q.energies[i] - ref[i]) < 1e-12);
    CHECK(q.index.front() == 3);
    CHECK(q.spacing_C == doctest::Approx(pi));
}

TEST_CASE("non-monotone phase is an invariant violation")
{
    Linear l;
    l.sp = -1;
    CHECK_THROWS_AS(quantize(l.table(1, 2), 0.1, SeqType::type_pi), Error);
}

TEST_CASE("quantized roots on the two-gap profile: residual, count and ε drift")
{
    const ActionTable& t = table_two_gap();
    const double eps = 0.05;
    const QuantizedSequence q0 = quantize(t, eps, SeqType::type0);
    const QuantizedSequence qp = quantize(t, eps, SeqType::type_pi);
    for (std::size_t i = 0; i < qp.energies.size(); ++i)
        CHECK(std::abs(t.at(qp.energies[i]).phi_pi / eps - (pi / 2 + pi * qp.index[i])) < 1e-10);
    for (std::size_t i = 0; i < q0.energies.size(); ++i)
        CHECK(std::abs(t.at(q0.energies[i]).phi0 / eps - (pi / 2 + pi * q0.index[i])) < 1e-10);
    const double span = (t.at(5.6).phi_pi - t.at(5.2).phi_pi) / (pi * eps);
    CHECK(std::abs(double(qp.energies.size()) - span) <= 1.0);
    CHECK(qp.spacing_C < 5.0);

    // as ε decreases, type-π roots move left and type-0 roots move right
    const QuantizedSequence q0s = quantize(t, 0.049, SeqType::type0);
    const QuantizedSequence qps = quantize(t, 0.049, SeqType::type_pi);
    for (std::size_t i = 0; i < qp.energies.size(); ++i)
        for (std::size_t j = 0; j < qps.energies.size(); ++j)
            if (qp.index[i] == qps.index[j]) CHECK(qps.energies[j] < qp.energies[i]);
    for (std::size_t i = 0; i < q0.energies.size(); ++i)
        for (std::size_t j = 0; j < q0s.energies.size(); ++j)
            if (q0.index[i] == q0s.index[j]) CHECK(q0s.energies[j] > q0.energies[i]);
}

TEST_CASE("coarse intervals: separation, coincidence and δ₀ scaling")
{
    Linear l;
    const ActionTable t = l.table(1, 2);
    QuantizedSequence s0, sp;
    s0.type = SeqType::type0;
    sp.type = SeqType::type_pi;
    s0.energies = {1.2, 1.5};
    s0.index = {1, 0};
    sp.energies = {1.35, 1.65};
    sp.index = {0, 1};
    CHECK(coarse_intervals(s0, sp, t, 0.05).pairs.empty());

    sp.energies = {1.5, 1.8};
    const CoarseResult c = coarse_intervals(s0, sp, t, 0.05);
    REQUIRE(c.pairs.size() == 1);
    CHECK(c.pairs[0] == std::pair<int, int>(1, 0));
    CHECK(c.zero[1].resonant);
    CHECK(c.pi[0].resonant);

    Linear h = l;
    h.sv0 /= 2, h.sv_pi /= 2, h.sh0 /= 2, h.sh_pi /= 2;
    CHECK(delta0(h.table(1, 2)) == doctest::Approx(delta0(t) / 2).epsilon(1e-14));
    CHECK(delta0(t) == doctest::Approx(0.5));
}

TEST_CASE("refinement arithmetic")
{
    const double eps = 0.05;
    Linear l;
    l.sv0 = l.sv_pi = 5.0;
    l.sh0 = l.sh_pi = -eps * std::log(1e-6) / 2;  // t_h = 1e-6
    SpectralInterval iv;
    iv.type = IntervalType::type_pi;
    iv.center = iv.coarse_center = 1.5;
    iv.coarse_halfwidth = 1e-3;

    SUBCASE("tan = 1 gives the shift 0.05·1.5/2·1e-6")
    {
        l.p0 = 1.5 + eps * pi / 4;  // Φ₀(1.5)/ε = π/4
        const SpectralInterval r = refine_nonresonant(iv, l.table(1, 2), eps, 1.5);
        CHECK(std::abs((r.center - 1.5) - 3.75e-8) < 1e-16);
    }
    SUBCASE("anti-resonant: zero shift, width (ε/Φ_π')(t_h/2 + t_v)")
    {
        l.p0 = 1.5 + eps * 3 * pi;
        const SpectralInterval r = refine_nonresonant(iv, l.table(1, 2), eps, 1.5);
        CHECK(std::abs(r.center - 1.5) < 1e-18);
        CHECK(r.halfwidth == doctest::Approx(eps * (1e-6 / 2 + std::exp(-5.0 / eps))).epsilon(1e-9));
    }
    SUBCASE("leaving the coarse interval reclassifies")
    {
        l.p0 = 1.5 + eps * (pi / 2 - 1e-9);
        try {
            refine_nonresonant(iv, l.table(1, 2), eps, 1.5);
            FAIL("expected ReclassifyAsResonant");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ReclassifyAsResonant);
        }
    }
}

TEST_CASE("property: repulsion, shift sign opposite to E₀ - E_π")
{
    const double eps = 0.05;
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ud(-0.45, 0.45);
    Linear l;
    l.sh0 = l.sh_pi = 0.2;
    const ActionTable t0 = l.table(1, 2);
    const QuantizedSequence s0 = quantize(t0, eps, SeqType::type0);
    const double E0 = s0.energies[s0.energies.size() / 2];
    int tested = 0;
    for (int i = 0; i < 200; ++i) {
        const double d = ud(rng) * pi * eps;  // E_π = E₀ - d
        const double Epi = E0 - d;
        const double tn = std::tan(t0.at(Epi).phi0 / eps);
        if (std::abs(tn) <= 1e-6 || std::abs(d) < 1e-4) continue;
        SpectralInterval iv;
        iv.type = IntervalType::type_pi;
        iv.center = iv.coarse_center = Epi;
        iv.coarse_halfwidth = 1.0;
        const SpectralInterval r = refine_nonresonant(iv, t0, eps, 1.3);
        CHECK((r.center - Epi) * d < 0);
        ++tested;
    }
    CHECK(tested > 100);
}

TEST_CASE("classification: log⁺ clamp and the distance form of Θ")
{
    const double eps = 0.05;
    Linear l;
    l.sh0 = l.sh_pi = 0.5;  // S_h = 1
    l.sv_pi = 0.4;
    l.sv0 = 2.0;
    const ActionTable t = l.table(1, 2);
    SpectralInterval iv;
    iv.type = IntervalType::type_pi;
    iv.center = iv.coarse_center = 1.5;

    const double delta = 0.3;  // distance e^{-δ/ε} to the nearest E₀
    QuantizedSequence other;
    other.energies = {1.5 + std::exp(-delta / eps)};
    const SpectralInterval r = classify_nonresonant(iv, t, eps, other);
    CHECK(r.theta == doctest::Approx((1.0 - 0.4 - delta) / two_pi).epsilon(1e-12));
    CHECK(r.nature == Nature::singular);
    CHECK(r.far_field < 0);

    l.sv_pi = 3.0;  // λ_π < 1
    const SpectralInterval c = classify_nonresonant(iv, l.table(1, 2), eps, other);
    CHECK(c.theta == 0.0);
    CHECK(c.nature == Nature::mostly_ac);
    CHECK(std::find(c.flags.begin(), c.flags.end(), "subject_to_diophantine_epsilon") != c.flags.end());
}

TEST_CASE("alternation: type-0 singular and type-π mostly ac")
{
    const double eps = 0.05;
    Linear l;
    l.p0 = 3.07;
    l.sh0 = l.sh_pi = 0.5;
    l.sv0 = 0.5;
    l.sv_pi = 1.5;
    const ActionTable t = l.table(1, 2);
    const SpectralReport r = spectral_report(t, 1, 2.0, eps, {1.3, "prescribed"});
    CHECK(r.regimes.alternation_0_singular);
    CHECK_FALSE(r.regimes.alternation_pi_singular);
    int s = 0, ac = 0;
    for (const auto& iv : r.intervals) {
        if (iv.resonant) continue;
        if (iv.type == IntervalType::type0) {
            CHECK(iv.nature == Nature::singular);
            ++s;
        } else {
            CHECK(iv.nature == Nature::mostly_ac);
            ++ac;
        }
    }
    CHECK(s > 0);
    CHECK(ac > 0);
}

TEST_CASE("large τ: center value, edge value and disjoint weights")
{
    const double eps = 0.05;
    const ActionSet a = pair_actions(1.0, 0.3, 0.2, -1.0, 1.0);
    const ResonantPair p = make_resonant_pair(1.5, 1.5, a, eps, 1.3);
    const LargeTauResult r = analyze_resonant_large_tau(p);
    CHECK(r.theta_center == doctest::Approx(eps / pi * p.log_tau).epsilon(1e-14));
    CHECK(std::abs(r.theta_center - (1.0 - 0.3 - 0.2) / two_pi) <= eps / pi * std::log(2.0) + 1e-14);
    CHECK(p.xi0(1.5) == 0.0);

    // t_{v,0} << t_{v,π}: at the edge of Ǐ_π, Θ ≈ (S_h - 2S_{v,π})/2π
    const ActionSet b = pair_actions(1.0, 0.45, 0.05, -1.0, 1.0);
    const ResonantPair q = make_resonant_pair(1.5, 1.5, b, eps, 1.3);
    const LargeTauResult rb = analyze_resonant_large_tau(q);
    const double edge = theta_large_tau(q, 1.5 + rb.ipi.halfwidth);
    CHECK(std::abs(edge - (1.0 - 2 * 0.05) / two_pi) < eps / pi * (std::log(2.0) + 1));

    const ResonantPair far = make_resonant_pair(1.5, 1.5 + 1e-2, a, eps, 1.3);
    const LargeTauResult rf = analyze_resonant_large_tau(far);
    CHECK(rf.disjoint);
    CHECK(rf.i0.dos_weight == doctest::Approx(eps / two_pi));
    CHECK(rf.ipi.dos_weight == doctest::Approx(eps / two_pi));
    for (const auto& [E, th] : rf.ipi.theta_profile) CHECK(th >= 0);

    CHECK_THROWS_AS(analyze_resonant_large_tau(make_resonant_pair(1.5, 1.5, pair_actions(0.2, 0.3, 0.3), eps, 1.3)),
                    Error);
}

TEST_CASE("small τ: central gap, degenerate touching and scenario (b)")
{
    const double eps = 0.05;
    const ActionSet a = pair_actions(0.2, 0.3, 0.35);
    const ResonantPair p = make_resonant_pair(1.5, 1.5, a, eps, 1.3);
    CHECK(small_tau_defect(p, 1.5) == doctest::Approx(2 * 1.3 - 2));
    const SmallTauResult r = analyze_resonant_small_tau(p);
    CHECK(r.components.size() == 2);
    CHECK_FALSE(r.center_in_sigma);
    CHECK_FALSE(r.touching);
    for (double e : r.endpoints) CHECK(std::abs(small_tau_defect(p, e)) < 1e-9);

    const SmallTauResult t = analyze_resonant_small_tau(make_resonant_pair(1.5, 1.5, a, eps, 1.0));
    CHECK(t.touching);

    // ρ >> 1 with t_{v,π} the larger coefficient; the endpoint value carries an
    // extra (ε/2π)log(4|Φ_π'|/|Φ₀'|), so log ρ must be large for the 30% check
    const ActionSet b = pair_actions(0.6, 0.7, 0.02);
    const ResonantPair q = make_resonant_pair(1.5, 1.5 + 2e-4, b, eps, 1.3);
    REQUIRE(q.log_rho > 0);
    const SmallTauResult rb = analyze_resonant_small_tau(q);
    CHECK(rb.scenario.rfind("b_", 0) == 0);
    const double outer = eps / pi * q.log_rho;
    CHECK(std::abs(theta_small_tau(q, rb.endpoints.front()) - outer) < 0.3 * outer);
    CHECK(std::abs(theta_small_tau(q, rb.endpoints.back()) - outer) < 0.3 * outer);

    CHECK_THROWS_AS(analyze_resonant_small_tau(make_resonant_pair(1.5, 1.5, pair_actions(1.0, 0.3, 0.3), eps, 1.3)),
                    Error);
}

TEST_CASE("property: Σ(ε) splits into two intervals missing Ē")
{
    const double eps = 0.05;
    std::mt19937 rng(20240607);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 50; ++i) {
        const double sh = 0.1 + 0.3 * u(rng);
        const ActionSet a = pair_actions(sh, sh / 2 + 0.1 + 0.4 * u(rng), sh / 2 + 0.1 + 0.4 * u(rng),
                                         -(0.2 + u(rng)), 0.2 + u(rng));
        const double scale = eps * std::exp(-sh / (2 * eps));
        const double sep = (4 * u(rng) - 2) * scale;
        const double lam = 1 + 1e-3 + 2 * u(rng);
        const ResonantPair p = make_resonant_pair(1.5, 1.5 + sep, a, eps, lam);
        const SmallTauResult r = analyze_resonant_small_tau(p);
        CHECK(r.components.size() == 2);
        CHECK_FALSE(r.center_in_sigma);
        CHECK(r.endpoints[1] < r.endpoints[2]);
    }
}

TEST_CASE("model regime and θ_n")
{
    CHECK(theta_from_lambda(1.25) == 2.0);
    CHECK(theta_from_lambda(1.0) == 1.0);
    const double eps = 0.05, sv = 1.5;
    // log τ = log 2 + (S_h - S_v0 - S_vπ)/2ε
    auto with_tau = [&](double tau) {
        return make_resonant_pair(1.5, 1.5, pair_actions(2 * sv + 2 * eps * std::log(tau / 2), sv, sv), eps, 1.25);
    };
    const ResonantPair tiny = with_tau(1e-8);
    CHECK(std::abs(tiny.log_tau - std::log(1e-8)) < 1e-9);
    CHECK_FALSE(detect_model_regime(tiny).in_regime);
    const ModelParams m = detect_model_regime(with_tau(1.0));
    CHECK(m.in_regime);
    CHECK(m.tau == doctest::Approx(1.0));
    CHECK(m.theta_n == 2.0);
}

TEST_CASE("report bookkeeping on the two-gap profile")
{
    const double eps = 0.05;
    const SpectralReport r = spectral_report(table_two_gap(), 1, 2.0, eps, {1.3, "prescribed"});
    CHECK(r.pairs.empty());
    const std::size_t roots = r.seq0.energies.size() + r.seqpi.energies.size();
    CHECK(r.intervals.size() == roots);
    CHECK(r.dos_total == doctest::Approx(eps / two_pi * double(roots)));
    for (const auto& iv : r.intervals) {
        CHECK(std::abs(iv.center - iv.coarse_center) + iv.halfwidth <= iv.coarse_halfwidth);
        CHECK(iv.theta >= 0);
        for (const auto& [E, th] : iv.theta_profile) CHECK(th >= 0);
    }
    const auto j = to_json(r);
    CHECK(j["intervals"].size() == roots);
    CHECK(j["sequences"][1]["type"] == "typePi");
}

TEST_CASE("a small change of ε creates a resonant pair")
{
    // E₀ = E_π = E needs Φ₀(E)/Φ_π(E) = (l₀ + ½)/(l_π + ½); solve for E, then ε.
    const ActionTable& t = table_two_gap();
    auto ratio = [&](double E) { return t.at(E).phi0 / t.at(E).phi_pi; };
    double Estar = 0, eps_star = 0;
    for (int lp = 1; lp < 12 && eps_star == 0; ++lp)
        for (int l0 = 1; l0 < 12; ++l0) {
            const double target = (l0 + 0.5) / (lp + 0.5);
            const double a = 5.25, b = 5.55;
            if ((ratio(a) - target) * (ratio(b) - target) > 0) continue;
            const double E = solve_bracketed([&](double e) { return ratio(e) - target; }, a, b, 1e-14,
                                             ErrorKind::NumericsError);
            const double eps = t.at(E).phi_pi / (pi * (lp + 0.5));
            if (eps < 0.04 || eps > 0.07) continue;
            Estar = E, eps_star = eps;
            break;
        }
    REQUIRE(eps_star > 0);
    const SpectralReport at = spectral_report(t, 1, 2.0, eps_star, {1.3, "prescribed"});
    const SpectralReport off = spectral_report(t, 1, 2.0, eps_star * (1 + 1e-3), {1.3, "prescribed"});
    CHECK(at.pairs.size() == off.pairs.size() + 1);
    REQUIRE_FALSE(at.pairs.empty());
    CHECK(std::abs(at.pairs[0].pair.Ebar - Estar) < 1e-8);
    CHECK(at.pairs[0].regime == "small_tau");
    CHECK(at.dos_total == doctest::Approx(eps_star / two_pi * double(at.intervals.size())));
}

}
