#include <cmath>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include "fixtures.hpp"
#include "qpw/actions.hpp"

using namespace qpw;

namespace {

// Phases and actions straight from the definitions on the real and imaginary
// segments, by tanh-sinh quadrature; shares only k_real with the library.
struct OracleActions {
    double phi0, phi_pi, sv0, sv_pi, sh;
};

OracleActions oracle_actions(const Dispersion& d, int n, double E, double a)
{
    boost::math::quadrature::tanh_sinh<double> ts;
    const BandStructure& b = d.bands();
    const double z2 = std::acos((E - b.edge(2 * n)) / a), z3 = std::acos((E - b.edge(2 * n + 1)) / a);
    const double y1 = std::acosh((E - b.edge(2 * n - 1)) / a), y4 = std::acosh((b.edge(2 * n + 2) - E) / a);
    auto re = [&](double e) { return d.k_real(e).real(); };
    OracleActions o;
    o.phi0 = ts.integrate([&](double z) { return pi * n - re(E - a * std::cos(z)); }, -z2, z2);
    o.phi_pi = ts.integrate([&](double z) { return re(E - a * std::cos(z)) - pi * n; }, z3, two_pi - z3);
    o.sv0 = 2 * ts.integrate([&](double y) { return re(E - a * std::cosh(y)) - pi * (n - 1); }, 0.0, y1);
    o.sv_pi = 2 * ts.integrate([&](double y) { return pi * (n + 1) - re(E + a * std::cosh(y)); }, 0.0, y4);
    o.sh = ts.integrate([&](double z) { return d.k_real(E - a * std::cos(z)).imag(); }, z2, z3);
    return o;
}

}  // namespace

TEST_SUITE("actions") {

TEST_CASE("finite-gap actions at E = 5.4, α = 2")
{
    const auto d = fx::two_gap_dispersion();
    const WindowContext ctx = make_window(d, 1, 5.4, 2.0);
    const ActionSet a = compute_actions(ctx);
    const OracleActions o = oracle_actions(*d, 1, 5.4, 2.0);
    CHECK(std::abs(a.phi0 - o.phi0) < 1e-9);
    CHECK(std::abs(a.phi_pi - o.phi_pi) < 1e-9);
    CHECK(std::abs(a.sv0 - o.sv0) < 1e-9);
    CHECK(std::abs(a.sh0 - o.sh) < 1e-9);
    // the stadium around ζ_4 sees the 1e-7 periodicity defect of the rounded edges
    CHECK(std::abs(a.sv_pi - o.sv_pi) < 1e-7);

    CHECK(std::abs(a.phi0 - 0.48612333132991) < 1e-11);
    CHECK(std::abs(a.phi_pi - 0.54183669643263) < 1e-11);
    CHECK(std::abs(a.sv0 - 6.91591992216730) < 1e-10);
    CHECK(std::abs(a.sv_pi - 7.74573138958375) < 1e-9);
    CHECK(std::abs(a.sh0 - 0.66929655930438) < 1e-11);
    CHECK(std::abs(a.sh_pi - 0.66929655930438) < 1e-11);
    CHECK(a.sh == doctest::Approx(a.sh0 + a.sh_pi));
    CHECK(a.dphi0 < 0);
    CHECK(a.dphi_pi > 0);
}

TEST_CASE("loop and cut actions agree")
{
    const auto d = fx::two_gap_dispersion();
    for (double E : {5.0, 5.4, 5.8}) {
        const WindowContext ctx = make_window(d, 1, E, 2.0);
        for (Sigma s : {Sigma::zero, Sigma::pi}) {
            CHECK(std::abs(vertical_action(ctx, s).value - vertical_action_cut(ctx, s)) < 1e-7);
            CHECK(std::abs(horizontal_action(ctx, s).value - horizontal_action_cut(ctx, s)) < 1e-9);
            CHECK(std::abs(phase_integral_loop(ctx, s, 256) - phase_integral(ctx, s, {.loop_nodes = 0})) < 1e-8);
        }
        const ActionSet c = cut_actions(ctx);
        const ActionSet a = compute_actions(ctx);
        CHECK(std::abs(c.sv0 - a.sv0) < 1e-7);
        CHECK(std::abs(c.sh - a.sh) < 1e-8);
        CHECK(std::abs(c.phi_pi - a.phi_pi) < 1e-10);
    }
}

TEST_CASE("Hill-mode actions for 2cos(2πx)")
{
    const auto v = fx::cosine();
    const auto d = std::make_shared<const HillDispersion>(v, 3);
    const WindowContext ctx = make_window(d, 1, 9.857, 2.5);
    const ActionSet a = compute_actions(ctx);
    const OracleActions o = oracle_actions(*d, 1, 9.857, 2.5);
    CHECK(std::abs(a.sv0 - o.sv0) < 1e-8);
    CHECK(std::abs(a.sv_pi - o.sv_pi) < 1e-8);
    CHECK(std::abs(a.sh0 - o.sh) < 1e-8);
    CHECK(std::abs(a.sv0 - 9.1728369850) < 1e-9);
    CHECK(std::abs(a.sv_pi - 12.5726068179) < 1e-9);
    CHECK(std::abs(a.sh0 - 0.1020656608) < 1e-9);
    CHECK(std::abs(a.sh0 - a.sh_pi) < 1e-9);
}

TEST_CASE("property: positivity, parity and monotone phases over random window points")
{
    const auto d = fx::two_gap_dispersion();
    const BandStructure& b = d->bands();
    std::mt19937 rng(20240607);
    std::uniform_real_distribution<double> ua(1.8, 3.5), ue(0, 1);
    int tested = 0;
    while (tested < 12) {
        const double alpha = ua(rng);
        const double lo = std::max(b.edge(3) - alpha, b.edge(1) + alpha) + 0.05;
        const double hi = std::min(b.edge(2) + alpha, b.edge(4) - alpha) - 0.05;
        if (hi <= lo) continue;
        const double E = lo + (hi - lo) * ue(rng);
        const WindowContext ctx = make_window(d, 1, E, alpha);
        const ActionSet a = compute_actions(ctx);
        CHECK(a.sv0 > 0);
        CHECK(a.sv_pi > 0);
        CHECK(a.sh0 > 0);
        CHECK(std::abs(horizontal_action(ctx, Sigma::zero).value - horizontal_action(ctx, Sigma::pi).value) < 1e-7);
        CHECK(a.dphi0 < 0);
        CHECK(a.dphi_pi > 0);
        ++tested;
    }
}

TEST_CASE("action profile: parallel equals serial")
{
    const auto d = fx::two_gap_dispersion();
    std::vector<double> E;
    for (int i = 0; i < 8; ++i) E.push_back(5.2 + 0.05 * i);
    const auto p = action_profile(d, 1, 2.0, E);
    const auto s = action_profile_serial(d, 1, 2.0, E);
    REQUIRE(p.size() == s.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i].ok);
        CHECK(p[i].parity);
        CHECK(p[i].monotone);
        CHECK(p[i].actions.sv0 == s[i].actions.sv0);
        CHECK(p[i].actions.phi_pi == s[i].actions.phi_pi);
    }
    CHECK(to_csv(p) == to_csv(s));
}

}
