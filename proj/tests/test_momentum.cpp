#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "qpw/momentum.hpp"

using namespace qpw;

TEST_SUITE("finite_gap") {

TEST_CASE("band integrals are π and k hits the edges")
{
    const auto d = fx::two_gap_dispersion();
    CHECK(d->genus() == 2);
    // the edges are rounded to 8 digits, so the periodicity constraints hold
    // only to ~1e-7
    for (int j = 1; j <= 2; ++j) CHECK(std::abs(d->band_increment(j) - pi) < 1e-6);
    CHECK(std::abs(d->k_at_edge(2) - pi) < 1e-6);
    CHECK(std::abs(d->k_at_edge(4) - two_pi) < 1e-6);
    CHECK(std::abs(finite_gap_gap_integral(*d, 1)) < 1e-9);
    // real part is frozen at πn across gap n, imaginary part positive inside
    for (double E : {4.0, 5.4, 6.8}) {
        const cplx k = d->k_real(E);
        CHECK(std::abs(k.real() - d->k_at_edge(2)) < 1e-9);
        CHECK(k.imag() > 0);
    }
}

TEST_CASE("P is monic with one zero per gap")
{
    const auto d = fx::two_gap_dispersion();
    const auto c = d->p_coefficients();
    REQUIRE(c.size() == 3);
    CHECK(c.back() == doctest::Approx(1.0));
    const auto& e = fx::two_gap().edges;
    for (int n = 1; n <= 2; ++n) CHECK(d->P(e[sz(2 * n - 1)]) * d->P(e[sz(2 * n)]) < 0);
}

TEST_CASE("Dubrovin synthesis reproduces the prescribed edges")
{
    const auto spec = fx::two_gap();
    const SynthesisResult s = synthesize_finite_gap(spec, spec.dirichlet_phases);
    for (double drift : s.phase_drift) CHECK(std::abs(drift) < 1e-4);
    const BandStructure b = band_edges(s.potential, 3);
    for (int m = 1; m <= 5; ++m) CHECK(std::abs(b.edge(m) - spec.edges[sz(m - 1)]) < 1e-4 * (1 + spec.edges[sz(m - 1)]));
    CHECK_FALSE(b.gap_open(3));
}

}

TEST_SUITE("momentum") {

TEST_CASE("branch points against the closed forms")
{
    const auto d = fx::two_gap_dispersion();
    const double E = 5.4, a = 2.0;
    const auto& e = fx::two_gap().edges;
    const WindowContext ctx = make_window(d, 1, E, a);
    const BranchPointSet bp = branch_points(ctx);
    CHECK(std::abs(bp.zeta_lo - std::acos((E - e[1]) / a)) < 1e-12);
    CHECK(std::abs(bp.zeta_hi - std::acos((E - e[2]) / a)) < 1e-12);
    CHECK(std::abs(bp.height(1) - std::acosh((E - e[0]) / a)) < 1e-12);
    CHECK(std::abs(bp.height(4) - std::acosh((e[3] - E) / a)) < 1e-12);
    CHECK(std::abs(bp.height(5) - std::acosh((e[4] - E) / a)) < 1e-12);
    CHECK(std::abs(bp.zeta_lo - 0.689713187647) < 1e-11);
    CHECK(bp.min_separation() > 1.3);
}

TEST_CASE("band-edge interaction margins")
{
    const BandStructure& b = fx::two_gap_dispersion()->bands();
    const BeiReport ok = check_bei(b, 1, 5.4, 2.0);
    CHECK(ok.holds);
    CHECK(ok.margin() > 0);
    const BeiReport bad = check_bei(b, 1, 5.2, 0.1);
    CHECK_FALSE(bad.holds);
    CHECK(bad.lower_gap < 0);
    CHECK_THROWS_AS(make_window(fx::two_gap_dispersion(), 1, 5.2, 0.1), Error);
}

TEST_CASE("κ on the real axis is k(E - α cos ζ)")
{
    const auto d = fx::two_gap_dispersion();
    const WindowContext ctx = make_window(d, 1, 5.4, 2.0);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0, pi);
    for (int i = 0; i < 20; ++i) {
        const double z = u(rng);
        const cplx k = complex_momentum(ctx, z);
        const cplx ref = d->k_real(5.4 - 2.0 * std::cos(z));
        CHECK(std::abs(k - ref) < 1e-9);
    }
}

TEST_CASE("continuation around a closed loop away from branch points returns the same determination")
{
    const auto d = fx::two_gap_dispersion();
    const WindowContext ctx = make_window(d, 1, 5.4, 2.0);
    std::vector<cplx> path;
    const cplx c(1.5, 0.8);
    for (int j = 0; j <= 64; ++j) path.push_back(c + 0.1 * std::exp(cplx(0, two_pi * j / 64)));
    const PathContinuation pc = continue_kappa(ctx, path);
    CHECK(pc.start == pc.end);
    CHECK(std::abs(pc.kappa.front() - pc.kappa.back()) < 1e-9);
}

}
