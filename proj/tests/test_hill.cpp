#include <cmath>
#include <random>

#include <doctest.h>

#include "fixtures.hpp"
#include "qpw/hill.hpp"

using namespace qpw;

TEST_SUITE("hill") {

TEST_CASE("free particle edges and momentum")
{
    const auto v = PeriodicPotential::fourier({0.0});
    const BandStructure b = band_edges(v, 6);
    CHECK(std::abs(b.edge(1)) < 1e-8);
    for (int n = 1; n <= 6; ++n) {
        const double e = std::pow(n * pi, 2);
        CHECK(std::abs(b.edge(2 * n) - e) < 1e-8);
        CHECK(std::abs(b.edge(2 * n + 1) - e) < 1e-8);
        CHECK_FALSE(b.gap_open(n));
    }
    CHECK_THROWS_AS(require_open_gap(b, 1), Error);
    HillDispersion d(v, 6);
    for (double E = 0.1; E <= 30; E += 0.37) CHECK(std::abs(d.k_real(E) - std::sqrt(E)) < 1e-8);
}

TEST_CASE("cosine discriminant against an independent RK4 integration")
{
    const auto v = fx::cosine();
    const double ref = fx::rk4_discriminant(v, 1.0);
    CHECK(std::abs(ref - 1.03317929823916) < 1e-10);
    CHECK(std::abs(discriminant(v, 1.0).real() - 1.03317929823916) < 1e-10);
    for (double E : {-3.0, 2.5, 9.5, 25.0, 60.0})
        CHECK(std::abs(discriminant(v, E).real() - fx::rk4_discriminant(v, E)) < 1e-8 * (1 + std::abs(ref)));
}

TEST_CASE("monodromy is unimodular")
{
    const auto v = fx::asymmetric();
    for (cplx E : {cplx(1, 0), cplx(9.5, 0.3), cplx(40, -2)})
        CHECK(std::abs(monodromy(v, E).det() - 1.0) < 1e-10);
}

TEST_CASE("edges match the truncated Hill matrix")
{
    for (const auto& v : {fx::cosine(), fx::asymmetric()}) {
        const BandStructure b = band_edges(v, 3);
        const auto ref = fx::hill_matrix_edges(v, 7);
        CHECK(std::abs(b.edge(1) - ref[0]) < 1e-7);
        for (int m = 2; m <= 7; ++m) {
            // Δ is good to ~1e-12, so edges of a gap of width w carry ~1e-15/w
            const int g = m / 2;
            const double w = ref[sz(2 * g)] - ref[sz(2 * g - 1)];
            CHECK(std::abs(b.edge(m) - ref[sz(m - 1)]) < (w > 1e-2 ? 1e-7 : 2e-5));
        }
    }
    // third gap of 2cos(2πx) is 3.2e-4 wide and must still count as open
    const BandStructure b = band_edges(fx::cosine(), 3);
    CHECK(b.gap_open(3));
    const auto ref = fx::hill_matrix_edges(fx::cosine(), 7);
    CHECK(std::abs((b.edge(7) - b.edge(6)) / (ref[6] - ref[5]) - 1) < 0.05);
}

TEST_CASE("edges are translation invariant")
{
    const auto v = fx::asymmetric();
    const BandStructure b = band_edges(v, 3);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 3; ++i) {
        const BandStructure bt = band_edges(v.translated(u(rng)), 3);
        for (int m = 1; m <= 7; ++m) CHECK(std::abs(b.edge(m) - bt.edge(m)) < 1e-8);
    }
}

TEST_CASE("principal momentum maps bands onto [π(n-1), πn] and grows in gaps")
{
    HillDispersion d(fx::cosine(), 3);
    const BandStructure& b = d.bands();
    for (int j = 1; j <= 3; ++j) {
        const double lo = b.edge(2 * j - 1), hi = b.edge(2 * j);
        double prev = -1;
        for (int i = 1; i < 20; ++i) {
            const cplx k = d.k_real(lo + (hi - lo) * i / 20.0);
            CHECK(std::abs(k.imag()) < 1e-9);
            CHECK(k.real() >= pi * (j - 1) - 1e-9);
            CHECK(k.real() <= pi * j + 1e-9);
            CHECK(k.real() > prev);
            prev = k.real();
        }
    }
    // Im k in gap 1 against the discriminant: cosh(Im k) = |Δ|/2
    for (double E = 9.0; E < 10.8; E += 0.3) {
        const cplx k = d.k_real(E);
        CHECK(std::abs(k.real() - pi) < 1e-9);
        CHECK(std::abs(std::cosh(k.imag()) - std::abs(discriminant(fx::cosine(), E).real()) / 2) < 1e-8);
    }
}

TEST_CASE("lambda of an even potential is one; serial and parallel agree")
{
    const auto v = fx::cosine();
    const BandStructure b = band_edges(v, 3);
    const LambdaResult p = lambda_n(v, b, 1);
    const LambdaResult s = lambda_n_serial(v, b, 1);
    CHECK(std::abs(p.lambda - 1) < 1e-3);
    CHECK(std::abs(p.lambda - s.lambda) < 1e-12);
}

}
