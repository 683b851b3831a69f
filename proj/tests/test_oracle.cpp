#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "fixtures.hpp"
#include "qpw/oracle.hpp"
#include "qpw/wkb.hpp"

using namespace qpw;

TEST_SUITE("oracle") {

TEST_CASE("unit-cell transfer is unimodular")
{
    const OracleSystem s(fx::cosine(), 1.5, 0.05);
    for (double E : {-1.0, 5.0, 9.5, 40.0}) {
        double m[4];
        s.cell_transfer(17, 0.3, E, m);
        CHECK(std::abs(m[0] * m[3] - m[1] * m[2] - 1) < 1e-10);
    }
    const CocycleRun r = cocycle_run(s, 0.3, 9.5, 300);
    CHECK(r.max_det_error < 1e-8);
    CHECK(r.log_norm.size() == 300);
    for (double v : r.log_norm) CHECK(std::isfinite(v));
}

TEST_CASE("α = 0: Lyapunov exponent is Im k in the gap and 0 in bands")
{
    const auto v = fx::cosine();
    const HillDispersion d(v, 2);
    const OracleSystem s(v, 0.0, 0.05);
    const long L = 800;
    int gaps = 0, bands = 0;
    for (int i = 0; i < 20; ++i) {
        const double E = i < 10 ? 9.0 + 0.18 * i : 1.0 + 3.0 * (i - 10);
        if (i >= 10 && d.bands().gap_of(E) != 0) continue;
        const double ik = d.k_real(E).imag();
        const LyapunovEstimate l = lyapunov_direct(s, 0.0, E, L);
        if (ik > 0) {
            CHECK(std::abs(l.value - ik) < 0.02 * ik);
            ++gaps;
        } else {
            CHECK(std::abs(l.value) < std::max(3 * l.error, 2e-3));
            ++bands;
        }
    }
    CHECK(gaps == 10);
    CHECK(bands >= 8);
}

TEST_CASE("α = 0: IDS is k/π up to O(1/L)")
{
    const auto v = fx::cosine();
    const HillDispersion d(v, 2);
    const OracleSystem s(v, 0.0, 0.05);
    const long L = 400;
    CHECK(ids_direct(s, 0.0, -5.0, L).count == 0);
    for (double E : {2.0, 6.0, 9.5, 20.0, 35.0}) {
        const IdsEstimate e = ids_direct(s, 0.0, E, L);
        CHECK(e.value == doctest::Approx(double(e.count) / (2 * L)));
        CHECK(std::abs(e.value - d.k_real(E).real() / pi) < 2.0 / L);
    }
}

TEST_CASE("IDS is nondecreasing along a scan; serial and parallel agree")
{
    const OracleSystem s(fx::cosine(), 2.5, 0.05);
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(8.0 + 0.1 * i);
    const SpectrumScan p = spectrum_scan(s, grid, 200);
    const SpectrumScan q = spectrum_scan_serial(s, grid, 200);
    CHECK(p.counts == q.counts);
    for (std::size_t i = 1; i < p.counts.size(); ++i) CHECK(p.counts[i] >= p.counts[i - 1]);
    long total = 0;
    for (const auto& c : p.support()) total += c.states;
    CHECK(total == p.counts.back() - p.counts.front());
}

TEST_CASE("containment bookkeeping")
{
    SpectrumScan s;
    s.energies = {0, 1, 2, 3, 4, 5};
    s.counts = {0, 0, 3, 3, 4, 4};
    const Containment in = check_containment(s, {{0.5, 2.5}}, 0);
    CHECK_FALSE(in.ok);
    CHECK(in.inside == 3);
    CHECK(in.outside == 1);
    CHECK(check_containment(s, {{0.5, 2.5}}, 1).ok);
    const auto g = two_tier_grid(0, 1, 10, {{0.5, 0.50001}});
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(std::find(g.begin(), g.end(), 0.50001) != g.end());
}

TEST_CASE("finite-gap input needs Dirichlet phases for the oracle")
{
    FiniteGapSpec bare;
    bare.edges = fx::two_gap().edges;
    CHECK_THROWS_AS(pointwise_potential(PeriodicPotential::finite_gap(bare)), Error);
    const PeriodicPotential v = pointwise_potential(PeriodicPotential::finite_gap(fx::two_gap()));
    CHECK(v.has_pointwise());
}

TEST_CASE("model cocycle")
{
    ModelCocycle m;
    m.epsilon = 0.05;
    CHECK(m.h() == doctest::Approx(0.05 * std::fmod(two_pi / 0.05, 1.0)));

    SUBCASE("τ = 0 is diagonal: log θ_n")
    {
        m.tau = 0;
        m.theta_n = theta_from_lambda(1.25);
        CHECK(std::abs(model_lyapunov(m, 1000000).value - std::log(2.0)) < 1e-3);
        m.theta_n = 1;
        CHECK(std::abs(model_lyapunov(m, 100000).value) < 1e-6);
    }
    SUBCASE("large τ: 2 log τ + <log|g₀g_π|>")
    {
        m.theta_n = 2;
        m.xi0 = 0.5;
        m.xi_pi = -0.3;
        m.phi0 = 0.2;
        m.phi_pi = 1.1;
        double mean = 0;
        const int N = 100000;
        for (int i = 0; i < N; ++i) {
            const double t = two_pi * (i + 0.5) / N;
            mean += std::log(std::abs((0.5 + std::sin(t + 0.2)) * (-0.3 + std::sin(t + 1.1)))) / N;
        }
        m.tau = 100;
        const double l1 = model_lyapunov(m, 1000000).value;
        CHECK(std::abs(l1 - (2 * std::log(100.0) + mean)) < 0.2 * l1);
        m.tau = 1000;
        const double l2 = model_lyapunov(m, 1000000).value;
        CHECK(std::abs((l2 - l1) - 2 * std::log(10.0)) < 0.01);
    }
    SUBCASE("ζ → ζ + h leaves the exponent unchanged")
    {
        m.tau = 3;
        m.theta_n = 1.5;
        m.xi0 = 0.2;
        m.xi_pi = 0.1;
        for (double z : {0.0, 0.37, 1.2}) {
            const ModelLyapunov a = model_lyapunov(m, 400000, z);
            const ModelLyapunov b = model_lyapunov(m, 400000, z + m.h());
            CHECK(std::abs(a.value - b.value) < 3 * std::sqrt(a.variance + b.variance) + 1e-4);
        }
    }
}

}
