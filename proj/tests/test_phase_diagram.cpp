#include <cmath>
#include <regex>

#include <doctest.h>

#include "fixtures.hpp"
#include "qpw/phase_diagram.hpp"
#include "qpw/svg.hpp"

using namespace qpw;

namespace {

PhaseDiagramSpec small_spec(int rows = 24, int cols = 24)
{
    return delta_bounding_box(fx::two_gap_dispersion()->bands(), 1, rows, cols);
}

const std::vector<PhaseDiagramCell>& small_diagram()
{
    static const auto cells = phase_diagram(fx::two_gap_dispersion(), small_spec());
    return cells;
}

}  // namespace

TEST_SUITE("phase_diagram") {

TEST_CASE("Δ is the intersection of the four strips")
{
    const BandStructure& b = fx::two_gap_dispersion()->bands();
    const auto& e = fx::two_gap().edges;
    const double a = 2.0;
    // E - α crosses E_1 and E_2, E + α crosses E_3 and E_4
    CHECK(in_delta(b, 1, a, 5.4));
    CHECK_FALSE(in_delta(b, 1, a, e[0] + a - 1e-9));
    CHECK_FALSE(in_delta(b, 1, a, e[1] + a + 1e-9));
    CHECK_FALSE(in_delta(b, 1, a, e[2] - a - 1e-9));
    CHECK_FALSE(in_delta(b, 1, 5.0, e[3] - 5.0 + 1e-9));

    const PhaseDiagramSpec s = small_spec();
    CHECK(s.alpha_lo == doctest::Approx(0.5 * (e[2] - e[1])));
    CHECK(s.E_hi == doctest::Approx(0.5 * (e[1] + e[3])));
}

TEST_CASE("every computed cell gets exactly one label")
{
    const auto& cells = small_diagram();
    const PhaseDiagramSummary sum = summarize(cells);
    CHECK(sum.cells == 24 * 24);
    CHECK(sum.in_delta > 0);
    CHECK(sum.ok > 0);
    int labelled = 0;
    for (int r = 1; r < 6; ++r) labelled += sum.regime[r];
    CHECK(labelled == sum.ok);
    for (const auto& c : cells) {
        if (!c.in_delta) CHECK_FALSE(c.ok);
        if (!c.ok) {
            CHECK(c.regime == ActionRegime::none);
            continue;
        }
        CHECK(c.tau_large + c.tau_small <= 1);
        CHECK(c.rho_large + c.rho_small <= 1);
        if (c.rho_large) CHECK(c.actions.sh > 2 * std::min(c.actions.sv0, c.actions.sv_pi));
        CHECK(c.transition == (c.regime == ActionRegime::sh_max));
    }
}

TEST_CASE("parallel equals serial")
{
    const auto s = small_spec(10, 10);
    const auto p = phase_diagram(fx::two_gap_dispersion(), s);
    const auto q = phase_diagram_serial(fx::two_gap_dispersion(), s);
    CHECK(to_csv(p) == to_csv(q));
}

TEST_CASE("CSV and SVG round trips")
{
    const auto& cells = small_diagram();
    const std::string csv = to_csv(cells);
    CHECK(to_csv(phase_diagram_from_csv(csv)) == csv);
    const BandStructure& b = fx::two_gap_dispersion()->bands();
    for (DiagramLayer layer : {DiagramLayer::actions, DiagramLayer::tau_rho}) {
        const std::string svg = phase_diagram_svg(cells, small_spec(), layer, &b);
        CHECK(to_csv(phase_diagram_from_svg(svg)) == csv);
    }
    CHECK_THROWS_AS(phase_diagram_from_csv("header\n1,2,3\n"), Error);
}

TEST_CASE("strip SVG carries every interval")
{
    SpectralReport r;
    r.lo = 5.0;
    r.hi = 6.0;
    r.alpha = 2;
    r.epsilon = 0.05;
    for (int i = 0; i < 3; ++i) {
        SpectralInterval iv;
        iv.type = i == 1 ? IntervalType::type_pi : IntervalType::type0;
        iv.center = 5.2 + 0.3 * i;
        iv.halfwidth = 1e-9;
        iv.resonant = i == 2;
        r.intervals.push_back(iv);
    }
    const std::string svg = strip_svg(r);
    const std::regex re("data-center=\"([^\"]+)\"");
    int n = 0;
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it, ++n)
        CHECK(std::stod((*it)[1]) == r.intervals[sz(n)].center);
    CHECK(n == 3);
    CHECK(svg.find("stroke-width") != std::string::npos);
}

}
