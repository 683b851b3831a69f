// Command-line front end: band tables, action profiles, spectral predictions,
// oracle comparisons and the phase-diagram scan.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpw/compare.hpp"
#include "qpw/finite_gap.hpp"
#include "qpw/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpw;

namespace {

struct Common {
    std::string potential;
    double alpha = 0, epsilon = 0;
    std::vector<double> window;
    int gap = 1;
    std::string out = ".";
    std::set<std::string> formats;
};

bool wants(const Common& c, const std::string& f) { return c.formats.empty() || c.formats.count(f); }

void write_file(const Common& c, const std::string& name, const std::string& body)
{
    fs::create_directories(c.out);
    std::ofstream os(fs::path(c.out) / name);
    if (!os) throw Error(ErrorKind::NumericsError, "cannot write " + name);
    os << body;
    std::cerr << "wrote " << (fs::path(c.out) / name).string() << '\n';
}

std::shared_ptr<const Dispersion> dispersion_for(const PeriodicPotential& v, int gap)
{
    return make_dispersion(v, std::max(gap + 1, 3));
}

std::pair<double, double> window_of(const Common& c)
{
    if (c.window.size() != 2 || !(c.window[1] > c.window[0]))
        throw Error(ErrorKind::OutOfRange, "--window needs Emin,Emax with Emin < Emax");
    return {c.window[0], c.window[1]};
}

int cmd_bands(const Common& c, int count)
{
    const PeriodicPotential v = load_potential(c.potential);
    const auto disp = dispersion_for(v, std::max(count, c.gap));
    const BandStructure& b = disp->bands();
    json j;
    j["mode"] = to_string(v.mode());
    j["edges"] = b.edges;
    j["open"] = b.open;
    std::ostringstream csv;
    csv.precision(15);
    csv << "gap,lower,upper,open\n";
    for (int n = 1; n <= b.n_gaps; ++n) {
        csv << n << ',' << b.edge(2 * n) << ',' << b.edge(2 * n + 1) << ',' << b.gap_open(n) << '\n';
        if (!b.gap_open(n)) std::cerr << "warning: gap " << n << " is closed\n";
    }
    std::cout << csv.str();
    if (wants(c, "json")) write_file(c, "bands.json", j.dump(2) + "\n");
    if (wants(c, "csv")) write_file(c, "bands.csv", csv.str());
    require_open_gap(b, c.gap);  // hypothesis (O) for the gap of interest
    return 0;
}

int cmd_profile(const Common& c, int points)
{
    const PeriodicPotential v = load_potential(c.potential);
    const auto [lo, hi] = window_of(c);
    const auto disp = dispersion_for(v, c.gap);
    std::vector<double> E;
    for (int i = 0; i < points; ++i) E.push_back(lo + (hi - lo) * i / std::max(1, points - 1));
    const auto rows = action_profile(disp, c.gap, c.alpha, E);
    for (const auto& r : rows)
        if (!r.ok) std::cerr << "E = " << r.actions.E << ": " << r.error << '\n';
    const std::string csv = to_csv(rows);
    std::cout << csv;
    if (wants(c, "csv")) write_file(c, "profile.csv", csv);
    return 0;
}

SpectralReport build_report(const Common& c, const PeriodicPotential& v, int nodes)
{
    const auto [lo, hi] = window_of(c);
    if (!(c.epsilon > 0)) throw Error(ErrorKind::OutOfRange, "--epsilon must be positive");
    const auto disp = dispersion_for(v, c.gap);
    require_open_gap(disp->bands(), c.gap);
    const LambdaChoice lam = resolve_lambda(v, disp->bands(), c.gap);
    ReportOptions opt;
    opt.table_nodes = nodes;
    return spectral_report(disp, c.gap, c.alpha, c.epsilon, lo, hi, lam, opt);
}

int cmd_predict(const Common& c, int nodes)
{
    const PeriodicPotential v = load_potential(c.potential);
    const SpectralReport r = build_report(c, v, nodes);
    const json j = to_json(r);
    std::cout << "intervals: " << r.intervals.size() << ", resonant pairs: " << r.pairs.size()
              << ", delta0 = " << r.delta0 << ", dos total = " << r.dos_total << '\n';
    if (wants(c, "json")) write_file(c, "report.json", j.dump(2) + "\n");
    if (wants(c, "svg")) write_file(c, "strip.svg", strip_svg(r));
    if (wants(c, "csv")) {
        std::ostringstream os;
        os.precision(17);
        os << "type,l,center,halfwidth,nature,theta,dos_weight,resonant\n";
        for (const auto& iv : r.intervals)
            os << to_string(iv.type) << ',' << iv.l << ',' << iv.center << ',' << iv.halfwidth << ','
               << to_string(iv.nature) << ',' << iv.theta << ',' << iv.dos_weight << ',' << iv.resonant << '\n';
        write_file(c, "intervals.csv", os.str());
    }
    return 0;
}

int cmd_compare(const Common& c, int nodes, const CompareOptions& copt)
{
    const PeriodicPotential v = load_potential(c.potential);
    const SpectralReport r = build_report(c, v, nodes);
    const Comparison cmp = compare_report(r, v, copt);
    json j = to_json(cmp);
    j["report"] = to_json(r);
    std::cout << "containment: " << (cmp.containment.ok ? "ok" : "FAILED") << " (" << cmp.containment.inside
              << " states inside, " << cmp.containment.outside << " outside, allowance "
              << cmp.containment.allowance << ")\n";
    for (const auto& g : cmp.groups)
        std::cout << "  [" << g.lo << ", " << g.hi << "] states " << g.states << " ratio " << g.ratio << '\n';
    for (const auto& t : cmp.theta)
        std::cout << "  Theta(" << t.E << "): predicted " << t.predicted << ", oracle " << t.oracle.value
                  << " +- " << t.oracle.error << '\n';
    if (wants(c, "json")) write_file(c, "compare.json", j.dump(2) + "\n");
    return 0;
}

int cmd_phase_diagram(const Common& c, const std::vector<double>& ar, const std::vector<double>& er,
                      const std::string& grid)
{
    const PeriodicPotential v = load_potential(c.potential);
    if (v.mode() != PotentialMode::FiniteGap)
        throw Error(ErrorKind::UnsupportedMode, "phase-diagram expects a finite-gap edges file");
    const auto disp = dispersion_for(v, c.gap);
    int rows = 200, cols = 200;
    if (!grid.empty() && std::sscanf(grid.c_str(), "%dx%d", &rows, &cols) != 2)
        throw Error(ErrorKind::OutOfRange, "--grid expects RxC");
    PhaseDiagramSpec s = delta_bounding_box(disp->bands(), c.gap, rows, cols);
    if (ar.size() == 2) s.alpha_lo = ar[0], s.alpha_hi = ar[1];
    if (er.size() == 2) s.E_lo = er[0], s.E_hi = er[1];
    const auto cells = phase_diagram(disp, s);
    const PhaseDiagramSummary sum = summarize(cells);
    std::cout << "cells " << sum.cells << ", in Delta " << sum.in_delta << ", computed " << sum.ok
              << "\ntransition (both conditions): " << sum.transition_both << "\nalternation: " << sum.alternation
              << "\ntau large/small: " << sum.tau_large << "/" << sum.tau_small
              << "\nrho large/small: " << sum.rho_large << "/" << sum.rho_small << '\n';
    if (wants(c, "csv")) write_file(c, "phase_diagram.csv", to_csv(cells));
    if (wants(c, "svg")) {
        write_file(c, "phase_actions.svg", phase_diagram_svg(cells, s, DiagramLayer::actions, &disp->bands()));
        write_file(c, "phase_tau_rho.svg", phase_diagram_svg(cells, s, DiagramLayer::tau_rho, &disp->bands()));
    }
    return 0;
}

void add_common(CLI::App* a, Common& c, bool physics)
{
    a->add_option("--potential", c.potential, "potential JSON file")->required()->check(CLI::ExistingFile);
    a->add_option("--gap", c.gap, "interacting gap n")->check(CLI::PositiveNumber);
    a->add_option("--out", c.out, "output directory");
    a->add_option("--format", c.formats, "csv, json and/or svg (default: all)")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
    if (physics) {
        a->add_option("--alpha", c.alpha, "coupling alpha")->required();
        a->add_option("--window", c.window, "energy window Emin,Emax")->delimiter(',')->expected(2);
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Quasi-periodic Schrodinger operators: complex-WKB predictions and direct checks"};
    app.require_subcommand(1);
    Common c;

    auto* bands = app.add_subcommand("bands", "band edges of the periodic operator");
    add_common(bands, c, false);
    int count = 6;
    bands->add_option("--count", count, "number of gaps to locate");

    auto* profile = app.add_subcommand("profile", "phase integrals and actions across the window");
    add_common(profile, c, true);
    int points = 21;
    profile->add_option("--points", points, "energies in the window");

    int nodes = 25;
    auto* predict = app.add_subcommand("predict", "spectral report for one (alpha, epsilon, J)");
    add_common(predict, c, true);
    predict->add_option("--epsilon", c.epsilon, "frequency epsilon of the cosine")->required();
    predict->add_option("--nodes", nodes, "Chebyshev nodes of the action table");

    auto* compare = app.add_subcommand("compare", "prediction against direct integration");
    add_common(compare, c, true);
    CompareOptions copt;
    compare->add_option("--epsilon", c.epsilon, "frequency epsilon of the cosine")->required();
    compare->add_option("--nodes", nodes, "Chebyshev nodes of the action table");
    compare->add_option("--length", copt.L, "half-length L of [-L, L] (default ceil(20 pi/epsilon))");
    compare->add_option("--theta-samples", copt.theta_samples, "intervals with a Lyapunov run");
    compare->add_option("--coarse", copt.coarse, "uniform tier of the scan grid");

    auto* phase = app.add_subcommand("phase-diagram", "regime map over (alpha, E) for a finite-gap spectrum");
    add_common(phase, c, false);
    std::vector<double> arange, erange;
    std::string grid;
    phase->add_option("--alpha-range", arange, "alpha_min,alpha_max")->delimiter(',')->expected(2);
    phase->add_option("--E-range", erange, "E_min,E_max")->delimiter(',')->expected(2);
    phase->add_option("--grid", grid, "RxC cells (default 200x200)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*bands) return cmd_bands(c, count);
        if (*profile) return cmd_profile(c, points);
        if (*predict) return cmd_predict(c, nodes);
        if (*compare) return cmd_compare(c, nodes, copt);
        if (*phase) return cmd_phase_diagram(c, arange, erange, grid);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return is_hypothesis_failure(e.kind()) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
