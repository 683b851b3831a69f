#include "qpw/phase_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "qpw/parallel.hpp"

namespace qpw {

const char* to_string(ActionRegime r)
{
    switch (r) {
    case ActionRegime::none: return "none";
    case ActionRegime::sh_max: return "Sh_max";
    case ActionRegime::sh_min: return "Sh_min";
    case ActionRegime::sv0_sh_svpi: return "Sv0<Sh<Svpi";
    case ActionRegime::svpi_sh_sv0: return "Svpi<Sh<Sv0";
    case ActionRegime::tie: return "tie";
    }
    return "?";
}

namespace {

ActionRegime regime_from_string(const std::string& s)
{
    for (auto r : {ActionRegime::none, ActionRegime::sh_max, ActionRegime::sh_min,
                   ActionRegime::sv0_sh_svpi, ActionRegime::svpi_sh_sv0, ActionRegime::tie})
        if (s == to_string(r)) return r;
    throw Error(ErrorKind::ConsistencyError, "unknown regime label '" + s + "'");
}

ActionRegime classify(const ActionSet& a)
{
    const double h = a.sh, v0 = a.sv0, vp = a.sv_pi;
    if (h > v0 && h > vp) return ActionRegime::sh_max;
    if (h < v0 && h < vp) return ActionRegime::sh_min;
    if (v0 < h && h < vp) return ActionRegime::sv0_sh_svpi;
    if (vp < h && h < v0) return ActionRegime::svpi_sh_sv0;
    return ActionRegime::tie;
}

PhaseDiagramCell evaluate(const std::shared_ptr<const Dispersion>& disp, const PhaseDiagramSpec& s,
                          int i, int j)
{
    PhaseDiagramCell c;
    c.alpha = s.alpha_lo + (s.alpha_hi - s.alpha_lo) * (j + 0.5) / s.cols;
    c.E = s.E_lo + (s.E_hi - s.E_lo) * (i + 0.5) / s.rows;
    c.in_delta = in_delta(disp->bands(), s.n, c.alpha, c.E);
    if (!c.in_delta) return c;
    try {
        const WindowContext ctx = make_window(disp, s.n, c.E, c.alpha);
        const BranchPointSet bp = branch_points(ctx);
        c.actions = cut_actions(ctx, s.tol);
        const auto& a = c.actions;
        if (!check_T(ctx, bp, a.sh, a.sv0, a.sv_pi).holds)
            throw Error(ErrorKind::GeometryError, "(T) fails");
        c.ok = true;
        c.regime = classify(a);
        const double t = a.sh - a.sv0 - a.sv_pi, r = 0.5 * a.sh - std::min(a.sv0, a.sv_pi);
        c.tau_large = t > 0;
        c.tau_small = t < 0;
        c.rho_large = r > 0;
        c.rho_small = r < 0;
        c.transition = a.sh > std::max(a.sv0, a.sv_pi);
        c.transition_ratio = 1.5 * std::min(a.sv0, a.sv_pi) > a.sh;
    } catch (const Error& e) {
        c.error = e.what();
    }
    return c;
}

std::vector<PhaseDiagramCell> run(std::shared_ptr<const Dispersion> disp, const PhaseDiagramSpec& s, bool par)
{
    if (s.rows < 1 || s.cols < 1) throw Error(ErrorKind::OutOfRange, "empty phase-diagram grid");
    std::vector<PhaseDiagramCell> cells(sz(s.rows) * sz(s.cols));
    auto body = [&](int k) { cells[sz(k)] = evaluate(disp, s, k / s.cols, k % s.cols); };
    if (par)
        parallel_for(s.rows * s.cols, body);
    else
        serial_for(s.rows * s.cols, body);
    return cells;
}

}  // namespace

bool in_delta(const BandStructure& b, int n, double alpha, double E)
{
    const double u = E - alpha, w = E + alpha;
    return u > b.edge(2 * n - 1) && u < b.edge(2 * n) && w > b.edge(2 * n + 1) && w < b.edge(2 * n + 2);
}

PhaseDiagramSpec delta_bounding_box(const BandStructure& b, int n, int rows, int cols)
{
    const double e1 = b.edge(2 * n - 1), e2 = b.edge(2 * n), e3 = b.edge(2 * n + 1), e4 = b.edge(2 * n + 2);
    if (!std::isfinite(e4)) throw Error(ErrorKind::OutOfRange, "gap has no upper band edge");
    PhaseDiagramSpec s;
    s.alpha_lo = 0.5 * (e3 - e2);
    s.alpha_hi = 0.5 * (e4 - e1);
    s.E_lo = 0.5 * (e1 + e3);
    s.E_hi = 0.5 * (e2 + e4);
    s.rows = rows;
    s.cols = cols;
    s.n = n;
    return s;
}

std::vector<PhaseDiagramCell> phase_diagram(std::shared_ptr<const Dispersion> disp, const PhaseDiagramSpec& spec)
{
    return run(std::move(disp), spec, true);
}

std::vector<PhaseDiagramCell> phase_diagram_serial(std::shared_ptr<const Dispersion> disp,
                                                   const PhaseDiagramSpec& spec)
{
    return run(std::move(disp), spec, false);
}

PhaseDiagramSummary summarize(const std::vector<PhaseDiagramCell>& cells)
{
    PhaseDiagramSummary s;
    for (const auto& c : cells) {
        ++s.cells;
        s.in_delta += c.in_delta;
        if (!c.ok) continue;
        ++s.ok;
        s.transition_both += c.transition && c.transition_ratio;
        s.alternation += c.regime == ActionRegime::sv0_sh_svpi || c.regime == ActionRegime::svpi_sh_sv0;
        s.tau_large += c.tau_large;
        s.tau_small += c.tau_small;
        s.rho_large += c.rho_large;
        s.rho_small += c.rho_small;
        ++s.regime[int(c.regime)];
    }
    return s;
}

std::string to_csv(const std::vector<PhaseDiagramCell>& cells)
{
    std::ostringstream os;
    os << std::setprecision(17)
       << "alpha,E,in_delta,ok,regime,sh,sv0,sv_pi,tau_large,tau_small,rho_large,rho_small,transition,transition_ratio\n";
    for (const auto& c : cells)
        os << c.alpha << ',' << c.E << ',' << c.in_delta << ',' << c.ok << ',' << to_string(c.regime) << ','
           << c.actions.sh << ',' << c.actions.sv0 << ',' << c.actions.sv_pi << ',' << c.tau_large << ','
           << c.tau_small << ',' << c.rho_large << ',' << c.rho_small << ',' << c.transition << ','
           << c.transition_ratio << '\n';
    return os.str();
}

std::vector<PhaseDiagramCell> phase_diagram_from_csv(const std::string& csv)
{
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    std::vector<PhaseDiagramCell> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
        if (f.size() != 14) throw Error(ErrorKind::ConsistencyError, "malformed phase-diagram row: " + line);
        PhaseDiagramCell c;
        c.alpha = std::stod(f[0]);
        c.E = std::stod(f[1]);
        c.in_delta = f[2] == "1";
        c.ok = f[3] == "1";
        c.regime = regime_from_string(f[4]);
        c.actions.sh = std::stod(f[5]);
        c.actions.sv0 = std::stod(f[6]);
        c.actions.sv_pi = std::stod(f[7]);
        c.tau_large = f[8] == "1";
        c.tau_small = f[9] == "1";
        c.rho_large = f[10] == "1";
        c.rho_small = f[11] == "1";
        c.transition = f[12] == "1";
        c.transition_ratio = f[13] == "1";
        out.push_back(c);
    }
    return out;
}

}  // namespace qpw
