#include "qpw/svg.hpp"

#include <algorithm>
#include <iomanip>
#include <regex>
#include <sstream>

namespace qpw {

namespace {

const char* regime_colour(const PhaseDiagramCell& c, DiagramLayer layer)
{
    if (!c.in_delta) return "#ffffff";
    if (!c.ok) return "#bbbbbb";
    if (layer == DiagramLayer::tau_rho) {
        if (c.tau_large) return c.rho_large ? "#b2182b" : "#ef8a62";
        return c.rho_large ? "#67a9cf" : "#2166ac";
    }
    switch (c.regime) {
    case ActionRegime::sh_max: return "#d73027";
    case ActionRegime::sh_min: return "#4575b4";
    case ActionRegime::sv0_sh_svpi: return "#fee090";
    case ActionRegime::svpi_sh_sv0: return "#91bfdb";
    default: return "#000000";
    }
}

const char* nature_colour(Nature n)
{
    switch (n) {
    case Nature::singular: return "#d73027";
    case Nature::mostly_ac: return "#4575b4";
    default: return "#999999";
    }
}

}  // namespace

std::string phase_diagram_svg(const std::vector<PhaseDiagramCell>& cells, const PhaseDiagramSpec& s,
                              DiagramLayer layer, const BandStructure* bands)
{
    const double W = 600, H = 600, m = 50;
    const double cw = W / s.cols, ch = H / s.rows;
    auto px = [&](double a) { return m + (a - s.alpha_lo) / (s.alpha_hi - s.alpha_lo) * W; };
    auto py = [&](double e) { return m + H - (e - s.E_lo) / (s.E_hi - s.E_lo) * H; };
    std::ostringstream os;
    os << std::setprecision(17);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + 2 * m << "\" height=\"" << H + 2 * m
       << "\" data-layer=\"" << (layer == DiagramLayer::actions ? "actions" : "tau_rho") << "\">\n";
    for (const auto& c : cells) {
        os << "<rect x=\"" << px(c.alpha) - cw / 2 << "\" y=\"" << py(c.E) - ch / 2 << "\" width=\"" << cw
           << "\" height=\"" << ch << "\" fill=\"" << regime_colour(c, layer) << "\""
           << " data-alpha=\"" << c.alpha << "\" data-E=\"" << c.E << "\" data-in-delta=\"" << c.in_delta
           << "\" data-ok=\"" << c.ok << "\" data-regime=\"" << to_string(c.regime) << "\" data-sh=\""
           << c.actions.sh << "\" data-sv0=\"" << c.actions.sv0 << "\" data-sv-pi=\"" << c.actions.sv_pi
           << "\" data-flags=\"" << c.tau_large << c.tau_small << c.rho_large << c.rho_small << c.transition
           << c.transition_ratio << "\"/>\n";
    }
    if (bands) {
        const int n = s.n;
        const double e[4] = {bands->edge(2 * n - 1), bands->edge(2 * n), bands->edge(2 * n + 1),
                             bands->edge(2 * n + 2)};
        // E = e_k + α for the lower band, E = e_k - α for the upper one
        for (int k = 0; k < 4; ++k) {
            const double sgn = k < 2 ? 1 : -1;
            os << "<line x1=\"" << px(s.alpha_lo) << "\" y1=\"" << py(e[k] + sgn * s.alpha_lo) << "\" x2=\""
               << px(s.alpha_hi) << "\" y2=\"" << py(e[k] + sgn * s.alpha_hi)
               << "\" stroke=\"black\" stroke-width=\"1\" class=\"delta-boundary\"/>\n";
        }
    }
    os << "<text x=\"" << m + W / 2 << "\" y=\"" << H + 2 * m - 10 << "\" text-anchor=\"middle\">alpha</text>\n";
    os << "<text x=\"15\" y=\"" << m + H / 2 << "\" transform=\"rotate(-90 15 " << m + H / 2
       << ")\" text-anchor=\"middle\">E</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::vector<PhaseDiagramCell> phase_diagram_from_svg(const std::string& svg)
{
    static const std::regex rect(
        "data-alpha=\"([^\"]*)\" data-E=\"([^\"]*)\" data-in-delta=\"([01])\" data-ok=\"([01])\" "
        "data-regime=\"([^\"]*)\" data-sh=\"([^\"]*)\" data-sv0=\"([^\"]*)\" data-sv-pi=\"([^\"]*)\" "
        "data-flags=\"([01]{6})\"");
    std::ostringstream csv;
    csv << "header\n";
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), rect); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        const std::string f = m[9];
        csv << m[1] << ',' << m[2] << ',' << m[3] << ',' << m[4] << ',' << m[5] << ',' << m[6] << ',' << m[7]
            << ',' << m[8];
        for (char ch : f) csv << ',' << ch;
        csv << '\n';
    }
    return phase_diagram_from_csv(csv.str());
}

std::string strip_svg(const SpectralReport& r)
{
    const double W = 900, H = 160, m = 40;
    auto px = [&](double e) { return m + (e - r.lo) / (r.hi - r.lo) * W; };
    std::ostringstream os;
    os << std::setprecision(17);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + 2 * m << "\" height=\"" << H
       << "\" data-alpha=\"" << r.alpha << "\" data-epsilon=\"" << r.epsilon << "\">\n";
    os << "<line x1=\"" << m << "\" y1=\"" << H / 2 << "\" x2=\"" << m + W << "\" y2=\"" << H / 2
       << "\" stroke=\"black\"/>\n";
    for (const auto& iv : r.intervals) {
        // too narrow to see at this scale: draw at least one pixel
        const double x0 = px(iv.center - iv.halfwidth), x1 = px(iv.center + iv.halfwidth);
        const double w = std::max(1.0, x1 - x0);
        const double y = iv.type == IntervalType::type0 ? H / 2 - 30 : iv.type == IntervalType::type_pi ? H / 2 + 5 : H / 2 - 12;
        os << "<rect x=\"" << 0.5 * (x0 + x1) - w / 2 << "\" y=\"" << y << "\" width=\"" << w
           << "\" height=\"25\" fill=\"" << nature_colour(iv.nature) << "\""
           << (iv.resonant ? " stroke=\"black\" stroke-width=\"0.5\"" : "") << " data-center=\"" << iv.center
           << "\" data-halfwidth=\"" << iv.halfwidth << "\" data-type=\"" << to_string(iv.type)
           << "\" data-nature=\"" << to_string(iv.nature) << "\" data-dos-weight=\"" << iv.dos_weight
           << "\"/>\n";
    }
    os << "<text x=\"" << m << "\" y=\"" << H - 8 << "\">" << r.lo << "</text>\n";
    os << "<text x=\"" << m + W << "\" y=\"" << H - 8 << "\" text-anchor=\"end\">" << r.hi << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace qpw
