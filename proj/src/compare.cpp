#include "qpw/compare.hpp"

#include <algorithm>
#include <cmath>

namespace qpw {

namespace {

struct Span {
    double lo, hi, weight;
    bool resonant;
    int members;
};

std::vector<Span> merge(const SpectralReport& r, double widen)
{
    std::vector<Span> s;
    for (const auto& iv : r.intervals) {
        const double c = iv.coarse_center;
        const double w = widen * iv.coarse_halfwidth;
        // resonant-pair components carry their own extent; keep the larger one
        const double lo = std::min(c - w, iv.center - iv.halfwidth), hi = std::max(c + w, iv.center + iv.halfwidth);
        s.push_back({lo, hi, iv.dos_weight, iv.resonant, 1});
    }
    std::sort(s.begin(), s.end(), [](const Span& a, const Span& b) { return a.lo < b.lo; });
    std::vector<Span> out;
    for (const auto& x : s) {
        if (!out.empty() && x.lo <= out.back().hi) {
            out.back().hi = std::max(out.back().hi, x.hi);
            out.back().weight += x.weight;
            out.back().resonant = out.back().resonant || x.resonant;
            ++out.back().members;
        } else {
            out.push_back(x);
        }
    }
    return out;
}

}  // namespace

std::vector<std::pair<double, double>> widened_groups(const SpectralReport& r, double widen)
{
    std::vector<std::pair<double, double>> out;
    for (const auto& s : merge(r, widen)) out.emplace_back(s.lo, s.hi);
    return out;
}

Comparison compare_report(const SpectralReport& r, const PeriodicPotential& v, const CompareOptions& opt)
{
    Comparison c;
    c.L = opt.L > 0 ? opt.L : long(std::ceil(20 * pi / r.epsilon));
    const OracleSystem sys(pointwise_potential(v), r.alpha, r.epsilon, opt.steps_per_cell);
    const std::vector<Span> groups = merge(r, opt.widen);
    std::vector<std::pair<double, double>> pred;
    for (const auto& g : groups) pred.emplace_back(g.lo, g.hi);

    c.scan = spectrum_scan(sys, two_tier_grid(r.lo, r.hi, opt.coarse, pred), c.L, opt.zeta);
    // one boundary state per gap per Dirichlet end
    c.containment = check_containment(c.scan, pred, 2 * long(pred.size() + 1));
    for (const auto& g : groups) {
        GroupCheck gc;
        gc.lo = g.lo, gc.hi = g.hi, gc.members = g.members, gc.resonant = g.resonant;
        gc.predicted = g.weight;
        gc.states = c.scan.count_at(g.hi) - c.scan.count_at(g.lo);
        gc.increment = double(gc.states) / (2.0 * double(c.L));
        gc.ratio = gc.increment / gc.predicted;
        c.groups.push_back(gc);
    }

    const int n = std::min<int>(opt.theta_samples, int(r.intervals.size()));
    for (int k = 0; k < n; ++k) {
        const std::size_t i = n == 1 ? 0 : sz(k) * (r.intervals.size() - 1) / sz(n - 1);
        const auto& iv = r.intervals[i];
        ThetaCheck t;
        t.E = iv.center;
        t.predicted = iv.theta;
        t.oracle = lyapunov_averaged(sys, iv.center, 2 * c.L);
        c.theta.push_back(t);
    }
    return c;
}

nlohmann::json to_json(const Comparison& c)
{
    using nlohmann::json;
    json j;
    j["L"] = c.L;
    j["containment"] = {{"ok", c.containment.ok},
                        {"states_inside", c.containment.inside},
                        {"states_outside", c.containment.outside},
                        {"allowance", c.containment.allowance}};
    json stray = json::array();
    for (const auto& s : c.containment.stray) stray.push_back({{"lo", s.lo}, {"hi", s.hi}, {"states", s.states}});
    j["containment"]["stray"] = stray;
    json g = json::array();
    for (const auto& x : c.groups)
        g.push_back({{"lo", x.lo}, {"hi", x.hi}, {"members", x.members}, {"resonant", x.resonant},
                     {"predicted_dos", x.predicted}, {"states", x.states}, {"ids_increment", x.increment},
                     {"ratio", x.ratio}});
    j["groups"] = g;
    json t = json::array();
    for (const auto& x : c.theta)
        t.push_back({{"E", x.E}, {"predicted", x.predicted}, {"oracle", x.oracle.value},
                     {"oracle_error", x.oracle.error}, {"zeta_spread", x.oracle.spread}});
    j["theta"] = t;
    return j;
}

}  // namespace qpw
