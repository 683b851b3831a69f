#include "qpw/wkb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qpw/finite_gap.hpp"
#include "qpw/parallel.hpp"

namespace qpw {

namespace {

constexpr double ninf = -std::numeric_limits<double>::infinity();

[[noreturn]] void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

double safe_log(double x) { return x > 0 ? std::log(x) : ninf; }

}  // namespace

// ---------------------------------------------------------------------------
// ActionTable

ActionTable ActionTable::sample(const std::function<ActionSet(double)>& f, double lo, double hi,
                                int nodes)
{
    if (!(hi > lo)) fail(ErrorKind::OutOfRange, "empty energy window");
    if (nodes < 3) fail(ErrorKind::OutOfRange, "action table needs at least 3 nodes");
    ActionTable t;
    t.lo_ = lo;
    t.hi_ = hi;
    const int N = nodes - 1;
    t.x_.resize(sz(nodes));
    t.w_.resize(sz(nodes));
    for (int j = 0; j <= N; ++j) {
        t.x_[sz(j)] = 0.5 * (lo + hi) - 0.5 * (hi - lo) * std::cos(pi * j / N);
        t.w_[sz(j)] = (j % 2 ? -1.0 : 1.0) * (j == 0 || j == N ? 0.5 : 1.0);
    }
    t.samples_.resize(sz(nodes));
    parallel_for(nodes, [&](int j) {
        t.samples_[sz(j)] = f(t.x_[sz(j)]);
        t.samples_[sz(j)].E = t.x_[sz(j)];
    });
    return t;
}

ActionTable ActionTable::from_window(std::shared_ptr<const Dispersion> disp, int n, double alpha,
                                     double lo, double hi, int nodes, const ActionOptions& opt)
{
    return sample(
        [&](double E) { return compute_actions(make_window(disp, n, E, alpha), opt); }, lo, hi,
        nodes);
}

double ActionTable::interp(double E, double ActionSet::*field) const
{
    double num = 0, den = 0;
    for (std::size_t j = 0; j < x_.size(); ++j) {
        const double d = E - x_[j];
        if (d == 0) return samples_[j].*field;
        const double c = w_[j] / d;
        num += c * (samples_[j].*field);
        den += c;
    }
    return num / den;
}

ActionSet ActionTable::at(double E) const
{
    ActionSet a;
    a.E = E;
    a.phi0 = interp(E, &ActionSet::phi0);
    a.phi_pi = interp(E, &ActionSet::phi_pi);
    a.sv0 = interp(E, &ActionSet::sv0);
    a.sv_pi = interp(E, &ActionSet::sv_pi);
    a.sh0 = interp(E, &ActionSet::sh0);
    a.sh_pi = interp(E, &ActionSet::sh_pi);
    a.sh = interp(E, &ActionSet::sh);
    a.dphi0 = interp(E, &ActionSet::dphi0);
    a.dphi_pi = interp(E, &ActionSet::dphi_pi);
    return a;
}

const char* to_string(SeqType t) { return t == SeqType::type0 ? "type0" : "typePi"; }

const char* to_string(IntervalType t)
{
    switch (t) {
    case IntervalType::type0: return "type0";
    case IntervalType::type_pi: return "typePi";
    case IntervalType::resonant_pair: return "resonantPair";
    }
    return "?";
}

const char* to_string(Nature n)
{
    switch (n) {
    case Nature::singular: return "singular";
    case Nature::mostly_ac: return "mostly_ac";
    case Nature::undetermined: return "undetermined";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Quantization

QuantizedSequence quantize(const ActionTable& t, double epsilon, SeqType type)
{
    if (!(epsilon > 0)) fail(ErrorKind::OutOfRange, "epsilon must be positive");
    const bool zero = type == SeqType::type0;
    auto phi = [&](double E) { return zero ? t.at(E).phi0 : t.at(E).phi_pi; };
    const double sgn = zero ? -1.0 : 1.0;

    for (const auto& a : t.samples())
        if (sgn * (zero ? a.dphi0 : a.dphi_pi) <= 0) {
            std::ostringstream os;
            os << (zero ? "Φ₀" : "Φ_π") << " is not monotone at E = " << a.E;
            fail(ErrorKind::InvariantViolation, os.str());
        }
    const int M = 8 * int(t.samples().size());
    std::vector<double> grid(sz(M + 1)), val(sz(M + 1));
    for (int j = 0; j <= M; ++j) {
        grid[sz(j)] = t.lo() + (t.hi() - t.lo()) * j / M;
        val[sz(j)] = phi(grid[sz(j)]);
        if (j > 0 && sgn * (val[sz(j)] - val[sz(j - 1)]) <= 0) {
            std::ostringstream os;
            os << (zero ? "Φ₀" : "Φ_π") << " is not monotone near E = " << grid[sz(j)];
            fail(ErrorKind::InvariantViolation, os.str());
        }
    }

    QuantizedSequence q;
    q.type = type;
    q.epsilon = epsilon;
    const double fmin = std::min(val.front(), val.back()), fmax = std::max(val.front(), val.back());
    const int l0 = std::max(0, int(std::ceil((fmin / epsilon - 0.5 * pi) / pi)));
    const int l1 = int(std::floor((fmax / epsilon - 0.5 * pi) / pi));
    for (int l = l0; l <= l1; ++l) {
        const double target = epsilon * (0.5 * pi + pi * l);
        auto f = [&](double E) { return phi(E) - target; };
        // bracket on the grid first, then polish
        std::size_t j = 1;
        while (j < grid.size() && sgn * (val[j] - target) < 0) ++j;
        if (j == grid.size()) continue;
        double E = solve_bracketed(f, grid[j - 1], grid[j], 1e-15 * (1 + std::abs(grid[j])),
                                   ErrorKind::NumericsError);
        for (int it = 0; it < 4 && std::abs(f(E) / epsilon) >= 1e-10; ++it) {
            const double d = zero ? t.at(E).dphi0 : t.at(E).dphi_pi;
            E -= f(E) / d;
        }
        if (std::abs(f(E) / epsilon) >= 1e-10) {
            std::ostringstream os;
            os << "quantized root for l = " << l << " not polished: residual " << f(E) / epsilon;
            fail(ErrorKind::NumericsError, os.str());
        }
        q.energies.push_back(E);
        q.index.push_back(l);
    }
    if (zero) {
        std::reverse(q.energies.begin(), q.energies.end());
        std::reverse(q.index.begin(), q.index.end());
    }
    q.spacing_C = 1;
    for (std::size_t i = 1; i < q.energies.size(); ++i) {
        const double d = q.energies[i] - q.energies[i - 1];
        q.spacing_C = std::max({q.spacing_C, d / epsilon, epsilon / d});
    }
    return q;
}

// ---------------------------------------------------------------------------
// Coarse description

double delta0(const ActionTable& t, int grid)
{
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid; ++j) {
        const ActionSet a = t.at(t.lo() + (t.hi() - t.lo()) * j / (grid - 1));
        m = std::min({m, a.sh, a.sv0, a.sv_pi});
    }
    for (const auto& a : t.samples()) m = std::min({m, a.sh, a.sv0, a.sv_pi});
    return 0.5 * m;
}

CoarseResult coarse_intervals(const QuantizedSequence& s0, const QuantizedSequence& spi,
                              const ActionTable& t, double epsilon)
{
    CoarseResult r;
    r.delta0 = delta0(t);
    r.halfwidth = std::exp(-r.delta0 / epsilon);
    auto make = [&](const QuantizedSequence& s, IntervalType ty) {
        std::vector<SpectralInterval> out;
        for (std::size_t i = 0; i < s.energies.size(); ++i) {
            SpectralInterval iv;
            iv.type = ty;
            iv.l = s.index[i];
            iv.center = iv.coarse_center = s.energies[i];
            iv.halfwidth = iv.coarse_halfwidth = r.halfwidth;
            iv.dos_weight = epsilon / two_pi;
            out.push_back(iv);
        }
        return out;
    };
    r.zero = make(s0, IntervalType::type0);
    r.pi = make(spi, IntervalType::type_pi);

    // Intervals of one type are ε apart, so each meets at most one of the other.
    std::vector<int> taken(r.pi.size(), -1);
    for (std::size_t i = 0; i < r.zero.size(); ++i) {
        int best = -1, hits = 0;
        double bd = 0;
        for (std::size_t j = 0; j < r.pi.size(); ++j) {
            const double d = std::abs(r.pi[j].center - r.zero[i].center);
            if (d < 2 * r.halfwidth) {
                ++hits;
                if (best < 0 || d < bd) best = int(j), bd = d;
            }
        }
        if (best < 0) continue;
        if (hits > 1) r.zero[i].flags.push_back("meets_several");
        if (taken[sz(best)] >= 0) {
            r.pi[sz(best)].flags.push_back("meets_several");
            continue;
        }
        taken[sz(best)] = int(i);
        r.zero[i].resonant = r.pi[sz(best)].resonant = true;
        r.pairs.emplace_back(int(i), best);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Non-resonant intervals

SpectralInterval refine_nonresonant(const SpectralInterval& iv, const ActionTable& t,
                                    double epsilon, double lambda_n)
{
    if (iv.resonant) fail(ErrorKind::WrongRegime, "interval is resonant");
    const bool is_pi = iv.type == IntervalType::type_pi;
    const double E = iv.coarse_center;
    const ActionSet a = t.at(E);
    const TunnelCoefficients tc = tunneling(a, epsilon);
    const double dphi = is_pi ? a.dphi_pi : a.dphi0;
    const double other = is_pi ? a.phi0 : a.phi_pi;
    const double th = std::exp(tc.log_th);
    const double tv = std::exp(is_pi ? tc.log_tv_pi : tc.log_tv0);

    const double arg = other / epsilon;
    const double shift = epsilon * lambda_n / (2 * dphi) * th * std::tan(arg);
    const double width = epsilon / std::abs(dphi) * (th / (2 * std::abs(std::cos(arg))) + tv);

    SpectralInterval out = iv;
    out.center = E + shift;
    out.halfwidth = width;
    if (!(std::abs(shift) + width <= iv.coarse_halfwidth)) {
        std::ostringstream os;
        os << "refined interval at E = " << E << " (shift " << shift << ", width " << width
           << ") leaves its coarse interval of half-width " << iv.coarse_halfwidth;
        fail(ErrorKind::ReclassifyAsResonant, os.str());
    }
    if (!(width > 0)) out.halfwidth = std::numeric_limits<double>::min();
    return out;
}

SpectralInterval classify_nonresonant(const SpectralInterval& iv, const ActionTable& t,
                                      double epsilon, const QuantizedSequence& other,
                                      const ClassifyOptions& opt)
{
    const bool is_pi = iv.type == IntervalType::type_pi;
    const double E = iv.coarse_center;
    const ActionSet a = t.at(E);
    const TunnelCoefficients tc = tunneling(a, epsilon);

    SpectralInterval out = iv;
    double dist = std::numeric_limits<double>::infinity();
    for (double e : other.energies) dist = std::min(dist, std::abs(e - E));
    if (!std::isfinite(dist)) {
        dist = t.hi() - t.lo();
        out.flags.push_back("no_partner");
    }
    const double log_tv = is_pi ? tc.log_tv_pi : tc.log_tv0;
    out.log_lambda = log_tv - tc.log_th + safe_log(dist);
    out.theta = epsilon / two_pi * std::max(0.0, out.log_lambda);
    const double score = epsilon * out.log_lambda;
    if (score > opt.margin)
        out.nature = Nature::singular;
    else if (score < -opt.margin) {
        out.nature = Nature::mostly_ac;
        out.flags.push_back("subject_to_diophantine_epsilon");
    } else
        out.nature = Nature::undetermined;

    const double sv = is_pi ? a.sv_pi : a.sv0;
    out.far_field = dist >= std::pow(epsilon, opt.far_power) ? std::max(0.0, (a.sh - sv) / two_pi) : -1;
    out.theta_profile = {{out.center - out.halfwidth, out.theta}, {out.center + out.halfwidth, out.theta}};
    return out;
}

RegimeFlags action_regimes(const ActionTable& t, double delta, int grid)
{
    RegimeFlags f;
    f.delta = delta;
    f.min_sh = f.min_sv = std::numeric_limits<double>::infinity();
    f.max_sh = f.max_sv = -f.min_sh;
    bool alt0 = true, altpi = true;
    for (int j = 0; j < grid; ++j) {
        const ActionSet a = t.at(t.lo() + (t.hi() - t.lo()) * j / (grid - 1));
        alt0 = alt0 && a.sv_pi - a.sh > delta && a.sv0 - a.sh < -delta;
        altpi = altpi && a.sv0 - a.sh > delta && a.sv_pi - a.sh < -delta;
        f.min_sh = std::min(f.min_sh, a.sh);
        f.max_sh = std::max(f.max_sh, a.sh);
        f.min_sv = std::min({f.min_sv, a.sv0, a.sv_pi});
        f.max_sv = std::max({f.max_sv, a.sv0, a.sv_pi});
    }
    f.alternation_0_singular = alt0;
    f.alternation_pi_singular = altpi;
    f.transition = f.min_sh > f.max_sv;
    f.transition_ratio = 1.5 * f.min_sv > f.max_sh;
    return f;
}

// ---------------------------------------------------------------------------
// Resonant pairs

ResonantPair make_resonant_pair(double E0, double Epi, const ActionSet& at_bar, double epsilon,
                                double lambda_n)
{
    ResonantPair p;
    p.E0 = E0;
    p.Epi = Epi;
    p.Ebar = 0.5 * (E0 + Epi);
    p.epsilon = epsilon;
    p.lambda_n = lambda_n;
    p.at_bar = at_bar;
    const TunnelCoefficients tc = tunneling(at_bar, epsilon);
    p.log_th = tc.log_th;
    p.log_tv0 = tc.log_tv0;
    p.log_tv_pi = tc.log_tv_pi;
    p.log_tau = std::log(2.0) + 0.5 * (tc.log_tv0 + tc.log_tv_pi - tc.log_th);
    p.log_rho = std::max(tc.log_tv0, tc.log_tv_pi) - 0.5 * tc.log_th;
    return p;
}

ResonantPair make_resonant_pair(double E0, double Epi, const ActionTable& t, double epsilon,
                                double lambda_n)
{
    return make_resonant_pair(E0, Epi, t.at(0.5 * (E0 + Epi)), epsilon, lambda_n);
}

double ResonantPair::log_abs_xi0(double E) const
{
    return safe_log(std::abs(at_bar.dphi0)) - std::log(epsilon) + safe_log(std::abs(E - E0)) - log_tv0;
}

double ResonantPair::log_abs_xi_pi(double E) const
{
    return safe_log(std::abs(at_bar.dphi_pi)) - std::log(epsilon) + safe_log(std::abs(E - Epi)) -
           log_tv_pi;
}

double ResonantPair::xi0(double E) const
{
    const double s = (at_bar.dphi0 < 0) != (E < E0) ? -1.0 : 1.0;
    return E == E0 ? 0.0 : s * std::exp(log_abs_xi0(E));
}

double ResonantPair::xi_pi(double E) const
{
    const double s = (at_bar.dphi_pi < 0) != (E < Epi) ? -1.0 : 1.0;
    return E == Epi ? 0.0 : s * std::exp(log_abs_xi_pi(E));
}

double theta_large_tau(const ResonantPair& p, double E)
{
    const double l = log_add(0.0, log_add(p.log_abs_xi0(E), p.log_abs_xi_pi(E)));
    return p.epsilon / pi * (p.log_tau + 0.5 * l);
}

LargeTauResult analyze_resonant_large_tau(const ResonantPair& p, const RegimeOptions& opt)
{
    const ActionSet& a = p.at_bar;
    const double m = a.sh - a.sv0 - a.sv_pi;
    if (m < opt.delta) {
        std::ostringstream os;
        os << "large-τ analysis needs S_h - S_v0 - S_vπ >= " << opt.delta << ", got " << m;
        fail(ErrorKind::WrongRegime, os.str());
    }
    const double eps = p.epsilon;
    LargeTauResult r;
    auto build = [&](IntervalType ty, double c, double log_tv, double dphi) {
        SpectralInterval iv;
        iv.type = ty;
        iv.resonant = true;
        iv.center = iv.coarse_center = c;
        iv.halfwidth = eps * std::exp(log_tv) / std::abs(dphi);
        iv.nature = Nature::singular;
        iv.dos_weight = eps / two_pi;
        iv.theta = theta_large_tau(p, c);
        for (int k = 0; k < opt.samples; ++k) {
            const double E = c + iv.halfwidth * (2.0 * k / (opt.samples - 1) - 1);
            iv.theta_profile.emplace_back(E, std::max(0.0, theta_large_tau(p, E)));
        }
        return iv;
    };
    r.i0 = build(IntervalType::type0, p.E0, p.log_tv0, a.dphi0);
    r.ipi = build(IntervalType::type_pi, p.Epi, p.log_tv_pi, a.dphi_pi);
    r.disjoint = std::abs(p.Epi - p.E0) > r.i0.halfwidth + r.ipi.halfwidth;
    if (!r.disjoint) {
        // the union carries ε/π; split evenly for bookkeeping
        r.i0.flags.push_back("overlapping_union");
        r.ipi.flags.push_back("overlapping_union");
    }
    r.theta_center = theta_large_tau(p, p.Ebar);
    return r;
}

namespace {

// Defect in the scaled variable x = (E - Ē)/(ε√t_h):
//   D(x) = |A(x-x0)(x-xπ) + 2Λ| - 2 - b0|x-x0| - bπ|x-xπ|,
// A = 4Φ₀'Φ_π', b0 = 4|Φ₀'| t_{v,π}/√t_h, bπ = 4|Φ_π'| t_{v,0}/√t_h.
struct ScaledDefect {
    double scale, x0, xpi, A, b0, bpi, lambda;

    double q(double x) const { return A * (x - x0) * (x - xpi) + 2 * lambda; }
    double operator()(double x) const
    {
        return std::abs(q(x)) - 2 - b0 * std::abs(x - x0) - bpi * std::abs(x - xpi);
    }
    double log_sum(double x) const
    {
        return std::log(b0 * std::abs(x - x0) + bpi * std::abs(x - xpi));
    }
};

ScaledDefect scaled_defect(const ResonantPair& p)
{
    const ActionSet& a = p.at_bar;
    ScaledDefect d;
    d.scale = p.epsilon * std::exp(0.5 * p.log_th);
    d.x0 = (p.E0 - p.Ebar) / d.scale;
    d.xpi = (p.Epi - p.Ebar) / d.scale;
    d.A = 4 * a.dphi0 * a.dphi_pi;
    d.b0 = std::exp(std::log(4 * std::abs(a.dphi0)) + p.log_tv_pi - 0.5 * p.log_th);
    d.bpi = std::exp(std::log(4 * std::abs(a.dphi_pi)) + p.log_tv0 - 0.5 * p.log_th);
    d.lambda = p.lambda_n;
    return d;
}

// Real roots of c2 x² + c1 x + c0 inside [a, b].
void quadratic_roots(double c2, double c1, double c0, double a, double b, std::vector<double>& out)
{
    auto keep = [&](double x) {
        if (std::isfinite(x) && x >= a && x <= b) out.push_back(x);
    };
    if (c2 == 0) {
        if (c1 != 0) keep(-c0 / c1);
        return;
    }
    const double disc = c1 * c1 - 4 * c2 * c0;
    if (disc < 0) return;
    const double s = std::sqrt(disc);
    const double q = -0.5 * (c1 + (c1 >= 0 ? s : -s));
    if (q != 0) {
        keep(q / c2);
        keep(c0 / q);
    } else {
        keep(0.0);
    }
}

}  // namespace

double small_tau_defect(const ResonantPair& p, double E)
{
    const ScaledDefect d = scaled_defect(p);
    return d((E - p.Ebar) / d.scale);
}

double theta_small_tau(const ResonantPair& p, double E)
{
    const ScaledDefect d = scaled_defect(p);
    return p.epsilon / two_pi * d.log_sum((E - p.Ebar) / d.scale);
}

SmallTauResult analyze_resonant_small_tau(const ResonantPair& p, double margin,
                                          const RegimeOptions& opt)
{
    const ActionSet& a = p.at_bar;
    const double m = a.sh - a.sv0 - a.sv_pi;
    if (m > -opt.delta) {
        std::ostringstream os;
        os << "small-τ analysis needs S_h - S_v0 - S_vπ <= " << -opt.delta << ", got " << m;
        fail(ErrorKind::WrongRegime, os.str());
    }
    if (p.lambda_n < 1 - 1e-12) fail(ErrorKind::WrongRegime, "Λ_n < 1");
    const ScaledDefect D = scaled_defect(p);
    if (!(D.scale > 0) || !std::isfinite(D.b0) || !std::isfinite(D.bpi))
        fail(ErrorKind::NumericsError, "resonance scale under- or overflows");

    // The defect is quadratic between the kinks at x0, xπ and the zeros of q.
    std::vector<double> kinks{D.x0, D.xpi};
    const double disc = (D.x0 - D.xpi) * (D.x0 - D.xpi) - 8 * D.lambda / D.A;
    if (D.A != 0 && disc > 0) {
        const double c = 0.5 * (D.x0 + D.xpi), h = 0.5 * std::sqrt(disc);
        kinks.push_back(c - h);
        kinks.push_back(c + h);
    }
    std::sort(kinks.begin(), kinks.end());
    const double big = std::numeric_limits<double>::infinity();
    std::vector<double> lims{-big};
    lims.insert(lims.end(), kinks.begin(), kinks.end());
    lims.push_back(big);
    const double spread = 1 + std::abs(kinks.back() - kinks.front()) + std::abs(kinks.front());

    std::vector<double> pts = kinks;
    for (std::size_t i = 0; i + 1 < lims.size(); ++i) {
        const double lo = lims[i], hi = lims[i + 1];
        if (hi <= lo) continue;
        const double mid = std::isinf(lo) ? hi - spread : std::isinf(hi) ? lo + spread : 0.5 * (lo + hi);
        const double sq = D.q(mid) >= 0 ? 1 : -1;
        const double s0 = mid >= D.x0 ? 1 : -1, sp = mid >= D.xpi ? 1 : -1;
        const double S = D.x0 + D.xpi, P = D.x0 * D.xpi;
        const double c2 = sq * D.A;
        const double c1 = -sq * D.A * S - s0 * D.b0 - sp * D.bpi;
        const double c0 = sq * (D.A * P + 2 * D.lambda) - 2 + s0 * D.b0 * D.x0 + sp * D.bpi * D.xpi;
        quadratic_roots(c2, c1, c0, lo, hi, pts);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> u;
    for (double x : pts)
        if (u.empty() || x - u.back() > 1e-13 * (1 + std::abs(x))) u.push_back(x);

    // Components: maximal runs of segments where D <= 0, broken where the
    // closed pieces only touch (D = 0 between two negative segments).
    const double tiny = 1e-12 * (2 * D.lambda + 2);
    std::vector<std::pair<double, double>> comps;
    bool open = false;
    double start = 0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const bool in = D(0.5 * (u[i] + u[i + 1])) <= 0;
        if (in && open && D(u[i]) >= -tiny) {
            comps.emplace_back(start, u[i]);
            start = u[i];
        } else if (in && !open) {
            start = u[i];
            open = true;
        } else if (!in && open) {
            comps.emplace_back(start, u[i]);
            open = false;
        }
    }
    if (open) {
        // the last run ends at the last breakpoint unless D stays <= 0 beyond it
        if (D(u.back() + spread) <= 0) fail(ErrorKind::GeometryError, "Σ(ε) is unbounded");
        comps.emplace_back(start, u.back());
    }
    if (comps.size() != 2) {
        std::ostringstream os;
        os << "Σ(ε) has " << 2 * comps.size() << " endpoints instead of 4 (τ ≍ 1 or degenerate)";
        fail(ErrorKind::GeometryError, os.str());
    }

    SmallTauResult r;
    r.touching = comps[0].second == comps[1].first;
    r.center_in_sigma = D(0.0) <= 0;
    const double eps = p.epsilon;
    double meas = 0, plus = 0, minus = 0;
    const int K = 4 * opt.samples;
    for (const auto& [xa, xb] : comps) {
        SpectralInterval iv;
        iv.type = IntervalType::resonant_pair;
        iv.resonant = true;
        const double ea = p.Ebar + D.scale * xa, eb = p.Ebar + D.scale * xb;
        r.endpoints.push_back(ea);
        r.endpoints.push_back(eb);
        iv.center = iv.coarse_center = 0.5 * (ea + eb);
        iv.halfwidth = 0.5 * (eb - ea);
        iv.dos_weight = eps / two_pi;
        double cp = 0, cm = 0;
        for (int k = 0; k < K; ++k) {
            const double th = eps / two_pi * D.log_sum(xa + (xb - xa) * (k + 0.5) / K);
            cp += th > margin;
            cm += th < -margin;
        }
        if (cp == K)
            iv.nature = Nature::singular;
        else if (cm == K) {
            iv.nature = Nature::mostly_ac;
            iv.flags.push_back("subject_to_diophantine_epsilon");
        }
        for (int k = 0; k < opt.samples; ++k) {
            const double x = xa + (xb - xa) * k / (opt.samples - 1);
            iv.theta_profile.emplace_back(p.Ebar + D.scale * x,
                                          std::max(0.0, eps / two_pi * D.log_sum(x)));
        }
        iv.theta = std::max(0.0, eps / two_pi * D.log_sum(0.5 * (xa + xb)));
        meas += xb - xa;
        plus += (xb - xa) * cp / K;
        minus += (xb - xa) * cm / K;
        r.components.push_back(iv);
    }
    r.singular_fraction = meas > 0 ? plus / meas : 0;
    r.ac_fraction = meas > 0 ? minus / meas : 0;

    const bool e0_in_gap = p.E0 > r.endpoints[1] && p.E0 < r.endpoints[2];
    if (p.log_rho < 0 && std::abs(D.x0 - D.xpi) < 1)
        r.scenario = "a";
    else if (p.log_rho > 0)
        r.scenario = e0_in_gap ? "b_lacuna" : "b_separate";
    else
        r.scenario = "intermediate";
    return r;
}

double theta_from_lambda(double lambda_n)
{
    if (lambda_n < 1) fail(ErrorKind::OutOfRange, "Λ_n must be >= 1");
    return lambda_n + std::sqrt(lambda_n * lambda_n - 1);
}

ModelParams detect_model_regime(const ResonantPair& p, double C)
{
    ModelParams m;
    const double cap = std::log(std::numeric_limits<double>::max()) - 1;
    m.tau = std::exp(std::min(p.log_tau, cap));
    const double l0 = p.log_abs_xi0(p.Ebar), lp = p.log_abs_xi_pi(p.Ebar);
    m.xi0 = std::copysign(std::exp(std::min(l0, cap)), p.xi0(p.Ebar));
    m.xi_pi = std::copysign(std::exp(std::min(lp, cap)), p.xi_pi(p.Ebar));
    m.theta_n = theta_from_lambda(std::max(1.0, p.lambda_n));
    m.in_regime = std::abs(p.log_tau) <= std::log(C) && log_add(l0, lp) <= std::log(C);
    return m;
}

// ---------------------------------------------------------------------------
// Λ_n

LambdaChoice resolve_lambda(const PeriodicPotential& v, const BandStructure& bands, int n)
{
    if (v.has_pointwise()) return {lambda_n(v, bands, n).lambda, "computed"};
    const FiniteGapSpec& spec = v.spec();
    if (int(spec.lambda.size()) >= n) return {spec.lambda[sz(n - 1)], "prescribed"};
    const int g = int(spec.edges.size() / 2);
    if (int(spec.dirichlet_phases.size()) == g && g >= n) {
        const SynthesisResult s = synthesize_finite_gap(spec, spec.dirichlet_phases);
        const BandStructure b = band_edges(s.potential, g + 1);
        return {lambda_n(s.potential, b, n).lambda, "synthesized"};
    }
    return {1.0, "default"};
}

// ---------------------------------------------------------------------------
// Report

namespace {

std::vector<SpectralInterval> coarse_pair(const CoarseResult& c, int i0, int ipi, const std::string& flag)
{
    auto a = c.zero[sz(i0)], b = c.pi[sz(ipi)];
    a.flags.push_back(flag);
    b.flags.push_back(flag);
    return {a, b};
}

PairAnalysis analyze_pair(const CoarseResult& c, int i0, int ipi, const ActionTable& t, double eps,
                          double lambda, const ReportOptions& opt)
{
    PairAnalysis pa;
    pa.pair = make_resonant_pair(c.zero[sz(i0)].center, c.pi[sz(ipi)].center, t, eps, lambda);
    const ActionSet& a = pa.pair.at_bar;
    const double m = a.sh - a.sv0 - a.sv_pi;
    pa.model = detect_model_regime(pa.pair, opt.model_C);
    try {
        if (m >= opt.regime.delta) {
            pa.regime = "large_tau";
            const LargeTauResult r = analyze_resonant_large_tau(pa.pair, opt.regime);
            pa.intervals = {r.i0, r.ipi};
        } else if (m <= -opt.regime.delta) {
            pa.regime = "small_tau";
            SmallTauResult r = analyze_resonant_small_tau(pa.pair, opt.classify.margin, opt.regime);
            for (auto& iv : r.components) iv.flags.push_back("scenario_" + r.scenario);
            pa.intervals = r.components;
        } else {
            pa.regime = "tau_order_one";
            pa.intervals = coarse_pair(c, i0, ipi, "tau_order_one");
        }
    } catch (const Error& e) {
        pa.error = e.what();
        pa.intervals = coarse_pair(c, i0, ipi, std::string("analysis_failed_") + to_string(e.kind()));
    }
    for (auto& iv : pa.intervals) {
        iv.resonant = true;
        iv.coarse_halfwidth = c.halfwidth;
    }
    return pa;
}

}  // namespace

SpectralReport spectral_report(const ActionTable& t, int n, double alpha, double epsilon,
                               LambdaChoice lambda, const ReportOptions& opt)
{
    SpectralReport r;
    r.n = n;
    r.alpha = alpha;
    r.epsilon = epsilon;
    r.lo = t.lo();
    r.hi = t.hi();
    r.lambda = lambda;
    r.table = t.samples();
    r.seq0 = quantize(t, epsilon, SeqType::type0);
    r.seqpi = quantize(t, epsilon, SeqType::type_pi);
    const CoarseResult c = coarse_intervals(r.seq0, r.seqpi, t, epsilon);
    r.delta0 = c.delta0;
    r.halfwidth = c.halfwidth;
    r.regimes = action_regimes(t, opt.regime.delta);

    // non-resonant intervals, independent of each other
    std::vector<SpectralInterval> single;
    std::vector<const QuantizedSequence*> others;
    for (const auto& iv : c.zero)
        if (!iv.resonant) single.push_back(iv), others.push_back(&r.seqpi);
    for (const auto& iv : c.pi)
        if (!iv.resonant) single.push_back(iv), others.push_back(&r.seq0);
    parallel_for(int(single.size()), [&](int i) {
        SpectralInterval iv = single[sz(i)];
        try {
            iv = refine_nonresonant(iv, t, epsilon, lambda.value);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ReclassifyAsResonant) throw;
            iv.flags.push_back("reclassify_as_resonant");
        }
        single[sz(i)] = classify_nonresonant(iv, t, epsilon, *others[sz(i)], opt.classify);
    });

    r.pairs.resize(c.pairs.size());
    parallel_for(int(c.pairs.size()), [&](int i) {
        const auto [i0, ipi] = c.pairs[sz(i)];
        r.pairs[sz(i)] = analyze_pair(c, i0, ipi, t, epsilon, lambda.value, opt);
    });

    r.intervals = single;
    for (const auto& pa : r.pairs) r.intervals.insert(r.intervals.end(), pa.intervals.begin(), pa.intervals.end());
    std::sort(r.intervals.begin(), r.intervals.end(),
              [](const auto& a, const auto& b) { return a.center < b.center; });
    KahanSum dos;
    for (const auto& iv : r.intervals) dos.add(iv.dos_weight);
    r.dos_total = dos.value();
    return r;
}

SpectralReport spectral_report(std::shared_ptr<const Dispersion> disp, int n, double alpha,
                               double epsilon, double lo, double hi, LambdaChoice lambda,
                               const ReportOptions& opt)
{
    const ActionTable t = ActionTable::from_window(disp, n, alpha, lo, hi, opt.table_nodes, opt.actions);
    HypothesisSummary h;
    h.bei_margin = h.t_margin = std::numeric_limits<double>::infinity();
    for (const auto& a : t.samples()) {
        const WindowContext ctx = make_window(disp, n, a.E, alpha);
        h.bei_margin = std::min(h.bei_margin, check_bei(disp->bands(), n, a.E, alpha).margin());
        const TReport tr = check_T(ctx, branch_points(ctx), a.sh, a.sv0, a.sv_pi);
        h.t_margin = std::min(h.t_margin, tr.lhs - tr.rhs);
        if (!tr.holds) {
            std::ostringstream os;
            os << "(T) fails at E = " << a.E << ": 2π·min height " << tr.lhs << " <= max action "
               << tr.rhs;
            fail(ErrorKind::GeometryError, os.str());
        }
        ++h.points;
    }
    SpectralReport r = spectral_report(t, n, alpha, epsilon, lambda, opt);
    r.hypotheses = h;
    return r;
}

nlohmann::json to_json(const SpectralInterval& iv)
{
    nlohmann::json j;
    j["type"] = to_string(iv.type);
    j["l"] = iv.l;
    j["center"] = iv.center;
    j["halfwidth"] = iv.halfwidth;
    j["coarse_center"] = iv.coarse_center;
    j["coarse_halfwidth"] = iv.coarse_halfwidth;
    j["resonant"] = iv.resonant;
    j["nature"] = to_string(iv.nature);
    j["theta"] = iv.theta;
    nlohmann::json prof = nlohmann::json::array();
    for (const auto& [e, th] : iv.theta_profile) prof.push_back({e, th});
    j["theta_samples"] = prof;
    j["dos_weight"] = iv.dos_weight;
    if (!iv.resonant) {
        j["log_lambda"] = iv.log_lambda;
        if (iv.far_field >= 0) j["far_field_theta"] = iv.far_field;
    }
    j["flags"] = iv.flags;
    return j;
}

nlohmann::json to_json(const SpectralReport& r)
{
    using nlohmann::json;
    json j;
    j["gap"] = r.n;
    j["alpha"] = r.alpha;
    j["epsilon"] = r.epsilon;
    j["window"] = {r.lo, r.hi};
    j["lambda_n"] = {{"value", r.lambda.value}, {"source", r.lambda.source}};
    j["hypotheses"] = {{"bei_min_margin", r.hypotheses.bei_margin},
                       {"T_min_margin", r.hypotheses.t_margin},
                       {"points", r.hypotheses.points}};
    json table = json::array();
    for (const auto& a : r.table)
        table.push_back({{"E", a.E}, {"phi0", a.phi0}, {"phi_pi", a.phi_pi}, {"sv0", a.sv0},
                         {"sv_pi", a.sv_pi}, {"sh0", a.sh0}, {"sh_pi", a.sh_pi}, {"sh", a.sh},
                         {"dphi0", a.dphi0}, {"dphi_pi", a.dphi_pi}});
    j["actions"] = table;
    auto seq = [](const QuantizedSequence& q) {
        return json{{"type", to_string(q.type)}, {"energies", q.energies}, {"l", q.index},
                    {"spacing_C", q.spacing_C}};
    };
    j["sequences"] = {seq(r.seq0), seq(r.seqpi)};
    j["delta0"] = r.delta0;
    j["coarse_halfwidth"] = r.halfwidth;
    const auto& f = r.regimes;
    j["regimes"] = {{"delta", f.delta},
                    {"alternation_type0_singular", f.alternation_0_singular},
                    {"alternation_typePi_singular", f.alternation_pi_singular},
                    {"transition_Sh_above_Sv", f.transition},
                    {"transition_ratio", f.transition_ratio},
                    {"min_sh", f.min_sh}, {"max_sh", f.max_sh},
                    {"min_sv", f.min_sv}, {"max_sv", f.max_sv}};
    json iv = json::array();
    for (const auto& x : r.intervals) iv.push_back(to_json(x));
    j["intervals"] = iv;
    json pairs = json::array();
    for (const auto& pa : r.pairs) {
        const auto& p = pa.pair;
        json e{{"E0", p.E0}, {"Epi", p.Epi}, {"Ebar", p.Ebar}, {"log_tau", p.log_tau},
               {"log_rho", p.log_rho}, {"lambda_n", p.lambda_n}, {"regime", pa.regime},
               {"model", {{"in_regime", pa.model.in_regime}, {"tau", pa.model.tau},
                          {"xi0", pa.model.xi0}, {"xi_pi", pa.model.xi_pi},
                          {"theta_n", pa.model.theta_n}, {"phi0", pa.model.phi0},
                          {"phi_pi", pa.model.phi_pi}}}};
        if (!pa.error.empty()) e["error"] = pa.error;
        pairs.push_back(e);
    }
    j["resonant_pairs"] = pairs;
    j["dos_total"] = r.dos_total;
    return j;
}

}  // namespace qpw
