#include "qpw/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace qpw {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Periodic and mirror images of the branch points that can come near a
// contour in the strip -π <= Re ζ <= 2π.
std::vector<cplx> with_mirrors(const BranchPointSet& bp)
{
    std::vector<cplx> out;
    for (double z : {bp.zeta_lo, bp.zeta_hi})
        for (double img : {z, -z, two_pi - z, z - two_pi}) out.emplace_back(img, 0.0);
    for (const auto& p : bp.imag_axis)
        for (cplx img : {p.zeta, std::conj(p.zeta)}) {
            out.push_back(img);
            out.push_back(img + two_pi);
        }
    for (const auto& p : bp.pi_axis)
        for (cplx img : {p.zeta, std::conj(p.zeta)}) {
            out.push_back(img);
            out.push_back(img - two_pi);
        }
    return out;
}

double segment_distance(cplx p, cplx a, cplx b)
{
    const cplx d = b - a;
    const double len2 = std::norm(d);
    if (len2 == 0) return std::abs(p - a);
    const double t = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

}  // namespace

double BeiReport::margin() const
{
    return std::min({lower_gap, upper_gap, lower_band, upper_band});
}

BeiReport check_bei(const BandStructure& bands, int n, double E, double alpha)
{
    BeiReport r;
    if (n < 1 || n > bands.n_gaps) {
        r.lower_gap = r.upper_gap = r.lower_band = r.upper_band = -inf;
        return r;
    }
    const double lo = E - alpha, hi = E + alpha;
    r.lower_gap = bands.edge(2 * n) - lo;
    r.upper_gap = hi - bands.edge(2 * n + 1);
    r.lower_band = lo - bands.edge(2 * n - 1);
    r.upper_band = bands.edge(2 * n + 2) - hi;
    // E_{2n+2} may be +inf for the last finite gap; that side always holds.
    r.holds = alpha > 0 && r.margin() > 0;
    return r;
}

WindowContext make_window(std::shared_ptr<const Dispersion> disp, int n, double E, double alpha)
{
    const BeiReport r = check_bei(disp->bands(), n, E, alpha);
    if (!r.holds) {
        std::ostringstream os;
        os << "(BEI) fails for n=" << n << ", E=" << E << ", alpha=" << alpha
           << ": margins gap " << r.lower_gap << "/" << r.upper_gap << ", band " << r.lower_band
           << "/" << r.upper_band;
        throw Error(ErrorKind::GeometryError, os.str());
    }
    const auto& b = disp->bands();
    if (b.provenance == EdgeProvenance::computed && E + alpha >= b.ceiling)
        throw Error(ErrorKind::OutOfRange, "window reaches above the tabulated band range");
    return {std::move(disp), E, alpha, n};
}

std::vector<cplx> BranchPointSet::all() const
{
    std::vector<cplx> out{zeta_lo, zeta_hi};
    for (const auto& p : imag_axis) out.push_back(p.zeta);
    for (const auto& p : pi_axis) out.push_back(p.zeta);
    return out;
}

double BranchPointSet::min_separation() const
{
    const auto pts = with_mirrors(*this);
    double d = inf;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const double dij = std::abs(pts[i] - pts[j]);
            if (dij > 1e-14) d = std::min(d, dij);
        }
    return d;
}

double BranchPointSet::height(int m) const
{
    for (const auto& p : imag_axis)
        if (p.m == m) return p.zeta.imag();
    for (const auto& p : pi_axis)
        if (p.m == m) return p.zeta.imag();
    return inf;
}

BranchPointSet branch_points(const WindowContext& ctx)
{
    const auto& b = ctx.bands();
    const BeiReport r = check_bei(b, ctx.n, ctx.E, ctx.alpha);
    if (!r.holds) throw Error(ErrorKind::GeometryError, "branch points need (BEI)");
    const int n = ctx.n;
    const double E = ctx.E, a = ctx.alpha;
    BranchPointSet s;
    s.n = n;
    s.zeta_lo = std::acos((E - b.edge(2 * n)) / a);
    s.zeta_hi = std::acos((E - b.edge(2 * n + 1)) / a);
    for (int m = 2 * n - 1; m >= 1; --m)
        s.imag_axis.push_back({m, cplx(0.0, std::acosh((E - b.edge(m)) / a))});
    for (int m = 2 * n + 2; m <= int(b.edges.size()); ++m)
        s.pi_axis.push_back({m, cplx(pi, std::acosh((b.edge(m) - E) / a))});
    return s;
}

cplx complex_momentum(const WindowContext& ctx, cplx zeta, Branch br, const MomentumOptions& opt)
{
    if (zeta.imag() != 0) {
        for (cplx z : with_mirrors(branch_points(ctx)))
            if (std::abs(zeta - z) < opt.proximity) {
                std::ostringstream os;
                os << "zeta " << zeta << " within " << opt.proximity << " of branch point " << z;
                throw Error(ErrorKind::BranchPointProximity, os.str());
            }
    }
    const cplx kp = ctx.disp->k_principal(ctx.energy_at(zeta));
    return double(br.sign) * kp + two_pi * br.shift;
}

TReport check_T(const WindowContext& ctx, const BranchPointSet& bp, double sh, double sv0,
                double sv_pi)
{
    TReport t;
    t.lhs = two_pi * std::min(bp.height(2 * ctx.n - 2), bp.height(2 * ctx.n + 3));
    t.rhs = std::max({sh, sv0, sv_pi});
    t.holds = t.lhs > t.rhs;
    return t;
}

std::pair<RealBranch, RealBranch> real_branches(const WindowContext& ctx, const RealBranchOptions& opt)
{
    const BranchPointSet bp = branch_points(ctx);
    const double mid = pi * ctx.n;
    const int N = opt.samples;
    auto kp = [&](double z) { return ctx.disp->k_real(ctx.energy_at(z).real()).real(); };

    // Quarter arcs, clustered toward the gap end where κ has a square-root turn.
    std::vector<double> z0(sz(N + 1)), k0(sz(N + 1)), zp(sz(N + 1)), kpi(sz(N + 1));
    for (int j = 0; j <= N; ++j) {
        const double s = std::sin(0.5 * pi * j / N);
        z0[sz(j)] = bp.zeta_lo * s;
        zp[sz(j)] = bp.zeta_hi + (pi - bp.zeta_hi) * (1.0 - s);
    }
    for (int j = 0; j <= N; ++j) {
        k0[sz(j)] = kp(z0[sz(j)]);
        kpi[sz(j)] = kp(zp[sz(j)]);
    }
    if (std::abs(k0.back() - mid) > opt.closure_tol || std::abs(kpi.back() - mid) > opt.closure_tol) {
        std::ostringstream os;
        os << "real branches do not close at κ = πn: " << k0.back() - mid << ", "
           << kpi.back() - mid;
        throw Error(ErrorKind::GeometryError, os.str());
    }

    // Unfold one quarter by the two reflections into a closed curve.
    auto unfold = [&](const std::vector<double>& z, const std::vector<double>& k, double axis) {
        std::vector<double> zs, ks;
        for (int j = 0; j <= N; ++j) zs.push_back(z[sz(j)]), ks.push_back(k[sz(j)]);
        for (int j = N - 1; j >= 0; --j) zs.push_back(z[sz(j)]), ks.push_back(2 * mid - k[sz(j)]);
        for (int j = 1; j <= N; ++j) zs.push_back(2 * axis - z[sz(j)]), ks.push_back(2 * mid - k[sz(j)]);
        for (int j = N - 1; j >= 0; --j) zs.push_back(2 * axis - z[sz(j)]), ks.push_back(k[sz(j)]);
        return std::pair{zs, ks};
    };

    RealBranch g0, gp;
    g0.which = RealBranchKind::gamma_0;
    g0.axis_zeta = 0;
    g0.axis_kappa = mid;
    std::tie(g0.zeta, g0.kappa) = unfold(z0, k0, 0.0);
    gp.which = RealBranchKind::gamma_pi;
    gp.axis_zeta = pi;
    gp.axis_kappa = mid;
    std::tie(gp.zeta, gp.kappa) = unfold(zp, kpi, pi);
    return {g0, gp};
}

Branch classify_determination(const WindowContext& ctx, cplx zeta, cplx kappa, double* mismatch)
{
    const cplx kp = ctx.disp->k_principal(ctx.energy_at(zeta));
    Branch best;
    double err = inf;
    for (int s : {1, -1}) {
        const int l = int(std::lround((kappa - double(s) * kp).real() / two_pi));
        const double e = std::abs(kappa - double(s) * kp - two_pi * l);
        if (e < err) {
            err = e;
            best = {s, l};
        }
    }
    if (mismatch) *mismatch = err;
    return best;
}

PathContinuation continue_kappa(const WindowContext& ctx, const std::vector<cplx>& path, Branch start,
                                const ContinuationOptions& opt)
{
    if (path.empty()) throw Error(ErrorKind::ContourError, "empty continuation path");
    const BranchPointSet bp = branch_points(ctx);
    if (opt.clearance > 0) {
        const auto pts = with_mirrors(bp);
        for (std::size_t i = 0; i < path.size(); ++i) {
            const cplx a = path[i], b = path[std::min(i + 1, path.size() - 1)];
            for (cplx z : pts) {
                const double d = segment_distance(z, a, b);
                if (d < opt.clearance) {
                    std::ostringstream os;
                    os << "path passes within " << d << " of branch point " << z << " (clearance "
                       << opt.clearance << ")";
                    throw Error(ErrorKind::BranchPointProximity, os.str());
                }
            }
        }
    }

    PathContinuation out;
    out.start = start;
    out.zeta = path;
    out.kappa.reserve(path.size());
    cplx k = complex_momentum(ctx, path[0], start);
    out.kappa.push_back(k);
    for (std::size_t i = 1; i < path.size(); ++i) {
        const cplx a = path[i - 1], b = path[i];
        double t = 0, dt = 1;
        while (t < 1) {
            const double t1 = std::min(1.0, t + dt);
            const cplx z = a + (b - a) * t1;
            const Determination d = nearest_determination(ctx.disp->k_any(ctx.energy_at(z)), k);
            if (d.runner_up < opt.separation * d.distance) {
                dt *= 0.5;
                if (dt < opt.min_step) {
                    std::ostringstream os;
                    os << "cannot separate determinations near zeta = " << z;
                    throw Error(ErrorKind::ContinuationAmbiguity, os.str());
                }
                continue;
            }
            k = d.value;
            if (t1 < 1) ++out.substeps;
            t = t1;
            dt = std::min(1.0, 2 * dt);
        }
        out.kappa.push_back(k);
    }
    out.end = classify_determination(ctx, path.back(), k, &out.end_mismatch);
    return out;
}

namespace {

// Breakpoints on a side of length L whose ends sit at distance r from a
// branch point: panels double in size away from each end.
std::vector<double> side_breaks(double L, double r)
{
    std::vector<double> left{0.0};
    double h = r;
    while (left.back() + h < 0.5 * L) {
        left.push_back(left.back() + h);
        h *= 2;
    }
    std::vector<double> out = left;
    out.push_back(0.5 * L);
    for (auto it = left.rbegin(); it != left.rend(); ++it) out.push_back(L - *it);
    out.erase(std::unique(out.begin(), out.end(), [](double x, double y) { return std::abs(x - y) < 1e-15; }),
              out.end());
    return out;
}

void add_line(LoopRule& rule, cplx p, cplx q, double r, double s0, double s1, double L)
{
    // Sub-range [s0, s1] of the side p -> q of length L.
    const cplx u = (q - p) / L;
    std::vector<double> br{s0};
    for (double s : side_breaks(L, r))
        if (s > s0 + 1e-15 && s < s1 - 1e-15) br.push_back(s);
    br.push_back(s1);
    const auto x = gl20_nodes();
    const auto w = gl20_weights();
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double m = 0.5 * (br[k] + br[k + 1]), h = 0.5 * (br[k + 1] - br[k]);
        for (std::size_t i = 0; i < x.size(); ++i) {
            rule.nodes.push_back(p + u * (m + h * x[i]));
            rule.weights.push_back(u * (h * w[i]));
        }
    }
}

void add_arc(LoopRule& rule, cplx c, double r, double th0, double th1)
{
    const int panels = std::max(1, int(std::ceil((th1 - th0) / (0.25 * pi) - 1e-12)));
    const auto x = gl20_nodes();
    const auto w = gl20_weights();
    const double step = (th1 - th0) / panels;
    for (int k = 0; k < panels; ++k) {
        const double m = th0 + (k + 0.5) * step, h = 0.5 * step;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const cplx e = std::polar(1.0, m + h * x[i]);
            rule.nodes.push_back(c + r * e);
            rule.weights.push_back(cplx(0, 1) * r * e * (h * w[i]));
        }
    }
}

}  // namespace

LoopRule stadium_rule(cplx a, cplx b, double r, StadiumStart start)
{
    const double L = std::abs(b - a);
    if (!(L > 0) || !(r > 0)) throw Error(ErrorKind::ContourError, "degenerate stadium");
    const cplx u = (b - a) / L;
    const cplx nrm = cplx(0, 1) * u;
    const double phi = std::arg(u);  // direction angle of the segment
    LoopRule rule;
    // Counter-clockwise: side a->b at -nrm, cap around b, side b->a at +nrm, cap around a.
    const cplx p1 = a - nrm * r, q1 = b - nrm * r;
    const cplx p2 = b + nrm * r, q2 = a + nrm * r;
    if (start == StadiumStart::side_middle) {
        add_line(rule, p1, q1, r, 0.5 * L, L, L);
        add_arc(rule, b, r, phi - 0.5 * pi, phi + 0.5 * pi);
        add_line(rule, p2, q2, r, 0.0, L, L);
        add_arc(rule, a, r, phi + 0.5 * pi, phi + 1.5 * pi);
        add_line(rule, p1, q1, r, 0.0, 0.5 * L, L);
    } else {
        add_arc(rule, a, r, phi + pi, phi + 1.5 * pi);
        add_line(rule, p1, q1, r, 0.0, L, L);
        add_arc(rule, b, r, phi - 0.5 * pi, phi + 0.5 * pi);
        add_line(rule, p2, q2, r, 0.0, L, L);
        add_arc(rule, a, r, phi + 0.5 * pi, phi + pi);
    }
    return rule;
}

std::string to_csv(const PathContinuation& p)
{
    std::ostringstream os;
    os << std::setprecision(17) << "zeta_re,zeta_im,kappa_re,kappa_im\n";
    for (std::size_t i = 0; i < p.zeta.size(); ++i)
        os << p.zeta[i].real() << ',' << p.zeta[i].imag() << ',' << p.kappa[i].real() << ','
           << p.kappa[i].imag() << '\n';
    return os.str();
}

std::string to_csv(const BranchPointSet& bp)
{
    std::ostringstream os;
    os << std::setprecision(17) << "m,zeta_re,zeta_im\n";
    const int n = bp.n;
    os << 2 * n << ',' << bp.zeta_lo << ",0\n" << 2 * n + 1 << ',' << bp.zeta_hi << ",0\n";
    for (const auto& p : bp.imag_axis) os << p.m << ',' << p.zeta.real() << ',' << p.zeta.imag() << '\n';
    for (const auto& p : bp.pi_axis) os << p.m << ',' << p.zeta.real() << ',' << p.zeta.imag() << '\n';
    return os.str();
}

}  // namespace qpw
