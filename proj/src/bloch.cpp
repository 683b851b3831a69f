#include <cmath>
#include <sstream>

#include "qpw/hill.hpp"
#include "qpw/parallel.hpp"

namespace qpw {

namespace {

struct GridSolutions {
    std::vector<cplx> y1, y2;  // fundamental solutions on x_j = j/n, j = 0..n
    cplx m11, m12, m21, m22;
};

// Fixed-step RK4 on a uniform grid; the truncation error then depends smoothly
// on E, which the finite differences in ω rely on.
GridSolutions fundamental_on_grid(const PeriodicPotential& v, cplx E, const BlochOptions& opt)
{
    const int n = opt.grid, sub = opt.substeps;
    const int steps = n * sub;
    const double h = 1.0 / steps;
    std::vector<double> vq(sz(2 * steps + 1));
    for (int i = 0; i <= 2 * steps; ++i) vq[sz(i)] = v(0.5 * h * i);

    GridSolutions g;
    g.y1.resize(sz(n + 1));
    g.y2.resize(sz(n + 1));
    cplx a[4] = {1.0, 0.0, 0.0, 1.0};
    g.y1[0] = 1.0;
    g.y2[0] = 0.0;
    auto f = [&](int half, const cplx* s, cplx* d) {
        const cplx q = vq[sz(half)] - E;
        d[0] = s[1];
        d[1] = q * s[0];
        d[2] = s[3];
        d[3] = q * s[2];
    };
    cplx k1[4], k2[4], k3[4], k4[4], t[4];
    for (int i = 0; i < steps; ++i) {
        f(2 * i, a, k1);
        for (int c = 0; c < 4; ++c) t[c] = a[c] + 0.5 * h * k1[c];
        f(2 * i + 1, t, k2);
        for (int c = 0; c < 4; ++c) t[c] = a[c] + 0.5 * h * k2[c];
        f(2 * i + 1, t, k3);
        for (int c = 0; c < 4; ++c) t[c] = a[c] + h * k3[c];
        f(2 * i + 2, t, k4);
        for (int c = 0; c < 4; ++c) a[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        if ((i + 1) % sub == 0) {
            g.y1[sz((i + 1) / sub)] = a[0];
            g.y2[sz((i + 1) / sub)] = a[2];
        }
    }
    g.m11 = a[0];
    g.m21 = a[1];
    g.m12 = a[2];
    g.m22 = a[3];
    return g;
}

// Slope m of the eigenvector (1, m) of M for multiplier mu.
cplx eigen_slope(const GridSolutions& g, cplx mu)
{
    const cplx d1 = g.m12, d2 = mu - g.m22;
    if (std::abs(d1) >= std::abs(d2)) return (mu - g.m11) / d1;
    return g.m21 / d2;
}

BlochPair assemble(const GridSolutions& g, cplx E, cplx k, int n)
{
    const cplx mu_p = std::exp(cplx(0, 1) * k), mu_m = std::exp(-cplx(0, 1) * k);
    if (std::abs(mu_p - mu_m) < 1e-8)
        throw Error(ErrorKind::BranchPointProximity, "Floquet multipliers coincide (band edge)");
    const cplx sp = eigen_slope(g, mu_p), sm = eigen_slope(g, mu_m);
    BlochPair b;
    b.energy = E;
    b.k = k;
    b.p_plus.resize(sz(n));
    b.p_minus.resize(sz(n));
    for (int j = 0; j < n; ++j) {
        const double x = double(j) / n;
        const cplx ph = std::exp(cplx(0, 1) * k * x);
        const cplx psi_p = g.y1[sz(j)] + sp * g.y2[sz(j)];
        const cplx psi_m = g.y1[sz(j)] + sm * g.y2[sz(j)];
        b.p_plus[sz(j)] = psi_p / ph;
        b.p_minus[sz(j)] = psi_m * ph;
    }
    b.dpsi_plus0 = {sp};
    b.dpsi_minus0 = {sm};
    return b;
}

cplx k_from_trace(cplx trace, cplx E)
{
    cplx k = std::acos(trace / 2.0);
    // ψ₊ decays to the right in the upper half plane and is its continuation
    // across the bands below.
    if (E.imag() > 0 && k.imag() < 0) k = -k;
    if (E.imag() < 0 && k.imag() > 0) k = -k;
    if (E.imag() == 0 && k.real() < 0) k = -k;
    return k;
}

}  // namespace

BlochPair bloch_solutions(const PeriodicPotential& v, cplx E, const BlochOptions& opt)
{
    if (!v.has_pointwise()) throw Error(ErrorKind::UnsupportedMode, "Bloch solutions need pointwise V");
    const GridSolutions g = fundamental_on_grid(v, E, opt);
    return assemble(g, E, k_from_trace(g.m11 + g.m22, E), opt.grid);
}

BlochPair bloch_solutions(const PeriodicPotential& v, cplx E, cplx k_hint, const BlochOptions& opt)
{
    if (!v.has_pointwise()) throw Error(ErrorKind::UnsupportedMode, "Bloch solutions need pointwise V");
    const GridSolutions g = fundamental_on_grid(v, E, opt);
    const cplx k = nearest_determination(std::acos((g.m11 + g.m22) / 2.0), k_hint).value;
    return assemble(g, E, k, opt.grid);
}

cplx omega(const PeriodicPotential& v, cplx E, const OmegaOptions& opt)
{
    if (v.is_constant())
        throw Error(ErrorKind::UnsupportedPotential, "constant potentials are excluded");
    const BlochPair mid = bloch_solutions(v, E, opt.bloch);
    const double h = opt.step_scale * (1.0 + std::abs(E));
    const BlochPair up = bloch_solutions(v, E + h, mid.k, opt.bloch);
    const BlochPair dn = bloch_solutions(v, E - h, mid.k, opt.bloch);
    cplx num = 0, den = 0;
    for (std::size_t j = 0; j < mid.p_plus.size(); ++j) {
        const cplx dp = (up.p_plus[j] - dn.p_plus[j]) / (2.0 * h);
        num += mid.p_minus[j] * dp;
        den += mid.p_minus[j] * mid.p_plus[j];
    }
    const double n = double(mid.p_plus.size());
    if (std::abs(den) / n < opt.denom_floor)
        throw Error(ErrorKind::NearDegenerate, "ω denominator vanishes");
    return -num / den;
}

namespace {

struct Circle {
    cplx center;
    double radius;
};

Circle gap_circle(const BandStructure& b, int n, const LambdaOptions& opt)
{
    require_open_gap(b, n);
    const double lo = b.edge(2 * n), hi = b.edge(2 * n + 1);
    const double left_room = lo - b.edge(2 * n - 1);
    const double right_top = (n + 1 <= b.n_gaps) ? b.edge(2 * n + 2) : b.ceiling;
    const double right_room = right_top - hi;
    const double margin = opt.margin_fraction * std::min(left_room, right_room);
    if (!(margin >= 0.1 * (hi - lo)) || !(opt.margin_fraction < 1.0)) {
        std::ostringstream os;
        os << "gap " << n << ": no room for a contour (margin " << margin << ")";
        throw Error(ErrorKind::ContourError, os.str());
    }
    return {cplx(0.5 * (lo + hi), 0.0), 0.5 * (hi - lo) + margin};
}

LambdaResult finish(const Circle& c, cplx integral)
{
    LambdaResult r;
    r.center = c.center;
    r.radius = c.radius;
    r.log_theta = integral;
    const cplx theta = std::exp(integral);
    const cplx lam = 0.5 * (theta + 1.0 / theta);
    if (std::abs(lam.imag()) > 1e-6 * (1 + std::abs(lam.real())))
        throw Error(ErrorKind::ConsistencyError, "Λ_n is not real");
    r.lambda = lam.real();
    return r;
}

cplx node_term(const PeriodicPotential& v, const Circle& c, int j, int n, const OmegaOptions& opt)
{
    const double phi = two_pi * (j + 0.5) / n;  // no node on the real axis
    const cplx u = std::polar(1.0, phi);
    const cplx E = c.center + c.radius * u;
    const cplx dE = cplx(0, 1) * c.radius * u * (two_pi / n);
    return omega(v, E, opt) * dE;
}

}  // namespace

LambdaResult lambda_n(const PeriodicPotential& v, const BandStructure& b, int n, const LambdaOptions& opt)
{
    const Circle c = gap_circle(b, n, opt);
    const int m = opt.nodes;
    std::vector<cplx> terms(sz(m));
    parallel_for(m, [&](int j) { terms[sz(j)] = node_term(v, c, j, m, opt.omega); });
    cplx s = 0;
    for (const auto& t : terms) s += t;
    return finish(c, s);
}

LambdaResult lambda_n_serial(const PeriodicPotential& v, const BandStructure& b, int n,
                             const LambdaOptions& opt)
{
    const Circle c = gap_circle(b, n, opt);
    cplx s = 0;
    for (int j = 0; j < opt.nodes; ++j) s += node_term(v, c, j, opt.nodes, opt.omega);
    return finish(c, s);
}

}  // namespace qpw
