#include "qpw/finite_gap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

namespace qpw {

FiniteGapDispersion::FiniteGapDispersion(const FiniteGapSpec& spec, int nodes) : e_(spec.edges)
{
    bands_ = band_edges(PeriodicPotential::finite_gap(spec), 0);
    const int g = genus();
    shift_ = 0.5 * (e_.front() + e_.back());
    scale_ = std::max(1.0, 0.5 * (e_.back() - e_.front()));

    // Gap conditions by Gauss-Chebyshev: t = mid + half cos θ absorbs the
    // inverse square roots at both gap edges.
    if (g > 0) {
        Eigen::MatrixXd a(g, g);
        Eigen::VectorXd rhs(g);
        for (int j = 0; j < g; ++j) {
            const double lo = e_[sz(2 * j + 1)], hi = e_[sz(2 * j + 2)];
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            std::vector<double> row(sz(g + 1), 0.0);
            for (int i = 0; i < nodes; ++i) {
                const double t = mid + half * std::cos(pi * (i + 0.5) / nodes);
                const double w = 1.0 / sqrt_abs_r_without(t, 2 * j + 1, 2 * j + 2);
                const double u = (t - shift_) / scale_;
                double p = 1.0;
                for (int m = 0; m <= g; ++m) {
                    row[sz(m)] += p * w;
                    p *= u;
                }
            }
            for (int m = 0; m < g; ++m) a(j, m) = row[sz(m)];
            rhs(j) = -row[sz(g)];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
        if (!lu.isInvertible() || lu.rcond() < 1e-13)
            throw Error(ErrorKind::NormalizationError, "gap-normalization system is singular");
        Eigen::VectorXd d = lu.solve(rhs);
        d_.assign(d.data(), d.data() + g);
    }

    // Full band increments, same substitution on each finite band.
    for (int j = 1; j <= g; ++j) {
        const double lo = e_[sz(2 * j - 2)], hi = e_[sz(2 * j - 1)];
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double s = 0;
        for (int i = 0; i < nodes; ++i) {
            const double t = mid + half * std::cos(pi * (i + 0.5) / nodes);
            s += std::abs(P(t)) / sqrt_abs_r_without(t, 2 * j - 2, 2 * j - 1);
        }
        band_.push_back(0.5 * pi * s / nodes);
    }
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < e_.size(); ++i) spacing = std::min(spacing, e_[i] - e_[i - 1]);
    lift_ = e_.size() > 1 ? 0.25 * spacing : 1.0;
    k_edge_.assign(e_.size(), 0.0);
    double acc = 0;
    for (int j = 1; j <= g; ++j) {
        acc += band_[sz(j - 1)];
        k_edge_[sz(2 * j - 1)] = acc;
        k_edge_[sz(2 * j)] = acc;
    }
}

double FiniteGapDispersion::sqrt_abs_r_without(double t, int skip_a, int skip_b) const
{
    double r = 1.0;
    for (int i = 0; i < int(e_.size()); ++i)
        if (i != skip_a && i != skip_b) r *= std::abs(t - e_[sz(i)]);
    return std::sqrt(r);
}

double FiniteGapDispersion::P(double t) const
{
    const int g = genus();
    const double u = (t - shift_) / scale_;
    double p = 1.0;
    for (int m = g - 1; m >= 0; --m) p = p * u + d_[sz(m)];
    return p * std::pow(scale_, g);
}

cplx FiniteGapDispersion::P(cplx t) const
{
    const int g = genus();
    const cplx u = (t - shift_) / scale_;
    cplx p = 1.0;
    for (int m = g - 1; m >= 0; --m) p = p * u + d_[sz(m)];
    return p * std::pow(scale_, g);
}

std::vector<double> FiniteGapDispersion::p_coefficients() const
{
    // Expand scale^g (u^g + sum d_m u^m) with u = (t - shift)/scale.
    const int g = genus();
    std::vector<double> full(d_);
    full.push_back(1.0);
    std::vector<double> out(sz(g + 1), 0.0);
    for (int m = 0; m <= g; ++m) {
        // (t - shift)^m / scale^m · scale^g
        const double f = full[sz(m)] * std::pow(scale_, g - m);
        double binom = 1.0;
        for (int r = 0; r <= m; ++r) {
            out[sz(r)] += f * binom * std::pow(-shift_, m - r);
            binom = binom * (m - r) / (r + 1);
        }
    }
    return out;
}

// Integral of |dk| from edge E_m (1-based) to E, with the square root at the
// edge removed by t = E_m + (E - E_m) s².
double FiniteGapDispersion::integrate_from_edge(int m, double E) const
{
    const double a = e_[sz(m - 1)];
    const double span = E - a;
    if (span == 0) return 0.0;
    const double root = std::sqrt(std::abs(span));
    auto f = [&](double s) {
        const double t = a + span * s * s;
        double r = 1.0;
        for (std::size_t i = 0; i < e_.size(); ++i)
            if (int(i) != m - 1) r *= std::abs(t - e_[i]);
        return P(t) * root / std::sqrt(r);
    };
    return integrate(f, 0.0, 1.0, 1e-13);
}

cplx FiniteGapDispersion::k_real(double E) const
{
    const int g = genus();
    const double e1 = e_.front();
    if (E <= e1) return {0.0, std::abs(integrate_from_edge(1, E))};
    for (int j = 1; j <= g + 1; ++j) {
        const double lo = e_[sz(2 * j - 2)];
        const double hi = j <= g ? e_[sz(2 * j - 1)] : std::numeric_limits<double>::infinity();
        if (E <= hi) {
            // Integrate from the nearer edge; |dk| has no zero inside a band.
            if (j <= g && hi - E < E - lo)
                return k_edge_[sz(2 * j - 1)] - std::abs(integrate_from_edge(2 * j, E));
            return k_edge_[sz(2 * j - 2)] + std::abs(integrate_from_edge(2 * j - 1, E));
        }
        if (j <= g && E < e_[sz(2 * j)]) {
            // Gap j: Im k rises from the lower edge and returns to 0 at the upper.
            const double lo_g = e_[sz(2 * j - 1)], hi_g = e_[sz(2 * j)];
            const double sgn = P(lo_g) >= 0 ? 1.0 : -1.0;
            double im;
            if (E - lo_g <= hi_g - E)
                im = sgn * integrate_from_edge(2 * j, E);
            else
                im = sgn * integrate_from_edge(2 * j + 1, E);
            return {k_edge_[sz(2 * j - 1)], std::abs(im)};
        }
    }
    return {};  // unreachable
}

cplx FiniteGapDispersion::dk(cplx t) const
{
    cplx q = 1.0;
    for (double e : e_) q *= std::sqrt(t - e);
    return P(t) / (2.0 * q);
}

// Straight path from E_1; t = E_1 + (w - E_1) s² removes the root at E_1.
cplx FiniteGapDispersion::k_straight(cplx w) const
{
    const double e1 = e_.front();
    const cplx dw = w - e1;
    const cplx root = std::sqrt(dw);
    auto f = [&](double s) {
        const cplx t = e1 + dw * (s * s);
        cplx q = 1.0;
        for (std::size_t i = 1; i < e_.size(); ++i) q *= std::sqrt(t - e_[i]);
        return P(t) * root / q;
    };
    return integrate_c(f, 0.0, 1.0, 1e-13);
}

cplx FiniteGapDispersion::k_any(cplx w) const
{
    if (w.imag() == 0) return k_real(w.real());
    if (w.imag() < 0) return std::conj(k_any(std::conj(w)));
    if (w.imag() >= lift_) return k_straight(w);
    // Close to the real axis: go up, across at height lift_, then down, so the
    // path never grazes an edge.
    const cplx a(e_.front(), lift_), b(w.real(), lift_);
    cplx k = k_straight(a);
    k += (b - a) * integrate_c([&](double u) { return dk(a + (b - a) * u); }, 0.0, 1.0, 1e-13);
    // Descend with t = w + (b - w) s², which also tames an edge just below w.
    k += integrate_c([&](double s) { return dk(w + (b - w) * (s * s)) * (2.0 * s) * (b - w); }, 1.0,
                     0.0, 1e-13);
    return k;
}

cplx FiniteGapDispersion::k_principal(cplx E) const
{
    if (E.imag() == 0) return k_real(E.real());
    if (E.imag() < 0) return std::conj(k_any(std::conj(E)));
    return k_any(E);
}

double finite_gap_gap_integral(const FiniteGapDispersion& d, int n)
{
    const auto& b = d.bands();
    const double lo = b.edge(2 * n), hi = b.edge(2 * n + 1);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    const int nodes = 512;
    double s = 0;
    for (int i = 0; i < nodes; ++i) {
        const double t = mid + half * std::cos(pi * (i + 0.5) / nodes);
        double r = 1.0;
        for (int m = 1; m <= 2 * d.genus() + 1; ++m)
            if (m != 2 * n && m != 2 * n + 1) r *= std::abs(t - b.edge(m));
        s += d.P(t) / std::sqrt(r);
    }
    return pi * s / nodes;
}

SynthesisResult synthesize_finite_gap(const FiniteGapSpec& spec, std::vector<double> phases,
                                      const SynthesisOptions& opt)
{
    namespace ode = boost::numeric::odeint;
    const auto& e = spec.edges;
    const int g = int(e.size() / 2);
    if (g == 0) throw Error(ErrorKind::UnsupportedPotential, "zero-gap spectrum gives a constant potential");
    if (int(phases.size()) != g) throw Error(ErrorKind::UnsupportedPotential, "one phase per gap required");

    std::vector<double> c(sz(g)), h(sz(g));
    for (int j = 0; j < g; ++j) {
        c[sz(j)] = 0.5 * (e[sz(2 * j + 1)] + e[sz(2 * j + 2)]);
        h[sz(j)] = 0.5 * (e[sz(2 * j + 2)] - e[sz(2 * j + 1)]);
    }
    auto mu_of = [&](const std::vector<double>& phi, int j) {
        return c[sz(j)] + h[sz(j)] * std::cos(phi[sz(j)]);
    };
    auto rhs = [&](const std::vector<double>& phi, std::vector<double>& d, double) {
        for (int j = 0; j < g; ++j) {
            const double mu = mu_of(phi, j);
            double rest = 1.0;
            for (int i = 0; i < int(e.size()); ++i)
                if (i != 2 * j + 1 && i != 2 * j + 2) rest *= std::abs(mu - e[sz(i)]);
            double denom = 1.0;
            for (int k = 0; k < g; ++k)
                if (k != j) denom *= mu - mu_of(phi, k);
            d[sz(j)] = -2.0 * std::sqrt(rest) / denom;
        }
    };

    const int n = opt.samples;
    double sum_e = 0;
    for (double x : e) sum_e += x;
    std::vector<double> samples(sz(n));
    std::vector<double> phi = phases;
    auto stepper = ode::make_dense_output(opt.tol, opt.tol, ode::runge_kutta_dopri5<std::vector<double>>());
    std::vector<double> grid(sz(n + 1));
    for (int j = 0; j <= n; ++j) grid[sz(j)] = double(j) / n;
    int idx = 0;
    std::vector<double> end_phase;
    ode::integrate_times(stepper, rhs, phi, grid.begin(), grid.end(), 1.0 / n,
                         [&](const std::vector<double>& p, double) {
                             if (idx < n) {
                                 double v = sum_e;
                                 for (int j = 0; j < g; ++j) v -= 2.0 * mu_of(p, j);
                                 samples[sz(idx)] = v;
                             } else {
                                 end_phase = p;
                             }
                             ++idx;
                         });

    SynthesisResult out;
    for (int j = 0; j < g; ++j) {
        const double turn = (end_phase[sz(j)] - phases[sz(j)]) / two_pi;
        const int w = int(std::lround(turn));
        out.winding.push_back(w);
        out.phase_drift.push_back(two_pi * (turn - w));
        if (std::abs(two_pi * (turn - w)) > opt.drift_tol) {
            std::ostringstream os;
            os << "Dubrovin flow does not close over one period (phase " << j << " drift "
               << two_pi * (turn - w) << ")";
            throw Error(ErrorKind::ConsistencyError, os.str());
        }
    }

    // Trigonometric interpolation of the samples.
    const int mmax = n / 2 - 1;
    std::vector<double> a(sz(mmax + 1), 0.0), b(sz(mmax + 1), 0.0);
    for (int m = 0; m <= mmax; ++m) {
        double sc = 0, ss = 0;
        for (int j = 0; j < n; ++j) {
            const double th = two_pi * m * j / n;
            sc += samples[sz(j)] * std::cos(th);
            ss += samples[sz(j)] * std::sin(th);
        }
        a[sz(m)] = (m == 0 ? 1.0 : 2.0) * sc / n;
        b[sz(m)] = m == 0 ? 0.0 : 2.0 * ss / n;
    }
    double peak = 0;
    for (int m = 1; m <= mmax; ++m) peak = std::max(peak, std::hypot(a[sz(m)], b[sz(m)]));
    int keep = mmax;
    while (keep > 1 && std::hypot(a[sz(keep)], b[sz(keep)]) < opt.fourier_floor * peak) --keep;
    a.resize(sz(keep + 1));
    b.resize(sz(keep + 1));
    out.potential = PeriodicPotential::fourier(std::move(a), std::move(b));
    out.samples = std::move(samples);
    return out;
}

}  // namespace qpw
