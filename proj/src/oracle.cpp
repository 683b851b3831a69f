#include "qpw/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "qpw/finite_gap.hpp"
#include "qpw/numerics.hpp"
#include "qpw/parallel.hpp"

namespace qpw {

namespace {

void mul(const double a[4], const double b[4], double out[4])
{
    const double r0 = a[0] * b[0] + a[1] * b[2], r1 = a[0] * b[1] + a[1] * b[3];
    const double r2 = a[2] * b[0] + a[3] * b[2], r3 = a[2] * b[1] + a[3] * b[3];
    out[0] = r0, out[1] = r1, out[2] = r2, out[3] = r3;
}

const double g1 = 0.5 - std::sqrt(3.0) / 6, g2 = 0.5 + std::sqrt(3.0) / 6;

}  // namespace

OracleSystem::OracleSystem(const PeriodicPotential& v, double alpha, double epsilon, int steps_per_cell)
    : alpha_(alpha), epsilon_(epsilon), steps_(steps_per_cell)
{
    if (!v.has_pointwise()) throw Error(ErrorKind::UnsupportedPotential, "oracle needs a pointwise V");
    if (steps_ < 4) throw Error(ErrorKind::OutOfRange, "too few steps per cell");
    v1_.resize(sz(steps_));
    v2_.resize(sz(steps_));
    for (int j = 0; j < steps_; ++j) {
        v1_[sz(j)] = v((j + g1) / steps_);
        v2_[sz(j)] = v((j + g2) / steps_);
    }
}

void OracleSystem::step_transfer(long x, int j, double zeta, double E, double m[4]) const
{
    // Ω = h(A1 + A2)/2 + (√3/12)h²[A2, A1] with A = [[0, 1], [q, 0]] is traceless,
    // so exp Ω = c I + (sinh s / s) Ω with s² = -det Ω.
    const double h = 1.0 / steps_;
    const double x0 = double(x) + j * h;
    const double q1 = v1_[sz(j)] + alpha_ * std::cos(epsilon_ * (x0 + g1 * h) + zeta) - E;
    const double q2 = v2_[sz(j)] + alpha_ * std::cos(epsilon_ * (x0 + g2 * h) + zeta) - E;
    const double a = std::sqrt(3.0) / 12 * h * h * (q1 - q2);
    const double b = h, c = 0.5 * h * (q1 + q2);
    const double s2 = a * a + b * c;
    double ch, sh;
    if (std::abs(s2) < 1e-8) {
        ch = 1 + s2 / 2 * (1 + s2 / 12);
        sh = 1 + s2 / 6 * (1 + s2 / 20);
    } else if (s2 > 0) {
        const double s = std::sqrt(s2);
        ch = std::cosh(s);
        sh = std::sinh(s) / s;
    } else {
        const double w = std::sqrt(-s2);
        ch = std::cos(w);
        sh = std::sin(w) / w;
    }
    m[0] = ch + sh * a;
    m[1] = sh * b;
    m[2] = sh * c;
    m[3] = ch - sh * a;
}

void OracleSystem::cell_transfer(long x, double zeta, double E, double m[4]) const
{
    m[0] = 1, m[1] = 0, m[2] = 0, m[3] = 1;
    double st[4];
    for (int j = 0; j < steps_; ++j) {
        step_transfer(x, j, zeta, E, st);
        mul(st, m, m);
    }
}

PeriodicPotential pointwise_potential(const PeriodicPotential& v)
{
    if (v.has_pointwise()) return v;
    const FiniteGapSpec& spec = v.spec();
    if (spec.dirichlet_phases.size() * 2 + 1 != spec.edges.size())
        throw Error(ErrorKind::UnsupportedPotential,
                    "finite-gap data need one Dirichlet phase per gap for a pointwise V");
    return synthesize_finite_gap(spec, spec.dirichlet_phases).potential;
}

CocycleRun cocycle_run(const OracleSystem& s, double zeta, double E, long L, const LyapunovOptions& opt)
{
    CocycleRun r;
    r.E = E, r.zeta = zeta, r.epsilon = s.epsilon(), r.alpha = s.alpha(), r.L = L;
    r.x.reserve(sz(L));
    r.log_norm.reserve(sz(L));
    double v0 = 0, v1 = 1, m[4];
    KahanSum acc;
    for (long c = 0; c < L; ++c) {
        s.cell_transfer(c, zeta, E, m);
        const double det_err = std::abs(m[0] * m[3] - m[1] * m[2] - 1);
        r.max_det_error = std::max(r.max_det_error, det_err);
        if (!(det_err <= opt.det_tol)) {
            std::ostringstream os;
            os << "cell transfer at x = " << c << " has |det - 1| = " << det_err;
            throw Error(ErrorKind::NumericsError, os.str());
        }
        const double a = m[0] * v0 + m[1] * v1, b = m[2] * v0 + m[3] * v1;
        const double nrm = std::hypot(a, b);
        if (!(std::isfinite(nrm) && nrm > 0))
            throw Error(ErrorKind::NumericsError, "solution norm left the floating-point range");
        acc.add(std::log(nrm));
        v0 = a / nrm, v1 = b / nrm;
        ++r.renormalizations;
        r.x.push_back(double(c + 1));
        r.log_norm.push_back(acc.value());
    }
    return r;
}

LyapunovEstimate fit_lyapunov(const CocycleRun& run, const LyapunovOptions& opt)
{
    const std::size_t n = run.x.size();
    const std::size_t first = std::min(n - 2, sz(std::llround((1 - opt.fit_fraction) * double(n))));
    std::span<const double> xs(run.x.data() + first, n - first), ys(run.log_norm.data() + first, n - first);
    LyapunovEstimate e;
    e.value = least_squares(xs, ys).slope;

    const int K = std::max(2, std::min(opt.segments, int(xs.size() / 2)));
    std::vector<double> seg(sz(K));
    for (int k = 0; k < K; ++k) {
        const std::size_t i0 = xs.size() * sz(k) / sz(K), i1 = xs.size() * sz(k + 1) / sz(K) - 1;
        seg[sz(k)] = (ys[i1] - ys[i0]) / (xs[i1] - xs[i0]);
    }
    std::mt19937 rng(opt.seed);
    std::uniform_int_distribution<int> pick(0, K - 1);
    double m1 = 0, m2 = 0;
    for (int b = 0; b < opt.bootstrap; ++b) {
        double mean = 0;
        for (int k = 0; k < K; ++k) mean += seg[sz(pick(rng))];
        mean /= K;
        m1 += mean;
        m2 += mean * mean;
    }
    m1 /= opt.bootstrap;
    e.error = std::sqrt(std::max(0.0, m2 / opt.bootstrap - m1 * m1));
    return e;
}

LyapunovEstimate lyapunov_direct(const OracleSystem& s, double zeta, double E, long L,
                                 const LyapunovOptions& opt)
{
    if (L < 4) throw Error(ErrorKind::OutOfRange, "integration length too short");
    return fit_lyapunov(cocycle_run(s, zeta, E, L, opt), opt);
}

AveragedLyapunov lyapunov_averaged(const OracleSystem& s, double E, long L,
                                   const std::vector<double>& zetas, const LyapunovOptions& opt)
{
    AveragedLyapunov a;
    a.runs.resize(zetas.size());
    parallel_for(int(zetas.size()), [&](int i) { a.runs[sz(i)] = lyapunov_direct(s, zetas[sz(i)], E, L, opt); });
    double lo = a.runs.front().value, hi = lo, e2 = 0;
    for (const auto& r : a.runs) {
        a.value += r.value;
        e2 += r.error * r.error;
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
    }
    a.value /= double(zetas.size());
    a.error = std::sqrt(e2) / double(zetas.size());
    a.spread = hi - lo;
    return a;
}

IdsEstimate ids_direct(const OracleSystem& s, double zeta, double E, long L)
{
    // θ = arg(ψ' + iψ) only crosses multiples of π upward, so the number of
    // zeros in (-L, L) is floor(θ(L)/π).
    double p = 0, dp = 1, st[4];
    KahanSum theta;
    for (long c = -L; c < L; ++c) {
        for (int j = 0; j < s.steps_per_cell(); ++j) {
            s.step_transfer(c, j, zeta, E, st);
            const double q = st[0] * p + st[1] * dp, dq = st[2] * p + st[3] * dp;
            theta.add(std::atan2(dp * q - p * dq, dp * dq + p * q));
            p = q, dp = dq;
        }
        const double nrm = std::hypot(p, dp);
        p /= nrm, dp /= nrm;
    }
    IdsEstimate r;
    r.E = E;
    r.L = L;
    r.count = std::max(0L, long(std::floor(theta.value() / pi)));
    r.value = double(r.count) / (2.0 * double(L));
    return r;
}

namespace {

SpectrumScan scan_impl(const OracleSystem& s, std::vector<double> energies, long L, double zeta, bool par)
{
    std::sort(energies.begin(), energies.end());
    energies.erase(std::unique(energies.begin(), energies.end()), energies.end());
    SpectrumScan r;
    r.energies = energies;
    r.L = L;
    r.zeta = zeta;
    r.counts.resize(energies.size());
    auto body = [&](int i) { r.counts[sz(i)] = ids_direct(s, zeta, energies[sz(i)], L).count; };
    if (par)
        parallel_for(int(energies.size()), body);
    else
        serial_for(int(energies.size()), body);
    return r;
}

}  // namespace

SpectrumScan spectrum_scan(const OracleSystem& s, std::vector<double> energies, long L, double zeta)
{
    return scan_impl(s, std::move(energies), L, zeta, true);
}

SpectrumScan spectrum_scan_serial(const OracleSystem& s, std::vector<double> energies, long L, double zeta)
{
    return scan_impl(s, std::move(energies), L, zeta, false);
}

std::vector<SpectrumScan::Cell> SpectrumScan::support() const
{
    std::vector<Cell> out;
    for (std::size_t i = 0; i + 1 < energies.size(); ++i)
        if (counts[i + 1] != counts[i]) out.push_back({energies[i], energies[i + 1], counts[i + 1] - counts[i]});
    return out;
}

long SpectrumScan::count_at(double E) const
{
    auto it = std::lower_bound(energies.begin(), energies.end(), E);
    std::size_t i = sz(it - energies.begin());
    if (i == energies.size() || (i > 0 && E - energies[i - 1] < energies[i] - E)) --i;
    return counts[i];
}

std::vector<double> two_tier_grid(double lo, double hi, int coarse,
                                  const std::vector<std::pair<double, double>>& predicted)
{
    std::vector<double> g;
    for (int i = 0; i <= coarse; ++i) g.push_back(lo + (hi - lo) * i / coarse);
    for (const auto& [a, b] : predicted) {
        if (a > lo && a < hi) g.push_back(a);
        if (b > lo && b < hi) g.push_back(b);
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

Containment check_containment(const SpectrumScan& scan,
                              const std::vector<std::pair<double, double>>& predicted, long allowance)
{
    Containment c;
    c.allowance = allowance;
    for (const auto& cell : scan.support()) {
        const bool in = std::any_of(predicted.begin(), predicted.end(), [&](const auto& p) {
            return cell.lo >= p.first && cell.hi <= p.second;
        });
        if (in)
            c.inside += cell.states;
        else {
            c.outside += cell.states;
            c.stray.push_back(cell);
        }
    }
    c.ok = c.outside <= allowance;
    return c;
}

double ModelCocycle::h() const
{
    const double r = two_pi / epsilon;
    return epsilon * (r - std::floor(r));
}

void ModelCocycle::matrix(double zeta, double m[4]) const
{
    const double g0 = xi0 + std::sin(two_pi * zeta / epsilon + phi0);
    const double gp = xi_pi + std::sin(two_pi * zeta / epsilon + phi_pi);
    m[0] = tau * tau * g0 * gp + 1 / theta_n;
    m[1] = tau * g0;
    m[2] = theta_n * tau * gp;
    m[3] = theta_n;
}

ModelLyapunov model_lyapunov(const ModelCocycle& mc, long n_steps, double zeta, int blocks)
{
    if (mc.theta_n < 1) throw Error(ErrorKind::OutOfRange, "θ_n must be >= 1");
    const double h = mc.h();
    double v0 = std::sqrt(0.5), v1 = v0, m[4];
    KahanSum total, block;
    std::vector<double> means;
    const long per = std::max(1L, n_steps / blocks);
    for (long k = 0; k < n_steps; ++k) {
        mc.matrix(double(k) * h + zeta, m);
        const double a = m[0] * v0 + m[1] * v1, b = m[2] * v0 + m[3] * v1;
        const double nrm = std::hypot(a, b);
        const double l = std::log(nrm);
        total.add(l);
        block.add(l);
        v0 = a / nrm, v1 = b / nrm;
        if ((k + 1) % per == 0) {
            means.push_back(block.value() / double(per));
            block = KahanSum{};
        }
    }
    ModelLyapunov r;
    r.value = total.value() / double(n_steps);
    if (means.size() > 1) {
        double mu = 0, var = 0;
        for (double x : means) mu += x;
        mu /= double(means.size());
        for (double x : means) var += (x - mu) * (x - mu);
        r.variance = var / double(means.size() - 1) / double(means.size());
    }
    return r;
}

nlohmann::json to_json(const LyapunovEstimate& e) { return {{"theta", e.value}, {"error", e.error}}; }

nlohmann::json to_json(const IdsEstimate& e)
{
    return {{"E", e.E}, {"L", e.L}, {"count", e.count}, {"value", e.value}};
}

std::string trace_csv(const CocycleRun& run)
{
    std::ostringstream os;
    os << std::setprecision(15) << "x,log_norm\n";
    for (std::size_t i = 0; i < run.x.size(); ++i) os << run.x[i] << ',' << run.log_norm[i] << '\n';
    return os.str();
}

}  // namespace qpw
