#include "qpw/hill.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "qpw/finite_gap.hpp"

namespace qpw {

namespace ode = boost::numeric::odeint;

namespace {

template <std::size_t N, class Rhs>
void integrate_period(Rhs&& rhs, std::array<cplx, N>& y, double tol)
{
    using State = std::array<cplx, N>;
    auto stepper = ode::make_controlled(
        tol, tol, ode::runge_kutta_dopri5<State, double, State, double, ode::array_algebra>());
    try {
        ode::integrate_adaptive(stepper, rhs, y, 0.0, 1.0, 0.01);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::QuadratureError, std::string("monodromy integration: ") + e.what());
    }
    for (const auto& c : y)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw Error(ErrorKind::QuadratureError, "monodromy integration overflowed");
}

void require_pointwise(const PeriodicPotential& v)
{
    if (!v.has_pointwise())
        throw Error(ErrorKind::UnsupportedMode, "operation needs a pointwise potential");
}

}  // namespace

Monodromy monodromy(const PeriodicPotential& v, cplx E, const HillOptions& opt)
{
    require_pointwise(v);
    std::array<cplx, 4> y{1.0, 0.0, 0.0, 1.0};
    auto rhs = [&](const std::array<cplx, 4>& s, std::array<cplx, 4>& d, double x) {
        const cplx q = v(x) - E;
        d[0] = s[1];
        d[1] = q * s[0];
        d[2] = s[3];
        d[3] = q * s[2];
    };
    integrate_period(rhs, y, opt.tol);
    return {E, y[0], y[2], y[1], y[3]};
}

cplx discriminant(const PeriodicPotential& v, cplx E, const HillOptions& opt)
{
    return monodromy(v, E, opt).trace();
}

DiscriminantWithSlope discriminant_slope(const PeriodicPotential& v, cplx E, const HillOptions& opt)
{
    require_pointwise(v);
    // (y1, y1', y2, y2') and their E-derivatives from the variational equation.
    std::array<cplx, 8> y{1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    auto rhs = [&](const std::array<cplx, 8>& s, std::array<cplx, 8>& d, double x) {
        const cplx q = v(x) - E;
        d[0] = s[1];
        d[1] = q * s[0];
        d[2] = s[3];
        d[3] = q * s[2];
        d[4] = s[5];
        d[5] = q * s[4] - s[0];
        d[6] = s[7];
        d[7] = q * s[6] - s[2];
    };
    integrate_period(rhs, y, opt.tol);
    return {y[0] + y[3], y[4] + y[7]};
}

double BandStructure::edge(int m) const
{
    if (m < 1) return -std::numeric_limits<double>::infinity();
    if (m > int(edges.size())) return std::numeric_limits<double>::infinity();
    return edges[sz(m - 1)];
}

int BandStructure::band_of(double E) const
{
    for (int j = 1; j <= n_gaps + 1; ++j) {
        const double lo = edge(2 * j - 1);
        const double hi = j <= n_gaps ? edge(2 * j) : ceiling;
        if (E >= lo && E <= hi) return j;
    }
    return 0;
}

int BandStructure::gap_of(double E) const
{
    for (int n = 1; n <= n_gaps; ++n)
        if (E > edge(2 * n) && E < edge(2 * n + 1)) return n;
    return 0;
}

BandStructure band_edges(const PeriodicPotential& v, int n_max, const EdgeSearchOptions& opt)
{
    BandStructure out;
    if (v.mode() == PotentialMode::FiniteGap) {
        out.edges = v.spec().edges;
        out.n_gaps = int(out.edges.size() / 2);
        out.open.assign(sz(out.n_gaps), true);
        out.provenance = EdgeProvenance::prescribed;
        out.ceiling = std::numeric_limits<double>::infinity();
        return out;
    }
    if (n_max < 0) throw Error(ErrorKind::EdgeSearchError, "n_max must be nonnegative");

    auto disc = [&](double E) { return discriminant(v, E, opt.hill).real(); };
    auto slope = [&](double E) { return discriminant_slope(v, E, opt.hill).slope.real(); };

    // Below min V every solution is convex, so Δ > 2 there.
    const double floor = v.min_value() - 1.0;
    std::vector<double> zeros;
    double s = 0, prev_e = floor, prev_d = disc(floor);
    if (!(prev_d > 2.0)) throw Error(ErrorKind::EdgeSearchError, "discriminant not above 2 at the floor");
    for (int it = 0; zeros.size() < sz(n_max + 1); ++it) {
        if (it > 200000) throw Error(ErrorKind::EdgeSearchError, "band scan did not terminate");
        s += opt.scan_step;
        const double e = floor + s * s;
        const double d = disc(e);
        if (prev_d * d <= 0) {
            zeros.push_back(solve_bracketed(disc, prev_e, e, 1e-13 * (1 + std::abs(e)),
                                            ErrorKind::EdgeSearchError));
        }
        prev_e = e;
        prev_d = d;
    }

    auto tol_at = [](double e) { return 1e-13 * (1 + std::abs(e)); };
    out.edges.push_back(solve_bracketed([&](double e) { return disc(e) - 2.0; }, floor, zeros[0],
                                        tol_at(zeros[0]), ErrorKind::EdgeSearchError));
    for (int j = 1; j <= n_max; ++j) {
        const double a = zeros[sz(j - 1)], b = zeros[sz(j)];
        const double sgn = (j % 2 == 0) ? 1.0 : -1.0;  // sign of Δ on gap j
        const double peak = solve_bracketed(slope, a, b, tol_at(b), ErrorKind::EdgeSearchError);
        const double excess = sgn * disc(peak) - 2.0;
        double lo = peak, hi = peak;
        bool open = false;
        if (excess > opt.excess_tol) {
            auto f = [&](double e) { return sgn * disc(e) - 2.0; };
            lo = solve_bracketed(f, a, peak, tol_at(peak), ErrorKind::EdgeSearchError);
            hi = solve_bracketed(f, peak, b, tol_at(peak), ErrorKind::EdgeSearchError);
            open = hi - lo > opt.closure_tol;
        }
        out.edges.push_back(lo);
        out.edges.push_back(hi);
        out.open.push_back(open);
    }
    out.n_gaps = n_max;
    out.ceiling = zeros.back();
    out.provenance = EdgeProvenance::computed;
    return out;
}

void require_open_gap(const BandStructure& b, int n)
{
    if (n < 1 || n > b.n_gaps) {
        std::ostringstream os;
        os << "gap " << n << " is outside the tabulated range (" << b.n_gaps << " gaps)";
        throw Error(ErrorKind::OutOfRange, os.str());
    }
    if (!b.gap_open(n)) {
        std::ostringstream os;
        os << "gap " << n << " is closed; hypothesis (O) fails";
        throw Error(ErrorKind::InvariantViolation, os.str());
    }
}

Determination nearest_determination(cplx k0, cplx target)
{
    Determination best;
    best.distance = std::numeric_limits<double>::infinity();
    best.runner_up = std::numeric_limits<double>::infinity();
    for (double sgn : {1.0, -1.0}) {
        const cplx base = sgn * k0;
        const double l0 = std::round((target - base).real() / two_pi);
        for (double dl : {-1.0, 0.0, 1.0}) {
            const cplx c = base + two_pi * (l0 + dl);
            const double d = std::abs(c - target);
            if (d < best.distance) {
                best.runner_up = best.distance;
                best.distance = d;
                best.value = c;
            } else if (d < best.runner_up) {
                best.runner_up = d;
            }
        }
    }
    return best;
}

cplx Dispersion::k_principal(cplx E) const
{
    if (E.imag() == 0) return k_real(E.real());
    if (E.imag() < 0) return std::conj(k_principal(std::conj(E)));
    const double x = E.real(), y = E.imag();
    cplx k = k_real(x);
    double t = 0, dt = 1.0 / 32;
    while (t < 1.0) {
        const double t1 = std::min(1.0, t + dt);
        const cplx w(x, y * t1);
        const Determination d = nearest_determination(k_any(w), k);
        if (d.runner_up < 10.0 * d.distance && dt > 1e-9) {
            dt *= 0.5;
            continue;
        }
        k = d.value;
        t = t1;
        dt = std::min(1.0 / 16, dt * 1.5);
    }
    return k;
}

HillDispersion::HillDispersion(PeriodicPotential v, int n_gaps, const EdgeSearchOptions& opt)
    : v_(std::move(v)), bands_(band_edges(v_, n_gaps, opt)), hill_(opt.hill)
{
}

cplx HillDispersion::k_real(double E) const
{
    const auto& b = bands_;
    if (E > b.ceiling) {
        std::ostringstream os;
        os << "energy " << E << " above the tabulated range " << b.ceiling;
        throw Error(ErrorKind::OutOfRange, os.str());
    }
    const double d = discriminant(v_, E, hill_).real();
    if (E < b.edges[0]) return {0.0, std::acosh(std::max(1.0, d / 2))};
    for (int j = 1; j <= b.n_gaps + 1; ++j) {
        const double hi = j <= b.n_gaps ? b.edge(2 * j) : b.ceiling;
        const double sgn = (j % 2 == 1) ? 1.0 : -1.0;
        if (E <= hi) return pi * (j - 1) + std::acos(std::clamp(sgn * d / 2, -1.0, 1.0));
        if (j <= b.n_gaps && E < b.edge(2 * j + 1))
            return {pi * j, std::acosh(std::max(1.0, -sgn * d / 2))};
    }
    return pi * (b.n_gaps + 1);  // unreachable: E <= ceiling
}

cplx HillDispersion::k_any(cplx E) const
{
    return std::acos(discriminant(v_, E, hill_) / 2.0);
}

std::shared_ptr<const Dispersion> make_dispersion(const PeriodicPotential& v, int n_gaps)
{
    if (v.mode() == PotentialMode::FiniteGap) return std::make_shared<FiniteGapDispersion>(v.spec());
    return std::make_shared<HillDispersion>(v, n_gaps);
}

cplx quasimomentum_main(const Dispersion& d, cplx E)
{
    return d.k_principal(E);
}

}  // namespace qpw
