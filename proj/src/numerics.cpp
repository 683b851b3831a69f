#include "qpw/numerics.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace qpw {

namespace bq = boost::math::quadrature;

double solve_bracketed(const std::function<double(double)>& f, double a, double b,
                       double xtol, ErrorKind fail)
{
    double fa = f(a), fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (!(std::isfinite(fa) && std::isfinite(fb)) || fa * fb > 0) {
        std::ostringstream os;
        os << "no sign change on [" << a << ", " << b << "] (f = " << fa << ", " << fb << ")";
        throw Error(fail, os.str());
    }
    std::uintmax_t iters = 200;
    auto tol = [xtol](double x, double y) { return std::abs(x - y) <= xtol; };
    auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    return 0.5 * (r.first + r.second);
}

namespace {

// Full symmetric 20-point rule expanded from boost's half table.
struct Gl20 {
    std::array<double, 20> x{}, w{};
    Gl20()
    {
        const auto& ab = bq::gauss<double, 20>::abscissa();
        const auto& wt = bq::gauss<double, 20>::weights();
        for (std::size_t i = 0; i < 10; ++i) {
            x[9 - i] = -ab[i];
            w[9 - i] = wt[i];
            x[10 + i] = ab[i];
            w[10 + i] = wt[i];
        }
    }
};

const Gl20& rule()
{
    static const Gl20 r;
    return r;
}

}  // namespace

std::span<const double> gl20_nodes() { return rule().x; }
std::span<const double> gl20_weights() { return rule().w; }

double gl20(const std::function<double(double)>& f, double a, double b)
{
    const auto& r = rule();
    double c = 0.5 * (a + b), h = 0.5 * (b - a), s = 0;
    for (std::size_t i = 0; i < 20; ++i) s += r.w[i] * f(c + h * r.x[i]);
    return s * h;
}

cplx gl20c(const std::function<cplx(double)>& f, double a, double b)
{
    const auto& r = rule();
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    cplx s = 0;
    for (std::size_t i = 0; i < 20; ++i) s += r.w[i] * f(c + h * r.x[i]);
    return s * h;
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol)
{
    double err = 0;
    double v = bq::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol, &err);
    if (!std::isfinite(v)) throw Error(ErrorKind::QuadratureError, "non-finite integral");
    return v;
}

cplx integrate_c(const std::function<cplx(double)>& f, double a, double b, double tol)
{
    double err = 0;
    cplx v = bq::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol, &err);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorKind::QuadratureError, "non-finite integral");
    return v;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    LinearFit fit;
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

void KahanSum::add(double v)
{
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
        comp_ += (sum_ - t) + v;
    else
        comp_ += (v - t) + sum_;
    sum_ = t;
}

double log_add(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

}  // namespace qpw
