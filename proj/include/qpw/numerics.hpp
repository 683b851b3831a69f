#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "qpw/error.hpp"

namespace qpw {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr std::size_t sz(long long i) { return static_cast<std::size_t>(i); }

// Root of f in [a, b], f(a)·f(b) <= 0 required.  Throws `fail` otherwise.
double solve_bracketed(const std::function<double(double)>& f, double a, double b,
                       double xtol, ErrorKind fail);

// 20-point Gauss-Legendre on [a, b].
double gl20(const std::function<double(double)>& f, double a, double b);
cplx gl20c(const std::function<cplx(double)>& f, double a, double b);

// Nodes/weights of the 20-point rule mapped to [-1, 1].
std::span<const double> gl20_nodes();
std::span<const double> gl20_weights();

// Adaptive Gauss-Kronrod (31 points), absolute+relative tolerance.
double integrate(const std::function<double(double)>& f, double a, double b, double tol);
cplx integrate_c(const std::function<cplx(double)>& f, double a, double b, double tol);

// Least-squares slope and intercept of y against x.
struct LinearFit {
    double slope = 0, intercept = 0;
};
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// Compensated (Kahan-Babuska) accumulator.
class KahanSum {
public:
    void add(double v);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0, comp_ = 0;
};

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b);

}  // namespace qpw
