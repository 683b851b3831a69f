#include "qpw/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "qpw/error.hpp"
#include "qpw/numerics.hpp"

namespace qpw {

const char* to_string(PotentialMode m)
{
    switch (m) {
    case PotentialMode::Sampled: return "sampled";
    case PotentialMode::Fourier: return "fourier";
    case PotentialMode::FiniteGap: return "finite_gap";
    }
    return "?";
}

PeriodicPotential PeriodicPotential::fourier(std::vector<double> a, std::vector<double> b)
{
    if (a.empty()) a.push_back(0.0);
    b.resize(std::max(a.size(), b.size()), 0.0);
    a.resize(b.size(), 0.0);
    b[0] = 0.0;
    PeriodicPotential v;
    v.mode_ = PotentialMode::Fourier;
    v.a_ = std::move(a);
    v.b_ = std::move(b);
    return v;
}

PeriodicPotential PeriodicPotential::sampled(std::vector<double> values, int order)
{
    if (values.size() < 4) throw Error(ErrorKind::UnsupportedPotential, "need at least 4 samples");
    if (order != 1 && order != 3)
        throw Error(ErrorKind::UnsupportedPotential, "interpolation order must be 1 or 3");
    PeriodicPotential v;
    v.mode_ = PotentialMode::Sampled;
    v.order_ = order;
    v.samples_ = std::move(values);
    if (order == 3) {
        // Periodic spline: M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i-1} - 2 y_i + y_{i+1}) / h².
        // Diagonally dominant, so Gauss-Seidel converges geometrically (factor 1/2).
        const std::size_t n = v.samples_.size();
        const double h = 1.0 / double(n);
        const auto& y = v.samples_;
        std::vector<double> rhs(n), m(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            rhs[i] = 6.0 * (y[(i + n - 1) % n] - 2 * y[i] + y[(i + 1) % n]) / (h * h);
        for (int it = 0; it < 200; ++it) {
            double change = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double mi = (rhs[i] - m[(i + n - 1) % n] - m[(i + 1) % n]) / 4.0;
                change = std::max(change, std::abs(mi - m[i]));
                m[i] = mi;
            }
            if (change < 1e-15 * (1.0 + std::abs(rhs[0]))) break;
        }
        v.curvature_ = std::move(m);
    }
    return v;
}

PeriodicPotential PeriodicPotential::finite_gap(FiniteGapSpec spec)
{
    const auto& e = spec.edges;
    if (e.empty() || e.size() % 2 == 0)
        throw Error(ErrorKind::UnsupportedPotential, "finite-gap spec needs an odd number of edges");
    for (std::size_t i = 1; i < e.size(); ++i)
        if (!(e[i] > e[i - 1]))
            throw Error(ErrorKind::InvariantViolation,
                        "finite-gap edges must be strictly increasing (all gaps open)");
    const std::size_t g = e.size() / 2;
    if (!spec.lambda.empty() && spec.lambda.size() != g)
        throw Error(ErrorKind::UnsupportedPotential, "lambda must list one value per gap");
    if (!spec.dirichlet_phases.empty() && spec.dirichlet_phases.size() != g)
        throw Error(ErrorKind::UnsupportedPotential, "dirichlet_phases must list one angle per gap");
    PeriodicPotential v;
    v.mode_ = PotentialMode::FiniteGap;
    v.fg_ = std::move(spec);
    return v;
}

const FiniteGapSpec& PeriodicPotential::spec() const
{
    if (!fg_) throw Error(ErrorKind::UnsupportedMode, "potential is not in finite-gap mode");
    return *fg_;
}

double PeriodicPotential::operator()(double x) const
{
    switch (mode_) {
    case PotentialMode::Fourier: {
        const double th = two_pi * x;
        const double c1 = std::cos(th), s1 = std::sin(th);
        double c = 1.0, s = 0.0, v = a_[0];
        for (std::size_t m = 1; m < a_.size(); ++m) {
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
            v += a_[m] * c + b_[m] * s;
        }
        return v;
    }
    case PotentialMode::Sampled: {
        const std::size_t n = samples_.size();
        double u = (x - std::floor(x)) * double(n);
        std::size_t i = std::min(sz(u), n - 1);
        double t = u - double(i);
        std::size_t j = (i + 1) % n;
        double lin = (1 - t) * samples_[i] + t * samples_[j];
        if (order_ == 1) return lin;
        const double h = 1.0 / double(n);
        return lin - h * h * t * (1 - t) / 6.0 *
                         ((2 - t) * curvature_[i] + (1 + t) * curvature_[j]);
    }
    case PotentialMode::FiniteGap:
        break;
    }
    throw Error(ErrorKind::UnsupportedMode, "finite-gap potential has no pointwise values");
}

std::vector<double> PeriodicPotential::tabulate(int n) const
{
    std::vector<double> out(sz(n));
    for (int j = 0; j < n; ++j) out[sz(j)] = (*this)(double(j) / n);
    return out;
}

double PeriodicPotential::min_value() const
{
    auto t = tabulate(2048);
    return *std::min_element(t.begin(), t.end());
}

double PeriodicPotential::max_value() const
{
    auto t = tabulate(2048);
    return *std::max_element(t.begin(), t.end());
}

bool PeriodicPotential::is_constant(double tol) const
{
    if (!has_pointwise()) return false;
    auto t = tabulate(512);
    auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    return *hi - *lo <= tol * (1.0 + std::abs(*hi));
}

PeriodicPotential PeriodicPotential::translated(double s) const
{
    switch (mode_) {
    case PotentialMode::Fourier: {
        std::vector<double> a(a_.size()), b(b_.size());
        a[0] = a_[0];
        for (std::size_t m = 1; m < a_.size(); ++m) {
            const double c = std::cos(two_pi * double(m) * s), sn = std::sin(two_pi * double(m) * s);
            a[m] = a_[m] * c + b_[m] * sn;
            b[m] = b_[m] * c - a_[m] * sn;
        }
        return fourier(std::move(a), std::move(b));
    }
    case PotentialMode::Sampled: {
        const std::size_t n = samples_.size();
        std::vector<double> v(n);
        for (std::size_t j = 0; j < n; ++j) v[j] = (*this)(double(j) / double(n) + s);
        return sampled(std::move(v), order_);
    }
    case PotentialMode::FiniteGap:
        return *this;
    }
    return *this;
}

PeriodicPotential potential_from_json(const nlohmann::json& j)
{
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "fourier") {
        auto a = j.at("a").get<std::vector<double>>();
        std::vector<double> b;
        if (j.contains("b")) b = j.at("b").get<std::vector<double>>();
        return PeriodicPotential::fourier(std::move(a), std::move(b));
    }
    if (mode == "sampled") {
        int order = j.value("interpolation", 3);
        return PeriodicPotential::sampled(j.at("samples").get<std::vector<double>>(), order);
    }
    if (mode == "finite_gap") {
        FiniteGapSpec s;
        s.edges = j.at("edges").get<std::vector<double>>();
        if (j.contains("lambda")) s.lambda = j.at("lambda").get<std::vector<double>>();
        if (j.contains("dirichlet_phases"))
            s.dirichlet_phases = j.at("dirichlet_phases").get<std::vector<double>>();
        return PeriodicPotential::finite_gap(std::move(s));
    }
    throw Error(ErrorKind::UnsupportedMode, "unknown potential mode '" + mode + "'");
}

nlohmann::json potential_to_json(const PeriodicPotential& v)
{
    nlohmann::json j;
    j["mode"] = to_string(v.mode());
    switch (v.mode()) {
    case PotentialMode::Fourier:
        j["a"] = v.cos_coeffs();
        j["b"] = v.sin_coeffs();
        break;
    case PotentialMode::Sampled:
        j["samples"] = v.samples();
        j["interpolation"] = v.interpolation_order();
        break;
    case PotentialMode::FiniteGap:
        j["edges"] = v.spec().edges;
        if (!v.spec().lambda.empty()) j["lambda"] = v.spec().lambda;
        if (!v.spec().dirichlet_phases.empty()) j["dirichlet_phases"] = v.spec().dirichlet_phases;
        break;
    }
    return j;
}

PeriodicPotential load_potential(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::UnsupportedPotential, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
        return potential_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::UnsupportedPotential, path + ": " + e.what());
    }
}

}  // namespace qpw
