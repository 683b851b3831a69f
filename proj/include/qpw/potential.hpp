#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace qpw {

enum class PotentialMode { Sampled, Fourier, FiniteGap };

const char* to_string(PotentialMode m);

// Band edges of a finite-gap operator.  `lambda` optionally prescribes Λ_n per
// gap; `dirichlet_phases` (one angle per gap) lets us synthesize a pointwise V.
struct FiniteGapSpec {
    std::vector<double> edges;
    std::vector<double> lambda;
    std::vector<double> dirichlet_phases;
};

// 1-periodic real potential.
class PeriodicPotential {
public:
    // V(x) = a0 + sum_m a_m cos(2πmx) + b_m sin(2πmx); b[0] is ignored.
    static PeriodicPotential fourier(std::vector<double> a, std::vector<double> b = {});
    // Uniform samples V(j/N), j < N; order 1 (linear) or 3 (periodic cubic spline).
    static PeriodicPotential sampled(std::vector<double> values, int order = 3);
    static PeriodicPotential finite_gap(FiniteGapSpec spec);

    PotentialMode mode() const { return mode_; }
    bool has_pointwise() const { return mode_ != PotentialMode::FiniteGap; }

    double operator()(double x) const;
    // Values at n uniform points j/n.
    std::vector<double> tabulate(int n) const;

    double min_value() const;
    double max_value() const;
    bool is_constant(double tol = 1e-13) const;

    // x -> V(x + s).
    PeriodicPotential translated(double s) const;

    const std::vector<double>& cos_coeffs() const { return a_; }
    const std::vector<double>& sin_coeffs() const { return b_; }
    const std::vector<double>& samples() const { return samples_; }
    int interpolation_order() const { return order_; }
    const FiniteGapSpec& spec() const;

private:
    PotentialMode mode_ = PotentialMode::Fourier;
    std::vector<double> a_{0.0}, b_{0.0};
    std::vector<double> samples_, curvature_;
    int order_ = 3;
    std::optional<FiniteGapSpec> fg_;
};

PeriodicPotential potential_from_json(const nlohmann::json& j);
nlohmann::json potential_to_json(const PeriodicPotential& v);
PeriodicPotential load_potential(const std::string& path);

}  // namespace qpw
