#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qpw/potential.hpp"

namespace qpw {

// -ψ'' + (V(x) + α cos(εx + ζ)) ψ = Eψ, integrated by the fourth-order Magnus
// scheme with V tabulated at the Gauss points of every step in one period.
class OracleSystem {
public:
    OracleSystem(const PeriodicPotential& v, double alpha, double epsilon, int steps_per_cell = 128);

    double alpha() const { return alpha_; }
    double epsilon() const { return epsilon_; }
    int steps_per_cell() const { return steps_; }

    // Transfer matrix over the unit cell [x, x + 1], x an integer.
    void cell_transfer(long x, double zeta, double E, double m[4]) const;
    // One Magnus step j of that cell, row-major.
    void step_transfer(long x, int j, double zeta, double E, double m[4]) const;

private:
    std::vector<double> v1_, v2_;  // V at the two Gauss points of each step
    double alpha_, epsilon_;
    int steps_;
};

// Pointwise potential for the oracle; finite-gap data are synthesized from
// their Dirichlet phases.  Throws UnsupportedPotential without phases.
PeriodicPotential pointwise_potential(const PeriodicPotential& v);

struct CocycleRun {
    double E = 0, zeta = 0, epsilon = 0, alpha = 0;
    long L = 0;
    std::vector<double> x, log_norm;  // one sample per cell
    int renormalizations = 0;
    double max_det_error = 0;
};

struct LyapunovEstimate {
    double value = 0;
    double error = 0;  // bootstrap standard error from segment slopes
};

struct LyapunovOptions {
    double fit_fraction = 0.8;  // fit over the last part of the run
    int segments = 16;
    int bootstrap = 200;
    unsigned seed = 20240607;
    double det_tol = 1e-8;
};

// ψ(0) = 0, ψ'(0) = 1 on [0, L]; renormalized every cell.
CocycleRun cocycle_run(const OracleSystem& s, double zeta, double E, long L,
                       const LyapunovOptions& opt = {});
LyapunovEstimate fit_lyapunov(const CocycleRun& run, const LyapunovOptions& opt = {});
LyapunovEstimate lyapunov_direct(const OracleSystem& s, double zeta, double E, long L,
                                 const LyapunovOptions& opt = {});

// Mean over several ζ; error combines the bootstrap errors, spread is max - min.
struct AveragedLyapunov {
    double value = 0, error = 0, spread = 0;
    std::vector<LyapunovEstimate> runs;
};
AveragedLyapunov lyapunov_averaged(const OracleSystem& s, double E, long L,
                                   const std::vector<double>& zetas = {0.0, 1.5707963267948966,
                                                                       3.141592653589793,
                                                                       4.71238898038469},
                                   const LyapunovOptions& opt = {});

struct IdsEstimate {
    double E = 0;
    long L = 0;
    long count = 0;  // Dirichlet eigenvalues below E on [-L, L]
    double value = 0;
};

// Sturm count from the Prüfer angle of the Dirichlet solution at -L.
IdsEstimate ids_direct(const OracleSystem& s, double zeta, double E, long L);

struct SpectrumScan {
    std::vector<double> energies;
    std::vector<long> counts;
    long L = 0;
    double zeta = 0;
    // Cells (E_i, E_{i+1}) where the count increases, with the increment.
    struct Cell {
        double lo, hi;
        long states;
    };
    std::vector<Cell> support() const;
    // Count at the grid energy nearest to E.
    long count_at(double E) const;
};

SpectrumScan spectrum_scan(const OracleSystem& s, std::vector<double> energies, long L,
                           double zeta = 0.0);
SpectrumScan spectrum_scan_serial(const OracleSystem& s, std::vector<double> energies, long L,
                                  double zeta = 0.0);

// Uniform coarse grid on [lo, hi] plus both ends of every predicted interval.
std::vector<double> two_tier_grid(double lo, double hi, int coarse,
                                  const std::vector<std::pair<double, double>>& predicted);

struct Containment {
    bool ok = false;
    long inside = 0, outside = 0;  // states
    long allowance = 0;            // boundary states tolerated outside
    std::vector<SpectrumScan::Cell> stray;
};

// Every support cell must lie in a predicted interval; up to `allowance`
// states (Dirichlet boundary states) may fall outside.
Containment check_containment(const SpectrumScan& scan,
                              const std::vector<std::pair<double, double>>& predicted,
                              long allowance);

// Ψ_{k+1} = M(E, kh + ζ) Ψ_k with M = [[τ²g₀g_π + 1/θ, τg₀], [θτg_π, θ]],
// g_ν = ξ_ν + sin(2πζ/ε + φ_ν).
struct ModelCocycle {
    double tau = 0, theta_n = 1, xi0 = 0, xi_pi = 0, phi0 = 0, phi_pi = 0;
    double epsilon = 0.1;
    double h() const;
    void matrix(double zeta, double m[4]) const;
};

struct ModelLyapunov {
    double value = 0;
    double variance = 0;  // across blocks of the run
};

ModelLyapunov model_lyapunov(const ModelCocycle& m, long n_steps, double zeta = 0.0, int blocks = 10);

nlohmann::json to_json(const LyapunovEstimate& e);
nlohmann::json to_json(const IdsEstimate& e);
std::string trace_csv(const CocycleRun& run);

}  // namespace qpw
