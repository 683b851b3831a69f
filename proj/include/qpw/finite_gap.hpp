#pragma once

#include <vector>

#include "qpw/hill.hpp"

namespace qpw {

// Quasi-momentum of a finite-gap operator from its band edges E_1 < ... < E_{2g+1}:
// dk = P(t) dt / (2 sqrt(R(t))), R = prod (t - E_j), P monic of degree g with
// zero integral over every gap.
class FiniteGapDispersion final : public Dispersion {
public:
    explicit FiniteGapDispersion(const FiniteGapSpec& spec, int chebyshev_nodes = 256);

    const BandStructure& bands() const override { return bands_; }
    cplx k_real(double E) const override;
    cplx k_any(cplx E) const override;
    cplx k_principal(cplx E) const override;

    int genus() const { return int(e_.size() / 2); }
    double P(double t) const;
    cplx P(cplx t) const;
    // Coefficients of P in powers of t, ascending; the last one is 1.
    std::vector<double> p_coefficients() const;
    // k at edge E_m from the band integrals (m is 1-based).
    double k_at_edge(int m) const { return k_edge_[sz(m - 1)]; }
    // Full-band integral of dk over band j (1-based), nominally π.
    double band_increment(int j) const { return band_[sz(j - 1)]; }

private:
    double sqrt_abs_r_without(double t, int skip_a, int skip_b) const;
    double integrate_from_edge(int m, double E) const;
    cplx dk(cplx t) const;
    cplx k_straight(cplx w) const;

    std::vector<double> e_;
    double shift_ = 0, scale_ = 1;
    std::vector<double> d_;  // P(t) = scale^g (u^g + sum d_m u^m), u = (t - shift)/scale
    std::vector<double> band_, k_edge_;
    double lift_ = 1.0;  // height of the detour used near the real axis
    BandStructure bands_;
};

// P in a gap or below E_1 changes the sign convention; exposed for tests.
double finite_gap_gap_integral(const FiniteGapDispersion& d, int n);

// Pointwise potential with prescribed band edges: Dirichlet eigenvalues
// mu_j(x) = c_j + h_j cos(phi_j(x)) follow the Dubrovin flow from the given
// initial phases and V = sum E_i - 2 sum mu_j (trace formula).
struct SynthesisResult {
    PeriodicPotential potential;
    std::vector<double> samples;      // V(j/N)
    std::vector<double> phase_drift;  // phi_j(1) - phi_j(0) - 2π·winding_j
    std::vector<int> winding;
};

struct SynthesisOptions {
    int samples = 512;
    double tol = 1e-12;
    double drift_tol = 1e-4;
    double fourier_floor = 1e-13;  // relative cutoff for trailing Fourier modes
};

SynthesisResult synthesize_finite_gap(const FiniteGapSpec& spec, std::vector<double> phases,
                                      const SynthesisOptions& opt = {});

}  // namespace qpw
