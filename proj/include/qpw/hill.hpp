#pragma once

#include <array>
#include <memory>
#include <vector>

#include "qpw/numerics.hpp"
#include "qpw/potential.hpp"

namespace qpw {

// Transfer matrix over one period: columns are (y, y') at x = 1 for initial
// data (1, 0) and (0, 1).
struct Monodromy {
    cplx energy;
    cplx m11, m12, m21, m22;
    cplx trace() const { return m11 + m22; }
    cplx det() const { return m11 * m22 - m12 * m21; }
};

struct HillOptions {
    double tol = 1e-12;
};

Monodromy monodromy(const PeriodicPotential& v, cplx E, const HillOptions& opt = {});
cplx discriminant(const PeriodicPotential& v, cplx E, const HillOptions& opt = {});

struct DiscriminantWithSlope {
    cplx value, slope;  // Δ(E), Δ'(E)
};
DiscriminantWithSlope discriminant_slope(const PeriodicPotential& v, cplx E,
                                         const HillOptions& opt = {});

enum class EdgeProvenance { computed, prescribed };

// Gap n (1-based) is (E_{2n}, E_{2n+1}); edges() holds E_1, E_2, ... .
struct BandStructure {
    std::vector<double> edges;
    std::vector<bool> open;  // per gap
    int n_gaps = 0;
    EdgeProvenance provenance = EdgeProvenance::computed;
    double ceiling = 0;  // energies above this are outside the tabulated range

    // E_m with m 1-based; returns +inf beyond the last edge of a finite-gap
    // spectrum and -inf for m < 1.
    double edge(int m) const;
    bool gap_open(int n) const { return n >= 1 && n <= n_gaps && open[sz(n - 1)]; }
    // Band index j with E in [E_{2j-1}, E_{2j}], 0 if E lies in a gap or below E_1.
    int band_of(double E) const;
    // Gap index n with E in (E_{2n}, E_{2n+1}), 0 otherwise.
    int gap_of(double E) const;
};

struct EdgeSearchOptions {
    double closure_tol = 1e-9;     // gap length below which a gap is reported closed
    double excess_tol = 1e-12;     // max of ±Δ - 2 below which the gap is treated as closed
    double scan_step = pi / 32.0;  // step in sqrt(E - E_floor)
    HillOptions hill{};
};

BandStructure band_edges(const PeriodicPotential& v, int n_max, const EdgeSearchOptions& opt = {});

// Throws InvariantViolation when gap n is closed (hypothesis (O)).
void require_open_gap(const BandStructure& b, int n);

// Nearest determination ±k0 + 2πl to `target`, plus the distance to the runner-up.
struct Determination {
    cplx value;
    double distance = 0;
    double runner_up = 0;
};
Determination nearest_determination(cplx k0, cplx target);

// Bloch quasi-momentum k with cos k = Δ(E)/2.
class Dispersion {
public:
    virtual ~Dispersion() = default;
    virtual const BandStructure& bands() const = 0;
    // Principal branch on the real axis (Im k >= 0).
    virtual cplx k_real(double E) const = 0;
    // Some determination at complex E; all others are ±k + 2πl.
    virtual cplx k_any(cplx E) const = 0;
    // Principal branch continued into the upper half plane; Schwarz reflection below.
    virtual cplx k_principal(cplx E) const;
};

class HillDispersion final : public Dispersion {
public:
    HillDispersion(PeriodicPotential v, int n_gaps, const EdgeSearchOptions& opt = {});
    const BandStructure& bands() const override { return bands_; }
    cplx k_real(double E) const override;
    cplx k_any(cplx E) const override;
    const PeriodicPotential& potential() const { return v_; }

private:
    PeriodicPotential v_;
    BandStructure bands_;
    HillOptions hill_;
};

std::shared_ptr<const Dispersion> make_dispersion(const PeriodicPotential& v, int n_gaps);

// Principal quasi-momentum with the band-mapping contract; range-checked.
cplx quasimomentum_main(const Dispersion& d, cplx E);

// Bloch solutions ψ± = e^{±ikx} p±, ψ±(0) = 1, sampled on x_j = j/n.
struct BlochPair {
    cplx energy;
    cplx k;  // ψ₊(x+1) = e^{ik} ψ₊(x)
    std::vector<cplx> p_plus, p_minus;
    std::vector<cplx> dpsi_plus0, dpsi_minus0;  // ψ'±(0), one entry
};

struct BlochOptions {
    int grid = 256;   // samples per period
    int substeps = 4; // RK steps per sample interval
};

BlochPair bloch_solutions(const PeriodicPotential& v, cplx E, const BlochOptions& opt = {});
// Same, with the quasi-momentum chosen nearest to `k_hint` among ±k + 2πl.
BlochPair bloch_solutions(const PeriodicPotential& v, cplx E, cplx k_hint,
                          const BlochOptions& opt);

struct OmegaOptions {
    BlochOptions bloch{};
    double step_scale = 1e-5;     // h = step_scale·(1 + |E|)
    double denom_floor = 1e-10;
};

cplx omega(const PeriodicPotential& v, cplx E, const OmegaOptions& opt = {});

struct LambdaOptions {
    OmegaOptions omega{};
    int nodes = 192;
    double margin_fraction = 0.35;  // circle radius = half gap + this fraction of the free room
};

struct LambdaResult {
    double lambda = 1;
    cplx log_theta;  // ∮ ω dE
    double radius = 0;
    cplx center;
};

LambdaResult lambda_n(const PeriodicPotential& v, const BandStructure& bands, int n,
                      const LambdaOptions& opt = {});
// Serial reference of the same contour sum.
LambdaResult lambda_n_serial(const PeriodicPotential& v, const BandStructure& bands, int n,
                             const LambdaOptions& opt = {});

}  // namespace qpw
