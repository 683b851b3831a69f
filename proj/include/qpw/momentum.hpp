#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qpw/hill.hpp"

namespace qpw {

// Margins of the band-edge interaction hypothesis for gap n and window
// F(E) = [E - α, E + α].  Each margin is positive when its inclusion holds.
struct BeiReport {
    bool holds = false;
    double lower_gap = 0;   // E_{2n} - (E - α)
    double upper_gap = 0;   // (E + α) - E_{2n+1}
    double lower_band = 0;  // (E - α) - E_{2n-1}
    double upper_band = 0;  // E_{2n+2} - (E + α)
    double margin() const;
};

BeiReport check_bei(const BandStructure& bands, int n, double E, double alpha);

// Energy, coupling and interacting gap, with the dispersion of H₀.
struct WindowContext {
    std::shared_ptr<const Dispersion> disp;
    double E = 0;
    double alpha = 0;
    int n = 1;

    const BandStructure& bands() const { return disp->bands(); }
    cplx energy_at(cplx zeta) const { return E - alpha * std::cos(zeta); }
};

// Throws GeometryError with the margins when (BEI) fails.
WindowContext make_window(std::shared_ptr<const Dispersion> disp, int n, double E, double alpha);

struct BranchPoint {
    int m = 0;  // edge index: E - α cos ζ = E_m
    cplx zeta;
};

struct BranchPointSet {
    int n = 1;
    double zeta_lo = 0;  // ζ_{2n}
    double zeta_hi = 0;  // ζ_{2n+1}
    // ζ_{2n-1}, ..., ζ_1 on iℝ₊ (increasing height), then ζ_{2n+2}, ... on π + iℝ₊.
    std::vector<BranchPoint> imag_axis, pi_axis;

    // All points in the strip 0 <= Re ζ <= π, upper half plane and real line.
    std::vector<cplx> all() const;
    // Smallest distance between distinct points, mirrors in ζ → -ζ, conj ζ included.
    double min_separation() const;
    // Height of ζ_m; +inf when the edge is absent.
    double height(int m) const;
};

BranchPointSet branch_points(const WindowContext& ctx);

// κ = s·κ_p + 2πl, κ_p the principal momentum (Schwarz-reflected below ℝ).
struct Branch {
    int sign = 1;
    int shift = 0;
    friend bool operator==(const Branch&, const Branch&) = default;
};

struct MomentumOptions {
    double proximity = 1e-10;  // closest allowed approach to a complex branch point
};

cplx complex_momentum(const WindowContext& ctx, cplx zeta, Branch b = {},
                      const MomentumOptions& opt = {});

// Hypothesis (T): 2π min(Im ζ_{2n-2}, Im ζ_{2n+3}) against the largest action.
struct TReport {
    bool holds = false;
    double lhs = 0;
    double rhs = 0;
};
TReport check_T(const WindowContext& ctx, const BranchPointSet& bp, double sh, double sv0,
                double sv_pi);

enum class RealBranchKind { gamma_0, gamma_pi };

// Closed polyline in the real (ζ, κ) plane; first point repeated at the end.
struct RealBranch {
    RealBranchKind which = RealBranchKind::gamma_0;
    std::vector<double> zeta, kappa;
    double axis_zeta = 0;   // mirror line ζ = 0 or π
    double axis_kappa = 0;  // mirror line κ = πn
};

struct RealBranchOptions {
    int samples = 64;  // per quarter
    double closure_tol = 1e-8;
};

std::pair<RealBranch, RealBranch> real_branches(const WindowContext& ctx,
                                                const RealBranchOptions& opt = {});

struct ContinuationOptions {
    double separation = 10.0;  // runner-up must be this many times farther than the pick
    double min_step = 1e-7;    // fraction of a path segment
    double clearance = 0.0;    // reject paths closer than this to a branch point
};

struct PathContinuation {
    std::vector<cplx> zeta, kappa;
    Branch start, end;
    double end_mismatch = 0;  // |κ_end - (s κ_p + 2πl)| for the recorded end tag
    int substeps = 0;         // extra points inserted between path vertices
};

// Tracks κ along the polyline by continuity, starting on determination `start`.
PathContinuation continue_kappa(const WindowContext& ctx, const std::vector<cplx>& path,
                                Branch start = {}, const ContinuationOptions& opt = {});

// Determination of κ at ζ relative to the principal value there.
Branch classify_determination(const WindowContext& ctx, cplx zeta, cplx kappa,
                              double* mismatch = nullptr);

// Quadrature rule on a counter-clockwise stadium around the segment [a, b]:
// nodes in path order and complex weights for ∮ f dζ.
struct LoopRule {
    std::vector<cplx> nodes, weights;
};

enum class StadiumStart { side_middle, cap_a };

LoopRule stadium_rule(cplx a, cplx b, double radius, StadiumStart start);

std::string to_csv(const PathContinuation& p);
std::string to_csv(const BranchPointSet& bp);

}  // namespace qpw
