#pragma once

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qpw/actions.hpp"

namespace qpw {

// Action profile on J, interpolated in E from Chebyshev samples.  Φ' is
// interpolated from the sampled derivatives rather than differentiated.
class ActionTable {
public:
    // Samples f at `nodes` Chebyshev points of [lo, hi] (endpoints included).
    static ActionTable sample(const std::function<ActionSet(double)>& f, double lo, double hi,
                              int nodes = 25);
    // Same from the complex-WKB actions; the first failing node aborts.
    static ActionTable from_window(std::shared_ptr<const Dispersion> disp, int n, double alpha,
                                   double lo, double hi, int nodes = 25,
                                   const ActionOptions& opt = {});

    ActionSet at(double E) const;
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<ActionSet>& samples() const { return samples_; }

private:
    double interp(double E, double ActionSet::*field) const;
    double lo_ = 0, hi_ = 1;
    std::vector<double> x_, w_;
    std::vector<ActionSet> samples_;
};

enum class SeqType { type0, type_pi };
enum class IntervalType { type0, type_pi, resonant_pair };
enum class Nature { singular, mostly_ac, undetermined };

const char* to_string(SeqType t);
const char* to_string(IntervalType t);
const char* to_string(Nature n);

struct QuantizedSequence {
    SeqType type = SeqType::type0;
    double epsilon = 0;
    std::vector<double> energies;  // ascending
    std::vector<int> index;        // l with Φ/ε = π/2 + πl
    double spacing_C = 0;          // spacings lie in [ε/C, Cε]
};

// Roots of Φ_ν(E)/ε ≡ π/2 (mod π) in J.  Throws InvariantViolation when Φ_ν is
// not strictly monotone on J.
QuantizedSequence quantize(const ActionTable& t, double epsilon, SeqType type);

struct SpectralInterval {
    IntervalType type = IntervalType::type0;
    int l = -1;
    double center = 0, halfwidth = 0;
    double coarse_center = 0, coarse_halfwidth = 0;
    bool resonant = false;
    Nature nature = Nature::undetermined;
    double theta = 0;                              // representative Θ
    std::vector<std::pair<double, double>> theta_profile;  // (E, Θ) samples
    double dos_weight = 0;
    double log_lambda = 0;   // log λ_ν for non-resonant intervals
    double far_field = -1;   // (S_h - S_v)/2π when the other sequence is ε^N away, else -1
    std::vector<std::string> flags;
};

struct CoarseResult {
    double delta0 = 0;
    double halfwidth = 0;  // e^{-δ₀/ε}
    std::vector<SpectralInterval> zero, pi;
    std::vector<std::pair<int, int>> pairs;  // (index in zero, index in pi)
};

// δ₀ = ½ inf_J min(S_h, S_{v,0}, S_{v,π}) on a grid of `grid` points.
double delta0(const ActionTable& t, int grid = 401);

CoarseResult coarse_intervals(const QuantizedSequence& s0, const QuantizedSequence& spi,
                              const ActionTable& t, double epsilon);

// Leading-order center shift and width of a non-resonant interval, using the
// phase of the other sequence at its own quantized energy.  Throws
// ReclassifyAsResonant when the result leaves the coarse interval.
SpectralInterval refine_nonresonant(const SpectralInterval& iv, const ActionTable& t,
                                    double epsilon, double lambda_n);

struct ClassifyOptions {
    double margin = 0.05;  // c, in units of ε·log λ
    int far_power = 2;     // N in dist >= ε^N
};

// Θ = (ε/2π) log⁺ λ with λ = (t_v/t_h)·dist to the other sequence.
SpectralInterval classify_nonresonant(const SpectralInterval& iv, const ActionTable& t,
                                      double epsilon, const QuantizedSequence& other,
                                      const ClassifyOptions& opt = {});

// Sign-definite comparisons of the actions over J.
struct RegimeFlags {
    double delta = 0;
    bool alternation_0_singular = false;   // S_{v,π} - S_h > δ and S_{v,0} - S_h < -δ
    bool alternation_pi_singular = false;  // the mirror case
    bool transition = false;               // min S_h > max S_v
    bool transition_ratio = false;         // 1.5 min S_v > max S_h
    double min_sh = 0, max_sh = 0, min_sv = 0, max_sv = 0;
};

RegimeFlags action_regimes(const ActionTable& t, double delta, int grid = 201);

// Resonant pair with all coefficients taken at Ē; small numbers in log space.
struct ResonantPair {
    double E0 = 0, Epi = 0, Ebar = 0;
    double epsilon = 0;
    double lambda_n = 1;
    ActionSet at_bar;
    double log_tau = 0, log_rho = 0;
    double log_th = 0, log_tv0 = 0, log_tv_pi = 0;

    // ξ_ν(E) = Φ_ν'(Ē)/ε · (E - E_ν)/t_{v,ν}(Ē).
    double xi0(double E) const;
    double xi_pi(double E) const;
    // log|ξ_ν(E)|, finite where the value overflows.
    double log_abs_xi0(double E) const;
    double log_abs_xi_pi(double E) const;
};

ResonantPair make_resonant_pair(double E0, double Epi, const ActionSet& at_bar, double epsilon,
                                double lambda_n);
ResonantPair make_resonant_pair(double E0, double Epi, const ActionTable& t, double epsilon,
                                double lambda_n);

struct LargeTauResult {
    SpectralInterval i0, ipi;
    bool disjoint = true;
    double theta_center = 0;  // Θ(Ē)
};

struct RegimeOptions {
    double delta = 0.05;  // required |S_h - S_{v,0} - S_{v,π}|
    int samples = 33;     // Θ samples per interval
};

// Throws WrongRegime unless S_h - S_{v,0} - S_{v,π} >= δ at Ē.
LargeTauResult analyze_resonant_large_tau(const ResonantPair& p, const RegimeOptions& opt = {});
// Θ(E) = (ε/π) log(τ √(1 + |ξ₀| + |ξ_π|)).
double theta_large_tau(const ResonantPair& p, double E);

struct SmallTauResult {
    std::vector<SpectralInterval> components;  // two, ascending
    std::vector<double> endpoints;             // four
    bool center_in_sigma = false;
    bool touching = false;
    std::string scenario;  // "a", "b_lacuna", "b_separate", "intermediate"
    double singular_fraction = 0;  // measure of I⁺_c / |Σ|
    double ac_fraction = 0;        // measure of I⁻_c / |Σ|
};

// Defect |τ²ξ₀ξ_π + 2Λ| - 2 - τ²|ξ₀| - τ²|ξ_π|; Σ(ε) is where it is <= 0.
// Evaluated in x = (E - Ē)/(ε√t_h), where every term is O(1).
double small_tau_defect(const ResonantPair& p, double E);
// Θ(E) = (ε/π) log(τ √(|ξ₀| + |ξ_π|)), not clamped.
double theta_small_tau(const ResonantPair& p, double E);

// Throws WrongRegime unless S_h - S_{v,0} - S_{v,π} <= -δ and Λ_n >= 1;
// GeometryError unless Σ(ε) has exactly four endpoints.
SmallTauResult analyze_resonant_small_tau(const ResonantPair& p, double margin = 0.05,
                                          const RegimeOptions& opt = {});

// θ_n >= 1 with θ_n + 1/θ_n = 2Λ_n.
double theta_from_lambda(double lambda_n);

struct ModelParams {
    bool in_regime = false;
    double tau = 0, xi0 = 0, xi_pi = 0, theta_n = 1;
    double phi0 = 0, phi_pi = 0;  // not given by the asymptotics; free inputs
};

ModelParams detect_model_regime(const ResonantPair& p, double C = 10.0);

struct PairAnalysis {
    ResonantPair pair;
    std::string regime;  // "large_tau", "small_tau", "tau_order_one"
    std::vector<SpectralInterval> intervals;
    ModelParams model;
    std::string error;
};

struct LambdaChoice {
    double value = 1;
    std::string source;  // "computed", "prescribed", "synthesized", "default"
};

// Λ_n from the potential, the finite-gap spec or its Dubrovin synthesis.
LambdaChoice resolve_lambda(const PeriodicPotential& v, const BandStructure& bands, int n);

struct ReportOptions {
    int table_nodes = 25;
    ClassifyOptions classify{};
    RegimeOptions regime{};
    double model_C = 10.0;
    ActionOptions actions{};
};

struct HypothesisSummary {
    double bei_margin = 0;  // smallest (BEI) margin over the table nodes
    double t_margin = 0;    // smallest lhs - rhs of (T)
    int points = 0;
};

struct SpectralReport {
    int n = 1;
    double alpha = 0, epsilon = 0, lo = 0, hi = 0;
    LambdaChoice lambda;
    HypothesisSummary hypotheses;
    std::vector<ActionSet> table;
    QuantizedSequence seq0, seqpi;
    double delta0 = 0, halfwidth = 0;
    RegimeFlags regimes;
    std::vector<SpectralInterval> intervals;  // final, ascending by center
    std::vector<PairAnalysis> pairs;
    double dos_total = 0;
};

// Whole pipeline on J = [lo, hi].  Hypothesis failures throw GeometryError
// with the offending margins.
SpectralReport spectral_report(std::shared_ptr<const Dispersion> disp, int n, double alpha,
                               double epsilon, double lo, double hi, LambdaChoice lambda,
                               const ReportOptions& opt = {});
// Same from a prebuilt table.
SpectralReport spectral_report(const ActionTable& t, int n, double alpha, double epsilon,
                               LambdaChoice lambda, const ReportOptions& opt = {});

nlohmann::json to_json(const SpectralInterval& iv);
nlohmann::json to_json(const SpectralReport& r);

}  // namespace qpw
