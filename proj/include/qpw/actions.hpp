#pragma once

#include <string>
#include <vector>

#include "qpw/momentum.hpp"

namespace qpw {

enum class Sigma { zero, pi };

struct ActionSet {
    double E = 0;
    double phi0 = 0, phi_pi = 0;
    double sv0 = 0, sv_pi = 0;
    double sh0 = 0, sh_pi = 0, sh = 0;
    double dphi0 = 0, dphi_pi = 0;
};

struct ActionOptions {
    double clearance_fraction = 0.05;  // stadium radius / min branch-point separation
    double deriv_step = 1e-5;          // h = deriv_step·(1 + |E|) for Φ'
    double quad_tol = 1e-12;
    double loop_tol = 1e-6;            // reduced vs loop phase integral
    double imag_tol = 1e-7;            // |Im| allowed on a real action
    int loop_nodes = 256;              // trapezoid nodes on γ₀, γ_π
};

// Φ_σ by the symmetry-reduced integral, cross-checked against a trapezoid
// rule on the closed real branch.
double phase_integral(const WindowContext& ctx, Sigma s, const ActionOptions& opt = {});
double phase_integral_loop(const WindowContext& ctx, Sigma s, int nodes);

struct LoopAction {
    double value = 0;  // positive action
    cplx raw;          // -(i/2) ∮ κ dζ on the counter-clockwise stadium
    int orientation = 1;  // sign that makes the action positive
    double radius = 0;
    int substeps = 0;
    double closure = 0;  // |κ(end) - κ(start)| after one turn
};

LoopAction vertical_action(const WindowContext& ctx, Sigma s, const ActionOptions& opt = {});
LoopAction horizontal_action(const WindowContext& ctx, Sigma s, const ActionOptions& opt = {});

// Same actions reduced to integrals along the straight cuts.
double vertical_action_cut(const WindowContext& ctx, Sigma s, double tol = 1e-12);
double horizontal_action_cut(const WindowContext& ctx, Sigma s, double tol = 1e-12);

ActionSet compute_actions(const WindowContext& ctx, const ActionOptions& opt = {});
// Phases and actions from the cut-reduced integrals only; Φ' is left at 0.
ActionSet cut_actions(const WindowContext& ctx, double tol = 1e-10);

// log t = -S/ε; t_h = t_{h,0}·t_{h,π}.
struct TunnelCoefficients {
    double epsilon = 0;
    double log_tv0 = 0, log_tv_pi = 0, log_th0 = 0, log_th_pi = 0, log_th = 0;
    double tv0() const;
    double tv_pi() const;
    double th() const;
};

TunnelCoefficients tunneling(const ActionSet& a, double epsilon);

struct ProfileRow {
    ActionSet actions;
    bool ok = false;
    std::string error;
    bool positive = false;
    bool parity = false;    // |S_{h,0} - S_{h,π}| < parity_tol
    bool monotone = false;  // Φ₀' < 0 < Φ_π'
};

struct ProfileOptions {
    ActionOptions actions{};
    double parity_tol = 1e-8;
};

std::vector<ProfileRow> action_profile(std::shared_ptr<const Dispersion> disp, int n, double alpha,
                                       const std::vector<double>& energies,
                                       const ProfileOptions& opt = {});
std::vector<ProfileRow> action_profile_serial(std::shared_ptr<const Dispersion> disp, int n,
                                              double alpha, const std::vector<double>& energies,
                                              const ProfileOptions& opt = {});

std::string to_csv(const std::vector<ProfileRow>& rows);

}  // namespace qpw
