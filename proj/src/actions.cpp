#include "qpw/actions.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "qpw/parallel.hpp"

namespace qpw {

namespace {

double kp_real(const WindowContext& ctx, double w) { return ctx.disp->k_real(w).real(); }

// Φ_σ from one quarter of γ_σ; the square-root end is removed by s².
double phase_reduced(const WindowContext& ctx, Sigma s, double tol)
{
    const BranchPointSet bp = branch_points(ctx);
    const double mid = pi * ctx.n;
    if (s == Sigma::zero) {
        const double z = bp.zeta_lo;
        auto f = [&](double u) {
            const double zeta = z * (1 - u * u);
            return (mid - kp_real(ctx, ctx.E - ctx.alpha * std::cos(zeta))) * 2 * z * u;
        };
        return 2 * integrate(f, 0.0, 1.0, tol);
    }
    const double z = bp.zeta_hi, span = pi - z;
    auto f = [&](double u) {
        const double zeta = z + span * u * u;
        return (kp_real(ctx, ctx.E - ctx.alpha * std::cos(zeta)) - mid) * 2 * span * u;
    };
    return 2 * integrate(f, 0.0, 1.0, tol);
}

LoopAction loop_action(const WindowContext& ctx, cplx a, cplx b, StadiumStart start,
                       const ActionOptions& opt)
{
    const BranchPointSet bp = branch_points(ctx);
    const double r = opt.clearance_fraction * bp.min_separation();
    const LoopRule rule = stadium_rule(a, b, r, start);
    std::vector<cplx> path = rule.nodes;
    path.push_back(rule.nodes.front());
    ContinuationOptions co;
    co.clearance = 0.5 * r;
    const PathContinuation pc = continue_kappa(ctx, path, Branch{}, co);

    LoopAction out;
    out.radius = r;
    out.substeps = pc.substeps;
    out.closure = std::abs(pc.kappa.back() - pc.kappa.front());
    if (out.closure > 1e-8 * (1 + std::abs(pc.kappa.front()))) {
        std::ostringstream os;
        os << "stadium around [" << a << ", " << b << "] is not closed on Γ (κ mismatch "
           << out.closure << ")";
        throw Error(ErrorKind::ConsistencyError, os.str());
    }
    cplx sum = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * pc.kappa[i];
    out.raw = cplx(0, -0.5) * sum;
    if (std::abs(out.raw.imag()) > opt.imag_tol) {
        std::ostringstream os;
        os << "loop action has imaginary part " << out.raw.imag();
        throw Error(ErrorKind::ConsistencyError, os.str());
    }
    out.orientation = out.raw.real() >= 0 ? 1 : -1;
    out.value = std::abs(out.raw.real());
    return out;
}

}  // namespace

double phase_integral_loop(const WindowContext& ctx, Sigma s, int nodes)
{
    // ζ = c + ρ cos θ runs once around the real branch; the branch switch at
    // θ = 0, π is absorbed by |sin θ|, so the periodic trapezoid rule applies.
    const BranchPointSet bp = branch_points(ctx);
    const double mid = pi * ctx.n;
    const double c = s == Sigma::zero ? 0.0 : pi;
    const double rho = s == Sigma::zero ? bp.zeta_lo : pi - bp.zeta_hi;
    KahanSum acc;
    for (int j = 0; j < nodes; ++j) {
        const double th = two_pi * (j + 0.5) / nodes;
        const double k = kp_real(ctx, ctx.E - ctx.alpha * std::cos(c + rho * std::cos(th)));
        const double f = s == Sigma::zero ? mid - k : k - mid;
        acc.add(f * std::abs(std::sin(th)));
    }
    return 0.5 * rho * acc.value() * two_pi / nodes;
}

double phase_integral(const WindowContext& ctx, Sigma s, const ActionOptions& opt)
{
    const double reduced = phase_reduced(ctx, s, opt.quad_tol);
    if (opt.loop_nodes > 0) {
        const double loop = phase_integral_loop(ctx, s, opt.loop_nodes);
        if (std::abs(loop - reduced) > opt.loop_tol) {
            std::ostringstream os;
            os << "phase integral mismatch: reduced " << reduced << ", loop " << loop;
            throw Error(ErrorKind::ConsistencyError, os.str());
        }
    }
    return reduced;
}

LoopAction vertical_action(const WindowContext& ctx, Sigma s, const ActionOptions& opt)
{
    const BranchPointSet bp = branch_points(ctx);
    if (s == Sigma::zero) {
        const cplx top = bp.imag_axis.front().zeta;  // ζ_{2n-1}, nearest to ℝ
        return loop_action(ctx, std::conj(top), top, StadiumStart::side_middle, opt);
    }
    if (bp.pi_axis.empty()) throw Error(ErrorKind::GeometryError, "no branch point on π + iℝ");
    const cplx top = bp.pi_axis.front().zeta;  // ζ_{2n+2}
    return loop_action(ctx, std::conj(top), top, StadiumStart::side_middle, opt);
}

LoopAction horizontal_action(const WindowContext& ctx, Sigma s, const ActionOptions& opt)
{
    const BranchPointSet bp = branch_points(ctx);
    if (s == Sigma::pi) return loop_action(ctx, bp.zeta_lo, bp.zeta_hi, StadiumStart::cap_a, opt);
    return loop_action(ctx, -bp.zeta_hi, -bp.zeta_lo, StadiumStart::cap_a, opt);
}

double vertical_action_cut(const WindowContext& ctx, Sigma s, double tol)
{
    // Going round the far end of the cut maps κ to 2π(n∓1) - κ, so the loop
    // integral is twice the integral of κ - π(n∓1) along the cut.
    const BranchPointSet bp = branch_points(ctx);
    const int n = ctx.n;
    if (s == Sigma::zero) {
        const double y = bp.imag_axis.front().zeta.imag();
        auto f = [&](double u) {
            const double t = y * (1 - u * u);
            return (kp_real(ctx, ctx.E - ctx.alpha * std::cosh(t)) - pi * (n - 1)) * 2 * y * u;
        };
        return 2 * integrate(f, 0.0, 1.0, tol);
    }
    const double y = bp.pi_axis.front().zeta.imag();
    auto f = [&](double u) {
        const double t = y * (1 - u * u);
        return (pi * (n + 1) - kp_real(ctx, ctx.E + ctx.alpha * std::cosh(t))) * 2 * y * u;
    };
    return 2 * integrate(f, 0.0, 1.0, tol);
}

double horizontal_action_cut(const WindowContext& ctx, Sigma, double tol)
{
    // Both horizontal loops reduce to the same segment because cos is even.
    const BranchPointSet bp = branch_points(ctx);
    const double mid = 0.5 * (bp.zeta_lo + bp.zeta_hi), half = 0.5 * (bp.zeta_hi - bp.zeta_lo);
    auto f = [&](double th) {
        const double z = mid - half * std::cos(th);
        return ctx.disp->k_real(ctx.E - ctx.alpha * std::cos(z)).imag() * half * std::sin(th);
    };
    return integrate(f, 0.0, pi, tol);
}

ActionSet compute_actions(const WindowContext& ctx, const ActionOptions& opt)
{
    ActionSet a;
    a.E = ctx.E;
    a.phi0 = phase_integral(ctx, Sigma::zero, opt);
    a.phi_pi = phase_integral(ctx, Sigma::pi, opt);
    a.sv0 = vertical_action(ctx, Sigma::zero, opt).value;
    a.sv_pi = vertical_action(ctx, Sigma::pi, opt).value;
    a.sh0 = horizontal_action(ctx, Sigma::zero, opt).value;
    a.sh_pi = horizontal_action(ctx, Sigma::pi, opt).value;
    a.sh = a.sh0 + a.sh_pi;

    const double h = opt.deriv_step * (1 + std::abs(ctx.E));
    auto at = [&](double e) { return make_window(ctx.disp, ctx.n, e, ctx.alpha); };
    const WindowContext up = at(ctx.E + h), dn = at(ctx.E - h);
    a.dphi0 = (phase_reduced(up, Sigma::zero, opt.quad_tol) - phase_reduced(dn, Sigma::zero, opt.quad_tol)) / (2 * h);
    a.dphi_pi = (phase_reduced(up, Sigma::pi, opt.quad_tol) - phase_reduced(dn, Sigma::pi, opt.quad_tol)) / (2 * h);
    return a;
}

ActionSet cut_actions(const WindowContext& ctx, double tol)
{
    ActionSet a;
    a.E = ctx.E;
    a.phi0 = phase_reduced(ctx, Sigma::zero, tol);
    a.phi_pi = phase_reduced(ctx, Sigma::pi, tol);
    a.sv0 = vertical_action_cut(ctx, Sigma::zero, tol);
    a.sv_pi = vertical_action_cut(ctx, Sigma::pi, tol);
    a.sh0 = a.sh_pi = horizontal_action_cut(ctx, Sigma::zero, tol);
    a.sh = a.sh0 + a.sh_pi;
    return a;
}

double TunnelCoefficients::tv0() const { return std::exp(log_tv0); }
double TunnelCoefficients::tv_pi() const { return std::exp(log_tv_pi); }
double TunnelCoefficients::th() const { return std::exp(log_th); }

TunnelCoefficients tunneling(const ActionSet& a, double epsilon)
{
    TunnelCoefficients t;
    t.epsilon = epsilon;
    t.log_tv0 = -a.sv0 / epsilon;
    t.log_tv_pi = -a.sv_pi / epsilon;
    t.log_th0 = -a.sh0 / epsilon;
    t.log_th_pi = -a.sh_pi / epsilon;
    t.log_th = t.log_th0 + t.log_th_pi;
    return t;
}

namespace {

ProfileRow profile_row(const std::shared_ptr<const Dispersion>& disp, int n, double alpha, double E,
                       const ProfileOptions& opt)
{
    ProfileRow row;
    row.actions.E = E;
    try {
        row.actions = compute_actions(make_window(disp, n, E, alpha), opt.actions);
        const auto& a = row.actions;
        row.ok = true;
        row.positive = a.phi0 > 0 && a.phi_pi > 0 && a.sv0 > 0 && a.sv_pi > 0 && a.sh0 > 0 && a.sh_pi > 0;
        row.parity = std::abs(a.sh0 - a.sh_pi) < opt.parity_tol;
        row.monotone = a.dphi0 < 0 && a.dphi_pi > 0;
    } catch (const Error& e) {
        row.error = e.what();
    }
    return row;
}

}  // namespace

std::vector<ProfileRow> action_profile(std::shared_ptr<const Dispersion> disp, int n, double alpha,
                                       const std::vector<double>& energies, const ProfileOptions& opt)
{
    std::vector<ProfileRow> rows(energies.size());
    parallel_for(int(energies.size()), [&](int i) {
        rows[sz(i)] = profile_row(disp, n, alpha, energies[sz(i)], opt);
    });
    return rows;
}

std::vector<ProfileRow> action_profile_serial(std::shared_ptr<const Dispersion> disp, int n,
                                              double alpha, const std::vector<double>& energies,
                                              const ProfileOptions& opt)
{
    std::vector<ProfileRow> rows(energies.size());
    serial_for(int(energies.size()), [&](int i) {
        rows[sz(i)] = profile_row(disp, n, alpha, energies[sz(i)], opt);
    });
    return rows;
}

std::string to_csv(const std::vector<ProfileRow>& rows)
{
    std::ostringstream os;
    os << std::setprecision(15) << "E,phi0,phi_pi,sv0,sv_pi,sh,dphi0,dphi_pi\n";
    for (const auto& r : rows) {
        if (!r.ok) continue;
        const auto& a = r.actions;
        os << a.E << ',' << a.phi0 << ',' << a.phi_pi << ',' << a.sv0 << ',' << a.sv_pi << ',' << a.sh
           << ',' << a.dphi0 << ',' << a.dphi_pi << '\n';
    }
    return os.str();
}

}  // namespace qpw
