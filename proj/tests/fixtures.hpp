#pragma once

#include <algorithm>
#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "qpw/finite_gap.hpp"
#include "qpw/potential.hpp"

namespace fx {

inline qpw::FiniteGapSpec two_gap()
{
    qpw::FiniteGapSpec s;
    s.edges = {0.0, 3.8571429, 6.8571429, 12.100395, 100.70923};
    s.dirichlet_phases = {0.3, 1.1};
    return s;
}

inline std::shared_ptr<const qpw::FiniteGapDispersion> two_gap_dispersion()
{
    static auto d = std::make_shared<const qpw::FiniteGapDispersion>(two_gap());
    return d;
}

inline qpw::PeriodicPotential cosine() { return qpw::PeriodicPotential::fourier({0.0, 2.0}); }
inline qpw::PeriodicPotential asymmetric()
{
    return qpw::PeriodicPotential::fourier({0.0, 2.0, 0.0}, {0.0, 0.0, 0.8});
}

// Band edges from the truncated Hill matrix in the plane waves e^{i(2πm + θ)x},
// θ = 0 (periodic) and π (antiperiodic); independent of the ODE code.
inline std::vector<double> hill_matrix_edges(const qpw::PeriodicPotential& v, int count, int modes = 60)
{
    using cd = std::complex<double>;
    const auto& a = v.cos_coeffs();
    const auto& b = v.sin_coeffs();
    auto vk = [&](int k) -> cd {  // Fourier coefficient of e^{2πikx}
        const int m = std::abs(k);
        if (m == 0) return a.empty() ? 0.0 : a[0];
        const double am = m < int(a.size()) ? a[std::size_t(m)] : 0.0;
        const double bm = m < int(b.size()) ? b[std::size_t(m)] : 0.0;
        return k > 0 ? cd(am / 2, -bm / 2) : cd(am / 2, bm / 2);
    };
    std::vector<double> ev;
    for (double theta : {0.0, qpw::pi}) {
        const int N = 2 * modes + 1;
        Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(N, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                const int mi = i - modes, mj = j - modes;
                H(i, j) = vk(mi - mj);
                if (i == j) H(i, j) += std::pow(qpw::two_pi * mi + theta, 2);
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
        for (int i = 0; i < N; ++i) ev.push_back(es.eigenvalues()(i));
    }
    std::sort(ev.begin(), ev.end());
    ev.resize(std::size_t(count));
    return ev;
}

// Δ(E) by classical RK4 on a fine grid.
inline double rk4_discriminant(const qpw::PeriodicPotential& v, double E, int steps = 20000)
{
    auto run = [&](double y, double dy) {
        const double h = 1.0 / steps;
        auto f = [&](double x, double u, double du, double& fu, double& fdu) {
            fu = du;
            fdu = (v(x) - E) * u;
        };
        for (int i = 0; i < steps; ++i) {
            const double x = i * h;
            double k1, l1, k2, l2, k3, l3, k4, l4;
            f(x, y, dy, k1, l1);
            f(x + h / 2, y + h / 2 * k1, dy + h / 2 * l1, k2, l2);
            f(x + h / 2, y + h / 2 * k2, dy + h / 2 * l2, k3, l3);
            f(x + h, y + h * k3, dy + h * l3, k4, l4);
            y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            dy += h / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
        }
        return std::pair{y, dy};
    };
    return run(1, 0).first + run(0, 1).second;
}

}  // namespace fx
