#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpw/actions.hpp"

namespace qpw {

enum class ActionRegime { none, sh_max, sh_min, sv0_sh_svpi, svpi_sh_sv0, tie };

const char* to_string(ActionRegime r);

struct PhaseDiagramCell {
    double alpha = 0, E = 0;
    bool in_delta = false;  // (BEI) for the gap, from the edge arithmetic alone
    bool ok = false;        // actions computed and (T) holds
    std::string error;
    ActionSet actions;
    ActionRegime regime = ActionRegime::none;
    // Signs of log τ and log ρ are ε-free: S_h - S_{v,0} - S_{v,π} and S_h/2 - min S_v.
    bool tau_large = false, tau_small = false, rho_large = false, rho_small = false;
    bool transition = false;        // S_h > max S_v
    bool transition_ratio = false;  // 1.5 min S_v > S_h
};

struct PhaseDiagramSpec {
    double alpha_lo = 0, alpha_hi = 0, E_lo = 0, E_hi = 0;
    int rows = 200, cols = 200;  // rows along E, columns along α
    int n = 1;
    double tol = 1e-10;
};

// Bounding box of Δ: E_{2n-1} + α < E < E_{2n} + α, E_{2n+1} - α < E < E_{2n+2} - α.
PhaseDiagramSpec delta_bounding_box(const BandStructure& b, int n, int rows, int cols);

bool in_delta(const BandStructure& b, int n, double alpha, double E);

std::vector<PhaseDiagramCell> phase_diagram(std::shared_ptr<const Dispersion> disp,
                                            const PhaseDiagramSpec& spec);
std::vector<PhaseDiagramCell> phase_diagram_serial(std::shared_ptr<const Dispersion> disp,
                                                   const PhaseDiagramSpec& spec);

struct PhaseDiagramSummary {
    int cells = 0, in_delta = 0, ok = 0;
    int transition_both = 0;  // S_h > max S_v and 1.5 min S_v > S_h together
    int alternation = 0;      // S_{v,0} < S_h < S_{v,π} or the mirror
    int tau_large = 0, tau_small = 0, rho_large = 0, rho_small = 0;
    int regime[6] = {0, 0, 0, 0, 0, 0};
};

PhaseDiagramSummary summarize(const std::vector<PhaseDiagramCell>& cells);

std::string to_csv(const std::vector<PhaseDiagramCell>& cells);
std::vector<PhaseDiagramCell> phase_diagram_from_csv(const std::string& csv);

}  // namespace qpw
