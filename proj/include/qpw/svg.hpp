#pragma once

#include <string>
#include <vector>

#include "qpw/phase_diagram.hpp"
#include "qpw/wkb.hpp"

namespace qpw {

enum class DiagramLayer { actions, tau_rho };

// Heat map with one <rect> per cell; every CSV column is repeated as a data-*
// attribute so the file can be read back.  Δ boundary lines are drawn when
// `bands` is given.
std::string phase_diagram_svg(const std::vector<PhaseDiagramCell>& cells, const PhaseDiagramSpec& spec,
                              DiagramLayer layer, const BandStructure* bands = nullptr);
std::vector<PhaseDiagramCell> phase_diagram_from_svg(const std::string& svg);

// Energy strip: predicted intervals coloured by nature, resonant ones outlined.
std::string strip_svg(const SpectralReport& r);

}  // namespace qpw
