#pragma once

#include <vector>

#include <json.hpp>

#include "qpw/oracle.hpp"
#include "qpw/wkb.hpp"

namespace qpw {

struct CompareOptions {
    long L = 0;          // half-length of [-L, L]; 0 picks ⌈20π/ε⌉ so that 2L >= 40π/ε
    int coarse = 400;    // uniform tier of the scan grid
    double widen = 3.0;  // predicted coarse intervals are widened to ±widen·halfwidth
    int steps_per_cell = 128;
    int theta_samples = 3;  // intervals that get a ζ-averaged Lyapunov run (0 = none)
    double zeta = 0.0;      // ζ of the IDS scan
};

// Overlapping widened intervals are merged; a group's predicted weight is the
// sum of its members' dos weights.
struct GroupCheck {
    double lo = 0, hi = 0;
    int members = 0;
    bool resonant = false;
    double predicted = 0;  // Σ dos_weight
    long states = 0;
    double increment = 0;  // states / 2L
    double ratio = 0;      // increment / predicted
};

struct ThetaCheck {
    double E = 0;
    double predicted = 0;
    AveragedLyapunov oracle;
};

struct Comparison {
    long L = 0;
    Containment containment;
    std::vector<GroupCheck> groups;
    std::vector<ThetaCheck> theta;
    SpectrumScan scan;
};

std::vector<std::pair<double, double>> widened_groups(const SpectralReport& r, double widen);

Comparison compare_report(const SpectralReport& r, const PeriodicPotential& v, const CompareOptions& opt = {});

nlohmann::json to_json(const Comparison& c);

}  // namespace qpw
