#pragma once

#include "rml/background.hpp"
#include "rml/fields.hpp"
#include "rml/flow.hpp"

#include <span>
#include <vector>

namespace rml {

// Fitted Morrey data: sup-over-centres ball averages of |nabla~ g|^p fitted
// against L0 * r^(-p+delta). The discrete sup (centre subsample, dyadic
// radius window) under-approximates the continuum one; reports say so.
struct MorreyReport {
    double p = 2.0;
    double delta_fit = 0.0;
    double L0_fit = 0.0;
    double r0 = 0.0;
    std::vector<double> radii;
    std::vector<double> sup_averages;
    bool zero_floor = false; // |nabla~ g| vanished identically
    int center_stride = 2;
};

inline constexpr double kMorreyZeroFloor = 1e-30;

MorreyReport morrey_functional(const MetricField& g, const BackgroundGeometry& bg, double p,
                               std::span<const double> radii, int center_stride = 2);

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0; // log-space
    double r2 = 0.0;
    std::size_t samples = 0;
};

// Least squares of log(value) against log(t) inside [t_lo, t_hi].
FitResult fit_decay_exponent(std::span<const double> t, std::span<const double> value, double t_lo,
                             double t_hi);

struct CodimReport {
    std::vector<double> epsilons;
    std::vector<double> volumes;
    double d0 = 0.0; // fitted codimension
    double b = 0.0;  // largest validated tube radius
    double C = 0.0;  // max over validated eps of volume / eps^d0
};

CodimReport tube_volume_codimension(const SingularSetMask& mask, const Grid& grid,
                                    std::span<const double> epsilons);

struct ConvergenceRow {
    double t = 0.0;
    double c0_global = 0.0;
    double c0_masked = 0.0;
    double c1_masked = 0.0;
    double c2_masked = 0.0;
};

// Per-snapshot distances of g(t) to g0: global C0, and C0/C1/C2 on the
// complement of the margin-dilated mask.
std::vector<ConvergenceRow> convergence_meter(const FlowTrajectory& traj, const MetricField& g0,
                                              const SingularSetMask& exclusion, double margin,
                                              const BackgroundGeometry& bg);

} // namespace rml
