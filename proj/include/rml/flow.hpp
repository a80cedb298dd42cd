#pragma once

#include "rml/background.hpp"
#include "rml/tensor.hpp"

#include <string>
#include <vector>

namespace rml {

struct FlowConfig {
    double t_end = 0.1;
    double cfl = 0.4;     // in (0,1)
    double dt_min = 1e-9;
    double dt_max = 1e-2;
    std::vector<double> snapshot_times;   // within [0, t_end]
    double early_time_refinement = 0.5;   // graded steps: dt ~ t^gamma near t = 0
    int diag_order = 4;                   // sup |nabla~^k g| recorded for k = 1..diag_order
};

struct FlowDiagnostics {
    double t = 0.0;
    double dt = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double sup_d[4] = {0, 0, 0, 0};
    double hess_sq_l2 = 0.0; // integral of |nabla~^2 g|^2 d(mu_h)
};

struct FlowTrajectory {
    Grid grid;
    std::vector<double> times;       // snapshot stamps, strictly increasing
    std::vector<MetricField> states; // metric at each stamp
    std::vector<FlowDiagnostics> steps;
    bool aborted = false;
    std::string abort_reason;

    std::size_t snapshot_count() const { return times.size(); }
};

// X^k = g^{ij} (Gamma~^k_ij - Gamma^k_ij); on a flat background -g^{ij} Gamma^k_ij.
TensorField deturck_vector(const MetricField& g, const BackgroundGeometry& bg);

// Full local-coordinate right-hand side of the h-flow, symmetrized in (i,j).
TensorField rdf_rhs(const MetricField& g, const BackgroundGeometry& bg);

// One Heun (RK2) step; throws StabilityError if positivity breaks.
MetricField step(const MetricField& g, double dt, const BackgroundGeometry& bg);

FlowTrajectory evolve(const MetricField& g0, const FlowConfig& cfg, const BackgroundGeometry& bg);

struct GaugeMap {
    double time = 0.0;
    TensorField displacement; // chi_t(y) - y, one Upper slot
};

struct PullbackReport {
    std::vector<double> times;              // interior snapshot stamps
    std::vector<double> residuals;          // sup |d/dt (chi* g) + 2 Ric(chi* g)|
    std::vector<double> unpulled_residuals; // same without the gauge map
    double max_displacement = 0.0;
};

std::pair<std::vector<GaugeMap>, PullbackReport>
pullback_to_ricci_flow(const FlowTrajectory& traj, const BackgroundGeometry& bg);

// Periodic tensor-product Catmull-Rom sampling of one component plane.
double cubic_sample(const Grid& grid, const double* plane, const std::array<double, 3>& x);

} // namespace rml
