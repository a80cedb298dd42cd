#pragma once

#include "rml/background.hpp"
#include "rml/tensor.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace rml {

enum class InitialKind : std::uint8_t {
    Flat,
    ConformalBump,
    HoelderCone,
    ConeAngle,
    MorreyFamily,
    RandomW1p,
};

// Construction recipe for a rough initial metric. `exponent` is the Hoelder
// power delta/p of the metric profile, so the gradient blows up like
// rho^(exponent - 1) toward each centre. `amplitude` may be negative
// (concave-profile cones have non-negative curvature near the apex).
struct InitialDataSpec {
    InitialKind kind = InitialKind::Flat;
    std::vector<std::array<double, 3>> centers;
    double amplitude = 0.0;
    double exponent = 0.5;     // delta/p
    double lambda_cap = 4.0;   // Lambda_0
    double beta = 0.8;         // cone angle factor (ConeAngle only)
    double core_radius = 0.5;  // exact-profile radius of cones
    double outer_radius = 1.0; // profile blends to flat by here
    std::uint64_t seed = 0;
};

// Geometry the singular set was built from, used for exact distance fields.
struct MaskGeometry {
    enum class Kind : std::uint8_t { Empty, Points, Segment, Circle } kind = Kind::Empty;
    std::vector<std::array<double, 3>> points;
    std::array<double, 3> seg_a{}, seg_b{};
    std::array<double, 3> circle_center{};
    double circle_radius = 0.0;
    int circle_axis = 2; // circle lies in the plane orthogonal to this axis
};

struct SingularSetMask {
    Grid grid;
    std::vector<std::uint8_t> cells;
    MaskGeometry geometry;

    bool empty() const;
    std::size_t count() const;
    // Periodic distance from each node to the mask geometry (or to the
    // marked cells when no descriptor is present).
    TensorField distance_field() const;
};

SingularSetMask point_mask(const Grid& grid, const std::array<double, 3>& p);
SingularSetMask segment_mask(const Grid& grid, const std::array<double, 3>& a,
                             const std::array<double, 3>& b);
SingularSetMask circle_mask(const Grid& grid, const std::array<double, 3>& center, double radius,
                            int axis);

std::pair<MetricField, SingularSetMask> make_initial_metric(const InitialDataSpec& spec,
                                                            const Grid& grid);

// Extreme relative eigenvalues of g against the background over all cells.
std::pair<double, double> bilipschitz_constants(const MetricField& g,
                                                const BackgroundGeometry& bg);

inline double bilipschitz_lambda(const std::pair<double, double>& range) {
    return std::max(1.0 / range.first, range.second);
}

struct MollifierConfig {
    int index = 2;             // kernel radius 1/index
    double chart_radius = 0.4; // near-mask chart: phi1 = 1 inside chart_radius - overlap
    double overlap = 0.2;      // partition ramp width
};

// Two-chart partition-of-unity mollification: eta_(1/i) * g0 on the chart
// around the mask, g0 far away, blended over the overlap ramp. The discrete
// kernel sums to one exactly, so constants pass through bit for bit.
MetricField mollify(const MetricField& g0, const SingularSetMask& mask,
                    const MollifierConfig& cfg);

} // namespace rml
