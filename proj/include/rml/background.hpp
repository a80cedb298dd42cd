#pragma once

#include "rml/tensor.hpp"

#include <vector>

namespace rml {

// Fixed reference geometry h supplying the connection and curvature entering
// every estimate. The default is the flat torus (all derived fields zero);
// a curved h is supported structurally and exercised by fixtures.
struct BackgroundGeometry {
    MetricField metric;      // h_ij
    TensorField inv_metric;  // h^ij
    TensorField christoffel; // Gamma~^k_ij
    TensorField riemann;     // R~_ijkl, fully covariant
    TensorField ricci;       // R~ic_ij
    TensorField vol_density; // sqrt(det h)
    std::vector<double> curvature_bounds; // k_i = sup |nabla~^i Rm(h)|, i = 0,1,2
    bool flat = true;

    const Grid& grid() const { return metric.grid(); }

    static BackgroundGeometry flat_torus(const Grid& grid);
    static BackgroundGeometry from_metric(const MetricField& h);
};

} // namespace rml
