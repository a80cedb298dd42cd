#include "rml/grid.hpp"

#include "rml/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rml {

double Grid::min_spacing() const {
    double m = spacing(0);
    for (int a = 1; a < n_; ++a) m = std::min(m, spacing(a));
    return m;
}

double Grid::min_period() const {
    double m = period(0);
    for (int a = 1; a < n_; ++a) m = std::min(m, period(a));
    return m;
}

double Grid::periodic_delta(int axis, double dx) const {
    const double L = period(axis);
    dx = std::fmod(dx, L);
    if (dx < -0.5 * L) dx += L;
    if (dx >= 0.5 * L) dx -= L;
    return dx;
}

double Grid::periodic_dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) const {
    double s = 0.0;
    for (int ax = 0; ax < n_; ++ax) {
        const double d = periodic_delta(ax, a[static_cast<std::size_t>(ax)] - b[static_cast<std::size_t>(ax)]);
        s += d * d;
    }
    return s;
}

double Grid::periodic_dist(const std::array<double, 3>& a, const std::array<double, 3>& b) const {
    return std::sqrt(periodic_dist2(a, b));
}

Grid build_grid(int n, std::span<const int> dims, std::span<const double> spacing) {
    if (n != 2 && n != 3)
        throw ConfigError("grid dimension must be 2 or 3, got " + std::to_string(n));
    if (static_cast<int>(dims.size()) != n || static_cast<int>(spacing.size()) != n)
        throw ConfigError("grid needs exactly one extent and spacing per axis");

    Grid g;
    g.n_ = n;
    for (int a = 0; a < n; ++a) {
        const int d = dims[static_cast<std::size_t>(a)];
        const double h = spacing[static_cast<std::size_t>(a)];
        if (d < 8)
            throw ConfigError("grid extent along axis " + std::to_string(a) + " must be >= 8, got " + std::to_string(d));
        if (!(h > 0.0) || !std::isfinite(h))
            throw ConfigError("grid spacing along axis " + std::to_string(a) + " must be positive and finite");
        g.dims_[static_cast<std::size_t>(a)] = d;
        g.spacing_[static_cast<std::size_t>(a)] = h;
    }
    g.ncells_ = 1;
    for (int a = 0; a < n; ++a) g.ncells_ *= static_cast<std::size_t>(g.dims_[static_cast<std::size_t>(a)]);
    std::size_t s = 1;
    for (int a = n - 1; a >= 0; --a) {
        g.strides_[static_cast<std::size_t>(a)] = s;
        s *= static_cast<std::size_t>(g.dims_[static_cast<std::size_t>(a)]);
    }
    g.cell_volume_ = 1.0;
    for (int a = 0; a < n; ++a) g.cell_volume_ *= g.spacing_[static_cast<std::size_t>(a)];
    return g;
}

} // namespace rml
