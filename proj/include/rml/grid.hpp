#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace rml {

// Uniform periodic grid on a flat torus T^n, n = 2 or 3. Nodes sit at
// x_a = i_a * spacing[a]; every field in the library samples at nodes and
// treats a node as the midpoint of its cell for quadrature. Cell indices
// are row-major with axis 0 slowest.
class Grid {
public:
    Grid() = default;

    int dim() const { return n_; }
    int extent(int axis) const { return dims_[static_cast<std::size_t>(axis)]; }
    double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
    double period(int axis) const { return spacing(axis) * extent(axis); }
    double min_spacing() const;
    double min_period() const;
    std::size_t ncells() const { return ncells_; }
    double cell_volume() const { return cell_volume_; }

    std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }

    int wrap(int axis, int i) const {
        const int d = extent(axis);
        i %= d;
        return i < 0 ? i + d : i;
    }

    std::size_t flatten(const std::array<int, 3>& idx) const {
        std::size_t c = 0;
        for (int a = 0; a < n_; ++a) c = c * static_cast<std::size_t>(dims_[static_cast<std::size_t>(a)]) + static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
        return c;
    }

    std::array<int, 3> unflatten(std::size_t c) const {
        std::array<int, 3> idx{0, 0, 0};
        for (int a = n_ - 1; a >= 0; --a) {
            const auto d = static_cast<std::size_t>(dims_[static_cast<std::size_t>(a)]);
            idx[static_cast<std::size_t>(a)] = static_cast<int>(c % d);
            c /= d;
        }
        return idx;
    }

    std::size_t shift(std::size_t cell, int axis, int by) const {
        auto idx = unflatten(cell);
        idx[static_cast<std::size_t>(axis)] = wrap(axis, idx[static_cast<std::size_t>(axis)] + by);
        return flatten(idx);
    }

    double coord(int axis, int idx) const { return spacing(axis) * idx; }

    std::array<double, 3> node(std::size_t cell) const {
        const auto idx = unflatten(cell);
        std::array<double, 3> x{0, 0, 0};
        for (int a = 0; a < n_; ++a) x[static_cast<std::size_t>(a)] = coord(a, idx[static_cast<std::size_t>(a)]);
        return x;
    }

    // Signed difference wrapped to [-L/2, L/2).
    double periodic_delta(int axis, double dx) const;
    double periodic_dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) const;
    double periodic_dist(const std::array<double, 3>& a, const std::array<double, 3>& b) const;

    friend Grid build_grid(int n, std::span<const int> dims, std::span<const double> spacing);
    bool operator==(const Grid& other) const = default;

private:
    int n_ = 0;
    std::array<int, 3> dims_{0, 0, 0};
    std::array<double, 3> spacing_{0.0, 0.0, 0.0};
    std::array<std::size_t, 3> strides_{0, 0, 0};
    std::size_t ncells_ = 0;
    double cell_volume_ = 0.0;
};

// Validates n in {2,3}, dims >= 8, spacing > 0.
Grid build_grid(int n, std::span<const int> dims, std::span<const double> spacing);

} // namespace rml
