#pragma once

#include "rml/grid.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rml {

enum class Slot : std::uint8_t { Lower, Upper };

// Grid-sampled tensor field. Components are stored plane-major: all cells of
// component 0, then component 1, ... Within a cell, tensor indices are
// row-major with slot 0 slowest, matching the snapshot format. Rank-0 fields
// double as scalar fields.
class TensorField {
public:
    TensorField() = default;
    TensorField(const Grid& grid, std::vector<Slot> slots);

    static TensorField scalar(const Grid& grid) { return TensorField(grid, {}); }

    const Grid& grid() const { return grid_; }
    int rank() const { return static_cast<int>(slots_.size()); }
    const std::vector<Slot>& slots() const { return slots_; }
    int ncomp() const { return ncomp_; }

    double* comp(int c) { return data_.data() + static_cast<std::size_t>(c) * grid_.ncells(); }
    const double* comp(int c) const {
        return data_.data() + static_cast<std::size_t>(c) * grid_.ncells();
    }
    std::span<double> comp_span(int c) { return {comp(c), grid_.ncells()}; }
    std::span<const double> comp_span(int c) const { return {comp(c), grid_.ncells()}; }

    double& at(int c, std::size_t cell) { return comp(c)[cell]; }
    double at(int c, std::size_t cell) const { return comp(c)[cell]; }

    std::span<double> raw() { return data_; }
    std::span<const double> raw() const { return data_; }

    // Row-major component index for up to rank 6.
    int comp_index(std::span<const int> idx) const;

    bool all_finite() const;
    void fill(double v);

private:
    Grid grid_;
    std::vector<Slot> slots_;
    int ncomp_ = 1;
    std::vector<double> data_;
};

std::vector<Slot> lower_slots(int rank);

// Symmetric positive-definite covariant 2-tensor field; full n^2 components
// kept per cell with g_ij == g_ji maintained exactly.
class MetricField {
public:
    MetricField() = default;
    explicit MetricField(const Grid& grid) : t_(grid, lower_slots(2)) {}

    static MetricField identity(const Grid& grid);

    const Grid& grid() const { return t_.grid(); }
    TensorField& tensor() { return t_; }
    const TensorField& tensor() const { return t_; }

    int dim() const { return t_.grid().dim(); }
    double* comp(int i, int j) { return t_.comp(i * dim() + j); }
    const double* comp(int i, int j) const { return t_.comp(i * dim() + j); }
    double at(int i, int j, std::size_t cell) const { return t_.at(i * dim() + j, cell); }
    double& at(int i, int j, std::size_t cell) { return t_.at(i * dim() + j, cell); }

    void symmetrize();
    double max_asymmetry() const;
    bool all_finite() const { return t_.all_finite(); }

    // Inverse metric as a field of Upper,Upper components. Throws
    // DegenerateMetricError when a per-cell factorization pivot falls below
    // pivot_tol relative to the cell's diagonal scale.
    TensorField inverse(double pivot_tol = 1e-12) const;

    // sqrt(det g) per cell.
    TensorField sqrt_det() const;

private:
    TensorField t_;
};

// Per-cell dense symmetric ops used by the pointwise contraction loops.
namespace cellops {

// Load n x n matrix from a rank-2 field at one cell (row-major m[i*n+j]).
void load(const TensorField& f, std::size_t cell, int n, double* m);
void store(TensorField& f, std::size_t cell, int n, const double* m);

// SPD inverse via adjugate with a pivot/determinant guard. Returns det.
// Throws DegenerateMetricError if |det| (or a pivot) is below tol relative
// to the matrix scale.
double invert_spd(const double* m, int n, double* out, double rel_tol);

// Eigenvalues of a symmetric matrix, ascending. n = 2 or 3, closed form.
void sym_eigenvalues(const double* m, int n, double* ev);

// Generalized eigenvalue range of g relative to h (eigenvalues of
// h^{-1/2} g h^{-1/2}); for h = identity this is the plain spectrum.
void relative_eigen_range(const double* g, const double* h, int n, double& lo, double& hi);

} // namespace cellops

} // namespace rml
