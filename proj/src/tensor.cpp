#include "rml/tensor.hpp"

#include "rml/errors.hpp"
#include "rml/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rml {

TensorField::TensorField(const Grid& grid, std::vector<Slot> slots)
    : grid_(grid), slots_(std::move(slots)) {
    ncomp_ = 1;
    for (std::size_t r = 0; r < slots_.size(); ++r) ncomp_ *= grid_.dim();
    data_.assign(static_cast<std::size_t>(ncomp_) * grid_.ncells(), 0.0);
}

int TensorField::comp_index(std::span<const int> idx) const {
    int c = 0;
    for (std::size_t r = 0; r < idx.size(); ++r) c = c * grid_.dim() + idx[r];
    return c;
}

bool TensorField::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void TensorField::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::vector<Slot> lower_slots(int rank) {
    return std::vector<Slot>(static_cast<std::size_t>(rank), Slot::Lower);
}

MetricField MetricField::identity(const Grid& grid) {
    MetricField g(grid);
    for (int i = 0; i < grid.dim(); ++i) std::fill_n(g.comp(i, i), grid.ncells(), 1.0);
    return g;
}

void MetricField::symmetrize() {
    const int n = dim();
    const std::size_t N = grid().ncells();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double* a = comp(i, j);
            double* b = comp(j, i);
            kernels::active().axpby(a, 0.5, a, 0.5, b, N);
            std::copy_n(a, N, b);
        }
}

double MetricField::max_asymmetry() const {
    const int n = dim();
    const std::size_t N = grid().ncells();
    double m = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double* a = comp(i, j);
            const double* b = comp(j, i);
            for (std::size_t c = 0; c < N; ++c) m = std::max(m, std::fabs(a[c] - b[c]));
        }
    return m;
}

TensorField MetricField::inverse(double pivot_tol) const {
    const int n = dim();
    const std::size_t N = grid().ncells();
    TensorField inv(grid(), std::vector<Slot>(static_cast<std::size_t>(2), Slot::Upper));
    double m[9], mi[9];
    for (std::size_t c = 0; c < N; ++c) {
        cellops::load(t_, c, n, m);
        cellops::invert_spd(m, n, mi, pivot_tol);
        for (int k = 0; k < n * n; ++k) inv.at(k, c) = mi[k];
    }
    return inv;
}

TensorField MetricField::sqrt_det() const {
    const int n = dim();
    const std::size_t N = grid().ncells();
    TensorField out = TensorField::scalar(grid());
    double m[9];
    for (std::size_t c = 0; c < N; ++c) {
        cellops::load(t_, c, n, m);
        double det;
        if (n == 2) {
            det = m[0] * m[3] - m[1] * m[2];
        } else {
            det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                  m[2] * (m[3] * m[7] - m[4] * m[6]);
        }
        if (!(det > 0.0))
            throw DegenerateMetricError("metric determinant non-positive at cell " +
                                        std::to_string(c));
        out.at(0, c) = std::sqrt(det);
    }
    return out;
}

namespace cellops {

void load(const TensorField& f, std::size_t cell, int n, double* m) {
    for (int k = 0; k < n * n; ++k) m[k] = f.at(k, cell);
}

void store(TensorField& f, std::size_t cell, int n, const double* m) {
    for (int k = 0; k < n * n; ++k) f.at(k, cell) = m[k];
}

double invert_spd(const double* m, int n, double* out, double rel_tol) {
    double scale = 0.0;
    for (int k = 0; k < n * n; ++k) scale = std::max(scale, std::fabs(m[k]));
    if (scale == 0.0) throw DegenerateMetricError("zero metric");
    if (n == 2) {
        const double det = m[0] * m[3] - m[1] * m[2];
        if (!(det > rel_tol * scale * scale))
            throw DegenerateMetricError("degenerate 2x2 metric (det below pivot tolerance)");
        const double inv = 1.0 / det;
        out[0] = m[3] * inv;
        out[1] = -m[1] * inv;
        out[2] = -m[2] * inv;
        out[3] = m[0] * inv;
        return det;
    }
    const double c00 = m[4] * m[8] - m[5] * m[7];
    const double c01 = m[5] * m[6] - m[3] * m[8];
    const double c02 = m[3] * m[7] - m[4] * m[6];
    const double det = m[0] * c00 + m[1] * c01 + m[2] * c02;
    if (!(det > rel_tol * scale * scale * scale))
        throw DegenerateMetricError("degenerate 3x3 metric (det below pivot tolerance)");
    const double inv = 1.0 / det;
    out[0] = c00 * inv;
    out[1] = (m[2] * m[7] - m[1] * m[8]) * inv;
    out[2] = (m[1] * m[5] - m[2] * m[4]) * inv;
    out[3] = c01 * inv;
    out[4] = (m[0] * m[8] - m[2] * m[6]) * inv;
    out[5] = (m[2] * m[3] - m[0] * m[5]) * inv;
    out[6] = c02 * inv;
    out[7] = (m[1] * m[6] - m[0] * m[7]) * inv;
    out[8] = (m[0] * m[4] - m[1] * m[3]) * inv;
    return det;
}

void sym_eigenvalues(const double* m, int n, double* ev) {
    if (n == 2) {
        const double tr = m[0] + m[3];
        const double det = m[0] * m[3] - m[1] * m[2];
        const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        ev[0] = 0.5 * tr - disc;
        ev[1] = 0.5 * tr + disc;
        return;
    }
    // Symmetric 3x3 eigenvalues, trigonometric closed form.
    const double a = m[0], b = m[4], c = m[8];
    const double d = m[1], e = m[5], f = m[2];
    const double p1 = d * d + e * e + f * f;
    if (p1 == 0.0) {
        ev[0] = std::min({a, b, c});
        ev[2] = std::max({a, b, c});
        ev[1] = a + b + c - ev[0] - ev[2];
        return;
    }
    const double q = (a + b + c) / 3.0;
    const double p2 = (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    // B = (A - q I) / p, r = det(B)/2 clamped to [-1,1]
    const double b00 = (a - q) / p, b11 = (b - q) / p, b22 = (c - q) / p;
    const double b01 = d / p, b12 = e / p, b02 = f / p;
    double r = 0.5 * (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                      b02 * (b01 * b12 - b11 * b02));
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double two_pi_3 = 2.0943951023931953;
    ev[2] = q + 2.0 * p * std::cos(phi);
    ev[0] = q + 2.0 * p * std::cos(phi + two_pi_3);
    ev[1] = 3.0 * q - ev[0] - ev[2];
}

void relative_eigen_range(const double* g, const double* h, int n, double& lo, double& hi) {
    bool h_is_id = true;
    for (int i = 0; i < n && h_is_id; ++i)
        for (int j = 0; j < n; ++j)
            if (h[i * n + j] != (i == j ? 1.0 : 0.0)) {
                h_is_id = false;
                break;
            }
    double ev[3];
    if (h_is_id) {
        sym_eigenvalues(g, n, ev);
        lo = ev[0];
        hi = ev[n - 1];
        return;
    }
    // Cholesky h = L L^T, then eigenvalues of L^{-1} g L^{-T}.
    double L[9] = {0};
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = h[i * n + j];
            for (int k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            if (i == j) {
                if (!(s > 0.0)) throw DegenerateMetricError("background metric not SPD");
                L[i * n + i] = std::sqrt(s);
            } else {
                L[i * n + j] = s / L[j * n + j];
            }
        }
    }
    // W = L^{-1} g: solve L W = g column-wise, then M = W L^{-T}: solve M L^T = W.
    double W[9], M[9];
    for (int col = 0; col < n; ++col) {
        for (int i = 0; i < n; ++i) {
            double s = g[i * n + col];
            for (int k = 0; k < i; ++k) s -= L[i * n + k] * W[k * n + col];
            W[i * n + col] = s / L[i * n + i];
        }
    }
    for (int row = 0; row < n; ++row) {
        for (int j = 0; j < n; ++j) {
            double s = W[row * n + j];
            for (int k = 0; k < j; ++k) s -= M[row * n + k] * L[j * n + k];
            M[row * n + j] = s / L[j * n + j];
        }
    }
    // Symmetrize against roundoff before the closed-form eigenvalues.
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double s = 0.5 * (M[i * n + j] + M[j * n + i]);
            M[i * n + j] = M[j * n + i] = s;
        }
    sym_eigenvalues(M, n, ev);
    lo = ev[0];
    hi = ev[n - 1];
}

} // namespace cellops

} // namespace rml
