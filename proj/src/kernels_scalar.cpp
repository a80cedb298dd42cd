#include "rml/kernels.hpp"

#include <cmath>

namespace rml::kernels {
namespace {

void k_scale(double* out, const double* x, double a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i];
}

void k_axpby(double* out, double a, const double* x, double b, const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void k_mul(double* out, const double* x, const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

void k_mul_acc(double* acc, const double* x, const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + x[i] * y[i];
}

void k_accum_sq(double* acc, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + x[i] * x[i];
}

void k_diff_scaled(double* out, const double* xp, const double* xm, double c, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = c * (xp[i] - xm[i]);
}

void k_second_diff(double* out, const double* xp, const double* x0, const double* xm, double c,
                   std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = c * (xp[i] - 2.0 * x0[i] + xm[i]);
}

// 4-lane accumulation; lane j sums x[i] with i % 4 == j, combined as
// (l0+l2) + (l1+l3). The AVX2 path reproduces this exactly.
double k_sum(const double* x, std::size_t n) {
    double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
    const std::size_t m = n & ~static_cast<std::size_t>(3);
    std::size_t i = 0;
    for (; i < m; i += 4) {
        l0 += x[i];
        l1 += x[i + 1];
        l2 += x[i + 2];
        l3 += x[i + 3];
    }
    double r = (l0 + l2) + (l1 + l3);
    for (; i < n; ++i) r += x[i];
    return r;
}

double k_sum_sq(const double* x, std::size_t n) {
    double l0 = 0.0, l1 = 0.0, l2 = 0.0, l3 = 0.0;
    const std::size_t m = n & ~static_cast<std::size_t>(3);
    std::size_t i = 0;
    for (; i < m; i += 4) {
        l0 += x[i] * x[i];
        l1 += x[i + 1] * x[i + 1];
        l2 += x[i + 2] * x[i + 2];
        l3 += x[i + 3] * x[i + 3];
    }
    double r = (l0 + l2) + (l1 + l3);
    for (; i < n; ++i) r += x[i] * x[i];
    return r;
}

double k_max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

double k_max_val(const double* x, std::size_t n) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = std::max(m, x[i]);
    return m;
}

double k_min_val(const double* x, std::size_t n) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i) m = std::min(m, x[i]);
    return m;
}

const Table table = {
    "scalar",    k_scale,   k_axpby,  k_mul,     k_mul_acc, k_accum_sq, k_diff_scaled,
    k_second_diff, k_sum,   k_sum_sq, k_max_abs, k_max_val, k_min_val,
};

} // namespace

const Table& scalar_table() { return table; }

} // namespace rml::kernels
