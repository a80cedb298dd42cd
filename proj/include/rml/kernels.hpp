#pragma once

#include <cstddef>
#include <string_view>

namespace rml::kernels {

// Data-parallel inner loops shared by the stencil, time-stepping and
// reduction code. Every entry has a scalar reference implementation and,
// on x86 with AVX2, a vectorized variant selected at runtime. The two are
// bit-identical by construction: elementwise ops perform the same IEEE
// operations per element, and the sum reductions use a fixed 4-lane
// accumulation scheme in both paths (compile with -ffp-contract=off).
struct Table {
    const char* name;

    void (*scale)(double* out, const double* x, double a, std::size_t n);          // out = a*x
    void (*axpby)(double* out, double a, const double* x, double b, const double* y,
                  std::size_t n);                                                  // out = a*x + b*y
    void (*mul)(double* out, const double* x, const double* y, std::size_t n);     // out = x*y
    void (*mul_acc)(double* acc, const double* x, const double* y, std::size_t n); // acc += x*y
    void (*accum_sq)(double* acc, const double* x, std::size_t n);                 // acc += x*x
    void (*diff_scaled)(double* out, const double* xp, const double* xm, double c,
                        std::size_t n);                                            // out = c*(xp - xm)
    void (*second_diff)(double* out, const double* xp, const double* x0, const double* xm,
                        double c, std::size_t n);                                  // out = c*(xp - 2*x0 + xm)

    double (*sum)(const double* x, std::size_t n);      // deterministic 4-lane sum
    double (*sum_sq)(const double* x, std::size_t n);   // deterministic 4-lane sum of squares
    double (*max_abs)(const double* x, std::size_t n);
    double (*max_val)(const double* x, std::size_t n);
    double (*min_val)(const double* x, std::size_t n);
};

const Table& scalar_table();

bool avx2_available();
const Table* avx2_table(); // nullptr when not compiled in / not supported

// Active table. Selected on first use: RML_KERNEL_IMPL=scalar|avx2|auto
// (default auto: AVX2 when the CPU has it).
const Table& active();

// Force a specific implementation; throws ConfigError for unknown names
// or when avx2 is requested but unavailable.
void select(std::string_view name);

} // namespace rml::kernels
