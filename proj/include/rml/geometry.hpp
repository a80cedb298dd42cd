#pragma once

#include "rml/background.hpp"
#include "rml/tensor.hpp"

namespace rml {

// Periodic central-difference sweeps along one axis (2nd order).
// out = c * (shift(in,+1) - shift(in,-1)), etc. out must not alias in.
void periodic_diff(const Grid& g, int axis, const double* in, double* out, double c);
void periodic_second(const Grid& g, int axis, const double* in, double* out, double c);

// Plain coordinate partial derivatives; the derivative index is prepended
// as the slowest (first) slot.
TensorField partial_derivative(const TensorField& T);

// Compact second partials: comp (p,q,I) = d_p d_q T_I, with the one-axis
// stencil for p == q and the 4-point cross stencil for p != q.
TensorField second_partials(const TensorField& T);

// k-fold covariant derivative with respect to the background connection.
// On the flat default this is the k-fold central difference.
TensorField covariant_derivative(const TensorField& T, const BackgroundGeometry& bg, int order = 1);

// Coordinate Christoffel symbols of g: slots (Upper, Lower, Lower).
TensorField christoffels(const MetricField& g);

struct Curvature {
    TensorField riemann; // R_ijkl fully covariant
    TensorField ricci;   // Ric_ij
    TensorField scalar;  // R
};

Curvature curvature_tensors(const MetricField& g);

// Pointwise |T|_h: full contraction with h / h^{-1} on each slot.
TensorField tensor_norm_h(const TensorField& T, const BackgroundGeometry& bg);

double sup_norm(const TensorField& scalar_field);

// Integral of a scalar field against d(mu_h) (cell-midpoint quadrature,
// deterministic accumulation).
double integrate_h(const TensorField& scalar_field, const BackgroundGeometry& bg);

} // namespace rml
