#include "rml/geometry.hpp"

#include "rml/errors.hpp"
#include "rml/kernels.hpp"

#include <cmath>
#include <cstring>
#include <vector>

namespace rml {

namespace {

// Iterate the grid as contiguous runs whose axis-a index is constant and
// whose +/- neighbours along a are contiguous runs too.
template <typename F>
void for_each_slab(const Grid& g, int axis, F&& f) {
    const std::size_t s = g.stride(axis);
    const int d = g.extent(axis);
    if (s == 1) {
        // fastest axis: rows of length d
        const std::size_t nrows = g.ncells() / static_cast<std::size_t>(d);
        for (std::size_t r = 0; r < nrows; ++r) f.row(r * static_cast<std::size_t>(d), d);
        return;
    }
    const std::size_t nouter = g.ncells() / (s * static_cast<std::size_t>(d));
    for (std::size_t o = 0; o < nouter; ++o) {
        const std::size_t super = o * static_cast<std::size_t>(d);
        for (int k = 0; k < d; ++k) {
            const std::size_t base = (super + static_cast<std::size_t>(k)) * s;
            const std::size_t plus = (super + static_cast<std::size_t>(g.wrap(axis, k + 1))) * s;
            const std::size_t minus = (super + static_cast<std::size_t>(g.wrap(axis, k - 1))) * s;
            f.slab(base, plus, minus, s);
        }
    }
}

struct DiffOp {
    const double* in;
    double* out;
    double c;
    int d; // extent along the axis (s == 1 case)
    void slab(std::size_t base, std::size_t plus, std::size_t minus, std::size_t len) const {
        kernels::active().diff_scaled(out + base, in + plus, in + minus, c, len);
    }
    void row(std::size_t base, int len) const {
        if (len > 2)
            kernels::active().diff_scaled(out + base + 1, in + base + 2, in + base, c,
                                          static_cast<std::size_t>(len - 2));
        out[base] = c * (in[base + 1] - in[base + static_cast<std::size_t>(len - 1)]);
        out[base + static_cast<std::size_t>(len - 1)] =
            c * (in[base] - in[base + static_cast<std::size_t>(len - 2)]);
    }
};

struct SecondOp {
    const double* in;
    double* out;
    double c;
    void slab(std::size_t base, std::size_t plus, std::size_t minus, std::size_t len) const {
        kernels::active().second_diff(out + base, in + plus, in + base, in + minus, c, len);
    }
    void row(std::size_t base, int len) const {
        if (len > 2)
            kernels::active().second_diff(out + base + 1, in + base + 2, in + base + 1, in + base,
                                          c, static_cast<std::size_t>(len - 2));
        const std::size_t last = base + static_cast<std::size_t>(len - 1);
        out[base] = c * (in[base + 1] - 2.0 * in[base] + in[last]);
        out[last] = c * (in[base] - 2.0 * in[last] + in[last - 1]);
    }
};

} // namespace

void periodic_diff(const Grid& g, int axis, const double* in, double* out, double c) {
    for_each_slab(g, axis, DiffOp{in, out, c, g.extent(axis)});
}

void periodic_second(const Grid& g, int axis, const double* in, double* out, double c) {
    for_each_slab(g, axis, SecondOp{in, out, c});
}

TensorField partial_derivative(const TensorField& T) {
    const Grid& g = T.grid();
    std::vector<Slot> slots;
    slots.reserve(static_cast<std::size_t>(T.rank()) + 1);
    slots.push_back(Slot::Lower);
    for (Slot s : T.slots()) slots.push_back(s);
    TensorField out(g, std::move(slots));
    for (int a = 0; a < g.dim(); ++a) {
        const double c = 1.0 / (2.0 * g.spacing(a));
        for (int k = 0; k < T.ncomp(); ++k)
            periodic_diff(g, a, T.comp(k), out.comp(a * T.ncomp() + k), c);
    }
    return out;
}

TensorField second_partials(const TensorField& T) {
    const Grid& g = T.grid();
    const int n = g.dim();
    const int nc = T.ncomp();
    std::vector<Slot> slots;
    slots.push_back(Slot::Lower);
    slots.push_back(Slot::Lower);
    for (Slot s : T.slots()) slots.push_back(s);
    TensorField out(g, std::move(slots));
    std::vector<double> tmp(g.ncells());
    for (int p = 0; p < n; ++p) {
        for (int q = p; q < n; ++q) {
            for (int k = 0; k < nc; ++k) {
                double* dst = out.comp((p * n + q) * nc + k);
                if (p == q) {
                    periodic_second(g, p, T.comp(k), dst, 1.0 / (g.spacing(p) * g.spacing(p)));
                } else {
                    periodic_diff(g, p, T.comp(k), tmp.data(), 1.0 / (2.0 * g.spacing(p)));
                    periodic_diff(g, q, tmp.data(), dst, 1.0 / (2.0 * g.spacing(q)));
                    std::memcpy(out.comp((q * n + p) * nc + k), dst,
                                g.ncells() * sizeof(double));
                }
            }
        }
    }
    return out;
}

namespace {

// One covariant derivative: prepend the derivative slot, then apply the
// connection correction term per slot of T (skipped on flat backgrounds).
TensorField covariant_derivative_once(const TensorField& T, const BackgroundGeometry& bg) {
    TensorField out = partial_derivative(T);
    if (bg.flat) return out;

    const Grid& g = T.grid();
    const int n = g.dim();
    const int rank = T.rank();
    const int nc = T.ncomp();
    const std::size_t N = g.ncells();

    // strides within the component multi-index of T (row-major)
    std::vector<int> cstride(static_cast<std::size_t>(rank), 1);
    for (int s = rank - 2; s >= 0; --s)
        cstride[static_cast<std::size_t>(s)] = cstride[static_cast<std::size_t>(s + 1)] * n;

    std::vector<int> idx(static_cast<std::size_t>(rank), 0);
    for (int comp = 0; comp < nc; ++comp) {
        int rem = comp;
        for (int s = 0; s < rank; ++s) {
            idx[static_cast<std::size_t>(s)] = rem / cstride[static_cast<std::size_t>(s)];
            rem %= cstride[static_cast<std::size_t>(s)];
        }
        for (int a = 0; a < n; ++a) {
            double* dst = out.comp(a * nc + comp);
            for (int s = 0; s < rank; ++s) {
                const int is = idx[static_cast<std::size_t>(s)];
                const bool lower = T.slots()[static_cast<std::size_t>(s)] == Slot::Lower;
                for (int m = 0; m < n; ++m) {
                    const int src = comp + (m - is) * cstride[static_cast<std::size_t>(s)];
                    // lower slot: -Gamma^m_{a i_s} T_{..m..}; upper: +Gamma^{i_s}_{a m} T^{..m..}
                    const double* gam = lower ? bg.christoffel.comp((m * n + a) * n + is)
                                              : bg.christoffel.comp((is * n + a) * n + m);
                    const double* tsrc = T.comp(src);
                    const double sign = lower ? -1.0 : 1.0;
                    for (std::size_t c = 0; c < N; ++c) dst[c] += sign * gam[c] * tsrc[c];
                }
            }
        }
    }
    return out;
}

} // namespace

TensorField covariant_derivative(const TensorField& T, const BackgroundGeometry& bg, int order) {
    if (order < 1) throw ConfigError("covariant_derivative: order must be >= 1");
    TensorField cur = covariant_derivative_once(T, bg);
    for (int k = 1; k < order; ++k) cur = covariant_derivative_once(cur, bg);
    return cur;
}

TensorField christoffels(const MetricField& g) {
    const Grid& grid = g.grid();
    const int n = grid.dim();
    const std::size_t N = grid.ncells();
    const TensorField ginv = g.inverse();
    const TensorField dg = partial_derivative(g.tensor());

    TensorField gamma(grid, {Slot::Upper, Slot::Lower, Slot::Lower});
    std::vector<const double*> pd(static_cast<std::size_t>(n * n * n));
    for (int a = 0; a < n; ++a)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                pd[static_cast<std::size_t>((a * n + i) * n + j)] = dg.comp((a * n + i) * n + j);

    for (std::size_t c = 0; c < N; ++c) {
        double inv[9];
        for (int k = 0; k < n * n; ++k) inv[k] = ginv.at(k, c);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                double bracket[3];
                for (int l = 0; l < n; ++l)
                    bracket[l] = pd[static_cast<std::size_t>((i * n + j) * n + l)][c] +
                                 pd[static_cast<std::size_t>((j * n + i) * n + l)][c] -
                                 pd[static_cast<std::size_t>((l * n + i) * n + j)][c];
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l) s += inv[k * n + l] * bracket[l];
                    s *= 0.5;
                    gamma.at((k * n + i) * n + j, c) = s;
                    gamma.at((k * n + j) * n + i, c) = s;
                }
            }
        }
    }
    return gamma;
}

Curvature curvature_tensors(const MetricField& g) {
    const Grid& grid = g.grid();
    const int n = grid.dim();
    const std::size_t N = grid.ncells();

    const TensorField ginv = g.inverse();
    const TensorField d2 = second_partials(g.tensor());
    const TensorField gamma = christoffels(g);

    Curvature out{TensorField(grid, lower_slots(4)), TensorField(grid, lower_slots(2)),
                  TensorField::scalar(grid)};

    const int n2 = n * n;
    const int n3 = n2 * n;
    for (std::size_t c = 0; c < N; ++c) {
        double gm[9], inv[9], gam[27], dd[81];
        for (int k = 0; k < n2; ++k) gm[k] = g.tensor().at(k, c);
        for (int k = 0; k < n2; ++k) inv[k] = ginv.at(k, c);
        for (int k = 0; k < n3; ++k) gam[k] = gamma.at(k, c);
        for (int k = 0; k < n2 * n2; ++k) dd[k] = d2.at(k, c);

        auto D2 = [&](int p, int q, int i, int j) { return dd[((p * n + q) * n + i) * n + j]; };
        auto G = [&](int k, int i, int j) { return gam[(k * n + i) * n + j]; };

        double riem[81];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double v = 0.5 * (D2(j, k, i, l) + D2(i, l, j, k) - D2(j, l, i, k) -
                                          D2(i, k, j, l));
                        double quad = 0.0;
                        for (int p = 0; p < n; ++p)
                            for (int q = 0; q < n; ++q)
                                quad += gm[p * n + q] *
                                        (G(p, j, k) * G(q, i, l) - G(p, j, l) * G(q, i, k));
                        v += quad;
                        riem[((i * n + j) * n + k) * n + l] = v;
                        out.riemann.at(((i * n + j) * n + k) * n + l, c) = v;
                    }

        double scal = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double ric = 0.0;
                for (int p = 0; p < n; ++p)
                    for (int q = 0; q < n; ++q)
                        ric += inv[p * n + q] * riem[((p * n + a) * n + q) * n + b];
                out.ricci.at(a * n + b, c) = ric;
                scal += inv[a * n + b] * ric;
            }
        out.scalar.at(0, c) = scal;
    }
    return out;
}

TensorField tensor_norm_h(const TensorField& T, const BackgroundGeometry& bg) {
    const Grid& grid = T.grid();
    const std::size_t N = grid.ncells();
    TensorField out = TensorField::scalar(grid);

    if (bg.flat) {
        double* acc = out.comp(0);
        for (int k = 0; k < T.ncomp(); ++k) kernels::active().accum_sq(acc, T.comp(k), N);
        for (std::size_t c = 0; c < N; ++c) acc[c] = std::sqrt(acc[c]);
        return out;
    }

    const int n = grid.dim();
    const int rank = T.rank();
    const int nc = T.ncomp();
    std::vector<int> cstride(static_cast<std::size_t>(rank), 1);
    for (int s = rank - 2; s >= 0; --s)
        cstride[static_cast<std::size_t>(s)] = cstride[static_cast<std::size_t>(s + 1)] * n;

    std::vector<int> I(static_cast<std::size_t>(rank)), J(static_cast<std::size_t>(rank));
    for (std::size_t c = 0; c < N; ++c) {
        double h[9], hinv[9];
        for (int k = 0; k < n * n; ++k) {
            h[k] = bg.metric.tensor().at(k, c);
            hinv[k] = bg.inv_metric.at(k, c);
        }
        double total = 0.0;
        for (int ci = 0; ci < nc; ++ci) {
            int rem = ci;
            for (int s = 0; s < rank; ++s) {
                I[static_cast<std::size_t>(s)] = rem / cstride[static_cast<std::size_t>(s)];
                rem %= cstride[static_cast<std::size_t>(s)];
            }
            const double ti = T.at(ci, c);
            if (ti == 0.0) continue;
            for (int cj = 0; cj < nc; ++cj) {
                int rem2 = cj;
                for (int s = 0; s < rank; ++s) {
                    J[static_cast<std::size_t>(s)] = rem2 / cstride[static_cast<std::size_t>(s)];
                    rem2 %= cstride[static_cast<std::size_t>(s)];
                }
                double w = 1.0;
                for (int s = 0; s < rank; ++s) {
                    const int a = I[static_cast<std::size_t>(s)];
                    const int b = J[static_cast<std::size_t>(s)];
                    w *= (T.slots()[static_cast<std::size_t>(s)] == Slot::Lower) ? hinv[a * n + b]
                                                                                 : h[a * n + b];
                    if (w == 0.0) break;
                }
                if (w != 0.0) total += w * ti * T.at(cj, c);
            }
        }
        out.at(0, c) = std::sqrt(std::max(0.0, total));
    }
    return out;
}

double sup_norm(const TensorField& scalar_field) {
    double m = 0.0;
    for (int k = 0; k < scalar_field.ncomp(); ++k)
        m = std::max(m, kernels::active().max_abs(scalar_field.comp(k), scalar_field.grid().ncells()));
    return m;
}

double integrate_h(const TensorField& scalar_field, const BackgroundGeometry& bg) {
    const std::size_t N = scalar_field.grid().ncells();
    if (bg.flat)
        return kernels::active().sum(scalar_field.comp(0), N) * scalar_field.grid().cell_volume();
    std::vector<double> weighted(N);
    kernels::active().mul(weighted.data(), scalar_field.comp(0), bg.vol_density.comp(0), N);
    return kernels::active().sum(weighted.data(), N) * scalar_field.grid().cell_volume();
}

BackgroundGeometry BackgroundGeometry::flat_torus(const Grid& grid) {
    BackgroundGeometry bg;
    bg.metric = MetricField::identity(grid);
    bg.inv_metric = TensorField(grid, {Slot::Upper, Slot::Upper});
    for (int i = 0; i < grid.dim(); ++i)
        std::fill_n(bg.inv_metric.comp(i * grid.dim() + i), grid.ncells(), 1.0);
    bg.christoffel = TensorField(grid, {Slot::Upper, Slot::Lower, Slot::Lower});
    bg.riemann = TensorField(grid, lower_slots(4));
    bg.ricci = TensorField(grid, lower_slots(2));
    bg.vol_density = TensorField::scalar(grid);
    bg.vol_density.fill(1.0);
    bg.curvature_bounds = {0.0, 0.0, 0.0};
    bg.flat = true;
    return bg;
}

BackgroundGeometry BackgroundGeometry::from_metric(const MetricField& h) {
    BackgroundGeometry bg;
    bg.metric = h;
    bg.inv_metric = h.inverse();
    bg.christoffel = christoffels(h);
    Curvature curv = curvature_tensors(h);
    bg.riemann = curv.riemann;
    bg.ricci = curv.ricci;
    bg.vol_density = h.sqrt_det();
    bg.flat = false;
    bg.curvature_bounds.clear();
    bg.curvature_bounds.push_back(sup_norm(tensor_norm_h(bg.riemann, bg)));
    TensorField d1 = covariant_derivative(bg.riemann, bg, 1);
    bg.curvature_bounds.push_back(sup_norm(tensor_norm_h(d1, bg)));
    TensorField d2 = covariant_derivative(d1, bg, 1);
    bg.curvature_bounds.push_back(sup_norm(tensor_norm_h(d2, bg)));
    return bg;
}

} // namespace rml
