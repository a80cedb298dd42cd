#include "rml/fields.hpp"

#include "rml/errors.hpp"
#include "rml/geometry.hpp"
#include "rml/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace rml {

namespace {

double quintic_smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

// 1 inside r_in, 0 outside r_out, C^2 quintic ramp between.
double radial_cutoff(double rho, double r_in, double r_out) {
    if (rho <= r_in) return 1.0;
    if (rho >= r_out) return 0.0;
    return 1.0 - quintic_smoothstep((rho - r_in) / (r_out - r_in));
}

// Cone apexes live at half-offset points so rho never vanishes at a node.
std::array<double, 3> snap_to_cell_center(const Grid& g, const std::array<double, 3>& p) {
    std::array<double, 3> out{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
        const double h = g.spacing(a);
        out[static_cast<std::size_t>(a)] =
            (std::floor(p[static_cast<std::size_t>(a)] / h) + 0.5) * h;
    }
    return out;
}

void mark_near(SingularSetMask& mask, const std::array<double, 3>& p, double radius) {
    const Grid& g = mask.grid;
    for (std::size_t c = 0; c < g.ncells(); ++c) {
        if (g.periodic_dist(g.node(c), p) < radius) mask.cells[c] = 1;
    }
}

double dist_point_segment(const std::array<double, 3>& p, const std::array<double, 3>& a,
                          const std::array<double, 3>& b, int n) {
    double ab2 = 0.0, ap_ab = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)];
        ab2 += d * d;
        ap_ab += (p[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)]) * d;
    }
    const double t = ab2 > 0.0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double q = a[static_cast<std::size_t>(i)] +
                         t * (b[static_cast<std::size_t>(i)] - a[static_cast<std::size_t>(i)]);
        const double d = p[static_cast<std::size_t>(i)] - q;
        d2 += d * d;
    }
    return std::sqrt(d2);
}

std::uint64_t splitmix64(std::uint64_t& s) {
    s += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& s) {
    return static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
}

} // namespace

bool SingularSetMask::empty() const { return count() == 0; }

std::size_t SingularSetMask::count() const {
    std::size_t n = 0;
    for (auto v : cells) n += v;
    return n;
}

TensorField SingularSetMask::distance_field() const {
    TensorField out = TensorField::scalar(grid);
    const int n = grid.dim();
    const std::size_t N = grid.ncells();

    if (geometry.kind == MaskGeometry::Kind::Empty && empty()) {
        out.fill(std::numeric_limits<double>::infinity());
        return out;
    }

    if (geometry.kind == MaskGeometry::Kind::Points) {
        for (std::size_t c = 0; c < N; ++c) {
            const auto x = grid.node(c);
            double d = std::numeric_limits<double>::infinity();
            for (const auto& p : geometry.points) d = std::min(d, grid.periodic_dist(x, p));
            out.at(0, c) = d;
        }
        return out;
    }

    if (geometry.kind == MaskGeometry::Kind::Segment) {
        // minimum over the 3^n period images of the segment
        std::vector<std::array<double, 3>> shifts;
        const int reps = n == 2 ? 9 : 27;
        for (int r = 0; r < reps; ++r) {
            int q = r;
            std::array<double, 3> s{0, 0, 0};
            for (int a = 0; a < n; ++a) {
                s[static_cast<std::size_t>(a)] = (q % 3 - 1) * grid.period(a);
                q /= 3;
            }
            shifts.push_back(s);
        }
        for (std::size_t c = 0; c < N; ++c) {
            const auto x = grid.node(c);
            double d = std::numeric_limits<double>::infinity();
            for (const auto& s : shifts) {
                std::array<double, 3> a = geometry.seg_a, b = geometry.seg_b;
                for (int ax = 0; ax < n; ++ax) {
                    a[static_cast<std::size_t>(ax)] += s[static_cast<std::size_t>(ax)];
                    b[static_cast<std::size_t>(ax)] += s[static_cast<std::size_t>(ax)];
                }
                d = std::min(d, dist_point_segment(x, a, b, n));
            }
            out.at(0, c) = d;
        }
        return out;
    }

    if (geometry.kind == MaskGeometry::Kind::Circle) {
        const int ax = geometry.circle_axis;
        const int a0 = (ax + 1) % 3, a1 = (ax + 2) % 3;
        for (std::size_t c = 0; c < N; ++c) {
            const auto x = grid.node(c);
            const double du = grid.periodic_delta(a0, x[static_cast<std::size_t>(a0)] -
                                                          geometry.circle_center[static_cast<std::size_t>(a0)]);
            const double dv = grid.periodic_delta(a1, x[static_cast<std::size_t>(a1)] -
                                                          geometry.circle_center[static_cast<std::size_t>(a1)]);
            const double dw = grid.periodic_delta(ax, x[static_cast<std::size_t>(ax)] -
                                                          geometry.circle_center[static_cast<std::size_t>(ax)]);
            const double ring = std::hypot(du, dv) - geometry.circle_radius;
            out.at(0, c) = std::hypot(ring, dw);
        }
        return out;
    }

    // fall back to marked cells
    std::vector<std::array<double, 3>> pts;
    for (std::size_t c = 0; c < N; ++c)
        if (cells[c]) pts.push_back(grid.node(c));
    for (std::size_t c = 0; c < N; ++c) {
        const auto x = grid.node(c);
        double d = std::numeric_limits<double>::infinity();
        for (const auto& p : pts) d = std::min(d, grid.periodic_dist(x, p));
        out.at(0, c) = d;
    }
    return out;
}

SingularSetMask point_mask(const Grid& grid, const std::array<double, 3>& p) {
    SingularSetMask m{grid, std::vector<std::uint8_t>(grid.ncells(), 0), {}};
    m.geometry.kind = MaskGeometry::Kind::Points;
    m.geometry.points = {p};
    mark_near(m, p, grid.min_spacing());
    return m;
}

SingularSetMask segment_mask(const Grid& grid, const std::array<double, 3>& a,
                             const std::array<double, 3>& b) {
    SingularSetMask m{grid, std::vector<std::uint8_t>(grid.ncells(), 0), {}};
    m.geometry.kind = MaskGeometry::Kind::Segment;
    m.geometry.seg_a = a;
    m.geometry.seg_b = b;
    const TensorField d = m.distance_field();
    for (std::size_t c = 0; c < grid.ncells(); ++c)
        if (d.at(0, c) < grid.min_spacing()) m.cells[c] = 1;
    return m;
}

SingularSetMask circle_mask(const Grid& grid, const std::array<double, 3>& center, double radius,
                            int axis) {
    if (grid.dim() != 3) throw ConfigError("circle masks need a 3-torus");
    if (!(radius > 0.0) || radius >= 0.25 * grid.min_period())
        throw ConfigError("circle radius must lie in (0, quarter period)");
    SingularSetMask m{grid, std::vector<std::uint8_t>(grid.ncells(), 0), {}};
    m.geometry.kind = MaskGeometry::Kind::Circle;
    m.geometry.circle_center = center;
    m.geometry.circle_radius = radius;
    m.geometry.circle_axis = axis;
    const TensorField d = m.distance_field();
    for (std::size_t c = 0; c < grid.ncells(); ++c)
        if (d.at(0, c) < grid.min_spacing()) m.cells[c] = 1;
    return m;
}

std::pair<MetricField, SingularSetMask> make_initial_metric(const InitialDataSpec& spec,
                                                            const Grid& grid) {
    const int n = grid.dim();
    const std::size_t N = grid.ncells();
    MetricField g = MetricField::identity(grid);
    SingularSetMask mask{grid, std::vector<std::uint8_t>(N, 0), {}};

    if (!(spec.lambda_cap > 1.0))
        throw ConfigError("initial data: lambda_cap must exceed 1");

    auto check_cap = [&](double lo, double hi, const char* what) {
        if (!(lo >= 1.0 / spec.lambda_cap) || !(hi <= spec.lambda_cap))
            throw ConfigError(std::string("initial data: ") + what +
                              " pushes eigenvalues past lambda_cap (range [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "])");
    };

    switch (spec.kind) {
    case InitialKind::Flat:
        return {std::move(g), std::move(mask)};

    case InitialKind::ConformalBump: {
        const double A = spec.amplitude;
        check_cap(std::exp(-2.0 * std::fabs(A)), std::exp(2.0 * std::fabs(A)), "conformal bump");
        for (std::size_t c = 0; c < N; ++c) {
            const auto x = grid.node(c);
            double phi = A;
            for (int a = 0; a < n; ++a)
                phi *= std::sin(2.0 * std::numbers::pi * x[static_cast<std::size_t>(a)] /
                                grid.period(a));
            const double f = std::exp(2.0 * phi);
            for (int i = 0; i < n; ++i) g.at(i, i, c) = f;
        }
        return {std::move(g), std::move(mask)};
    }

    case InitialKind::HoelderCone:
    case InitialKind::MorreyFamily: {
        if (!(spec.exponent > 0.0) || !(spec.exponent < 1.0))
            throw ConfigError("cone exponent delta/p must lie in (0,1)");
        std::vector<std::array<double, 3>> centers = spec.centers;
        if (centers.empty()) {
            if (spec.kind == InitialKind::HoelderCone) {
                std::array<double, 3> c{0, 0, 0};
                for (int a = 0; a < n; ++a)
                    c[static_cast<std::size_t>(a)] = 0.5 * grid.period(a);
                centers.push_back(c);
            } else {
                std::uint64_t s = spec.seed * 0x9e3779b97f4a7c15ULL + 1;
                const int k = 4;
                for (int j = 0; j < k; ++j) {
                    std::array<double, 3> c{0, 0, 0};
                    for (int a = 0; a < n; ++a)
                        c[static_cast<std::size_t>(a)] = uniform01(s) * grid.period(a);
                    centers.push_back(c);
                }
            }
        }
        for (auto& c : centers) c = snap_to_cell_center(grid, c);

        const double alpha = spec.exponent;
        double lo = 1.0, hi = 1.0;
        for (std::size_t c = 0; c < N; ++c) {
            const auto x = grid.node(c);
            double psi = 0.0;
            for (const auto& ctr : centers) {
                const double rho = grid.periodic_dist(x, ctr);
                psi += spec.amplitude * std::pow(rho, alpha) *
                       radial_cutoff(rho, spec.core_radius, spec.outer_radius);
            }
            const double v = 1.0 + psi;
            if (!(v > 0.0))
                throw ConfigError("cone amplitude makes the metric degenerate");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            for (int i = 0; i < n; ++i) g.at(i, i, c) = v;
        }
        check_cap(lo, hi, "cone profile");
        mask.geometry.kind = MaskGeometry::Kind::Points;
        mask.geometry.points = centers;
        for (const auto& ctr : centers) mark_near(mask, ctr, grid.min_spacing());
        return {std::move(g), std::move(mask)};
    }

    case InitialKind::ConeAngle: {
        if (n != 2) throw ConfigError("cone_angle initial data is two-dimensional");
        if (!(spec.beta > 0.0) || !(spec.beta > 1.0 / std::sqrt(spec.lambda_cap)))
            throw ConfigError("cone angle factor beta incompatible with lambda_cap");
        std::array<double, 3> ctr{0.5 * grid.period(0), 0.5 * grid.period(1), 0.0};
        if (!spec.centers.empty()) ctr = spec.centers.front();
        ctr = snap_to_cell_center(grid, ctr);
        const double w = 1.0 - spec.beta * spec.beta;
        for (std::size_t c = 0; c < N; ++c) {
            const auto x = grid.node(c);
            double dx[2] = {grid.periodic_delta(0, x[0] - ctr[0]),
                            grid.periodic_delta(1, x[1] - ctr[1])};
            const double rho = std::hypot(dx[0], dx[1]);
            const double chi = radial_cutoff(rho, spec.core_radius, spec.outer_radius);
            const double u0 = dx[0] / rho, u1 = dx[1] / rho;
            // g = delta + (1 - beta^2) * chi * (unit x unit - delta)
            g.at(0, 0, c) = 1.0 + w * chi * (u0 * u0 - 1.0);
            g.at(1, 1, c) = 1.0 + w * chi * (u1 * u1 - 1.0);
            const double off = w * chi * u0 * u1;
            g.at(0, 1, c) = off;
            g.at(1, 0, c) = off;
        }
        mask.geometry.kind = MaskGeometry::Kind::Points;
        mask.geometry.points = {ctr};
        mark_near(mask, ctr, grid.min_spacing());
        return {std::move(g), std::move(mask)};
    }

    case InitialKind::RandomW1p: {
        std::uint64_t s = spec.seed * 0x9e3779b97f4a7c15ULL + 17;
        const int kmax = 6;
        const double decay = 1.0 + spec.exponent;
        struct Mode {
            int comp_i, comp_j;
            double k0, k1, k2, amp, phase;
        };
        std::vector<Mode> modes;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                for (int m = 0; m < 2 * kmax; ++m) {
                    Mode md{};
                    md.comp_i = i;
                    md.comp_j = j;
                    double k2sum = 0.0;
                    double kk[3] = {0, 0, 0};
                    for (int a = 0; a < n; ++a) {
                        kk[a] = std::floor(uniform01(s) * kmax) + 1.0;
                        k2sum += kk[a] * kk[a];
                    }
                    md.k0 = kk[0];
                    md.k1 = kk[1];
                    md.k2 = kk[2];
                    md.amp = spec.amplitude * (2.0 * uniform01(s) - 1.0) /
                             std::pow(std::sqrt(k2sum), decay);
                    md.phase = 2.0 * std::numbers::pi * uniform01(s);
                    modes.push_back(md);
                }
        for (std::size_t c = 0; c < N; ++c) {
            const auto x = grid.node(c);
            for (const auto& md : modes) {
                double arg = md.phase;
                const double kk[3] = {md.k0, md.k1, md.k2};
                for (int a = 0; a < n; ++a)
                    arg += 2.0 * std::numbers::pi * kk[a] * x[static_cast<std::size_t>(a)] /
                           grid.period(a);
                const double v = md.amp * std::sin(arg);
                g.at(md.comp_i, md.comp_j, c) += v;
                if (md.comp_i != md.comp_j) g.at(md.comp_j, md.comp_i, c) += v;
            }
        }
        const auto bg = BackgroundGeometry::flat_torus(grid);
        const auto range = bilipschitz_constants(g, bg);
        check_cap(range.first, range.second, "random field");
        return {std::move(g), std::move(mask)};
    }
    }
    throw ConfigError("unknown initial data kind");
}

std::pair<double, double> bilipschitz_constants(const MetricField& g,
                                                const BackgroundGeometry& bg) {
    const int n = g.dim();
    const std::size_t N = g.grid().ncells();
    if (!g.all_finite()) throw NumericalError("bilipschitz_constants: non-finite metric entries");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    double gm[9], hm[9];
    for (std::size_t c = 0; c < N; ++c) {
        cellops::load(g.tensor(), c, n, gm);
        cellops::load(bg.metric.tensor(), c, n, hm);
        double a, b;
        cellops::relative_eigen_range(gm, hm, n, a, b);
        lo = std::min(lo, a);
        hi = std::max(hi, b);
    }
    return {lo, hi};
}

MetricField mollify(const MetricField& g0, const SingularSetMask& mask,
                    const MollifierConfig& cfg) {
    const Grid& grid = g0.grid();
    const int n = grid.dim();
    const std::size_t N = grid.ncells();

    if (cfg.index < 1) throw ConfigError("mollifier index must be >= 1");
    if (!(cfg.overlap > 0.0) || !(cfg.chart_radius > cfg.overlap))
        throw ConfigError("mollifier chart radius must exceed the overlap width");
    if (cfg.chart_radius - cfg.overlap < 2.0 * grid.min_spacing())
        throw ConfigError("mollifier chart radius too small to contain the mask");

    const double r = 1.0 / cfg.index;

    // discrete mass-one kernel on node offsets inside radius r
    struct Offset {
        int d[3];
        double w;
    };
    std::vector<Offset> kernel;
    int reach[3] = {0, 0, 0};
    for (int a = 0; a < n; ++a)
        reach[a] = static_cast<int>(std::floor(r / grid.spacing(a)));
    double total = 0.0;
    int it[3] = {0, 0, 0};
    for (it[0] = -reach[0]; it[0] <= reach[0]; ++it[0]) {
        for (it[1] = -reach[1]; it[1] <= reach[1]; ++it[1]) {
            const int z0 = n == 3 ? -reach[2] : 0;
            const int z1 = n == 3 ? reach[2] : 0;
            for (it[2] = z0; it[2] <= z1; ++it[2]) {
                double y2 = 0.0;
                for (int a = 0; a < n; ++a) {
                    const double y = it[a] * grid.spacing(a) / r;
                    y2 += y * y;
                }
                if (y2 >= 1.0) continue;
                const double w = std::exp(-1.0 / (1.0 - y2));
                kernel.push_back({{it[0], it[1], it[2]}, w});
                total += w;
            }
        }
    }
    for (auto& o : kernel) o.w /= total;

    const TensorField dist = mask.distance_field();
    MetricField out = g0;
    const double inner = cfg.chart_radius - cfg.overlap;

    for (std::size_t c = 0; c < N; ++c) {
        const double d = dist.at(0, c);
        if (!(d < cfg.chart_radius)) continue; // phi1 == 0: identity, bit-exact
        const double phi1 = radial_cutoff(d, inner, cfg.chart_radius);
        const auto idx = grid.unflatten(c);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                const double* src = g0.comp(i, j);
                double conv = 0.0;
                for (const auto& o : kernel) {
                    std::array<int, 3> q = idx;
                    for (int a = 0; a < n; ++a) q[a] = grid.wrap(a, q[a] + o.d[a]);
                    conv += o.w * src[grid.flatten(q)];
                }
                const double v = phi1 * conv + (1.0 - phi1) * src[c];
                out.at(i, j, c) = v;
                out.at(j, i, c) = v;
            }
        }
    }
    return out;
}

} // namespace rml
