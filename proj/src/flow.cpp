#include "rml/flow.hpp"

#include "rml/errors.hpp"
#include "rml/geometry.hpp"
#include "rml/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rml {

namespace {

// nabla~ g as a rank-3 field W[a](i,j); plain partials on flat h.
TensorField grad_g(const MetricField& g, const BackgroundGeometry& bg) {
    if (bg.flat) return partial_derivative(g.tensor());
    return covariant_derivative(g.tensor(), bg, 1);
}

// nabla~_p nabla~_q g_ij with the compact/cross stencils on the d_p d_q part.
TensorField hessian_g(const MetricField& g, const BackgroundGeometry& bg, const TensorField& W) {
    TensorField S = second_partials(g.tensor());
    if (bg.flat) return S;

    const Grid& grid = g.grid();
    const int n = grid.dim();
    const std::size_t N = grid.ncells();

    // C[q](i,j) = Gamma~^m_qi g_mj + Gamma~^m_qj g_im, so that
    // d_p W = d_p d_q g - d_p C; then connection terms act on W's slots.
    TensorField C(grid, lower_slots(3));
    for (std::size_t c = 0; c < N; ++c) {
        for (int q = 0; q < n; ++q)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double v = 0.0;
                    for (int m = 0; m < n; ++m)
                        v += bg.christoffel.at((m * n + q) * n + i, c) * g.at(m, j, c) +
                             bg.christoffel.at((m * n + q) * n + j, c) * g.at(i, m, c);
                    C.at((q * n + i) * n + j, c) = v;
                }
    }
    const TensorField DC = partial_derivative(C);

    for (std::size_t c = 0; c < N; ++c) {
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double v = S.at(((p * n + q) * n + i) * n + j, c) -
                                   DC.at(((p * n + q) * n + i) * n + j, c);
                        for (int m = 0; m < n; ++m) {
                            v -= bg.christoffel.at((m * n + p) * n + q, c) *
                                 W.at((m * n + i) * n + j, c);
                            v -= bg.christoffel.at((m * n + p) * n + i, c) *
                                 W.at((q * n + m) * n + j, c);
                            v -= bg.christoffel.at((m * n + p) * n + j, c) *
                                 W.at((q * n + i) * n + m, c);
                        }
                        S.at(((p * n + q) * n + i) * n + j, c) = v;
                    }
    }
    return S;
}

} // namespace

TensorField deturck_vector(const MetricField& g, const BackgroundGeometry& bg) {
    const Grid& grid = g.grid();
    const int n = grid.dim();
    const std::size_t N = grid.ncells();
    const TensorField ginv = g.inverse();
    const TensorField gamma = christoffels(g);

    TensorField X(grid, {Slot::Upper});
    for (std::size_t c = 0; c < N; ++c) {
        for (int k = 0; k < n; ++k) {
            double v = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double diff = -gamma.at((k * n + i) * n + j, c);
                    if (!bg.flat) diff += bg.christoffel.at((k * n + i) * n + j, c);
                    v += ginv.at(i * n + j, c) * diff;
                }
            X.at(k, c) = v;
        }
    }
    return X;
}

TensorField rdf_rhs(const MetricField& g, const BackgroundGeometry& bg) {
    const Grid& grid = g.grid();
    const int n = grid.dim();
    const std::size_t N = grid.ncells();
    const int n2 = n * n;
    const int n3 = n2 * n;

    const TensorField ginv = g.inverse();
    const TensorField W = grad_g(g, bg);
    const TensorField S = hessian_g(g, bg, W);

    TensorField rhs(grid, lower_slots(2));

    for (std::size_t c = 0; c < N; ++c) {
        double inv[9], w[27], s[81], gm[9];
        for (int k = 0; k < n2; ++k) inv[k] = ginv.at(k, c);
        for (int k = 0; k < n2; ++k) gm[k] = g.tensor().at(k, c);
        for (int k = 0; k < n3; ++k) w[k] = W.at(k, c);
        for (int k = 0; k < n2 * n2; ++k) s[k] = S.at(k, c);

        auto Wv = [&](int a, int i, int j) { return w[(a * n + i) * n + j]; };

        double raw[9];
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                // g^{pq} nabla~_p nabla~_q g_ij
                double lap = 0.0;
                for (int p = 0; p < n; ++p)
                    for (int q = 0; q < n; ++q)
                        lap += inv[p * n + q] * s[((p * n + q) * n + i) * n + j];

                // curvature coupling, identically zero on flat h
                double coup = 0.0;
                if (!bg.flat) {
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l)
                            for (int p = 0; p < n; ++p)
                                for (int q = 0; q < n; ++q) {
                                    const double kl = inv[k * n + l];
                                    coup -= kl * gm[i * n + p] *
                                            bg.inv_metric.at(p * n + q, c) *
                                            bg.riemann.at(((j * n + k) * n + q) * n + l, c);
                                    coup -= kl * gm[j * n + p] *
                                            bg.inv_metric.at(p * n + q, c) *
                                            bg.riemann.at(((i * n + k) * n + q) * n + l, c);
                                }
                }

                // the five quadratic gradient terms
                double quad = 0.0;
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        const double ckl = inv[k * n + l];
                        if (ckl == 0.0) continue;
                        for (int p = 0; p < n; ++p)
                            for (int q = 0; q < n; ++q) {
                                const double cpq = inv[p * n + q];
                                if (cpq == 0.0) continue;
                                const double terms =
                                    Wv(i, p, k) * Wv(j, q, l) + 2.0 * Wv(k, j, p) * Wv(q, i, l) -
                                    2.0 * Wv(k, j, p) * Wv(l, i, q) -
                                    2.0 * Wv(j, p, k) * Wv(l, i, q) -
                                    2.0 * Wv(i, p, k) * Wv(l, q, j);
                                quad += ckl * cpq * terms;
                            }
                    }
                raw[i * n + j] = lap + coup + 0.5 * quad;
            }
        }
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const double v = 0.5 * (raw[i * n + j] + raw[j * n + i]);
                rhs.at(i * n + j, c) = v;
                rhs.at(j * n + i, c) = v;
            }
    }
    return rhs;
}

namespace {

void check_post_step(const MetricField& g, const BackgroundGeometry& bg) {
    const int n = g.dim();
    const std::size_t N = g.grid().ncells();
    double gm[9], hm[9];
    for (std::size_t c = 0; c < N; ++c) {
        cellops::load(g.tensor(), c, n, gm);
        for (int k = 0; k < n * n; ++k)
            if (!std::isfinite(gm[k]))
                throw StabilityError("non-finite metric entry after step");
        cellops::load(bg.metric.tensor(), c, n, hm);
        double lo, hi;
        cellops::relative_eigen_range(gm, hm, n, lo, hi);
        if (!(lo > 0.0))
            throw StabilityError("metric lost positivity after step (min eigenvalue " +
                                 std::to_string(lo) + ")");
    }
}

} // namespace

MetricField step(const MetricField& g, double dt, const BackgroundGeometry& bg) {
    const std::size_t N = g.grid().ncells();
    const int nc = g.tensor().ncomp();
    const auto& K = kernels::active();

    const TensorField k1 = rdf_rhs(g, bg);
    MetricField g1(g.grid());
    for (int k = 0; k < nc; ++k)
        K.axpby(g1.tensor().comp(k), 1.0, g.tensor().comp(k), dt, k1.comp(k), N);

    const TensorField k2 = rdf_rhs(g1, bg);
    MetricField out(g.grid());
    for (int k = 0; k < nc; ++k) {
        K.axpby(out.tensor().comp(k), 0.5 * dt, k1.comp(k), 0.5 * dt, k2.comp(k), N);
        K.axpby(out.tensor().comp(k), 1.0, out.tensor().comp(k), 1.0, g.tensor().comp(k), N);
    }
    check_post_step(out, bg);
    return out;
}

namespace {

FlowDiagnostics make_diagnostics(const MetricField& g, const BackgroundGeometry& bg, double t,
                                 double dt, int diag_order) {
    FlowDiagnostics d;
    d.t = t;
    d.dt = dt;
    const auto range = [&] {
        const int n = g.dim();
        const std::size_t N = g.grid().ncells();
        double lo = 1e300, hi = -1e300, gm[9], hm[9];
        for (std::size_t c = 0; c < N; ++c) {
            cellops::load(g.tensor(), c, n, gm);
            cellops::load(bg.metric.tensor(), c, n, hm);
            double a, b;
            cellops::relative_eigen_range(gm, hm, n, a, b);
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
        return std::pair<double, double>{lo, hi};
    }();
    d.lambda_min = range.first;
    d.lambda_max = range.second;

    TensorField cur = g.tensor();
    for (int k = 1; k <= std::min(diag_order, 4); ++k) {
        cur = covariant_derivative(cur, bg, 1);
        const TensorField nrm = tensor_norm_h(cur, bg);
        d.sup_d[k - 1] = sup_norm(nrm);
        if (k == 2) {
            TensorField sq = nrm;
            kernels::active().mul(sq.comp(0), nrm.comp(0), nrm.comp(0), g.grid().ncells());
            d.hess_sq_l2 = integrate_h(sq, bg);
        }
    }
    return d;
}

} // namespace

FlowTrajectory evolve(const MetricField& g0, const FlowConfig& cfg, const BackgroundGeometry& bg) {
    if (!(cfg.cfl > 0.0) || !(cfg.cfl < 1.0))
        throw ConfigError("flow cfl must lie in (0,1)");
    if (!(cfg.t_end > 0.0)) throw ConfigError("flow t_end must be positive");
    if (!(cfg.dt_min > 0.0) || !(cfg.dt_max >= cfg.dt_min))
        throw ConfigError("flow needs 0 < dt_min <= dt_max");
    for (double s : cfg.snapshot_times)
        if (s < 0.0 || s > cfg.t_end)
            throw ConfigError("snapshot times must lie in [0, t_end]");

    const Grid& grid = g0.grid();
    const int n = grid.dim();
    const double hmin = grid.min_spacing();

    std::vector<double> events = cfg.snapshot_times;
    events.push_back(cfg.t_end);
    std::sort(events.begin(), events.end());
    events.erase(std::unique(events.begin(), events.end(),
                             [](double a, double b) { return std::fabs(a - b) < 1e-15; }),
                 events.end());
    while (!events.empty() && events.front() <= 0.0) events.erase(events.begin());

    FlowTrajectory traj;
    traj.grid = grid;
    traj.times.push_back(0.0);
    traj.states.push_back(g0);
    traj.steps.push_back(make_diagnostics(g0, bg, 0.0, 0.0, cfg.diag_order));

    const double t_grade = std::min(0.05, 0.5 * cfg.t_end);
    MetricField g = g0;
    double t = 0.0;
    double lambda_min = traj.steps.front().lambda_min;
    std::size_t next_event = 0;

    while (next_event < events.size()) {
        const double target = events[next_event];
        double dt_stab = cfg.cfl * hmin * hmin * std::min(lambda_min, 1.0) / (2.0 * n);
        if (t > 0.0 && t < t_grade)
            dt_stab *= std::pow(t / t_grade, cfg.early_time_refinement);
        double dt = std::clamp(dt_stab, cfg.dt_min, cfg.dt_max);
        if (t + dt >= target - 1e-15) dt = target - t;

        bool accepted = false;
        while (!accepted) {
            try {
                MetricField g_next = step(g, dt, bg);
                g = std::move(g_next);
                accepted = true;
            } catch (const StabilityError& err) {
                dt *= 0.5;
                if (dt < cfg.dt_min) {
                    traj.aborted = true;
                    traj.abort_reason = std::string("stability failure at t = ") +
                                        std::to_string(t) + " with dt_min reached: " + err.what();
                    return traj;
                }
            }
        }

        t += dt;
        traj.steps.push_back(make_diagnostics(g, bg, t, dt, cfg.diag_order));
        lambda_min = traj.steps.back().lambda_min;

        if (std::fabs(t - target) < 1e-14) {
            traj.times.push_back(target);
            traj.states.push_back(g);
            ++next_event;
        }
    }
    return traj;
}

double cubic_sample(const Grid& grid, const double* plane, const std::array<double, 3>& x) {
    const int n = grid.dim();
    int base[3] = {0, 0, 0};
    double wts[3][4];
    for (int a = 0; a < n; ++a) {
        const double h = grid.spacing(a);
        const double u = x[static_cast<std::size_t>(a)] / h;
        const double fl = std::floor(u);
        const double s = u - fl;
        base[a] = static_cast<int>(fl);
        const double s2 = s * s, s3 = s2 * s;
        wts[a][0] = -0.5 * s + s2 - 0.5 * s3;
        wts[a][1] = 1.0 - 2.5 * s2 + 1.5 * s3;
        wts[a][2] = 0.5 * s + 2.0 * s2 - 1.5 * s3;
        wts[a][3] = -0.5 * s2 + 0.5 * s3;
    }
    double acc = 0.0;
    int off[3] = {0, 0, 0};
    const int z_lo = (n == 3) ? -1 : 0, z_hi = (n == 3) ? 2 : 0;
    std::array<int, 3> idx{0, 0, 0};
    for (off[0] = -1; off[0] <= 2; ++off[0]) {
        idx[0] = grid.wrap(0, base[0] + off[0]);
        const double w0 = wts[0][off[0] + 1];
        for (off[1] = -1; off[1] <= 2; ++off[1]) {
            idx[1] = grid.wrap(1, base[1] + off[1]);
            const double w01 = w0 * wts[1][off[1] + 1];
            if (n == 2) {
                acc += w01 * plane[grid.flatten(idx)];
            } else {
                for (off[2] = z_lo; off[2] <= z_hi; ++off[2]) {
                    idx[2] = grid.wrap(2, base[2] + off[2]);
                    acc += w01 * wts[2][off[2] + 1] * plane[grid.flatten(idx)];
                }
            }
        }
    }
    return acc;
}

std::pair<std::vector<GaugeMap>, PullbackReport>
pullback_to_ricci_flow(const FlowTrajectory& traj, const BackgroundGeometry& bg) {
    const std::size_t m = traj.snapshot_count();
    if (m < 3) throw ConfigError("pullback needs at least 3 snapshots");
    const Grid& grid = traj.grid;
    const int n = grid.dim();
    const std::size_t N = grid.ncells();

    // X fields at every snapshot
    std::vector<TensorField> X;
    X.reserve(m);
    for (std::size_t j = 0; j < m; ++j) X.push_back(deturck_vector(traj.states[j], bg));

    auto sample_X = [&](std::size_t j0, double frac, const std::array<double, 3>& pos, int k) {
        const double a = cubic_sample(grid, X[j0].comp(k), pos);
        const double b = cubic_sample(grid, X[j0 + 1].comp(k), pos);
        return (1.0 - frac) * a + frac * b;
    };

    std::vector<GaugeMap> maps;
    maps.reserve(m);
    TensorField disp(grid, {Slot::Upper});
    maps.push_back({traj.times.front(), disp});

    double max_disp = 0.0;
    const int nsub = 4;
    for (std::size_t j = 0; j + 1 < m; ++j) {
        const double t0 = traj.times[j], t1 = traj.times[j + 1];
        const double dt = (t1 - t0) / nsub;
        for (int s = 0; s < nsub; ++s) {
            const double ts = t0 + s * dt;
            for (std::size_t c = 0; c < N; ++c) {
                std::array<double, 3> y = grid.node(c);
                std::array<double, 3> pos = y;
                for (int a = 0; a < n; ++a)
                    pos[static_cast<std::size_t>(a)] += disp.at(a, c);
                double k1[3], k2[3];
                const double f0 = (ts - t0) / (t1 - t0);
                for (int a = 0; a < n; ++a) k1[a] = sample_X(j, f0, pos, a);
                std::array<double, 3> mid = pos;
                for (int a = 0; a < n; ++a) mid[static_cast<std::size_t>(a)] += dt * k1[a];
                const double f1 = (ts + dt - t0) / (t1 - t0);
                for (int a = 0; a < n; ++a) k2[a] = sample_X(j, f1, mid, a);
                for (int a = 0; a < n; ++a)
                    disp.at(a, c) += 0.5 * dt * (k1[a] + k2[a]);
            }
        }
        for (int a = 0; a < n; ++a)
            max_disp = std::max(max_disp, kernels::active().max_abs(disp.comp(a), N));
        if (max_disp > 0.5 * grid.min_period())
            throw NumericalError("gauge map displacement exceeded half a period");
        maps.push_back({t1, disp});
    }

    // pullback metric at snapshot j: (chi* g)_ab(y) = d_a chi^i d_b chi^j g_ij(chi(y))
    auto pullback_metric = [&](std::size_t j) {
        const TensorField& d = maps[j].displacement;
        TensorField jac = partial_derivative(d); // (a; i): d_a of displacement^i
        MetricField P(grid);
        for (std::size_t c = 0; c < N; ++c) {
            std::array<double, 3> pos = grid.node(c);
            for (int a = 0; a < n; ++a) pos[static_cast<std::size_t>(a)] += d.at(a, c);
            double gval[9];
            for (int i = 0; i < n; ++i)
                for (int k = i; k < n; ++k) {
                    const double v = cubic_sample(grid, traj.states[j].comp(i, k), pos);
                    gval[i * n + k] = v;
                    gval[k * n + i] = v;
                }
            double J[9];
            for (int a = 0; a < n; ++a)
                for (int i = 0; i < n; ++i)
                    J[a * n + i] = (a == i ? 1.0 : 0.0) + jac.at(a * n + i, c);
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    double v = 0.0;
                    for (int i = 0; i < n; ++i)
                        for (int k = 0; k < n; ++k)
                            v += J[a * n + i] * J[b * n + k] * gval[i * n + k];
                    P.at(a, b, c) = v;
                    P.at(b, a, c) = v;
                }
        }
        return P;
    };

    PullbackReport rep;
    rep.max_displacement = max_disp;
    std::vector<MetricField> P(m);
    for (std::size_t j = 0; j < m; ++j) P[j] = pullback_metric(j);

    for (std::size_t j = 1; j + 1 < m; ++j) {
        const double span = traj.times[j + 1] - traj.times[j - 1];
        TensorField resid(grid, lower_slots(2));
        const Curvature curv = curvature_tensors(P[j]);
        for (int k = 0; k < resid.ncomp(); ++k)
            for (std::size_t c = 0; c < N; ++c)
                resid.at(k, c) = (P[j + 1].tensor().at(k, c) - P[j - 1].tensor().at(k, c)) / span +
                                 2.0 * curv.ricci.at(k, c);
        rep.times.push_back(traj.times[j]);
        rep.residuals.push_back(sup_norm(tensor_norm_h(resid, bg)));

        TensorField resid0(grid, lower_slots(2));
        const Curvature curv0 = curvature_tensors(traj.states[j]);
        for (int k = 0; k < resid0.ncomp(); ++k)
            for (std::size_t c = 0; c < N; ++c)
                resid0.at(k, c) =
                    (traj.states[j + 1].tensor().at(k, c) - traj.states[j - 1].tensor().at(k, c)) /
                        span +
                    2.0 * curv0.ricci.at(k, c);
        rep.unpulled_residuals.push_back(sup_norm(tensor_norm_h(resid0, bg)));
    }
    return {std::move(maps), std::move(rep)};
}

} // namespace rml
