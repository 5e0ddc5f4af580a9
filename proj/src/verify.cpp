#include "rodctl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rodctl/errors.hpp"

namespace rodctl {

namespace {

using Pt = std::array<double, 2>;
using Poly = std::vector<Pt>;

double poly_area(const Poly& p) {
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Pt& u = p[i];
        const Pt& v = p[(i + 1) % p.size()];
        a += u[0] * v[1] - v[0] * u[1];
    }
    return 0.5 * std::abs(a);
}

// Part of p on the side sgn * (a t + b x - c) >= 0.
Poly clip(const Poly& p, double a, double b, double c, double sgn) {
    Poly out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Pt& u = p[i];
        const Pt& v = p[(i + 1) % p.size()];
        const double du = sgn * (a * u[0] + b * u[1] - c);
        const double dv = sgn * (a * v[0] + b * v[1] - c);
        if (du >= 0.0) out.push_back(u);
        if ((du > 0.0 && dv < 0.0) || (du < 0.0 && dv > 0.0)) {
            const double s = du / (du - dv);
            out.push_back({u[0] + s * (v[0] - u[0]), u[1] + s * (v[1] - u[1])});
        }
    }
    return out;
}

struct QuadPoint {
    double t, x, w;
};

template <class Fn>
void integrate_segment(const MeshSpec& mesh, int k, int order, Fn&& fn) {
    const auto& [nodes, weights] = gauss_legendre(order);
    for (const Triangle& tri : cell_triangles(mesh, k)) {
        const Pt& p0 = tri[0];
        const Pt& p1 = tri[1];
        const Pt& p2 = tri[2];
        const double det = std::abs((p1[0] - p0[0]) * (p2[1] - p1[1]) - (p1[1] - p0[1]) * (p2[0] - p1[0]));
        for (int a = 0; a < order; ++a) {
            const double u = 0.5 * (nodes[a] + 1.0);
            for (int b = 0; b < order; ++b) {
                const double v = 0.5 * (nodes[b] + 1.0);
                const double t = p0[0] + u * (p1[0] - p0[0]) + u * v * (p2[0] - p1[0]);
                const double x = p0[1] + u * (p1[1] - p0[1]) + u * v * (p2[1] - p1[1]);
                fn(QuadPoint{t, x, 0.25 * weights[a] * weights[b] * u * det});
            }
        }
    }
}

}  // namespace

std::vector<Triangle> cell_triangles(const MeshSpec& mesh, int k) {
    const double xl = mesh.x(k - 1), xr = mesh.x(k + 1);
    std::vector<Poly> polys{{{0.0, xl}, {mesh.T, xl}, {mesh.T, xr}, {0.0, xr}}};
    struct Line {
        double a, b, c;
    };
    std::vector<Line> lines;
    for (int m = 1; m < mesh.control_bands(); ++m) lines.push_back({1.0, 0.0, mesh.t(m)});
    for (int m = 1; m < mesh.wave_bands(); ++m) {
        lines.push_back({1.0, 1.0, mesh.t(m) + xl});
        lines.push_back({1.0, -1.0, mesh.t(m) - xr});
    }
    const double eps = 1e-14 * (1.0 + mesh.T);
    for (const Line& L : lines) {
        std::vector<Poly> next;
        for (const Poly& p : polys) {
            double lo = 0.0, hi = 0.0;
            for (const Pt& q : p) {
                const double d = L.a * q[0] + L.b * q[1] - L.c;
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            if (lo >= -eps || hi <= eps) {
                next.push_back(p);
                continue;
            }
            for (double sgn : {1.0, -1.0}) {
                Poly part = clip(p, L.a, L.b, L.c, sgn);
                if (part.size() >= 3 && poly_area(part) > 1e-20) next.push_back(std::move(part));
            }
        }
        polys = std::move(next);
    }
    std::vector<Triangle> tris;
    for (const Poly& p : polys)
        for (std::size_t i = 1; i + 1 < p.size(); ++i) {
            const Triangle t{p[0], p[i], p[i + 1]};
            const double area = 0.5 * std::abs((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) -
                                               (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]));
            if (area > 1e-20) tris.push_back(t);
        }
    return tris;
}

QResult constitutive_Q(const WaveField& kinematic, const WaveField& dynamic, const ControlSignals& controls,
                       int order) {
    const MeshSpec& mesh = kinematic.mesh();
    QResult res;
    for (int pos = 0; pos < mesh.N; ++pos) {
        const int k = mesh.seg_index(pos);
        const PiecewiseFunc& f = controls.f_phys[mesh.ctrl_pos(k)];
        integrate_segment(mesh, k, order, [&](const QuadPoint& p) {
            const CellLocation c = locate_in_segment(mesh, k, p.t, p.x);
            const StateSample kin = eval_state_in(kinematic, c);
            const StateSample dyn = eval_state_in(dynamic, c);
            const double g = kin.vt - dyn.rx;
            const double h = kin.vx - (dyn.rt - f(p.t));
            const double q = 0.25 * (g * g + h * h);
            res.Q += p.w * q;
            res.g_l2 += p.w * g * g;
            res.h_l2 += p.w * h * h;
            res.sup_q = std::max(res.sup_q, q);
            ++res.points;
        });
    }
    res.g_l2 = std::sqrt(res.g_l2);
    res.h_l2 = std::sqrt(res.h_l2);
    return res;
}

QResult constitutive_Q(const WaveField& field, const ControlSignals& controls, int order) {
    return constitutive_Q(field, field, controls, order);
}

double energy_2d(const WaveField& field, const ControlSignals& controls, int order) {
    const MeshSpec& mesh = field.mesh();
    double total = 0.0;
    for (int pos = 0; pos < mesh.N; ++pos) {
        const int k = mesh.seg_index(pos);
        const PiecewiseFunc& f = controls.f_phys[mesh.ctrl_pos(k)];
        integrate_segment(mesh, k, order, [&](const QuadPoint& p) {
            const StateSample s = eval_state_in(field, locate_in_segment(mesh, k, p.t, p.x));
            const double rtf = s.rt - f(p.t);
            total += p.w * 0.25 * (s.vt * s.vt + s.vx * s.vx + rtf * rtf + s.rx * s.rx);
        });
    }
    return total / mesh.T;
}

OracleResult fd_oracle(const MeshSpec& mesh, const StateData& data, const ControlSignals& controls, int nx) {
    const int N = mesh.N;
    if (nx <= 0 || nx % N != 0) fail(ErrorKind::domain, "oracle grid size must be a positive multiple of N");
    OracleResult res;
    res.nx = nx;
    res.h = 2.0 / nx;
    const double h = res.h;
    res.nt = static_cast<int>(std::ceil(mesh.T / h - 1e-12));
    res.dt = mesh.T / res.nt;
    const double dt = res.dt;
    res.x.resize(nx + 1);
    for (int j = 0; j <= nx; ++j) res.x[j] = -1.0 + h * j;

    std::vector<int> node;
    for (int n = -N; n <= N; n += 2) node.push_back(static_cast<int>(std::lround((mesh.x(n) + 1.0) / h)));
    std::vector<double> mass(nx + 1, h);
    mass[0] = mass[nx] = 0.5 * h;

    auto force = [&](int j, double t) {
        const double lo = std::max(t - 0.5 * dt, 0.0), hi = std::min(t + 0.5 * dt, mesh.T);
        const PiecewiseFunc& u = controls.u_jump[j];
        return (u(hi, Side::left) - u(lo, Side::right)) / (hi - lo);
    };
    auto acc = [&](const std::vector<double>& v, double t) {
        std::vector<double> a(nx + 1);
        for (int j = 1; j < nx; ++j) a[j] = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / h;
        a[0] = (v[1] - v[0]) / h;
        a[nx] = -(v[nx] - v[nx - 1]) / h;
        for (std::size_t j = 0; j < node.size(); ++j) a[node[j]] += force(static_cast<int>(j), t);
        for (int j = 0; j <= nx; ++j) a[j] /= mass[j];
        return a;
    };

    const Func1D r0 = interpolate(data.r0, -1.0, 1.0, 96);
    const Func1D v0 = interpolate(data.v0, -1.0, 1.0, 96);
    const Func1D dr0 = differentiate(r0), dv0 = differentiate(v0);
    std::vector<double> prev(nx + 1), cur(nx + 1), next(nx + 1), older;
    for (int j = 0; j <= nx; ++j) prev[j] = v0(res.x[j]);
    {
        const auto a = acc(prev, 0.0);
        for (int j = 0; j <= nx; ++j) cur[j] = prev[j] + dt * dr0(res.x[j]) + 0.5 * dt * dt * a[j];
    }
    older = prev;
    for (int n = 1; n < res.nt; ++n) {
        const auto a = acc(cur, n * dt);
        for (int j = 0; j <= nx; ++j) next[j] = 2.0 * cur[j] - prev[j] + dt * dt * a[j];
        older = prev;
        prev = cur;
        cur = next;
        for (double v : cur)
            if (!std::isfinite(v) || std::abs(v) > 1e12) fail(ErrorKind::numeric, "finite difference oracle blew up");
    }
    if (res.nt < 2) fail(ErrorKind::domain, "oracle grid too coarse for the horizon");
    res.vT = cur;
    res.vtT.resize(nx + 1);
    for (int j = 0; j <= nx; ++j) res.vtT[j] = (3.0 * cur[j] - 4.0 * prev[j] + older[j]) / (2.0 * dt);

    double ev = 0.0, evt = 0.0, sc = 0.0;
    for (int j = 0; j <= nx; ++j) {
        const double w = (j == 0 || j == nx) ? 0.5 * h : h;
        const double x = res.x[j];
        const double dv = res.vT[j] - data.v1(x);
        const double dvt = res.vtT[j] - data.p1(x);
        ev += w * dv * dv;
        evt += w * dvt * dvt;
        sc += w * (dv0(x) * dv0(x) + dr0(x) * dr0(x));
    }
    res.err_v = std::sqrt(ev);
    res.err_vt = std::sqrt(evt);
    res.scale = std::sqrt(sc);
    return res;
}

GridCheck check_grid(const std::vector<GridRow>& rows, const WaveField& field, const ControlSignals& controls,
                     int nt, int nx) {
    const MeshSpec& mesh = field.mesh();
    if (rows.size() != static_cast<std::size_t>(nt) * nx) fail(ErrorKind::input, "grid size does not match nt * nx");
    GridCheck gc;
    const double cell = mesh.T / (nt - 1) * 2.0 / (nx - 1);
    for (const GridRow& g : rows) {
        const CellLocation c = locate(mesh, g.t, g.x);
        const StateSample s = eval_state_in(field, c);
        gc.max_dv = std::max(gc.max_dv, std::abs(g.v - s.v));
        gc.max_dr = std::max(gc.max_dr, std::abs(g.r - s.r));
        gc.max_dp = std::max(gc.max_dp, std::abs(g.p - s.p));
        gc.max_ds = std::max(gc.max_ds, std::abs(g.s - s.s));
        if (c.seam) continue;
        const double f = controls.f_phys[mesh.ctrl_pos(c.k)](g.t);
        const double gg = s.vt - g.p;
        const double hh = s.vx - (g.s - f);
        const double q = 0.25 * (gg * gg + hh * hh);
        gc.Q += cell * q;
        gc.sup_q = std::max(gc.sup_q, q);
        ++gc.points;
    }
    return gc;
}

double ResidualReport::worst_trace() const {
    return std::max({wave_seam, control_seam, interface_v, interface_r, boundary, initial_v, initial_r, terminal_v,
                     terminal_r, corner});
}

ResidualReport residual_report(const Solution& sol, const StateData& data, const ControlSignals& controls,
                               const VerifyOptions& opts) {
    const MeshSpec& mesh = sol.mesh.spec;
    const WaveField& field = sol.field;
    ResidualReport rep;
    rep.q = constitutive_Q(field, controls, opts.order);
    rep.energy_1d = sol.E;
    rep.energy_2d = energy_2d(field, controls, opts.order);
    rep.energy_rel = std::abs(rep.energy_2d - rep.energy_1d) / std::max(std::abs(rep.energy_1d), 1e-300);

    for (int pos = 0; pos < mesh.N; ++pos) {
        const int k = mesh.seg_index(pos);
        for (int sign : {+1, -1})
            for (int m = 1; m < mesh.wave_bands(); ++m)
                rep.wave_seam = std::max(
                    rep.wave_seam, std::abs(field.wave(sign, k, m).left() - field.wave(sign, k, m - 1).right()));
    }
    for (int n = -mesh.N - 1; n <= mesh.N + 1; ++n) {
        rep.control_seam = std::max(rep.control_seam, std::abs(field.control(n, 0).left()));
        for (int m = 1; m < mesh.control_bands(); ++m)
            rep.control_seam =
                std::max(rep.control_seam, std::abs(field.control(n, m).left() - field.control(n, m - 1).right()));
    }

    const int ns = opts.trace_samples;
    std::vector<double> ts;
    for (int i = 0; i <= ns; ++i) ts.push_back(mesh.T * i / ns);
    for (int m = 0; m <= mesh.wave_bands(); ++m)
        if (mesh.t(m) <= mesh.T) ts.push_back(mesh.t(m));

    for (int n = 2 - mesh.N; n <= mesh.N - 2; n += 2)
        for (double t : ts) {
            const StateSample a = eval_state_in(field, locate_in_segment(mesh, n - 1, t, mesh.x(n)));
            const StateSample b = eval_state_in(field, locate_in_segment(mesh, n + 1, t, mesh.x(n)));
            rep.interface_v = std::max(rep.interface_v, std::abs(a.v - b.v));
            rep.interface_r = std::max(rep.interface_r, std::abs(a.r - b.r));
        }

    const double r0l = data.r0(-1.0), r0r = data.r0(1.0);
    const PiecewiseFunc& uL = controls.u_phys.front();
    const PiecewiseFunc& uR = controls.u_phys.back();
    for (double t : ts)
        for (Side side : {Side::left, Side::right}) {
            const double l = eval_state_in(field, locate_in_segment(mesh, 1 - mesh.N, t, -1.0)).r;
            const double r = eval_state_in(field, locate_in_segment(mesh, mesh.N - 1, t, 1.0)).r;
            rep.boundary = std::max({rep.boundary, std::abs(l - r0l - uL(t, side)), std::abs(r - r0r - uR(t, side))});
        }

    const double c1 = sol.c1;
    auto r1 = [&](double x) { return sol.edges.r1_base(x) + c1; };
    for (int pos = 0; pos < mesh.N; ++pos) {
        const int k = mesh.seg_index(pos);
        for (int i = 0; i <= ns / mesh.N + 1; ++i) {
            const double x = mesh.x(k - 1) + mesh.lambda * i / (ns / mesh.N + 1);
            const StateSample s0 = eval_state_in(field, locate_in_segment(mesh, k, 0.0, x));
            const StateSample s1 = eval_state_in(field, locate_in_segment(mesh, k, mesh.T, x));
            rep.initial_v = std::max(rep.initial_v, std::abs(s0.v - data.v0(x)));
            rep.initial_r = std::max(rep.initial_r, std::abs(s0.r - data.r0(x)));
            rep.terminal_v = std::max(rep.terminal_v, std::abs(s1.v - data.v1(x)));
            rep.terminal_r = std::max(rep.terminal_r, std::abs(s1.r - r1(x)));
        }
    }
    for (double x : {-1.0, 1.0}) {
        const int k = x < 0 ? 1 - mesh.N : mesh.N - 1;
        const StateSample s0 = eval_state_in(field, locate_in_segment(mesh, k, 0.0, x));
        const StateSample s1 = eval_state_in(field, locate_in_segment(mesh, k, mesh.T, x));
        const double u = (x < 0 ? uL : uR)(mesh.T, Side::left);
        rep.corner = std::max({rep.corner, std::abs(s0.v - data.v0(x)), std::abs(s0.r - data.r0(x)),
                               std::abs(s1.v - data.v1(x)), std::abs(s1.r - r1(x)),
                               std::abs(s1.r - data.r0(x) - u)});
    }

    const int nc = mesh.N + 2;
    for (double t : ts)
        for (Side side : {Side::left, Side::right}) {
            Eigen::VectorXd uc(nc), ux(nc);
            for (int c = 0; c < nc; ++c) uc(c) = controls.u_phys[c](t, side);
            for (int j = 0; j <= mesh.N; ++j) ux(j) = controls.u_jump[j](t, side);
            ux(nc - 1) = 0.0;
            rep.zero_sum = std::max(rep.zero_sum, std::abs(uc.sum()));
            rep.jump_consistency = std::max(rep.jump_consistency, (controls.F.F * uc - ux).cwiseAbs().maxCoeff());
        }
    for (int pos = 0; pos < mesh.N; ++pos) {
        const int k = mesh.seg_index(pos);
        rep.gamma_consistency = std::max(
            rep.gamma_consistency, std::abs(controls.u_phys[mesh.ctrl_pos(k)](mesh.T, Side::left) - sol.gamma[pos]));
    }

    if (opts.run_oracle) {
        int nx = opts.oracle_nx;
        if (nx <= 0) nx = ((800 + mesh.N - 1) / mesh.N) * mesh.N;
        rep.oracle = fd_oracle(mesh, data, controls, nx);
        rep.oracle_run = true;
    }
    return rep;
}

}  // namespace rodctl
