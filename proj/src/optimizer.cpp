#include "rodctl/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "rodctl/controls.hpp"
#include "rodctl/errors.hpp"

namespace rodctl {

Func1D band_weight(const MeshSpec& mesh, int m) {
    const double tau = mesh.tau(m % 2);
    const double w0 = delta_zeta(mesh, mesh.t(m));
    const double w1 = delta_zeta(mesh, mesh.t(m) + tau);
    return Func1D::linear(0.0, tau, w0, (w1 - w0) / tau);
}

EnergyWeights energy_weights(const LinearReduction& red) {
    EnergyWeights w;
    for (int i = 0; i < 2; ++i)
        for (int id : red.block[i].wave_ids) {
            Func1D g = band_weight(red.mesh, red.space.band(id));
            w.G2[i].push_back(std::move(g));
        }
    return w;
}

ReducedQuadratic reduced_quadratic(const LinearReduction& red, const EnergyWeights& w, double tol) {
    ReducedQuadratic rq;
    const double lambda = red.mesh.lambda;
    for (int i = 0; i < 2; ++i) {
        const ParityBlock& blk = red.block[i];
        const Eigen::MatrixXd& A = blk.A;
        const int ns = static_cast<int>(A.cols());
        rq.K[i] = lambda * A.transpose() * A;
        const double tau = red.mesh.tau(i);
        const double scale = 1.0 + rq.K[i].cwiseAbs().maxCoeff();
        for (int q = 0; q <= 6; ++q) {
            const double z = tau * q / 6.0;
            Eigen::VectorXd g2(A.rows());
            for (int r = 0; r < A.rows(); ++r) g2(r) = w.G2[i][r](z);
            const Eigen::MatrixXd lhs = A.transpose() * g2.asDiagonal() * A;
            rq.identity_error = std::max(rq.identity_error, (lhs - rq.K[i]).cwiseAbs().maxCoeff() / scale);
        }
        rq.G[i].assign(ns, Func1D::constant(0.0, tau, 0.0));
        for (int r = 0; r < A.rows(); ++r)
            for (int j = 0; j < ns; ++j)
                if (A(r, j) != 0.0) rq.G[i][j].add_scaled(blk.g[r], lambda * A(r, j));
        rq.q[i].clear();
        for (const auto& G : rq.G[i]) rq.q[i].push_back(differentiate(G));
    }
    if (rq.identity_error > tol) {
        std::ostringstream os;
        os << "energy weight identity violated by " << rq.identity_error;
        fail(ErrorKind::invariant, os.str());
    }
    return rq;
}

std::vector<Func1D> particular_solution(const ReducedQuadratic& rq, int parity) {
    const Eigen::MatrixXd& K = rq.K[parity];
    const auto& G = rq.G[parity];
    const int ns = static_cast<int>(K.rows());
    if (ns == 0) return {};
    const double tau = G.front().b();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (!lu.isInvertible()) fail(ErrorKind::numeric, "reduced energy matrix K is singular");
    const Eigen::MatrixXd Kinv = lu.inverse();
    std::vector<Func1D> R;
    for (int j = 0; j < ns; ++j) {
        Func1D r = G[j];
        r.add_constant(-G[j].left());
        r.add_scaled(Func1D::linear(0.0, tau, 0.0, rq.q[parity][j].left()), -1.0);
        R.push_back(std::move(r));
    }
    std::vector<Func1D> P(ns, Func1D::constant(0.0, tau, 0.0));
    for (int a = 0; a < ns; ++a)
        for (int b = 0; b < ns; ++b)
            if (Kinv(a, b) != 0.0) P[a].add_scaled(R[b], -Kinv(a, b));
    return P;
}

Constants solve_constants(const LinearReduction& red, const ReducedQuadratic& rq, const std::vector<Func1D> P[2],
                          const VertexSystem& vs, const EdgeData& edges, const ConstantsOptions& opts) {
    const MeshSpec& mesh = red.mesh;
    const int n[2] = {static_cast<int>(red.catalog.y[0].size()), static_cast<int>(red.catalog.y[1].size())};
    const int np = red.space.param_count();
    const int a_off[2] = {0, 2 * n[0]};
    const int b_off[2] = {n[0], 2 * n[0] + n[1]};
    const int th = 2 * n[0] + 2 * n[1];
    const int nx = th + np;
    const int m0 = static_cast<int>(vs.group[0].b0.size());
    const int m1 = static_cast<int>(vs.group[1].b0.size());
    const int nc = m0 + m1 + 1 + (opts.frozen_c1 ? 1 : 0);
    const int nk = nx + nc;

    Eigen::MatrixXd Kkt = Eigen::MatrixXd::Zero(nk, nk);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nk);
    for (int i = 0; i < 2; ++i) {
        const double tau = mesh.tau(i);
        const Eigen::MatrixXd H = tau * rq.K[i];
        for (int u : {a_off[i], b_off[i]})
            for (int v : {a_off[i], b_off[i]}) Kkt.block(u, v, n[i], n[i]) = H;
        for (int j = 0; j < n[i]; ++j) {
            const double c = tau * rq.q[i][j].left();
            rhs(a_off[i] + j) = -c;
            rhs(b_off[i] + j) = -c;
        }
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nc, nx);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(nc);
    int row = 0;
    for (int i = 0; i < 2; ++i) {
        const VertexGroup& G = vs.group[i];
        const int o = 1 - i;
        Eigen::VectorXd Ptau(n[i]);
        for (int j = 0; j < n[i]; ++j) Ptau(j) = P[i][j].right();
        for (int r = 0; r < G.b0.size(); ++r, ++row) {
            L.block(row, a_off[i], 1, n[i]) = mesh.tau(i) * G.B1.row(r);
            L.block(row, b_off[o], 1, n[o]) = mesh.tau(o) * G.B0.row(r);
            L.block(row, th, 1, np) = -G.P.row(r);
            d(row) = G.b0(r) - G.B1.row(r).dot(Ptau);
        }
    }
    L(row, th) = 2.0;
    for (int j = 1; j < np; ++j) L(row, th + j) = 1.0;
    d(row) = edges.r0_left + edges.r0_right - edges.p1_integral;
    ++row;
    if (opts.frozen_c1) {
        L(row, th) = 1.0;
        d(row) = *opts.frozen_c1;
    }
    Kkt.block(0, nx, nx, nc) = L.transpose();
    Kkt.block(nx, 0, nc, nx) = L;
    rhs.tail(nc) = d;

    Eigen::MatrixXd S = Kkt;
    Eigen::VectorXd srhs = rhs;
    for (int r = 0; r < nk; ++r) {
        const double s = S.row(r).cwiseAbs().maxCoeff();
        if (s > 0.0) {
            S.row(r) /= s;
            srhs(r) /= s;
        }
    }
    Constants out;
    out.size = nk;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    lu.setThreshold(opts.rank_tol);
    out.rank = static_cast<int>(lu.rank());
    out.deficiency = nk - out.rank;
    Eigen::VectorXd sol;
    if (out.deficiency == 0) {
        sol = lu.solve(srhs);
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(S);
        cod.setThreshold(opts.rank_tol);
        sol = cod.solve(srhs);
    }
    out.residual = (Kkt * sol - rhs).cwiseAbs().maxCoeff() / (1.0 + rhs.cwiseAbs().maxCoeff());
    if (!sol.allFinite() || out.residual > opts.residual_tol) {
        std::ostringstream os;
        os << "optimality system is inconsistent (residual " << out.residual << ", rank " << out.rank << " of "
           << nk << ")";
        fail(ErrorKind::numeric, os.str());
    }
    for (int i = 0; i < 2; ++i) {
        out.alpha[i] = sol.segment(a_off[i], n[i]);
        out.beta[i] = sol.segment(b_off[i], n[i]);
    }
    out.theta = sol.segment(th, np);
    out.h[0] = sol.segment(nx, m0);
    out.h[1] = sol.segment(nx + m0, m1);
    out.mu = sol(nx + m0 + m1);
    return out;
}

WaveField assemble_field(const LinearReduction& red, const std::vector<Func1D> y[2], const Eigen::VectorXd& theta) {
    const MeshSpec& mesh = red.mesh;
    const UnknownSpace& sp = red.space;
    WaveField field(mesh);
    std::vector<std::vector<Func1D>> ux(mesh.N + 1, std::vector<Func1D>(mesh.control_bands()));
    for (int i = 0; i < 2; ++i) {
        const ParityBlock& blk = red.block[i];
        auto value = [&](const Eigen::MatrixXd& A, const Eigen::MatrixXd& Th, const std::vector<Func1D>& g, int r) {
            Func1D f = g[r];
            for (int j = 0; j < A.cols(); ++j)
                if (A(r, j) != 0.0) f.add_scaled(y[i][j], A(r, j));
            f.add_constant(Th.row(r).dot(theta));
            return f;
        };
        for (std::size_t r = 0; r < blk.wave_ids.size(); ++r) {
            const auto d = sp.decode(blk.wave_ids[r]);
            field.set_wave(d.sign, d.index, d.m, value(blk.A, blk.Theta, blk.g, static_cast<int>(r)));
        }
        for (std::size_t r = 0; r < blk.control_ids.size(); ++r) {
            const auto d = sp.decode(blk.control_ids[r]);
            Func1D f = value(blk.Au, blk.Thetau, blk.gu, static_cast<int>(r));
            ux[mesh.iface_pos(d.index)][d.m] = f;
            field.set_control(d.index, d.m, std::move(f));
        }
    }
    const JumpMatrix J = jump_matrix(mesh.N);
    for (int m = 0; m < mesh.control_bands(); ++m)
        for (int c = 0; c < mesh.N + 2; ++c) {
            Func1D f = Func1D::constant(0.0, mesh.tau(m % 2), 0.0);
            for (int j = 0; j <= mesh.N; ++j) f.add_scaled(ux[j][m], J.Finv(c, j));
            field.set_control(mesh.ctrl_index(c), m, std::move(f));
        }
    field.c1 = theta.size() > 0 ? theta(0) : 0.0;
    return field;
}

double field_energy(const WaveField& field) {
    const MeshSpec& mesh = field.mesh();
    double total = 0.0;
    for (int m = 0; m < mesh.wave_bands(); ++m) {
        const Func1D w = band_weight(mesh, m);
        for (int pos = 0; pos < mesh.N; ++pos)
            for (int sign : {+1, -1}) total += weighted_energy(field.wave(sign, mesh.seg_index(pos), m), w);
    }
    return total / mesh.T;
}

double energy_of(const LinearReduction& red, const std::vector<Func1D> y[2], const Eigen::VectorXd& theta) {
    return field_energy(assemble_field(red, y, theta));
}

double vertex_residual(const VertexSystem& vs, const std::vector<Func1D> y[2],
                       const Eigen::VectorXd& theta) {
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
        const VertexGroup& G = vs.group[i];
        Eigen::VectorXd yt(y[i].size()), y0(y[1 - i].size());
        for (std::size_t j = 0; j < y[i].size(); ++j) yt(j) = y[i][j].right();
        for (std::size_t j = 0; j < y[1 - i].size(); ++j) y0(j) = y[1 - i][j].left();
        if (G.b0.size() == 0) continue;
        const Eigen::VectorXd r = G.B1 * yt - G.B0 * y0 - G.b0 - G.P * theta;
        worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    return worst;
}

Solution optimize(int N, double T, const StateData& data, const SolveOptions& opts) {
    Solution sol;
    sol.mesh = build_mesh(N, T, opts.mesh);
    const MeshSpec& mesh = sol.mesh.spec;
    if (mesh.M < 2) {
        const InfeasibilityReport rep = infeasibility_witness(mesh, data, opts.degree);
        std::ostringstream os;
        os << "horizon T = " << T << " is below the critical control time 2*lambda = " << 2.0 * mesh.lambda;
        if (rep.infeasible) os << "; interface residual " << rep.max_residual;
        fail(ErrorKind::controllability, os.str());
    }
    sol.edges = prepare_edges(mesh, data, opts.degree);
    const auto rows = assemble_edge_system(mesh, sol.edges);
    sol.reduction = eliminate(mesh, rows, opts.elimination);
    sol.vertices = vertex_system(sol.reduction);
    sol.quadratic = reduced_quadratic(sol.reduction, energy_weights(sol.reduction));
    for (int i = 0; i < 2; ++i) sol.P[i] = particular_solution(sol.quadratic, i);
    sol.constants = solve_constants(sol.reduction, sol.quadratic, sol.P, sol.vertices, sol.edges, opts.constants);

    for (int i = 0; i < 2; ++i) {
        const double tau = mesh.tau(i);
        sol.y[i].clear();
        for (std::size_t j = 0; j < sol.P[i].size(); ++j) {
            const double a = sol.constants.alpha[i](j), b = sol.constants.beta[i](j);
            sol.y[i].push_back(sol.P[i][j] + Func1D::linear(0.0, tau, -b * tau, a + b));
        }
        const Eigen::MatrixXd& K = sol.quadratic.K[i];
        for (int q = 0; q <= 8; ++q) {
            const double z = tau * q / 8.0;
            Eigen::VectorXd ypp(sol.y[i].size()), qp(sol.y[i].size());
            for (std::size_t j = 0; j < sol.y[i].size(); ++j) {
                ypp(j) = differentiate(differentiate(sol.y[i][j]))(z);
                qp(j) = differentiate(sol.quadratic.q[i][j])(z);
            }
            if (ypp.size() > 0)
                sol.euler_lagrange = std::max(sol.euler_lagrange, (K * ypp + qp).cwiseAbs().maxCoeff());
        }
    }
    sol.vertex_residual = vertex_residual(sol.vertices, sol.y, sol.constants.theta);
    sol.field = assemble_field(sol.reduction, sol.y, sol.constants.theta);
    sol.c1 = sol.constants.theta(0);
    sol.gamma.assign(sol.constants.theta.data() + 1, sol.constants.theta.data() + sol.constants.theta.size());
    sol.E = field_energy(sol.field);
    sol.F = mesh.T * sol.E;
    return sol;
}

SweepResult sweep_horizon(int N, const std::vector<double>& Ts, const StateData& data, const SolveOptions& opts,
                          int workers, double monotone_tol) {
    SweepResult res;
    res.rows.resize(Ts.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t j = next++; j < Ts.size(); j = next++) {
            SweepRow& row = res.rows[j];
            row.T_requested = Ts[j];
            try {
                const Solution s = optimize(N, Ts[j], data, opts);
                row.T = s.mesh.spec.T;
                row.M = s.mesh.spec.M;
                row.tau0 = s.mesh.spec.tau0;
                row.E = s.E;
                row.F = s.F;
                row.deficiency = s.constants.deficiency;
            } catch (const Error& e) {
                row.status = e.kind() == ErrorKind::controllability ? "infeasible" : "error";
                row.message = e.what();
            } catch (const std::exception& e) {
                row.status = "error";
                row.message = e.what();
            }
        }
    };
    const int nthreads = std::clamp(workers, 1, std::max(1, static_cast<int>(Ts.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < nthreads; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    const SweepRow* prev = nullptr;
    for (const auto& row : res.rows) {
        if (row.status != "ok") continue;
        if (prev && row.T_requested > prev->T_requested && row.F > prev->F + monotone_tol * (1.0 + prev->F))
            res.monotone = false;
        prev = &row;
    }
    return res;
}

}  // namespace rodctl
