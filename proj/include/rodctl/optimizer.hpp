#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rodctl/constraints.hpp"
#include "rodctl/dalembert.hpp"
#include "rodctl/mesh.hpp"

namespace rodctl {

/// Per-row energy weight G(z)^2 on a band, for both parity blocks.
struct EnergyWeights {
    std::vector<Func1D> G2[2];
};

[[nodiscard]] Func1D band_weight(const MeshSpec& mesh, int m);
[[nodiscard]] EnergyWeights energy_weights(const LinearReduction& red);

/// T E = sum_i int y_i'^T K_i y_i' + 2 y_i'^T q_i + const.
struct ReducedQuadratic {
    Eigen::MatrixXd K[2];
    std::vector<Func1D> G[2];  // lambda A^T g
    std::vector<Func1D> q[2];  // G'
    double identity_error = 0.0;  // max |A^T G^2 A - lambda A^T A| over sample points
};

[[nodiscard]] ReducedQuadratic reduced_quadratic(const LinearReduction& red, const EnergyWeights& w,
                                                 double tol = 1e-12);

/// P_i = -K_i^{-1} (G_i - G_i(0) - z G_i'(0)).
[[nodiscard]] std::vector<Func1D> particular_solution(const ReducedQuadratic& rq, int parity);

struct ConstantsOptions {
    std::optional<double> frozen_c1;
    double rank_tol = 1e-11;
    double residual_tol = 1e-9;
};

/// y_i = P_i + alpha_i z + beta_i (z - tau_i), solved with theta from the KKT system.
struct Constants {
    Eigen::VectorXd alpha[2], beta[2];
    Eigen::VectorXd h[2];  // vertex multipliers
    Eigen::VectorXd theta;
    double mu = 0.0;       // force balance multiplier
    int rank = 0;
    int size = 0;
    int deficiency = 0;
    double residual = 0.0;
};

[[nodiscard]] Constants solve_constants(const LinearReduction& red, const ReducedQuadratic& rq,
                                        const std::vector<Func1D> P[2], const VertexSystem& vs,
                                        const EdgeData& edges, const ConstantsOptions& opts = {});

/// Rebuilds every wave and control map from the free variables and theta.
[[nodiscard]] WaveField assemble_field(const LinearReduction& red, const std::vector<Func1D> y[2],
                                       const Eigen::VectorXd& theta);

/// E = (1/T) sum of weighted wave energies.
[[nodiscard]] double field_energy(const WaveField& field);

struct SolveOptions {
    int degree = 64;
    MeshOptions mesh;
    EliminationOptions elimination;
    ConstantsOptions constants;
};

struct Solution {
    Mesh mesh;
    EdgeData edges;
    LinearReduction reduction;
    VertexSystem vertices;
    ReducedQuadratic quadratic;
    std::vector<Func1D> P[2], y[2];
    Constants constants;
    WaveField field;
    double c1 = 0.0;
    std::vector<double> gamma;
    double E = 0.0;
    double F = 0.0;  // T E
    double euler_lagrange = 0.0;  // max |(K y' + q)'| over sample points
    double vertex_residual = 0.0;
};

[[nodiscard]] Solution optimize(int N, double T, const StateData& data, const SolveOptions& opts = {});

/// Energy of admissible free variables; y and theta must satisfy the vertex system.
[[nodiscard]] double energy_of(const LinearReduction& red, const std::vector<Func1D> y[2],
                               const Eigen::VectorXd& theta);

/// Residual of the vertex rows for given free variables.
[[nodiscard]] double vertex_residual(const VertexSystem& vs, const std::vector<Func1D> y[2],
                                     const Eigen::VectorXd& theta);

struct SweepRow {
    double T_requested = 0.0;
    double T = 0.0;
    int M = 0;
    double tau0 = 0.0;
    double E = 0.0;
    double F = 0.0;
    int deficiency = 0;
    std::string status = "ok";  // ok | infeasible | error
    std::string message;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool monotone = true;  // F non-increasing over feasible rows
};

/// Solves independent horizons on up to `workers` threads; output order follows Ts.
[[nodiscard]] SweepResult sweep_horizon(int N, const std::vector<double>& Ts, const StateData& data,
                                        const SolveOptions& opts = {}, int workers = 1, double monotone_tol = 1e-9);

}  // namespace rodctl
