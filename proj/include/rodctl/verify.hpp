#pragma once

#include <array>
#include <vector>

#include "rodctl/controls.hpp"
#include "rodctl/dalembert.hpp"
#include "rodctl/optimizer.hpp"

namespace rodctl {

/// Triangle in the (t, x) plane.
using Triangle = std::array<std::array<double, 2>, 3>;

/// Triangulation of segment k whose triangles never cross a band seam of any wave or control.
[[nodiscard]] std::vector<Triangle> cell_triangles(const MeshSpec& mesh, int k);

struct QResult {
    double Q = 0.0;
    double sup_q = 0.0;
    double g_l2 = 0.0;  // || v_t - r_x ||
    double h_l2 = 0.0;  // || v_x - (r_t - f) ||
    long points = 0;
};

/// Constitutive functional with v taken from `kinematic`, r from `dynamic` and f from the controls.
[[nodiscard]] QResult constitutive_Q(const WaveField& kinematic, const WaveField& dynamic,
                                     const ControlSignals& controls, int order = 12);
[[nodiscard]] QResult constitutive_Q(const WaveField& field, const ControlSignals& controls, int order = 12);

/// (1/T) times the integral of the full energy density over the rectangle.
[[nodiscard]] double energy_2d(const WaveField& field, const ControlSignals& controls, int order = 12);

struct OracleResult {
    int nx = 0, nt = 0;
    double h = 0.0, dt = 0.0;
    std::vector<double> x, vT, vtT;
    double err_v = 0.0;   // L2 norm of v(T) - v1
    double err_vt = 0.0;  // L2 norm of v_t(T) - p1
    double scale = 0.0;   // L2 norm of the initial gradients (v0', r0')
};

/// Explicit leapfrog for the controlled rod; nx must be a multiple of N.
[[nodiscard]] OracleResult fd_oracle(const MeshSpec& mesh, const StateData& data, const ControlSignals& controls,
                                     int nx);

/// Comparison of a sampled grid against a recomputed field.
struct GridCheck {
    double max_dv = 0.0, max_dr = 0.0, max_dp = 0.0, max_ds = 0.0;
    double Q = 0.0;       // quadrature of q with v from the field and r derivatives from the grid
    double sup_q = 0.0;
    long points = 0;
};

[[nodiscard]] GridCheck check_grid(const std::vector<GridRow>& rows, const WaveField& field,
                                   const ControlSignals& controls, int nt, int nx);

struct VerifyOptions {
    int order = 12;
    int trace_samples = 400;
    bool run_oracle = false;
    int oracle_nx = 0;  // 0 picks the smallest multiple of N not below 800
};

struct ResidualReport {
    QResult q;
    double energy_1d = 0.0, energy_2d = 0.0, energy_rel = 0.0;
    double wave_seam = 0.0;      // continuity of every wave across band seams
    double control_seam = 0.0;   // continuity of every control map across seam instants
    double interface_v = 0.0, interface_r = 0.0;
    double boundary = 0.0;       // r(t, +-1) - r0(+-1) - u_{+-(N+1)}(t)
    double initial_v = 0.0, initial_r = 0.0;
    double terminal_v = 0.0, terminal_r = 0.0;
    double corner = 0.0;
    double zero_sum = 0.0;       // sum of physical controls
    double jump_consistency = 0.0;  // F u_c against (u_x, 0)
    double gamma_consistency = 0.0; // u_k(T) against gamma_k
    bool oracle_run = false;
    OracleResult oracle;

    [[nodiscard]] double worst_trace() const;
};

[[nodiscard]] ResidualReport residual_report(const Solution& sol, const StateData& data,
                                             const ControlSignals& controls, const VerifyOptions& opts = {});

}  // namespace rodctl
