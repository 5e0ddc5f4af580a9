#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rodctl/dalembert.hpp"
#include "rodctl/funcalg.hpp"
#include "rodctl/mesh.hpp"

namespace rodctl {

enum class Side { left, right };

/// Function on [breaks.front(), breaks.back()]; piece j lives on (0, breaks[j+1] - breaks[j]).
struct PiecewiseFunc {
    std::vector<double> breaks;
    std::vector<Func1D> pieces;

    /// Left or right limit at t; interior points agree on both sides.
    [[nodiscard]] double operator()(double t, Side side = Side::right) const;
};

struct JumpMatrix {
    Eigen::MatrixXd F, Finv;
};

/// Difference rows f_{n+1} - f_{n-1} for n in J_x and one averaging row 1/(N+2).
[[nodiscard]] JumpMatrix jump_matrix(int N);

struct ControlSignals {
    int N = 0;
    std::vector<double> breaks;         // t_0 .. t_{2M+1}
    std::vector<PiecewiseFunc> u_jump;  // J_x order
    std::vector<PiecewiseFunc> f_jump;
    std::vector<PiecewiseFunc> u_phys;  // J_c order
    std::vector<PiecewiseFunc> f_phys;
    JumpMatrix F;
    double max_seam_jump = 0.0;
};

[[nodiscard]] ControlSignals stitch_and_recover(const MeshSpec& mesh, const WaveField& field, double seam_tol = 1e-8);

}  // namespace rodctl
