#include "rodctl/controls.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rodctl/errors.hpp"

namespace rodctl {

double PiecewiseFunc::operator()(double t, Side side) const {
    const std::size_t np = pieces.size();
    const double tol = 1e-12 * (1.0 + std::abs(breaks.back()));
    if (t < breaks.front() - tol || t > breaks.back() + tol) fail(ErrorKind::range, "time outside control horizon");
    std::size_t j;
    if (side == Side::right) {
        j = static_cast<std::size_t>(std::upper_bound(breaks.begin(), breaks.end(), t) - breaks.begin());
        j = j == 0 ? 0 : j - 1;
    } else {
        j = static_cast<std::size_t>(std::lower_bound(breaks.begin(), breaks.end(), t) - breaks.begin());
        j = j == 0 ? 0 : j - 1;
    }
    j = std::min(j, np - 1);
    return pieces[j](std::clamp(t - breaks[j], 0.0, pieces[j].b()));
}

JumpMatrix jump_matrix(int N) {
    if (N < 2) fail(ErrorKind::unsupported, "jump matrix needs N >= 2");
    const int n = N + 2;
    JumpMatrix J;
    J.F = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j <= N; ++j) {
        J.F(j, j + 1) = 1.0;
        J.F(j, j) = -1.0;
    }
    J.F.row(N + 1).setConstant(1.0 / n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J.F);
    if (!lu.isInvertible()) fail(ErrorKind::invariant, "jump matrix is singular");
    J.Finv = lu.inverse();
    return J;
}

ControlSignals stitch_and_recover(const MeshSpec& mesh, const WaveField& field, double seam_tol) {
    ControlSignals cs;
    cs.N = mesh.N;
    cs.F = jump_matrix(mesh.N);
    const int D = mesh.control_bands();
    for (int m = 0; m <= D; ++m) cs.breaks.push_back(m == D ? mesh.T : mesh.t(m));

    for (int n = -mesh.N; n <= mesh.N; n += 2) {
        PiecewiseFunc u{cs.breaks, {}}, f{cs.breaks, {}};
        for (int m = 0; m < D; ++m) {
            u.pieces.push_back(field.control(n, m));
            f.pieces.push_back(differentiate(field.control(n, m)));
        }
        double jump = std::abs(u.pieces.front().left());
        for (int m = 1; m < D; ++m)
            jump = std::max(jump, std::abs(u.pieces[m].left() - u.pieces[m - 1].right()));
        cs.max_seam_jump = std::max(cs.max_seam_jump, jump);
        cs.u_jump.push_back(std::move(u));
        cs.f_jump.push_back(std::move(f));
    }
    if (cs.max_seam_jump > seam_tol) {
        std::ostringstream os;
        os << "jump control integrals are discontinuous at a seam by " << cs.max_seam_jump;
        fail(ErrorKind::invariant, os.str());
    }

    const int nc = mesh.N + 2;
    cs.f_phys.assign(nc, PiecewiseFunc{cs.breaks, {}});
    cs.u_phys.assign(nc, PiecewiseFunc{cs.breaks, {}});
    std::vector<double> anchor(nc, 0.0);
    for (int m = 0; m < D; ++m) {
        for (int c = 0; c < nc; ++c) {
            Func1D fc = Func1D::constant(0.0, mesh.tau(m % 2), 0.0);
            for (int j = 0; j <= mesh.N; ++j) fc.add_scaled(cs.f_jump[j].pieces[m], cs.F.Finv(c, j));
            Func1D uc = antiderivative(fc, anchor[c]);
            anchor[c] = uc.right();
            cs.f_phys[c].pieces.push_back(std::move(fc));
            cs.u_phys[c].pieces.push_back(std::move(uc));
        }
    }
    return cs;
}

}  // namespace rodctl
