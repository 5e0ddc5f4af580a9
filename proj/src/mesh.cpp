#include "rodctl/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rodctl/errors.hpp"

namespace rodctl {

ScaleFactors nondimensionalize(double L, double rho, double kappa, double T_physical) {
    if (!(L > 0.0) || !(rho > 0.0) || !(kappa > 0.0))
        fail(ErrorKind::domain, "L, rho and kappa must be positive");
    ScaleFactors s;
    s.tau_star = std::sqrt(L * L * rho / kappa);
    s.length_scale = L;
    s.potential_scale = kappa * s.tau_star;
    s.T = T_physical / s.tau_star;
    return s;
}

CountReport count_report(int N, int M) {
    CountReport c;
    c.Ne = 4L * M * N + 10L * N;
    c.Nw = 2L * (2 * M + 3) * N;
    c.Nu = (2L * M + 1) * (N + 1);
    c.Nv = c.Nw + c.Nu;
    c.Ns = c.Nv - c.Ne;
    c.Ns0 = 1L * M * N + M - N + 1;
    c.Ns1 = 1L * M * N + M - 2 * N;
    c.Nb1 = 1L * M * N + M - N + 1;
    c.Nb0 = (N % 2) ? c.Nb1 : c.Nb1 - 1;
    return c;
}

IndexCatalog index_catalog(int N, int M) {
    IndexCatalog ic;
    for (int k = 1 - N; k <= N - 1; k += 2) ic.Js.push_back(k);
    for (int n = -N; n <= N; n += 2) ic.Jx.push_back(n);
    for (int k = -N - 1; k <= N + 1; k += 2) ic.Jc.push_back(k);
    for (int m = 0; m <= 2 * M + 1; ++m) ic.Jt.push_back(m);
    for (int m = 0; m <= 2 * M; ++m) ic.Jd.push_back(m);
    for (int m = 0; m <= 2 * M + 2; ++m) ic.Jw.push_back(m);
    for (int m = 0; m <= 2 * M + 2 * N + 1; ++m) ic.Jz.push_back(m);
    return ic;
}

Mesh build_mesh(int N, double T, const MeshOptions& opts) {
    if (N < 2) fail(ErrorKind::unsupported, "N must be at least 2; the single-element rod is not handled");
    if (!(T > 0.0) || !std::isfinite(T)) fail(ErrorKind::domain, "horizon T must be positive and finite");

    Mesh mesh;
    MeshSpec& s = mesh.spec;
    s.N = N;
    s.T_requested = T;
    s.lambda = 2.0 / N;
    const double ratio = T / s.lambda;
    const double nearest = std::round(ratio);
    if (std::abs(ratio - nearest) <= opts.snap_tol) {
        s.M = static_cast<int>(nearest);
        s.perturbed = true;
        s.perturbation = opts.perturbation * s.lambda;
        s.T = s.M * s.lambda + s.perturbation;
        s.tau0 = s.perturbation;
        std::ostringstream os;
        os << "T is a multiple of lambda; perturbed by " << s.perturbation;
        mesh.warnings.push_back(os.str());
    } else {
        s.M = static_cast<int>(std::floor(ratio));
        s.T = T;
        s.tau0 = T - s.M * s.lambda;
    }
    s.tau1 = s.lambda - s.tau0;

    if (s.M < 2 && !opts.allow_subcritical) {
        std::ostringstream os;
        os << "horizon T = " << T << " is below the critical control time 2*lambda = " << 2.0 * s.lambda
           << "; no control exists for generic initial and terminal states";
        fail(ErrorKind::controllability, os.str());
    }
    if (std::min(s.tau0, s.tau1) < 1e-3 * s.lambda) {
        std::ostringstream os;
        os << "mesh near the uniform limit (tau0 = " << s.tau0 << ", tau1 = " << s.tau1
           << "); thin bands may degrade conditioning";
        mesh.warnings.push_back(os.str());
    }
    mesh.index = index_catalog(N, s.M);
    mesh.counts = count_report(N, s.M);
    return mesh;
}

double delta_zeta(const MeshSpec& mesh, double zeta) {
    const double tol = 1e-12 * (1.0 + mesh.T);
    if (zeta < -tol || zeta > mesh.T + mesh.lambda + tol) {
        std::ostringstream os;
        os << "characteristic coordinate " << zeta << " outside [0, " << mesh.T + mesh.lambda << "]";
        fail(ErrorKind::range, os.str());
    }
    return std::max(0.0, std::min({zeta, mesh.lambda, mesh.T + mesh.lambda - zeta}));
}

double delta_z(const MeshSpec& mesh, int k, int sign, double z) {
    return delta_zeta(mesh, z - mesh.z_origin(sign, k));
}

}  // namespace rodctl
