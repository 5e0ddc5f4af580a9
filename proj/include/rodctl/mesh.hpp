#pragma once

#include <string>
#include <vector>

namespace rodctl {

struct ScaleFactors {
    double tau_star = 1.0;         // time scale, tau*^2 = L^2 rho / kappa
    double length_scale = 1.0;     // x = L x*
    double potential_scale = 1.0;  // r = kappa tau* r*
    double T = 0.0;                // dimensionless horizon
};

[[nodiscard]] ScaleFactors nondimensionalize(double L, double rho, double kappa, double T_physical);

struct MeshOptions {
    double snap_tol = 1e-12;      // relative to lambda
    double perturbation = 1e-6;   // relative to lambda
    bool allow_subcritical = false;
};

/// Double characteristic mesh on [0, T] x [-1, 1].
struct MeshSpec {
    int N = 0;
    int M = 0;
    double T = 0.0;
    double T_requested = 0.0;
    double lambda = 0.0;
    double tau0 = 0.0;
    double tau1 = 0.0;
    bool perturbed = false;
    double perturbation = 0.0;

    [[nodiscard]] double tau(int parity) const { return parity ? tau1 : tau0; }
    [[nodiscard]] double x(int n) const { return n * lambda / 2.0; }
    /// t_m = j lambda + i tau0 for m = 2j + i; also valid for m = 2M+2 (band starts).
    [[nodiscard]] double t(int m) const { return (m / 2) * lambda + (m % 2) * tau0; }
    [[nodiscard]] double z_origin(int sign, int k) const {
        return sign > 0 ? (k - 1) * lambda / 2.0 : -(k + 1) * lambda / 2.0;
    }
    [[nodiscard]] double z_shift(int sign, int k, int m) const { return z_origin(sign, k) + t(m); }
    [[nodiscard]] int wave_bands() const { return 2 * M + 3; }
    [[nodiscard]] int control_bands() const { return 2 * M + 1; }
    /// Position of k in J_s (0-based); k = 1-N, 3-N, ..., N-1.
    [[nodiscard]] int seg_pos(int k) const { return (k + N - 1) / 2; }
    [[nodiscard]] int seg_index(int pos) const { return 2 * pos + 1 - N; }
    /// Position of n in J_x (0-based); n = -N, 2-N, ..., N.
    [[nodiscard]] int iface_pos(int n) const { return (n + N) / 2; }
    [[nodiscard]] int iface_index(int pos) const { return 2 * pos - N; }
    /// Position of k in J_c (0-based); k = -N-1, 1-N, ..., N+1.
    [[nodiscard]] int ctrl_pos(int k) const { return (k + N + 1) / 2; }
    [[nodiscard]] int ctrl_index(int pos) const { return 2 * pos - N - 1; }
};

struct IndexCatalog {
    std::vector<int> Js, Jx, Jc, Jt, Jd, Jw, Jz;
};

struct CountReport {
    long Ne = 0, Nw = 0, Nu = 0, Nv = 0, Ns = 0, Ns0 = 0, Ns1 = 0, Nb0 = 0, Nb1 = 0;
};

struct Mesh {
    MeshSpec spec;
    IndexCatalog index;
    CountReport counts;
    std::vector<std::string> warnings;
};

[[nodiscard]] CountReport count_report(int N, int M);
[[nodiscard]] IndexCatalog index_catalog(int N, int M);
[[nodiscard]] Mesh build_mesh(int N, double T, const MeshOptions& opts = {});

/// Energy weight of a characteristic line inside segment k; z is the absolute characteristic coordinate.
[[nodiscard]] double delta_z(const MeshSpec& mesh, int k, int sign, double z);
/// Same weight in the shifted coordinate zeta = z - z_origin(sign, k), zeta in [0, T + lambda].
[[nodiscard]] double delta_zeta(const MeshSpec& mesh, double zeta);

}  // namespace rodctl
