#pragma once

#include <utility>
#include <vector>

#include "rodctl/funcalg.hpp"
#include "rodctl/mesh.hpp"

namespace rodctl {

/// Edge waves w+-_{k,m} on (0, tau_{m mod 2}) and edge control maps u_{n,m}.
class WaveField {
public:
    WaveField() = default;
    explicit WaveField(const MeshSpec& mesh);

    [[nodiscard]] const MeshSpec& mesh() const noexcept { return mesh_; }

    [[nodiscard]] const Func1D& wave(int sign, int k, int m) const { return waves_[wave_slot(sign, k, m)]; }
    [[nodiscard]] const Func1D& wave_derivative(int sign, int k, int m) const {
        return dwaves_[wave_slot(sign, k, m)];
    }
    /// n ranges over J_x and J_c, i.e. every integer in [-N-1, N+1].
    [[nodiscard]] const Func1D& control(int n, int m) const { return ctrls_[ctrl_slot(n, m)]; }
    [[nodiscard]] const Func1D& control_derivative(int n, int m) const { return dctrls_[ctrl_slot(n, m)]; }

    void set_wave(int sign, int k, int m, Func1D f);
    void set_control(int n, int m, Func1D f);

    double c1 = 0.0;

private:
    [[nodiscard]] std::size_t wave_slot(int sign, int k, int m) const;
    [[nodiscard]] std::size_t ctrl_slot(int n, int m) const;

    MeshSpec mesh_;
    std::vector<Func1D> waves_, dwaves_, ctrls_, dctrls_;
};

[[nodiscard]] inline std::pair<double, double> to_characteristic(double t, double x) { return {t + x, t - x}; }
[[nodiscard]] inline std::pair<double, double> from_characteristic(double zp, double zm) {
    return {0.5 * (zp + zm), 0.5 * (zp - zm)};
}

/// Locates the cell containing (t, x); ties resolve to the left/lower cell.
struct CellLocation {
    int k = 0;         // segment index in J_s
    int m_plus = 0;    // wave band of w+
    int m_minus = 0;   // wave band of w-
    int m_time = 0;    // control band
    double z_plus = 0.0, z_minus = 0.0, z_time = 0.0;  // local coordinates inside the bands
    bool seam = false;  // on an interface, a characteristic seam or a control seam instant
};

/// Band m with s_m < s <= s_{m+1} (s = 0 maps to band 0); returns local coordinate.
[[nodiscard]] std::pair<int, double> locate_band(const MeshSpec& mesh, double s, int last_band);
[[nodiscard]] CellLocation locate(const MeshSpec& mesh, double t, double x);
/// Same, with the segment fixed; gives one-sided limits on interfaces.
[[nodiscard]] CellLocation locate_in_segment(const MeshSpec& mesh, int k, double t, double x);

struct StateSample {
    double v = 0.0, r = 0.0, p = 0.0, s = 0.0;
    double vt = 0.0, vx = 0.0, rt = 0.0, rx = 0.0, f = 0.0;
};

[[nodiscard]] StateSample eval_state(const WaveField& field, double t, double x);
/// Evaluates inside a known cell (used by cell quadrature to avoid seam ambiguity).
[[nodiscard]] StateSample eval_state_in(const WaveField& field, const CellLocation& cell);

struct GridRow {
    double t, x, v, r, p, s;
    bool seam;
};

[[nodiscard]] std::vector<GridRow> sample_grid(const WaveField& field, int nt, int nx);

}  // namespace rodctl
