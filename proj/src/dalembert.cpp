#include "rodctl/dalembert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <tuple>

#include "rodctl/errors.hpp"

namespace rodctl {

WaveField::WaveField(const MeshSpec& mesh) : mesh_(mesh) {
    const int W = mesh.wave_bands();
    const int D = mesh.control_bands();
    waves_.reserve(2 * mesh.N * W);
    for (int s = 0; s < 2; ++s)
        for (int e = 0; e < mesh.N; ++e)
            for (int m = 0; m < W; ++m) waves_.push_back(Func1D::constant(0.0, mesh.tau(m % 2), 0.0));
    dwaves_ = waves_;
    for (int n = -mesh.N - 1; n <= mesh.N + 1; ++n)
        for (int m = 0; m < D; ++m) ctrls_.push_back(Func1D::constant(0.0, mesh.tau(m % 2), 0.0));
    dctrls_ = ctrls_;
}

std::size_t WaveField::wave_slot(int sign, int k, int m) const {
    const int pos = mesh_.seg_pos(k);
    if ((k + mesh_.N + 1) % 2 != 0 || pos < 0 || pos >= mesh_.N || m < 0 || m >= mesh_.wave_bands()) {
        std::ostringstream os;
        os << "no wave (" << sign << ", " << k << ", " << m << ")";
        fail(ErrorKind::range, os.str());
    }
    return static_cast<std::size_t>(((sign > 0 ? 0 : 1) * mesh_.N + pos) * mesh_.wave_bands() + m);
}

std::size_t WaveField::ctrl_slot(int n, int m) const {
    if (n < -mesh_.N - 1 || n > mesh_.N + 1 || m < 0 || m >= mesh_.control_bands()) {
        std::ostringstream os;
        os << "no control map (" << n << ", " << m << ")";
        fail(ErrorKind::range, os.str());
    }
    return static_cast<std::size_t>((n + mesh_.N + 1) * mesh_.control_bands() + m);
}

void WaveField::set_wave(int sign, int k, int m, Func1D f) {
    const std::size_t slot = wave_slot(sign, k, m);
    dwaves_[slot] = differentiate(f);
    waves_[slot] = std::move(f);
}

void WaveField::set_control(int n, int m, Func1D f) {
    const std::size_t slot = ctrl_slot(n, m);
    dctrls_[slot] = differentiate(f);
    ctrls_[slot] = std::move(f);
}

std::pair<int, double> locate_band(const MeshSpec& mesh, double s, int last_band) {
    int m = 2 * static_cast<int>(std::floor(s / mesh.lambda));
    if (s - (m / 2) * mesh.lambda > mesh.tau0) ++m;
    m = std::clamp(m, 0, last_band);
    while (m > 0 && mesh.t(m) >= s) --m;
    while (m < last_band && mesh.t(m + 1) < s) ++m;
    return {m, s - mesh.t(m)};
}

namespace {

bool near_seam(const MeshSpec& mesh, double s, int last_band) {
    const double tol = 1e-12 * (1.0 + mesh.T);
    for (int m = 1; m <= last_band; ++m)
        if (std::abs(s - mesh.t(m)) <= tol) return true;
    return false;
}

}  // namespace

namespace {

void check_domain(const MeshSpec& mesh, double t, double x) {
    const double tol = 1e-12 * (1.0 + mesh.T);
    if (t < -tol || t > mesh.T + tol || x < -1.0 - tol || x > 1.0 + tol || std::isnan(t) || std::isnan(x)) {
        std::ostringstream os;
        os << "point (" << t << ", " << x << ") outside [0, " << mesh.T << "] x [-1, 1]";
        fail(ErrorKind::range, os.str());
    }
}

}  // namespace

CellLocation locate_in_segment(const MeshSpec& mesh, int k, double t, double x) {
    check_domain(mesh, t, x);
    t = std::clamp(t, 0.0, mesh.T);
    x = std::clamp(x, mesh.x(k - 1), mesh.x(k + 1));
    CellLocation c;
    c.k = k;
    const double sp = t + x - mesh.x(k - 1);
    const double sm = t + mesh.x(k + 1) - x;
    const int W = mesh.wave_bands() - 1;
    std::tie(c.m_plus, c.z_plus) = locate_band(mesh, sp, W);
    std::tie(c.m_minus, c.z_minus) = locate_band(mesh, sm, W);
    std::tie(c.m_time, c.z_time) = locate_band(mesh, t, mesh.control_bands() - 1);
    c.seam = near_seam(mesh, sp, W) || near_seam(mesh, sm, W) || near_seam(mesh, t, mesh.control_bands() - 1);
    return c;
}

CellLocation locate(const MeshSpec& mesh, double t, double x) {
    check_domain(mesh, t, x);
    x = std::clamp(x, -1.0, 1.0);
    const double u = (x + 1.0) / mesh.lambda;
    const int e = std::clamp(static_cast<int>(std::ceil(u)) - 1, 0, mesh.N - 1);
    CellLocation c = locate_in_segment(mesh, 2 * e + 1 - mesh.N, t, x);
    const double un = std::round(u);
    const bool on_interface = std::abs(u - un) <= 1e-12 * mesh.N && un > 0.5 && un < mesh.N - 0.5;
    c.seam = c.seam || on_interface;
    return c;
}

StateSample eval_state_in(const WaveField& field, const CellLocation& c) {
    const Func1D& wp = field.wave(+1, c.k, c.m_plus);
    const Func1D& wm = field.wave(-1, c.k, c.m_minus);
    const double a = field.wave_derivative(+1, c.k, c.m_plus)(c.z_plus);
    const double b = field.wave_derivative(-1, c.k, c.m_minus)(c.z_minus);
    const double wpv = wp(c.z_plus), wmv = wm(c.z_minus);
    StateSample st;
    st.f = field.control_derivative(c.k, c.m_time)(c.z_time);
    st.v = wpv + wmv;
    st.r = wpv - wmv + field.control(c.k, c.m_time)(c.z_time);
    st.vt = a + b;
    st.vx = a - b;
    st.rx = a + b;
    st.rt = a - b + st.f;
    st.p = st.rx;
    st.s = st.rt;
    return st;
}

StateSample eval_state(const WaveField& field, double t, double x) {
    return eval_state_in(field, locate(field.mesh(), t, x));
}

std::vector<GridRow> sample_grid(const WaveField& field, int nt, int nx) {
    if (nt < 2 || nx < 2) fail(ErrorKind::domain, "grid needs at least 2 points per direction");
    const MeshSpec& mesh = field.mesh();
    std::vector<GridRow> rows;
    rows.reserve(static_cast<std::size_t>(nt) * nx);
    for (int i = 0; i < nt; ++i) {
        const double t = (i == nt - 1) ? mesh.T : mesh.T * i / (nt - 1);
        for (int j = 0; j < nx; ++j) {
            const double x = (j == nx - 1) ? 1.0 : -1.0 + 2.0 * j / (nx - 1);
            const CellLocation c = locate(mesh, t, x);
            const StateSample s = eval_state_in(field, c);
            rows.push_back({t, x, s.v, s.r, s.p, s.s, c.seam});
        }
    }
    return rows;
}

}  // namespace rodctl
