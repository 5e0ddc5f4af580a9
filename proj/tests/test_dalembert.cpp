#include <doctest.h>

#include <cmath>
#include <random>

#include "common.hpp"
#include "rodctl/dalembert.hpp"
#include "rodctl/errors.hpp"
#include "rodctl/optimizer.hpp"
#include "rodctl/verify.hpp"

using namespace rodctl;

namespace {

const Solution& reference() {
    static const Solution s = optimize(4, 13.0 / 8.0, testdata::cosine_to_rest());
    return s;
}

}  // namespace

TEST_CASE("characteristic coordinates") {
    CHECK(to_characteristic(0.0, 0.0) == std::pair{0.0, 0.0});
    CHECK(to_characteristic(1.0, 0.5) == std::pair{1.5, 0.5});
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> U(-(1 << 20), 1 << 20);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double t = std::ldexp(U(rng), -20), x = std::ldexp(U(rng), -20);
        const auto [zp, zm] = to_characteristic(t, x);
        const auto [t2, x2] = from_characteristic(zp, zm);
        worst = std::max({worst, std::abs(t2 - t), std::abs(x2 - x)});
    }
    CHECK(worst == 0.0);
}

TEST_CASE("zero and constant fields") {
    const MeshSpec mesh = build_mesh(4, 13.0 / 8.0).spec;
    const WaveField zero(mesh);
    for (double t : {0.0, 0.3, 1.625})
        for (double x : {-1.0, -0.2, 0.5, 1.0}) {
            const StateSample s = eval_state(zero, t, x);
            CHECK(s.v == 0.0);
            CHECK(s.r == 0.0);
            CHECK(s.p == 0.0);
            CHECK(s.s == 0.0);
        }
    for (const auto& row : sample_grid(zero, 5, 7)) CHECK((row.v == 0.0 && row.r == 0.0 && row.p == 0.0 && row.s == 0.0));

    WaveField half(mesh);
    for (int k = -3; k <= 3; k += 2)
        for (int m = 0; m < mesh.wave_bands(); ++m) {
            half.set_wave(+1, k, m, Func1D::constant(0.0, mesh.tau(m % 2), 0.5));
            half.set_wave(-1, k, m, Func1D::constant(0.0, mesh.tau(m % 2), 0.5));
        }
    for (double t : {0.0, 0.7, 1.625})
        for (double x : {-1.0, 0.1, 0.9}) {
            const StateSample s = eval_state(half, t, x);
            CHECK(s.v == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(std::abs(s.r) <= 1e-15);
        }
}

TEST_CASE("grid includes the corners") {
    const WaveField& f = reference().field;
    const auto rows = sample_grid(f, 9, 11);
    CHECK(rows.front().t == 0.0);
    CHECK(rows.front().x == -1.0);
    CHECK(rows.back().t == f.mesh().T);
    CHECK(rows.back().x == 1.0);
    CHECK_THROWS_AS((void)sample_grid(f, 1, 5), Error);
}

TEST_CASE("optimal field reproduces the initial and terminal states") {
    const WaveField& f = reference().field;
    const StateSample s = eval_state(f, 0.0, 0.3);
    CHECK(std::abs(s.v - std::cos(0.9)) <= 1e-8);
    CHECK(std::abs(s.r + std::cos(0.9)) <= 1e-8);
    double vmax = 0.0;
    for (const auto& row : sample_grid(f, 17, 201))
        if (row.t == f.mesh().T) vmax = std::max(vmax, std::abs(row.v));
    CHECK(vmax <= 1e-8);
}

TEST_CASE("interface and seam ownership") {
    const MeshSpec mesh = reference().field.mesh();
    const CellLocation on = locate(mesh, 0.3, 0.0);
    CHECK(on.k == -1);
    CHECK(on.seam);
    const CellLocation inside = locate(mesh, 0.3, 0.2);
    CHECK(inside.k == 1);
    const CellLocation at_seam = locate(mesh, mesh.t(1), 0.2);
    CHECK(at_seam.m_time == 0);
    CHECK(at_seam.seam);
    CHECK_THROWS_AS((void)locate(mesh, -0.1, 0.0), Error);
    CHECK_THROWS_AS((void)locate(mesh, 0.1, 1.5), Error);
}

TEST_CASE("property: wave equation inside cells") {
    const WaveField& f = reference().field;
    const MeshSpec& mesh = f.mesh();
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> Ut(0.01, mesh.T - 0.01), Ux(-0.99, 0.99);
    const double h = 2e-3;
    int probed = 0;
    double worst = 0.0;
    for (int i = 0; i < 400 && probed < 60; ++i) {
        const double t = Ut(rng), x = Ux(rng);
        const CellLocation c = locate(mesh, t, x);
        bool same = true;
        for (double dt : {-h, 0.0, h})
            for (double dx : {-h, 0.0, h}) {
                const CellLocation d = locate(mesh, t + dt, x + dx);
                same = same && d.k == c.k && d.m_plus == c.m_plus && d.m_minus == c.m_minus;
            }
        if (!same) continue;
        ++probed;
        auto v = [&](double tt, double xx) { return eval_state_in(f, locate_in_segment(mesh, c.k, tt, xx)).v; };
        const double vtt = (v(t + h, x) - 2 * v(t, x) + v(t - h, x)) / (h * h);
        const double vxx = (v(t, x + h) - 2 * v(t, x) + v(t, x - h)) / (h * h);
        worst = std::max(worst, std::abs(vtt - vxx));
    }
    CHECK(probed >= 30);
    CHECK(worst <= 1e-3);
}

TEST_CASE("property: continuity and boundary traces of the optimal field") {
    const Solution& s = reference();
    const ControlSignals cs = stitch_and_recover(s.mesh.spec, s.field);
    const ResidualReport rep = residual_report(s, testdata::cosine_to_rest(), cs);
    CHECK(rep.interface_v <= 1e-8);
    CHECK(rep.interface_r <= 1e-8);
    CHECK(rep.wave_seam <= 1e-8);
    CHECK(rep.control_seam <= 1e-8);
    CHECK(rep.boundary <= 1e-8);
    for (int n = -5; n <= 5; ++n) CHECK(s.field.control(n, 0).left() == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}
