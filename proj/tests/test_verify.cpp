#include <doctest.h>

#include <cmath>

#include "common.hpp"
#include "rodctl/errors.hpp"
#include "rodctl/verify.hpp"

using namespace rodctl;

namespace {

const Solution& reference() {
    static const Solution s = optimize(4, 13.0 / 8.0, testdata::cosine_to_rest());
    return s;
}

const ControlSignals& signals() {
    static const ControlSignals cs = stitch_and_recover(reference().mesh.spec, reference().field);
    return cs;
}

// v = x, r = t: every wave linear, no controls.
WaveField unit_strain(const MeshSpec& mesh) {
    WaveField f(mesh);
    for (int k = 1 - mesh.N; k <= mesh.N - 1; k += 2)
        for (int m = 0; m < mesh.wave_bands(); ++m) {
            const double tau = mesh.tau(m % 2);
            f.set_wave(+1, k, m, Func1D::linear(0.0, tau, 0.5 * mesh.z_shift(+1, k, m), 0.5));
            f.set_wave(-1, k, m, Func1D::linear(0.0, tau, -0.5 * mesh.z_shift(-1, k, m), -0.5));
        }
    return f;
}

}  // namespace

TEST_CASE("zero field") {
    const MeshSpec mesh = build_mesh(4, 13.0 / 8.0).spec;
    const WaveField zero(mesh);
    const ControlSignals cs = stitch_and_recover(mesh, zero);
    const QResult q = constitutive_Q(zero, cs);
    CHECK(q.Q == 0.0);
    CHECK(q.sup_q == 0.0);
    CHECK(q.points > 0);
    CHECK(energy_2d(zero, cs) == 0.0);
}

TEST_CASE("cell triangles tile each segment") {
    for (double T : {13.0 / 8.0, 2.3, 3.0}) {
        const MeshSpec mesh = build_mesh(4, T).spec;
        for (int k = -3; k <= 3; k += 2) {
            double area = 0.0, smallest = 1.0;
            for (const Triangle& tr : cell_triangles(mesh, k)) {
                const double a = 0.5 * std::abs((tr[1][0] - tr[0][0]) * (tr[2][1] - tr[0][1]) -
                                                (tr[2][0] - tr[0][0]) * (tr[1][1] - tr[0][1]));
                area += a;
                smallest = std::min(smallest, a);
                for (const auto& p : tr) {
                    CHECK(p[0] >= -1e-14);
                    CHECK(p[0] <= mesh.T + 1e-14);
                    CHECK(p[1] >= mesh.x(k - 1) - 1e-14);
                    CHECK(p[1] <= mesh.x(k + 1) + 1e-14);
                }
            }
            CHECK(area == doctest::Approx(mesh.T * mesh.lambda).epsilon(1e-13));
            CHECK(smallest > 0.0);
        }
    }
}

TEST_CASE("unit strain hold") {
    const MeshSpec mesh = build_mesh(4, 2.3).spec;
    const WaveField f = unit_strain(mesh);
    const StateSample s = eval_state(f, 0.7, 0.35);
    CHECK(s.v == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(s.r == doctest::Approx(0.7).epsilon(1e-14));
    const ControlSignals cs = stitch_and_recover(mesh, f);
    // e = 1/4 (0 + 1 + 1 + 0) over a rod of length 2.
    CHECK(energy_2d(f, cs) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(field_energy(f) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(constitutive_Q(f, cs).Q <= 1e-28);
}

TEST_CASE("optimal solution is constitutively exact") {
    const Solution& s = reference();
    const QResult q = constitutive_Q(s.field, signals());
    CHECK(q.Q <= 1e-9);
    CHECK(q.sup_q <= 1e-12);
    const double e2 = energy_2d(s.field, signals());
    CHECK(std::abs(e2 - s.E) / s.E <= 1e-8);
}

TEST_CASE("corrupting one wave raises Q by the predicted amount") {
    const Solution& s = reference();
    const MeshSpec& mesh = s.mesh.spec;
    // The wave carrying the most energy.
    int best_sign = 0, best_k = 0, best_m = 0;
    double best_E = -1.0;
    for (int sign : {+1, -1})
        for (int k = -3; k <= 3; k += 2)
            for (int m = 0; m < mesh.wave_bands(); ++m) {
                WaveField one(mesh);
                one.set_wave(sign, k, m, s.field.wave(sign, k, m));
                const double E = field_energy(one);
                if (E > best_E) {
                    best_E = E;
                    best_sign = sign;
                    best_k = k;
                    best_m = m;
                }
            }
    REQUIRE(best_E > 0.0);
    WaveField bent = s.field;
    bent.set_wave(best_sign, best_k, best_m, 1.01 * s.field.wave(best_sign, best_k, best_m));
    const QResult q = constitutive_Q(bent, s.field, signals());
    // A single wave has e = w'^2; the perturbation eps w changes g and h by eps w' each, so q = eps^2 w'^2 / 2.
    // Q is an integral while E is a time average.
    const double predicted = 0.5 * 1e-4 * mesh.T * best_E;
    CHECK(q.Q == doctest::Approx(predicted).epsilon(1e-6));
    CHECK(q.Q > 1e4 * constitutive_Q(s.field, signals()).Q);
    CHECK(q.Q > 1e-5);
}

TEST_CASE("residual report of the reference case") {
    VerifyOptions opts;
    const ResidualReport rep = residual_report(reference(), testdata::cosine_to_rest(), signals(), opts);
    CHECK(rep.q.Q <= 1e-9);
    CHECK(rep.energy_rel <= 1e-8);
    CHECK(rep.worst_trace() <= 1e-8);
    CHECK(rep.terminal_v <= 1e-8);
    CHECK(rep.terminal_r <= 1e-8);
    CHECK(rep.zero_sum <= 1e-12);
    CHECK(rep.gamma_consistency <= 1e-10);
    CHECK_FALSE(rep.oracle_run);
}

TEST_CASE("finite-difference oracle") {
    const MeshSpec& mesh = reference().mesh.spec;
    {
        const WaveField zero(mesh);
        const OracleResult o = fd_oracle(mesh, testdata::zero_states(), stitch_and_recover(mesh, zero), 40);
        CHECK(o.err_v == 0.0);
        CHECK(o.err_vt == 0.0);
        for (double v : o.vT) CHECK(v == 0.0);
    }
    CHECK_THROWS_AS((void)fd_oracle(mesh, testdata::cosine_to_rest(), signals(), 42), Error);

    std::vector<double> err;
    // Grids resolving tau0 = 1/8 exactly, plus the nx = 800 run.
    for (int nx : {128, 256, 512, 1024, 800}) {
        const OracleResult o = fd_oracle(mesh, testdata::cosine_to_rest(), signals(), nx);
        CHECK(o.dt <= o.h);
        CHECK(o.x.size() == static_cast<std::size_t>(nx + 1));
        if (nx != 800) err.push_back(o.err_v);
        if (nx == 800) {
            CHECK(o.err_v / o.scale < 1e-2);
            CHECK(o.err_vt / o.scale < 1e-2);
        }
    }
    for (std::size_t j = 1; j < err.size(); ++j) {
        CAPTURE(j);
        CHECK(std::abs(err[j - 1] / err[j] - 4.0) <= 0.5);
    }
}
