#include <doctest.h>

#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "common.hpp"
#include "rodctl/constraints.hpp"
#include "rodctl/errors.hpp"

using namespace rodctl;

namespace {

MeshSpec mesh_of(int N, int M) {
    // T = M lambda + tau0 with tau0 = lambda / 3 keeps both bands well away from the snapping tolerance.
    const double lambda = 2.0 / N;
    return build_mesh(N, M * lambda + lambda / 3.0).spec;
}

const FixedWave& find(const std::vector<FixedWave>& list, int sign, int k, int m) {
    for (const auto& fw : list)
        if (fw.sign == sign && fw.k == k && fw.m == m) return fw;
    FAIL("missing fixed wave");
    return list.front();
}

}  // namespace

TEST_CASE("initial edges of the cosine profile") {
    const MeshSpec mesh = build_mesh(4, 13.0 / 8.0).spec;
    const auto data = testdata::cosine_to_rest();
    const auto init = initial_edges(mesh, data.v0, data.r0, 64);
    CHECK(init.size() == 2u * 2u * 4u);
    double worst = 0.0;
    for (int k = -3; k <= 3; k += 2)
        for (int i = 0; i < 2; ++i) {
            const Func1D& wp = find(init, +1, k, i).value.data;
            const Func1D& wm = find(init, -1, k, i).value.data;
            for (int q = 0; q <= 4; ++q) {
                const double z = mesh.tau(i) * q / 4.0;
                worst = std::max(worst, std::abs(wp(z)));
                const double x = mesh.x(k + 1) - i * mesh.tau0 - z;
                worst = std::max(worst, std::abs(wm(z) - std::cos(3.0 * x)));
            }
        }
    CHECK(worst <= 1e-13);

    const auto zero = testdata::zero_states();
    for (const auto& fw : initial_edges(mesh, zero.v0, zero.r0, 16)) CHECK(fw.value.data.max_abs_coeff() == 0.0);
}

TEST_CASE("terminal edges at rest carry only the constants") {
    const MeshSpec mesh = build_mesh(4, 13.0 / 8.0).spec;
    const UnknownSpace sp(mesh);
    const EdgeData e = prepare_edges(mesh, testdata::cosine_to_rest(), 64);
    CHECK(e.terminal.size() == 16u);
    for (const auto& fw : e.terminal) {
        CHECK(fw.value.data.max_abs_coeff() == 0.0);
        CHECK(fw.value.params[0] == 0.5 * fw.sign);
        CHECK(fw.value.params[sp.gamma(fw.k)] == -0.5 * fw.sign);
        CHECK((fw.m == 2 * mesh.M + 1 || fw.m == 2 * mesh.M + 2));
    }
    CHECK(e.r0_left == doctest::Approx(-std::cos(3.0)));
    CHECK(e.r0_right == doctest::Approx(-std::cos(3.0)));
    CHECK(e.p1_integral == 0.0);
}

TEST_CASE("edge system shape for the reference mesh") {
    const MeshSpec mesh = build_mesh(4, 13.0 / 8.0).spec;
    REQUIRE(mesh.M == 3);
    const UnknownSpace sp(mesh);
    const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::cosine_to_rest(), 64));
    CHECK(rows.size() == 88u);
    CHECK(static_cast<long>(rows.size()) == count_report(4, 3).Ne);
    for (std::size_t r = 1; r < rows.size(); ++r) CHECK(rows[r - 1].step <= rows[r].step);

    int left = 0, right = 0;
    for (const auto& row : rows) {
        if (row.label.rfind("boundary left", 0) == 0) {
            ++left;
            const int m = std::stoi(row.label.substr(row.label.find("m=") + 2));
            CHECK(row.expr.terms.size() == 3u);
            CHECK(row.expr.terms.at(sp.wave(+1, -3, m)) == 1.0);
            CHECK(row.expr.terms.at(sp.wave(-1, -3, m + 2)) == -1.0);
            CHECK(row.expr.terms.at(sp.control(-4, m)) == 1.0);
            CHECK(row.expr.data(0.0) == doctest::Approx(std::cos(3.0)));
        }
        if (row.label.rfind("boundary right", 0) == 0) {
            ++right;
            const int m = std::stoi(row.label.substr(row.label.find("m=") + 2));
            CHECK(row.expr.terms.at(sp.wave(+1, 3, m + 2)) == 1.0);
            CHECK(row.expr.terms.at(sp.wave(-1, 3, m)) == -1.0);
            CHECK(row.expr.terms.at(sp.control(4, m)) == -1.0);
        }
    }
    CHECK(left == 7);
    CHECK(right == 7);
}

TEST_CASE("edge rows have full rank on the dependent unknowns") {
    for (int N = 2; N <= 5; ++N)
        for (int M = 2; M <= 5; ++M) {
            CAPTURE(N);
            CAPTURE(M);
            const MeshSpec mesh = mesh_of(N, M);
            const UnknownSpace sp(mesh);
            const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::zero_states(), 8));
            const FreeVarCatalog cat = free_catalog(mesh);
            std::set<int> fr(cat.y[0].begin(), cat.y[0].end());
            fr.insert(cat.y[1].begin(), cat.y[1].end());
            std::vector<int> dep;
            for (int id = 0; id < sp.size(); ++id)
                if (!fr.count(id)) dep.push_back(id);
            REQUIRE(dep.size() == rows.size());
            Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<int>(rows.size()), static_cast<int>(dep.size()));
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t c = 0; c < dep.size(); ++c) {
                    auto it = rows[r].expr.terms.find(dep[c]);
                    if (it != rows[r].expr.terms.end()) C(static_cast<int>(r), static_cast<int>(c)) = it->second;
                }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
            CHECK(lu.rank() == count_report(N, M).Ne);
        }
}

TEST_CASE("elimination expresses every unknown and satisfies every row") {
    for (int N = 2; N <= 6; ++N)
        for (int M = 2; M <= 4; ++M) {
            CAPTURE(N);
            CAPTURE(M);
            const MeshSpec mesh = mesh_of(N, M);
            const auto rows =
                assemble_edge_system(mesh, prepare_edges(mesh, testdata::random_smooth(10u * N + M), 32));
            const LinearReduction red = eliminate(mesh, rows);
            const CountReport cr = count_report(N, M);
            CHECK(static_cast<long>(red.expr.size()) == cr.Nv);
            CHECK(static_cast<long>(red.catalog.y[0].size()) == cr.Ns0);
            CHECK(static_cast<long>(red.catalog.y[1].size()) == cr.Ns1);
            CHECK(cr.Ns0 + cr.Ns1 + cr.Ne == cr.Nv);
            CHECK(reduction_residual(red, rows, 7u, 10) <= 1e-10);
        }
}

TEST_CASE("zero data gives a purely linear reduction") {
    const MeshSpec mesh = build_mesh(4, 13.0 / 8.0).spec;
    const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::zero_states(), 16));
    const LinearReduction red = eliminate(mesh, rows);
    for (int i = 0; i < 2; ++i) {
        for (const auto& g : red.block[i].g) CHECK(g.max_abs_coeff() == 0.0);
        for (const auto& g : red.block[i].gu) CHECK(g.max_abs_coeff() == 0.0);
    }
    const VertexSystem vs = vertex_system(red);
    CHECK(vs.group[0].b0.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(vs.group[1].b0.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("reduction blocks: support and definiteness") {
    for (int N : {3, 4, 5})
        for (int M : {2, 3, 4}) {
            CAPTURE(N);
            CAPTURE(M);
            const MeshSpec mesh = mesh_of(N, M);
            const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::random_smooth(N + M), 16));
            const LinearReduction red = eliminate(mesh, rows);
            for (int i = 0; i < 2; ++i) {
                const ParityBlock& b = red.block[i];
                REQUIRE(b.A.rows() == static_cast<long>(b.plateau.size()));
                for (int r = 0; r < b.A.rows(); ++r)
                    if (!b.plateau[r]) CHECK(b.A.row(r).lpNorm<Eigen::Infinity>() == 0.0);
                const Eigen::MatrixXd AtA = b.A.transpose() * b.A;
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(AtA);
                CHECK(es.eigenvalues().minCoeff() > 1e-8);
            }
        }
}

TEST_CASE("terminal waves of the reference case") {
    const MeshSpec mesh = build_mesh(4, 13.0 / 8.0).spec;
    const UnknownSpace sp(mesh);
    const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::cosine_to_rest(), 64));
    const LinearReduction red = eliminate(mesh, rows);
    for (int i = 0; i < 2; ++i) {
        const ParityBlock& b = red.block[i];
        for (std::size_t r = 0; r < b.wave_ids.size(); ++r) {
            const auto d = sp.decode(b.wave_ids[r]);
            if (d.m < 2 * mesh.M + 1) continue;
            CHECK(b.g[r].max_abs_coeff() == 0.0);
            CHECK(b.Theta(static_cast<int>(r), 0) == 0.5 * d.sign);
        }
    }
}

TEST_CASE("vertex row counts") {
    {
        const MeshSpec mesh = mesh_of(3, 3);
        const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::zero_states(), 8));
        const VertexSystem vs = vertex_system(eliminate(mesh, rows));
        CHECK(vs.group[0].listed_rows == 10);
        CHECK(vs.group[1].listed_rows == 10);
    }
    {
        const MeshSpec mesh = mesh_of(4, 3);
        const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::zero_states(), 8));
        const VertexSystem vs = vertex_system(eliminate(mesh, rows));
        CHECK(vs.group[0].listed_rows == count_report(4, 3).Nb0);
        CHECK(vs.group[1].listed_rows == count_report(4, 3).Nb1);
        // MN + M - N + 1 = 12 and one fewer for the other parity.
        CHECK(vs.group[1].listed_rows == 12);
        CHECK(vs.group[0].listed_rows == 11);
    }
}

TEST_CASE("shuffled row order reaches the same reduction") {
    const MeshSpec mesh = mesh_of(5, 3);
    const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::random_smooth(4), 24));
    const LinearReduction a = eliminate(mesh, rows);
    for (unsigned seed : {1u, 2u, 3u}) {
        EliminationOptions opts;
        opts.shuffle_seed = seed;
        const LinearReduction b = eliminate(mesh, rows, opts);
        for (int i = 0; i < 2; ++i) {
            CHECK((a.block[i].A - b.block[i].A).lpNorm<Eigen::Infinity>() <= 1e-12);
            CHECK((a.block[i].Theta - b.block[i].Theta).lpNorm<Eigen::Infinity>() <= 1e-12);
            double dg = 0.0;
            for (std::size_t r = 0; r < a.block[i].g.size(); ++r)
                dg = std::max(dg, max_deviation(a.block[i].g[r], [&](double z) { return b.block[i].g[r](z); }, 50));
            CHECK(dg <= 1e-12);
        }
    }
}

TEST_CASE("catalogue as written has a parity clash for odd M") {
    const MeshSpec mesh = mesh_of(4, 3);
    const auto rows = assemble_edge_system(mesh, prepare_edges(mesh, testdata::zero_states(), 8));
    EliminationOptions opts;
    opts.policy = CatalogPolicy::as_written;
    CHECK_THROWS_AS((void)eliminate(mesh, rows, opts), Error);
    CHECK_NOTHROW((void)eliminate(mesh, rows));
}

TEST_CASE("below two crossings the data decide feasibility") {
    MeshOptions sub;
    sub.allow_subcritical = true;
    const MeshSpec m1 = build_mesh(4, 0.9, sub).spec;
    REQUIRE(m1.M == 1);
    CHECK(infeasibility_witness(m1, testdata::cosine_to_rest(), 64).infeasible);
    CHECK_FALSE(infeasibility_witness(m1, testdata::zero_states(), 16).infeasible);
    for (unsigned seed = 1; seed <= 5; ++seed) CHECK(infeasibility_witness(m1, testdata::random_smooth(seed), 32).infeasible);
    CHECK_THROWS_AS((void)build_mesh(4, 0.9), Error);
    CHECK_THROWS_AS((void)eliminate(m1, {}), Error);
}
