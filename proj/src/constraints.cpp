#include "rodctl/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rodctl/errors.hpp"

namespace rodctl {

int UnknownSpace::band(int id) const { return decode(id).m; }

UnknownSpace::Decoded UnknownSpace::decode(int id) const {
    if (id < 0 || id >= size()) fail(ErrorKind::range, "unknown id out of range");
    const int W = mesh_.wave_bands();
    if (id < wave_count()) {
        const int m = id % W;
        const int rest = id / W;
        const int pos = rest % mesh_.N;
        const int sign = (rest / mesh_.N) == 0 ? +1 : -1;
        return {true, sign, mesh_.seg_index(pos), m};
    }
    const int D = mesh_.control_bands();
    const int local = id - wave_count();
    return {false, 0, mesh_.iface_index(local / D), local % D};
}

std::string UnknownSpace::name(int id) const {
    const Decoded d = decode(id);
    std::ostringstream os;
    if (d.wave)
        os << "w" << (d.sign > 0 ? '+' : '-') << "[" << d.index << "," << d.m << "]";
    else
        os << "u[" << d.index << "," << d.m << "]";
    return os.str();
}

AffineExpr::AffineExpr(int parity_, const MeshSpec& mesh, int nparams)
    : parity(parity_), data(Func1D::constant(0.0, mesh.tau(parity_), 0.0)), params(nparams, 0.0) {}

void AffineExpr::add(const AffineExpr& o, double s) {
    if (s == 0.0) return;
    for (const auto& [id, c] : o.terms) {
        double& slot = terms[id];
        slot += s * c;
        if (slot == 0.0) terms.erase(id);
    }
    data.add_scaled(o.data, s);
    for (std::size_t j = 0; j < params.size(); ++j) params[j] += s * o.params[j];
}

// ---------------------------------------------------------------- fixed waves

namespace {

ScalarFn checked(const ScalarFn& f) {
    return [f](double x) {
        if (x < -1.0 - 1e-9 || x > 1.0 + 1e-9) {
            std::ostringstream os;
            os << "trace argument " << x << " left [-1, 1]";
            fail(ErrorKind::invariant, os.str());
        }
        return f(std::clamp(x, -1.0, 1.0));
    };
}

}  // namespace

std::vector<FixedWave> initial_edges(const MeshSpec& mesh, const ScalarFn& v0, const ScalarFn& r0, int degree) {
    const UnknownSpace sp(mesh);
    const ScalarFn v = checked(v0), r = checked(r0);
    std::vector<FixedWave> out;
    for (int pos = 0; pos < mesh.N; ++pos) {
        const int k = mesh.seg_index(pos);
        for (int i = 0; i < 2; ++i) {
            const double len = mesh.tau(i);
            FixedWave wp{+1, k, i, AffineExpr(i, mesh, sp.param_count())};
            const double xp = mesh.x(k - 1) + i * mesh.tau0;
            wp.value.data = interpolate([&](double z) { return 0.5 * (v(xp + z) + r(xp + z)); }, 0.0, len, degree,
                                        Provenance::data);
            FixedWave wm{-1, k, i, AffineExpr(i, mesh, sp.param_count())};
            const double xm = mesh.x(k + 1) - i * mesh.tau0;
            wm.value.data = interpolate([&](double z) { return 0.5 * (v(xm - z) - r(xm - z)); }, 0.0, len, degree,
                                        Provenance::data);
            out.push_back(std::move(wp));
            out.push_back(std::move(wm));
        }
    }
    return out;
}

std::vector<FixedWave> terminal_edges(const MeshSpec& mesh, const ScalarFn& v1, const Func1D& R1, int degree) {
    const UnknownSpace sp(mesh);
    const ScalarFn v = checked(v1);
    const ScalarFn R = checked([&R1](double x) { return R1(x); });
    std::vector<FixedWave> out;
    for (int pos = 0; pos < mesh.N; ++pos) {
        const int k = mesh.seg_index(pos);
        for (int ii = 0; ii < 2; ++ii) {
            const int m = 2 * mesh.M + 1 + ii;
            const int parity = m % 2;
            const double len = mesh.tau(parity);
            FixedWave wp{+1, k, m, AffineExpr(parity, mesh, sp.param_count())};
            const double xp = mesh.x(k - 1) + ii * mesh.tau1;
            wp.value.data = interpolate([&](double z) { return 0.5 * (v(xp + z) + R(xp + z)); }, 0.0, len, degree,
                                        Provenance::data);
            wp.value.params[0] = 0.5;
            wp.value.params[sp.gamma(k)] = -0.5;
            FixedWave wm{-1, k, m, AffineExpr(parity, mesh, sp.param_count())};
            const double xm = mesh.x(k + 1) - ii * mesh.tau1;
            wm.value.data = interpolate([&](double z) { return 0.5 * (v(xm - z) - R(xm - z)); }, 0.0, len, degree,
                                        Provenance::data);
            wm.value.params[0] = -0.5;
            wm.value.params[sp.gamma(k)] = 0.5;
            out.push_back(std::move(wp));
            out.push_back(std::move(wm));
        }
    }
    return out;
}

EdgeData prepare_edges(const MeshSpec& mesh, const StateData& data, int degree) {
    EdgeData e;
    const Func1D p1 = interpolate(data.p1, -1.0, 1.0, degree, Provenance::data);
    e.r1_base = antiderivative(p1, 0.0);
    e.p1_integral = e.r1_base.right();
    e.r0_left = data.r0(-1.0);
    e.r0_right = data.r0(1.0);
    e.initial = initial_edges(mesh, data.v0, data.r0, degree);
    e.terminal = terminal_edges(mesh, data.v1, e.r1_base, degree);
    return e;
}

// ---------------------------------------------------------------- edge rows

std::vector<EdgeRow> assemble_edge_system(const MeshSpec& mesh, const EdgeData& edges) {
    const UnknownSpace sp(mesh);
    const int np = sp.param_count();
    const int N = mesh.N, M = mesh.M;
    std::vector<EdgeRow> rows;

    auto fixed_row = [&](const FixedWave& fw, const char* kind) {
        EdgeRow row;
        std::ostringstream os;
        os << kind << " " << sp.name(sp.wave(fw.sign, fw.k, fw.m));
        row.label = os.str();
        row.step = 1;
        row.expr = AffineExpr(fw.value.parity, mesh, np);
        row.expr.terms[sp.wave(fw.sign, fw.k, fw.m)] = 1.0;
        row.expr.add(fw.value, -1.0);
        rows.push_back(std::move(row));
    };
    for (const auto& fw : edges.initial) fixed_row(fw, "initial");
    for (const auto& fw : edges.terminal) fixed_row(fw, "terminal");

    for (int m = 0; m <= 2 * M; ++m) {
        const int i = m % 2;
        {
            const int k = 1 - N;
            EdgeRow row{"boundary left m=" + std::to_string(m), 2, AffineExpr(i, mesh, np)};
            row.expr.terms[sp.wave(+1, k, m)] = 1.0;
            row.expr.terms[sp.wave(-1, k, m + 2)] = -1.0;
            row.expr.terms[sp.control(-N, m)] = 1.0;
            row.expr.data.add_constant(-edges.r0_left);
            rows.push_back(std::move(row));
        }
        {
            const int k = N - 1;
            EdgeRow row{"boundary right m=" + std::to_string(m), 2, AffineExpr(i, mesh, np)};
            row.expr.terms[sp.wave(+1, k, m + 2)] = 1.0;
            row.expr.terms[sp.wave(-1, k, m)] = -1.0;
            row.expr.terms[sp.control(N, m)] = -1.0;
            row.expr.data.add_constant(-edges.r0_right);
            rows.push_back(std::move(row));
        }
    }

    for (int n = 2 - N; n <= N - 2; n += 2) {
        for (int m = 0; m <= 2 * M; ++m) {
            const int i = m % 2;
            int step = (m <= 1 || m >= 2 * M - 1) ? 3 : 4;
            if (N % 2 == 0 && n == 0) step = 5;
            const std::string where = " n=" + std::to_string(n) + " m=" + std::to_string(m);
            EdgeRow vrow{"interface v" + where, step, AffineExpr(i, mesh, np)};
            vrow.expr.terms[sp.wave(+1, n - 1, m + 2)] = 1.0;
            vrow.expr.terms[sp.wave(-1, n - 1, m)] = 1.0;
            vrow.expr.terms[sp.wave(+1, n + 1, m)] = -1.0;
            vrow.expr.terms[sp.wave(-1, n + 1, m + 2)] = -1.0;
            EdgeRow rrow{"interface r" + where, step, AffineExpr(i, mesh, np)};
            rrow.expr.terms[sp.wave(+1, n - 1, m + 2)] = 1.0;
            rrow.expr.terms[sp.wave(-1, n - 1, m)] = -1.0;
            rrow.expr.terms[sp.wave(+1, n + 1, m)] = -1.0;
            rrow.expr.terms[sp.wave(-1, n + 1, m + 2)] = 1.0;
            rrow.expr.terms[sp.control(n, m)] = -1.0;
            rows.push_back(std::move(vrow));
            rows.push_back(std::move(rrow));
        }
    }

    const long expected = count_report(N, M).Ne;
    if (static_cast<long>(rows.size()) != expected) {
        std::ostringstream os;
        os << "assembled " << rows.size() << " edge rows, expected " << expected;
        fail(ErrorKind::assembly, os.str());
    }
    std::stable_sort(rows.begin(), rows.end(), [](const EdgeRow& a, const EdgeRow& b) { return a.step < b.step; });
    return rows;
}

// ---------------------------------------------------------------- catalogue

FreeVarCatalog free_catalog(const MeshSpec& mesh, CatalogPolicy policy) {
    const UnknownSpace sp(mesh);
    const int N = mesh.N, M = mesh.M;
    FreeVarCatalog c;
    auto& y0 = c.y[0];
    auto& y1 = c.y[1];
    for (int n = 2 - N; n <= N - 2; n += 2)
        for (int m = 1; m <= M - 1; ++m) y0.push_back(sp.control(n, 2 * m));
    if (N % 2 == 1) {
        for (int m = 1; m <= M; ++m) {
            y0.push_back(sp.wave(+1, 0, 2 * m));
            y0.push_back(sp.wave(-1, 0, 2 * m));
        }
    } else {
        if (policy == CatalogPolicy::corrected) {
            y0.push_back(sp.control(0, 0));
            y0.push_back(sp.control(0, 2 * M));
        } else {
            for (int m = 0; m <= 1; ++m) {
                const int band = 2 * m + M;
                if (band <= 2 * M) y0.push_back(sp.control(0, band));
            }
        }
        for (int m = 2; m <= M; ++m) {
            y0.push_back(sp.wave(+1, -1, 2 * m));
            y0.push_back(sp.wave(-1, 1, 2 * m));
        }
    }
    for (int n = 2 - N; n <= N - 2; n += 2)
        for (int m = 1; m <= M - 2; ++m) y1.push_back(sp.control(n, 2 * m + 1));
    if (N % 2 == 1) {
        for (int m = 1; m <= M - 1; ++m) {
            y1.push_back(sp.wave(+1, 0, 2 * m + 1));
            y1.push_back(sp.wave(-1, 0, 2 * m + 1));
        }
    } else {
        for (int m = 0; m <= 1; ++m) y1.push_back(sp.control(0, 1 + 2 * m * (M - 1)));
        for (int m = 2; m <= M - 1; ++m) {
            y1.push_back(sp.wave(+1, -1, 2 * m + 1));
            y1.push_back(sp.wave(-1, 1, 2 * m + 1));
        }
    }
    return c;
}

namespace {

void validate_catalog(const MeshSpec& mesh, const FreeVarCatalog& cat) {
    const UnknownSpace sp(mesh);
    const CountReport cr = count_report(mesh.N, mesh.M);
    const long expect[2] = {cr.Ns0, cr.Ns1};
    std::set<int> seen;
    for (int i = 0; i < 2; ++i) {
        for (int id : cat.y[i]) {
            if (sp.parity(id) != i) {
                std::ostringstream os;
                os << "catalogue entry " << sp.name(id) << " has the wrong parity for y" << i;
                fail(ErrorKind::assembly, os.str());
            }
            if (!seen.insert(id).second) fail(ErrorKind::assembly, "catalogue lists " + sp.name(id) + " twice");
        }
        if (static_cast<long>(cat.y[i].size()) != expect[i]) {
            std::ostringstream os;
            os << "catalogue size mismatch: |y" << i << "| = " << cat.y[i].size() << ", expected " << expect[i];
            fail(ErrorKind::assembly, os.str());
        }
    }
}

struct Eliminator {
    const MeshSpec& mesh;
    UnknownSpace sp;
    std::vector<char> is_free;
    std::vector<char> done;
    std::map<int, AffineExpr> resolved;
    std::vector<std::string> log;
    int pairs = 0;
    int dense = 0;

    Eliminator(const MeshSpec& m, const FreeVarCatalog& cat)
        : mesh(m), sp(m), is_free(sp.size(), 0), done(sp.size(), 0) {
        for (int i = 0; i < 2; ++i)
            for (int id : cat.y[i]) is_free[id] = 1;
    }

    // Replace every resolved dependent unknown in the row by its expression.
    void substitute(AffineExpr& e) const {
        std::vector<std::pair<int, double>> hits;
        for (const auto& [id, c] : e.terms)
            if (!is_free[id] && done[id]) hits.emplace_back(id, c);
        for (const auto& [id, c] : hits) {
            e.terms.erase(id);
            e.add(resolved.at(id), c);
        }
    }

    std::vector<int> pending_unknowns(const AffineExpr& e) const {
        std::vector<int> u;
        for (const auto& [id, c] : e.terms)
            if (!is_free[id] && !done[id]) u.push_back(id);
        return u;
    }

    void settle(int id, AffineExpr value, const std::string& why, int step) {
        resolved.emplace(id, std::move(value));
        done[id] = 1;
        std::ostringstream os;
        os << "step " << step << ": " << sp.name(id) << " <- " << why;
        log.push_back(os.str());
    }

    void resolve_single(const EdgeRow& row, AffineExpr e, int id) {
        const double c = e.terms.at(id);
        e.terms.erase(id);
        AffineExpr value = e;
        value.terms.clear();
        value.data *= 0.0;
        std::fill(value.params.begin(), value.params.end(), 0.0);
        value.add(e, -1.0 / c);
        settle(id, std::move(value), row.label, row.step);
    }
};

}  // namespace

LinearReduction eliminate(const MeshSpec& mesh, const std::vector<EdgeRow>& rows_in, const EliminationOptions& opts) {
    if (mesh.M < 2) fail(ErrorKind::controllability, "elimination requires at least two full element crossings");
    LinearReduction red;
    red.mesh = mesh;
    red.space = UnknownSpace(mesh);
    red.catalog = free_catalog(mesh, opts.policy);
    validate_catalog(mesh, red.catalog);
    const UnknownSpace& sp = red.space;
    const int np = sp.param_count();

    std::vector<EdgeRow> rows = rows_in;
    if (opts.shuffle_seed) {
        std::mt19937 rng(*opts.shuffle_seed);
        std::shuffle(rows.begin(), rows.end(), rng);
    }

    Eliminator el(mesh, red.catalog);
    const long dependents = sp.size() - static_cast<long>(red.catalog.y[0].size() + red.catalog.y[1].size());
    if (dependents != static_cast<long>(rows.size())) {
        std::ostringstream os;
        os << rows.size() << " rows for " << dependents << " dependent unknowns";
        fail(ErrorKind::assembly, os.str());
    }

    std::vector<std::size_t> pending(rows.size());
    std::iota(pending.begin(), pending.end(), 0);
    std::vector<AffineExpr> work;
    work.reserve(rows.size());
    for (const auto& r : rows) work.push_back(r.expr);

    while (!pending.empty()) {
        bool progress = false;
        std::vector<std::size_t> still;
        for (std::size_t idx : pending) {
            el.substitute(work[idx]);
            const auto u = el.pending_unknowns(work[idx]);
            if (u.size() == 1) {
                el.resolve_single(rows[idx], work[idx], u[0]);
                progress = true;
            } else if (u.empty()) {
                // redundant row; verified by the residual check
                progress = true;
            } else {
                still.push_back(idx);
            }
        }
        pending.swap(still);
        if (progress || pending.empty()) continue;

        // Two rows sharing the same two open unknowns form a 2x2 block.
        std::map<std::pair<int, int>, std::size_t> by_pair;
        bool paired = false;
        for (std::size_t idx : pending) {
            const auto u = el.pending_unknowns(work[idx]);
            if (u.size() != 2) continue;
            const auto key = std::make_pair(u[0], u[1]);
            auto it = by_pair.find(key);
            if (it == by_pair.end()) {
                by_pair.emplace(key, idx);
                continue;
            }
            const AffineExpr& e1 = work[it->second];
            const AffineExpr& e2 = work[idx];
            const double a11 = e1.terms.at(u[0]), a12 = e1.terms.at(u[1]);
            const double a21 = e2.terms.at(u[0]), a22 = e2.terms.at(u[1]);
            const double det = a11 * a22 - a12 * a21;
            if (det == 0.0) continue;
            AffineExpr r1 = e1, r2 = e2;
            r1.terms.erase(u[0]);
            r1.terms.erase(u[1]);
            r2.terms.erase(u[0]);
            r2.terms.erase(u[1]);
            AffineExpr x0(e1.parity, mesh, np), x1(e1.parity, mesh, np);
            x0.add(r1, -a22 / det);
            x0.add(r2, a12 / det);
            x1.add(r1, a21 / det);
            x1.add(r2, -a11 / det);
            const std::string why = rows[it->second].label + " & " + rows[idx].label;
            el.settle(u[0], std::move(x0), why, rows[idx].step);
            el.settle(u[1], std::move(x1), why, rows[idx].step);
            ++el.pairs;
            paired = true;
            break;
        }
        if (paired) continue;

        // Dense block for whatever remains coupled.
        std::vector<int> open;
        for (std::size_t idx : pending)
            for (int id : el.pending_unknowns(work[idx])) open.push_back(id);
        std::sort(open.begin(), open.end());
        open.erase(std::unique(open.begin(), open.end()), open.end());
        if (open.size() != pending.size()) {
            std::ostringstream os;
            os << "singular pivot: " << pending.size() << " rows left for " << open.size()
               << " unknowns, first row '" << rows[pending.front()].label << "'";
            fail(ErrorKind::numeric, os.str());
        }
        const int r = static_cast<int>(open.size());
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(r, r);
        std::vector<AffineExpr> rest;
        for (int a = 0; a < r; ++a) {
            AffineExpr e = work[pending[a]];
            for (int b = 0; b < r; ++b) {
                auto it = e.terms.find(open[b]);
                if (it != e.terms.end()) {
                    C(a, b) = it->second;
                    e.terms.erase(it);
                }
            }
            rest.push_back(std::move(e));
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(C);
        if (!lu.isInvertible()) {
            std::ostringstream os;
            os << "singular pivot block of size " << r << " starting at row '" << rows[pending.front()].label << "'";
            fail(ErrorKind::numeric, os.str());
        }
        const Eigen::MatrixXd Ci = lu.inverse();
        for (int b = 0; b < r; ++b) {
            AffineExpr x(rest[0].parity, mesh, np);
            for (int a = 0; a < r; ++a) x.add(rest[a], -Ci(b, a));
            el.settle(open[b], std::move(x), "dense block", rows[pending.front()].step);
        }
        ++el.dense;
        pending.clear();
    }

    for (int id = 0; id < sp.size(); ++id) {
        if (el.is_free[id]) {
            AffineExpr e(sp.parity(id), mesh, np);
            e.terms[id] = 1.0;
            red.expr.emplace(id, std::move(e));
        } else if (!el.done[id]) {
            fail(ErrorKind::numeric, "unknown " + sp.name(id) + " left unresolved");
        } else {
            red.expr.emplace(id, el.resolved.at(id));
        }
    }
    red.log = std::move(el.log);
    red.pair_pivots = el.pairs;
    red.dense_fallbacks = el.dense;

    const int W = mesh.wave_bands();
    for (int i = 0; i < 2; ++i) {
        ParityBlock& blk = red.block[i];
        std::map<int, int> col;
        for (std::size_t j = 0; j < red.catalog.y[i].size(); ++j) col[red.catalog.y[i][j]] = static_cast<int>(j);
        for (int pos = 0; pos < mesh.N; ++pos) {
            const int k = mesh.seg_index(pos);
            for (int m = i; m < W; m += 2) {
                blk.wave_ids.push_back(sp.wave(+1, k, m));
                blk.wave_ids.push_back(sp.wave(-1, k, m));
            }
        }
        for (int n = -mesh.N; n <= mesh.N; n += 2)
            for (int m = i; m <= 2 * mesh.M; m += 2) blk.control_ids.push_back(sp.control(n, m));
        const int ns = static_cast<int>(red.catalog.y[i].size());
        auto fill = [&](const std::vector<int>& ids, Eigen::MatrixXd& A, Eigen::MatrixXd& Th, std::vector<Func1D>& g) {
            A = Eigen::MatrixXd::Zero(static_cast<int>(ids.size()), ns);
            Th = Eigen::MatrixXd::Zero(static_cast<int>(ids.size()), np);
            g.clear();
            for (std::size_t row = 0; row < ids.size(); ++row) {
                const AffineExpr& e = red.expr.at(ids[row]);
                for (const auto& [id, c] : e.terms) A(static_cast<int>(row), col.at(id)) = c;
                for (int j = 0; j < np; ++j) Th(static_cast<int>(row), j) = e.params[j];
                g.push_back(e.data);
            }
        };
        fill(blk.wave_ids, blk.A, blk.Theta, blk.g);
        fill(blk.control_ids, blk.Au, blk.Thetau, blk.gu);
        for (int id : blk.wave_ids) {
            const int m = sp.band(id);
            blk.plateau.push_back(m >= 2 && m <= 2 * mesh.M);
        }
    }
    return red;
}

namespace {

// Random smooth test functions on (0, tau).
Func1D random_poly(std::mt19937& rng, double tau) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::vector<double> c(5);
    for (double& x : c) x = U(rng);
    return Func1D(0.0, tau, c);
}

}  // namespace

double reduction_residual(const LinearReduction& red, const std::vector<EdgeRow>& rows, unsigned seed, int draws) {
    const UnknownSpace& sp = red.space;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    double worst = 0.0;
    for (int d = 0; d < draws; ++d) {
        std::map<int, Func1D> yv;
        for (int i = 0; i < 2; ++i)
            for (int id : red.catalog.y[i]) yv.emplace(id, random_poly(rng, red.mesh.tau(i)));
        std::vector<double> theta(sp.param_count());
        for (double& t : theta) t = U(rng);
        auto value = [&](int id) {
            const AffineExpr& e = red.expr.at(id);
            Func1D f = e.data;
            for (const auto& [fid, c] : e.terms) f.add_scaled(yv.at(fid), c);
            for (std::size_t j = 0; j < theta.size(); ++j) f.add_constant(e.params[j] * theta[j]);
            return f;
        };
        for (const auto& row : rows) {
            Func1D f = row.expr.data;
            for (const auto& [id, c] : row.expr.terms) f.add_scaled(value(id), c);
            for (std::size_t j = 0; j < theta.size(); ++j) f.add_constant(row.expr.params[j] * theta[j]);
            for (int q = 0; q <= 8; ++q) worst = std::max(worst, std::abs(f(f.length() * q / 8.0)));
        }
    }
    return worst;
}

// ---------------------------------------------------------------- vertex links

namespace {

struct Link {
    int x;   // starts its band: evaluated at 0
    int y;   // ends its band: evaluated at tau; -1 for a zero condition
    int group;
    bool extra;
};

std::vector<Link> link_list(const MeshSpec& mesh, const UnknownSpace& sp) {
    const int N = mesh.N, M = mesh.M;
    std::vector<Link> L;
    auto link = [&](int x, int y, bool extra) { L.push_back({x, y, sp.parity(y), extra}); };
    for (int n = 2 - N; n <= N - 2; n += 2)
        for (int m = 2; m <= 2 * M - 1; ++m) link(sp.control(n, m), sp.control(n, m - 1), false);
    if (N % 2 == 1) {
        for (int m = 2; m <= 2 * M + 1; ++m) {
            link(sp.wave(+1, 0, m), sp.wave(+1, 0, m - 1), false);
            link(sp.wave(-1, 0, m), sp.wave(-1, 0, m - 1), false);
        }
        for (int n = 2 - N; n <= N - 2; n += 2) link(sp.control(n, 2 * M), sp.control(n, 2 * M - 1), true);
    } else {
        L.push_back({sp.control(0, 0), -1, 1, false});
        link(sp.control(0, 1), sp.control(0, 0), false);
        link(sp.control(0, 2 * M), sp.control(0, 2 * M - 1), false);
        for (int m = 4; m <= 2 * M + 1; ++m) {
            link(sp.wave(+1, -1, m), sp.wave(+1, -1, m - 1), false);
            link(sp.wave(-1, 1, m), sp.wave(-1, 1, m - 1), false);
        }
        for (int n = 2 - N; n <= N - 2; n += 2)
            if (n != 0) link(sp.control(n, 2 * M), sp.control(n, 2 * M - 1), true);
        link(sp.wave(-1, -1, 2 * M + 1), sp.wave(-1, -1, 2 * M), true);
    }
    return L;
}

}  // namespace

VertexSystem vertex_system(const LinearReduction& red) {
    const MeshSpec& mesh = red.mesh;
    const UnknownSpace& sp = red.space;
    const int np = sp.param_count();
    const auto links = link_list(mesh, sp);
    std::map<int, int> col[2];
    for (int i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < red.catalog.y[i].size(); ++j) col[i][red.catalog.y[i][j]] = static_cast<int>(j);

    VertexSystem vs;
    for (int i = 0; i < 2; ++i) {
        std::vector<const Link*> mine;
        for (const auto& l : links)
            if (l.group == i) mine.push_back(&l);
        VertexGroup& G = vs.group[i];
        const int rows = static_cast<int>(mine.size());
        G.B1 = Eigen::MatrixXd::Zero(rows, static_cast<int>(red.catalog.y[i].size()));
        G.B0 = Eigen::MatrixXd::Zero(rows, static_cast<int>(red.catalog.y[1 - i].size()));
        G.b0 = Eigen::VectorXd::Zero(rows);
        G.P = Eigen::MatrixXd::Zero(rows, np);
        for (int r = 0; r < rows; ++r) {
            const Link& l = *mine[r];
            const AffineExpr& ex = red.expr.at(l.x);
            for (const auto& [id, c] : ex.terms) G.B0(r, col[1 - i].at(id)) = c;
            G.b0(r) = ex.data.left();
            for (int j = 0; j < np; ++j) G.P(r, j) = ex.params[j];
            std::string label = sp.name(l.x) + "(0) = ";
            if (l.y >= 0) {
                const AffineExpr& ey = red.expr.at(l.y);
                for (const auto& [id, c] : ey.terms) G.B1(r, col[i].at(id)) = c;
                G.b0(r) -= ey.data.right();
                for (int j = 0; j < np; ++j) G.P(r, j) -= ey.params[j];
                label += sp.name(l.y) + "(tau)";
            } else {
                label += "0";
            }
            if (l.extra) label += " [terminal integral link]";
            else ++G.listed_rows;
            G.labels.push_back(std::move(label));
        }
    }
    const CountReport cr = count_report(mesh.N, mesh.M);
    if (vs.group[0].listed_rows != cr.Nb0 || vs.group[1].listed_rows != cr.Nb1) {
        std::ostringstream os;
        os << "vertex row counts " << vs.group[0].listed_rows << "/" << vs.group[1].listed_rows << " differ from "
           << cr.Nb0 << "/" << cr.Nb1;
        fail(ErrorKind::assembly, os.str());
    }
    return vs;
}

// ---------------------------------------------------------------- infeasibility

InfeasibilityReport infeasibility_witness(const MeshSpec& mesh, const StateData& data, int degree, double tol) {
    InfeasibilityReport rep;
    if (mesh.M >= 2) return rep;
    const EdgeData e = prepare_edges(mesh, data, degree);
    auto find = [&](const std::vector<FixedWave>& list, int sign, int k, int m) -> const Func1D& {
        for (const auto& fw : list)
            if (fw.sign == sign && fw.k == k && fw.m == m) return fw.value.data;
        fail(ErrorKind::invariant, "missing fixed wave");
    };
    auto oscillation = [](const Func1D& f) {
        double lo = f(f.a()), hi = lo;
        for (int q = 1; q <= 400; ++q) {
            const double v = f(f.a() + f.length() * q / 400.0);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return 0.5 * (hi - lo);
    };
    double scale = 1.0;
    for (const auto& fw : e.initial) scale = std::max(scale, fw.value.data.max_abs_coeff());
    if (mesh.M == 1) {
        // w+_{n-1,3} + w-_{n-1,1} - w+_{n+1,1} - w-_{n+1,3}: every term is fixed by the data.
        for (int n = 2 - mesh.N; n <= mesh.N - 2; n += 2) {
            Func1D r = find(e.terminal, +1, n - 1, 3);
            r += find(e.initial, -1, n - 1, 1);
            r -= find(e.initial, +1, n + 1, 1);
            r -= find(e.terminal, -1, n + 1, 3);
            rep.max_residual = std::max(rep.max_residual, oscillation(r));
            rep.residuals.push_back(std::move(r));
            rep.interfaces.push_back(n);
        }
    } else {
        // M = 0: band 1 is both an initial and a terminal band.
        for (int pos = 0; pos < mesh.N; ++pos) {
            const int k = mesh.seg_index(pos);
            for (int sign : {+1, -1}) {
                Func1D r = find(e.initial, sign, k, 1) - find(e.terminal, sign, k, 1);
                rep.max_residual = std::max(rep.max_residual, oscillation(r));
                rep.residuals.push_back(std::move(r));
                rep.interfaces.push_back(k);
            }
        }
    }
    rep.infeasible = rep.max_residual > tol * scale;
    return rep;
}

std::string reduction_report(const LinearReduction& red) {
    const UnknownSpace& sp = red.space;
    std::ostringstream os;
    os.precision(17);
    os << "N=" << red.mesh.N << " M=" << red.mesh.M << " tau0=" << red.mesh.tau0 << " tau1=" << red.mesh.tau1 << "\n";
    for (int i = 0; i < 2; ++i) {
        os << "y" << i << ":";
        for (int id : red.catalog.y[i]) os << " " << sp.name(id);
        os << "\n";
    }
    os << "pair pivots: " << red.pair_pivots << ", dense blocks: " << red.dense_fallbacks << "\n";
    for (const auto& line : red.log) os << line << "\n";
    for (const auto& [id, e] : red.expr) {
        os << sp.name(id) << " =";
        for (const auto& [fid, c] : e.terms) os << " " << (c >= 0 ? "+" : "") << c << "*" << sp.name(fid);
        os << " + data[deg " << e.data.degree() << ", |c|max " << e.data.max_abs_coeff() << "]";
        if (e.params[0] != 0.0) os << " " << (e.params[0] >= 0 ? "+" : "") << e.params[0] << "*c1";
        for (std::size_t j = 1; j < e.params.size(); ++j)
            if (e.params[j] != 0.0)
                os << " " << (e.params[j] >= 0 ? "+" : "") << e.params[j] << "*gamma["
                   << red.mesh.seg_index(static_cast<int>(j) - 1) << "]";
        os << "\n";
    }
    return os.str();
}

}  // namespace rodctl
