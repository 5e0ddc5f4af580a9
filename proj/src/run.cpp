#include "rodctl/run.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace rodctl {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::controllability: return exit_infeasible;
        case ErrorKind::data:
        case ErrorKind::domain:
        case ErrorKind::unsupported:
        case ErrorKind::input: return exit_invalid;
        default: return exit_numeric;
    }
}

int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("RODCTL_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, hw));
    }
    return hw;
}

SolveOptions solve_options(const RunConfig& cfg) {
    SolveOptions o;
    o.degree = cfg.degree;
    o.mesh.snap_tol = cfg.snap_tol;
    o.mesh.perturbation = cfg.perturbation;
    o.constants.rank_tol = cfg.rank_tol;
    o.constants.residual_tol = cfg.residual_tol;
    return o;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& s, const fs::path& path) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) fail(ErrorKind::input, "corrupt number '" + s + "' in " + path.string());
    return v;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::input, "missing artifact " + path.string());
    return in;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::input, "cannot write " + path.string());
    out << text;
}

std::vector<std::string> control_header(const MeshSpec& mesh) {
    std::vector<std::string> h{"t", "side"};
    for (int c = 0; c < mesh.N + 2; ++c) h.push_back("u[" + std::to_string(mesh.ctrl_index(c)) + "]");
    for (int c = 0; c < mesh.N + 2; ++c) h.push_back("f[" + std::to_string(mesh.ctrl_index(c)) + "]");
    for (int j = 0; j <= mesh.N; ++j) h.push_back("du[" + std::to_string(mesh.iface_index(j)) + "]");
    for (int j = 0; j <= mesh.N; ++j) h.push_back("df[" + std::to_string(mesh.iface_index(j)) + "]");
    return h;
}

std::vector<double> control_values(const ControlSignals& cs, double t, Side side) {
    std::vector<double> v;
    for (const auto& u : cs.u_phys) v.push_back(u(t, side));
    for (const auto& f : cs.f_phys) v.push_back(f(t, side));
    for (const auto& u : cs.u_jump) v.push_back(u(t, side));
    for (const auto& f : cs.f_jump) v.push_back(f(t, side));
    return v;
}

json mesh_json(const Mesh& m) {
    const MeshSpec& s = m.spec;
    return {{"N", s.N},         {"M", s.M},           {"T", s.T},       {"T_requested", s.T_requested},
            {"lambda", s.lambda}, {"tau0", s.tau0},     {"tau1", s.tau1}, {"perturbed", s.perturbed},
            {"perturbation", s.perturbation}, {"warnings", m.warnings}};
}

json counts_json(const CountReport& c) {
    return {{"Ne", c.Ne},   {"Nw", c.Nw},   {"Nu", c.Nu},   {"Nv", c.Nv},  {"Ns", c.Ns},
            {"Ns0", c.Ns0}, {"Ns1", c.Ns1}, {"Nb0", c.Nb0}, {"Nb1", c.Nb1}};
}

json scales_json(const RunConfig& cfg) {
    if (!cfg.physical) return json(nullptr);
    const ScaleFactors s = nondimensionalize(cfg.physical->L, cfg.physical->rho, cfg.physical->kappa, cfg.T.front());
    return {{"tau_star", s.tau_star}, {"length_scale", s.length_scale}, {"potential_scale", s.potential_scale},
            {"T", s.T}};
}

json solution_json(const Solution& sol, const ControlSignals& cs) {
    const MeshSpec& mesh = sol.mesh.spec;
    return {{"E", sol.E},
            {"F", sol.F},
            {"c1", sol.c1},
            {"gamma", sol.gamma},
            {"u_terminal_left", cs.u_phys.front()(mesh.T, Side::left)},
            {"u_terminal_right", cs.u_phys.back()(mesh.T, Side::left)},
            {"free_variables", {sol.y[0].size(), sol.y[1].size()}},
            {"vertex_rows", {sol.vertices.group[0].b0.size(), sol.vertices.group[1].b0.size()}},
            {"kkt_size", sol.constants.size},
            {"kkt_rank", sol.constants.rank},
            {"kkt_deficiency", sol.constants.deficiency},
            {"kkt_residual", sol.constants.residual},
            {"euler_lagrange_residual", sol.euler_lagrange},
            {"vertex_residual", sol.vertex_residual},
            {"identity_error", sol.quadratic.identity_error},
            {"pair_pivots", sol.reduction.pair_pivots},
            {"dense_blocks", sol.reduction.dense_fallbacks}};
}

int report_error(const Error& e, std::ostream& log) {
    log << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
}

}  // namespace

std::vector<Check> residual_checks(const ResidualReport& rep, double E) {
    const double trace = 1e-8;
    std::vector<Check> c{{"Q", rep.q.Q, 1e-9 * (1.0 + E)},
                         {"energy_2d_vs_1d", rep.energy_rel, 1e-8},
                         {"wave_seam", rep.wave_seam, trace},
                         {"control_seam", rep.control_seam, trace},
                         {"interface_v", rep.interface_v, trace},
                         {"interface_r", rep.interface_r, trace},
                         {"boundary", rep.boundary, trace},
                         {"initial_v", rep.initial_v, trace},
                         {"initial_r", rep.initial_r, trace},
                         {"terminal_v", rep.terminal_v, trace},
                         {"terminal_r", rep.terminal_r, trace},
                         {"corner", rep.corner, trace},
                         {"controls_zero_sum", rep.zero_sum, trace},
                         {"controls_jump_consistency", rep.jump_consistency, trace},
                         {"terminal_integrals", rep.gamma_consistency, trace}};
    return c;
}

json report_json(const ResidualReport& rep) {
    json j = {{"Q", rep.q.Q},
              {"sup_q", rep.q.sup_q},
              {"g_l2", rep.q.g_l2},
              {"h_l2", rep.q.h_l2},
              {"quadrature_points", rep.q.points},
              {"energy_1d", rep.energy_1d},
              {"energy_2d", rep.energy_2d},
              {"energy_rel", rep.energy_rel},
              {"wave_seam", rep.wave_seam},
              {"control_seam", rep.control_seam},
              {"interface_v", rep.interface_v},
              {"interface_r", rep.interface_r},
              {"boundary", rep.boundary},
              {"initial_v", rep.initial_v},
              {"initial_r", rep.initial_r},
              {"terminal_v", rep.terminal_v},
              {"terminal_r", rep.terminal_r},
              {"corner", rep.corner},
              {"controls_zero_sum", rep.zero_sum},
              {"controls_jump_consistency", rep.jump_consistency},
              {"terminal_integrals", rep.gamma_consistency}};
    if (rep.oracle_run)
        j["oracle"] = {{"nx", rep.oracle.nx},         {"nt", rep.oracle.nt},
                       {"err_v", rep.oracle.err_v},   {"err_vt", rep.oracle.err_vt},
                       {"scale", rep.oracle.scale},   {"rel_vt", rep.oracle.err_vt / rep.oracle.scale}};
    return j;
}

json checks_json(const std::vector<Check>& checks) {
    json arr = json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"pass", c.pass()}});
    return arr;
}

void write_field_csv(const fs::path& path, const std::vector<GridRow>& rows) {
    std::string s = "t,x,v,r,p,s,seam\n";
    for (const auto& r : rows)
        s += fmt(r.t) + "," + fmt(r.x) + "," + fmt(r.v) + "," + fmt(r.r) + "," + fmt(r.p) + "," + fmt(r.s) + "," +
             (r.seam ? "1" : "0") + "\n";
    write_text(path, s);
}

std::vector<GridRow> read_field_csv(const fs::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != "t,x,v,r,p,s,seam") fail(ErrorKind::input, "bad header in " + path.string());
    std::vector<GridRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != 7 || (c[6] != "0" && c[6] != "1")) fail(ErrorKind::input, "corrupt row in " + path.string());
        rows.push_back({parse_number(c[0], path), parse_number(c[1], path), parse_number(c[2], path),
                        parse_number(c[3], path), parse_number(c[4], path), parse_number(c[5], path), c[6] == "1"});
    }
    return rows;
}

void write_controls_csv(const fs::path& path, const MeshSpec& mesh, const ControlSignals& cs, int samples_per_band) {
    const auto header = control_header(mesh);
    std::string s;
    for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
    s += "\n";
    const int D = mesh.control_bands();
    for (int m = 0; m < D; ++m) {
        const double t0 = cs.breaks[m], t1 = cs.breaks[m + 1];
        for (int j = 0; j <= samples_per_band; ++j) {
            const double t = j == samples_per_band ? t1 : t0 + (t1 - t0) * j / samples_per_band;
            std::string side = "-";
            Side sd = Side::right;
            if (j == 0 && m > 0) side = "right";
            if (j == samples_per_band && m < D - 1) {
                side = "left";
                sd = Side::left;
            }
            if (j == samples_per_band && m == D - 1) sd = Side::left;
            s += fmt(t) + "," + side;
            for (double v : control_values(cs, t, sd)) s += "," + fmt(v);
            s += "\n";
        }
    }
    write_text(path, s);
}

double compare_controls_csv(const fs::path& path, const MeshSpec& mesh, const ControlSignals& cs) {
    std::ifstream in = open_in(path);
    const auto header = control_header(mesh);
    std::string line;
    if (!std::getline(in, line) || split(line) != header) fail(ErrorKind::input, "bad header in " + path.string());
    double worst = 0.0;
    long count = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c = split(line);
        if (c.size() != header.size()) fail(ErrorKind::input, "corrupt row in " + path.string());
        const double t = parse_number(c[0], path);
        Side sd;
        if (c[1] == "left") sd = Side::left;
        else if (c[1] == "right" || c[1] == "-") sd = Side::right;
        else fail(ErrorKind::input, "bad side '" + c[1] + "' in " + path.string());
        if (c[1] == "-" && t >= mesh.T) sd = Side::left;
        const auto ref = control_values(cs, t, sd);
        for (std::size_t i = 0; i < ref.size(); ++i)
            worst = std::max(worst, std::abs(parse_number(c[i + 2], path) - ref[i]));
        ++count;
    }
    if (count == 0) fail(ErrorKind::input, "empty controls file " + path.string());
    return worst;
}

int run_solve(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    if (cfg.T.size() != 1) {
        log << "error (data): solve needs a single horizon T; use sweep for lists\n";
        return exit_invalid;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const StateData data = state_data(cfg);
        const Solution sol = optimize(cfg.N, dimensionless_T(cfg, 0), data, solve_options(cfg));
        const auto t1 = std::chrono::steady_clock::now();
        const ControlSignals cs = stitch_and_recover(sol.mesh.spec, sol.field);
        VerifyOptions vo;
        vo.order = cfg.quad_order;
        vo.run_oracle = cfg.run_oracle;
        vo.oracle_nx = cfg.oracle_nx;
        const ResidualReport rep = residual_report(sol, data, cs, vo);
        const auto checks = residual_checks(rep, sol.E);
        const auto t2 = std::chrono::steady_clock::now();

        fs::create_directories(out);
        write_field_csv(out / "field.csv", sample_grid(sol.field, cfg.grid_nt, cfg.grid_nx));
        write_controls_csv(out / "controls.csv", sol.mesh.spec, cs, cfg.samples_per_band);
        bool ok = true;
        for (const auto& c : checks) ok = ok && c.pass();
        json summary = {{"status", ok ? "ok" : "verification_failed"},
                        {"config", to_json(cfg)},
                        {"scales", scales_json(cfg)},
                        {"mesh", mesh_json(sol.mesh)},
                        {"counts", counts_json(sol.mesh.counts)},
                        {"solution", solution_json(sol, cs)},
                        {"residuals", report_json(rep)},
                        {"checks", checks_json(checks)}};
        const json timing = {{"solve_seconds", std::chrono::duration<double>(t1 - t0).count()},
                             {"verify_seconds", std::chrono::duration<double>(t2 - t1).count()}};
        if (cfg.timing) summary["timing"] = timing;
        write_text(out / "summary.json", summary.dump(2) + "\n");
        write_text(out / "timing.json", timing.dump(2) + "\n");
        log << "E = " << fmt(sol.E) << "  F = " << fmt(sol.F) << "  c1 = " << fmt(sol.c1) << "\n";
        for (const auto& c : checks)
            if (!c.pass()) log << "check failed: " << c.name << " = " << c.value << " > " << c.limit << "\n";
        return ok ? exit_ok : exit_numeric;
    } catch (const Error& e) {
        return report_error(e, log);
    } catch (const std::exception& e) {
        log << "error (numeric): " << e.what() << "\n";
        return exit_numeric;
    }
}

int run_sweep(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
    try {
        std::vector<double> Ts;
        for (std::size_t i = 0; i < cfg.T.size(); ++i) Ts.push_back(dimensionless_T(cfg, i));
        const SweepResult res = sweep_horizon(cfg.N, Ts, state_data(cfg), solve_options(cfg), worker_count());
        fs::create_directories(out);
        std::string csv = "T_requested,T,M,tau0,E,F,status,message\n";
        json rows = json::array();
        for (const auto& r : res.rows) {
            std::string msg = r.message;
            for (char& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            csv += fmt(r.T_requested) + "," + fmt(r.T) + "," + std::to_string(r.M) + "," + fmt(r.tau0) + "," +
                   fmt(r.E) + "," + fmt(r.F) + "," + r.status + "," + msg + "\n";
            rows.push_back({{"T_requested", r.T_requested}, {"T", r.T},   {"M", r.M},
                            {"tau0", r.tau0},               {"E", r.E},   {"F", r.F},
                            {"kkt_deficiency", r.deficiency}, {"status", r.status}, {"message", r.message}});
        }
        write_text(out / "sweep.csv", csv);
        const json summary = {{"config", to_json(cfg)}, {"rows", rows}, {"F_non_increasing", res.monotone}};
        write_text(out / "sweep.json", summary.dump(2) + "\n");
        log << res.rows.size() << " sweep rows written\n";
        return exit_ok;
    } catch (const Error& e) {
        return report_error(e, log);
    }
}

int run_verify(const RunConfig& cfg, const fs::path& artifacts, std::ostream& log) {
    if (cfg.T.size() != 1) {
        log << "error (data): verify needs a single horizon T\n";
        return exit_invalid;
    }
    try {
        const StateData data = state_data(cfg);
        const auto grid = read_field_csv(artifacts / "field.csv");
        const Solution sol = optimize(cfg.N, dimensionless_T(cfg, 0), data, solve_options(cfg));
        const ControlSignals cs = stitch_and_recover(sol.mesh.spec, sol.field);
        const double ctrl_dev = compare_controls_csv(artifacts / "controls.csv", sol.mesh.spec, cs);
        const GridCheck gc = check_grid(grid, sol.field, cs, cfg.grid_nt, cfg.grid_nx);
        VerifyOptions vo;
        vo.order = cfg.quad_order;
        vo.run_oracle = cfg.run_oracle;
        vo.oracle_nx = cfg.oracle_nx;
        const ResidualReport rep = residual_report(sol, data, cs, vo);
        auto checks = residual_checks(rep, sol.E);
        const double art = 1e-10;
        checks.push_back({"artifact_grid_Q", gc.Q, 1e-9 * (1.0 + sol.E)});
        checks.push_back({"artifact_grid_sup_q", gc.sup_q, 1e-14});
        checks.push_back({"artifact_v", gc.max_dv, art});
        checks.push_back({"artifact_r", gc.max_dr, art});
        checks.push_back({"artifact_p", gc.max_dp, art});
        checks.push_back({"artifact_s", gc.max_ds, art});
        checks.push_back({"artifact_controls", ctrl_dev, art});
        {
            std::ifstream in = open_in(artifacts / "summary.json");
            json s;
            try {
                in >> s;
                const double E = s.at("solution").at("E").get<double>();
                checks.push_back({"artifact_E", std::abs(E - sol.E), 1e-12 * (1.0 + sol.E)});
            } catch (const json::exception& e) {
                fail(ErrorKind::input, std::string("corrupt summary.json: ") + e.what());
            }
        }
        bool ok = true;
        for (const auto& c : checks) ok = ok && c.pass();
        const json out = {{"status", ok ? "ok" : "verification_failed"},
                          {"residuals", report_json(rep)},
                          {"artifact_grid", {{"Q", gc.Q}, {"sup_q", gc.sup_q}, {"points", gc.points}}},
                          {"checks", checks_json(checks)}};
        write_text(artifacts / "verify.json", out.dump(2) + "\n");
        for (const auto& c : checks)
            if (!c.pass()) log << "check failed: " << c.name << " = " << c.value << " > " << c.limit << "\n";
        log << (ok ? "verification passed\n" : "verification failed\n");
        return ok ? exit_ok : exit_numeric;
    } catch (const Error& e) {
        return report_error(e, log);
    } catch (const std::exception& e) {
        log << "error (numeric): " << e.what() << "\n";
        return exit_numeric;
    }
}

}  // namespace rodctl
