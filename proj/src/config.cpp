#include "rodctl/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rodctl/errors.hpp"

namespace rodctl {

using nlohmann::json;

double StateSpec::operator()(double x) const {
    double s = 0.0;
    for (const auto& t : terms) {
        switch (t.kind) {
            case StateTerm::Kind::cos: s += t.amplitude * std::cos(t.frequency * x); break;
            case StateTerm::Kind::sin: s += t.amplitude * std::sin(t.frequency * x); break;
            case StateTerm::Kind::poly: s += t.amplitude * std::pow(x, t.power); break;
        }
    }
    return s;
}

namespace {

[[noreturn]] void bad(const std::string& what) { fail(ErrorKind::data, "config: " + what); }

double number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(where + " must be finite");
    return v;
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) bad(where + " must be an integer");
    return j.get<int>();
}

StateSpec parse_state(const json& j, const std::string& name) {
    StateSpec s;
    if (j.is_null()) return s;
    if (!j.is_array()) bad("states." + name + " must be a list of terms");
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& t = j[i];
        const std::string where = "states." + name + "[" + std::to_string(i) + "]";
        if (!t.is_object() || !t.contains("kind") || !t["kind"].is_string()) bad(where + " needs a string 'kind'");
        StateTerm term;
        const std::string kind = t["kind"].get<std::string>();
        term.amplitude = t.contains("amplitude") ? number(t["amplitude"], where + ".amplitude") : 1.0;
        if (kind == "cos" || kind == "sin") {
            term.kind = kind == "cos" ? StateTerm::Kind::cos : StateTerm::Kind::sin;
            if (!t.contains("frequency")) bad(where + " needs 'frequency'");
            term.frequency = number(t["frequency"], where + ".frequency");
        } else if (kind == "poly") {
            term.kind = StateTerm::Kind::poly;
            term.power = t.contains("power") ? integer(t["power"], where + ".power") : 0;
            if (term.power < 0) bad(where + ".power must be non-negative");
        } else {
            bad(where + ".kind must be cos, sin or poly");
        }
        for (const auto& [key, _] : t.items())
            if (key != "kind" && key != "amplitude" && key != "frequency" && key != "power")
                bad(where + " has unknown key '" + key + "'");
        s.terms.push_back(term);
    }
    return s;
}

json state_json(const StateSpec& s) {
    json arr = json::array();
    for (const auto& t : s.terms) {
        json o;
        switch (t.kind) {
            case StateTerm::Kind::cos: o = {{"kind", "cos"}, {"amplitude", t.amplitude}, {"frequency", t.frequency}}; break;
            case StateTerm::Kind::sin: o = {{"kind", "sin"}, {"amplitude", t.amplitude}, {"frequency", t.frequency}}; break;
            case StateTerm::Kind::poly: o = {{"kind", "poly"}, {"amplitude", t.amplitude}, {"power", t.power}}; break;
        }
        arr.push_back(o);
    }
    return arr;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) bad(where + " has unknown key '" + key + "'");
    }
}

}  // namespace

RunConfig parse_config(const json& j) {
    if (!j.is_object()) bad("top level must be an object");
    check_keys(j, {"N", "T", "physical", "states", "numerics", "output"}, "config");
    RunConfig c;
    if (!j.contains("N")) bad("missing N");
    c.N = integer(j["N"], "N");
    if (c.N < 2) bad("N must be at least 2");
    if (!j.contains("T")) bad("missing T");
    if (j["T"].is_array()) {
        c.T_list = true;
        for (std::size_t i = 0; i < j["T"].size(); ++i) c.T.push_back(number(j["T"][i], "T[" + std::to_string(i) + "]"));
    } else {
        c.T.push_back(number(j["T"], "T"));
    }
    for (double T : c.T)
        if (T <= 0.0) bad("T must be positive");
    if (j.contains("physical")) {
        const json& p = j["physical"];
        if (!p.is_object()) bad("physical must be an object");
        check_keys(p, {"L", "rho", "kappa"}, "physical");
        PhysicalParams pp;
        if (p.contains("L")) pp.L = number(p["L"], "physical.L");
        if (p.contains("rho")) pp.rho = number(p["rho"], "physical.rho");
        if (p.contains("kappa")) pp.kappa = number(p["kappa"], "physical.kappa");
        if (pp.L <= 0.0 || pp.rho <= 0.0 || pp.kappa <= 0.0) bad("physical parameters must be positive");
        c.physical = pp;
    }
    if (!j.contains("states") || !j["states"].is_object()) bad("missing states object");
    const json& s = j["states"];
    check_keys(s, {"v0", "r0", "v1", "p1"}, "states");
    c.v0 = parse_state(s.value("v0", json()), "v0");
    c.r0 = parse_state(s.value("r0", json()), "r0");
    c.v1 = parse_state(s.value("v1", json()), "v1");
    c.p1 = parse_state(s.value("p1", json()), "p1");
    if (j.contains("numerics")) {
        const json& n = j["numerics"];
        if (!n.is_object()) bad("numerics must be an object");
        check_keys(n, {"degree", "snap_tol", "perturbation", "rank_tol", "residual_tol", "quad_order", "oracle",
                       "oracle_nx"},
                   "numerics");
        if (n.contains("degree")) c.degree = integer(n["degree"], "numerics.degree");
        if (n.contains("snap_tol")) c.snap_tol = number(n["snap_tol"], "numerics.snap_tol");
        if (n.contains("perturbation")) c.perturbation = number(n["perturbation"], "numerics.perturbation");
        if (n.contains("rank_tol")) c.rank_tol = number(n["rank_tol"], "numerics.rank_tol");
        if (n.contains("residual_tol")) c.residual_tol = number(n["residual_tol"], "numerics.residual_tol");
        if (n.contains("quad_order")) c.quad_order = integer(n["quad_order"], "numerics.quad_order");
        if (n.contains("oracle")) {
            if (!n["oracle"].is_boolean()) bad("numerics.oracle must be a boolean");
            c.run_oracle = n["oracle"].get<bool>();
        }
        if (n.contains("oracle_nx")) c.oracle_nx = integer(n["oracle_nx"], "numerics.oracle_nx");
        if (c.degree < 4 || c.degree > 1024) bad("numerics.degree must lie in [4, 1024]");
        if (c.quad_order < 2 || c.quad_order > 64) bad("numerics.quad_order must lie in [2, 64]");
        if (c.perturbation <= 0.0 || c.perturbation >= 0.5) bad("numerics.perturbation must lie in (0, 0.5)");
        if (c.oracle_nx < 0 || (c.oracle_nx > 0 && c.oracle_nx % c.N != 0))
            bad("numerics.oracle_nx must be a positive multiple of N");
    }
    if (j.contains("output")) {
        const json& o = j["output"];
        if (!o.is_object()) bad("output must be an object");
        check_keys(o, {"dir", "grid", "samples_per_band", "timing"}, "output");
        if (o.contains("dir")) {
            if (!o["dir"].is_string()) bad("output.dir must be a string");
            c.out_dir = o["dir"].get<std::string>();
        }
        if (o.contains("grid")) {
            const json& g = o["grid"];
            check_keys(g, {"nt", "nx"}, "output.grid");
            if (g.contains("nt")) c.grid_nt = integer(g["nt"], "output.grid.nt");
            if (g.contains("nx")) c.grid_nx = integer(g["nx"], "output.grid.nx");
        }
        if (o.contains("samples_per_band")) c.samples_per_band = integer(o["samples_per_band"], "output.samples_per_band");
        if (o.contains("timing")) {
            if (!o["timing"].is_boolean()) bad("output.timing must be a boolean");
            c.timing = o["timing"].get<bool>();
        }
        if (c.grid_nt < 2 || c.grid_nx < 2) bad("output.grid needs at least 2 points per direction");
        if (c.samples_per_band < 1) bad("output.samples_per_band must be positive");
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::input, "cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        bad(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json j;
    j["N"] = c.N;
    if (c.T_list)
        j["T"] = c.T;
    else
        j["T"] = c.T.front();
    if (c.physical) j["physical"] = {{"L", c.physical->L}, {"rho", c.physical->rho}, {"kappa", c.physical->kappa}};
    j["states"] = {{"v0", state_json(c.v0)}, {"r0", state_json(c.r0)}, {"v1", state_json(c.v1)}, {"p1", state_json(c.p1)}};
    j["numerics"] = {{"degree", c.degree},           {"snap_tol", c.snap_tol},
                     {"perturbation", c.perturbation}, {"rank_tol", c.rank_tol},
                     {"residual_tol", c.residual_tol}, {"quad_order", c.quad_order},
                     {"oracle", c.run_oracle},         {"oracle_nx", c.oracle_nx}};
    j["output"] = {{"dir", c.out_dir},
                   {"grid", {{"nt", c.grid_nt}, {"nx", c.grid_nx}}},
                   {"samples_per_band", c.samples_per_band},
                   {"timing", c.timing}};
    return j;
}

StateData state_data(const RunConfig& c) {
    return {[s = c.v0](double x) { return s(x); }, [s = c.r0](double x) { return s(x); },
            [s = c.v1](double x) { return s(x); }, [s = c.p1](double x) { return s(x); }};
}

double dimensionless_T(const RunConfig& c, std::size_t i) {
    if (!c.physical) return c.T.at(i);
    return nondimensionalize(c.physical->L, c.physical->rho, c.physical->kappa, c.T.at(i)).T;
}

}  // namespace rodctl
