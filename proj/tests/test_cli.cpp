#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "rodctl/errors.hpp"
#include "rodctl/run.hpp"

using namespace rodctl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path data(const std::string& name) { return fs::path(RODCTL_TEST_DATA) / name; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("rodctl_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

// Copies a field CSV, adding 0.1 to one column of the first non-seam row past row 500.
void tamper(const fs::path& from, const fs::path& to, int column) {
    std::istringstream in(slurp(from));
    std::ofstream o(to, std::ios::binary);
    std::string line;
    bool done = false;
    for (int n = 0; std::getline(in, line); ++n) {
        std::vector<std::string> c;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) c.push_back(x);
        if (!done && n >= 500 && c.back() == "0") {
            c[column] = std::to_string(std::stod(c[column]) + 0.1);
            line = c[0];
            for (std::size_t i = 1; i < c.size(); ++i) line += "," + c[i];
            done = true;
        }
        o << line << "\n";
    }
    REQUIRE(done);
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + RODCTL_CLI + "\" " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig c = load_config(data("cosine_to_rest.json"));
    CHECK(c.N == 4);
    REQUIRE(c.T.size() == 1);
    CHECK(c.T[0] == 1.625);
    CHECK_FALSE(c.T_list);
    CHECK(c.v0(0.2) == doctest::Approx(std::cos(0.6)));
    CHECK(c.r0(0.2) == doctest::Approx(-std::cos(0.6)));
    CHECK(c.v1(0.3) == 0.0);
    CHECK(c.degree == 64);
    CHECK(c.grid_nt == 33);

    const json echo = to_json(c);
    const RunConfig back = parse_config(echo);
    CHECK(to_json(back) == echo);

    const RunConfig s = load_config(data("sweep_n4.json"));
    CHECK(s.T_list);
    CHECK(s.T.size() == 5u);

    const RunConfig p = load_config(data("physical.json"));
    REQUIRE(p.physical);
    CHECK(dimensionless_T(p, 0) == doctest::Approx(0.05 / std::sqrt(0.25 * 7800.0 / 2.1e7)));
}

TEST_CASE("config errors") {
    auto kind_of = [](const json& j) {
        try {
            (void)parse_config(j);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::invariant;
    };
    const json ok = {{"N", 3}, {"T", 2.0}, {"states", json::object()}};
    CHECK_NOTHROW((void)parse_config(ok));
    json j = ok;
    j["N"] = 1;
    CHECK(kind_of(j) == ErrorKind::data);
    j = ok;
    j["T"] = -1.0;
    CHECK(kind_of(j) == ErrorKind::data);
    j = ok;
    j["extra"] = 1;
    CHECK(kind_of(j) == ErrorKind::data);
    j = ok;
    j["states"]["v0"] = json::array({{{"kind", "exp"}}});
    CHECK(kind_of(j) == ErrorKind::data);
    j = ok;
    j["states"]["v0"] = json::array({{{"kind", "cos"}}});
    CHECK(kind_of(j) == ErrorKind::data);
    j = ok;
    j["numerics"] = {{"oracle_nx", 100}};
    CHECK(kind_of(j) == ErrorKind::data);
    CHECK_THROWS_AS((void)load_config(data("unknown_key.json")), Error);
    CHECK_THROWS_AS((void)load_config(data("malformed.json")), Error);
    CHECK_THROWS_AS((void)load_config(data("missing.json")), Error);
}

TEST_CASE("exit codes") {
    CHECK(exit_code(ErrorKind::data) == 2);
    CHECK(exit_code(ErrorKind::input) == 2);
    CHECK(exit_code(ErrorKind::controllability) == 3);
    CHECK(exit_code(ErrorKind::numeric) == 4);
}

TEST_CASE("solve, verify and tamper") {
    const fs::path out = scratch("solve");
    std::ostringstream log;
    const RunConfig cfg = load_config(data("cosine_to_rest.json"));
    REQUIRE(run_solve(cfg, out, log) == exit_ok);
    for (const char* f : {"field.csv", "controls.csv", "summary.json", "timing.json"}) CHECK(fs::exists(out / f));
    const json s = read_json(out / "summary.json");
    CHECK(s["status"] == "ok");
    CHECK(std::abs(s["solution"]["c1"].get<double>() - 0.48) <= 0.01);
    CHECK_FALSE(s.contains("timing"));
    CHECK(s["config"] == to_json(cfg));

    // Determinism: a second solve writes the same summary.
    const fs::path out2 = scratch("solve2");
    REQUIRE(run_solve(cfg, out2, log) == exit_ok);
    CHECK(slurp(out / "summary.json") == slurp(out2 / "summary.json"));
    CHECK(slurp(out / "field.csv") == slurp(out2 / "field.csv"));

    REQUIRE(run_verify(cfg, out, log) == exit_ok);
    const std::string first = slurp(out / "verify.json");
    REQUIRE(run_verify(cfg, out, log) == exit_ok);
    CHECK(slurp(out / "verify.json") == first);
    CHECK(read_json(out / "verify.json")["status"] == "ok");

    // Tamper with one value of v, then with one value of p.
    for (const auto& [column, check] : {std::pair{2, "artifact_v"}, std::pair{4, "artifact_grid_Q"}}) {
        CAPTURE(column);
        const fs::path bad = scratch("tampered");
        fs::create_directories(bad);
        for (const char* f : {"controls.csv", "summary.json"}) fs::copy_file(out / f, bad / f);
        tamper(out / "field.csv", bad / "field.csv", column);
        CHECK(run_verify(cfg, bad, log) == exit_numeric);
        const json v = read_json(bad / "verify.json");
        CHECK(v["status"] == "verification_failed");
        bool failed = false;
        for (const auto& c : v["checks"])
            if (c["name"] == check) failed = !c["pass"].get<bool>();
        CHECK(failed);
    }

    const fs::path none = scratch("missing");
    CHECK(run_verify(cfg, none, log) == exit_invalid);
}

TEST_CASE("zero states and infeasible horizons") {
    std::ostringstream log;
    const fs::path z = scratch("zero");
    REQUIRE(run_solve(load_config(data("zero_to_zero.json")), z, log) == exit_ok);
    const json s = read_json(z / "summary.json");
    CHECK(s["solution"]["E"].get<double>() == 0.0);

    const fs::path sub = scratch("sub");
    CHECK(run_solve(load_config(data("subcritical.json")), sub, log) == exit_infeasible);
    CHECK_FALSE(fs::exists(sub / "summary.json"));
    CHECK_FALSE(fs::exists(sub / "field.csv"));
    CHECK(log.str().find("critical control time") != std::string::npos);
}

TEST_CASE("physical units") {
    std::ostringstream log;
    const fs::path out = scratch("physical");
    REQUIRE(run_solve(load_config(data("physical.json")), out, log) == exit_ok);
    const json s = read_json(out / "summary.json");
    CHECK(s["mesh"]["T"].get<double>() == doctest::Approx(0.05 / std::sqrt(0.25 * 7800.0 / 2.1e7)));
    CHECK(s["status"] == "ok");
}

TEST_CASE("sweeps") {
    std::ostringstream log;
    const fs::path out = scratch("sweep");
    REQUIRE(run_sweep(load_config(data("sweep_n4.json")), out, log) == exit_ok);
    const json s = read_json(out / "sweep.json");
    REQUIRE(s["rows"].size() == 5u);
    CHECK(s["rows"][0]["status"] == "infeasible");
    for (int j = 1; j < 5; ++j) CHECK(s["rows"][j]["status"] == "ok");
    CHECK(s["F_non_increasing"] == true);
    const std::string csv = slurp(out / "sweep.csv");
    CHECK(csv.rfind("T_requested,T,M,tau0,E,F,status", 0) == 0);

    const fs::path empty = scratch("sweep_empty");
    REQUIRE(run_sweep(load_config(data("sweep_empty.json")), empty, log) == exit_ok);
    CHECK(read_json(empty / "sweep.json")["rows"].empty());
    const std::string empty_csv = slurp(empty / "sweep.csv");
    CHECK(std::count(empty_csv.begin(), empty_csv.end(), '\n') == 1);
}

TEST_CASE("command line") {
    const fs::path out = scratch("cli");
    CHECK(cli("solve --config \"" + data("zero_to_zero.json").string() + "\" --out \"" + out.string() + "\"") == 0);
    CHECK(cli("verify --config \"" + data("zero_to_zero.json").string() + "\" --artifacts \"" + out.string() + "\"") ==
          0);
    CHECK(cli("solve --config \"" + data("subcritical.json").string() + "\" --out \"" + scratch("cli_sub").string() +
              "\"") == 3);
    CHECK(cli("solve --config \"" + data("unknown_key.json").string() + "\" --out \"" + out.string() + "\"") == 2);
    CHECK(cli("solve --config \"" + data("malformed.json").string() + "\" --out \"" + out.string() + "\"") == 2);
    CHECK(cli("solve --out x") == 2);
    CHECK(cli("frobnicate") == 2);
    CHECK(cli("sweep --config \"" + data("sweep_n4.json").string() + "\" --out \"" + scratch("cli_sw").string() +
              "\"") == 0);
}
