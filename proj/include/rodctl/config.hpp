#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rodctl/constraints.hpp"
#include "rodctl/mesh.hpp"

namespace rodctl {

/// One summand of a state function: amplitude * cos(frequency x), sin(...), or amplitude * x^power.
struct StateTerm {
    enum class Kind { cos, sin, poly } kind = Kind::poly;
    double amplitude = 0.0;
    double frequency = 0.0;
    int power = 0;
};

struct StateSpec {
    std::vector<StateTerm> terms;

    [[nodiscard]] double operator()(double x) const;
};

struct PhysicalParams {
    double L = 1.0, rho = 1.0, kappa = 1.0;
};

struct RunConfig {
    int N = 0;
    std::vector<double> T;  // physical horizons when `physical` is set
    bool T_list = false;
    std::optional<PhysicalParams> physical;
    StateSpec v0, r0, v1, p1;

    int degree = 64;
    double snap_tol = 1e-12;
    double perturbation = 1e-6;
    double rank_tol = 1e-11;
    double residual_tol = 1e-9;
    int quad_order = 12;
    int grid_nt = 65;
    int grid_nx = 129;
    bool run_oracle = true;
    int oracle_nx = 0;
    int samples_per_band = 16;
    bool timing = false;
    std::string out_dir;
};

[[nodiscard]] RunConfig parse_config(const nlohmann::json& j);
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);
/// Fully resolved configuration, defaults included.
[[nodiscard]] nlohmann::json to_json(const RunConfig& cfg);

[[nodiscard]] StateData state_data(const RunConfig& cfg);
/// Dimensionless horizon for entry i of cfg.T.
[[nodiscard]] double dimensionless_T(const RunConfig& cfg, std::size_t i);

}  // namespace rodctl
