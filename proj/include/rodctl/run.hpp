#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "rodctl/config.hpp"
#include "rodctl/errors.hpp"
#include "rodctl/optimizer.hpp"
#include "rodctl/verify.hpp"

namespace rodctl {

enum ExitCode : int { exit_ok = 0, exit_invalid = 2, exit_infeasible = 3, exit_numeric = 4 };

[[nodiscard]] int exit_code(ErrorKind kind);

/// Worker cap from RODCTL_WORKERS, else the hardware concurrency.
[[nodiscard]] int worker_count();

[[nodiscard]] SolveOptions solve_options(const RunConfig& cfg);

struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    [[nodiscard]] bool pass() const { return value <= limit; }
};

/// Pass/fail checks applied to a residual report.
[[nodiscard]] std::vector<Check> residual_checks(const ResidualReport& rep, double E);
[[nodiscard]] nlohmann::json report_json(const ResidualReport& rep);
[[nodiscard]] nlohmann::json checks_json(const std::vector<Check>& checks);

void write_field_csv(const std::filesystem::path& path, const std::vector<GridRow>& rows);
[[nodiscard]] std::vector<GridRow> read_field_csv(const std::filesystem::path& path);
void write_controls_csv(const std::filesystem::path& path, const MeshSpec& mesh, const ControlSignals& cs,
                        int samples_per_band);
/// Max deviation between a controls CSV and recomputed signals.
[[nodiscard]] double compare_controls_csv(const std::filesystem::path& path, const MeshSpec& mesh,
                                          const ControlSignals& cs);

int run_solve(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int run_sweep(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int run_verify(const RunConfig& cfg, const std::filesystem::path& artifacts, std::ostream& log);

}  // namespace rodctl
