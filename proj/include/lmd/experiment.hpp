#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lmd/flow.hpp"
#include "lmd/pde.hpp"
#include "lmd/report_io.hpp"

namespace lmd {

enum class ExperimentKind { sample, discrete, survival, limit_law, generator, pde, blowup_scan };

std::string_view to_string(ExperimentKind k);
std::optional<ExperimentKind> parse_kind(std::string_view name);

enum class InitialDatum {
    point_source,  // point_source_field at (0, a0)
    bump,          // Gaussian (sd 1/2) in x times sin^2 bump on [a0/4, 3a0/4]
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::sample;
    int sigma = -1;
    double gamma = 0.0;
    double a0 = 1.0;
    double x0 = 0.0;
    std::vector<double> times{1.0};
    std::size_t m = 10000;
    std::size_t n_steps = 10000;
    FlowLaw mode = FlowLaw::sde_consistent;
    GridSpec grid;
    bool auto_dt = true;
    InitialDatum initial = InitialDatum::point_source;
    std::size_t snapshots = 10;
    std::vector<double> gammas{1.0, 1.6};
    double t_small = 1e-3;
    double phi_half_width = 0.5;
    std::uint64_t seed = 1;
    // Execution settings; they do not enter the content hash.
    unsigned threads = 1;
    std::string output_dir;
};

/// Validation failure carrying one message per offending field.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Strict parse: unknown keys, wrong types and out-of-regime parameters are
/// all reported together. `kind` overrides or must match the "experiment" key.
ExperimentConfig parse_config(std::string_view json_text, std::optional<ExperimentKind> kind = {});
ExperimentConfig parse_config(const nlohmann::json& doc, std::optional<ExperimentKind> kind = {});

/// Fills kind-dependent defaults (grid layout, dt) and checks every field
/// against the target operation. Throws ConfigError.
ExperimentConfig finalize_config(ExperimentConfig config);

/// Canonical JSON of the fields that determine the payload.
nlohmann::json canonical_json(const ExperimentConfig& config);

/// fnv1a64 of canonical_json(config).dump(), as hex.
std::string config_hash(const ExperimentConfig& config);

struct ExperimentReport {
    ExperimentConfig config;
    nlohmann::json summary;
    std::vector<std::pair<std::string, CsvTable>> tables;  // file name, table
    nlohmann::json provenance;
    std::filesystem::path run_dir;

    nlohmann::json to_json() const;
};

struct RunOptions {
    std::filesystem::path output_root = "runs";
    bool write = true;
};

/// Root for run directories: LMD_OUTPUT_ROOT if set, else `fallback`.
std::filesystem::path output_root_from_env(const std::filesystem::path& fallback = "runs");

/// Dispatches to the module operation, writes <root>/<kind>-<hash>/ with the
/// CSV payloads and report.json, and returns the report. The config must have
/// passed finalize_config.
ExperimentReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

}  // namespace lmd
