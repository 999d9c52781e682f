// Command-line front end: one subcommand per experiment kind.
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical guard abort,
// 1 anything else (I/O failures).

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lmd/errors.hpp"
#include "lmd/experiment.hpp"
#include "lmd/report_io.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
};

int run(lmd::ExperimentKind kind, const Flags& flags) {
    nlohmann::json doc = nlohmann::json::object();
    if (!flags.config_path.empty()) {
        const std::string text = lmd::read_text_file(flags.config_path);
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw lmd::ConfigError({std::string("config: malformed JSON: ") + e.what()});
        }
    }
    if (doc.is_object()) {
        if (flags.seed) doc["seed"] = *flags.seed;
        if (flags.threads) doc["threads"] = *flags.threads;
        if (!flags.out.empty()) doc["output_dir"] = flags.out;
    }
    const lmd::ExperimentConfig config = lmd::parse_config(doc, kind);
    lmd::RunOptions options;
    options.output_root = lmd::output_root_from_env("runs");
    const lmd::ExperimentReport report = lmd::run_experiment(config, options);
    std::cout << report.run_dir.string() << '\n';
    std::cout << report.summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Locally modulated diffusion laboratory"};
    app.require_subcommand(1);
    Flags flags;
    std::optional<lmd::ExperimentKind> chosen;

    for (const char* name : {"sample", "discrete", "survival", "limit-law", "generator", "pde", "blowup-scan"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
        sub->add_option("--config", flags.config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "override the seed");
        sub->add_option("--threads", flags.threads, "worker threads")->check(CLI::Range(1u, 1024u));
        sub->add_option("--out", flags.out, "output root (default: $LMD_OUTPUT_ROOT or ./runs)");
        sub->callback([&chosen, name] { chosen = lmd::parse_kind(name); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        return run(*chosen, flags);
    } catch (const lmd::ConfigError& e) {
        for (const std::string& msg : e.errors()) std::cerr << "error: " << msg << '\n';
        return kExitValidation;
    } catch (const lmd::NumericalGuardError& e) {
        std::cerr << "numerical guard: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 1;
    }
}
