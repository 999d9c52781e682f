#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "lmd/experiment.hpp"
#include "lmd/report_io.hpp"

using namespace lmd;

namespace {

ExperimentConfig parse_text(std::string_view text, std::optional<ExperimentKind> kind = {}) {
    return parse_config(text, kind);
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v) {
        if (s.find(needle) != std::string::npos) return true;
    }
    return false;
}

std::vector<std::string> errors_of(const std::string& text, std::optional<ExperimentKind> kind = {}) {
    try {
        parse_text(text, kind);
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

const std::string& table(const ExperimentReport& r, const std::string& name) {
    for (const auto& [n, t] : r.tables) {
        if (n == name) {
            static thread_local std::string s;
            s = t.str();
            return s;
        }
    }
    throw std::runtime_error("missing table " + name);
}

}  // namespace

TEST(ReportIo, Fnv1aKnownVectors) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(ReportIo, DoubleFormatRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(std::nan("")), "nan");
    EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(ReportIo, CsvTable) {
    CsvTable t({"a", "b", "c"});
    t.add_row({1.5, std::int64_t{2}, std::string("x")});
    EXPECT_EQ(t.str(), "a,b,c\n1.5,2,x\n");
    EXPECT_THROW(t.add_row({1.0}), std::invalid_argument);
}

TEST(ReportIo, WriteCreatesDirectories) {
    const auto dir = std::filesystem::temp_directory_path() / "lmd_test_io" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    write_text_file(dir / "f.txt", "hello");
    EXPECT_EQ(read_text_file(dir / "f.txt"), "hello");
    EXPECT_FALSE(std::filesystem::exists(dir / "f.txt.tmp"));
    std::filesystem::remove_all(dir.parent_path());
}

TEST(Config, KindNames) {
    EXPECT_EQ(parse_kind("limit-law"), ExperimentKind::limit_law);
    EXPECT_EQ(parse_kind("blowup-scan"), ExperimentKind::blowup_scan);
    EXPECT_FALSE(parse_kind("limit_law").has_value());
}

TEST(Config, DefaultsAndOverrides) {
    const ExperimentConfig c = parse_text(R"({"experiment":"sample","gamma":0.5,"t":[1,2],"seed":9})");
    EXPECT_EQ(c.kind, ExperimentKind::sample);
    EXPECT_EQ(c.gamma, 0.5);
    EXPECT_EQ(c.times, (std::vector<double>{1, 2}));
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.sigma, -1);
}

TEST(Config, ReportsAllProblemsTogether) {
    const auto errs = errors_of(R"({"sigma":1,"gamma":1.2,"bogus":3,"m":"many"})", ExperimentKind::limit_law);
    EXPECT_TRUE(any_contains(errs, "bogus: unknown key"));
    EXPECT_TRUE(any_contains(errs, "m:"));
    EXPECT_TRUE(any_contains(errs, "limit-law: requires"));
}

TEST(Config, KindMismatchAndMalformedJson) {
    EXPECT_TRUE(any_contains(errors_of(R"({"experiment":"pde"})", ExperimentKind::survival), "experiment:"));
    EXPECT_TRUE(any_contains(errors_of("{not json"), "malformed JSON"));
}

TEST(Config, RegimePreconditions) {
    EXPECT_TRUE(any_contains(errors_of(R"({"sigma":1})", ExperimentKind::survival), "survival: requires"));
    EXPECT_TRUE(any_contains(errors_of(R"({"sigma":1})", ExperimentKind::blowup_scan), "sigma = -1"));
    EXPECT_TRUE(any_contains(errors_of(R"({"gamma":-1})", ExperimentKind::sample), "gamma"));
    EXPECT_TRUE(errors_of(R"({"sigma":-1,"gamma":1.75})", ExperimentKind::limit_law).empty());
}

TEST(Config, UnstableGridQuotesBound) {
    const auto errs = errors_of(R"({"grid":{"dt":0.1}})", ExperimentKind::pde);
    ASSERT_FALSE(errs.empty());
    EXPECT_TRUE(any_contains(errs, "grid:"));
    EXPECT_TRUE(any_contains(errs, "dt"));
}

TEST(Config, AutoGridIsStable) {
    const ExperimentConfig c = parse_text(R"({"gamma":0.5})", ExperimentKind::pde);
    EXPECT_NO_THROW(c.grid.validate(PowerLawDrive::make(-1, 0.5)));
    EXPECT_NEAR(c.grid.a(c.grid.na - 1), 1.0, 1e-12);
}

TEST(Config, HashIgnoresExecutionSettings) {
    const ExperimentConfig a = parse_text(R"({"threads":1,"output_dir":"x"})", ExperimentKind::sample);
    const ExperimentConfig b = parse_text(R"({"threads":4})", ExperimentKind::sample);
    const ExperimentConfig c = parse_text(R"({"seed":2})", ExperimentKind::sample);
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Run, DeterministicAcrossRepeatsAndThreads) {
    RunOptions opt;
    opt.write = false;
    const ExperimentConfig one = parse_text(R"({"gamma":0.5,"t":[0.5,2],"m":20000,"threads":1})",
                                              ExperimentKind::survival);
    const ExperimentConfig four = parse_text(R"({"gamma":0.5,"t":[0.5,2],"m":20000,"threads":4})",
                                               ExperimentKind::survival);
    const std::string a = table(run_experiment(one, opt), "survival.csv");
    EXPECT_EQ(a, table(run_experiment(one, opt), "survival.csv"));
    EXPECT_EQ(a, table(run_experiment(four, opt), "survival.csv"));
}

TEST(Run, WritesReportAndCsvUnderHashedDirectory) {
    const auto root = std::filesystem::temp_directory_path() / "lmd_test_runs";
    std::filesystem::remove_all(root);
    RunOptions opt;
    opt.output_root = root;
    const ExperimentConfig c = parse_text(R"({"m":500,"t":[1]})", ExperimentKind::sample);
    const ExperimentReport r = run_experiment(c, opt);
    EXPECT_EQ(r.run_dir, root / ("sample-" + config_hash(c)));
    EXPECT_TRUE(std::filesystem::exists(r.run_dir / "samples.csv"));
    const auto report = nlohmann::json::parse(read_text_file(r.run_dir / "report.json"));
    EXPECT_EQ(report["provenance"]["config_hash"], config_hash(c));
    EXPECT_EQ(report["files"][0], "samples.csv");
    EXPECT_EQ(report["config"].count("threads"), 0u);
    std::filesystem::remove_all(root);
}

TEST(Run, SurvivalTableAgreesWithErf) {
    RunOptions opt;
    opt.write = false;
    const ExperimentReport r =
        run_experiment(parse_text(R"({"gamma":0,"t":[1],"m":50000})", ExperimentKind::survival), opt);
    const auto& h = r.summary["horizons"][0];
    EXPECT_NEAR(h["survival_exact"].get<double>(), std::erf(1.0 / 1.5), 1e-15);
    EXPECT_NEAR(h["survival_mc"].get<double>(), h["survival_exact"].get<double>(),
                4 * h["std_error"].get<double>());
}

TEST(Run, PdeSummaryInvariants) {
    RunOptions opt;
    opt.write = false;
    const ExperimentReport r = run_experiment(
        parse_text(R"({"gamma":0.5,"grid":{"nx":101,"na":50,"t_end":0.2},"t":[0.2]})", ExperimentKind::pde), opt);
    EXPECT_LT(r.summary["max_mass_defect"].get<double>(), 1e-10);
    EXPECT_GE(r.summary["min_density"].get<double>(), 0.0);
    EXPECT_EQ(r.summary["symmetry_defect"].get<double>(), 0.0);
    EXPECT_EQ(r.summary["q_final"].get<double>(), 0.0);
}

TEST(Env, OutputRootFromEnvironment) {
    ::setenv("LMD_OUTPUT_ROOT", "/tmp/somewhere", 1);
    EXPECT_EQ(output_root_from_env("runs"), std::filesystem::path("/tmp/somewhere"));
    ::unsetenv("LMD_OUTPUT_ROOT");
    EXPECT_EQ(output_root_from_env("runs"), std::filesystem::path("runs"));
}
