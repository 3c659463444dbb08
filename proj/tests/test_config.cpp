#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nonstat_pm/config.hpp"
#include "nonstat_pm/runner.hpp"

using namespace nspm;

namespace {

const char* kValid = R"(
[experiment]
kind = self_norming
seed = 42
grid_size = 512
M = 100
N = 64,128
beta_star = 0.25

[schedule]
kind = alternating
values = 0.05,0.25

[observable]
name = x_minus_half

[output]
dir = out
)";

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("valid config parses cleanly with a stable hash") {
    std::vector<Diagnostic> diags;
    auto cfg = parse_config(kValid, diags);
    CHECK(diags.empty());
    CHECK(validate_config(cfg).empty());
    CHECK(cfg.kind == "self_norming");
    CHECK(cfg.seed == 42);
    CHECK(cfg.Ns == std::vector<std::size_t>{64, 128});
    CHECK(cfg.schedule_values == std::vector<double>{0.05, 0.25});
    CHECK(cfg.config_hash.size() == 16);

    std::vector<Diagnostic> diags2;
    auto cfg2 = parse_config(kValid, diags2);
    CHECK(cfg2.config_hash == cfg.config_hash);
}

TEST_CASE("unknown keys and sections are reported with line numbers") {
    std::vector<Diagnostic> diags;
    parse_config("[experiment]\nkind = rate_sweep\ntypo_key = 3\n", diags);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].field == "experiment.typo_key");
    CHECK(diags[0].line == 3);

    diags.clear();
    parse_config("[nonsense]\nx = 1\n", diags);
    REQUIRE_FALSE(diags.empty());
    CHECK(diags[0].field == "nonsense");
}

TEST_CASE("validation diagnostics name the offending field") {
    std::vector<Diagnostic> diags;
    auto cfg = parse_config(kValid, diags);

    SUBCASE("missing M") {
        cfg.M = 0;
        auto issues = validate_config(cfg);
        REQUIRE_FALSE(issues.empty());
        bool found = false;
        for (const auto& d : issues) found |= d.field == "experiment.M";
        CHECK(found);
    }
    SUBCASE("beta_star at 0.4 violates the CLT hypothesis") {
        cfg.beta_star = 0.4;
        auto issues = validate_config(cfg);
        bool found = false;
        for (const auto& d : issues)
            found |= d.field == "experiment.beta_star" &&
                     d.message.find("1/3") != std::string::npos;
        CHECK(found);
    }
    SUBCASE("non-monotone N list") {
        cfg.Ns = {128, 64};
        auto issues = validate_config(cfg);
        bool found = false;
        for (const auto& d : issues)
            found |= d.field == "experiment.N" &&
                     d.message.find("increasing") != std::string::npos;
        CHECK(found);
    }
    SUBCASE("inadmissible schedule value") {
        cfg.schedule_values = {0.05, 0.3};  // above beta_star = 0.25
        auto issues = validate_config(cfg);
        bool found = false;
        for (const auto& d : issues) found |= d.field == "schedule.values";
        CHECK(found);
    }
}

TEST_CASE("run_experiment refuses an invalid config with exit code 2") {
    std::vector<Diagnostic> diags;
    auto cfg = parse_config(kValid, diags);
    cfg.M = 0;
    std::ostringstream log;
    CHECK(run_experiment(cfg, log) == 2);
    CHECK(log.str().find("experiment.M") != std::string::npos);
}

TEST_CASE("rate_sweep outputs are bitwise reproducible") {
    std::vector<Diagnostic> diags;
    auto cfg = parse_config(R"(
[experiment]
kind = rate_sweep
N = 256,1024
beta_star = 0.25
)",
                            diags);
    REQUIRE(diags.empty());
    REQUIRE(validate_config(cfg).empty());

    auto base = std::filesystem::temp_directory_path() / "nonstat_pm_test_cfg";
    std::filesystem::remove_all(base);
    std::ostringstream log;
    cfg.out_dir = (base / "a").string();
    REQUIRE(run_experiment(cfg, log) == 0);
    cfg.out_dir = (base / "b").string();
    REQUIRE(run_experiment(cfg, log) == 0);

    CHECK(slurp(base / "a" / "results.csv") == slurp(base / "b" / "results.csv"));
    CHECK(slurp(base / "a" / "results.json") == slurp(base / "b" / "results.json"));
    auto csv = slurp(base / "a" / "results.csv");
    CHECK(csv.find("config_hash") != std::string::npos);
    CHECK(csv.find(cfg.config_hash) != std::string::npos);
    CHECK(std::filesystem::exists(base / "a" / "manifest.json"));
    std::filesystem::remove_all(base);
}

TEST_CASE("qds_covariance end to end at toy scale") {
    std::vector<Diagnostic> diags;
    auto cfg = parse_config(R"(
[experiment]
kind = qds_covariance
seed = 9
grid_size = 256
M = 500
N = 32,64
beta_star = 0.3
t = 1.0
n_quad = 4

[schedule]
kind = qds
tau = linear
tau_a = 0.05
tau_b = 0.1

[observable]
name = lip_pair_2d
)",
                            diags);
    REQUIRE(diags.empty());
    REQUIRE(validate_config(cfg).empty());
    auto base = std::filesystem::temp_directory_path() / "nonstat_pm_test_qds";
    std::filesystem::remove_all(base);
    cfg.out_dir = base.string();
    std::ostringstream log;
    REQUIRE(run_experiment(cfg, log) == 0);
    auto csv = slurp(base / "results.csv");
    CHECK(csv.find("gap_entrywise_max") != std::string::npos);
    auto js = slurp(base / "results.json");
    CHECK(js.find("lambda_min_sigma_t") != std::string::npos);
    std::filesystem::remove_all(base);
}

TEST_CASE("self_norming end to end at toy scale") {
    std::vector<Diagnostic> diags;
    auto cfg = parse_config(kValid, diags);
    REQUIRE(diags.empty());
    auto base = std::filesystem::temp_directory_path() / "nonstat_pm_test_run";
    std::filesystem::remove_all(base);
    cfg.out_dir = base.string();
    std::ostringstream log;
    REQUIRE(run_experiment(cfg, log) == 0);
    auto csv = slurp(base / "results.csv");
    CHECK(csv.find("w1_self_norming") != std::string::npos);
    // header + one row per N + trailing newline
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    std::filesystem::remove_all(base);
}
