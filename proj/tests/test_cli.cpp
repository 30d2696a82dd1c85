#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "decoy/cli.hpp"
#include "decoy/errors.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace decoy;
using namespace decoy::cli;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "decoy");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string config_path(const char* name) { return std::string(DECOY_CONFIG_DIR) + "/" + name; }

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) rows.push_back(split_csv_record(line));
    return rows;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto f = ConfigFile::parse("# comment\n[protocol]\nmu = 0.3\n\nmu_prime=0.45 # trailing\n", "t.ini");
    CHECK(f.require_double("protocol.mu") == 0.3);
    CHECK(f.require_double("protocol.mu_prime") == 0.45);
    CHECK(f.location("protocol.mu_prime") == "t.ini:5");
    CHECK(f.has_section("protocol"));
    CHECK_FALSE(f.has("protocol.qber"));
}

TEST_CASE("config errors carry line numbers") {
    auto message = [](const std::string& text) {
        try {
            build_run_config(ConfigFile::parse(text, "c.ini"));
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    CHECK(message("[protocol]\nmu = 0.3\nmu_prime = abc\n").rfind("c.ini:3", 0) == 0);
    CHECK(message("[protocol]\nmu = 0.3\nmu_prime = 0.2\n[channel]\nkind = no_eve\neta = 1e-3\n").rfind("c.ini:3", 0) ==
          0);
    CHECK(message("[protocol]\nmu = 0.3\nmu_prime = 0.45\n[channel]\nkind = laser\n").rfind("c.ini:5", 0) == 0);
    CHECK(message("[protocol]\nmu = 0.3\nmu_prime = 0.45\n[channel]\nkind = no_eve\neta = 2\n").find("c.ini:6") !=
          std::string::npos);
    CHECK(message("[protocol]\nmu = 0.3\nmu_prime = 0.45\n[channel]\nkind = no_eve\neta = 1e-3\n[budget]\nn_mu = 1.5\n")
              .find("c.ini:8") != std::string::npos);
    CHECK_THROWS_AS(ConfigFile::parse("[protocol\nmu = 1\n", "c.ini"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse("[protocol]\njust text\n", "c.ini"), ConfigError);
    // Both a scenario and direct rates.
    CHECK(message("[protocol]\nmu = 0.3\nmu_prime = 0.45\n[channel]\nkind = pns\n[rates]\ns0 = 0\ns_mu = 1e-3\n"
                  "s_mu_prime = 2e-3\n") != "no error");
}

TEST_CASE("overrides win over the file") {
    auto f = ConfigFile::parse("[protocol]\nmu = 0.3\nmu_prime = 0.45\n", "c.ini");
    f.apply_override("protocol.mu_prime=0.5");
    CHECK(f.require_double("protocol.mu_prime") == 0.5);
    CHECK(f.location("protocol.mu_prime").rfind("--set", 0) == 0);
    CHECK_THROWS_AS(f.apply_override("no_equals_sign"), ConfigError);

    const auto r = invoke({"--config", config_path("bound_w2.ini"), "--set", "protocol.mu=0.45", "bound"});
    CHECK(r.code == kConfigError);
    CHECK(r.err.find("--set protocol.mu=0.45") != std::string::npos);
}

TEST_CASE("grid parsing") {
    CHECK(parse_grid("0.40:0.50:0.01").size() == 11);
    CHECK(parse_grid("0.40:0.50:0.01").back() == 0.5);
    CHECK(parse_grid("0.40:0.50:0.01")[3] == 0.43);
    CHECK(parse_grid("0.1, 0.2,0.3") == std::vector<double>{0.1, 0.2, 0.3});
    CHECK(parse_grid("0.3") == std::vector<double>{0.3});
    CHECK_THROWS(parse_grid("0.5:0.4:0.01"));
    CHECK_THROWS(parse_grid("0.4:0.5:0"));
    CHECK_THROWS(parse_grid("a,b"));
}

TEST_CASE("bound: table configuration") {
    const auto r = invoke({"--config", config_path("bound_w2.ini"), "--format", "json", "bound"});
    REQUIRE(r.code == kOk);
    const auto j = nlohmann::json::parse(r.out);
    const auto& primary = j["reports"].back();
    CHECK(primary["method"] == "wang_finite");
    CHECK(std::abs(primary["delta_upper"].get<double>() - 0.362) < 0.002);
    CHECK(std::abs(primary["delta_prime_upper"].get<double>() - 0.458) < 0.002);
    CHECK(j["inputs"]["mu"] == 0.3);
    CHECK(primary.contains("key_rate_mu"));
}

TEST_CASE("bound: asymptotic closed form") {
    const auto r = invoke({"--set", "protocol.mu=0.3", "--set", "protocol.mu_prime=0.45", "--set", "channel.kind=no_eve",
                           "--set", "channel.eta=1e-3", "--set", "channel.s0=0", "--format", "json", "bound"});
    REQUIRE(r.code == kOk);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["reports"].back()["method"] == "wang_asymptotic");
    CHECK(std::abs(j["reports"].back()["delta_upper"].get<double>() - 0.3237) < 5e-4);
}

TEST_CASE("bound: degenerate and invalid supplied rates") {
    const auto zero = invoke({"--set", "protocol.mu=0.3", "--set", "protocol.mu_prime=0.45", "--set", "rates.s0=0",
                              "--set", "rates.s_mu=1e-3", "--set", "rates.s_mu_prime=0", "--format", "json", "bound"});
    const auto j = nlohmann::json::parse(zero.out);
    CHECK(j["reports"][0]["method"] == "hwang_crude");
    CHECK(j["reports"][0]["delta_upper"] == 0.0);
    CHECK(j["reports"][0]["degenerate"] == true);

    const auto none = invoke({"--set", "protocol.mu=0.3", "--set", "protocol.mu_prime=0.45", "--set", "rates.s0=0",
                              "--set", "rates.s_mu=0", "--set", "rates.s_mu_prime=0", "bound"});
    CHECK(none.code == kConfigError);
}

TEST_CASE("bound: non-convergence has its own exit code") {
    const auto r = invoke({"--config", config_path("bound_w2.ini"), "--set", "solver.max_iter=1", "bound"});
    CHECK(r.code == kNoConvergence);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("simulate") {
    const auto pns = invoke({"--config", config_path("pns.ini"), "simulate"});
    CHECK(pns.code == kVacuous);

    const std::vector<std::string> args{"--config", config_path("bound_w2.ini"), "--set", "budget.n_mu=1e9",
                                        "--seed",   "12345",                     "--format", "csv", "simulate"};
    const auto a = invoke(args);
    const auto b = invoke(args);
    CHECK(a.code == kOk);
    CHECK(a.out == b.out);
    CHECK(a.out.find("sampled") != std::string::npos);
    CHECK(a.out.find("expected") != std::string::npos);

    auto other = args;
    other[5] = "54321";
    CHECK(invoke(other).out != a.out);

    const auto no_seed = invoke({"--config", config_path("bound_w2.ini"), "simulate"});
    CHECK(no_seed.code == kConfigError);
}

TEST_CASE("sweep") {
    const auto r = invoke({"--config", config_path("sweep.ini"), "sweep"});
    REQUIRE(r.code == kOk);
    const auto rows = read_csv(r.out);
    REQUIRE(rows.size() == 12);
    CHECK(rows[0] == std::vector<std::string>{"mu", "mu_prime", "eta", "n_pulses", "s0", "delta_upper",
                                              "delta_prime_upper", "s1_lower", "key_rate", "clamped", "vacuous"});
    double best = 2.0, best_mp = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double d = std::stod(rows[i][5]);
        if (d < best) best = d, best_mp = std::stod(rows[i][1]);
    }
    CHECK(best_mp >= 0.43 - 1e-12);
    CHECK(best_mp <= 0.47 + 1e-12);

    // Grid order is fixed: mu-major, then mu'.
    const auto ordered = invoke({"--config", config_path("sweep.ini"), "--set", "sweep.mu=0.25,0.2", "--set",
                                 "sweep.mu_prime=0.4,0.35", "sweep"});
    const auto o = read_csv(ordered.out);
    REQUIRE(o.size() == 5);
    CHECK(std::stod(o[1][0]) == 0.25);
    CHECK(std::stod(o[1][1]) == 0.4);
    CHECK(std::stod(o[2][1]) == 0.35);
    CHECK(std::stod(o[3][0]) == 0.2);

    const auto skip = invoke({"--config", config_path("sweep.ini"), "--set", "sweep.mu_prime=0.3,0.45", "sweep"});
    CHECK(skip.code == kOk);
    CHECK(skip.err.find("skipped") != std::string::npos);
    CHECK(read_csv(skip.out).size() == 2);

    const auto empty = invoke({"--config", config_path("sweep.ini"), "--set", "sweep.mu_prime=0.3", "sweep"});
    CHECK(empty.code == kConfigError);

    const auto cell = invoke({"--config", config_path("sweep.ini"), "--set", "sweep.mu=0.25", "--set",
                              "sweep.mu_prime=0.38", "--set", "sweep.eta=1e-3", "--set", "budget.n_mu=1e10", "--set",
                              "channel.dark_counts_in_signal=false", "sweep"});
    const auto c = read_csv(cell.out);
    REQUIRE(c.size() == 2);
    CHECK(std::abs(std::stod(c[1][5]) - 0.289) < 0.01);
}

TEST_CASE("csv round trip keeps full precision") {
    const auto r = invoke({"--config", config_path("sweep.ini"), "sweep"});
    const auto rows = read_csv(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double d = std::stod(rows[i][5]);
        CHECK(format_machine(d) == rows[i][5]);
    }
    CHECK(format_machine(0.1) == "0.10000000000000001");
    CHECK(format_human(0.123456) == "0.1235");
}

TEST_CASE("table1 command") {
    const auto r = invoke({"--format", "csv", "table1"});
    REQUIRE(r.code == kOk);
    const auto rows = read_csv(r.out);
    CHECK(rows.size() == 1 + 8 + 8 + 4 + 4 + 4);
    bool found = false;
    for (const auto& row : rows) {
        if (row[0] == "Delta_W1" && row[1] == "0.20000000000000001") {
            found = true;
            CHECK(std::abs(std::stod(row[5]) - 0.234) < 0.01);
        }
    }
    CHECK(found);
    const auto text = invoke({"table1"});
    CHECK(text.out.find("44.51%") != std::string::npos);
    CHECK(text.out.find("41.5%") != std::string::npos);
}

TEST_CASE("feasibility command") {
    const auto r = invoke({"--config", config_path("feasibility.ini"), "--format", "json", "feasibility"});
    CHECK(r.code == kImpractical);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["required_pulses"] == 1e14);
    CHECK(std::abs(j["days"].get<double>() - 14.47) < 0.01);
    CHECK(j["practical"] == false);

    const auto fast = invoke({"--config", config_path("feasibility.ini"), "--set", "feasibility.rep_rate=1.6e8",
                              "--format", "json", "feasibility"});
    CHECK(nlohmann::json::parse(fast.out)["days"].get<double>() == doctest::Approx(j["days"].get<double>() / 2));

    const auto low = invoke({"--config", config_path("feasibility.ini"), "--set", "feasibility.s0=1e-7", "--format",
                             "json", "feasibility"});
    CHECK(nlohmann::json::parse(low.out)["required_pulses"] == 1e15);
}

TEST_CASE("--out writes the report to a file") {
    const auto path = std::filesystem::temp_directory_path() / "decoy_cli_out_test.csv";
    std::filesystem::remove(path);
    const auto r = invoke({"--out", path.string(), "--format", "csv", "table1"});
    CHECK(r.code == kOk);
    CHECK(r.out.empty());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == invoke({"--format", "csv", "table1"}).out);
    std::filesystem::remove(path);
}

TEST_CASE("missing config file and unknown subcommand") {
    CHECK(invoke({"--config", "/nonexistent/x.ini", "bound"}).code == kConfigError);
    CHECK(invoke({"frobnicate"}).code != kOk);
}
