#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "decoy/channel_sim.hpp"
#include "decoy/feasibility.hpp"
#include "decoy/finite_stats.hpp"
#include "decoy/output.hpp"

namespace decoy::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kVacuous = 3,
    kNoConvergence = 4,
    kImpractical = 5,
};

/// Configuration problem tied to a source location ("file:line" or
/// "--set section.key").
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& location, const std::string& message)
        : std::runtime_error(location.empty() ? message : location + ": " + message) {}
};

/// Flat INI-style key/value file:
///
///     # comment
///     [section]
///     key = value
///
/// Keys are addressed as "section.key". Later assignments win; overrides
/// from the command line are applied after the file.
class ConfigFile {
public:
    struct Entry {
        std::string value;
        std::string location;
    };

    static ConfigFile parse(std::string_view text, const std::string& origin);
    static ConfigFile load(const std::string& path);

    /// "section.key=value"
    void apply_override(std::string_view assignment);
    void set(const std::string& key, const std::string& value, const std::string& location);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    bool has_section(std::string_view section) const;
    const Entry* find(const std::string& key) const;
    std::string location(const std::string& key) const;

    std::optional<double> get_double(const std::string& key) const;
    double require_double(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::string> get_string(const std::string& key) const;
    /// Comma list ("0.1, 0.2") or inclusive range "start:stop:step".
    std::optional<std::vector<double>> get_grid(const std::string& key) const;

    /// Throws ConfigError at the first key not listed in `known`.
    void reject_unknown(const std::vector<std::string_view>& known) const;

    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;
};

/// Expands "a:b:step" (inclusive, tolerant to rounding) or "a, b, c".
std::vector<double> parse_grid(std::string_view text);

struct OutputOptions {
    OutputFormat format = OutputFormat::table;
    std::optional<std::string> path;
};

struct SolverOptions {
    double tol = kDefaultTolerance;
    int max_iter = kDefaultMaxIterations;
};

/// Everything a bound or simulation run needs.
struct RunConfig {
    std::optional<ProtocolParams> params;
    std::optional<ChannelScenario> scenario;  // exactly one of scenario / rates
    std::optional<ObservedRates> rates;
    std::optional<PulseBudget> budget;  // absent => asymptotic mode
    FluctuationSettings settings;
    std::optional<double> qber;
    SolverOptions solver;
    OutputOptions output;
    std::optional<std::uint64_t> seed;
};

/// Validates and converts a config file. `need_params` requires the
/// [protocol] section; `need_source` requires [channel] or [rates].
RunConfig build_run_config(const ConfigFile& file, bool need_params = true, bool need_source = true);

struct GridSpec {
    std::vector<double> mu;
    std::vector<double> mu_prime;
    std::vector<double> eta;  // empty => use the scenario's own transmittance
};

GridSpec build_grid(const ConfigFile& file);

WeakDecoySetup build_weak_decoy(const ConfigFile& file, double* target);

// Commands. Each writes its report to `out`, notes and diagnostics to
// `err`, and returns the process exit status.
int cmd_bound(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_table1(OutputFormat format, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, const GridSpec& grid, std::ostream& out, std::ostream& err);
int cmd_feasibility(const WeakDecoySetup& setup, double target, OutputFormat format, std::ostream& out,
                    std::ostream& err);

/// Full command-line entry point (argument parsing, config loading, output
/// redirection).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace decoy::cli
