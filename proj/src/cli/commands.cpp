#include <algorithm>
#include <atomic>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "decoy/cli.hpp"
#include "decoy/errors.hpp"
#include "decoy/key_rate.hpp"
#include "decoy/table1.hpp"
#include "json.hpp"

namespace decoy::cli {

namespace {

using json = nlohmann::ordered_json;

struct MethodResult {
    BoundReport report;
    std::optional<KeyRate> key_mu;
    std::optional<KeyRate> key_mu_prime;
};

std::vector<Column> bound_columns(bool with_source) {
    std::vector<Column> cols;
    if (with_source) cols.push_back({"source", ColumnKind::text});
    cols.insert(cols.end(), {{"method", ColumnKind::text},
                             {"delta_upper", ColumnKind::fraction},
                             {"delta_prime_upper", ColumnKind::fraction},
                             {"s1_lower", ColumnKind::number},
                             {"sc_upper", ColumnKind::number},
                             {"key_rate_mu", ColumnKind::number},
                             {"key_rate_mu_prime", ColumnKind::number},
                             {"clamped", ColumnKind::flag},
                             {"vacuous", ColumnKind::flag},
                             {"degenerate", ColumnKind::flag}});
    return cols;
}

Cell key_cell(const std::optional<KeyRate>& k) {
    if (!k) return std::monostate{};
    return k->rate;
}

std::vector<Cell> bound_row(const MethodResult& m, std::optional<std::string> source) {
    std::vector<Cell> row;
    if (source) row.emplace_back(*source);
    const BoundReport& r = m.report;
    row.insert(row.end(), {std::string(to_string(r.method)), r.delta_upper, r.delta_prime_upper, r.s1_lower,
                           r.sc_upper, key_cell(m.key_mu), key_cell(m.key_mu_prime), r.clamped, r.vacuous,
                           r.degenerate});
    return row;
}

json report_json(const MethodResult& m) {
    const BoundReport& r = m.report;
    json j;
    j["method"] = to_string(r.method);
    j["delta_upper"] = r.delta_upper;
    j["delta_prime_upper"] = r.delta_prime_upper;
    j["s1_lower"] = r.s1_lower;
    j["sc_upper"] = r.sc_upper;
    j["clamped"] = r.clamped;
    j["vacuous"] = r.vacuous;
    j["degenerate"] = r.degenerate;
    j["iterations"] = r.iterations;
    j["key_rate_mu"] = m.key_mu ? json(m.key_mu->rate) : json(nullptr);
    j["key_rate_mu_prime"] = m.key_mu_prime ? json(m.key_mu_prime->rate) : json(nullptr);
    return j;
}

json rates_json(const ObservedRates& r) {
    return json{{"s0", r.s0}, {"s_mu", r.s_mu}, {"s_mu_prime", r.s_mu_prime}};
}

json scenario_json(const ChannelScenario& s) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, NoEve>) {
                return json{{"kind", "no_eve"},
                            {"eta", v.eta},
                            {"s0", v.s0},
                            {"dark_counts_in_signal", v.dark_counts_in_signal}};
            } else if constexpr (std::is_same_v<T, PnsAttack>) {
                return json{{"kind", "pns"}, {"q", v.q}, {"s0", v.s0}};
            } else {
                return json{{"kind", "yields"}, {"s0", v.s0}, {"yields", v.yields}};
            }
        },
        s);
}

json inputs_json(const RunConfig& c) {
    json j;
    j["mu"] = c.params->mu();
    j["mu_prime"] = c.params->mu_prime();
    j["scenario"] = c.scenario ? scenario_json(*c.scenario) : json(nullptr);
    j["supplied_rates"] = c.rates ? rates_json(*c.rates) : json(nullptr);
    if (c.budget) {
        j["budget"] = json{{"n_mu", c.budget->n_mu}, {"n_mu_prime", c.budget->n_mu_prime},
                           {"n_vacuum", c.budget->n_vacuum}};
    } else {
        j["budget"] = nullptr;
    }
    j["confidence_exponent"] = c.settings.confidence_exponent;
    j["r0"] = c.settings.r0;
    j["subpopulation"] =
        c.settings.subpopulation == SubPopulation::signal_class ? "signal_class" : "min_over_classes";
    j["qber"] = c.qber ? json(*c.qber) : json(nullptr);
    return j;
}

std::optional<KeyRate> key_for(const RunConfig& c, double delta) {
    if (!c.qber) return std::nullopt;
    return gllp_rate(KeyRateInput::make(delta, *c.qber));
}

MethodResult with_keys(const RunConfig& c, BoundReport r) {
    MethodResult m{r, key_for(c, r.delta_upper), key_for(c, r.delta_prime_upper)};
    return m;
}

/// Hwang, asymptotic and (with a budget) finite bounds on one set of rates.
/// The last entry is the primary result.
std::vector<MethodResult> run_pipeline(const RunConfig& c, const ObservedRates& rates,
                                       const std::optional<PulseBudget>& budget) {
    const ProtocolParams& p = *c.params;
    std::vector<MethodResult> out;
    out.push_back(with_keys(c, hwang_bound(rates, p)));
    out.push_back(with_keys(c, wang_asymptotic_bound(rates, p)));
    if (budget) {
        out.push_back(with_keys(c, finite_bound(rates, p, *budget, c.settings, c.solver.tol, c.solver.max_iter)));
    }
    return out;
}

std::string describe_rates(const ObservedRates& r) {
    return "s0 = " + format_human(r.s0) + ", S_mu = " + format_human(r.s_mu) +
           ", S_mu' = " + format_human(r.s_mu_prime);
}

int verdict_code(const BoundReport& primary) { return primary.vacuous ? kVacuous : kOk; }

void print_verdict(const BoundReport& primary, std::ostream& out) {
    if (primary.vacuous) {
        out << "verdict: vacuous bound (Delta <= 1); abandon the run\n";
    } else {
        out << "verdict: Delta <= " << format_human(100.0 * primary.delta_upper) << "%, Delta' <= "
            << format_human(100.0 * primary.delta_prime_upper) << "% (" << to_string(primary.method) << ")\n";
    }
}

}  // namespace

int cmd_bound(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const ProtocolParams& p = *config.params;
    const ObservedRates rates = config.rates ? *config.rates : expected_rates(*config.scenario, p);
    if (!(rates.s_mu > 0.0)) {
        err << "error: S_mu is zero; no counts in the signal class, nothing to bound\n";
        return kConfigError;
    }
    std::vector<MethodResult> results;
    try {
        results = run_pipeline(config, rates, config.budget);
    } catch (const ConvergenceError& ex) {
        err << "error: " << ex.what() << " (last s_c = " << format_machine(ex.last_sc()) << ")\n";
        return kNoConvergence;
    }
    const BoundReport& primary = results.back().report;
    if (primary.degenerate) err << "note: S_mu' is zero; input is degenerate\n";
    std::optional<TrueDelta> truth;
    if (config.scenario) truth = true_delta(*config.scenario, p);

    Tabular table;
    table.columns = bound_columns(false);
    for (const auto& m : results) table.add_row(bound_row(m, std::nullopt));

    switch (config.output.format) {
        case OutputFormat::table:
            out << "mu = " << format_human(p.mu()) << ", mu' = " << format_human(p.mu_prime()) << '\n';
            out << "rates: " << describe_rates(rates) << '\n';
            if (config.budget) {
                out << "pulses: N_mu = " << format_human(config.budget->n_mu)
                    << ", N_mu' = " << format_human(config.budget->n_mu_prime)
                    << ", N_0 = " << format_human(config.budget->n_vacuum) << '\n';
            } else {
                out << "pulses: asymptotic\n";
            }
            if (truth) {
                out << "scenario truth: Delta = " << format_human(100.0 * truth->delta)
                    << "%, Delta' = " << format_human(100.0 * truth->delta_prime) << "%\n";
            }
            out << '\n';
            write_text_table(table, out);
            out << '\n';
            print_verdict(primary, out);
            break;
        case OutputFormat::csv: write_csv(table, out); break;
        case OutputFormat::json: {
            json j;
            j["command"] = "bound";
            j["inputs"] = inputs_json(config);
            j["rates"] = rates_json(rates);
            j["true_delta"] = truth ? json{{"delta", truth->delta}, {"delta_prime", truth->delta_prime}}
                                    : json(nullptr);
            j["reports"] = json::array();
            for (const auto& m : results) j["reports"].push_back(report_json(m));
            j["primary"] = to_string(primary.method);
            out << j.dump(2) << '\n';
            break;
        }
    }
    return verdict_code(primary);
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    if (!config.scenario) {
        err << "error: simulate needs a [channel] scenario\n";
        return kConfigError;
    }
    if (!config.budget) {
        err << "error: simulate needs a [budget] section\n";
        return kConfigError;
    }
    if (!config.seed) {
        err << "error: simulate needs --seed or [simulate] seed\n";
        return kConfigError;
    }
    const ProtocolParams& p = *config.params;
    const ObservedRates expected = expected_rates(*config.scenario, p);
    SimulatedObservation obs;
    try {
        obs = sample_observation(*config.scenario, p, *config.budget, *config.seed);
    } catch (const ParameterError& ex) {
        err << "error: " << ex.what() << '\n';
        return kConfigError;
    }
    if (!(expected.s_mu > 0.0) || !(obs.rates.s_mu > 0.0)) {
        err << "error: no clicks in the signal class, nothing to bound\n";
        return kConfigError;
    }

    std::vector<MethodResult> from_expected;
    std::vector<MethodResult> from_sampled;
    try {
        from_expected = run_pipeline(config, expected, config.budget);
        from_sampled = run_pipeline(config, obs.rates, config.budget);
    } catch (const ConvergenceError& ex) {
        err << "error: " << ex.what() << '\n';
        return kNoConvergence;
    }
    const BoundReport& primary = from_sampled.back().report;

    Tabular table;
    table.columns = bound_columns(true);
    for (const auto& m : from_expected) table.add_row(bound_row(m, "expected"));
    for (const auto& m : from_sampled) table.add_row(bound_row(m, "sampled"));

    const ClassCounts& counts = *obs.counts;
    switch (config.output.format) {
        case OutputFormat::table:
            out << "mu = " << format_human(p.mu()) << ", mu' = " << format_human(p.mu_prime())
                << ", seed = " << *config.seed << '\n';
            out << "clicks: Y_0 = " << counts.vacuum << ", Y_mu = " << counts.mu << ", Y_mu' = " << counts.mu_prime
                << '\n';
            out << "expected rates: " << describe_rates(expected) << '\n';
            out << "sampled rates:  " << describe_rates(obs.rates) << "\n\n";
            write_text_table(table, out);
            out << '\n';
            print_verdict(primary, out);
            break;
        case OutputFormat::csv: write_csv(table, out); break;
        case OutputFormat::json: {
            json j;
            j["command"] = "simulate";
            j["inputs"] = inputs_json(config);
            j["seed"] = *config.seed;
            j["counts"] = json{{"vacuum", counts.vacuum}, {"mu", counts.mu}, {"mu_prime", counts.mu_prime}};
            j["expected_rates"] = rates_json(expected);
            j["sampled_rates"] = rates_json(obs.rates);
            j["reports"] = json::object();
            j["reports"]["expected"] = json::array();
            for (const auto& m : from_expected) j["reports"]["expected"].push_back(report_json(m));
            j["reports"]["sampled"] = json::array();
            for (const auto& m : from_sampled) j["reports"]["sampled"].push_back(report_json(m));
            out << j.dump(2) << '\n';
            break;
        }
    }
    return verdict_code(primary);
}

int cmd_table1(OutputFormat format, std::ostream& out, std::ostream&) {
    Tabular table;
    table.columns = {{"row", ColumnKind::text},          {"mu", ColumnKind::number},
                     {"mu_prime", ColumnKind::number},   {"eta", ColumnKind::number},
                     {"n_pulses", ColumnKind::number},   {"computed", ColumnKind::fraction},
                     {"printed", ColumnKind::fraction},  {"deviation", ColumnKind::fraction}};
    auto opt = [](double v) -> Cell {
        if (v == 0.0) return std::monostate{};
        return v;
    };
    for (const auto& e : table1::reproduce()) {
        table.add_row({e.row, e.mu, opt(e.mu_prime), opt(e.eta), opt(e.n_pulses), e.computed, e.printed,
                       std::abs(e.computed - e.printed)});
    }
    if (format == OutputFormat::table) {
        out << "Tagged-fraction table: s0 = 1e-6, N_0 = 4e9; W1 at eta = 1e-3, N = 1e10; "
               "W2 at eta = 1e-4, N = 8e10\n\n";
    }
    render(table, format, out);
    return kOk;
}

int cmd_sweep(const RunConfig& config, const GridSpec& grid, std::ostream& out, std::ostream& err) {
    if (!config.scenario) {
        err << "error: sweep needs a [channel] scenario\n";
        return kConfigError;
    }
    if (!grid.eta.empty() && !std::holds_alternative<NoEve>(*config.scenario)) {
        err << "error: an eta grid only applies to kind = no_eve\n";
        return kConfigError;
    }

    struct SweepCell {
        double mu = 0.0, mu_prime = 0.0;
        ChannelScenario scenario;
        std::optional<double> eta;
        bool admissible = true;
        bool failed = false;
        std::string note;
        ObservedRates rates;
        BoundReport report;
        std::optional<KeyRate> key;
    };

    std::vector<SweepCell> cells;
    const std::vector<double> etas =
        grid.eta.empty() ? std::vector<double>{-1.0} : grid.eta;  // -1: keep the scenario's eta
    for (double mu : grid.mu) {
        for (double mp : grid.mu_prime) {
            for (double eta : etas) {
                SweepCell cell;
                cell.mu = mu;
                cell.mu_prime = mp;
                cell.scenario = *config.scenario;
                if (auto* ne = std::get_if<NoEve>(&cell.scenario)) {
                    if (eta >= 0.0) ne->eta = eta;
                    cell.eta = ne->eta;
                }
                cells.push_back(std::move(cell));
            }
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            SweepCell& cell = cells[i];
            const PairVerdict verdict = validate_pair(cell.mu, cell.mu_prime);
            if (!verdict) {
                cell.admissible = false;
                cell.note = std::string(describe(verdict.violation));
                continue;
            }
            try {
                const ProtocolParams p(cell.mu, cell.mu_prime);
                validate(cell.scenario);
                cell.rates = expected_rates(cell.scenario, p);
                if (!(cell.rates.s_mu > 0.0)) throw DomainError("S_mu is zero");
                cell.report = config.budget ? finite_bound(cell.rates, p, *config.budget, config.settings,
                                                           config.solver.tol, config.solver.max_iter)
                                            : wang_asymptotic_bound(cell.rates, p);
                cell.key = key_for(config, cell.report.delta_upper);
            } catch (const ConvergenceError& ex) {
                cell.failed = true;
                cell.note = ex.what();
            } catch (const std::exception& ex) {
                cell.admissible = false;
                cell.note = ex.what();
            }
        }
    };
    const unsigned nthreads = std::max(1u, std::min(std::thread::hardware_concurrency(), 16u));
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
    }

    Tabular table;
    table.columns = {{"mu", ColumnKind::number},
                     {"mu_prime", ColumnKind::number},
                     {"eta", ColumnKind::number},
                     {"n_pulses", ColumnKind::number},
                     {"s0", ColumnKind::number},
                     {"delta_upper", ColumnKind::fraction},
                     {"delta_prime_upper", ColumnKind::fraction},
                     {"s1_lower", ColumnKind::number},
                     {"key_rate", ColumnKind::number},
                     {"clamped", ColumnKind::flag},
                     {"vacuous", ColumnKind::flag}};
    bool any_failed = false;
    for (const SweepCell& cell : cells) {
        if (!cell.admissible || cell.failed) {
            err << "note: skipped mu = " << format_machine(cell.mu) << ", mu' = " << format_machine(cell.mu_prime)
                << ": " << cell.note << '\n';
            any_failed = any_failed || cell.failed;
            continue;
        }
        const BoundReport& r = cell.report;
        table.add_row({cell.mu, cell.mu_prime, cell.eta ? decoy::Cell(*cell.eta) : decoy::Cell(std::monostate{}),
                       config.budget ? decoy::Cell(config.budget->n_mu) : decoy::Cell(std::monostate{}),
                       cell.rates.s0, r.delta_upper, r.delta_prime_upper, r.s1_lower,
                       cell.key ? decoy::Cell(cell.key->rate) : decoy::Cell(std::monostate{}),
                       r.clamped || (cell.key && cell.key->clamped), r.vacuous});
    }
    if (table.rows.empty() && !any_failed) {
        err << "error: no admissible (mu, mu') cell in the grid\n";
        return kConfigError;
    }
    render(table, config.output.format, out);
    return any_failed ? kNoConvergence : kOk;
}

int cmd_feasibility(const WeakDecoySetup& setup, double target, OutputFormat format, std::ostream& out,
                    std::ostream&) {
    const FeasibilityReport r = feasibility_report(setup, target);
    Tabular table;
    table.columns = {{"eta", ColumnKind::number},
                     {"s0", ColumnKind::number},
                     {"mu_v", ColumnKind::number},
                     {"rep_rate", ColumnKind::number},
                     {"confidence_exponent", ColumnKind::number},
                     {"target", ColumnKind::number},
                     {"s1_lower", ColumnKind::number},
                     {"signal_clicks_per_pulse", ColumnKind::number},
                     {"dark_clicks_per_pulse", ColumnKind::number},
                     {"required_pulses", ColumnKind::number},
                     {"seconds", ColumnKind::number},
                     {"days", ColumnKind::number},
                     {"practical", ColumnKind::flag}};
    table.add_row({setup.eta, setup.s0, setup.mu_v, setup.rep_rate, setup.confidence_exponent, target, r.s1_lower,
                   r.signal_clicks_per_pulse, r.dark_clicks_per_pulse, r.required_pulses, r.seconds, r.days,
                   r.practical});
    switch (format) {
        case OutputFormat::table:
            out << "weak decoy: eta = " << format_human(setup.eta) << ", s0 = " << format_human(setup.s0)
                << ", mu_v = " << format_human(setup.mu_v) << '\n';
            out << "single-photon yield bound (dark counts known exactly): " << format_human(r.s1_lower) << '\n';
            out << "clicks per decoy pulse: signal " << format_human(r.signal_clicks_per_pulse) << " vs dark "
                << format_human(r.dark_clicks_per_pulse) << '\n';
            out << "pulses for " << format_human(100.0 * target) << "% relative dark-count fluctuation at e^-"
                << format_human(setup.confidence_exponent) << ": " << format_human(r.required_pulses) << '\n';
            out << "acquisition at " << format_human(setup.rep_rate) << " pulses/s: " << format_human(r.seconds)
                << " s = " << format_human(r.days) << " days\n";
            out << "verdict: " << (r.practical ? "practical" : "impractical") << '\n';
            break;
        case OutputFormat::csv: write_csv(table, out); break;
        case OutputFormat::json: {
            json j;
            j["command"] = "feasibility";
            for (std::size_t i = 0; i < table.columns.size(); ++i) {
                std::visit(
                    [&](const auto& v) {
                        using T = std::decay_t<decltype(v)>;
                        if constexpr (!std::is_same_v<T, std::monostate>) j[table.columns[i].name] = v;
                    },
                    table.rows[0][i]);
            }
            out << j.dump(2) << '\n';
            break;
        }
    }
    return r.practical ? kOk : kImpractical;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Verify upper bounds on the multi-photon fraction in decoy-state QKD"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string format_text;
    std::string out_path;
    std::uint64_t seed = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "Configuration file (INI-style sections)");
    app.add_option("--format", format_text, "Output format: table|json|csv");
    app.add_option("--out", out_path, "Write the report to this file instead of stdout");
    auto* seed_opt = app.add_option("--seed", seed, "Root RNG seed for simulate");
    app.add_option("--set", overrides, "Override a config entry: section.key=value (repeatable)");

    auto* bound = app.add_subcommand("bound", "Verify Delta / Delta' for one configuration");
    auto* simulate = app.add_subcommand("simulate", "Sample click counts and bound the sampled rates");
    auto* table = app.add_subcommand("table1", "Recompute the published tagged-fraction table");
    auto* sweep = app.add_subcommand("sweep", "Evaluate a (mu, mu', eta) grid");
    auto* feas = app.add_subcommand("feasibility", "Pulse-count feasibility of the vacuum + weak decoy idea");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        ConfigFile file;
        if (!config_path.empty()) file = ConfigFile::load(config_path);
        for (const auto& o : overrides) file.apply_override(o);
        if (!format_text.empty()) file.set("output.format", format_text, "--format");
        if (!out_path.empty()) file.set("output.path", out_path, "--out");
        if (seed_opt->count() > 0) file.set("simulate.seed", std::to_string(seed), "--seed");

        std::ofstream file_out;
        std::ostream* sink = &out;
        auto open_sink = [&](const std::optional<std::string>& path) {
            if (!path) return;
            file_out.open(*path, std::ios::binary);
            if (!file_out) throw ConfigError("--out", "cannot open '" + *path + "' for writing");
            sink = &file_out;
        };

        if (*table || *feas) {
            file.reject_unknown({"output.format", "output.path", "simulate.seed", "feasibility.eta",
                                 "feasibility.s0", "feasibility.mu_v", "feasibility.rep_rate",
                                 "feasibility.confidence_exponent", "feasibility.target"});
            OutputFormat fmt = OutputFormat::table;
            if (const auto f = file.get_string("output.format")) {
                try {
                    fmt = parse_output_format(*f);
                } catch (const std::invalid_argument& ex) {
                    throw ConfigError(file.location("output.format"), ex.what());
                }
            }
            open_sink(file.get_string("output.path"));
            if (*table) return cmd_table1(fmt, *sink, err);
            double target = 1e-3;
            const WeakDecoySetup setup = build_weak_decoy(file, &target);
            return cmd_feasibility(setup, target, fmt, *sink, err);
        }

        const bool is_sweep = sweep->parsed();
        const RunConfig config = build_run_config(file, !is_sweep, true);
        open_sink(config.output.path);
        if (*bound) return cmd_bound(config, *sink, err);
        if (*simulate) return cmd_simulate(config, *sink, err);
        return cmd_sweep(config, build_grid(file), *sink, err);
    } catch (const ConfigError& ex) {
        err << "config error: " << ex.what() << '\n';
        return kConfigError;
    } catch (const ParameterError& ex) {
        err << "config error: " << ex.what() << '\n';
        return kConfigError;
    } catch (const DomainError& ex) {
        err << "error: " << ex.what() << '\n';
        return kConfigError;
    }
}

}  // namespace decoy::cli
