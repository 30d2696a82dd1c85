#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "decoy/cli.hpp"
#include "decoy/errors.hpp"

namespace decoy::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

// Rounds away binary noise from accumulated range steps (0.4 + 3*0.01).
double tidy(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    double out = v;
    std::from_chars(buf, res.ptr, out);
    return out;
}

const std::vector<std::string_view> kKnownKeys = {
    "protocol.mu",          "protocol.mu_prime",
    "channel.kind",         "channel.eta",
    "channel.s0",           "channel.dark_counts_in_signal",
    "channel.q",            "channel.yields",
    "rates.s0",             "rates.s_mu",
    "rates.s_mu_prime",     "budget.n_mu",
    "budget.n_mu_prime",    "budget.n_vacuum",
    "fluctuation.confidence_exponent",
    "fluctuation.r0",       "fluctuation.subpopulation",
    "key.qber",             "solver.tol",
    "solver.max_iter",      "sweep.mu",
    "sweep.mu_prime",       "sweep.eta",
    "feasibility.eta",      "feasibility.s0",
    "feasibility.mu_v",     "feasibility.rep_rate",
    "feasibility.confidence_exponent",
    "feasibility.target",   "output.format",
    "output.path",          "simulate.seed",
};

}  // namespace

ConfigFile ConfigFile::parse(std::string_view text, const std::string& origin) {
    ConfigFile cfg;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::string where = origin + ":" + std::to_string(line_no);

        const auto hash = raw.find_first_of("#;");
        std::string_view line = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where, "unterminated section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (section.empty()) throw ConfigError(where, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError(where, "missing key before '='");
        if (section.empty()) throw ConfigError(where, "key '" + key + "' appears before any [section]");
        cfg.set(section + "." + key, std::string(trim(line.substr(eq + 1))), where);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

void ConfigFile::apply_override(std::string_view assignment) {
    const std::string where = "--set " + std::string(assignment);
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where, "expected section.key=value");
    const std::string key(trim(assignment.substr(0, eq)));
    if (key.find('.') == std::string::npos) throw ConfigError(where, "key must be written as section.key");
    set(key, std::string(trim(assignment.substr(eq + 1))), where);
}

void ConfigFile::set(const std::string& key, const std::string& value, const std::string& location) {
    entries_[key] = Entry{value, location};
}

bool ConfigFile::has_section(std::string_view section) const {
    const std::string prefix = std::string(section) + ".";
    const auto it = entries_.lower_bound(prefix);
    return it != entries_.end() && it->first.compare(0, prefix.size(), prefix) == 0;
}

const ConfigFile::Entry* ConfigFile::find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

std::string ConfigFile::location(const std::string& key) const {
    const Entry* e = find(key);
    return e ? e->location : std::string();
}

std::optional<double> ConfigFile::get_double(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    const auto v = to_double(e->value);
    if (!v) throw ConfigError(e->location, key + ": '" + e->value + "' is not a number");
    return v;
}

double ConfigFile::require_double(const std::string& key) const {
    const auto v = get_double(key);
    if (!v) throw ConfigError("", "missing required key " + key);
    return *v;
}

std::optional<bool> ConfigFile::get_bool(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    const std::string& v = e->value;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(e->location, key + ": '" + v + "' is not a boolean");
}

std::optional<std::string> ConfigFile::get_string(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    return e->value;
}

std::optional<std::vector<double>> ConfigFile::get_grid(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) return std::nullopt;
    try {
        return parse_grid(e->value);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(e->location, key + ": " + ex.what());
    }
}

void ConfigFile::reject_unknown(const std::vector<std::string_view>& known) const {
    for (const auto& [key, entry] : entries_) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(entry.location, "unknown key '" + key + "'");
        }
    }
}

std::vector<double> parse_grid(std::string_view text) {
    text = trim(text);
    if (text.empty()) throw std::invalid_argument("empty grid");
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        std::vector<double> parts;
        std::size_t start = 0;
        while (true) {
            const auto colon = text.find(':', start);
            const auto v = to_double(text.substr(start, colon == std::string_view::npos ? colon : colon - start));
            if (!v) throw std::invalid_argument("range must be start:stop:step");
            parts.push_back(*v);
            if (colon == std::string_view::npos) break;
            start = colon + 1;
        }
        if (parts.size() != 3) throw std::invalid_argument("range must be start:stop:step");
        const double a = parts[0], b = parts[1], step = parts[2];
        if (!(step > 0.0) || b < a) throw std::invalid_argument("range needs step > 0 and stop >= start");
        const auto count = static_cast<long>(std::floor((b - a) / step + 1e-9)) + 1;
        if (count > 1000000) throw std::invalid_argument("range has too many points");
        for (long i = 0; i < count; ++i) out.push_back(tidy(a + static_cast<double>(i) * step));
        return out;
    }
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        const auto v = to_double(text.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (!v) throw std::invalid_argument("list entries must be numbers");
        out.push_back(*v);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

RunConfig build_run_config(const ConfigFile& file, bool need_params, bool need_source) {
    file.reject_unknown(kKnownKeys);
    RunConfig cfg;

    if (file.has("protocol.mu") || file.has("protocol.mu_prime") || need_params) {
        const double mu = file.require_double("protocol.mu");
        const double mu_prime = file.require_double("protocol.mu_prime");
        const PairVerdict verdict = validate_pair(mu, mu_prime);
        if (!verdict) {
            // Point at whichever of the two lines was assigned last.
            const std::string loc_mu = file.location("protocol.mu");
            const std::string loc_mp = file.location("protocol.mu_prime");
            const bool mu_overridden = loc_mu.rfind("--set", 0) == 0;
            throw ConfigError(mu_overridden ? loc_mu : loc_mp,
                              "invalid intensity pair: " + std::string(describe(verdict.violation)));
        }
        cfg.params = ProtocolParams(mu, mu_prime);
    }

    const bool has_channel = file.has_section("channel");
    const bool has_rates = file.has_section("rates");
    if (has_channel && has_rates) {
        throw ConfigError(file.location("rates.s_mu"), "give either [channel] or [rates], not both");
    }
    if (need_source && !has_channel && !has_rates) throw ConfigError("", "missing [channel] or [rates] section");

    // Probabilities are range-checked per key so the diagnostic names the line.
    auto probability = [&](const std::string& key, std::optional<double> fallback) {
        const std::optional<double> v = fallback ? file.get_double(key).value_or(*fallback) : file.require_double(key);
        if (!(*v >= 0.0 && *v <= 1.0)) throw ConfigError(file.location(key), key + " must lie in [0, 1]");
        return *v;
    };

    if (has_channel) {
        const std::string kind = file.get_string("channel.kind").value_or("no_eve");
        const std::string where = file.location("channel.kind");
        try {
            if (kind == "no_eve") {
                NoEve s;
                s.eta = probability("channel.eta", std::nullopt);
                s.s0 = probability("channel.s0", 0.0);
                s.dark_counts_in_signal = file.get_bool("channel.dark_counts_in_signal").value_or(true);
                cfg.scenario = s;
            } else if (kind == "pns") {
                cfg.scenario = PnsAttack{probability("channel.q", 1.0), probability("channel.s0", 0.0)};
            } else if (kind == "yields") {
                const auto table = file.get_grid("channel.yields");
                if (!table) throw ConfigError(where, "kind = yields needs a 'yields' list (s_1, s_2, ...)");
                cfg.scenario = YieldTable{probability("channel.s0", 0.0), *table};
            } else {
                throw ConfigError(where, "unknown channel kind '" + kind + "' (no_eve|pns|yields)");
            }
            validate(*cfg.scenario);
        } catch (const ParameterError& ex) {
            throw ConfigError(where, ex.what());
        }
    }
    if (has_rates) {
        try {
            cfg.rates = ObservedRates::make(probability("rates.s0", std::nullopt), probability("rates.s_mu", std::nullopt),
                                            probability("rates.s_mu_prime", std::nullopt));
        } catch (const ParameterError& ex) {
            throw ConfigError(file.location("rates.s_mu"), ex.what());
        }
    }

    if (file.has_section("budget")) {
        const double n_mu = file.require_double("budget.n_mu");
        const double n_mu_prime = file.get_double("budget.n_mu_prime").value_or(n_mu);
        const double n_vacuum = file.get_double("budget.n_vacuum").value_or(0.0);
        try {
            cfg.budget = PulseBudget::make(n_mu, n_mu_prime, n_vacuum);
        } catch (const ParameterError& ex) {
            throw ConfigError(file.location("budget.n_mu"), ex.what());
        }
    }

    cfg.settings.confidence_exponent = file.get_double("fluctuation.confidence_exponent").value_or(25.0);
    cfg.settings.r0 = file.get_double("fluctuation.r0").value_or(0.0);
    if (const auto sub = file.get_string("fluctuation.subpopulation")) {
        if (*sub == "signal_class") {
            cfg.settings.subpopulation = SubPopulation::signal_class;
        } else if (*sub == "min_over_classes") {
            cfg.settings.subpopulation = SubPopulation::min_over_classes;
        } else {
            throw ConfigError(file.location("fluctuation.subpopulation"),
                              "subpopulation must be signal_class or min_over_classes");
        }
    }
    try {
        cfg.settings.validate();
    } catch (const ParameterError& ex) {
        throw ConfigError(file.location("fluctuation.confidence_exponent"), ex.what());
    }

    if (const auto q = file.get_double("key.qber")) {
        if (!(*q >= 0.0 && *q <= 0.5)) throw ConfigError(file.location("key.qber"), "qber must lie in [0, 0.5]");
        cfg.qber = *q;
    }

    cfg.solver.tol = file.get_double("solver.tol").value_or(kDefaultTolerance);
    if (!(cfg.solver.tol > 0.0 && cfg.solver.tol <= 1e-6)) {
        throw ConfigError(file.location("solver.tol"), "tol must lie in (0, 1e-6]");
    }
    if (const auto m = file.get_double("solver.max_iter")) {
        if (!(*m >= 1.0) || *m > 1e9 || std::floor(*m) != *m) {
            throw ConfigError(file.location("solver.max_iter"), "max_iter must be a positive integer");
        }
        cfg.solver.max_iter = static_cast<int>(*m);
    }

    if (const auto fmt = file.get_string("output.format")) {
        try {
            cfg.output.format = parse_output_format(*fmt);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(file.location("output.format"), ex.what());
        }
    }
    cfg.output.path = file.get_string("output.path");

    if (const auto* e = file.find("simulate.seed")) {
        std::uint64_t seed = 0;
        const auto res = std::from_chars(e->value.data(), e->value.data() + e->value.size(), seed);
        if (res.ec != std::errc() || res.ptr != e->value.data() + e->value.size()) {
            throw ConfigError(e->location, "seed must be an unsigned 64-bit integer");
        }
        cfg.seed = seed;
    }
    return cfg;
}

GridSpec build_grid(const ConfigFile& file) {
    GridSpec grid;
    const auto mu = file.get_grid("sweep.mu");
    const auto mu_prime = file.get_grid("sweep.mu_prime");
    if (!mu || !mu_prime) throw ConfigError("", "sweep needs [sweep] mu and mu_prime grids");
    grid.mu = *mu;
    grid.mu_prime = *mu_prime;
    grid.eta = file.get_grid("sweep.eta").value_or(std::vector<double>{});
    return grid;
}

WeakDecoySetup build_weak_decoy(const ConfigFile& file, double* target) {
    file.reject_unknown(kKnownKeys);
    WeakDecoySetup s;
    s.eta = file.get_double("feasibility.eta").value_or(s.eta);
    s.s0 = file.get_double("feasibility.s0").value_or(s.s0);
    s.mu_v = file.get_double("feasibility.mu_v").value_or(s.eta);
    s.rep_rate = file.get_double("feasibility.rep_rate").value_or(s.rep_rate);
    s.confidence_exponent = file.get_double("feasibility.confidence_exponent").value_or(s.confidence_exponent);
    if (target) *target = file.get_double("feasibility.target").value_or(1e-3);
    try {
        s.validate();
    } catch (const ParameterError& ex) {
        throw ConfigError(file.location("feasibility.mu_v"), ex.what());
    }
    if (target && !(*target > 0.0 && *target <= 1.0)) {
        throw ConfigError(file.location("feasibility.target"), "target must lie in (0, 1]");
    }
    return s;
}

}  // namespace decoy::cli
