#include "decoy/channel_sim.hpp"

#include <cmath>
#include <random>

#include "decoy/errors.hpp"

namespace decoy {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

constexpr double kMaxSampledBudget = 4.0e18;

// sum_{n>=2} P_n(mu) y_n, truncated once the Poisson tail is negligible.
double multi_photon_rate(const ChannelScenario& scenario, double mu) {
    double sum = 0.0;
    double pn = poisson_pmf(1, mu);
    for (long n = 2; n < 2000; ++n) {
        pn *= mu / static_cast<double>(n);
        sum += pn * photon_yield(scenario, n);
        if (n > mu && pn < 1e-300) break;
        if (n > mu + 40.0 && pn < 1e-20 * sum) break;
    }
    return sum;
}

}  // namespace

void validate(const ChannelScenario& scenario) {
    std::visit(overloaded{
                   [](const NoEve& s) {
                       if (!in_unit(s.eta)) throw ParameterError("no_eve: eta must lie in [0, 1]");
                       if (!in_unit(s.s0)) throw ParameterError("no_eve: s0 must lie in [0, 1]");
                   },
                   [](const PnsAttack& s) {
                       if (!in_unit(s.q)) throw ParameterError("pns: q must lie in [0, 1]");
                       if (!in_unit(s.s0)) throw ParameterError("pns: s0 must lie in [0, 1]");
                   },
                   [](const YieldTable& s) {
                       if (!in_unit(s.s0)) throw ParameterError("yields: s0 must lie in [0, 1]");
                       if (s.yields.size() < 2) throw ParameterError("yields: table needs n_max >= 2");
                       for (double y : s.yields) {
                           if (!in_unit(y)) throw ParameterError("yields: every s_n must lie in [0, 1]");
                       }
                   },
               },
               scenario);
}

double photon_yield(const ChannelScenario& scenario, long n) {
    if (n < 0) throw DomainError("photon_yield: negative photon number");
    return std::visit(overloaded{
                          [n](const NoEve& s) {
                              const double dark = s.dark_counts_in_signal ? s.s0 : 0.0;
                              // 1 - (1 - dark)(1 - eta)^n
                              const double miss = std::expm1(static_cast<double>(n) * std::log1p(-s.eta));
                              return s.eta >= 1.0 ? (n > 0 ? 1.0 : dark) : dark - (1.0 - dark) * miss;
                          },
                          [n](const PnsAttack& s) {
                              if (n == 0) return s.s0;
                              return n == 1 ? 0.0 : s.q;
                          },
                          [n](const YieldTable& s) {
                              if (n == 0) return s.s0;
                              const auto idx = static_cast<std::size_t>(n - 1);
                              return idx < s.yields.size() ? s.yields[idx] : 0.0;
                          },
                      },
                      scenario);
}

double vacuum_class_rate(const ChannelScenario& scenario) {
    return std::visit([](const auto& s) { return s.s0; }, scenario);
}

double class_rate(const ChannelScenario& scenario, double mu) {
    return std::visit(overloaded{
                          [mu](const NoEve& s) {
                              const double dark = s.dark_counts_in_signal ? s.s0 : 0.0;
                              const double loss = std::exp(-s.eta * mu);
                              return -std::expm1(-s.eta * mu) + dark * loss;
                          },
                          [mu](const PnsAttack& s) {
                              return std::exp(-mu) * s.s0 + s.q * multi_photon_probability(mu);
                          },
                          [mu](const YieldTable& s) {
                              double rate = std::exp(-mu) * s.s0;
                              double pn = std::exp(-mu);
                              for (std::size_t i = 0; i < s.yields.size(); ++i) {
                                  pn *= mu / static_cast<double>(i + 1);
                                  rate += pn * s.yields[i];
                              }
                              return rate;
                          },
                      },
                      scenario);
}

ObservedRates expected_rates(const ChannelScenario& scenario, const ProtocolParams& params) {
    validate(scenario);
    return ObservedRates::make(vacuum_class_rate(scenario), class_rate(scenario, params.mu()),
                               class_rate(scenario, params.mu_prime()));
}

TrueDelta true_delta(const ChannelScenario& scenario, const ProtocolParams& params) {
    validate(scenario);
    auto fraction = [&](double mu) {
        const double total = class_rate(scenario, mu);
        return total > 0.0 ? multi_photon_rate(scenario, mu) / total : 0.0;
    };
    return TrueDelta{fraction(params.mu()), fraction(params.mu_prime())};
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t z = root + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::int64_t sample_binomial(std::int64_t n, double p, std::uint64_t seed) {
    if (n < 0) throw DomainError("sample_binomial: negative trial count");
    if (!in_unit(p)) throw DomainError("sample_binomial: probability outside [0, 1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    std::mt19937_64 engine(seed);
    std::binomial_distribution<std::int64_t> dist(n, p);
    return dist(engine);
}

SimulatedObservation sample_observation(const ChannelScenario& scenario, const ProtocolParams& params,
                                        const PulseBudget& budget, std::uint64_t seed) {
    const ObservedRates expected = expected_rates(scenario, params);
    if (budget.n_mu > kMaxSampledBudget || budget.n_mu_prime > kMaxSampledBudget ||
        budget.n_vacuum > kMaxSampledBudget) {
        throw ParameterError("sample_observation: budget too large to sample");
    }
    const auto n0 = static_cast<std::int64_t>(budget.n_vacuum);
    const auto n1 = static_cast<std::int64_t>(budget.n_mu);
    const auto n2 = static_cast<std::int64_t>(budget.n_mu_prime);

    ClassCounts counts;
    counts.vacuum = sample_binomial(n0, expected.s0, derive_seed(seed, 0));
    counts.mu = sample_binomial(n1, expected.s_mu, derive_seed(seed, 1));
    counts.mu_prime = sample_binomial(n2, expected.s_mu_prime, derive_seed(seed, 2));

    SimulatedObservation obs;
    obs.rates.s0 = n0 > 0 ? static_cast<double>(counts.vacuum) / budget.n_vacuum : 0.0;
    obs.rates.s_mu = static_cast<double>(counts.mu) / budget.n_mu;
    obs.rates.s_mu_prime = static_cast<double>(counts.mu_prime) / budget.n_mu_prime;
    obs.counts = counts;
    obs.budget = budget;
    obs.seed = seed;
    return obs;
}

}  // namespace decoy
