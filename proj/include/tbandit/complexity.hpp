// complexity.hpp
//
// Instance complexity constants, round-requirement curves, the Bernoulli KL
// helpers behind the lower bound, and the TBP(i) hard-instance family.
#pragma once
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tbandit/env.hpp"
#include "tbandit/policies.hpp"

namespace tbandit {

class ProblemSummary {
public:
    /// Throws DomainError if any gap is zero, or the lists differ in length.
    ProblemSummary(std::vector<double> gaps, std::vector<double> variances);

    const std::vector<double>& gaps() const noexcept { return gaps_; }
    const std::vector<double>& variances() const noexcept { return variances_; }
    std::size_t num_arms() const noexcept { return gaps_.size(); }

    /// sum gap^-2
    double h_atp() const noexcept { return h_atp_; }
    /// sum (sigma^2 gap^-2 + gap^-1)
    double h_evt() const noexcept { return h_evt_; }
    /// (1 + delta*eta)^2 * h_evt
    double h_ap_evt(double delta, double eta) const;
    /// (1 + delta*eta) * h_evt
    double h_ap_evt_pf(double delta, double eta) const;

    /// Complexity constant matching a policy: h_atp for ATP, h_evt for the
    /// synchronous variance rules, the staleness-inflated ones for AP kinds.
    double h_for(PolicyKind kind, double delta, double eta) const;

private:
    std::vector<double> gaps_;
    std::vector<double> variances_;
    double h_atp_{0.0};
    double h_evt_{0.0};
};

/// Exact constants from the true arm parameters. Throws DomainError when some
/// mu_k == b.
ProblemSummary summarize(std::span<const ArmModel> arms, double b);

struct RoundRequirement {
    double epsilon;
    double big_theta;       // unspecified positive constant, caller supplied
    std::uint64_t n_probe;  // n inside log(nK)
    std::uint64_t num_arms;
    std::uint64_t tau{0};
    double delta{0.0};
    double eta{0.0};
};

/// big_theta * H_kind * (log(n_probe K) + log(1/epsilon)) [+ (1-delta) tau for
/// AP kinds]. A theory curve for plots, not a guarantee.
double required_rounds(const ProblemSummary& summary, PolicyKind kind, const RoundRequirement& req);

/// Exploration parameter suggested by the analysis: n / H_EVT for EVT-type
/// rules and (n - (1-delta) tau) / H_AP-EVT for AP_EVT. tau and eta are
/// inputs; nothing here estimates them.
double theory_exploration(const ProblemSummary& summary, PolicyKind kind, std::uint64_t n,
                          double delta, std::uint64_t tau, double eta);

/// gap * log((1/2 + gap) / (1/2 - gap)) for gap in (0, 1/4].
double kl_bernoulli_gap(double gap);

/// Directed KL(Ber(p) || Ber(q)) in nats, p, q in (0,1).
double kl_bernoulli(double p, double q);

/// TBP(i) with b = 1/2: i = 0 puts every arm at Ber(1/2 + gap_k); i in 1..K
/// moves arm i (1-based) to Ber(1/2 - gap_i).
std::vector<ArmModel> make_tbp_instance(std::size_t i, std::span<const double> gaps);

struct LemmaSample {
    double mu;
    double sigma_sq;
    double b;
};

/// True iff sigma^2 + |mu - b| <= 1 for every sample. Throws DomainError for
/// samples outside the lemma's hypotheses (mu or b outside [0,1], or
/// sigma^2 > mu - mu^2 beyond rounding).
bool check_compare_lemma(std::span<const LemmaSample> samples);

/// exp(-10 n / h - 16 log(5 n K)).
double lower_bound_probability(std::uint64_t n, double h_evt, std::uint64_t num_arms);

} // namespace tbandit
