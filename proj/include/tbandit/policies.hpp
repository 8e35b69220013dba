// policies.hpp
#pragma once
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tbandit/stats.hpp"

namespace tbandit {

// Selection rules. Every rule scores each arm and pulls the argmin.
//   ATP          gap * sqrt(T)
//   EVT          gap / (a/T + sqrt(a/T) * sigma)
//   AP_EVT       same with T replaced by m = T + delta * pending
//   EVT_PF       sqrt(T) * (sqrt(sigma^2 + gap) - sigma)
//   AP_EVT_PF    same with T replaced by m
//   EVT_APPENDIX gap / (sqrt(2 sigma^2 a / m) + 3a/m), the constants used in
//                the upper-bound analysis
enum class PolicyKind { ATP, EVT, AP_EVT, EVT_PF, AP_EVT_PF, EVT_APPENDIX };

std::string_view to_string(PolicyKind kind) noexcept;
PolicyKind parse_policy_kind(std::string_view name);

/// True for the rules that take the exploration parameter a.
bool uses_exploration(PolicyKind kind) noexcept;
/// True for the rules that credit pending pulls through delta.
bool uses_staleness(PolicyKind kind) noexcept;

struct PolicyConfig {
    PolicyKind kind{PolicyKind::ATP};
    double b{0.5};
    double a{1.0};
    double delta{0.0};

    /// Throws ConfigError when delta is outside [0,1], a < 0, or a == 0 for
    /// a rule that divides by it.
    void validate() const;
};

struct Classification {
    std::vector<std::size_t> above;
    std::vector<std::size_t> below;

    friend bool operator==(const Classification&, const Classification&) = default;
};

double index_atp(double delta_hat, std::uint64_t observed_count);

double index_ap_evt(double delta_hat, double sigma_hat, std::uint64_t observed_count,
                    std::uint64_t pending_count, double a, double delta);

double index_ap_evt_pf(double delta_hat, double sigma_hat, std::uint64_t observed_count,
                       std::uint64_t pending_count, double delta);

double index_evt_appendix(double delta_hat, double sigma_hat, std::uint64_t observed_count,
                          std::uint64_t pending_count, double a, double delta);

/// Score of one arm under `config`; gap is recomputed from the current mean.
/// Requires stats.observed_count() >= 1.
double policy_index(const ArmStats& stats, const PolicyConfig& config);

/// argmin of policy_index over arms; ties go to the lowest arm index.
std::size_t select_arm(std::span<const ArmStats> arms, const PolicyConfig& config);

/// Same reduction over precomputed scores.
std::size_t argmin_index(std::span<const double> scores);

/// Arms with empirical mean >= b go above.
Classification classify(std::span<const ArmStats> arms, double b);

} // namespace tbandit
