// stats.hpp
#pragma once
#include <cstdint>

namespace tbandit {

/// Running per-arm state: observed rewards T_k, pending pulls tau_k, and
/// one-pass (Welford) first/second moments of the observed rewards.
///
/// The variance is the divide-by-T estimator; there is deliberately no
/// divide-by-(T-1) accessor.
class ArmStats {
public:
    ArmStats() = default;

    /// Marks one pull as issued: its reward is not yet visible.
    void record_pull_issued() noexcept { ++pending_count_; }

    /// Resolves one pending pull with reward x in [0,1].
    /// Throws DomainError for x outside [0,1] (or NaN), ProtocolError when
    /// no pull is pending.
    void record_reward(double x);

    std::uint64_t observed_count() const noexcept { return observed_count_; }
    std::uint64_t pending_count() const noexcept { return pending_count_; }

    /// Empirical mean of observed rewards. Requires observed_count() >= 1.
    double mean() const;
    /// (1/T) * sum (x - mean)^2. Requires observed_count() >= 1.
    double variance() const;
    /// sqrt(variance()).
    double sigma_hat() const;

    double m2() const noexcept { return m2_acc_; }

    friend bool operator==(const ArmStats&, const ArmStats&) = default;

private:
    std::uint64_t observed_count_{0};
    std::uint64_t pending_count_{0};
    double mean_acc_{0.0};
    double m2_acc_{0.0};
};

} // namespace tbandit
