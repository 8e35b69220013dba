// stats.cpp
#include "tbandit/stats.hpp"

#include <cmath>
#include <string>

#include "tbandit/errors.hpp"

namespace tbandit {

void ArmStats::record_reward(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("record_reward: reward " + std::to_string(x) + " outside [0,1]");
    }
    if (pending_count_ == 0) {
        throw ProtocolError("record_reward: reward without a pending pull");
    }
    --pending_count_;
    ++observed_count_;
    const double delta = x - mean_acc_;
    mean_acc_ += delta / static_cast<double>(observed_count_);
    m2_acc_ += delta * (x - mean_acc_);
    if (m2_acc_ < 0.0) m2_acc_ = 0.0;
}

double ArmStats::mean() const {
    if (observed_count_ == 0) throw PreconditionError("mean: no observed rewards");
    return mean_acc_;
}

double ArmStats::variance() const {
    if (observed_count_ == 0) throw PreconditionError("variance: no observed rewards");
    return m2_acc_ / static_cast<double>(observed_count_);
}

double ArmStats::sigma_hat() const { return std::sqrt(variance()); }

} // namespace tbandit
