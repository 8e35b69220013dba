// policies.cpp
#include "tbandit/policies.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "tbandit/errors.hpp"

namespace tbandit {

namespace {

constexpr std::array<std::pair<PolicyKind, std::string_view>, 6> kNames{{
    {PolicyKind::ATP, "ATP"},
    {PolicyKind::EVT, "EVT"},
    {PolicyKind::AP_EVT, "AP_EVT"},
    {PolicyKind::EVT_PF, "EVT_PF"},
    {PolicyKind::AP_EVT_PF, "AP_EVT_PF"},
    {PolicyKind::EVT_APPENDIX, "EVT_APPENDIX"},
}};

void require_observed(std::uint64_t observed_count, const char* who) {
    if (observed_count == 0) {
        throw PreconditionError(std::string(who) + ": arm has no observed rewards");
    }
}

double effective_count(std::uint64_t observed, std::uint64_t pending, double delta) {
    return static_cast<double>(observed) + delta * static_cast<double>(pending);
}

} // namespace

std::string_view to_string(PolicyKind kind) noexcept {
    for (const auto& [k, name] : kNames) {
        if (k == kind) return name;
    }
    return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
    for (const auto& [k, n] : kNames) {
        if (n == name) return k;
    }
    throw ConfigError("unknown policy kind '" + std::string(name) + "'");
}

bool uses_exploration(PolicyKind kind) noexcept {
    return kind == PolicyKind::EVT || kind == PolicyKind::AP_EVT ||
           kind == PolicyKind::EVT_APPENDIX;
}

bool uses_staleness(PolicyKind kind) noexcept {
    return kind == PolicyKind::AP_EVT || kind == PolicyKind::AP_EVT_PF ||
           kind == PolicyKind::EVT_APPENDIX;
}

void PolicyConfig::validate() const {
    if (!(delta >= 0.0 && delta <= 1.0)) {
        throw ConfigError("policy delta must lie in [0,1], got " + std::to_string(delta));
    }
    if (!(a >= 0.0)) throw ConfigError("policy a must be nonnegative");
    if (uses_exploration(kind) && !(a > 0.0)) {
        throw ConfigError(std::string(to_string(kind)) + " requires a > 0");
    }
    if (!std::isfinite(b)) throw ConfigError("threshold b must be finite");
}

double index_atp(double delta_hat, std::uint64_t observed_count) {
    require_observed(observed_count, "index_atp");
    return delta_hat * std::sqrt(static_cast<double>(observed_count));
}

double index_ap_evt(double delta_hat, double sigma_hat, std::uint64_t observed_count,
                    std::uint64_t pending_count, double a, double delta) {
    if (!(a > 0.0)) throw ConfigError("index_ap_evt: a must be positive");
    require_observed(observed_count, "index_ap_evt");
    const double ratio = a / effective_count(observed_count, pending_count, delta);
    return delta_hat / (ratio + std::sqrt(ratio) * sigma_hat);
}

double index_ap_evt_pf(double delta_hat, double sigma_hat, std::uint64_t observed_count,
                       std::uint64_t pending_count, double delta) {
    require_observed(observed_count, "index_ap_evt_pf");
    const double m = effective_count(observed_count, pending_count, delta);
    return std::sqrt(m) * (std::sqrt(sigma_hat * sigma_hat + delta_hat) - sigma_hat);
}

double index_evt_appendix(double delta_hat, double sigma_hat, std::uint64_t observed_count,
                          std::uint64_t pending_count, double a, double delta) {
    if (!(a > 0.0)) throw ConfigError("index_evt_appendix: a must be positive");
    require_observed(observed_count, "index_evt_appendix");
    const double ratio = a / effective_count(observed_count, pending_count, delta);
    return delta_hat / (std::sqrt(2.0 * sigma_hat * sigma_hat * ratio) + 3.0 * ratio);
}

double policy_index(const ArmStats& stats, const PolicyConfig& config) {
    require_observed(stats.observed_count(), "policy_index");
    const double gap = std::fabs(stats.mean() - config.b);
    const auto t = stats.observed_count();
    // Non-AP rules never see the pending count.
    switch (config.kind) {
    case PolicyKind::ATP:
        return index_atp(gap, t);
    case PolicyKind::EVT:
        return index_ap_evt(gap, stats.sigma_hat(), t, 0, config.a, 0.0);
    case PolicyKind::AP_EVT:
        return index_ap_evt(gap, stats.sigma_hat(), t, stats.pending_count(), config.a,
                            config.delta);
    case PolicyKind::EVT_PF:
        return index_ap_evt_pf(gap, stats.sigma_hat(), t, 0, 0.0);
    case PolicyKind::AP_EVT_PF:
        return index_ap_evt_pf(gap, stats.sigma_hat(), t, stats.pending_count(), config.delta);
    case PolicyKind::EVT_APPENDIX:
        return index_evt_appendix(gap, stats.sigma_hat(), t, stats.pending_count(), config.a,
                                  config.delta);
    }
    throw ConfigError("policy_index: unhandled policy kind");
}

std::size_t argmin_index(std::span<const double> scores) {
    if (scores.empty()) throw PreconditionError("argmin_index: no arms");
    std::size_t best = 0;
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] < scores[best]) best = k;
    }
    return best;
}

std::size_t select_arm(std::span<const ArmStats> arms, const PolicyConfig& config) {
    if (arms.empty()) throw PreconditionError("select_arm: no arms");
    std::vector<double> scores;
    scores.reserve(arms.size());
    for (const auto& s : arms) scores.push_back(policy_index(s, config));
    return argmin_index(scores);
}

Classification classify(std::span<const ArmStats> arms, double b) {
    Classification out;
    for (std::size_t k = 0; k < arms.size(); ++k) {
        if (arms[k].mean() >= b) {
            out.above.push_back(k);
        } else {
            out.below.push_back(k);
        }
    }
    return out;
}

} // namespace tbandit
