// complexity.cpp
#include "tbandit/complexity.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "tbandit/errors.hpp"

namespace tbandit {

ProblemSummary::ProblemSummary(std::vector<double> gaps, std::vector<double> variances)
    : gaps_(std::move(gaps)), variances_(std::move(variances)) {
    if (gaps_.size() != variances_.size()) {
        throw DomainError("ProblemSummary: gaps and variances differ in length");
    }
    for (std::size_t k = 0; k < gaps_.size(); ++k) {
        const double g = gaps_[k];
        if (!(g > 0.0)) {
            throw DomainError("ProblemSummary: arm " + std::to_string(k) +
                              " has zero gap; every complexity constant would be infinite");
        }
        h_atp_ += 1.0 / (g * g);
        h_evt_ += variances_[k] / (g * g) + 1.0 / g;
    }
}

double ProblemSummary::h_ap_evt(double delta, double eta) const {
    const double f = 1.0 + delta * eta;
    return f * f * h_evt_;
}

double ProblemSummary::h_ap_evt_pf(double delta, double eta) const {
    return (1.0 + delta * eta) * h_evt_;
}

double ProblemSummary::h_for(PolicyKind kind, double delta, double eta) const {
    switch (kind) {
    case PolicyKind::ATP:
        return h_atp_;
    case PolicyKind::EVT:
    case PolicyKind::EVT_PF:
        return h_evt_;
    case PolicyKind::AP_EVT:
    case PolicyKind::EVT_APPENDIX:
        return h_ap_evt(delta, eta);
    case PolicyKind::AP_EVT_PF:
        return h_ap_evt_pf(delta, eta);
    }
    return h_evt_;
}

ProblemSummary summarize(std::span<const ArmModel> arms, double b) {
    std::vector<double> gaps;
    std::vector<double> variances;
    gaps.reserve(arms.size());
    variances.reserve(arms.size());
    for (const auto& arm : arms) {
        gaps.push_back(std::fabs(arm.mu() - b));
        variances.push_back(arm.sigma_sq());
    }
    return ProblemSummary(std::move(gaps), std::move(variances));
}

double required_rounds(const ProblemSummary& summary, PolicyKind kind, const RoundRequirement& req) {
    if (!(req.epsilon > 0.0 && req.epsilon < 1.0)) {
        throw DomainError("required_rounds: epsilon must lie in (0,1)");
    }
    if (!(req.big_theta > 0.0)) throw DomainError("required_rounds: big_theta must be positive");
    const double h = summary.h_for(kind, req.delta, req.eta);
    const double logs = std::log(static_cast<double>(req.n_probe) * static_cast<double>(req.num_arms)) +
                        std::log(1.0 / req.epsilon);
    double rounds = req.big_theta * h * logs;
    if (uses_staleness(kind)) {
        rounds += (1.0 - req.delta) * static_cast<double>(req.tau);
    }
    return rounds;
}

double theory_exploration(const ProblemSummary& summary, PolicyKind kind, std::uint64_t n,
                          double delta, std::uint64_t tau, double eta) {
    const double nd = static_cast<double>(n);
    if (kind == PolicyKind::AP_EVT || kind == PolicyKind::EVT_APPENDIX) {
        const double a = (nd - (1.0 - delta) * static_cast<double>(tau)) / summary.h_ap_evt(delta, eta);
        if (!(a > 0.0)) throw ConfigError("theory_exploration: n must exceed (1-delta) tau");
        return a;
    }
    return nd / summary.h_evt();
}

double kl_bernoulli_gap(double gap) {
    if (!(gap > 0.0 && gap <= 0.25)) throw DomainError("kl_bernoulli_gap: gap must lie in (0, 1/4]");
    return gap * std::log((0.5 + gap) / (0.5 - gap));
}

double kl_bernoulli(double p, double q) {
    if (!(p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0)) {
        throw DomainError("kl_bernoulli: p and q must lie in (0,1)");
    }
    return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

std::vector<ArmModel> make_tbp_instance(std::size_t i, std::span<const double> gaps) {
    if (gaps.empty()) throw DomainError("make_tbp_instance: no gaps");
    if (i > gaps.size()) {
        throw DomainError("make_tbp_instance: i=" + std::to_string(i) + " outside 0.." +
                          std::to_string(gaps.size()));
    }
    std::vector<ArmModel> arms;
    arms.reserve(gaps.size());
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        const double g = gaps[k];
        if (!(g > 0.0 && g <= 0.25)) throw DomainError("make_tbp_instance: gaps must lie in (0, 1/4]");
        const bool flipped = i != 0 && k + 1 == i;
        arms.push_back(ArmModel::bernoulli(flipped ? 0.5 - g : 0.5 + g));
    }
    return arms;
}

bool check_compare_lemma(std::span<const LemmaSample> samples) {
    constexpr double kSlack = 1e-12;
    bool all = true;
    for (const auto& s : samples) {
        if (!(s.mu >= 0.0 && s.mu <= 1.0 && s.b >= 0.0 && s.b <= 1.0)) {
            throw DomainError("check_compare_lemma: mu and b must lie in [0,1]");
        }
        if (!(s.sigma_sq >= 0.0) || s.sigma_sq > s.mu - s.mu * s.mu + kSlack) {
            throw DomainError("check_compare_lemma: sigma^2 exceeds mu - mu^2");
        }
        if (!(s.sigma_sq + std::fabs(s.mu - s.b) <= 1.0)) all = false;
    }
    return all;
}

double lower_bound_probability(std::uint64_t n, double h_evt, std::uint64_t num_arms) {
    if (!(h_evt > 0.0)) throw DomainError("lower_bound_probability: h must be positive");
    const double nd = static_cast<double>(n);
    return std::exp(-10.0 * nd / h_evt - 16.0 * std::log(5.0 * nd * static_cast<double>(num_arms)));
}

} // namespace tbandit
