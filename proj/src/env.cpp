// env.cpp
#include "tbandit/env.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "tbandit/errors.hpp"

namespace tbandit {

std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) noexcept {
    std::uint64_t h = mix64(root);
    for (auto key : keys) h = mix64(h ^ mix64(key));
    return h;
}

double uniform01(RandomEngine& engine) noexcept {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// ---------------------------------------------------------------------------

namespace {

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

std::string fmt_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

} // namespace

ArmModel ArmModel::bernoulli(double p) {
    if (!in_unit(p)) throw DomainError("bernoulli: p must lie in [0,1]");
    return ArmModel(ArmKind::Bernoulli, p, 0.0, p, p * (1.0 - p));
}

ArmModel ArmModel::uniform(double mu, double r) {
    if (!(r >= 0.0) || !in_unit(mu)) throw DomainError("uniform: need mu in [0,1] and r >= 0");
    if (mu - r < 0.0 || mu + r > 1.0) {
        throw DomainError("uniform: support [" + fmt_real(mu - r) + ", " + fmt_real(mu + r) +
                          "] leaves [0,1]");
    }
    return ArmModel(ArmKind::UniformInterval, mu, r, mu, r * r / 3.0);
}

ArmModel ArmModel::point_mass(double v) {
    if (!in_unit(v)) throw DomainError("point_mass: value must lie in [0,1]");
    return ArmModel(ArmKind::PointMass, v, 0.0, v, 0.0);
}

ArmModel ArmModel::clipped_uniform(double center, double r) {
    if (!(r >= 0.0) || !std::isfinite(center)) {
        throw DomainError("clipped_uniform: need finite center and r >= 0");
    }
    const double lo = center - r;
    const double hi = center + r;
    if (hi <= 0.0 || lo >= 1.0) {
        throw DomainError("clipped_uniform: interval does not meet [0,1]");
    }
    if (r == 0.0) {
        const double v = std::clamp(center, 0.0, 1.0);
        return ArmModel(ArmKind::ClippedUniform, center, 0.0, v, 0.0);
    }
    const double w = hi - lo;
    const double a = std::clamp(lo, 0.0, 1.0);
    const double b = std::clamp(hi, 0.0, 1.0);
    const double top = std::max(0.0, hi - std::max(lo, 1.0));  // mass clamped to 1
    const double m1 = ((b * b - a * a) / 2.0 + top) / w;
    const double m2 = ((b * b * b - a * a * a) / 3.0 + top) / w;
    return ArmModel(ArmKind::ClippedUniform, center, r, m1, std::max(0.0, m2 - m1 * m1));
}

std::string ArmModel::describe() const {
    switch (kind_) {
    case ArmKind::Bernoulli:
        return "bernoulli(" + fmt_real(location_) + ")";
    case ArmKind::UniformInterval:
        return "uniform(" + fmt_real(location_) + "," + fmt_real(half_width_) + ")";
    case ArmKind::PointMass:
        return "point(" + fmt_real(location_) + ")";
    case ArmKind::ClippedUniform:
        return "clipped_uniform(" + fmt_real(location_) + "," + fmt_real(half_width_) + ")";
    }
    return "?";
}

double sample_reward(const ArmModel& model, RandomEngine& engine) {
    const double u = uniform01(engine);
    switch (model.kind()) {
    case ArmKind::Bernoulli:
        return u < model.location() ? 1.0 : 0.0;
    case ArmKind::UniformInterval: {
        const double x = model.location() - model.half_width() + 2.0 * model.half_width() * u;
        return std::clamp(x, 0.0, 1.0);  // rounding only
    }
    case ArmKind::PointMass:
        return model.location();
    case ArmKind::ClippedUniform: {
        const double x = model.location() - model.half_width() + 2.0 * model.half_width() * u;
        return std::clamp(x, 0.0, 1.0);
    }
    }
    return model.location();
}

std::vector<std::size_t> true_above_set(std::span<const ArmModel> arms, double b) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < arms.size(); ++k) {
        if (arms[k].mu() >= b) out.push_back(k);
    }
    return out;
}

// ---------------------------------------------------------------------------

std::uint64_t DelayModel::pending_bound() const noexcept {
    switch (kind) {
    case DelayKind::None:
        return 0;
    case DelayKind::FixedDelay:
        return param;
    case DelayKind::MaxPending:
        return param == 0 ? 0 : param - 1;
    }
    return 0;
}

std::string DelayModel::descriptor() const {
    switch (kind) {
    case DelayKind::None:
        return "none";
    case DelayKind::FixedDelay:
        return "fixed:" + std::to_string(param);
    case DelayKind::MaxPending:
        return "maxpending:" + std::to_string(param);
    }
    return "?";
}

DelayModel DelayModel::parse(const std::string& text) {
    if (text == "none") return none();
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("bad delay descriptor '" + text + "'");
    const std::string head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), value);
    if (ec != std::errc{} || ptr != tail.data() + tail.size() || tail.empty()) {
        throw ConfigError("bad delay parameter in '" + text + "'");
    }
    if (head == "fixed") return fixed(value);
    if (head == "maxpending") return max_pending(value);
    throw ConfigError("unknown delay kind '" + head + "'");
}

// ---------------------------------------------------------------------------

void PendingQueue::push(PendingPull pull) {
    if (!entries_.empty() && pull.issue_round < entries_.back().issue_round) {
        throw ProtocolError("PendingQueue: pulls must be pushed in issue order");
    }
    entries_.push_back(pull);
}

std::vector<ResolvedReward> PendingQueue::resolve_due(std::uint64_t t) {
    std::vector<ResolvedReward> out;
    // Due rounds need not be monotone in general, so scan the whole queue.
    auto keep = entries_.begin();
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        if (it->due_round <= t) {
            out.push_back({it->arm, it->reward});
        } else {
            *keep++ = *it;
        }
    }
    entries_.erase(keep, entries_.end());
    return out;
}

std::vector<ResolvedReward> PendingQueue::resolve_oldest_until(std::size_t limit) {
    std::vector<ResolvedReward> out;
    while (entries_.size() > limit) {
        out.push_back({entries_.front().arm, entries_.front().reward});
        entries_.pop_front();
    }
    return out;
}

std::uint64_t due_round_for(const DelayModel& delay, std::uint64_t issue_round) noexcept {
    switch (delay.kind) {
    case DelayKind::None:
        return issue_round;
    case DelayKind::FixedDelay:
        return issue_round + delay.param;
    case DelayKind::MaxPending:
        return delay.param <= 1 ? issue_round : kNeverDue;
    }
    return issue_round;
}

std::vector<ResolvedReward> resolve_due_pulls(PendingQueue& queue, const DelayModel& delay,
                                              std::uint64_t t) {
    auto out = queue.resolve_due(t);
    if (delay.kind == DelayKind::MaxPending) {
        auto forced = queue.resolve_oldest_until(delay.pending_bound());
        out.insert(out.end(), forced.begin(), forced.end());
    }
    return out;
}

// ---------------------------------------------------------------------------

EpisodeResult run_episode(std::span<const ArmModel> arms, const PolicyConfig& config,
                          const DelayModel& delay, std::uint64_t n, std::uint64_t seed,
                          EpisodeTrace* trace) {
    const std::size_t num_arms = arms.size();
    if (num_arms == 0) throw ConfigError("run_episode: no arms");
    if (n <= 2 * num_arms) {
        throw ConfigError("run_episode: budget n=" + std::to_string(n) +
                          " must exceed 2K=" + std::to_string(2 * num_arms));
    }
    config.validate();

    std::vector<RandomEngine> streams;
    streams.reserve(num_arms);
    for (std::size_t k = 0; k < num_arms; ++k) {
        streams.emplace_back(
            derive_seed(seed, {static_cast<std::uint64_t>(StreamPurpose::Reward), k}));
    }

    EpisodeResult result;
    std::vector<ArmStats> stats(num_arms);
    std::uint64_t issued = 0;

    auto draw = [&](std::size_t k) {
        const double x = sample_reward(arms[k], streams[k]);
        if (trace) trace->issued.push_back({k, x});
        stats[k].record_pull_issued();
        ++issued;
        return x;
    };

    for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < num_arms; ++k) stats[k].record_reward(draw(k));
    }

    PendingQueue queue;
    std::vector<double> scores(num_arms);
    for (std::size_t k = 0; k < num_arms; ++k) scores[k] = policy_index(stats[k], config);

    std::vector<std::size_t> touched;
    touched.reserve(num_arms);
    auto observe = [&](const std::vector<ResolvedReward>& resolved) {
        for (const auto& r : resolved) {
            stats[r.arm].record_reward(r.reward);
            touched.push_back(r.arm);
        }
    };

    result.pulls.reserve(n - 2 * num_arms);
    const std::uint64_t bound = delay.pending_bound();

    for (std::uint64_t t = 2 * num_arms; t < n; ++t) {
        observe(resolve_due_pulls(queue, delay, t));

        const std::uint64_t pending_total = queue.size();
        if (pending_total > bound) {
            throw std::logic_error("run_episode: delay model exceeded its pending bound");
        }
        result.max_total_pending = std::max(result.max_total_pending, pending_total);

        // Only arms whose counts or moments changed since the last decision
        // need a fresh score or staleness ratio.
        for (auto k : touched) {
            scores[k] = policy_index(stats[k], config);
            const double ratio = static_cast<double>(stats[k].pending_count()) /
                                 static_cast<double>(stats[k].observed_count());
            result.max_pending_ratio = std::max(result.max_pending_ratio, ratio);
        }
        touched.clear();

        if (trace) {
            std::uint64_t observed_total = 0;
            for (const auto& s : stats) observed_total += s.observed_count();
            trace->decisions.push_back({t, observed_total, pending_total, issued});
        }

        const std::size_t choice = argmin_index(scores);
        result.pulls.push_back(choice);
        const std::uint64_t round = t + 1;
        const double x = draw(choice);
        queue.push({choice, round, due_round_for(delay, round), x});
        touched.push_back(choice);
    }

    // Rewards due by round n count; anything still in flight does not.
    observe(queue.resolve_due(n));

    result.classification = classify(stats, config.b);
    result.mistake = result.classification.above != true_above_set(arms, config.b);
    result.final_stats = std::move(stats);
    return result;
}

} // namespace tbandit
