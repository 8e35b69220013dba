// env.hpp
//
// Virtual-time episode engine. One decision is made per round; a pull's
// reward is drawn when the pull is issued and becomes visible to the policy
// according to the DelayModel.
#pragma once
#include <cstddef>
#include <cstdint>
#include <deque>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tbandit/policies.hpp"
#include "tbandit/stats.hpp"

namespace tbandit {

// ---------------------------------------------------------------------------
// Seeds and random streams
// ---------------------------------------------------------------------------

/// Stream purposes mixed into derived seeds.
enum class StreamPurpose : std::uint64_t { Reward = 1, Instance = 2, Episode = 3 };

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Deterministic child seed: h0 = mix64(root), h_{j+1} = mix64(h_j ^ mix64(key_j)).
/// Keys are mixed in order, so (root, {a, b}) and (root, {b, a}) differ.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys) noexcept;

using RandomEngine = std::mt19937_64;

/// Uniform double in [0,1) built from the top 53 bits of one engine draw.
double uniform01(RandomEngine& engine) noexcept;

// ---------------------------------------------------------------------------
// Arm models
// ---------------------------------------------------------------------------

enum class ArmKind { Bernoulli, UniformInterval, PointMass, ClippedUniform };

/// True reward distribution of one arm. Support is always inside [0,1].
///
/// ClippedUniform draws U(center - r, center + r) and clamps the draw into
/// [0,1]; it is the only kind whose nominal interval may leave [0,1].
/// mu() and sigma_sq() are the exact moments of the clamped variable.
class ArmModel {
public:
    static ArmModel bernoulli(double p);
    static ArmModel uniform(double mu, double r);
    static ArmModel point_mass(double v);
    static ArmModel clipped_uniform(double center, double r);

    ArmKind kind() const noexcept { return kind_; }
    double mu() const noexcept { return mu_; }
    double sigma_sq() const noexcept { return sigma_sq_; }
    /// Bernoulli p, uniform/clipped center, or the point-mass value.
    double location() const noexcept { return location_; }
    /// Half-width for the uniform kinds, 0 otherwise.
    double half_width() const noexcept { return half_width_; }

    std::string describe() const;

    friend bool operator==(const ArmModel&, const ArmModel&) = default;

private:
    ArmModel(ArmKind kind, double location, double half_width, double mu, double sigma_sq)
        : kind_(kind), location_(location), half_width_(half_width), mu_(mu), sigma_sq_(sigma_sq) {}

    ArmKind kind_;
    double location_;
    double half_width_;
    double mu_;
    double sigma_sq_;
};

/// One draw from `model`. Always consumes exactly one engine value, including
/// for PointMass, so stream positions do not depend on the arm kind.
double sample_reward(const ArmModel& model, RandomEngine& engine);

/// U_b = {k : mu_k >= b}, ascending.
std::vector<std::size_t> true_above_set(std::span<const ArmModel> arms, double b);

// ---------------------------------------------------------------------------
// Delay models
// ---------------------------------------------------------------------------

enum class DelayKind { None, FixedDelay, MaxPending };

/// When issued pulls become observable.
///
///  None         every reward is visible before the next decision.
///  FixedDelay   the pull of round s is visible from decision s + d on, so at
///               most d pulls are pending at any decision.
///  MaxPending   rewards stay hidden until capacity forces them out: at most
///               tau pulls are in flight counting the one being issued, i.e.
///               tau concurrent workers. Before each decision the oldest
///               pulls resolve until at most tau - 1 remain pending.
///               MaxPending(0) and MaxPending(1) both behave as None.
struct DelayModel {
    DelayKind kind{DelayKind::None};
    std::uint64_t param{0};

    static DelayModel none() noexcept { return {}; }
    static DelayModel fixed(std::uint64_t d) noexcept { return {DelayKind::FixedDelay, d}; }
    static DelayModel max_pending(std::uint64_t tau) noexcept {
        return {DelayKind::MaxPending, tau};
    }

    /// Upper bound on the total pending count seen at any decision.
    std::uint64_t pending_bound() const noexcept;

    /// "none", "fixed:<d>" or "maxpending:<tau>".
    std::string descriptor() const;
    static DelayModel parse(const std::string& text);

    friend bool operator==(const DelayModel&, const DelayModel&) = default;
};

// ---------------------------------------------------------------------------
// Pending pulls
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kNeverDue = UINT64_MAX;

struct PendingPull {
    std::size_t arm;
    std::uint64_t issue_round;
    std::uint64_t due_round;  // kNeverDue when only capacity can release it
    double reward;            // drawn at issue time

    friend bool operator==(const PendingPull&, const PendingPull&) = default;
};

struct ResolvedReward {
    std::size_t arm;
    double reward;

    friend bool operator==(const ResolvedReward&, const ResolvedReward&) = default;
};

/// FIFO of in-flight pulls, kept in issue order.
class PendingQueue {
public:
    void push(PendingPull pull);

    /// Removes and returns every entry with due_round <= t, in issue order.
    std::vector<ResolvedReward> resolve_due(std::uint64_t t);

    /// Removes and returns the oldest entries until size() <= limit.
    std::vector<ResolvedReward> resolve_oldest_until(std::size_t limit);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::deque<PendingPull>& entries() const noexcept { return entries_; }

private:
    std::deque<PendingPull> entries_;
};

/// Resolves whatever `delay` makes visible at decision time t.
std::vector<ResolvedReward> resolve_due_pulls(PendingQueue& queue, const DelayModel& delay,
                                              std::uint64_t t);

/// Due round assigned to a pull issued in round `issue_round`.
std::uint64_t due_round_for(const DelayModel& delay, std::uint64_t issue_round) noexcept;

// ---------------------------------------------------------------------------
// Episodes
// ---------------------------------------------------------------------------

struct EpisodeResult {
    std::vector<std::size_t> pulls;  // arms chosen after the 2K initialization pulls
    Classification classification;
    bool mistake{false};
    std::uint64_t max_total_pending{0};
    double max_pending_ratio{0.0};
    std::vector<ArmStats> final_stats;

    friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

struct DecisionRecord {
    std::uint64_t round;           // decision time t
    std::uint64_t observed_total;  // sum_k T_k(t)
    std::uint64_t pending_total;   // sum_k tau_k(t)
    std::uint64_t issued_total;    // pulls issued before this decision
};

/// Optional diagnostics filled by run_episode.
struct EpisodeTrace {
    std::vector<DecisionRecord> decisions;
    /// Every issued pull (initialization included) with the reward drawn for it.
    std::vector<ResolvedReward> issued;
};

/// Runs one episode of n rounds. Each arm is pulled twice and observed
/// immediately; then for t = 2K .. n-1 the due rewards are resolved, the
/// policy picks I_{t+1}, and that pull is issued. At t = n rewards due by n
/// are resolved and the arms are classified on observed rewards only.
///
/// Bit-exact function of (arms, config, delay, n, seed).
/// Throws ConfigError if arms is empty or n <= 2K.
EpisodeResult run_episode(std::span<const ArmModel> arms, const PolicyConfig& config,
                          const DelayModel& delay, std::uint64_t n, std::uint64_t seed,
                          EpisodeTrace* trace = nullptr);

} // namespace tbandit
