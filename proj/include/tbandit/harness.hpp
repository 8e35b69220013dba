// harness.hpp
//
// Replicated experiment sweeps over (policy, budget, delay) cells, the
// success-rate and speedup metrics, and the CSV contract.
#pragma once
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tbandit/env.hpp"
#include "tbandit/policies.hpp"

namespace tbandit {

enum class RecipeDistribution { Uniform, Bernoulli, PointMass };

/// Random instance: K arms, mu_k ~ U(mean_range), r_k ~ U(half_width_range).
/// Only Uniform uses the half-width. With clip = false the ranges must keep
/// every arm's support inside [0,1]; with clip = true uniform arms whose
/// interval spills over are drawn as ClippedUniform.
struct InstanceRecipe {
    std::size_t num_arms{0};
    double mean_lo{0.0};
    double mean_hi{0.0};
    double half_width_lo{0.0};
    double half_width_hi{0.0};
    RecipeDistribution distribution{RecipeDistribution::Uniform};
    bool clip{false};

    void validate() const;
};

/// Draws one instance. Arm k's parameters come from a stream keyed by
/// (seed, k), so changing K leaves the other arms unchanged.
std::vector<ArmModel> draw_instance(const InstanceRecipe& recipe, std::uint64_t seed);

using InstanceSpec = std::variant<std::vector<ArmModel>, InstanceRecipe>;

std::size_t instance_num_arms(const InstanceSpec& instance);

enum class ExplorationRule { NOverK, Fixed, NOverHEvt, Theory };

/// A policy as configured in a sweep; the threshold comes from the
/// experiment and a is resolved per cell from the rule.
struct PolicySpec {
    PolicyKind kind{PolicyKind::ATP};
    double delta{0.0};
    ExplorationRule rule{ExplorationRule::NOverK};
    double a{0.0};             // used by ExplorationRule::Fixed
    std::uint64_t tau{0};      // used by ExplorationRule::Theory
    double eta{0.0};           // used by ExplorationRule::Theory

    /// Stable name used in CSV rows and for row ordering, e.g. "EVT",
    /// "AP_EVT:delta=0.5", "EVT:a=12".
    std::string label() const;

    /// Concrete PolicyConfig for a budget and instance.
    PolicyConfig resolve(double b, std::uint64_t n, std::span<const ArmModel> arms) const;
};

struct ExperimentConfig {
    InstanceSpec instance;
    double b{0.5};
    std::vector<PolicySpec> policies;
    std::vector<std::uint64_t> budgets;
    std::vector<DelayModel> delays{DelayModel::none()};
    std::uint64_t replications{100};
    std::uint64_t root_seed{0};
    std::optional<double> target_accuracy;
    bool fixed_instance{false};

    /// Throws ConfigError on structural problems. Budgets that are too small
    /// for K are not rejected here; they surface as per-cell errors.
    void validate() const;
};

struct SweepRow {
    std::string policy;
    std::uint64_t n{0};
    std::string delay;
    double success_rate{0.0};
    double mean_max_pending{0.0};
    double mean_pending_ratio{0.0};
    std::uint64_t replications{0};

    friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

struct CellError {
    std::string policy;
    std::uint64_t n{0};
    std::string delay;
    std::string reason;
};

struct SweepResult {
    std::vector<SweepRow> rows;     // sorted by (policy, n, delay)
    std::vector<CellError> errors;  // same order
};

/// Seeds used for replication `rep`. Keyed only by (root, rep) so every cell
/// sees the same instance and reward streams for a given replication.
std::uint64_t instance_seed(const ExperimentConfig& config, std::uint64_t rep) noexcept;
std::uint64_t episode_seed(std::uint64_t root_seed, std::uint64_t rep) noexcept;

/// Instance used by replication `rep`.
std::vector<ArmModel> instance_for(const ExperimentConfig& config, std::uint64_t rep);

/// Runs every (policy, n, delay) cell over all replications. `jobs` worker
/// threads share the work; results do not depend on it.
SweepResult run_sweep(const ExperimentConfig& config, unsigned jobs = 1);

/// (rounds_full / rounds_delayed) * tau. Throws DomainError unless both
/// counts and tau are >= 1.
double speedup(std::uint64_t rounds_full, std::uint64_t rounds_delayed, std::uint64_t tau);

/// Smallest grid budget of the (policy, delay) cell whose success rate
/// reaches target; nullopt when none does.
std::optional<std::uint64_t> rounds_to_accuracy(std::span<const SweepRow> rows,
                                                const std::string& policy,
                                                const std::string& delay, double target);

inline constexpr const char* kCsvHeader =
    "policy,n,delay,success_rate,mean_max_pending,mean_pending_ratio,reps";

void write_csv(std::span<const SweepRow> rows, std::ostream& out);
/// Writes the CSV to `path`; I/O failures throw std::runtime_error naming it.
void emit_csv(std::span<const SweepRow> rows, const std::string& path);

/// Calls body(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body);

// ---------------------------------------------------------------------------
// Lower-bound stress run on the TBP(i) family
// ---------------------------------------------------------------------------

struct LowerBoundConfig {
    std::size_t num_arms{5};
    double gap{0.1};
    std::uint64_t n{500};
    std::uint64_t replications{200};
    PolicySpec policy{PolicyKind::EVT};
    std::uint64_t root_seed{0};
};

struct LowerBoundReport {
    std::vector<double> mistake_rates;  // index i = TBP(i), i = 0..K
    double max_mistake_rate{0.0};       // over i = 1..K
    double h_evt{0.0};
    double bound{0.0};                  // exp(-10 n / H_EVT - 16 log(5 n K))
    bool holds{false};                  // max_mistake_rate >= bound
};

LowerBoundReport run_lower_bound(const LowerBoundConfig& config, unsigned jobs = 1);

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

/// Parses the JSON experiment file format. Unknown keys are errors.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

} // namespace tbandit
