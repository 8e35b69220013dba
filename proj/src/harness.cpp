// harness.cpp
#include "tbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "tbandit/complexity.hpp"
#include "tbandit/errors.hpp"

namespace tbandit {

namespace {

std::string fmt_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

bool ordered_range(double lo, double hi) { return lo <= hi; }

} // namespace

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

void InstanceRecipe::validate() const {
    if (num_arms == 0) throw ConfigError("recipe: K must be >= 1");
    if (!ordered_range(mean_lo, mean_hi) || mean_lo < 0.0 || mean_hi > 1.0) {
        throw ConfigError("recipe: mean_range must be an ordered range inside [0,1]");
    }
    if (distribution != RecipeDistribution::Uniform) return;
    if (!ordered_range(half_width_lo, half_width_hi) || half_width_lo < 0.0) {
        throw ConfigError("recipe: half_width_range must be an ordered nonnegative range");
    }
    if (!clip && (mean_lo - half_width_hi < 0.0 || mean_hi + half_width_hi > 1.0)) {
        throw ConfigError("recipe: mean_range and half_width_range let support leave [0,1] "
                          "(set clip to clamp rewards)");
    }
}

std::vector<ArmModel> draw_instance(const InstanceRecipe& recipe, std::uint64_t seed) {
    recipe.validate();
    std::vector<ArmModel> arms;
    arms.reserve(recipe.num_arms);
    for (std::size_t k = 0; k < recipe.num_arms; ++k) {
        RandomEngine engine(derive_seed(seed, {static_cast<std::uint64_t>(StreamPurpose::Instance), k}));
        const double mu = recipe.mean_lo + (recipe.mean_hi - recipe.mean_lo) * uniform01(engine);
        const double r =
            recipe.half_width_lo + (recipe.half_width_hi - recipe.half_width_lo) * uniform01(engine);
        switch (recipe.distribution) {
        case RecipeDistribution::Uniform:
            if (recipe.clip) {
                arms.push_back(ArmModel::clipped_uniform(mu, r));
            } else {
                arms.push_back(ArmModel::uniform(mu, r));
            }
            break;
        case RecipeDistribution::Bernoulli:
            arms.push_back(ArmModel::bernoulli(mu));
            break;
        case RecipeDistribution::PointMass:
            arms.push_back(ArmModel::point_mass(mu));
            break;
        }
    }
    return arms;
}

std::size_t instance_num_arms(const InstanceSpec& instance) {
    if (const auto* arms = std::get_if<std::vector<ArmModel>>(&instance)) return arms->size();
    return std::get<InstanceRecipe>(instance).num_arms;
}

// ---------------------------------------------------------------------------
// Policies
// ---------------------------------------------------------------------------

std::string PolicySpec::label() const {
    std::string out(to_string(kind));
    if (uses_staleness(kind)) out += ":delta=" + fmt_real(delta);
    if (uses_exploration(kind)) {
        switch (rule) {
        case ExplorationRule::NOverK:
            break;
        case ExplorationRule::Fixed:
            out += ":a=" + fmt_real(a);
            break;
        case ExplorationRule::NOverHEvt:
            out += ":a=n/H";
            break;
        case ExplorationRule::Theory:
            out += ":a=theory(tau=" + std::to_string(tau) + ";eta=" + fmt_real(eta) + ")";
            break;
        }
    }
    return out;
}

PolicyConfig PolicySpec::resolve(double b, std::uint64_t n, std::span<const ArmModel> arms) const {
    PolicyConfig config{kind, b, 0.0, uses_staleness(kind) ? delta : 0.0};
    if (uses_exploration(kind)) {
        switch (rule) {
        case ExplorationRule::NOverK:
            config.a = static_cast<double>(n) / static_cast<double>(arms.size());
            break;
        case ExplorationRule::Fixed:
            config.a = a;
            break;
        case ExplorationRule::NOverHEvt:
            config.a = theory_exploration(summarize(arms, b), PolicyKind::EVT, n, 0.0, 0, 0.0);
            break;
        case ExplorationRule::Theory:
            config.a = theory_exploration(summarize(arms, b), kind, n, delta, tau, eta);
            break;
        }
    }
    config.validate();
    return config;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (const auto* recipe = std::get_if<InstanceRecipe>(&instance)) {
        recipe->validate();
    } else if (std::get<std::vector<ArmModel>>(instance).empty()) {
        throw ConfigError("instance: no arms");
    }
    if (policies.empty()) throw ConfigError("policies: at least one policy required");
    if (budgets.empty()) throw ConfigError("budgets: at least one budget required");
    if (delays.empty()) throw ConfigError("delays: at least one delay model required");
    if (replications == 0) throw ConfigError("replications must be >= 1");
    if (target_accuracy && !(*target_accuracy > 0.0 && *target_accuracy <= 1.0)) {
        throw ConfigError("target_accuracy must lie in (0,1]");
    }
    for (const auto& p : policies) {
        if (!(p.delta >= 0.0 && p.delta <= 1.0)) throw ConfigError("policy delta must lie in [0,1]");
        if (p.rule == ExplorationRule::Fixed && !(p.a > 0.0)) {
            throw ConfigError("policy with fixed a needs a > 0");
        }
    }
}

std::uint64_t instance_seed(const ExperimentConfig& config, std::uint64_t rep) noexcept {
    const auto purpose = static_cast<std::uint64_t>(StreamPurpose::Instance);
    if (config.fixed_instance) return derive_seed(config.root_seed, {purpose});
    return derive_seed(config.root_seed, {purpose, rep});
}

std::uint64_t episode_seed(std::uint64_t root_seed, std::uint64_t rep) noexcept {
    return derive_seed(root_seed, {static_cast<std::uint64_t>(StreamPurpose::Episode), rep});
}

std::vector<ArmModel> instance_for(const ExperimentConfig& config, std::uint64_t rep) {
    if (const auto* arms = std::get_if<std::vector<ArmModel>>(&config.instance)) return *arms;
    return draw_instance(std::get<InstanceRecipe>(config.instance), instance_seed(config, rep));
}

void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> threads;
    const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(jobs, count));
    threads.reserve(n_threads);
    for (unsigned j = 0; j < n_threads; ++j) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

struct Cell {
    std::size_t policy;
    std::uint64_t n;
    std::size_t delay;
};

struct Outcome {
    bool ok{false};
    bool mistake{false};
    std::uint64_t max_pending{0};
    double max_ratio{0.0};
    std::string error;
};

} // namespace

SweepResult run_sweep(const ExperimentConfig& config, unsigned jobs) {
    config.validate();
    const std::uint64_t reps = config.replications;

    std::vector<std::vector<ArmModel>> instances;
    instances.reserve(reps);
    for (std::uint64_t r = 0; r < reps; ++r) instances.push_back(instance_for(config, r));

    std::vector<Cell> cells;
    for (std::size_t p = 0; p < config.policies.size(); ++p) {
        for (auto n : config.budgets) {
            for (std::size_t d = 0; d < config.delays.size(); ++d) cells.push_back({p, n, d});
        }
    }

    std::vector<Outcome> outcomes(cells.size() * reps);
    parallel_for(outcomes.size(), jobs, [&](std::size_t item) {
        const Cell& cell = cells[item / reps];
        const std::uint64_t rep = item % reps;
        Outcome& out = outcomes[item];
        const auto& arms = instances[rep];
        try {
            const PolicyConfig policy = config.policies[cell.policy].resolve(config.b, cell.n, arms);
            const EpisodeResult ep = run_episode(arms, policy, config.delays[cell.delay], cell.n,
                                                 episode_seed(config.root_seed, rep));
            out.ok = true;
            out.mistake = ep.mistake;
            out.max_pending = ep.max_total_pending;
            out.max_ratio = ep.max_pending_ratio;
        } catch (const ConfigError& e) {
            out.error = e.what();
        } catch (const DomainError& e) {
            out.error = e.what();
        }
    });

    using Key = std::tuple<std::string, std::uint64_t, std::string>;
    std::map<Key, SweepRow> rows;
    std::map<Key, CellError> errors;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        SweepRow row;
        row.policy = config.policies[cell.policy].label();
        row.n = cell.n;
        row.delay = config.delays[cell.delay].descriptor();
        Key key{row.policy, row.n, row.delay};
        if (rows.count(key) || errors.count(key)) {
            throw ConfigError("duplicate sweep cell " + row.policy + "/" + std::to_string(row.n) +
                              "/" + row.delay);
        }
        std::uint64_t successes = 0;
        double pending_sum = 0.0;
        double ratio_sum = 0.0;
        const Outcome* failure = nullptr;
        for (std::uint64_t r = 0; r < reps; ++r) {
            const Outcome& o = outcomes[c * reps + r];
            if (!o.ok) {
                failure = &o;
                break;
            }
            if (!o.mistake) ++successes;
            pending_sum += static_cast<double>(o.max_pending);
            ratio_sum += o.max_ratio;
        }
        if (failure) {
            errors.emplace(key, CellError{row.policy, row.n, row.delay, failure->error});
            continue;
        }
        const double denom = static_cast<double>(reps);
        row.success_rate = static_cast<double>(successes) / denom;
        row.mean_max_pending = pending_sum / denom;
        row.mean_pending_ratio = ratio_sum / denom;
        row.replications = reps;
        rows.emplace(std::move(key), std::move(row));
    }

    SweepResult result;
    for (auto& [key, row] : rows) result.rows.push_back(std::move(row));
    for (auto& [key, err] : errors) result.errors.push_back(std::move(err));
    return result;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

double speedup(std::uint64_t rounds_full, std::uint64_t rounds_delayed, std::uint64_t tau) {
    if (rounds_full < 1 || rounds_delayed < 1 || tau < 1) {
        throw DomainError("speedup: rounds and tau must be >= 1");
    }
    return static_cast<double>(rounds_full) / static_cast<double>(rounds_delayed) *
           static_cast<double>(tau);
}

std::optional<std::uint64_t> rounds_to_accuracy(std::span<const SweepRow> rows,
                                                const std::string& policy,
                                                const std::string& delay, double target) {
    std::vector<const SweepRow*> cell;
    for (const auto& row : rows) {
        if (row.policy == policy && row.delay == delay) cell.push_back(&row);
    }
    std::stable_sort(cell.begin(), cell.end(),
                     [](const SweepRow* x, const SweepRow* y) { return x->n < y->n; });
    for (const auto* row : cell) {
        if (row->success_rate >= target) return row->n;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_csv(std::span<const SweepRow> rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
        out << row.policy << ',' << row.n << ',' << row.delay << ',' << fmt_real(row.success_rate)
            << ',' << fmt_real(row.mean_max_pending) << ',' << fmt_real(row.mean_pending_ratio)
            << ',' << row.replications << '\n';
    }
}

void emit_csv(std::span<const SweepRow> rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "' for writing");
    write_csv(rows, out);
    out.flush();
    if (!out) throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Lower bound
// ---------------------------------------------------------------------------

LowerBoundReport run_lower_bound(const LowerBoundConfig& config, unsigned jobs) {
    if (config.replications == 0) throw ConfigError("lowerbound: replications must be >= 1");
    const std::vector<double> gaps(config.num_arms, config.gap);
    const std::size_t problems = config.num_arms + 1;

    std::vector<std::vector<ArmModel>> instances;
    for (std::size_t i = 0; i < problems; ++i) instances.push_back(make_tbp_instance(i, gaps));

    const std::uint64_t reps = config.replications;
    std::vector<char> mistakes(problems * reps, 0);
    parallel_for(mistakes.size(), jobs, [&](std::size_t item) {
        const std::size_t i = item / reps;
        const std::uint64_t rep = item % reps;
        const auto& arms = instances[i];
        const PolicyConfig policy = config.policy.resolve(0.5, config.n, arms);
        const auto seed = derive_seed(config.root_seed, {static_cast<std::uint64_t>(StreamPurpose::Episode), i, rep});
        mistakes[item] = run_episode(arms, policy, DelayModel::none(), config.n, seed).mistake;
    });

    LowerBoundReport report;
    for (std::size_t i = 0; i < problems; ++i) {
        std::uint64_t count = 0;
        for (std::uint64_t r = 0; r < reps; ++r) count += mistakes[i * reps + r] ? 1 : 0;
        report.mistake_rates.push_back(static_cast<double>(count) / static_cast<double>(reps));
        if (i >= 1) report.max_mistake_rate = std::max(report.max_mistake_rate, report.mistake_rates.back());
    }
    report.h_evt = summarize(instances[0], 0.5).h_evt();
    report.bound = lower_bound_probability(config.n, report.h_evt, config.num_arms);
    report.holds = report.max_mistake_rate >= report.bound;
    return report;
}

} // namespace tbandit
