// cli.cpp
#include "tbandit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tbandit/complexity.hpp"
#include "tbandit/errors.hpp"
#include "tbandit/harness.hpp"

namespace tbandit {

namespace {

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Rounds-to-target and speedup against the "none" cell of the same policy.
void print_speedups(const ExperimentConfig& config, const SweepResult& result, std::ostream& os) {
    const double target = *config.target_accuracy;
    std::set<std::string> policies;
    for (const auto& row : result.rows) policies.insert(row.policy);
    os << "policy,delay,rounds_to_" << fmt(target) << ",speedup\n";
    for (const auto& policy : policies) {
        const auto base = rounds_to_accuracy(result.rows, policy, "none", target);
        for (const auto& delay : config.delays) {
            const auto rounds = rounds_to_accuracy(result.rows, policy, delay.descriptor(), target);
            os << policy << ',' << delay.descriptor() << ','
               << (rounds ? std::to_string(*rounds) : "unreachable") << ',';
            if (delay.kind == DelayKind::MaxPending && delay.param >= 1 && base && rounds) {
                os << fmt(speedup(*base, *rounds, delay.param));
            } else if (delay.kind == DelayKind::MaxPending && delay.param >= 1) {
                os << "unreachable";
            } else {
                os << '-';
            }
            os << '\n';
        }
    }
}

int cmd_sweep(const std::string& config_path, const std::optional<std::uint64_t>& seed,
              const std::string& out_path, unsigned jobs, bool strict, std::ostream& out,
              std::ostream& err) {
    ExperimentConfig config = load_experiment_config(config_path);
    if (seed) config.root_seed = *seed;
    const SweepResult result = run_sweep(config, jobs);
    for (const auto& e : result.errors) {
        err << "cell " << e.policy << " n=" << e.n << " delay=" << e.delay << ": " << e.reason << '\n';
    }
    if (out_path.empty() || out_path == "-") {
        write_csv(result.rows, out);
    } else {
        emit_csv(result.rows, out_path);
    }
    if (config.target_accuracy) {
        print_speedups(config, result, out_path.empty() || out_path == "-" ? err : out);
    }
    if (strict && !result.errors.empty()) {
        const auto& e = result.errors.front();
        err << "error: " << result.errors.size() << " cell(s) failed; first: " << e.policy
            << " n=" << e.n << " delay=" << e.delay << ": " << e.reason << '\n';
        return 1;
    }
    return 0;
}

int cmd_complexity(const std::string& config_path, const std::optional<std::uint64_t>& seed,
                   std::uint64_t draws, double delta, double eta, std::ostream& out) {
    ExperimentConfig config = load_experiment_config(config_path);
    if (seed) config.root_seed = *seed;
    if (const auto* arms = std::get_if<std::vector<ArmModel>>(&config.instance)) {
        const ProblemSummary s = summarize(*arms, config.b);
        out << "arm,model,mu,sigma_sq,gap\n";
        for (std::size_t k = 0; k < arms->size(); ++k) {
            out << k << ',' << (*arms)[k].describe() << ',' << fmt((*arms)[k].mu()) << ','
                << fmt((*arms)[k].sigma_sq()) << ',' << fmt(s.gaps()[k]) << '\n';
        }
        out << "h_atp " << fmt(s.h_atp()) << '\n'
            << "h_evt " << fmt(s.h_evt()) << '\n'
            << "h_ap_evt " << fmt(s.h_ap_evt(delta, eta)) << '\n'
            << "h_ap_evt_pf " << fmt(s.h_ap_evt_pf(delta, eta)) << '\n';
        return 0;
    }
    if (draws == 0) throw ConfigError("--draws must be >= 1");
    std::vector<double> atp, evt;
    std::uint64_t degenerate = 0;
    ExperimentConfig redraw = config;
    redraw.fixed_instance = false;
    for (std::uint64_t d = 0; d < draws; ++d) {
        const auto arms = instance_for(redraw, d);
        try {
            const ProblemSummary s = summarize(arms, config.b);
            atp.push_back(s.h_atp());
            evt.push_back(s.h_evt());
        } catch (const DomainError&) {
            ++degenerate;
        }
    }
    if (atp.empty()) throw ConfigError("every drawn instance had an arm exactly at the threshold");
    const double f = 1.0 + delta * eta;
    out << "draws " << draws << " (degenerate " << degenerate << ")\n"
        << "h_atp mean " << fmt(mean(atp)) << " median " << fmt(median(atp)) << '\n'
        << "h_evt mean " << fmt(mean(evt)) << " median " << fmt(median(evt)) << '\n'
        << "h_ap_evt mean " << fmt(f * f * mean(evt)) << " median " << fmt(f * f * median(evt)) << '\n'
        << "h_ap_evt_pf mean " << fmt(f * mean(evt)) << " median " << fmt(f * median(evt)) << '\n';
    return 0;
}

int cmd_lowerbound(const LowerBoundConfig& config, unsigned jobs, std::ostream& out) {
    const LowerBoundReport r = run_lower_bound(config, jobs);
    out << "problem,mistake_rate\n";
    for (std::size_t i = 0; i < r.mistake_rates.size(); ++i) {
        out << "TBP(" << i << ")," << fmt(r.mistake_rates[i]) << '\n';
    }
    out << "h_evt " << fmt(r.h_evt) << '\n'
        << "empirical_max_mistake_rate " << fmt(r.max_mistake_rate) << '\n'
        << "lower_bound " << fmt(r.bound) << '\n'
        << "empirical_ge_bound " << (r.holds ? "true" : "false") << '\n';
    return r.holds ? 0 : 1;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Thresholding bandit simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    bool strict = false;

    auto* sweep = app.add_subcommand("sweep", "run a replicated (policy, n, delay) sweep and emit CSV");
    sweep->add_option("--config", config_path, "experiment JSON file")->required();
    sweep->add_option("--seed", seed, "override root_seed");
    sweep->add_option("--out", out_path, "CSV output path (default stdout)");
    sweep->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sweep->add_flag("--strict", strict, "exit nonzero if any cell fails");

    std::uint64_t draws = 10000;
    double delta = 0.0;
    double eta = 0.0;
    auto* complexity = app.add_subcommand("complexity", "print complexity constants of the config's instance");
    complexity->add_option("--config", config_path, "experiment JSON file")->required();
    complexity->add_option("--seed", seed, "override root_seed");
    complexity->add_option("--draws", draws, "instances drawn for a recipe");
    complexity->add_option("--delta", delta, "staleness weight for the AP constants");
    complexity->add_option("--eta", eta, "pending/observed ratio for the AP constants");

    LowerBoundConfig lb;
    std::string lb_policy = "EVT";
    std::uint64_t lb_seed = 0;
    auto* lower = app.add_subcommand("lowerbound", "mistake rates on TBP(i) against the lower-bound expression");
    lower->add_option("--arms", lb.num_arms, "K")->check(CLI::PositiveNumber);
    lower->add_option("--gap", lb.gap, "common gap in (0, 1/4]");
    lower->add_option("--n", lb.n, "budget");
    lower->add_option("--reps", lb.replications, "replications per problem")->check(CLI::PositiveNumber);
    lower->add_option("--policy", lb_policy, "policy kind (a = n/K for EVT-type rules)");
    lower->add_option("--delta", lb.policy.delta, "delta for AP policies");
    lower->add_option("--seed", lb_seed, "root seed");
    lower->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*sweep) return cmd_sweep(config_path, seed, out_path, jobs, strict, out, err);
        if (*complexity) return cmd_complexity(config_path, seed, draws, delta, eta, out);
        lb.policy.kind = parse_policy_kind(lb_policy);
        lb.root_seed = lb_seed;
        return cmd_lowerbound(lb, jobs, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace tbandit
