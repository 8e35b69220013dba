#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "tbandit/cli.hpp"
#include "tbandit/errors.hpp"
#include "tbandit/harness.hpp"

using namespace tbandit;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("tbandit_test_" + name);
}

SweepRow row(std::string policy, std::uint64_t n, std::string delay, double rate) {
    return {std::move(policy), n, std::move(delay), rate, 0.0, 0.0, 100};
}

ExperimentConfig small_recipe_config() {
    ExperimentConfig c;
    InstanceRecipe recipe;
    recipe.num_arms = 5;
    recipe.mean_lo = 0.3;
    recipe.mean_hi = 0.7;
    recipe.half_width_lo = 0.05;
    recipe.half_width_hi = 0.25;
    c.instance = recipe;
    c.b = 0.5;
    c.policies = {PolicySpec{PolicyKind::ATP}, PolicySpec{PolicyKind::AP_EVT, 0.5}};
    c.budgets = {40, 80};
    c.delays = {DelayModel::none(), DelayModel::max_pending(3)};
    c.replications = 12;
    c.root_seed = 5;
    return c;
}

} // namespace

TEST_CASE("speedup") {
    CHECK(speedup(1000, 1000, 8) == 8.0);
    CHECK(speedup(1000, 2000, 8) == 4.0);
    CHECK(speedup(1000, 1000, 1) == 1.0);
    CHECK_THROWS_AS(speedup(0, 10, 2), DomainError);
    CHECK_THROWS_AS(speedup(10, 10, 0), DomainError);
}

TEST_CASE("rounds_to_accuracy") {
    const std::vector<SweepRow> rows{row("EVT", 200, "none", 0.96), row("EVT", 100, "none", 0.8),
                                     row("ATP", 100, "none", 0.99)};
    CHECK(rounds_to_accuracy(rows, "EVT", "none", 0.95) == 200u);
    CHECK_FALSE(rounds_to_accuracy(rows, "EVT", "none", 0.97).has_value());
    CHECK_FALSE(rounds_to_accuracy(rows, "EVT", "fixed:1", 0.5).has_value());
    const std::vector<SweepRow> bumpy{row("EVT", 100, "none", 0.96), row("EVT", 200, "none", 0.90),
                                      row("EVT", 400, "none", 0.97)};
    CHECK(rounds_to_accuracy(bumpy, "EVT", "none", 0.95) == 100u);
}

TEST_CASE("csv output") {
    std::ostringstream empty;
    write_csv({}, empty);
    CHECK(empty.str() == std::string(kCsvHeader) + "\n");

    const std::vector<SweepRow> rows{{"AP_EVT:delta=0.5", 400, "maxpending:8", 0.123456789, 7.0, 0.0333333333, 100},
                                     {"ATP", 20000, "none", 1.0, 0.0, 0.0, 100}};
    std::ostringstream out;
    write_csv(rows, out);
    CHECK(out.str() == std::string(kCsvHeader) +
                           "\nAP_EVT:delta=0.5,400,maxpending:8,0.123457,7,0.0333333,100\n"
                           "ATP,20000,none,1,0,0,100\n");

    const auto path = temp_path("two_cells.csv");
    emit_csv(rows, path.string());
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    fs::remove(path);

    CHECK_THROWS_AS(emit_csv(rows, "/nonexistent_dir_xyz/out.csv"), std::runtime_error);
    try {
        emit_csv(rows, "/nonexistent_dir_xyz/out.csv");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("/nonexistent_dir_xyz/out.csv") != std::string::npos);
    }
}

TEST_CASE("instance recipes") {
    InstanceRecipe r{4, 0.6, 0.8, 0.15, 0.25, RecipeDistribution::Uniform, false};
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r.clip = true;
    const auto arms = draw_instance(r, 3);
    REQUIRE(arms.size() == 4);
    for (const auto& a : arms) {
        CHECK(a.location() >= 0.6);
        CHECK(a.location() <= 0.8);
        CHECK(a.half_width() >= 0.15);
        CHECK(a.half_width() <= 0.25);
    }
    CHECK(draw_instance(r, 3) == arms);
    // growing K keeps existing arms
    InstanceRecipe wider = r;
    wider.num_arms = 7;
    const auto more = draw_instance(wider, 3);
    CHECK(std::equal(arms.begin(), arms.end(), more.begin()));

    InstanceRecipe bern{3, 0.2, 0.4, 0.0, 0.0, RecipeDistribution::Bernoulli, false};
    for (const auto& a : draw_instance(bern, 1)) CHECK(a.kind() == ArmKind::Bernoulli);
}

TEST_CASE("policy labels and resolution") {
    CHECK(PolicySpec{PolicyKind::ATP}.label() == "ATP");
    CHECK(PolicySpec{PolicyKind::EVT}.label() == "EVT");
    CHECK(PolicySpec{PolicyKind::AP_EVT_PF, 0.0}.label() == "AP_EVT_PF:delta=0");
    CHECK((PolicySpec{PolicyKind::EVT, 0.0, ExplorationRule::Fixed, 12.0}.label()) == "EVT:a=12");
    const std::vector<ArmModel> arms(4, ArmModel::bernoulli(0.75));
    CHECK(PolicySpec{PolicyKind::EVT}.resolve(0.5, 400, arms).a == 100.0);
    CHECK((PolicySpec{PolicyKind::EVT, 0.0, ExplorationRule::NOverHEvt}.resolve(0.5, 280, arms).a) ==
          doctest::Approx(10.0));
}

TEST_CASE("run_sweep basics") {
    SUBCASE("single cell") {
        ExperimentConfig c;
        c.instance = std::vector<ArmModel>{ArmModel::bernoulli(0.6), ArmModel::bernoulli(0.4)};
        c.b = 0.5;
        c.policies = {PolicySpec{PolicyKind::EVT}};
        c.budgets = {20};
        c.replications = 1;
        const auto res = run_sweep(c);
        REQUIRE(res.rows.size() == 1);
        CHECK((res.rows[0].success_rate == 0.0 || res.rows[0].success_rate == 1.0));
        CHECK(res.rows[0].replications == 1);
    }
    SUBCASE("point masses far from the threshold at n = 2K + 1") {
        ExperimentConfig c;
        c.instance = std::vector<ArmModel>{ArmModel::point_mass(0.9), ArmModel::point_mass(0.1),
                                           ArmModel::point_mass(0.95)};
        c.b = 0.5;
        c.policies = {PolicySpec{PolicyKind::ATP}, PolicySpec{PolicyKind::EVT_PF}};
        c.budgets = {7};
        c.replications = 10;
        for (const auto& r : run_sweep(c).rows) CHECK(r.success_rate == 1.0);
    }
    SUBCASE("invalid cells are reported and the sweep continues") {
        ExperimentConfig c = small_recipe_config();
        c.budgets = {8, 40};
        const auto res = run_sweep(c);
        CHECK(res.rows.size() == 4);
        CHECK(res.errors.size() == 4);
        for (const auto& e : res.errors) CHECK(e.n == 8);
    }
}

TEST_CASE("sweep rows are ordered and aggregates are consistent") {
    const auto res = run_sweep(small_recipe_config());
    REQUIRE(res.rows.size() == 8);
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        const auto& a = res.rows[i - 1];
        const auto& b = res.rows[i];
        CHECK(std::tie(a.policy, a.n, a.delay) < std::tie(b.policy, b.n, b.delay));
    }
    for (const auto& r : res.rows) {
        CHECK(r.success_rate >= 0.0);
        CHECK(r.success_rate <= 1.0);
        // multiples of 1/reps
        const double scaled = r.success_rate * 12.0;
        CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
        if (r.delay == "none") CHECK(r.mean_max_pending == 0.0);
        if (r.delay == "maxpending:3") CHECK(r.mean_max_pending <= 2.0);
    }
}

TEST_CASE("seed isolation and thread independence") {
    const ExperimentConfig base = small_recipe_config();
    const auto reference = run_sweep(base);
    ExperimentConfig extended = base;
    extended.policies.push_back(PolicySpec{PolicyKind::EVT_PF});
    extended.policies.insert(extended.policies.begin(), PolicySpec{PolicyKind::EVT});
    const auto wider = run_sweep(extended, 3);
    for (const auto& r : reference.rows) {
        bool found = false;
        for (const auto& w : wider.rows) {
            if (w.policy == r.policy && w.n == r.n && w.delay == r.delay) {
                CHECK(w == r);
                found = true;
            }
        }
        CHECK(found);
    }
    CHECK(run_sweep(base, 4).rows == reference.rows);
}

TEST_CASE("config parsing") {
    const std::string good = R"({
        "instance": {"recipe": {"K": 5, "mean_range": [0.3, 0.7], "half_width_range": [0.05, 0.2]}},
        "b": 0.5,
        "policies": [{"kind": "ATP"}, {"kind": "AP_EVT", "delta": 0.5}, {"kind": "EVT", "a": 3.5},
                     {"kind": "EVT", "a_rule": "n_over_h_evt"},
                     {"kind": "AP_EVT", "a_rule": "theory", "tau": 4, "eta": 0.2}],
        "budgets": [40, 80],
        "delays": ["none", "fixed:2", "maxpending:4"],
        "replications": 3,
        "root_seed": 9,
        "target_accuracy": 0.95
    })";
    const auto c = parse_experiment_config(good);
    CHECK(std::get<InstanceRecipe>(c.instance).num_arms == 5);
    CHECK(c.policies.size() == 5);
    CHECK(c.policies[2].rule == ExplorationRule::Fixed);
    CHECK(c.policies[2].a == 3.5);
    CHECK(c.policies[4].tau == 4);
    CHECK(c.delays[1] == DelayModel::fixed(2));
    CHECK(c.target_accuracy == 0.95);
    CHECK_FALSE(c.fixed_instance);

    const std::string arms = R"({"instance": {"arms": [{"kind": "bernoulli", "p": 0.9},
        {"kind": "uniform", "mu": 0.5, "r": 0.2}, {"kind": "point", "v": 0.1},
        {"kind": "clipped_uniform", "mu": 0.9, "r": 0.3}]},
        "b": 0.5, "policies": [{"kind": "EVT_PF"}], "budgets": [20]})";
    const auto a = parse_experiment_config(arms);
    CHECK(std::get<std::vector<ArmModel>>(a.instance).size() == 4);
    CHECK(a.delays == std::vector<DelayModel>{DelayModel::none()});

    const char* bad[] = {
        R"({"instance": {"arms": [{"kind": "point", "v": 0.1}]}, "b": 0.5, "policies": [{"kind": "ATP"}], "budgets": [20], "replicas": 3})",
        R"({"instance": {"arms": [{"kind": "point", "v": 0.1, "w": 1}]}, "b": 0.5, "policies": [{"kind": "ATP"}], "budgets": [20]})",
        R"({"instance": {"arms": [{"kind": "uniform", "mu": 0.9, "r": 0.3}]}, "b": 0.5, "policies": [{"kind": "ATP"}], "budgets": [20]})",
        R"({"instance": {"recipe": {"K": 3, "mean_range": [0.6, 0.8], "half_width_range": [0.15, 0.25]}}, "b": 0.5, "policies": [{"kind": "ATP"}], "budgets": [20]})",
        R"({"instance": {"arms": [{"kind": "point", "v": 0.1}]}, "b": 0.5, "policies": [{"kind": "UCB"}], "budgets": [20]})",
        R"({"instance": {"arms": [{"kind": "point", "v": 0.1}]}, "b": 0.5, "policies": [{"kind": "AP_EVT", "delta": 2}], "budgets": [20]})",
        R"({"instance": {"arms": [{"kind": "point", "v": 0.1}]}, "b": 0.5, "policies": [{"kind": "ATP"}], "budgets": [20], "delays": ["later"]})",
        R"({"instance": {"arms": [{"kind": "point", "v": 0.1}]}, "b": 0.5, "policies": [{"kind": "ATP"}], "budgets": [20], "replications": 0})",
        R"({"instance": {"arms": [{"kind": "point", "v": 0.1}]}, "policies": [{"kind": "ATP"}], "budgets": [20]})",
        R"({"instance": {"arms": []}, "b": 0.5, "policies": [{"kind": "ATP"}], "budgets": [20]})",
        R"({"instance": {"arms": [{"kind": "point", "v": 0.1}]}, "b": "x", "policies": [{"kind": "ATP"}], "budgets": [20]})",
        R"(not json)",
    };
    for (const char* text : bad) {
        CAPTURE(text);
        CHECK_THROWS_AS(parse_experiment_config(text), ConfigError);
    }
}

TEST_CASE("cli") {
    const auto config = temp_path("cli_config.json");
    {
        std::ofstream out(config);
        out << R"({"instance": {"recipe": {"K": 4, "mean_range": [0.3, 0.7], "half_width_range": [0.05, 0.2]}},
                  "b": 0.5, "policies": [{"kind": "EVT"}, {"kind": "AP_EVT", "delta": 0.5}],
                  "budgets": [8, 40, 80], "delays": ["none", "maxpending:2"], "replications": 5,
                  "root_seed": 3, "target_accuracy": 0.5})";
    }
    const auto csv = temp_path("cli_out.csv");
    const std::string cfg = config.string();
    const std::string out_path = csv.string();

    std::ostringstream out, err;
    const char* sweep[] = {"tbandit", "sweep", "--config", cfg.c_str(), "--out", out_path.c_str()};
    CHECK(run_cli(6, sweep, out, err) == 0);
    CHECK(err.str().find("n=8") != std::string::npos);
    CHECK(out.str().find("speedup") != std::string::npos);
    const std::string first = slurp(csv);
    CHECK(first.rfind(kCsvHeader, 0) == 0);

    const char* strict[] = {"tbandit", "sweep", "--config", cfg.c_str(), "--out", out_path.c_str(), "--strict", "--jobs", "3"};
    std::ostringstream out2, err2;
    CHECK(run_cli(9, strict, out2, err2) == 1);
    CHECK(slurp(csv) == first);

    const char* complexity[] = {"tbandit", "complexity", "--config", cfg.c_str(), "--draws", "200"};
    std::ostringstream out3, err3;
    CHECK(run_cli(6, complexity, out3, err3) == 0);
    CHECK(out3.str().find("h_evt mean") != std::string::npos);

    const char* missing[] = {"tbandit", "sweep", "--config", "/no/such/file.json"};
    std::ostringstream out4, err4;
    CHECK(run_cli(4, missing, out4, err4) == 2);
    CHECK(err4.str().find("/no/such/file.json") != std::string::npos);

    const char* lower[] = {"tbandit", "lowerbound", "--arms", "3", "--n", "120", "--reps", "30"};
    std::ostringstream out5, err5;
    CHECK(run_cli(8, lower, out5, err5) == 0);
    CHECK(out5.str().find("lower_bound") != std::string::npos);

    fs::remove(config);
    fs::remove(csv);
}
