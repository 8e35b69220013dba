// config.cpp
//
// JSON experiment files. Keys mirror the ExperimentConfig fields:
//
//   {
//     "instance": {"recipe": {"K": 100, "mean_range": [0.6, 0.8],
//                             "half_width_range": [0.15, 0.25],
//                             "distribution": "uniform", "clip": true}},
//     "b": 0.7,
//     "policies": [{"kind": "ATP"}, {"kind": "AP_EVT", "delta": 0.5}],
//     "budgets": [400, 800],
//     "delays": ["none", "maxpending:8"],
//     "replications": 100,
//     "root_seed": 1,
//     "target_accuracy": 0.95,
//     "fixed_instance": false
//   }
//
// An explicit instance is {"arms": [{"kind": "bernoulli", "p": 0.9},
// {"kind": "uniform", "mu": 0.5, "r": 0.2}, {"kind": "point", "v": 0.7},
// {"kind": "clipped_uniform", "mu": 0.8, "r": 0.25}]}.
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <tuple>

#include "json.hpp"
#include "tbandit/errors.hpp"
#include "tbandit/harness.hpp"

namespace tbandit {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* name : allowed) known = known || key == name;
        if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
    return *it;
}

double as_real(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw ConfigError(where + ": expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::pair<double, double> as_range(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected [lo, hi]");
    return {as_real(v[0], where), as_real(v[1], where)};
}

ArmModel parse_arm(const json& v, const std::string& where) {
    const std::string kind = require(v, "kind", where).get<std::string>();
    if (kind == "bernoulli") {
        reject_unknown(v, {"kind", "p"}, where);
        return ArmModel::bernoulli(as_real(require(v, "p", where), where + ".p"));
    }
    if (kind == "uniform" || kind == "clipped_uniform") {
        reject_unknown(v, {"kind", "mu", "r"}, where);
        const double mu = as_real(require(v, "mu", where), where + ".mu");
        const double r = as_real(require(v, "r", where), where + ".r");
        return kind == "uniform" ? ArmModel::uniform(mu, r) : ArmModel::clipped_uniform(mu, r);
    }
    if (kind == "point") {
        reject_unknown(v, {"kind", "v"}, where);
        return ArmModel::point_mass(as_real(require(v, "v", where), where + ".v"));
    }
    throw ConfigError(where + ": unknown arm kind '" + kind + "'");
}

InstanceRecipe parse_recipe(const json& v) {
    const std::string where = "instance.recipe";
    reject_unknown(v, {"K", "mean_range", "half_width_range", "distribution", "clip"}, where);
    InstanceRecipe recipe;
    recipe.num_arms = as_count(require(v, "K", where), where + ".K");
    std::tie(recipe.mean_lo, recipe.mean_hi) = as_range(require(v, "mean_range", where), where + ".mean_range");
    if (v.contains("half_width_range")) {
        std::tie(recipe.half_width_lo, recipe.half_width_hi) =
            as_range(v["half_width_range"], where + ".half_width_range");
    }
    const std::string dist = v.value("distribution", std::string("uniform"));
    if (dist == "uniform") {
        recipe.distribution = RecipeDistribution::Uniform;
    } else if (dist == "bernoulli") {
        recipe.distribution = RecipeDistribution::Bernoulli;
    } else if (dist == "point") {
        recipe.distribution = RecipeDistribution::PointMass;
    } else {
        throw ConfigError(where + ": unknown distribution '" + dist + "'");
    }
    if (v.contains("clip")) {
        if (!v["clip"].is_boolean()) throw ConfigError(where + ".clip: expected a boolean");
        recipe.clip = v["clip"].get<bool>();
    }
    return recipe;
}

InstanceSpec parse_instance(const json& v) {
    reject_unknown(v, {"arms", "recipe"}, "instance");
    if (v.contains("arms") == v.contains("recipe")) {
        throw ConfigError("instance: give exactly one of 'arms' or 'recipe'");
    }
    if (v.contains("recipe")) return parse_recipe(v["recipe"]);
    const json& list = v["arms"];
    if (!list.is_array()) throw ConfigError("instance.arms: expected an array");
    std::vector<ArmModel> arms;
    for (std::size_t k = 0; k < list.size(); ++k) {
        arms.push_back(parse_arm(list[k], "instance.arms[" + std::to_string(k) + "]"));
    }
    return arms;
}

PolicySpec parse_policy(const json& v, const std::string& where) {
    reject_unknown(v, {"kind", "delta", "a", "a_rule", "tau", "eta"}, where);
    PolicySpec spec;
    spec.kind = parse_policy_kind(require(v, "kind", where).get<std::string>());
    if (v.contains("delta")) spec.delta = as_real(v["delta"], where + ".delta");
    std::string rule = v.contains("a") ? "fixed" : "n_over_k";
    if (v.contains("a_rule")) rule = v["a_rule"].get<std::string>();
    if (rule == "n_over_k") {
        spec.rule = ExplorationRule::NOverK;
    } else if (rule == "fixed") {
        spec.rule = ExplorationRule::Fixed;
        spec.a = as_real(require(v, "a", where), where + ".a");
    } else if (rule == "n_over_h_evt") {
        spec.rule = ExplorationRule::NOverHEvt;
    } else if (rule == "theory") {
        spec.rule = ExplorationRule::Theory;
        spec.tau = as_count(require(v, "tau", where), where + ".tau");
        spec.eta = as_real(require(v, "eta", where), where + ".eta");
    } else {
        throw ConfigError(where + ": unknown a_rule '" + rule + "'");
    }
    if (spec.rule != ExplorationRule::Fixed && v.contains("a")) {
        throw ConfigError(where + ": 'a' given together with a_rule '" + rule + "'");
    }
    return spec;
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    try {
        reject_unknown(doc, {"instance", "b", "policies", "budgets", "delays", "replications",
                             "root_seed", "target_accuracy", "fixed_instance"},
                       "config");
        ExperimentConfig config;
        config.instance = parse_instance(require(doc, "instance", "config"));
        config.b = as_real(require(doc, "b", "config"), "b");

        const json& policies = require(doc, "policies", "config");
        if (!policies.is_array()) throw ConfigError("policies: expected an array");
        for (std::size_t i = 0; i < policies.size(); ++i) {
            config.policies.push_back(parse_policy(policies[i], "policies[" + std::to_string(i) + "]"));
        }

        const json& budgets = require(doc, "budgets", "config");
        if (!budgets.is_array()) throw ConfigError("budgets: expected an array");
        for (const auto& n : budgets) config.budgets.push_back(as_count(n, "budgets"));

        if (doc.contains("delays")) {
            if (!doc["delays"].is_array()) throw ConfigError("delays: expected an array");
            config.delays.clear();
            for (const auto& d : doc["delays"]) {
                if (!d.is_string()) throw ConfigError("delays: expected descriptor strings");
                config.delays.push_back(DelayModel::parse(d.get<std::string>()));
            }
        }
        if (doc.contains("replications")) config.replications = as_count(doc["replications"], "replications");
        if (doc.contains("root_seed")) config.root_seed = as_count(doc["root_seed"], "root_seed");
        if (doc.contains("target_accuracy")) {
            config.target_accuracy = as_real(doc["target_accuracy"], "target_accuracy");
        }
        if (doc.contains("fixed_instance")) {
            if (!doc["fixed_instance"].is_boolean()) throw ConfigError("fixed_instance: expected a boolean");
            config.fixed_instance = doc["fixed_instance"].get<bool>();
        }
        config.validate();
        return config;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

} // namespace tbandit
