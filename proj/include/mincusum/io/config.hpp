#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mincusum/error.hpp"
#include "mincusum/studies.hpp"

namespace mincusum::io {

using json = nlohmann::ordered_json;

namespace detail {

inline void allow_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (auto k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
}

inline const json& object_at(const json& parent, const std::string& key, const std::string& where) {
    const std::string field = where.empty() ? key : where + "." + key;
    if (!parent.contains(key)) throw ConfigError(field, "missing");
    const json& v = parent.at(key);
    if (!v.is_object()) throw ConfigError(field, "must be an object");
    return v;
}

inline double number(const json& v, const std::string& field) {
    if (!v.is_number()) throw ConfigError(field, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(field, "must be finite");
    return d;
}

inline std::uint64_t count(const json& v, const std::string& field) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ConfigError(field, "must be a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::string text(const json& v, const std::string& field) {
    if (!v.is_string()) throw ConfigError(field, "must be a string");
    return v.get<std::string>();
}

inline std::vector<double> numbers(const json& v, const std::string& field) {
    if (!v.is_array()) throw ConfigError(field, "must be a list of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], field + "[" + std::to_string(k) + "]"));
    return out;
}

inline BaseFamily base_family(const json& v, const std::string& field) {
    const std::string s = text(v, field);
    if (s == "gaussian") return BaseFamily::gaussian;
    if (s == "bernoulli") return BaseFamily::bernoulli;
    if (s == "exponential") return BaseFamily::exponential;
    throw ConfigError(field, "unknown family '" + s + "' (gaussian, bernoulli, exponential)");
}

inline ExponentialFamily1D family_of(BaseFamily b) {
    switch (b) {
        case BaseFamily::gaussian: return ExponentialFamily1D::gaussian();
        case BaseFamily::bernoulli: return ExponentialFamily1D::bernoulli();
        case BaseFamily::exponential: return ExponentialFamily1D::exponential();
    }
    throw std::logic_error("unknown base family");
}

inline Distribution distribution(const json& v, const std::string& field) {
    if (!v.is_object()) throw ConfigError(field, "must be an object");
    if (!v.contains("family")) throw ConfigError(field + ".family", "missing");
    const std::string fam = text(v.at("family"), field + ".family");
    try {
        if (fam == "gaussian") {
            allow_keys(v, field, {"family", "mean"});
            if (!v.contains("mean")) throw ConfigError(field + ".mean", "missing");
            return Distribution::gaussian(number(v.at("mean"), field + ".mean"));
        }
        if (fam == "bernoulli") {
            allow_keys(v, field, {"family", "p"});
            if (!v.contains("p")) throw ConfigError(field + ".p", "missing");
            return Distribution::bernoulli(number(v.at("p"), field + ".p"));
        }
        if (fam == "tilt") {
            allow_keys(v, field, {"family", "base", "gamma"});
            if (!v.contains("base")) throw ConfigError(field + ".base", "missing");
            if (!v.contains("gamma")) throw ConfigError(field + ".gamma", "missing");
            return tilt(family_of(base_family(v.at("base"), field + ".base")), number(v.at("gamma"), field + ".gamma"));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(field, e.what());
    }
    throw ConfigError(field + ".family", "unknown distribution '" + fam + "' (gaussian, bernoulli, tilt)");
}

inline json to_json(const Distribution& d) {
    switch (d.kind()) {
        case DistributionKind::gaussian: return json{{"family", "gaussian"}, {"mean", d.parameter()}};
        case DistributionKind::bernoulli: return json{{"family", "bernoulli"}, {"p", d.parameter()}};
        case DistributionKind::tilt:
            return json{{"family", "tilt"}, {"base", std::string(to_string(d.family().base()))},
                        {"gamma", d.natural_parameter()}};
    }
    return json();
}

inline Metric metric(const json& v, const std::string& field) {
    const std::string s = text(v, field);
    for (Metric m : {Metric::misid, Metric::partial, Metric::arl, Metric::delay, Metric::L, Metric::tail})
        if (s == to_string(m)) return m;
    if (s == "condition34") return Metric::tail;
    throw ConfigError(field, "unknown output '" + s + "' (misid, partial, arl, delay, L, tail)");
}

}  // namespace detail

inline ScenarioSpec parse_scenario(const json& s) {
    using namespace detail;
    allow_keys(s, "scenario", {"id", "kind", "channels", "repeat", "family", "gamma0", "gamma1", "gamma2"});
    ScenarioSpec spec;
    if (s.contains("id")) spec.id = text(s.at("id"), "scenario.id");
    if (!s.contains("kind")) throw ConfigError("scenario.kind", "missing");
    const std::string kind = text(s.at("kind"), "scenario.kind");
    if (kind == "single_fault")
        spec.kind = ScenarioKind::single_fault;
    else if (kind == "concurrent_fault")
        spec.kind = ScenarioKind::concurrent_fault;
    else if (kind == "two_sided")
        spec.kind = ScenarioKind::two_sided;
    else
        throw ConfigError("scenario.kind", "unknown kind '" + kind + "' (single_fault, concurrent_fault, two_sided)");

    if (spec.kind == ScenarioKind::two_sided) {
        for (const char* k : {"channels", "repeat"})
            if (s.contains(k)) throw ConfigError(std::string("scenario.") + k, "not used by two_sided scenarios");
        for (const char* k : {"family", "gamma0", "gamma1", "gamma2"})
            if (!s.contains(k)) throw ConfigError(std::string("scenario.") + k, "missing");
        spec.family = base_family(s.at("family"), "scenario.family");
        spec.gamma0 = number(s.at("gamma0"), "scenario.gamma0");
        spec.gamma1 = number(s.at("gamma1"), "scenario.gamma1");
        spec.gamma2 = number(s.at("gamma2"), "scenario.gamma2");
        return spec;
    }
    for (const char* k : {"family", "gamma0", "gamma1", "gamma2"})
        if (s.contains(k)) throw ConfigError(std::string("scenario.") + k, "only used by two_sided scenarios");
    if (!s.contains("channels")) throw ConfigError("scenario.channels", "missing");
    const json& ch = s.at("channels");
    if (!ch.is_array() || ch.empty()) throw ConfigError("scenario.channels", "must be a non-empty list");
    std::vector<ChannelSpec> base;
    for (std::size_t c = 0; c < ch.size(); ++c) {
        const std::string field = "scenario.channels[" + std::to_string(c) + "]";
        if (!ch[c].is_object()) throw ConfigError(field, "must be an object");
        allow_keys(ch[c], field, {"pre", "post"});
        if (!ch[c].contains("pre")) throw ConfigError(field + ".pre", "missing");
        if (!ch[c].contains("post")) throw ConfigError(field + ".post", "missing");
        const Distribution pre = distribution(ch[c].at("pre"), field + ".pre");
        const Distribution post = distribution(ch[c].at("post"), field + ".post");
        try {
            base.emplace_back(pre, post);
        } catch (const std::exception& e) {
            throw ConfigError(field, e.what());
        }
    }
    std::size_t repeat = 1;
    if (s.contains("repeat")) {
        repeat = count(s.at("repeat"), "scenario.repeat");
        if (repeat < 1) throw ConfigError("scenario.repeat", "must be at least 1");
        if (repeat * base.size() > 64) throw ConfigError("scenario.repeat", "too many channels");
    }
    for (std::size_t r = 0; r < repeat; ++r) spec.channels.insert(spec.channels.end(), base.begin(), base.end());
    return spec;
}

/// Parses a config document. Settings not present keep the StudyConfig defaults.
inline StudyConfig parse_config(const json& doc) {
    using namespace detail;
    if (!doc.is_object()) throw ConfigError("(root)", "config must be a JSON object");
    allow_keys(doc, "", {"scenario", "experiment", "bounds", "output"});
    StudyConfig cfg;
    cfg.scenario = parse_scenario(object_at(doc, "scenario", ""));

    const json& e = object_at(doc, "experiment", "");
    allow_keys(e, "experiment",
               {"true_hypothesis", "nu", "thresholds", "paths", "seed", "horizon", "outputs", "partial", "L", "tail"});
    if (e.contains("true_hypothesis")) {
        const std::string j = text(e.at("true_hypothesis"), "experiment.true_hypothesis");
        if (j != "none") cfg.true_hypothesis = j;
    }
    if (e.contains("nu")) {
        const json& nu = e.at("nu");
        cfg.change_points.clear();
        if (nu.is_array()) {
            for (std::size_t k = 0; k < nu.size(); ++k)
                cfg.change_points.push_back(count(nu[k], "experiment.nu[" + std::to_string(k) + "]"));
        } else {
            cfg.change_points.push_back(count(nu, "experiment.nu"));
        }
    }
    if (!e.contains("thresholds")) throw ConfigError("experiment.thresholds", "missing");
    const json& t = e.at("thresholds");
    if (t.is_object()) {
        allow_keys(t, "experiment.thresholds", {"from", "to", "step"});
        for (const char* k : {"from", "to", "step"})
            if (!t.contains(k)) throw ConfigError(std::string("experiment.thresholds.") + k, "missing");
        cfg.thresholds = threshold_range(number(t.at("from"), "experiment.thresholds.from"),
                                         number(t.at("to"), "experiment.thresholds.to"),
                                         number(t.at("step"), "experiment.thresholds.step"));
    } else {
        cfg.thresholds = numbers(t, "experiment.thresholds");
    }
    if (e.contains("paths")) cfg.sim.paths = count(e.at("paths"), "experiment.paths");
    if (e.contains("seed")) cfg.sim.seed = count(e.at("seed"), "experiment.seed");
    if (e.contains("horizon")) cfg.sim.horizon = count(e.at("horizon"), "experiment.horizon");
    if (e.contains("outputs")) {
        const json& o = e.at("outputs");
        if (!o.is_array()) throw ConfigError("experiment.outputs", "must be a list");
        cfg.outputs.clear();
        for (std::size_t k = 0; k < o.size(); ++k)
            cfg.outputs.push_back(metric(o[k], "experiment.outputs[" + std::to_string(k) + "]"));
    }
    if (e.contains("partial")) {
        const json& p = e.at("partial");
        if (!p.is_array()) throw ConfigError("experiment.partial", "must be a list of hypothesis labels");
        for (std::size_t k = 0; k < p.size(); ++k)
            cfg.partial_targets.push_back(text(p[k], "experiment.partial[" + std::to_string(k) + "]"));
    }
    if (e.contains("L")) {
        const json& L = object_at(e, "L", "experiment");
        allow_keys(L, "experiment.L", {"hypothesis", "x"});
        if (L.contains("hypothesis")) cfg.L_hypothesis = text(L.at("hypothesis"), "experiment.L.hypothesis");
        if (L.contains("x")) cfg.L_x = numbers(L.at("x"), "experiment.L.x");
    }
    if (e.contains("tail")) {
        const json& tl = object_at(e, "tail", "experiment");
        allow_keys(tl, "experiment.tail", {"x"});
        if (tl.contains("x")) cfg.tail_x = numbers(tl.at("x"), "experiment.tail.x");
    }

    if (doc.contains("bounds")) {
        const json& b = object_at(doc, "bounds", "");
        allow_keys(b, "bounds", {"alpha"});
        if (b.contains("alpha")) cfg.alphas = numbers(b.at("alpha"), "bounds.alpha");
    }
    if (doc.contains("output")) {
        const json& o = object_at(doc, "output", "");
        allow_keys(o, "output", {"dir", "prefix"});
        if (o.contains("dir")) cfg.out_dir = text(o.at("dir"), "output.dir");
        if (o.contains("prefix")) cfg.prefix = text(o.at("prefix"), "output.prefix");
    }
    if (cfg.prefix.empty()) cfg.prefix = cfg.scenario.id;
    validate(cfg);
    return cfg;
}

inline StudyConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("(file)", std::string("not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

inline StudyConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

/// Fully resolved config, suitable for re-parsing.
inline json to_json(const StudyConfig& cfg) {
    json scenario;
    scenario["id"] = cfg.scenario.id;
    scenario["kind"] = std::string(to_string(cfg.scenario.kind));
    if (cfg.scenario.kind == ScenarioKind::two_sided) {
        scenario["family"] = std::string(to_string(cfg.scenario.family));
        scenario["gamma0"] = cfg.scenario.gamma0;
        scenario["gamma1"] = cfg.scenario.gamma1;
        scenario["gamma2"] = cfg.scenario.gamma2;
    } else {
        json channels = json::array();
        for (const auto& c : cfg.scenario.channels)
            channels.push_back(json{{"pre", detail::to_json(c.pre())}, {"post", detail::to_json(c.post())}});
        scenario["channels"] = channels;
    }
    json experiment;
    experiment["true_hypothesis"] = cfg.true_hypothesis.value_or("none");
    experiment["nu"] = cfg.change_points;
    experiment["thresholds"] = cfg.thresholds;
    experiment["paths"] = cfg.sim.paths;
    experiment["seed"] = cfg.sim.seed;
    experiment["horizon"] = cfg.sim.horizon;
    json outputs = json::array();
    for (Metric m : cfg.outputs) outputs.push_back(std::string(to_string(m)));
    experiment["outputs"] = outputs;
    if (!cfg.partial_targets.empty()) experiment["partial"] = cfg.partial_targets;
    if (cfg.L_hypothesis || !cfg.L_x.empty()) {
        json L;
        if (cfg.L_hypothesis) L["hypothesis"] = *cfg.L_hypothesis;
        L["x"] = cfg.L_x;
        experiment["L"] = L;
    }
    if (!cfg.tail_x.empty()) experiment["tail"] = json{{"x", cfg.tail_x}};
    json doc;
    doc["scenario"] = scenario;
    doc["experiment"] = experiment;
    doc["bounds"] = json{{"alpha", cfg.alphas}};
    doc["output"] = json{{"dir", cfg.out_dir}, {"prefix", cfg.prefix}};
    return doc;
}

}  // namespace mincusum::io
