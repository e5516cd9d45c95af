#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mincusum/bounds.hpp"
#include "mincusum/error.hpp"
#include "mincusum/io/csv.hpp"
#include "mincusum/montecarlo.hpp"
#include "mincusum/scenarios.hpp"

namespace mincusum {

/// Scenario description as it appears in a config file.
struct ScenarioSpec {
    std::string id = "scenario";
    ScenarioKind kind = ScenarioKind::single_fault;
    std::vector<ChannelSpec> channels;  // single- and concurrent-fault
    BaseFamily family = BaseFamily::gaussian;  // two-sided
    double gamma0 = 0.0;
    double gamma1 = -1.0;
    double gamma2 = 1.0;

    HypothesisSet build() const {
        switch (kind) {
            case ScenarioKind::single_fault: return build_single_fault(channels);
            case ScenarioKind::concurrent_fault: return build_concurrent_fault(channels);
            case ScenarioKind::two_sided: {
                const auto fam = family == BaseFamily::gaussian    ? ExponentialFamily1D::gaussian()
                                 : family == BaseFamily::bernoulli ? ExponentialFamily1D::bernoulli()
                                                                   : ExponentialFamily1D::exponential();
                return build_two_sided(fam, gamma0, gamma1, gamma2);
            }
        }
        throw std::logic_error("unknown scenario kind");
    }
};

enum class Metric { misid, partial, arl, delay, L, tail };

inline std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::misid: return "misid";
        case Metric::partial: return "partial";
        case Metric::arl: return "arl";
        case Metric::delay: return "delay";
        case Metric::L: return "L";
        case Metric::tail: return "tail";
    }
    return "?";
}

struct StudyConfig {
    ScenarioSpec scenario;
    std::optional<std::string> true_hypothesis;  // label; empty = no change
    std::vector<std::size_t> change_points{0};
    std::vector<double> thresholds;
    SimulationOptions sim;
    std::vector<Metric> outputs{Metric::misid};
    std::vector<std::string> partial_targets;  // empty: every k != j
    std::optional<std::string> L_hypothesis;   // statistic i for L_ij; j is the true hypothesis
    std::vector<double> L_x;
    std::vector<double> tail_x;
    std::vector<double> alphas{0.01};
    std::string out_dir = "results";
    std::string prefix;

    bool wants(Metric m) const { return std::find(outputs.begin(), outputs.end(), m) != outputs.end(); }
};

/// b grid from, from+step, ..., up to `to` (inclusive up to rounding).
inline std::vector<double> threshold_range(double from, double to, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("experiment.thresholds.step", "must be positive");
    if (!(to >= from)) throw ConfigError("experiment.thresholds.to", "must not be below 'from'");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
    for (std::size_t k = 0; k < count; ++k) out.push_back(from + static_cast<double>(k) * step);
    return out;
}

/// Resolves hypothesis labels against the scenario; the ConfigError names the field.
inline std::size_t resolve_label(const HypothesisSet& hs, const std::string& label, const std::string& field) {
    if (auto i = hs.find(label)) return *i;
    std::string known;
    for (const auto& l : hs.labels()) known += (known.empty() ? "" : " ") + l;
    throw ConfigError(field, "unknown hypothesis '" + label + "' (known: " + known + ")");
}

/// Checks everything that can be checked before simulating.
inline HypothesisSet validate(const StudyConfig& cfg) {
    HypothesisSet hs = [&] {
        try {
            return cfg.scenario.build();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("scenario", e.what());
        }
    }();
    if (cfg.thresholds.empty()) throw ConfigError("experiment.thresholds", "threshold grid is empty");
    for (std::size_t k = 0; k < cfg.thresholds.size(); ++k) {
        if (!(cfg.thresholds[k] > 0.0) || !std::isfinite(cfg.thresholds[k]))
            throw ConfigError("experiment.thresholds", "thresholds must be positive and finite");
        if (k > 0 && !(cfg.thresholds[k] > cfg.thresholds[k - 1]))
            throw ConfigError("experiment.thresholds", "thresholds must be strictly increasing");
    }
    if (cfg.change_points.empty()) throw ConfigError("experiment.nu", "need at least one change point");
    if (cfg.sim.paths < 1) throw ConfigError("experiment.paths", "need at least one path");
    if (cfg.sim.horizon < 1) throw ConfigError("experiment.horizon", "must be at least one step");
    if (cfg.sim.horizon > 0xffffffffULL) throw ConfigError("experiment.horizon", "must fit in 32 bits");
    if (cfg.outputs.empty()) throw ConfigError("experiment.outputs", "nothing requested");
    std::optional<std::size_t> j;
    if (cfg.true_hypothesis) j = resolve_label(hs, *cfg.true_hypothesis, "experiment.true_hypothesis");
    const bool needs_j = cfg.wants(Metric::misid) || cfg.wants(Metric::partial) || cfg.wants(Metric::delay) ||
                         cfg.wants(Metric::L);
    if (needs_j && !j)
        throw ConfigError("experiment.true_hypothesis", "misid, partial, delay and L need a true hypothesis");
    for (const auto& t : cfg.partial_targets) {
        const std::size_t k = resolve_label(hs, t, "experiment.partial");
        if (j && k == *j) throw ConfigError("experiment.partial", "target '" + t + "' is the true hypothesis");
    }
    if (cfg.wants(Metric::L)) {
        if (!cfg.L_hypothesis) throw ConfigError("experiment.L.hypothesis", "required for L");
        resolve_label(hs, *cfg.L_hypothesis, "experiment.L.hypothesis");
        if (cfg.L_x.empty()) throw ConfigError("experiment.L.x", "need at least one start value");
        for (double x : cfg.L_x)
            if (!(x >= 0.0 && x <= cfg.thresholds.front()))
                throw ConfigError("experiment.L.x", "start values must lie in [0, smallest threshold]");
    }
    if (cfg.wants(Metric::tail)) {
        if (cfg.tail_x.empty()) throw ConfigError("experiment.tail.x", "need at least one x");
        if (std::none_of(cfg.change_points.begin(), cfg.change_points.end(), [](std::size_t n) { return n >= 1; }))
            throw ConfigError("experiment.nu", "the tail check needs some nu >= 1");
    }
    for (double a : cfg.alphas)
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("bounds.alpha", "alpha must lie in (0, 1)");
    return hs;
}

/// One row of the result CSV.
struct ResultRow {
    std::string scenario_id;
    std::string true_hyp;
    std::optional<std::size_t> nu;
    double b = 0.0;
    std::string metric;
    Estimate estimate;
    std::optional<double> bound;
    std::uint64_t seed = 0;
};

inline const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> cols{"scenario_id", "true_hyp",    "nu",          "b",
                                               "metric",      "value",       "se",          "n_effective",
                                               "n_nominal",   "n_truncated", "bound_value", "seed"};
    return cols;
}

inline std::string results_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    io::CsvWriter w(os);
    w.row(result_columns());
    for (const auto& r : rows) {
        w.row({r.scenario_id, r.true_hyp, r.nu ? std::to_string(*r.nu) : std::string(), io::format_double(r.b),
               r.metric, io::format_double(r.estimate.value), io::format_double(r.estimate.se),
               std::to_string(r.estimate.n_effective), std::to_string(r.estimate.n_nominal),
               std::to_string(r.estimate.n_truncated), io::format_optional(r.bound), std::to_string(r.seed)});
    }
    return os.str();
}

namespace detail {

inline std::uint64_t stream_tag(Metric m, std::uint64_t index) {
    return (static_cast<std::uint64_t>(m) + 1) << 40 | index;
}

inline std::string x_label(double x) { return io::format_double(x); }

}  // namespace detail

/// Bound column for the overall misidentification probability: the constant
/// forms where they apply, otherwise the sum of pair bounds (empty when some
/// pair has none).
inline std::optional<double> overall_bound(const HypothesisSet& hs, std::size_t j, double b,
                                           const std::vector<PairBound>& pairs) {
    if (hs.kind() == ScenarioKind::single_fault) return single_fault_bound(hs, b).value;
    if (hs.two_sided() && hs.two_sided()->family.base() == BaseFamily::gaussian) return two_sided_bound(hs, b).value;
    (void)j;
    return overall_misid_bound(pairs, b);
}

/// Runs every requested estimator over the grid. Rows come out in a fixed
/// order and every random stream is derived from (seed, metric, index), so the
/// rows do not depend on the worker count.
inline std::vector<ResultRow> run_study(const StudyConfig& cfg, const ConstantOptions& constants = {}) {
    const HypothesisSet hs = validate(cfg);
    std::optional<std::size_t> j;
    if (cfg.true_hypothesis) j = hs.find(*cfg.true_hypothesis);
    const std::string jlabel = j ? hs.label(*j) : "none";
    std::vector<ResultRow> rows;
    auto row = [&](std::optional<std::size_t> nu, double b, std::string metric, const Estimate& e,
                   std::optional<double> bound) {
        rows.push_back(ResultRow{cfg.scenario.id, jlabel, nu, b, std::move(metric), e, bound, cfg.sim.seed});
    };

    std::vector<PairBound> pairs;
    if (j && (cfg.wants(Metric::misid) || cfg.wants(Metric::partial)))
        for (std::size_t i = 0; i < hs.size(); ++i)
            if (i != *j) pairs.push_back(pair_bound(hs, i, *j, constants));
    auto pair_of = [&](std::size_t i) -> const PairBound& {
        for (const auto& p : pairs)
            if (p.i == i) return p;
        throw std::logic_error("missing pair bound");
    };

    if (cfg.wants(Metric::misid) || cfg.wants(Metric::partial)) {
        std::vector<std::size_t> targets;
        for (const auto& t : cfg.partial_targets) targets.push_back(*hs.find(t));
        if (targets.empty())
            for (std::size_t k = 0; k < hs.size(); ++k)
                if (k != *j) targets.push_back(k);
        for (std::size_t v = 0; v < cfg.change_points.size(); ++v) {
            ExperimentConfig ec{j, cfg.change_points[v], cfg.thresholds, cfg.sim};
            ec.sim.stream = detail::stream_tag(Metric::misid, v);
            const auto tallies = simulate_diagnosis(hs, ec);
            for (const auto& t : tallies) {
                if (cfg.wants(Metric::misid))
                    row(ec.change_point, t.threshold, "misid", misid_from_tally(t, *j),
                        overall_bound(hs, *j, t.threshold, pairs));
                if (cfg.wants(Metric::partial))
                    for (std::size_t k : targets)
                        row(ec.change_point, t.threshold, "partial:" + hs.label(k), partial_from_tally(t, k),
                            pair_of(k)(t.threshold));
            }
        }
    }

    if (cfg.wants(Metric::arl)) {
        SimulationOptions sim = cfg.sim;
        sim.stream = detail::stream_tag(Metric::arl, 0);
        for (double b : cfg.thresholds)
            row(std::nullopt, b, "arl", estimate_arl(hs, b, sim), arl_lower_bound(b, hs.size()));
    }

    if (cfg.wants(Metric::delay)) {
        SimulationOptions sim = cfg.sim;
        sim.stream = detail::stream_tag(Metric::delay, 0);
        const double kl = kl_matrix(hs).I(*j);
        const double excess = excess_bound(hs, *j, constants).value;
        for (double b : cfg.thresholds)
            row(0, b, "delay", estimate_delay(hs, *j, b, sim), delay_upper_bound(b, kl, excess));
    }

    if (cfg.wants(Metric::L)) {
        const std::size_t i = *hs.find(*cfg.L_hypothesis);
        const KLMatrix kl = kl_matrix(hs);
        std::optional<PairBound> pb;
        std::optional<LordenConstants> lc;
        if (i != *j) {
            pb = pair_bound(hs, i, *j, constants);
            if (pb->kind != BoundCase::unavailable) lc = lorden_constants(hs, i, *j, constants);
        }
        for (std::size_t kb = 0; kb < cfg.thresholds.size(); ++kb) {
            const double b = cfg.thresholds[kb];
            SimulationOptions sim = cfg.sim;
            sim.stream = detail::stream_tag(Metric::L, kb << 16);
            const Estimate L0 = estimate_L(hs, i, *j, 0.0, b, sim);
            for (std::size_t kx = 0; kx < cfg.L_x.size(); ++kx) {
                const double x = cfg.L_x[kx];
                sim.stream = detail::stream_tag(Metric::L, (kb << 16) | (kx + 1));
                const Estimate e = x == 0.0 ? L0 : estimate_L(hs, i, *j, x, b, sim);
                std::optional<double> bound;
                if (pb && lc && pb->kind == BoundCase::equal_kl)
                    bound = run_length_lower_equal(x, b, lc->overshoot.value, lc->undershoot.value, lc->second_moment,
                                               L0.value);
                else if (pb && lc && pb->root)
                    bound = run_length_lower(x, b, pb->root->value, lc->overshoot.value, kl.I(*j, i) - kl.I(*j),
                                         L0.value);
                row(std::nullopt, b, "L:" + hs.label(i) + ":x=" + detail::x_label(x), e, bound);
            }
        }
    }

    if (cfg.wants(Metric::tail)) {
        for (std::size_t v = 0; v < cfg.change_points.size(); ++v) {
            const std::size_t nu = cfg.change_points[v];
            if (nu < 1) continue;
            for (std::size_t kb = 0; kb < cfg.thresholds.size(); ++kb) {
                SimulationOptions sim = cfg.sim;
                sim.stream = detail::stream_tag(Metric::tail, (v << 16) | kb);
                const double b = cfg.thresholds[kb];
                const auto rep = verify_prechange_tail(hs, nu, b, cfg.tail_x, sim);
                for (std::size_t i = 0; i < hs.size(); ++i)
                    for (std::size_t kx = 0; kx < cfg.tail_x.size(); ++kx)
                        row(nu, b, "tail:" + hs.label(i) + ":x=" + detail::x_label(cfg.tail_x[kx]), rep.tail[i][kx],
                            std::exp(-cfg.tail_x[kx]));
            }
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Bounds table
// ---------------------------------------------------------------------------

struct BoundRow {
    std::string section;
    std::string i;
    std::string j;
    std::optional<double> alpha;
    std::optional<double> b;
    std::optional<double> value;
    std::optional<double> se;
    std::string kind;
    std::string note;
};

inline std::string bounds_csv(const std::vector<BoundRow>& rows) {
    std::ostringstream os;
    io::CsvWriter w(os);
    w.row({"section", "i", "j", "alpha", "b", "value", "se", "case", "note"});
    for (const auto& r : rows)
        w.row({r.section, r.i, r.j, io::format_optional(r.alpha), io::format_optional(r.b),
               io::format_optional(r.value), io::format_optional(r.se), r.kind, r.note});
    return os.str();
}

inline constexpr std::string_view kTailConditionNote = "conditional on the pre-change tail condition";

/// KL matrix, roots, constants, calibration and bound curves over the grid.
/// For nu > 0 outside the single-fault case the curves are only valid under
/// the pre-change tail condition; `any_positive_nu` adds that note.
inline std::vector<BoundRow> bounds_table(const HypothesisSet& hs, const std::vector<double>& thresholds,
                                          const std::vector<double>& alphas, bool any_positive_nu,
                                          const ConstantOptions& constants = {}) {
    std::vector<BoundRow> out;
    const KLMatrix kl = kl_matrix(hs);
    const std::size_t k = hs.size();
    const std::string tail_note =
        any_positive_nu && hs.kind() != ScenarioKind::single_fault ? std::string(kTailConditionNote) : std::string();

    for (std::size_t i = 0; i < k; ++i) out.push_back({"kl", hs.label(i), "", {}, {}, kl.I(i), {}, "", ""});
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j) out.push_back({"kl", hs.label(i), hs.label(j), {}, {}, kl.I(i, j), {}, "", ""});

    // ordering of I_j against I_ji, per (i, j)
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < k; ++i) {
            if (i == j) continue;
            const double gap = kl.I(j, i) - kl.I(j);
            const char* kind = std::abs(gap) <= kEqualKlTolerance ? "equal" : gap > 0.0 ? "strict" : "reverse";
            out.push_back({"ordering", hs.label(i), hs.label(j), {}, {}, gap, {}, kind, "I_ji - I_j"});
        }

    for (std::size_t j = 0; j < k; ++j) {
        const Estimate e = excess_bound(hs, j, constants);
        out.push_back({"excess", "", hs.label(j), {}, {}, e.value, e.se, "", "B_j"});
    }

    std::vector<std::vector<PairBound>> by_truth(k);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < k; ++i) {
            if (i == j) continue;
            const PairBound pb = pair_bound(hs, i, j, constants);
            by_truth[j].push_back(pb);
            if (pb.root)
                out.push_back({"root", hs.label(i), hs.label(j), {}, {}, pb.root->value, {},
                               std::string(to_string(pb.kind)), std::string(to_string(pb.root->method))});
            else if (pb.kind == BoundCase::unavailable)
                out.push_back({"root", hs.label(i), hs.label(j), {}, {}, {}, {}, "none", "no bound available"});
            const Estimate over = pb.constants ? pb.constants->overshoot : overshoot_bound(hs, i, j, constants);
            const Estimate under = pb.constants ? pb.constants->undershoot : undershoot_bound(hs, i, j, constants);
            out.push_back({"overshoot", hs.label(i), hs.label(j), {}, {}, over.value, over.se, "", "omega_ij"});
            out.push_back({"undershoot", hs.label(i), hs.label(j), {}, {}, under.value, under.se, "", "omega~_ij"});
            if (pb.kind == BoundCase::equal_kl)
                out.push_back({"c_tilde", hs.label(i), hs.label(j), {}, {}, pb.c_tilde, {}, "equal_kl", ""});
        }

    if (hs.kind() == ScenarioKind::single_fault)
        out.push_back({"constant", "", "", {}, {}, single_fault_bound(hs, 1.0).constant, {}, "C", "C b e^-b"});
    if (hs.two_sided() && hs.two_sided()->family.base() == BaseFamily::gaussian)
        out.push_back({"constant", "", "", {}, {}, two_sided_bound(hs, 1.0).constant, {}, "C*", "C* e^-b"});

    for (double a : alphas) {
        const double b = b_alpha(a, k);
        out.push_back({"b_alpha", "", "", a, {}, b, {}, "", ""});
        out.push_back({"arl_lower_bound", "", "", a, b, arl_lower_bound(b, k), {}, "", ""});
        for (std::size_t j = 0; j < k; ++j)
            out.push_back({"delay_approximation", "", hs.label(j), a, b, delay_approximation(a, kl.I(j)), {}, "", ""});
    }

    for (std::size_t j = 0; j < k; ++j) {
        for (const auto& pb : by_truth[j])
            for (double b : thresholds) {
                const auto v = pb(b);
                out.push_back({"curve", hs.label(pb.i), hs.label(j), {}, b, v, {}, std::string(to_string(pb.kind)),
                               v ? tail_note : std::string("no bound available")});
            }
        for (double b : thresholds) {
            const auto v = overall_bound(hs, j, b, by_truth[j]);
            const char* kind = hs.kind() == ScenarioKind::single_fault ? "C b e^-b"
                               : hs.two_sided() && hs.two_sided()->family.base() == BaseFamily::gaussian
                                   ? "C* e^-b"
                                   : "sum";
            out.push_back({"overall", "", hs.label(j), {}, b, v, {}, kind, v ? tail_note : "no bound available"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Built-in studies
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDefaultSeed = 20240917;

inline StudyConfig figure_study(std::string_view name) {
    StudyConfig c;
    c.thresholds = threshold_range(2.0, 9.0, 0.25);
    c.sim.paths = 10'000;
    c.sim.horizon = 100'000;
    c.sim.seed = kDefaultSeed;
    c.change_points = {0, 20, 100};
    c.outputs = {Metric::misid};
    c.prefix = std::string(name);
    c.scenario.channels = gaussian_channels(3);
    if (name == "fig2") {
        c.scenario.id = "fig2";
        c.scenario.kind = ScenarioKind::single_fault;
        c.true_hypothesis = "1";
    } else if (name == "fig3") {
        c.scenario.id = "fig3";
        c.scenario.kind = ScenarioKind::concurrent_fault;
        c.true_hypothesis = "{1,2}";
    } else if (name == "fig4") {
        c.scenario.id = "fig4";
        c.scenario.kind = ScenarioKind::concurrent_fault;
        c.true_hypothesis = "{1,2}";
        c.change_points = {100};
        c.outputs = {Metric::partial};
        c.partial_targets = {"{2}", "{1,3}", "{3}"};
    } else {
        throw ConfigError("figure", "unknown figure '" + std::string(name) + "' (fig2, fig3, fig4)");
    }
    return c;
}

}  // namespace mincusum
