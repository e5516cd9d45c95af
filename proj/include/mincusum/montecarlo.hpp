#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mincusum/bounds.hpp"
#include "mincusum/cusum.hpp"
#include "mincusum/error.hpp"
#include "mincusum/estimate.hpp"
#include "mincusum/parallel.hpp"
#include "mincusum/random.hpp"
#include "mincusum/scenarios.hpp"

namespace mincusum {

/// Replication controls shared by every estimator.
struct SimulationOptions {
    std::size_t paths = 10'000;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;  // separates experiments that share a master seed
    std::size_t horizon = 100'000;
    std::size_t workers = 1;
};

struct ExperimentConfig {
    std::optional<std::size_t> true_hypothesis;  // empty: no change ever (P_inf)
    std::size_t change_point = 0;
    std::vector<double> thresholds;
    SimulationOptions sim;

    void validate(const HypothesisSet& hs) const {
        if (true_hypothesis && *true_hypothesis >= hs.size()) throw std::invalid_argument("true hypothesis index");
        if (thresholds.empty()) throw std::invalid_argument("threshold grid is empty");
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            if (!(thresholds[k] > 0.0) || !std::isfinite(thresholds[k]))
                throw std::invalid_argument("thresholds must be positive and finite");
            if (k > 0 && !(thresholds[k] > thresholds[k - 1]))
                throw std::invalid_argument("thresholds must be strictly increasing");
        }
        if (sim.paths < 1) throw std::invalid_argument("need at least one path");
        if (sim.horizon < 1) throw std::invalid_argument("horizon must be at least one step");
    }
};

/// One min-CuSum path evaluated for a whole increasing threshold grid. The
/// result for each b is the one run() would give on the same observations.
template <ObservationSource Source>
std::vector<DiagnosisResult> run_thresholds(const HypothesisSet& hs, std::span<const double> thresholds,
                                            Source&& source, std::size_t horizon, std::size_t change_point = 0) {
    std::vector<DiagnosisResult> out(thresholds.size());
    std::vector<double> x(hs.dimension());
    std::vector<double> llrs(hs.size());
    std::vector<double> scratch(hs.terms().size());
    CusumState state = initial_state(hs);
    std::size_t next = 0;
    for (std::size_t n = 1; n <= horizon && next < thresholds.size(); ++n) {
        source(std::span<double>(x));
        hs.llr_all(x, llrs, scratch);
        cusum_step(state, llrs);
        const std::size_t top = argmax_canonical(state.y);
        const double peak = state.y[top];
        while (next < thresholds.size() && peak >= thresholds[next]) {
            out[next].stop_time = n;
            out[next].decision = top;
            out[next].survived_change = n > change_point;
            ++next;
        }
    }
    for (; next < thresholds.size(); ++next) {
        out[next].stop_time = horizon;
        out[next].truncated = true;
        out[next].survived_change = horizon > change_point;
    }
    return out;
}

/// X_n ~ f for n <= nu, X_n ~ g_j for n > nu, run to the first crossing of b.
inline DiagnosisResult simulate_path(const HypothesisSet& hs, std::optional<std::size_t> j, std::size_t nu, double b,
                                     RandomStream& rng, std::size_t horizon, bool record_trace = false) {
    return run(hs, b, ChangeSource(hs, j, nu, rng), horizon, RunOptions{nu, record_trace});
}

/// Compact per-(path, threshold) outcome.
struct PathOutcome {
    std::uint32_t stop_time = 0;
    std::uint32_t decision = 0;
    bool truncated = false;
};

/// outcomes[p * thresholds + k].
struct PathTable {
    std::size_t paths = 0;
    std::size_t thresholds = 0;
    std::vector<PathOutcome> outcomes;

    const PathOutcome& at(std::size_t p, std::size_t k) const { return outcomes[p * thresholds + k]; }
};

inline PathTable simulate_paths(const HypothesisSet& hs, const ExperimentConfig& cfg) {
    cfg.validate(hs);
    PathTable table{cfg.sim.paths, cfg.thresholds.size(), {}};
    table.outcomes.resize(table.paths * table.thresholds);
    parallel_for(cfg.sim.paths, cfg.sim.workers, [&](std::size_t p) {
        RandomStream rng(derive_seed(cfg.sim.seed, cfg.sim.stream, p));
        const auto results = run_thresholds(hs, cfg.thresholds, ChangeSource(hs, cfg.true_hypothesis,
                                                                             cfg.change_point, rng),
                                            cfg.sim.horizon, cfg.change_point);
        for (std::size_t k = 0; k < results.size(); ++k) {
            auto& o = table.outcomes[p * table.thresholds + k];
            o.stop_time = static_cast<std::uint32_t>(results[k].stop_time);
            o.truncated = results[k].truncated;
            o.decision = results[k].truncated ? 0 : static_cast<std::uint32_t>(results[k].decision);
        }
    });
    return table;
}

/// Counts for one threshold.
struct DiagnosisTally {
    double threshold = 0.0;
    std::size_t nominal = 0;
    std::size_t stopped_before_change = 0;  // T <= nu (false alarms)
    std::size_t survivors = 0;              // nu < T <= horizon
    std::size_t truncated = 0;              // no crossing within the horizon
    std::vector<std::size_t> decisions;     // among survivors
};

inline std::vector<DiagnosisTally> tally(const HypothesisSet& hs, const ExperimentConfig& cfg,
                                         const PathTable& table) {
    std::vector<DiagnosisTally> out(table.thresholds);
    for (std::size_t k = 0; k < table.thresholds; ++k) {
        auto& t = out[k];
        t.threshold = cfg.thresholds[k];
        t.nominal = table.paths;
        t.decisions.assign(hs.size(), 0);
        for (std::size_t p = 0; p < table.paths; ++p) {
            const auto& o = table.at(p, k);
            if (o.truncated) {
                if (o.stop_time <= cfg.change_point)
                    ++t.stopped_before_change;  // horizon <= nu; cannot condition
                else
                    ++t.truncated;
            } else if (o.stop_time <= cfg.change_point) {
                ++t.stopped_before_change;
            } else {
                ++t.survivors;
                ++t.decisions[o.decision];
            }
        }
    }
    return out;
}

inline std::vector<DiagnosisTally> simulate_diagnosis(const HypothesisSet& hs, const ExperimentConfig& cfg) {
    return tally(hs, cfg, simulate_paths(hs, cfg));
}

/// P(D != j | sigma > nu) from a tally; survivors form the denominator and
/// horizon-truncated paths are reported in n_truncated.
inline Estimate misid_from_tally(const DiagnosisTally& t, std::size_t j) {
    Estimate e = proportion(t.survivors - t.decisions.at(j), t.survivors, t.nominal);
    e.n_truncated = t.truncated;
    return e;
}

/// P(D = k | sigma > nu) from a tally.
inline Estimate partial_from_tally(const DiagnosisTally& t, std::size_t k) {
    Estimate e = proportion(t.decisions.at(k), t.survivors, t.nominal);
    e.n_truncated = t.truncated;
    return e;
}

inline std::vector<Estimate> estimate_conditional_misid(const HypothesisSet& hs, const ExperimentConfig& cfg) {
    if (!cfg.true_hypothesis) throw std::invalid_argument("misidentification needs a true hypothesis");
    std::vector<Estimate> out;
    for (const auto& t : simulate_diagnosis(hs, cfg)) out.push_back(misid_from_tally(t, *cfg.true_hypothesis));
    return out;
}

inline std::vector<Estimate> estimate_partial_misid(const HypothesisSet& hs, const ExperimentConfig& cfg,
                                                    std::size_t k) {
    if (!cfg.true_hypothesis) throw std::invalid_argument("misidentification needs a true hypothesis");
    if (k == *cfg.true_hypothesis) throw std::invalid_argument("partial misidentification needs k != j");
    if (k >= hs.size()) throw std::invalid_argument("hypothesis index");
    std::vector<Estimate> out;
    for (const auto& t : simulate_diagnosis(hs, cfg)) out.push_back(partial_from_tally(t, k));
    return out;
}

namespace detail {

// Mean stopping time at one threshold; truncated paths contribute the horizon.
inline Estimate mean_stop_time(const HypothesisSet& hs, std::optional<std::size_t> j, double b,
                               const SimulationOptions& sim) {
    ExperimentConfig cfg{j, 0, {b}, sim};
    const PathTable table = simulate_paths(hs, cfg);
    std::vector<double> times(table.paths);
    std::size_t truncated = 0;
    for (std::size_t p = 0; p < table.paths; ++p) {
        times[p] = static_cast<double>(table.at(p, 0).stop_time);
        truncated += table.at(p, 0).truncated;
    }
    Estimate e = sample_mean(times, table.paths);
    e.n_truncated = truncated;
    e.lower_bound_only = truncated > 0;
    return e;
}

}  // namespace detail

/// E_inf[sigma(b)]. Flagged lower-bound-only when any path hits the horizon.
inline Estimate estimate_arl(const HypothesisSet& hs, double b, const SimulationOptions& sim) {
    return detail::mean_stop_time(hs, std::nullopt, b, sim);
}

/// E_j[sigma(b)] with the change at time zero.
inline Estimate estimate_delay(const HypothesisSet& hs, std::size_t j, double b, const SimulationOptions& sim) {
    if (j >= hs.size()) throw std::invalid_argument("hypothesis index");
    return detail::mean_stop_time(hs, j, b, sim);
}

/// L_ij(x; b) = E_j[sigma_i(b) | Y_i(0) = x] for the single statistic Y_i.
inline Estimate estimate_L(const HypothesisSet& hs, std::size_t i, std::size_t j, double x, double b,
                           const SimulationOptions& sim) {
    require_start(x, b);
    if (i >= hs.size() || j >= hs.size()) throw std::invalid_argument("hypothesis index");
    std::vector<double> times(sim.paths);
    std::vector<char> cut(sim.paths, 0);
    parallel_for(sim.paths, sim.workers, [&](std::size_t p) {
        RandomStream rng(derive_seed(sim.seed, sim.stream, p));
        double y = x;
        std::size_t n = 1;
        for (; n <= sim.horizon; ++n) {
            y = std::max(0.0, y + sample_llr(hs, i, j, rng));
            if (y >= b) break;
        }
        if (n > sim.horizon) {
            n = sim.horizon;
            cut[p] = 1;
        }
        times[p] = static_cast<double>(n);
    });
    Estimate e = sample_mean(times, sim.paths);
    for (char c : cut) e.n_truncated += static_cast<std::size_t>(c);
    e.lower_bound_only = e.n_truncated > 0;
    return e;
}

/// P_inf(Y_i(n) >= x) for the unstopped statistics, one row per hypothesis and
/// one column per x.
inline std::vector<std::vector<Estimate>> estimate_cusum_tail(const HypothesisSet& hs, std::size_t n,
                                                              std::span<const double> x_grid,
                                                              const SimulationOptions& sim) {
    std::vector<double> finals(sim.paths * hs.size());
    parallel_for(sim.paths, sim.workers, [&](std::size_t p) {
        RandomStream rng(derive_seed(sim.seed, sim.stream, p));
        std::vector<double> obs(hs.dimension());
        std::vector<double> llrs(hs.size());
        std::vector<double> scratch(hs.terms().size());
        CusumState state = initial_state(hs);
        for (std::size_t m = 0; m < n; ++m) {
            hs.sample(std::nullopt, rng, obs);
            hs.llr_all(obs, llrs, scratch);
            cusum_step(state, llrs);
        }
        std::copy(state.y.begin(), state.y.end(), finals.begin() + static_cast<std::ptrdiff_t>(p * hs.size()));
    });
    std::vector<std::vector<Estimate>> out(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        for (double x : x_grid) {
            std::size_t hits = 0;
            for (std::size_t p = 0; p < sim.paths; ++p) hits += finals[p * hs.size() + i] >= x;
            out[i].push_back(proportion(hits, sim.paths, sim.paths));
        }
    }
    return out;
}

/// Conditional tail P_inf(Y_i(nu) >= x | sigma(b) > nu) per hypothesis i.
struct TailConditionReport {
    std::size_t change_point = 0;
    double threshold = 0.0;
    std::vector<double> x_grid;
    std::size_t survivors = 0;
    std::vector<std::vector<Estimate>> tail;  // [i][x]

    bool defined() const noexcept { return survivors > 0; }
};

inline TailConditionReport verify_prechange_tail(const HypothesisSet& hs, std::size_t nu, double b,
                                              std::span<const double> x_grid, const SimulationOptions& sim) {
    if (nu < 1) throw std::invalid_argument("condition check needs nu >= 1");
    if (!(b > 0.0)) throw std::invalid_argument("threshold must be positive");
    std::vector<double> finals(sim.paths * hs.size());
    std::vector<char> alive(sim.paths, 0);
    parallel_for(sim.paths, sim.workers, [&](std::size_t p) {
        RandomStream rng(derive_seed(sim.seed, sim.stream, p));
        std::vector<double> obs(hs.dimension());
        std::vector<double> llrs(hs.size());
        std::vector<double> scratch(hs.terms().size());
        CusumState state = initial_state(hs);
        for (std::size_t m = 0; m < nu; ++m) {
            hs.sample(std::nullopt, rng, obs);
            hs.llr_all(obs, llrs, scratch);
            cusum_step(state, llrs);
            if (*std::max_element(state.y.begin(), state.y.end()) >= b) return;
        }
        alive[p] = 1;
        std::copy(state.y.begin(), state.y.end(), finals.begin() + static_cast<std::ptrdiff_t>(p * hs.size()));
    });
    TailConditionReport rep;
    rep.change_point = nu;
    rep.threshold = b;
    rep.x_grid.assign(x_grid.begin(), x_grid.end());
    for (char a : alive) rep.survivors += static_cast<std::size_t>(a);
    rep.tail.resize(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        for (double x : x_grid) {
            std::size_t hits = 0;
            for (std::size_t p = 0; p < sim.paths; ++p)
                if (alive[p] && finals[p * hs.size() + i] >= x) ++hits;
            rep.tail[i].push_back(proportion(hits, rep.survivors, sim.paths));
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration for small discrete scenarios
// ---------------------------------------------------------------------------

inline constexpr std::size_t kEnumerationLogLimit = 24;  // (2^d)^horizon <= 2^24

/// Exact probabilities under P_{nu,j} for a discrete scenario.
struct EnumerationResult {
    double stop_by_change = 0.0;    // P(sigma <= nu)
    double stop_after_change = 0.0; // P(nu < sigma <= horizon)
    double truncated = 0.0;         // P(sigma > horizon)
    std::vector<double> decision;   // P(D = k, nu < sigma <= horizon)
    std::optional<double> conditional_misid;             // P(D != j | nu < sigma <= horizon)
    std::vector<std::optional<double>> conditional_partial;  // P(D = k | nu < sigma <= horizon)
};

namespace detail {

// Neumaier-compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            carry += (sum - t) + v;
        else
            carry += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + carry; }
};

struct Enumerator {
    const HypothesisSet& hs;
    std::size_t j;
    std::size_t nu;
    double b;
    std::size_t horizon;
    std::vector<double> log_one_pre, log_zero_pre, log_one_post, log_zero_post;
    CompensatedSum before, after, cut;
    std::vector<CompensatedSum> by_decision;
    std::vector<double> x, llrs, scratch;

    void visit(std::size_t n, const std::vector<double>& y, double log_weight) {
        if (n > horizon) {
            cut.add(std::exp(log_weight));
            return;
        }
        const std::size_t d = hs.dimension();
        const bool post = n > nu;
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            double lw = log_weight;
            for (std::size_t c = 0; c < d; ++c) {
                const bool one = (mask >> c) & 1U;
                x[c] = one ? 1.0 : 0.0;
                lw += one ? (post ? log_one_post[c] : log_one_pre[c]) : (post ? log_zero_post[c] : log_zero_pre[c]);
            }
            hs.llr_all(x, llrs, scratch);
            std::vector<double> next(y.size());
            double peak = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) {
                next[i] = std::max(0.0, y[i] + llrs[i]);
                peak = std::max(peak, next[i]);
            }
            if (peak >= b) {
                const double w = std::exp(lw);
                if (n <= nu) {
                    before.add(w);
                } else {
                    after.add(w);
                    by_decision[argmax_canonical(next)].add(w);
                }
            } else {
                visit(n + 1, next, lw);
            }
        }
    }
};

}  // namespace detail

/// Walks every observation sequence of length <= horizon (stopping branches at
/// the first crossing) with its exact probability under P_{nu,j}.
inline EnumerationResult exact_enumeration(const HypothesisSet& hs, std::size_t j, std::size_t nu, double b,
                                           std::size_t horizon) {
    if (!hs.discrete()) throw std::invalid_argument("exact enumeration needs an all-Bernoulli scenario");
    if (j >= hs.size()) throw std::invalid_argument("hypothesis index");
    if (!(b > 0.0)) throw std::invalid_argument("threshold must be positive");
    if (horizon < 1) throw std::invalid_argument("horizon must be at least one step");
    if (hs.dimension() * horizon > kEnumerationLogLimit)
        throw SizeGuardExceeded("enumeration of (2^d)^horizon outcomes exceeds 2^24");

    detail::Enumerator en{hs, j, nu, b, horizon, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}};
    for (std::size_t c = 0; c < hs.dimension(); ++c) {
        const double p = hs.pre(c).success_probability();
        const double q = hs.law(j, c).success_probability();
        en.log_one_pre.push_back(std::log(p));
        en.log_zero_pre.push_back(std::log1p(-p));
        en.log_one_post.push_back(std::log(q));
        en.log_zero_post.push_back(std::log1p(-q));
    }
    en.by_decision.resize(hs.size());
    en.x.resize(hs.dimension());
    en.llrs.resize(hs.size());
    en.scratch.resize(hs.terms().size());
    en.visit(1, std::vector<double>(hs.size(), 0.0), 0.0);

    EnumerationResult r;
    r.stop_by_change = en.before.value();
    r.stop_after_change = en.after.value();
    r.truncated = en.cut.value();
    for (const auto& s : en.by_decision) r.decision.push_back(s.value());
    r.conditional_partial.resize(hs.size());
    if (r.stop_after_change > 0.0) {
        r.conditional_misid = (r.stop_after_change - r.decision[j]) / r.stop_after_change;
        for (std::size_t k = 0; k < hs.size(); ++k) r.conditional_partial[k] = r.decision[k] / r.stop_after_change;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Stochastic monotonicity of the one-step CuSum kernel
// ---------------------------------------------------------------------------

struct KernelDominance {
    double x = 0.0;        // smaller start
    double x_prime = 0.0;  // larger start
    double violation = 0.0;  // sup_y [F_{x'}(y) - F_x(y)]; <= 0 under dominance
    double band = 0.0;       // DKW allowance for the two empirical CDFs
    double zero_row = 0.0;   // min over both starts of P(Y(1) >= 0); must be 1
    bool holds = false;
};

/// DKW half-width at two-sided level alpha.
inline double dkw_epsilon(std::size_t n, double alpha = 0.0027) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

/// Empirical check that Y_i(1) | Y_i(0) = x' stochastically dominates
/// Y_i(1) | Y_i(0) = x under P_inf, with independent samples for the two starts.
inline std::vector<KernelDominance> monotone_kernel_check(const HypothesisSet& hs, std::size_t i,
                                                          std::span<const std::pair<double, double>> pairs,
                                                          std::size_t samples, std::uint64_t seed) {
    if (i >= hs.size()) throw std::invalid_argument("hypothesis index");
    std::vector<KernelDominance> out;
    std::uint64_t stream = 0;
    auto draw = [&](double start) {
        RandomStream rng(derive_seed(seed, 0x3030 + i, stream++));
        std::vector<double> y(samples);
        for (auto& v : y) v = std::max(0.0, start + sample_llr(hs, i, std::nullopt, rng));
        std::sort(y.begin(), y.end());
        return y;
    };
    for (auto [x, xp] : pairs) {
        if (!(x >= 0.0 && xp >= x)) throw std::invalid_argument("kernel pairs need 0 <= x <= x'");
        const auto lo = draw(x);
        const auto hi = draw(xp);
        // sweep the merged support; F(y) = fraction <= y
        double worst = -1.0;
        std::size_t a = 0, c = 0;
        const double n = static_cast<double>(samples);
        while (a < lo.size() || c < hi.size()) {
            const double y = c < hi.size() && (a >= lo.size() || hi[c] <= lo[a]) ? hi[c] : lo[a];
            while (a < lo.size() && lo[a] <= y) ++a;
            while (c < hi.size() && hi[c] <= y) ++c;
            worst = std::max(worst, static_cast<double>(c) / n - static_cast<double>(a) / n);
        }
        KernelDominance k;
        k.x = x;
        k.x_prime = xp;
        k.violation = worst;
        k.band = 2.0 * dkw_epsilon(samples);
        const auto nonneg = [](const std::vector<double>& v) {
            return static_cast<double>(std::count_if(v.begin(), v.end(), [](double u) { return u >= 0.0; })) /
                   static_cast<double>(v.size());
        };
        k.zero_row = std::min(nonneg(lo), nonneg(hi));
        k.holds = k.violation <= k.band && k.zero_row == 1.0;
        out.push_back(k);
    }
    return out;
}

}  // namespace mincusum
