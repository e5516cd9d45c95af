#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mincusum/scenarios.hpp"

namespace mincusum {

/// Anything that can evaluate all per-hypothesis log-likelihood ratios of one
/// observation.
template <class M>
concept LlrModel = requires(const M& m, std::span<const double> x, std::span<double> out, std::span<double> scratch) {
    { m.size() } -> std::convertible_to<std::size_t>;
    { m.dimension() } -> std::convertible_to<std::size_t>;
    { m.terms().size() } -> std::convertible_to<std::size_t>;
    m.llr_all(x, out, scratch);
};

/// Writes the next observation into its argument.
template <class S>
concept ObservationSource = std::invocable<S&, std::span<double>>;

struct CusumState {
    std::size_t n = 0;
    std::vector<double> y;  // nats, one per hypothesis
};

inline CusumState initial_state(const HypothesisSet& hs) { return CusumState{0, std::vector<double>(hs.size(), 0.0)}; }

/// Y_i(n) = (Y_i(n-1) + l_i(n))^+ for precomputed l.
inline void cusum_step(CusumState& state, std::span<const double> llrs) noexcept {
    for (std::size_t i = 0; i < state.y.size(); ++i) state.y[i] = std::max(0.0, state.y[i] + llrs[i]);
    ++state.n;
}

inline CusumState update(CusumState state, std::span<const double> x, const HypothesisSet& hs) {
    hs.require_observation(x);
    if (state.y.size() != hs.size()) throw std::invalid_argument("state does not match hypothesis set");
    std::vector<double> llrs(hs.size());
    hs.llr_all(x, llrs);
    cusum_step(state, llrs);
    return state;
}

/// Y_i(n) = max over 0 <= m <= n of sum_{u=m+1}^{n} l_i(u), taken literally:
/// every partial sum is formed left to right from its own start m. Reference
/// for the recursion.
inline std::vector<double> cusum_direct(std::span<const std::vector<double>> path, const HypothesisSet& hs,
                                        std::size_t i) {
    if (path.empty()) throw std::invalid_argument("cusum_direct needs a non-empty path");
    std::vector<double> l;
    l.reserve(path.size());
    for (const auto& x : path) l.push_back(hs.llr(i, x));
    std::vector<double> out(path.size(), 0.0);  // m = n, empty sum
    for (std::size_t m = 0; m < path.size(); ++m) {
        double s = 0.0;
        for (std::size_t n = m; n < path.size(); ++n) {
            s += l[n];
            out[n] = std::max(out[n], s);
        }
    }
    return out;
}

struct DiagnosisResult {
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    std::size_t stop_time = 0;       // T >= 1, or the horizon when truncated
    std::size_t decision = npos;     // argmax of Y at T; npos when truncated
    bool survived_change = true;     // T > nu
    bool truncated = false;          // horizon reached without a crossing
    std::vector<std::vector<double>> trace;  // Y(1..T) when requested
};

/// Smallest index attaining the maximum.
inline std::size_t argmax_canonical(std::span<const double> y) noexcept {
    std::size_t best = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[best]) best = i;
    return best;
}

struct RunOptions {
    std::size_t change_point = 0;  // only used to fill survived_change
    bool record_trace = false;
};

/// Stateful min-CuSum detector: parallel CuSum statistics, stop at the first
/// n with max_i Y_i(n) >= b, decide argmax_i Y_i(n).
template <LlrModel Model = HypothesisSet>
class MinCusum {
public:
    MinCusum(const Model& model, double threshold)
        : model_(model),
          threshold_(threshold),
          state_{0, std::vector<double>(model.size(), 0.0)},
          llrs_(model.size()),
          scratch_(model.terms().size()) {
        if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
    }

    /// Start hypothesis `i` from y0 in [0, b]; the others start at zero.
    void initialize(std::size_t i, double y0) {
        if (i >= state_.y.size()) throw std::out_of_range("hypothesis index");
        if (!(y0 >= 0.0 && y0 <= threshold_)) throw std::invalid_argument("initial statistic must lie in [0, b]");
        state_.y[i] = y0;
    }

    /// Consumes one observation; true once some statistic reaches b.
    bool step(std::span<const double> x) {
        model_.llr_all(x, llrs_, scratch_);
        cusum_step(state_, llrs_);
        return crossed();
    }

    bool crossed() const noexcept {
        return state_.n > 0 && *std::max_element(state_.y.begin(), state_.y.end()) >= threshold_;
    }

    std::size_t decision() const noexcept { return argmax_canonical(state_.y); }
    const CusumState& state() const noexcept { return state_; }
    double threshold() const noexcept { return threshold_; }

private:
    const Model& model_;
    double threshold_;
    CusumState state_;
    std::vector<double> llrs_;
    std::vector<double> scratch_;
};

namespace detail {

template <LlrModel Model, ObservationSource Source>
DiagnosisResult run_from(MinCusum<Model>& engine, std::size_t dimension, Source& source, std::size_t horizon,
                         const RunOptions& opts) {
    if (horizon < 1) throw std::invalid_argument("horizon must be at least one step");
    std::vector<double> x(dimension);
    DiagnosisResult r;
    for (std::size_t n = 1; n <= horizon; ++n) {
        source(std::span<double>(x));
        const bool stop = engine.step(x);
        if (opts.record_trace) r.trace.push_back(engine.state().y);
        if (stop) {
            r.stop_time = n;
            r.decision = engine.decision();
            r.survived_change = n > opts.change_point;
            return r;
        }
    }
    r.stop_time = horizon;
    r.truncated = true;
    r.survived_change = horizon > opts.change_point;
    return r;
}

}  // namespace detail

/// Runs the min-CuSum with threshold b (nats) on `source` for at most `horizon`
/// steps. Reaching the horizon is reported through `truncated`.
template <LlrModel Model, ObservationSource Source>
DiagnosisResult run(const Model& model, double b, Source&& source, std::size_t horizon, const RunOptions& opts = {}) {
    MinCusum<Model> engine(model, b);
    return detail::run_from(engine, model.dimension(), source, horizon, opts);
}

/// As run(), with Y_i(0) = y0 for hypothesis i.
template <LlrModel Model, ObservationSource Source>
DiagnosisResult run_initialized(const Model& model, double b, Source&& source, std::size_t i, double y0,
                                std::size_t horizon, const RunOptions& opts = {}) {
    MinCusum<Model> engine(model, b);
    engine.initialize(i, y0);
    return detail::run_from(engine, model.dimension(), source, horizon, opts);
}

/// Replays a recorded path; reading past its end is an error.
class PathSource {
public:
    explicit PathSource(std::span<const std::vector<double>> path) : path_(path) {}

    void operator()(std::span<double> out) {
        if (next_ >= path_.size()) throw std::out_of_range("observation path exhausted");
        std::copy(path_[next_].begin(), path_[next_].end(), out.begin());
        ++next_;
    }

    std::size_t consumed() const noexcept { return next_; }

private:
    std::span<const std::vector<double>> path_;
    std::size_t next_ = 0;
};

/// Draws X_n from f for n <= nu and from g_j afterwards (f forever when j is empty).
class ChangeSource {
public:
    ChangeSource(const HypothesisSet& hs, std::optional<std::size_t> j, std::size_t nu, RandomStream& rng)
        : hs_(hs), j_(j), nu_(nu), rng_(rng) {}

    void operator()(std::span<double> out) {
        ++n_;
        hs_.sample(n_ <= nu_ ? std::nullopt : j_, rng_, out);
    }

private:
    const HypothesisSet& hs_;
    std::optional<std::size_t> j_;
    std::size_t nu_;
    RandomStream& rng_;
    std::size_t n_ = 0;
};

}  // namespace mincusum
