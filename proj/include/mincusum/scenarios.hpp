#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mincusum/distributions.hpp"
#include "mincusum/random.hpp"

namespace mincusum {

inline constexpr std::size_t kMaxConcurrentChannels = 12;

/// Pre- and post-change density of one channel. Both KL numbers between them
/// must be positive and finite.
class ChannelSpec {
public:
    ChannelSpec(Distribution pre, Distribution post) : pre_(std::move(pre)), post_(std::move(post)) {
        if (!same_support(pre_, post_))
            throw std::invalid_argument("channel densities " + pre_.describe() + " and " + post_.describe() +
                                        " have different supports");
        const double forward = kl_divergence(post_, pre_);
        const double backward = kl_divergence(pre_, post_);
        if (!(forward > 0.0 && std::isfinite(forward) && backward > 0.0 && std::isfinite(backward)))
            throw std::invalid_argument("channel " + pre_.describe() + " -> " + post_.describe() +
                                        " needs positive finite KL divergences");
    }

    const Distribution& pre() const noexcept { return pre_; }
    const Distribution& post() const noexcept { return post_; }

private:
    Distribution pre_;
    Distribution post_;
};

/// d identical channels N(pre_mean,1) -> N(post_mean,1).
inline std::vector<ChannelSpec> gaussian_channels(std::size_t d, double pre_mean = 0.0, double post_mean = 1.0) {
    return std::vector<ChannelSpec>(d, ChannelSpec(Distribution::gaussian(pre_mean), Distribution::gaussian(post_mean)));
}

/// d identical channels Bernoulli(pre_p) -> Bernoulli(post_p).
inline std::vector<ChannelSpec> bernoulli_channels(std::size_t d, double pre_p, double post_p) {
    return std::vector<ChannelSpec>(d, ChannelSpec(Distribution::bernoulli(pre_p), Distribution::bernoulli(post_p)));
}

enum class ScenarioKind { single_fault, concurrent_fault, two_sided };

inline std::string_view to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::single_fault: return "single_fault";
        case ScenarioKind::concurrent_fault: return "concurrent_fault";
        case ScenarioKind::two_sided: return "two_sided";
    }
    return "?";
}

struct TwoSidedParameters {
    ExponentialFamily1D family;
    double gamma0;
    double gamma_down;
    double gamma_up;
};

/// log(post(x)/pre(x)) on one channel. Within an exponential family the base
/// density cancels, leaving an affine function of x; discrete channels use a
/// two-entry table so that the values are the exact log-density differences.
struct LlrTerm {
    std::size_t channel = 0;
    Distribution post;
    bool discrete = false;
    double slope = 0.0;
    double intercept = 0.0;
    double at_zero = 0.0;
    double at_one = 0.0;

    LlrTerm(std::size_t ch, const Distribution& pre, Distribution q) : channel(ch), post(std::move(q)) {
        discrete = pre.discrete();
        if (discrete) {
            at_zero = post.log_density(0.0) - pre.log_density(0.0);
            at_one = post.log_density(1.0) - pre.log_density(1.0);
        } else if (pre.family().base() == BaseFamily::gaussian) {
            const double a = pre.mean();
            const double c = post.mean();
            slope = c - a;
            intercept = 0.5 * (a - c) * (a + c);
        } else {
            const auto& fam = pre.family();
            slope = post.natural_parameter() - pre.natural_parameter();
            intercept = -(fam.cumulant(post.natural_parameter()) - fam.cumulant(pre.natural_parameter()));
        }
    }

    double operator()(double x) const noexcept {
        if (discrete) return x == 1.0 ? at_one : at_zero;
        return slope * x + intercept;
    }
};

/// Pre-change density f (a product over channels) plus the indexed
/// alternatives g_i, each of which replaces the density of some channels.
/// Hypotheses are kept in canonical order: integers ascending, subsets by size
/// then lexicographically, two-sided as [down, up].
class HypothesisSet {
public:
    ScenarioKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t dimension() const noexcept { return pre_.size(); }

    const std::string& label(std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    std::optional<std::size_t> find(std::string_view label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == label) return i;
        return std::nullopt;
    }

    const Distribution& pre(std::size_t channel) const { return pre_.at(channel); }

    /// Density of `channel` under g_i.
    const Distribution& law(std::size_t i, std::size_t channel) const {
        const int t = term_of(i, channel);
        return t < 0 ? pre_[channel] : terms_[static_cast<std::size_t>(t)].post;
    }

    /// Density of `channel` under g_j, or under f when `j` is empty.
    const Distribution& law(std::optional<std::size_t> j, std::size_t channel) const {
        return j ? law(*j, channel) : pre_.at(channel);
    }

    bool alters(std::size_t i, std::size_t channel) const { return term_of(i, channel) >= 0; }

    /// Channels whose density g_i changes.
    std::vector<std::size_t> touched(std::size_t i) const {
        std::vector<std::size_t> out;
        for (std::size_t t : hyp_terms_.at(i)) out.push_back(terms_[t].channel);
        return out;
    }

    const std::vector<LlrTerm>& terms() const noexcept { return terms_; }
    const std::vector<std::size_t>& terms_of(std::size_t i) const { return hyp_terms_.at(i); }

    bool discrete() const noexcept {
        return std::all_of(pre_.begin(), pre_.end(), [](const Distribution& d) { return d.discrete(); });
    }

    const std::optional<TwoSidedParameters>& two_sided() const noexcept { return two_sided_; }

    void require_observation(std::span<const double> x) const {
        if (x.size() != dimension())
            throw std::invalid_argument("observation has " + std::to_string(x.size()) + " coordinates, expected " +
                                        std::to_string(dimension()));
        for (std::size_t c = 0; c < x.size(); ++c) pre_[c].family().require_support(x[c]);
    }

    /// l_i(x) = log(g_i(x)/f(x)), touching only the coordinates g_i changes.
    double llr(std::size_t i, std::span<const double> x) const {
        require_observation(x);
        double s = 0.0;
        for (std::size_t t : hyp_terms_.at(i)) s += terms_[t](x[terms_[t].channel]);
        return s;
    }

    /// All l_i(x) at once. `scratch` must hold terms().size() values.
    void llr_all(std::span<const double> x, std::span<double> out, std::span<double> scratch) const noexcept {
        for (std::size_t t = 0; t < terms_.size(); ++t) scratch[t] = terms_[t](x[terms_[t].channel]);
        for (std::size_t i = 0; i < hyp_terms_.size(); ++i) {
            double s = 0.0;
            for (std::size_t t : hyp_terms_[i]) s += scratch[t];
            out[i] = s;
        }
    }

    void llr_all(std::span<const double> x, std::span<double> out) const {
        std::vector<double> scratch(terms_.size());
        llr_all(x, out, scratch);
    }

    /// Joint log-density log g_j(x), or log f(x) when `j` is empty.
    double joint_log_density(std::optional<std::size_t> j, std::span<const double> x) const {
        require_observation(x);
        double s = 0.0;
        for (std::size_t c = 0; c < dimension(); ++c) s += law(j, c).log_density(x[c]);
        return s;
    }

    /// One observation from g_j (or f when `j` is empty), channels in order.
    void sample(std::optional<std::size_t> j, RandomStream& rng, std::span<double> out) const {
        for (std::size_t c = 0; c < dimension(); ++c) out[c] = law(j, c).sample(rng);
    }

    friend HypothesisSet build_single_fault(const std::vector<ChannelSpec>& channels);
    friend HypothesisSet build_concurrent_fault(const std::vector<ChannelSpec>& channels);
    friend HypothesisSet build_two_sided(const ExponentialFamily1D& family, double gamma0, double gamma1,
                                         double gamma2);

private:
    HypothesisSet() = default;

    int term_of(std::size_t i, std::size_t channel) const {
        if (i >= size() || channel >= dimension()) throw std::out_of_range("hypothesis or channel index");
        return alteration_[i * dimension() + channel];
    }

    void finish() {
        alteration_.assign(size() * dimension(), -1);
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t t : hyp_terms_[i]) alteration_[i * dimension() + terms_[t].channel] = static_cast<int>(t);
    }

    ScenarioKind kind_ = ScenarioKind::single_fault;
    std::vector<Distribution> pre_;
    std::vector<LlrTerm> terms_;
    std::vector<std::vector<std::size_t>> hyp_terms_;
    std::vector<std::string> labels_;
    std::vector<int> alteration_;
    std::optional<TwoSidedParameters> two_sided_;
};

/// One hypothesis per channel: g_i switches channel i to q_i.
inline HypothesisSet build_single_fault(const std::vector<ChannelSpec>& channels) {
    if (channels.size() < 2) throw std::invalid_argument("single-fault diagnosis needs at least two channels");
    HypothesisSet hs;
    hs.kind_ = ScenarioKind::single_fault;
    for (std::size_t c = 0; c < channels.size(); ++c) {
        hs.pre_.push_back(channels[c].pre());
        hs.terms_.emplace_back(c, channels[c].pre(), channels[c].post());
        hs.hyp_terms_.push_back({c});
        hs.labels_.push_back(std::to_string(c + 1));
    }
    hs.finish();
    return hs;
}

inline std::string subset_label(std::span<const std::size_t> members) {
    std::string s = "{";
    for (std::size_t k = 0; k < members.size(); ++k) {
        if (k) s += ',';
        s += std::to_string(members[k] + 1);
    }
    return s + "}";
}

/// One hypothesis per non-empty channel subset, ordered by size then
/// lexicographically.
inline HypothesisSet build_concurrent_fault(const std::vector<ChannelSpec>& channels) {
    const std::size_t d = channels.size();
    if (d < 1) throw std::invalid_argument("concurrent-fault diagnosis needs at least one channel");
    if (d > kMaxConcurrentChannels)
        throw std::invalid_argument("concurrent-fault diagnosis supports at most 12 channels (2^d - 1 hypotheses)");
    HypothesisSet hs;
    hs.kind_ = ScenarioKind::concurrent_fault;
    for (std::size_t c = 0; c < d; ++c) {
        hs.pre_.push_back(channels[c].pre());
        hs.terms_.emplace_back(c, channels[c].pre(), channels[c].post());
    }
    for (std::size_t k = 1; k <= d; ++k) {
        // lexicographic k-combinations of {0..d-1}
        std::vector<std::size_t> comb(k);
        for (std::size_t m = 0; m < k; ++m) comb[m] = m;
        while (true) {
            hs.hyp_terms_.push_back(comb);
            hs.labels_.push_back(subset_label(comb));
            std::size_t pos = k;
            while (pos > 0 && comb[pos - 1] == d - k + pos - 1) --pos;
            if (pos == 0) break;
            ++comb[pos - 1];
            for (std::size_t m = pos; m < k; ++m) comb[m] = comb[m - 1] + 1;
        }
    }
    hs.finish();
    return hs;
}

/// f = h_{gamma0}, alternatives h_{gamma1}, h_{gamma2} on opposite sides of gamma0.
inline HypothesisSet build_two_sided(const ExponentialFamily1D& family, double gamma0, double gamma1, double gamma2) {
    for (double g : {gamma0, gamma1, gamma2}) family.require_domain(g);
    const bool bracket = (gamma1 < gamma0 && gamma0 < gamma2) || (gamma2 < gamma0 && gamma0 < gamma1);
    if (!bracket) throw std::invalid_argument("two-sided alternatives must lie strictly on both sides of gamma0");
    const double down = std::min(gamma1, gamma2);
    const double up = std::max(gamma1, gamma2);

    HypothesisSet hs;
    hs.kind_ = ScenarioKind::two_sided;
    const Distribution pre = tilt(family, gamma0);
    hs.pre_.push_back(pre);
    hs.terms_.emplace_back(0, pre, tilt(family, down));
    hs.terms_.emplace_back(0, pre, tilt(family, up));
    hs.hyp_terms_ = {{0}, {1}};
    hs.labels_ = {"down", "up"};
    hs.two_sided_ = TwoSidedParameters{family, gamma0, down, up};
    hs.finish();
    return hs;
}

/// I_i = KL(g_i || f) and I_ij = KL(g_i || g_j) in nats.
class KLMatrix {
public:
    KLMatrix() = default;
    explicit KLMatrix(std::size_t k) : k_(k), detection_(k, 0.0), pairwise_(k * k, 0.0) {}

    std::size_t size() const noexcept { return k_; }
    double I(std::size_t i) const { return detection_.at(i); }
    double I(std::size_t i, std::size_t j) const { return pairwise_.at(i * k_ + j); }

    double& detection(std::size_t i) { return detection_.at(i); }
    double& pairwise(std::size_t i, std::size_t j) { return pairwise_.at(i * k_ + j); }

private:
    std::size_t k_ = 0;
    std::vector<double> detection_;
    std::vector<double> pairwise_;
};

/// Channels are independent, so every divergence is a sum of per-channel KL
/// numbers over the channels where the two joint densities differ.
inline KLMatrix kl_matrix(const HypothesisSet& hs) {
    const std::size_t k = hs.size();
    KLMatrix m(k);
    for (std::size_t i = 0; i < k; ++i) {
        double s = 0.0;
        for (std::size_t t : hs.terms_of(i)) {
            const auto& term = hs.terms()[t];
            s += kl_divergence(term.post, hs.pre(term.channel));
        }
        m.detection(i) = s;
    }
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            double s = 0.0;
            for (std::size_t c = 0; c < hs.dimension(); ++c) {
                if (!hs.alters(i, c) && !hs.alters(j, c)) continue;
                const Distribution& a = hs.law(i, c);
                const Distribution& b = hs.law(j, c);
                if (a == b) continue;
                s += kl_divergence(a, b);
            }
            m.pairwise(i, j) = s;
        }
    }
    return m;
}

}  // namespace mincusum
