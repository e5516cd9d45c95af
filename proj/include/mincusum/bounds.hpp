#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mincusum/distributions.hpp"
#include "mincusum/error.hpp"
#include "mincusum/estimate.hpp"
#include "mincusum/random.hpp"
#include "mincusum/scenarios.hpp"

namespace mincusum {

inline constexpr double kEqualKlTolerance = 1e-9;
inline constexpr double kRootLowerBracket = 1e-6;
inline constexpr double kRootSearchLimit = 64.0;
inline constexpr double kRootTolerance = 1e-10;
inline constexpr int kRootMaxIterations = 200;

// ---------------------------------------------------------------------------
// Calibration and first-order approximations
// ---------------------------------------------------------------------------

/// Threshold guaranteeing E_inf[sigma(b)] >= 1/alpha: |log alpha| + log k.
inline double b_alpha(double alpha, std::size_t k) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (k < 1) throw std::invalid_argument("need at least one hypothesis");
    return std::abs(std::log(alpha)) + std::log(static_cast<double>(k));
}

/// E_inf[sigma(b)] >= e^b / k.
inline double arl_lower_bound(double b, std::size_t k) {
    if (!(b >= 0.0)) throw std::invalid_argument("threshold must be non-negative");
    if (k < 1) throw std::invalid_argument("need at least one hypothesis");
    return std::exp(b) / static_cast<double>(k);
}

/// J_i ~ |log alpha| / I_i.
inline double delay_approximation(double alpha, double kl) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (!(kl > 0.0)) throw std::invalid_argument("KL number must be positive");
    return std::abs(std::log(alpha)) / kl;
}

/// E_j[sigma_j(b)] <= b / I_j + B_j.
inline double delay_upper_bound(double b, double kl, double excess) {
    if (!(kl > 0.0)) throw std::invalid_argument("KL number must be positive");
    return b / kl + excess;
}

// ---------------------------------------------------------------------------
// Cumulant generating function psi_ij(theta) = log E_j[exp(theta l_i(1))]
// ---------------------------------------------------------------------------

/// psi_ij(theta), +inf where the moment generating function diverges.
/// Each channel g_i alters contributes phi(g + theta*dg) - phi(g) - theta*dphi,
/// where g is the channel's natural parameter under g_j.
inline double psi_or_infinity(const HypothesisSet& hs, std::size_t i, std::size_t j, double theta) {
    double s = 0.0;
    for (std::size_t t : hs.terms_of(i)) {
        const LlrTerm& term = hs.terms()[t];
        const Distribution& pre = hs.pre(term.channel);
        const auto& fam = pre.family();
        const double g = hs.law(j, term.channel).natural_parameter();
        const double dg = term.post.natural_parameter() - pre.natural_parameter();
        const double dphi = fam.cumulant(term.post.natural_parameter()) - fam.cumulant(pre.natural_parameter());
        const double shifted = fam.cumulant(g + theta * dg);
        if (!std::isfinite(shifted)) return std::numeric_limits<double>::infinity();
        s += shifted - fam.cumulant(g) - theta * dphi;
    }
    return s;
}

inline double psi(const HypothesisSet& hs, std::size_t i, std::size_t j, double theta) {
    if (i == j) throw std::invalid_argument("psi needs distinct hypotheses");
    const double v = psi_or_infinity(hs, i, j, theta);
    if (!std::isfinite(v)) throw std::domain_error("psi is infinite at theta = " + std::to_string(theta));
    return v;
}

/// psi_ij'(theta), analytic.
inline double psi_derivative(const HypothesisSet& hs, std::size_t i, std::size_t j, double theta) {
    double s = 0.0;
    for (std::size_t t : hs.terms_of(i)) {
        const LlrTerm& term = hs.terms()[t];
        const Distribution& pre = hs.pre(term.channel);
        const auto& fam = pre.family();
        const double g = hs.law(j, term.channel).natural_parameter();
        const double dg = term.post.natural_parameter() - pre.natural_parameter();
        const double dphi = fam.cumulant(term.post.natural_parameter()) - fam.cumulant(pre.natural_parameter());
        s += dg * fam.cumulant_derivative(g + theta * dg) - dphi;
    }
    return s;
}

/// Sample l_i(1) under g_j, drawing only the channels g_i alters.
inline double sample_llr(const HypothesisSet& hs, std::size_t i, std::optional<std::size_t> j, RandomStream& rng) {
    double s = 0.0;
    for (std::size_t t : hs.terms_of(i)) {
        const LlrTerm& term = hs.terms()[t];
        s += term(hs.law(j, term.channel).sample(rng));
    }
    return s;
}

/// Monte Carlo psi_ij(theta); SE by the delta method.
inline Estimate psi_monte_carlo(const HypothesisSet& hs, std::size_t i, std::size_t j, double theta,
                                RandomStream& rng, std::size_t samples = 100'000) {
    std::vector<double> w(samples);
    for (auto& v : w) v = std::exp(theta * sample_llr(hs, i, j, rng));
    Estimate m = sample_mean(w, samples);
    Estimate e = m;
    e.value = std::log(m.value);
    e.se = m.se / m.value;
    return e;
}

/// E_j[l_i(1)^2] from the per-channel means and variances.
inline double llr_second_moment(const HypothesisSet& hs, std::size_t i, std::optional<std::size_t> j) {
    double mean = 0.0;
    double var = 0.0;
    for (std::size_t t : hs.terms_of(i)) {
        const LlrTerm& term = hs.terms()[t];
        const Distribution& pre = hs.pre(term.channel);
        const Distribution& x = hs.law(j, term.channel);
        const double dg = term.post.natural_parameter() - pre.natural_parameter();
        const auto& fam = pre.family();
        const double dphi = fam.cumulant(term.post.natural_parameter()) - fam.cumulant(pre.natural_parameter());
        mean += dg * x.mean() - dphi;
        var += dg * dg * x.variance();
    }
    return var + mean * mean;
}

// ---------------------------------------------------------------------------
// Positive root r_ij
// ---------------------------------------------------------------------------

enum class RootMethod { analytic, bisection };

inline std::string_view to_string(RootMethod m) { return m == RootMethod::analytic ? "analytic" : "bisection"; }

struct CumulantRoot {
    std::size_t i = 0;
    std::size_t j = 0;
    double value = 0.0;
    RootMethod method = RootMethod::analytic;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

/// Bisection on [1e-6, theta_max], theta_max doubling from 2 up to 64.
inline CumulantRoot find_root_bisection(const HypothesisSet& hs, std::size_t i, std::size_t j) {
    if (i == j) throw std::invalid_argument("root needs distinct hypotheses");
    double lo = kRootLowerBracket;
    if (!(psi_or_infinity(hs, i, j, lo) < 0.0))
        throw RootNotFound("psi_" + hs.label(i) + "," + hs.label(j) + " is not negative near zero (I_j >= I_ji)");
    double hi = 2.0;
    while (!(psi_or_infinity(hs, i, j, hi) > 0.0)) {
        if (hi >= kRootSearchLimit)
            throw RootNotFound("psi_" + hs.label(i) + "," + hs.label(j) + " has no sign change below theta = 64");
        lo = hi;
        hi *= 2.0;
    }
    CumulantRoot r{i, j, 0.0, RootMethod::bisection, lo, hi};
    for (int it = 0; it < kRootMaxIterations && hi - lo > kRootTolerance; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (psi_or_infinity(hs, i, j, mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    r.value = 0.5 * (lo + hi);
    return r;
}

/// Positive root of psi_ij. Closed forms where they exist: r = 1 when every
/// channel g_i alters keeps its pre-change density under g_j (E_j[exp l_i] = 1),
/// and r = 1 + 2|d_j/d_i| for the Gaussian two-sided problem (d = gamma - gamma0).
inline CumulantRoot find_root(const HypothesisSet& hs, std::size_t i, std::size_t j) {
    if (i == j) throw std::invalid_argument("root needs distinct hypotheses");
    const KLMatrix kl = kl_matrix(hs);
    if (!(kl.I(j) < kl.I(j, i) - kEqualKlTolerance))
        throw RootNotFound("no positive root expected: I_" + hs.label(j) + " >= I_" + hs.label(j) + "," +
                           hs.label(i));
    bool untouched = true;
    for (std::size_t c : hs.touched(i))
        if (hs.alters(j, c)) untouched = false;
    if (untouched) return CumulantRoot{i, j, 1.0, RootMethod::analytic, 1.0, 1.0};
    if (const auto& ts = hs.two_sided(); ts && ts->family.base() == BaseFamily::gaussian) {
        const double gi = i == 0 ? ts->gamma_down : ts->gamma_up;
        const double gj = j == 0 ? ts->gamma_down : ts->gamma_up;
        const double v = 1.0 + 2.0 * std::abs((gj - ts->gamma0) / (gi - ts->gamma0));
        return CumulantRoot{i, j, v, RootMethod::analytic, v, v};
    }
    return find_root_bisection(hs, i, j);
}

// ---------------------------------------------------------------------------
// Overshoot constants
// ---------------------------------------------------------------------------

/// Finite law of l_i(1): sorted distinct values with probabilities.
struct DiscreteLaw {
    std::vector<double> values;
    std::vector<double> probs;
};

/// Exact law of l_i(1) under g_j (f when j is empty), if every channel g_i
/// alters is discrete.
inline std::optional<DiscreteLaw> llr_law(const HypothesisSet& hs, std::size_t i, std::optional<std::size_t> j) {
    const auto& ts = hs.terms_of(i);
    for (std::size_t t : ts)
        if (!hs.terms()[t].discrete) return std::nullopt;
    std::map<double, double> acc;
    const std::size_t combos = std::size_t{1} << ts.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
        double v = 0.0;
        double p = 1.0;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            const LlrTerm& term = hs.terms()[ts[k]];
            const double q = hs.law(j, term.channel).success_probability();
            const bool one = (mask >> k) & 1U;
            v += one ? term.at_one : term.at_zero;
            p *= one ? q : 1.0 - q;
        }
        acc[v] += p;
    }
    DiscreteLaw law;
    for (auto [v, p] : acc) {
        law.values.push_back(v);
        law.probs.push_back(p);
    }
    return law;
}

struct ConstantOptions {
    std::uint64_t seed = 0x6c6f7264656eULL;
    std::size_t excess_samples = 1'000'000;
    std::size_t grid_points = 64;
    std::size_t samples_per_point = 100'000;
    double t_span = 10.0;
    std::size_t min_exceedances = 100;
};

inline Estimate exact_estimate(double v) {
    Estimate e;
    e.value = v;
    e.se = 0.0;
    e.n_effective = e.n_nominal = 1;
    return e;
}

/// B_j = E_j[((l_j)^+)^2] / I_j^2, Lorden's bound on the excess over a boundary.
inline Estimate excess_bound(const HypothesisSet& hs, std::size_t j, const ConstantOptions& opts = {}) {
    const double kl = kl_matrix(hs).I(j);
    if (auto law = llr_law(hs, j, j)) {
        double s = 0.0;
        for (std::size_t k = 0; k < law->values.size(); ++k) {
            const double pos = std::max(0.0, law->values[k]);
            s += law->probs[k] * pos * pos;
        }
        return exact_estimate(s / (kl * kl));
    }
    RandomStream rng(derive_seed(opts.seed, 0xb0 + j, 0));
    std::vector<double> v(opts.excess_samples);
    for (auto& x : v) {
        const double pos = std::max(0.0, sample_llr(hs, j, j, rng));
        x = pos * pos / (kl * kl);
    }
    return sample_mean(v, opts.excess_samples);
}

/// omega_ij = sup_{t>=0} E_j[l_i - t | l_i >= t].
inline Estimate overshoot_bound(const HypothesisSet& hs, std::size_t i, std::size_t j,
                                const ConstantOptions& opts = {}) {
    if (auto law = llr_law(hs, i, j)) {
        // On (s_{k-1}, s_k] the conditioning set is {l >= s_k}; the supremum
        // sits at the left end of each such interval.
        const auto& v = law->values;
        const auto& p = law->probs;
        double best = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k] < 0.0) continue;
            double mass = 0.0;
            double first = 0.0;
            for (std::size_t m = k; m < v.size(); ++m) {
                mass += p[m];
                first += p[m] * v[m];
            }
            const double left = k == 0 ? 0.0 : std::max(0.0, v[k - 1]);
            best = std::max(best, first / mass - left);
        }
        return exact_estimate(best);
    }
    Estimate best;
    best.value = 0.0;
    best.se = 0.0;
    for (std::size_t m = 0; m < opts.grid_points; ++m) {
        const double t = opts.grid_points > 1 ? opts.t_span * static_cast<double>(m) /
                                                    static_cast<double>(opts.grid_points - 1)
                                              : 0.0;
        RandomStream rng(derive_seed(opts.seed, 0x0e000 + i * 4096 + j, m));
        std::vector<double> excess;
        for (std::size_t s = 0; s < opts.samples_per_point; ++s) {
            const double l = sample_llr(hs, i, j, rng);
            if (l >= t) excess.push_back(l - t);
        }
        if (excess.size() < opts.min_exceedances) continue;
        Estimate e = sample_mean(excess, opts.samples_per_point);
        if (e.value > best.value) best = e;
    }
    return best;
}

/// omega~_ij = -inf_{t<=0} E_j[l_i - t | l_i <= t].
inline Estimate undershoot_bound(const HypothesisSet& hs, std::size_t i, std::size_t j,
                                 const ConstantOptions& opts = {}) {
    if (auto law = llr_law(hs, i, j)) {
        // On [s_k, s_{k+1}) the set is {l <= s_k}; supremum at the right end.
        const auto& v = law->values;
        const auto& p = law->probs;
        double best = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (v[k] > 0.0) break;
            double mass = 0.0;
            double first = 0.0;
            for (std::size_t m = 0; m <= k; ++m) {
                mass += p[m];
                first += p[m] * v[m];
            }
            const double right = k + 1 < v.size() ? std::min(0.0, v[k + 1]) : 0.0;
            best = std::max(best, right - first / mass);
        }
        return exact_estimate(best);
    }
    Estimate best;
    best.value = 0.0;
    best.se = 0.0;
    for (std::size_t m = 0; m < opts.grid_points; ++m) {
        const double t = opts.grid_points > 1 ? -opts.t_span * static_cast<double>(m) /
                                                    static_cast<double>(opts.grid_points - 1)
                                              : 0.0;
        RandomStream rng(derive_seed(opts.seed, 0x0f000 + i * 4096 + j, m));
        std::vector<double> deficit;
        for (std::size_t s = 0; s < opts.samples_per_point; ++s) {
            const double l = sample_llr(hs, i, j, rng);
            if (l <= t) deficit.push_back(t - l);
        }
        if (deficit.size() < opts.min_exceedances) continue;
        Estimate e = sample_mean(deficit, opts.samples_per_point);
        if (e.value > best.value) best = e;
    }
    return best;
}

struct LordenConstants {
    Estimate excess;       // B_j
    Estimate overshoot;    // omega_ij
    Estimate undershoot;   // omega~_ij
    double second_moment;  // E_j[l_i(1)^2]
};

inline LordenConstants lorden_constants(const HypothesisSet& hs, std::size_t i, std::size_t j,
                                        const ConstantOptions& opts = {}) {
    return LordenConstants{excess_bound(hs, j, opts), overshoot_bound(hs, i, j, opts),
                           undershoot_bound(hs, i, j, opts), llr_second_moment(hs, i, j)};
}

// ---------------------------------------------------------------------------
// Misidentification bounds (first-order terms; the vanishing correction is 0)
// ---------------------------------------------------------------------------

enum class BoundCase { exponential, exponential_linear, equal_kl, unavailable };

inline std::string_view to_string(BoundCase c) {
    switch (c) {
        case BoundCase::exponential: return "r>1";
        case BoundCase::exponential_linear: return "r<=1";
        case BoundCase::equal_kl: return "equal_kl";
        case BoundCase::unavailable: return "none";
    }
    return "?";
}

/// Bound on P_{nu,j}(D = i | sigma > nu) as a function of b.
struct PairBound {
    std::size_t i = 0;
    std::size_t j = 0;
    BoundCase kind = BoundCase::unavailable;
    double kl_true = 0.0;   // I_j
    double kl_cross = 0.0;  // I_ji
    std::optional<CumulantRoot> root;
    std::optional<LordenConstants> constants;  // equal-KL case only
    double c_tilde = std::numeric_limits<double>::quiet_NaN();

    std::optional<double> operator()(double b) const {
        switch (kind) {
            case BoundCase::exponential: {
                const double r = root->value;
                return r / (r - 1.0) * std::exp(-b);
            }
            case BoundCase::exponential_linear: {
                const double r = root->value;
                return (r + 1.0 / kl_true) * b * std::exp(-r * b);
            }
            case BoundCase::equal_kl: return c_tilde / b;
            case BoundCase::unavailable: return std::nullopt;
        }
        return std::nullopt;
    }
};

inline PairBound pair_bound(const HypothesisSet& hs, std::size_t i, std::size_t j, const ConstantOptions& opts = {}) {
    if (i == j) throw std::invalid_argument("pair bound needs distinct hypotheses");
    const KLMatrix kl = kl_matrix(hs);
    PairBound pb;
    pb.i = i;
    pb.j = j;
    pb.kl_true = kl.I(j);
    pb.kl_cross = kl.I(j, i);
    const double gap = pb.kl_cross - pb.kl_true;
    if (std::abs(gap) <= kEqualKlTolerance) {
        pb.kind = BoundCase::equal_kl;
        pb.constants = lorden_constants(hs, i, j, opts);
        pb.c_tilde = 1.0 + pb.constants->overshoot.value + pb.constants->undershoot.value +
                     pb.constants->second_moment / pb.kl_true;
        return pb;
    }
    if (gap < 0.0) return pb;
    try {
        pb.root = find_root(hs, i, j);
    } catch (const RootNotFound&) {
        return pb;
    }
    pb.kind = pb.root->value > 1.0 ? BoundCase::exponential : BoundCase::exponential_linear;
    return pb;
}

/// First-order bound on P_{nu,j}(D = i | sigma(b) > nu); empty when no bound is
/// available (I_j > I_ji, or no root).
inline std::optional<double> misid_bound(const HypothesisSet& hs, std::size_t i, std::size_t j, double b,
                                         const ConstantOptions& opts = {}) {
    if (!(b > 0.0)) throw std::invalid_argument("threshold must be positive");
    return pair_bound(hs, i, j, opts)(b);
}

struct ConstantBound {
    double constant;
    double value;
};

/// C b e^{-b} with C = (|I| - 1)(1 + max_i 1/I_i), single-fault scenarios.
inline ConstantBound single_fault_bound(const HypothesisSet& hs, double b) {
    if (hs.kind() != ScenarioKind::single_fault) throw std::invalid_argument("the C b e^-b bound needs a single-fault scenario");
    const KLMatrix kl = kl_matrix(hs);
    double worst = 0.0;
    for (std::size_t i = 0; i < hs.size(); ++i) worst = std::max(worst, 1.0 / kl.I(i));
    const double c = static_cast<double>(hs.size() - 1) * (1.0 + worst);
    return {c, c * b * std::exp(-b)};
}

/// C* e^{-b} with C* = 1 + max(|d1/d2|, |d2/d1|)/2, Gaussian two-sided scenarios.
inline ConstantBound two_sided_bound(const HypothesisSet& hs, double b) {
    const auto& ts = hs.two_sided();
    if (!ts || ts->family.base() != BaseFamily::gaussian)
        throw std::invalid_argument("the C* e^-b bound needs a Gaussian two-sided scenario");
    const double d1 = std::abs(ts->gamma_down - ts->gamma0);
    const double d2 = std::abs(ts->gamma_up - ts->gamma0);
    const double c = 1.0 + 0.5 * std::max(d1 / d2, d2 / d1);
    return {c, c * std::exp(-b)};
}

/// Boole bound on P_{nu,j}(D != j | sigma > nu): sum of the pair bounds, empty
/// if any pair has none.
inline std::optional<double> overall_misid_bound(const std::vector<PairBound>& pairs, double b) {
    double s = 0.0;
    for (const auto& pb : pairs) {
        const auto v = pb(b);
        if (!v) return std::nullopt;
        s += *v;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Lower bounds on L_ij(x; b) = E_j[sigma_i(b) | Y_i(0) = x]
// ---------------------------------------------------------------------------

inline void require_start(double x, double b) {
    if (!(x >= 0.0 && x <= b)) throw std::invalid_argument("start value must lie in [0, b]");
}

/// l_ij(x; b) for I_j < I_ji with root r; gap = I_ji - I_j, L0 = L_ij(0; b).
inline double run_length_lower(double x, double b, double r, double omega, double gap, double L0) {
    require_start(x, b);
    const double e = std::exp(-r * (b - x));
    return (x - e * (b + omega)) / gap + (1.0 - e) * L0;
}

/// u_ij(x; b) for I_j = I_ji; m2 = E_j[l_i(1)^2].
inline double run_length_lower_equal(double x, double b, double omega, double omega_tilde, double m2, double L0) {
    require_start(x, b);
    return (b - x) / (b + omega + omega_tilde) * (x * b / m2 + L0);
}

}  // namespace mincusum
