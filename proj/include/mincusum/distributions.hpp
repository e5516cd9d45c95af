#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mincusum/estimate.hpp"
#include "mincusum/random.hpp"

namespace mincusum {

inline constexpr double kBernoulliFloor = 1e-9;

/// Open interval (lo, hi); infinite ends allowed.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains(double x) const noexcept { return x > lo && x < hi; }
};

enum class BaseFamily { gaussian, bernoulli, exponential };

inline std::string_view to_string(BaseFamily b) {
    switch (b) {
        case BaseFamily::gaussian: return "gaussian";
        case BaseFamily::bernoulli: return "bernoulli";
        case BaseFamily::exponential: return "exponential";
    }
    return "?";
}

namespace detail {

// log(1 + e^x) without overflow.
inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double logistic(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2*pi)/2

}  // namespace detail

/// One-parameter exponential family {h_gamma(x) = h(x) exp(gamma x - phi(gamma))}
/// generated by a built-in base density h.
///
///  - gaussian:    h = N(0,1) on R,          phi = gamma^2/2,              Gamma = R
///  - bernoulli:   h = Bernoulli(1/2),       phi = log((1 + e^gamma)/2),   Gamma = R
///  - exponential: h = Exp(1) on [0, inf),   phi = -log(1 - gamma),        Gamma = (-inf, 1)
class ExponentialFamily1D {
public:
    static ExponentialFamily1D gaussian() { return ExponentialFamily1D(BaseFamily::gaussian); }
    static ExponentialFamily1D bernoulli() { return ExponentialFamily1D(BaseFamily::bernoulli); }
    static ExponentialFamily1D exponential() { return ExponentialFamily1D(BaseFamily::exponential); }

    BaseFamily base() const noexcept { return base_; }

    Interval domain() const noexcept {
        if (base_ == BaseFamily::exponential) return {-std::numeric_limits<double>::infinity(), 1.0};
        return {};
    }

    bool in_domain(double gamma) const noexcept { return std::isfinite(gamma) && domain().contains(gamma); }

    bool discrete() const noexcept { return base_ == BaseFamily::bernoulli; }

    /// phi(gamma); +inf outside the essential domain.
    double cumulant(double gamma) const noexcept {
        if (!in_domain(gamma)) return std::numeric_limits<double>::infinity();
        switch (base_) {
            case BaseFamily::gaussian: return 0.5 * gamma * gamma;
            case BaseFamily::bernoulli: return detail::softplus(gamma) - std::numbers::ln2;
            case BaseFamily::exponential: return -std::log1p(-gamma);
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    /// phi'(gamma), the mean of h_gamma.
    double cumulant_derivative(double gamma) const {
        require_domain(gamma);
        switch (base_) {
            case BaseFamily::gaussian: return gamma;
            case BaseFamily::bernoulli: return detail::logistic(gamma);
            case BaseFamily::exponential: return 1.0 / (1.0 - gamma);
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    /// phi''(gamma), the variance of h_gamma.
    double cumulant_second_derivative(double gamma) const {
        require_domain(gamma);
        switch (base_) {
            case BaseFamily::gaussian: return 1.0;
            case BaseFamily::bernoulli: {
                const double p = detail::logistic(gamma);
                return p * (1.0 - p);
            }
            case BaseFamily::exponential: return 1.0 / ((1.0 - gamma) * (1.0 - gamma));
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    bool in_support(double x) const noexcept {
        switch (base_) {
            case BaseFamily::gaussian: return std::isfinite(x);
            case BaseFamily::bernoulli: return x == 0.0 || x == 1.0;
            case BaseFamily::exponential: return std::isfinite(x) && x >= 0.0;
        }
        return false;
    }

    /// log h(x).
    double base_log_density(double x) const {
        require_support(x);
        switch (base_) {
            case BaseFamily::gaussian: return -detail::kHalfLog2Pi - 0.5 * x * x;
            case BaseFamily::bernoulli: return -std::numbers::ln2;
            case BaseFamily::exponential: return -x;
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    void require_support(double x) const {
        if (!in_support(x))
            throw std::domain_error("observation " + std::to_string(x) + " outside the support of the " +
                                    std::string(to_string(base_)) + " family");
    }

    void require_domain(double gamma) const {
        if (!in_domain(gamma))
            throw std::domain_error("natural parameter " + std::to_string(gamma) +
                                    " outside the essential domain of the " + std::string(to_string(base_)) +
                                    " family");
    }

    friend bool operator==(const ExponentialFamily1D&, const ExponentialFamily1D&) = default;

private:
    explicit ExponentialFamily1D(BaseFamily base) : base_(base) {}

    BaseFamily base_;
};

enum class DistributionKind { gaussian, bernoulli, tilt };

/// Immutable univariate density. Every instance is a member of one of the
/// built-in exponential families, which is what makes KL numbers, cumulants and
/// log-likelihood ratios available in closed form.
class Distribution {
public:
    /// N(mean, 1).
    static Distribution gaussian(double mean) {
        if (!std::isfinite(mean)) throw std::invalid_argument("gaussian mean must be finite");
        return Distribution(DistributionKind::gaussian, ExponentialFamily1D::gaussian(), mean, mean);
    }

    /// Bernoulli(p) with p in [1e-9, 1 - 1e-9].
    static Distribution bernoulli(double p) {
        if (!(p >= kBernoulliFloor && p <= 1.0 - kBernoulliFloor))
            throw std::invalid_argument("bernoulli success probability " + std::to_string(p) +
                                        " outside [1e-9, 1 - 1e-9]");
        return Distribution(DistributionKind::bernoulli, ExponentialFamily1D::bernoulli(), std::log(p / (1.0 - p)),
                            p);
    }

    /// h_gamma of `family`.
    static Distribution tilted(const ExponentialFamily1D& family, double gamma) {
        family.require_domain(gamma);
        if (family.base() == BaseFamily::bernoulli) {
            const double p = detail::logistic(gamma);
            if (!(p >= kBernoulliFloor && p <= 1.0 - kBernoulliFloor))
                throw std::invalid_argument("tilted bernoulli parameter leaves [1e-9, 1 - 1e-9]");
        }
        return Distribution(DistributionKind::tilt, family, gamma, gamma);
    }

    DistributionKind kind() const noexcept { return kind_; }
    const ExponentialFamily1D& family() const noexcept { return family_; }
    bool discrete() const noexcept { return family_.discrete(); }

    /// Natural parameter gamma within the family.
    double natural_parameter() const noexcept { return gamma_; }

    /// The user-facing parameter: mean for gaussian, p for bernoulli, gamma for tilt.
    double parameter() const noexcept { return parameter_; }

    double mean() const { return family_.cumulant_derivative(gamma_); }
    double variance() const { return family_.cumulant_second_derivative(gamma_); }

    bool in_support(double x) const noexcept { return family_.in_support(x); }

    double log_density(double x) const {
        family_.require_support(x);
        switch (kind_) {
            case DistributionKind::gaussian: {
                const double z = x - parameter_;
                return -detail::kHalfLog2Pi - 0.5 * z * z;
            }
            case DistributionKind::bernoulli: return x == 1.0 ? std::log(parameter_) : std::log1p(-parameter_);
            case DistributionKind::tilt: return family_.base_log_density(x) + gamma_ * x - family_.cumulant(gamma_);
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    double sample(RandomStream& rng) const {
        switch (family_.base()) {
            case BaseFamily::gaussian: return mean() + rng.normal();
            case BaseFamily::bernoulli: return rng.bernoulli(success_probability()) ? 1.0 : 0.0;
            case BaseFamily::exponential: return rng.exponential(1.0 - gamma_);
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

    /// P(X = 1) for discrete members.
    double success_probability() const {
        if (!discrete()) throw std::logic_error("success_probability on a continuous distribution");
        return kind_ == DistributionKind::bernoulli ? parameter_ : detail::logistic(gamma_);
    }

    std::string describe() const {
        switch (kind_) {
            case DistributionKind::gaussian: return "N(" + std::to_string(parameter_) + ",1)";
            case DistributionKind::bernoulli: return "Bernoulli(" + std::to_string(parameter_) + ")";
            case DistributionKind::tilt:
                return std::string(to_string(family_.base())) + "_tilt(" + std::to_string(gamma_) + ")";
        }
        return "?";
    }

    friend bool operator==(const Distribution&, const Distribution&) = default;

private:
    Distribution(DistributionKind kind, ExponentialFamily1D family, double gamma, double parameter)
        : kind_(kind), family_(family), gamma_(gamma), parameter_(parameter) {}

    DistributionKind kind_;
    ExponentialFamily1D family_;
    double gamma_;
    double parameter_;
};

/// h_gamma(x) = h(x) exp(gamma x - phi(gamma)).
inline Distribution tilt(const ExponentialFamily1D& family, double gamma) {
    return Distribution::tilted(family, gamma);
}

/// True when p and q live on the same support (same base family).
inline bool same_support(const Distribution& p, const Distribution& q) noexcept {
    return p.family().base() == q.family().base();
}

/// KL(p || q) = E_p[log(p/q)] in nats.
inline double kl_divergence(const Distribution& p, const Distribution& q) {
    if (!same_support(p, q))
        throw std::domain_error("infinite divergence: " + p.describe() + " and " + q.describe() +
                                " have different supports");
    switch (p.family().base()) {
        case BaseFamily::gaussian: {
            const double d = p.mean() - q.mean();
            return 0.5 * d * d;
        }
        case BaseFamily::bernoulli: {
            const double a = p.success_probability();
            const double b = q.success_probability();
            return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
        }
        case BaseFamily::exponential: {
            const auto& fam = p.family();
            const double gp = p.natural_parameter();
            const double gq = q.natural_parameter();
            return (gp - gq) * fam.cumulant_derivative(gp) - (fam.cumulant(gp) - fam.cumulant(gq));
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

/// Sample-average estimate of E_p[log p(X) - log q(X)]; the independent route
/// for checking the closed forms.
inline Estimate kl_divergence_monte_carlo(const Distribution& p, const Distribution& q, RandomStream& rng,
                                          std::size_t samples = 100'000) {
    if (!same_support(p, q)) throw std::domain_error("infinite divergence: supports differ");
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 1; k <= samples; ++k) {
        const double x = p.sample(rng);
        const double v = p.log_density(x) - q.log_density(x);
        const double delta = v - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (v - mean);
    }
    Estimate e;
    e.value = mean;
    e.n_effective = e.n_nominal = samples;
    e.se = samples > 1 ? std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
    return e;
}

}  // namespace mincusum
