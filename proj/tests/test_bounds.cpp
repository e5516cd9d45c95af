#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mincusum/bounds.hpp"

using namespace mincusum;
using Catch::Approx;

namespace {

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// psi_ij for the Gaussian two-sided problem with gamma0 = 0, written out:
// l_i(x) = g_i x - g_i^2/2 and X ~ N(g_j, 1).
double gaussian_two_sided_psi(double gi, double gj, double theta) {
    return theta * gi * gj + 0.5 * theta * theta * gi * gi - 0.5 * theta * gi * gi;
}

ConstantOptions quick_constants() {
    ConstantOptions o;
    o.excess_samples = 200'000;
    o.samples_per_point = 40'000;
    return o;
}

}  // namespace

TEST_CASE("calibration formulas", "[bounds][calibration]") {
    CHECK(b_alpha(0.01, 3) == Approx(std::log(300.0)).margin(1e-12));
    CHECK(b_alpha(0.01, 3) == Approx(5.7038).margin(1e-4));
    CHECK(b_alpha(1.0 / std::numbers::e, 1) == Approx(1.0).margin(1e-15));
    CHECK(b_alpha(0.001, 7) == Approx(8.8537).margin(1e-4));
    CHECK(arl_lower_bound(5.0, 3) == Approx(49.4711).margin(1e-4));
    CHECK(arl_lower_bound(0.0, 4) == 0.25);
    for (double a : {0.1, 0.01, 1e-5})
        for (std::size_t k : {1U, 3U, 7U}) CHECK(arl_lower_bound(b_alpha(a, k), k) == Approx(1.0 / a).epsilon(1e-12));
    CHECK(delay_approximation(0.01, 0.5) == Approx(9.2103).margin(1e-4));
    CHECK(delay_approximation(1.0 / std::numbers::e, 1.0) == Approx(1.0).margin(1e-15));
    CHECK(delay_approximation(0.001, 0.5) == Approx(13.8155).margin(1e-4));
    CHECK(delay_upper_bound(0.0, 0.5, 4.2) == 4.2);
    CHECK(delay_upper_bound(6.0, 0.5, 4.2) == Approx(16.2));
    CHECK_THROWS_AS(b_alpha(0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(b_alpha(1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(b_alpha(0.5, 0), std::invalid_argument);
}

TEST_CASE("psi closed forms", "[bounds][psi]") {
    const auto two = build_two_sided(ExponentialFamily1D::gaussian(), 0.0, -1.0, 1.0);
    for (double th : {0.0, 0.5, 1.0, 3.0}) {
        CHECK(psi(two, 0, 1, th) == Approx(gaussian_two_sided_psi(-1.0, 1.0, th)).margin(1e-12));
        CHECK(psi(two, 1, 0, th) == Approx(gaussian_two_sided_psi(1.0, -1.0, th)).margin(1e-12));
    }
    CHECK(psi(two, 0, 1, 0.0) == 0.0);
    const auto asym = build_two_sided(ExponentialFamily1D::gaussian(), 0.0, -0.5, 2.0);
    for (double th : {0.3, 1.5, 4.0}) {
        CHECK(psi(asym, 0, 1, th) == Approx(gaussian_two_sided_psi(-0.5, 2.0, th)).margin(1e-12));
        CHECK(psi(asym, 1, 0, th) == Approx(gaussian_two_sided_psi(2.0, -0.5, th)).margin(1e-12));
    }
    const auto single = build_single_fault(gaussian_channels(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) CHECK(psi(single, i, j, 1.0) == Approx(0.0).margin(1e-15));
    const auto bern = build_single_fault(bernoulli_channels(3, 0.2, 0.8));
    CHECK(psi(bern, 0, 2, 1.0) == Approx(0.0).margin(1e-14));
    CHECK_THROWS_AS(psi(single, 1, 1, 0.5), std::invalid_argument);
}

TEST_CASE("psi is infinite outside the natural domain", "[bounds][psi]") {
    const auto fam = ExponentialFamily1D::exponential();
    const auto hs = build_two_sided(fam, 0.0, -1.0, 0.5);
    // l_up has slope 0.5; X under g_down has rate 2, so the mgf diverges at theta >= 4
    CHECK(std::isfinite(psi_or_infinity(hs, 1, 0, 3.9)));
    CHECK(std::isinf(psi_or_infinity(hs, 1, 0, 4.0)));
    CHECK_THROWS_AS(psi(hs, 1, 0, 5.0), std::domain_error);
}

TEST_CASE("psi derivative at zero is I_j - I_ji", "[bounds][psi][property]") {
    const std::vector<HypothesisSet> sets{
        build_single_fault(gaussian_channels(3)),
        build_concurrent_fault(gaussian_channels(3)),
        build_concurrent_fault(bernoulli_channels(2, 0.2, 0.8)),
        build_two_sided(ExponentialFamily1D::gaussian(), 0.0, -1.0, 1.0),
        build_two_sided(ExponentialFamily1D::gaussian(), 0.0, -0.5, 2.0),
        build_two_sided(ExponentialFamily1D::exponential(), 0.0, -1.0, 0.5),
        build_two_sided(ExponentialFamily1D::bernoulli(), 0.0, -1.0, 2.0),
    };
    const double h = 1e-5;
    for (const auto& hs : sets) {
        const auto kl = kl_matrix(hs);
        for (std::size_t i = 0; i < hs.size(); ++i)
            for (std::size_t j = 0; j < hs.size(); ++j) {
                if (i == j) continue;
                const double fd = (psi(hs, i, j, h) - psi(hs, i, j, -h)) / (2.0 * h);
                CHECK(fd == Approx(kl.I(j) - kl.I(j, i)).margin(1e-6));
                CHECK(psi_derivative(hs, i, j, 0.0) == Approx(kl.I(j) - kl.I(j, i)).margin(1e-12));
            }
    }
}

TEST_CASE("psi agrees with Monte Carlo", "[bounds][psi][sampling]") {
    RandomStream rng(11);
    const auto hs = build_two_sided(ExponentialFamily1D::exponential(), 0.0, -1.0, 0.5);
    const auto e = psi_monte_carlo(hs, 0, 1, 0.7, rng, 200'000);
    CHECK(std::abs(e.value - psi(hs, 0, 1, 0.7)) <= 4.0 * e.se);
    const auto conc = build_concurrent_fault(bernoulli_channels(3, 0.3, 0.6));
    const auto f = psi_monte_carlo(conc, 6, 1, 0.4, rng, 200'000);
    CHECK(std::abs(f.value - psi(conc, 6, 1, 0.4)) <= 4.0 * f.se);
}

TEST_CASE("roots for single-fault pairs are one", "[bounds][roots]") {
    for (const auto& hs : {build_single_fault(gaussian_channels(3)), build_single_fault(bernoulli_channels(2, 0.2, 0.8)),
                           build_single_fault({ChannelSpec(Distribution::gaussian(0.0), Distribution::gaussian(2.0)),
                                               ChannelSpec(Distribution::bernoulli(0.4), Distribution::bernoulli(0.1))})}) {
        for (std::size_t i = 0; i < hs.size(); ++i)
            for (std::size_t j = 0; j < hs.size(); ++j) {
                if (i == j) continue;
                const auto r = find_root(hs, i, j);
                CHECK(std::abs(r.value - 1.0) <= 1e-8);
                const auto bis = find_root_bisection(hs, i, j);
                CHECK(std::abs(bis.value - 1.0) <= 1e-8);
            }
    }
}

TEST_CASE("roots for gaussian two-sided pairs", "[bounds][roots]") {
    const auto fam = ExponentialFamily1D::gaussian();
    const auto sym = build_two_sided(fam, 0.0, -1.0, 1.0);
    CHECK(std::abs(find_root(sym, 0, 1).value - 3.0) <= 1e-8);
    CHECK(std::abs(find_root(sym, 1, 0).value - 3.0) <= 1e-8);
    const auto asym = build_two_sided(fam, 0.0, -0.5, 2.0);
    // i = up (gamma 2), j = down (gamma -0.5)
    CHECK(std::abs(find_root(asym, 1, 0).value - 1.5) <= 1e-8);
    CHECK(std::abs(find_root_bisection(asym, 1, 0).value - 1.5) <= 1e-8);
    CHECK(std::abs(find_root(asym, 0, 1).value - 9.0) <= 1e-8);
    CHECK(std::abs(find_root_bisection(asym, 0, 1).value - 9.0) <= 1e-8);
    const auto shifted = build_two_sided(fam, 1.0, 0.0, 3.0);
    CHECK(std::abs(find_root(shifted, 0, 1).value - 5.0) <= 1e-8);
    CHECK(std::abs(find_root_bisection(shifted, 0, 1).value - 5.0) <= 1e-8);
}

TEST_CASE("bisection roots are zeros crossed from below", "[bounds][roots][property]") {
    const std::vector<HypothesisSet> sets{
        build_two_sided(ExponentialFamily1D::exponential(), 0.0, -1.0, 0.5),
        build_two_sided(ExponentialFamily1D::bernoulli(), 0.0, -1.0, 2.0),
        build_two_sided(ExponentialFamily1D::bernoulli(), 0.5, -2.0, 1.0),
    };
    for (const auto& hs : sets)
        for (std::size_t i = 0; i < 2; ++i) {
            const std::size_t j = 1 - i;
            const auto r = find_root(hs, i, j);
            CHECK(r.method == RootMethod::bisection);
            CHECK(r.value > 0.0);
            CHECK(std::abs(psi(hs, i, j, r.value)) <= 1e-8);
            CHECK(psi_derivative(hs, i, j, r.value) > 0.0);
        }
}

TEST_CASE("root finding refuses pairs without a positive root", "[bounds][roots]") {
    const auto hs = build_concurrent_fault(gaussian_channels(3));
    const std::size_t j = *hs.find("{1,2}");
    CHECK_THROWS_AS(find_root(hs, *hs.find("{1,3}"), j), RootNotFound);  // equal KL
    CHECK_THROWS_AS(find_root(hs, *hs.find("{2}"), j), RootNotFound);    // I_j > I_ji
    CHECK_THROWS_AS(find_root_bisection(hs, *hs.find("{2}"), j), RootNotFound);
    CHECK(find_root(hs, *hs.find("{3}"), j).value == 1.0);
}

TEST_CASE("excess constant B_j", "[bounds][constants]") {
    // gaussian: l_j ~ N(1/2, 1) under g_j; E[(l+)^2] = (m^2+1)Phi(m) + m phi(m)
    const auto hs = build_single_fault(gaussian_channels(3));
    const double m = 0.5;
    const double oracle = ((m * m + 1.0) * norm_cdf(m) + m * norm_pdf(m)) / 0.25;
    const auto e = excess_bound(hs, 0, quick_constants());
    CHECK(std::abs(e.value - oracle) <= 4.0 * e.se);
    CHECK(oracle == Approx(4.1614).margin(1e-3));

    const auto bern = build_single_fault(bernoulli_channels(2, 0.2, 0.8));
    const double kl = 0.6 * std::log(4.0);
    const auto eb = excess_bound(bern, 1);
    CHECK(eb.se == 0.0);
    CHECK(eb.value == Approx(0.8 * std::log(4.0) * std::log(4.0) / (kl * kl)).margin(1e-12));
}

TEST_CASE("overshoot constants for gaussian laws", "[bounds][constants]") {
    // single-fault i != j: l_i ~ N(-1/2, 1); the mean residual life of a normal
    // law decreases, so both suprema sit at t = 0.
    const auto hs = build_single_fault(gaussian_channels(3));
    const double mu = -0.5;
    const double omega = mu + norm_pdf(-mu) / (1.0 - norm_cdf(-mu));
    const double omega_tilde = -mu + norm_pdf(-mu) / norm_cdf(-mu);
    const auto opts = quick_constants();
    const auto o = overshoot_bound(hs, 0, 1, opts);
    const auto u = undershoot_bound(hs, 0, 1, opts);
    CHECK(std::abs(o.value - omega) <= 5.0 * o.se);
    CHECK(std::abs(u.value - omega_tilde) <= 5.0 * u.se);
    CHECK(o.se > 0.0);
}

TEST_CASE("overshoot constants for discrete laws", "[bounds][constants]") {
    const auto hs = build_concurrent_fault(bernoulli_channels(3, 0.2, 0.7));
    const std::size_t j = *hs.find("{1,2}");
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (i == j) continue;
        const auto law = *llr_law(hs, i, j);
        double total = 0.0;
        for (double p : law.probs) total += p;
        CHECK(total == Approx(1.0).margin(1e-14));
        // brute force over a fine t grid
        double best_o = 0.0, best_u = 0.0;
        for (double t = 0.0; t <= 8.0; t += 1e-4) {
            double mass = 0.0, first = 0.0;
            for (std::size_t k = 0; k < law.values.size(); ++k)
                if (law.values[k] >= t) {
                    mass += law.probs[k];
                    first += law.probs[k] * (law.values[k] - t);
                }
            if (mass > 0.0) best_o = std::max(best_o, first / mass);
            mass = first = 0.0;
            for (std::size_t k = 0; k < law.values.size(); ++k)
                if (law.values[k] <= -t) {
                    mass += law.probs[k];
                    first += law.probs[k] * (-t - law.values[k]);
                }
            if (mass > 0.0) best_u = std::max(best_u, first / mass);
        }
        CHECK(overshoot_bound(hs, i, j).value == Approx(best_o).margin(2e-4));
        CHECK(undershoot_bound(hs, i, j).value == Approx(best_u).margin(2e-4));
    }
}

TEST_CASE("second moment of the log-likelihood ratio", "[bounds][constants]") {
    const auto hs = build_concurrent_fault(gaussian_channels(3));
    const std::size_t j = *hs.find("{1,2}");
    CHECK(llr_second_moment(hs, *hs.find("{1,3}"), j) == Approx(2.0));  // N(0, 2)
    CHECK(llr_second_moment(hs, *hs.find("{3}"), j) == Approx(1.25));   // N(-1/2, 1)
    const auto bern = build_single_fault(bernoulli_channels(2, 0.2, 0.8));
    const double l = std::log(4.0);
    CHECK(llr_second_moment(bern, 0, 0) == Approx(l * l));
}

TEST_CASE("closed-form bound constants", "[bounds][constants]") {
    const auto g3 = build_single_fault(gaussian_channels(3));
    CHECK(single_fault_bound(g3, 1.0).constant == 6.0);
    CHECK(single_fault_bound(g3, 0.0).value == 0.0);
    CHECK(single_fault_bound(g3, 6.0).value == Approx(6.0 * 6.0 * std::exp(-6.0)));
    const auto b2 = build_single_fault(bernoulli_channels(2, 0.2, 0.8));
    CHECK(single_fault_bound(b2, 1.0).constant == Approx(1.0 + 1.0 / (0.6 * std::log(4.0))));
    CHECK(single_fault_bound(b2, 1.0).constant == Approx(2.2022).margin(1e-4));
    const auto fam = ExponentialFamily1D::gaussian();
    const auto two = build_two_sided(fam, 0.0, -1.0, 1.0);
    CHECK(two_sided_bound(two, 6.0).constant == 1.5);
    CHECK(two_sided_bound(two, 6.0).value == Approx(0.00372).margin(1e-5));
    CHECK(two_sided_bound(build_two_sided(fam, 0.0, -0.5, 2.0), 1.0).constant == 3.0);
    CHECK_THROWS_AS(single_fault_bound(two, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(two_sided_bound(g3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(two_sided_bound(build_two_sided(ExponentialFamily1D::exponential(), 0.0, -1.0, 0.5), 1.0),
                    std::invalid_argument);
}

TEST_CASE("pair bounds and Boole sums", "[bounds][misid]") {
    const auto g3 = build_single_fault(gaussian_channels(3));
    std::vector<PairBound> pairs;
    for (std::size_t i = 1; i < 3; ++i) pairs.push_back(pair_bound(g3, i, 0));
    for (double b : {2.0, 4.5, 9.0}) {
        CHECK(*misid_bound(g3, 1, 0, b) == Approx(3.0 * b * std::exp(-b)));
        CHECK(*overall_misid_bound(pairs, b) == Approx(single_fault_bound(g3, b).value));
    }
    CHECK(pairs[0].kind == BoundCase::exponential_linear);

    const auto two = build_two_sided(ExponentialFamily1D::gaussian(), 0.0, -1.0, 1.0);
    const auto pb = pair_bound(two, 0, 1);
    CHECK(pb.kind == BoundCase::exponential);
    CHECK(*pb(6.0) == Approx(1.5 * std::exp(-6.0)));
    CHECK_THROWS_AS(misid_bound(g3, 1, 0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(pair_bound(g3, 1, 1), std::invalid_argument);
}

TEST_CASE("concurrent-fault pair bounds", "[bounds][misid]") {
    const auto hs = build_concurrent_fault(gaussian_channels(3));
    const std::size_t j = *hs.find("{1,2}");
    CHECK(pair_bound(hs, *hs.find("{3}"), j).kind == BoundCase::exponential_linear);
    CHECK(pair_bound(hs, *hs.find("{2}"), j).kind == BoundCase::unavailable);
    CHECK_FALSE(misid_bound(hs, *hs.find("{2}"), j, 5.0));
    const auto eq = pair_bound(hs, *hs.find("{1,3}"), j, quick_constants());
    REQUIRE(eq.kind == BoundCase::equal_kl);
    // l ~ N(0, 2): omega = omega~ = sqrt(2) * 2 phi(0)
    const double w = std::sqrt(2.0) * 2.0 * norm_pdf(0.0);
    CHECK(eq.c_tilde == Approx(1.0 + 2.0 * w + 2.0).margin(0.05));
    CHECK(*eq(4.0) == Approx(eq.c_tilde / 4.0));
    std::vector<PairBound> all;
    for (std::size_t i = 0; i < hs.size(); ++i)
        if (i != j) all.push_back(pair_bound(hs, i, j, quick_constants()));
    CHECK_FALSE(overall_misid_bound(all, 5.0));
}

TEST_CASE("misid bound decreases past the knee", "[bounds][misid][property]") {
    const auto g3 = build_single_fault(gaussian_channels(3));
    const auto pb = pair_bound(g3, 2, 0);
    double prev = *pb(1.0 + 1e-9);
    for (double b = 1.05; b < 20.0; b += 0.05) {
        const double v = *pb(b);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("run-length curves at the endpoints", "[bounds][run_length]") {
    const double b = 5.0, r = 1.0, w = 0.7, gap = 0.5, L0 = 40.0;
    CHECK(run_length_lower(b, b, r, w, gap, L0) == Approx(-w / gap));
    const double at0 = run_length_lower(0.0, b, r, w, gap, L0);
    CHECK(at0 == Approx(L0 * (1.0 - std::exp(-r * b)) - std::exp(-r * b) * (b + w) / gap));
    CHECK(at0 <= L0);
    CHECK(run_length_lower_equal(b, b, 0.3, 0.4, 2.0, L0) == 0.0);
    CHECK(run_length_lower_equal(0.0, b, 0.3, 0.4, 2.0, L0) == Approx(b / (b + 0.7) * L0));
    CHECK_THROWS_AS(run_length_lower(-0.1, b, r, w, gap, L0), std::invalid_argument);
    CHECK_THROWS_AS(run_length_lower(b + 0.1, b, r, w, gap, L0), std::invalid_argument);
    CHECK_THROWS_AS(run_length_lower_equal(6.0, b, 0.3, 0.4, 2.0, L0), std::invalid_argument);
}
