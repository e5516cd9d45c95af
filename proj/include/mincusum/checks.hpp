#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mincusum/bounds.hpp"
#include "mincusum/cusum.hpp"
#include "mincusum/montecarlo.hpp"
#include "mincusum/studies.hpp"

namespace mincusum::checks {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string observed;
    std::string expected;
    std::string tolerance;
    double seconds = 0.0;
    std::vector<std::string> failures;  // individual violations, if any
};

struct CheckOptions {
    std::uint64_t seed = kDefaultSeed;
    std::size_t workers = 1;
};

namespace detail {

inline std::string fmt(double v, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

template <class F>
CheckResult timed(int id, std::string name, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r = body();
    r.id = id;
    r.name = std::move(name);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Rows of one metric keyed by nu, in grid order.
inline std::map<std::size_t, std::vector<const ResultRow*>> by_nu(const std::vector<ResultRow>& rows,
                                                                  std::string_view metric) {
    std::map<std::size_t, std::vector<const ResultRow*>> out;
    for (const auto& r : rows)
        if (r.metric == metric) out[r.nu.value_or(0)].push_back(&r);
    return out;
}

}  // namespace detail

// 1. Recursion against the direct definition.
inline CheckResult engine_equivalence(const CheckOptions& opt) {
    return detail::timed(1, "engine equivalence", [&] {
        CheckResult r;
        const auto gauss = build_single_fault(gaussian_channels(3));
        const auto bern = build_concurrent_fault(bernoulli_channels(2, 0.2, 0.8));
        double worst_gauss = 0.0;
        std::size_t bern_mismatch = 0;
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto* hs : {&gauss, &bern}) {
            for (std::size_t p = 0; p < 1000; ++p) {
                RandomStream rng(derive_seed(opt.seed, 0xe1, p + (hs == &bern ? 1000 : 0)));
                ChangeSource src(*hs, p % hs->size(), 50, rng);
                std::vector<std::vector<double>> path(100, std::vector<double>(hs->dimension()));
                for (auto& x : path) src(x);
                CusumState s = initial_state(*hs);
                std::vector<std::vector<double>> rec;
                for (const auto& x : path) {
                    s = update(s, x, *hs);
                    rec.push_back(s.y);
                }
                for (std::size_t i = 0; i < hs->size(); ++i) {
                    const auto direct = cusum_direct(path, *hs, i);
                    for (std::size_t n = 0; n < path.size(); ++n) {
                        if (hs == &bern)
                            bern_mismatch += rec[n][i] != direct[n];
                        else
                            worst_gauss = std::max(worst_gauss, std::abs(rec[n][i] - direct[n]));
                    }
                }
            }
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.passed = worst_gauss <= 1e-12 && bern_mismatch == 0 && secs < 5.0;
        r.observed = "max gaussian diff " + detail::fmt(worst_gauss) + ", bernoulli mismatches " +
                     std::to_string(bern_mismatch) + ", " + detail::fmt(secs, 3) + " s";
        r.expected = "recursion equals definition on 1000 + 1000 paths of length 100";
        r.tolerance = "1e-12 gaussian, exact bernoulli, < 5 s";
        return r;
    });
}

// 2. Single-fault study: bound, nu = 20 vs 100, decreasing trend.
inline CheckResult fig2_reproduction(const CheckOptions& opt) {
    return detail::timed(2, "single-fault study (fig2)", [&] {
        CheckResult r;
        StudyConfig cfg = figure_study("fig2");
        cfg.sim.seed = opt.seed;
        cfg.sim.workers = opt.workers;
        const auto rows = run_study(cfg);
        const auto curves = detail::by_nu(rows, "misid");
        const auto hs = cfg.scenario.build();
        const double C = single_fault_bound(hs, 1.0).constant;
        if (C != 6.0) r.failures.push_back("C = " + detail::fmt(C) + ", expected 6");

        // (a) below C b e^-b
        std::size_t checked = 0, undefined = 0;
        for (const auto& [nu, curve] : curves)
            for (const auto* row : curve) {
                if (!row->estimate.defined()) {
                    ++undefined;
                    continue;
                }
                ++checked;
                const double bound = 6.0 * row->b * std::exp(-row->b);
                if (row->estimate.value > bound + 3.0 * row->estimate.se)
                    r.failures.push_back("(a) nu=" + std::to_string(nu) + " b=" + detail::fmt(row->b) + ": " +
                                         detail::fmt(row->estimate.value) + " > " + detail::fmt(bound) + " + 3SE");
            }
        // (b) nu = 20 and nu = 100 agree
        std::size_t compared = 0;
        const auto& c20 = curves.at(20);
        const auto& c100 = curves.at(100);
        for (std::size_t k = 0; k < c20.size(); ++k) {
            const Estimate& a = c20[k]->estimate;
            const Estimate& b = c100[k]->estimate;
            if (!a.defined() || !b.defined()) continue;
            ++compared;
            const double se = std::hypot(a.se, b.se);
            if (std::abs(a.value - b.value) > 3.0 * se)
                r.failures.push_back("(b) b=" + detail::fmt(c20[k]->b) + ": |" + detail::fmt(a.value) + " - " +
                                     detail::fmt(b.value) + "| > 3SE = " + detail::fmt(3.0 * se));
        }
        // (c) smoothed curves decrease
        for (const auto& [nu, curve] : curves) {
            std::vector<double> v, s;
            for (const auto* row : curve)
                if (row->estimate.defined()) {
                    v.push_back(row->estimate.value);
                    s.push_back(row->estimate.se);
                }
            if (v.size() < 5) {
                r.failures.push_back("(c) nu=" + std::to_string(nu) + ": too few defined points");
                continue;
            }
            std::vector<double> smooth(v.size()), smooth_se(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) {
                const std::size_t lo = k >= 2 ? k - 2 : 0;
                const std::size_t hi = std::min(v.size() - 1, k + 2);
                double a = 0.0, e = 0.0;
                for (std::size_t m = lo; m <= hi; ++m) {
                    a += v[m];
                    e += s[m];
                }
                smooth[k] = a / static_cast<double>(hi - lo + 1);
                smooth_se[k] = e / static_cast<double>(hi - lo + 1);
            }
            for (std::size_t k = 0; k + 1 < smooth.size(); ++k)
                if (smooth[k + 1] > smooth[k] + 3.0 * std::hypot(smooth_se[k], smooth_se[k + 1]))
                    r.failures.push_back("(c) nu=" + std::to_string(nu) + ": smoothed curve rises at point " +
                                         std::to_string(k + 1));
            if (!(smooth.back() < smooth.front()))
                r.failures.push_back("(c) nu=" + std::to_string(nu) + ": no overall decrease");
        }
        r.passed = r.failures.empty() && compared > 0;
        r.observed = std::to_string(checked) + " estimates checked (" + std::to_string(undefined) +
                     " undefined), " + std::to_string(compared) + " nu=20/100 pairs, " +
                     std::to_string(r.failures.size()) + " violations";
        r.expected = "misid <= 6 b e^-b; nu=20 ~ nu=100; smoothed curves decreasing";
        r.tolerance = "3 SE";
        return r;
    });
}

// 3. Concurrent-fault partial probabilities are ordered.
inline CheckResult fig4_ordering(const CheckOptions& opt) {
    return detail::timed(3, "concurrent-fault partial ordering (fig3/fig4)", [&] {
        CheckResult r;
        StudyConfig cfg = figure_study("fig4");
        cfg.sim.seed = opt.seed;
        cfg.sim.workers = opt.workers;
        const auto rows = run_study(cfg);
        std::map<double, std::map<std::string, Estimate>> at;
        for (const auto& row : rows) at[row.b][row.metric] = row.estimate;
        std::size_t checked = 0;
        for (const auto& [b, m] : at) {
            if (b < 3.0 || b > 6.0) continue;
            const Estimate& p2 = m.at("partial:{2}");
            const Estimate& p13 = m.at("partial:{1,3}");
            const Estimate& p3 = m.at("partial:{3}");
            if (!p2.defined()) {
                r.failures.push_back("b=" + detail::fmt(b) + ": no survivors");
                continue;
            }
            const double n = static_cast<double>(p2.n_effective);
            auto diff_se = [n](double a, double c) { return std::sqrt(std::max(0.0, a + c - (a - c) * (a - c)) / n); };
            ++checked;
            if (p2.value < p13.value - 3.0 * diff_se(p2.value, p13.value))
                r.failures.push_back("b=" + detail::fmt(b) + ": P({2})=" + detail::fmt(p2.value) + " < P({1,3})=" +
                                     detail::fmt(p13.value));
            if (p13.value < p3.value - 3.0 * diff_se(p13.value, p3.value))
                r.failures.push_back("b=" + detail::fmt(b) + ": P({1,3})=" + detail::fmt(p13.value) + " < P({3})=" +
                                     detail::fmt(p3.value));
        }
        r.passed = r.failures.empty() && checked > 0;
        r.observed = std::to_string(checked) + " thresholds in [3, 6], " + std::to_string(r.failures.size()) +
                     " violations";
        r.expected = "P(D={2}) >= P(D={1,3}) >= P(D={3})";
        r.tolerance = "3 SE of each difference";
        return r;
    });
}

// 4. Average run length against e^b / k.
inline CheckResult arl_bound(const CheckOptions& opt) {
    return detail::timed(4, "average run length bound", [&] {
        CheckResult r;
        const auto hs = build_single_fault(gaussian_channels(3));
        SimulationOptions sim;
        sim.paths = 10'000;
        sim.horizon = 100'000;
        sim.seed = opt.seed;
        sim.stream = 0xa41;
        sim.workers = opt.workers;
        std::ostringstream obs;
        r.passed = true;
        for (double b : {3.0, 4.0}) {
            const Estimate e = estimate_arl(hs, b, sim);
            const double bound = arl_lower_bound(b, 3);
            const double cut = static_cast<double>(e.n_truncated) / static_cast<double>(e.n_nominal);
            const bool ok = e.value >= bound - 3.0 * e.se && cut <= 1e-3;
            if (!ok) r.failures.push_back("b=" + detail::fmt(b));
            r.passed = r.passed && ok;
            obs << "b=" << b << ": " << detail::fmt(e.value) << " (SE " << detail::fmt(e.se, 3) << ", truncated "
                << e.n_truncated << ") vs " << detail::fmt(bound) << "; ";
        }
        r.observed = obs.str();
        r.expected = "E_inf[sigma(b)] >= e^b/3, truncation <= 0.1%";
        r.tolerance = "3 SE";
        return r;
    });
}

// 5. Detection delay between b/I and b/I + B.
inline CheckResult delay_bounds(const CheckOptions& opt) {
    return detail::timed(5, "detection delay bounds", [&] {
        CheckResult r;
        const auto hs = build_single_fault(gaussian_channels(3));
        ConstantOptions co;
        co.seed = opt.seed;
        co.excess_samples = 1'000'000;
        const Estimate B = excess_bound(hs, 0, co);
        SimulationOptions sim;
        sim.paths = 10'000;
        sim.horizon = 100'000;
        sim.seed = opt.seed;
        sim.stream = 0xde1;
        sim.workers = opt.workers;
        const double b = 6.0;
        const Estimate d = estimate_delay(hs, 0, b, sim);
        const double lo = b / 0.5 - 3.0 * d.se;
        const double hi = b / 0.5 + B.value + 3.0 * std::hypot(d.se, B.se);
        r.passed = d.value >= lo && d.value <= hi && d.n_truncated == 0;
        r.observed = "E_1[sigma(6)] = " + detail::fmt(d.value) + " (SE " + detail::fmt(d.se, 3) + "), B_1 = " +
                     detail::fmt(B.value) + " (SE " + detail::fmt(B.se, 3) + ")";
        r.expected = "[" + detail::fmt(lo) + ", " + detail::fmt(hi) + "]";
        r.tolerance = "3 SE (upper end combines delay and B_1 errors)";
        return r;
    });
}

// 6. Positive roots and the derivative identity.
inline CheckResult root_values(const CheckOptions&) {
    return detail::timed(6, "cumulant roots", [&] {
        CheckResult r;
        double worst = 0.0;
        std::size_t pairs = 0;
        auto expect = [&](const HypothesisSet& hs, std::size_t i, std::size_t j, double target) {
            const double v = find_root(hs, i, j).value;
            const double w = find_root_bisection(hs, i, j).value;
            worst = std::max({worst, std::abs(v - target), std::abs(w - target)});
            ++pairs;
            if (std::abs(v - target) > 1e-8 || std::abs(w - target) > 1e-8)
                r.failures.push_back("r_" + hs.label(i) + "," + hs.label(j) + " = " + detail::fmt(v, 12) + " / " +
                                     detail::fmt(w, 12) + ", expected " + detail::fmt(target));
        };
        for (const auto& hs : {build_single_fault(gaussian_channels(3)),
                               build_single_fault(bernoulli_channels(2, 0.2, 0.8)),
                               build_single_fault(bernoulli_channels(4, 0.1, 0.45))})
            for (std::size_t i = 0; i < hs.size(); ++i)
                for (std::size_t j = 0; j < hs.size(); ++j)
                    if (i != j) expect(hs, i, j, 1.0);
        const auto fam = ExponentialFamily1D::gaussian();
        const std::vector<std::array<double, 3>> gammas{{0.0, -1.0, 1.0}, {0.0, -0.5, 2.0}, {0.0, -2.0, 0.3}};
        for (const auto& g : gammas) {
            const auto hs = build_two_sided(fam, g[0], g[1], g[2]);
            for (std::size_t i = 0; i < 2; ++i) {
                const std::size_t j = 1 - i;
                const double gi = i == 0 ? g[1] : g[2];
                const double gj = j == 0 ? g[1] : g[2];
                expect(hs, i, j, 1.0 + 2.0 * std::abs(gj / gi));
            }
        }
        const auto asym = build_two_sided(fam, 0.0, -0.5, 2.0);
        const double r21 = find_root(asym, 1, 0).value;
        if (std::abs(r21 - 1.5) > 1e-8) r.failures.push_back("gamma=(0,-0.5,2): r_21 = " + detail::fmt(r21, 12));

        double worst_fd = 0.0;
        const double h = 1e-5;
        for (const auto& hs : {build_single_fault(gaussian_channels(3)), build_concurrent_fault(gaussian_channels(3)),
                               build_two_sided(fam, 0.0, -1.0, 1.0), build_two_sided(fam, 0.0, -0.5, 2.0),
                               build_concurrent_fault(bernoulli_channels(3, 0.2, 0.8))}) {
            const KLMatrix kl = kl_matrix(hs);
            for (std::size_t i = 0; i < hs.size(); ++i)
                for (std::size_t j = 0; j < hs.size(); ++j) {
                    if (i == j) continue;
                    const double fd = (psi(hs, i, j, h) - psi(hs, i, j, -h)) / (2.0 * h);
                    worst_fd = std::max(worst_fd, std::abs(fd - (kl.I(j) - kl.I(j, i))));
                }
        }
        if (worst_fd > 1e-6) r.failures.push_back("psi'(0) off by " + detail::fmt(worst_fd));
        r.passed = r.failures.empty();
        r.observed = std::to_string(pairs) + " roots, max error " + detail::fmt(worst, 3) +
                     "; max |psi'(0) - (I_j - I_ji)| " + detail::fmt(worst_fd, 3);
        r.expected = "r = 1 (single-fault), 1 + 2|g_j/g_i| (gaussian two-sided)";
        r.tolerance = "1e-8 roots, 1e-6 derivative";
        return r;
    });
}

// 7. Monte Carlo against exact enumeration, repeated.
inline CheckResult enumeration_oracle(const CheckOptions& opt) {
    return detail::timed(7, "enumeration oracle", [&] {
        CheckResult r;
        const auto hs = build_single_fault(bernoulli_channels(2, 0.2, 0.8));
        std::ostringstream obs;
        r.passed = true;
        for (std::size_t nu : {0U, 2U}) {
            const auto exact = exact_enumeration(hs, 0, nu, 1.0, 8);
            std::size_t agree = 0;
            for (std::uint64_t rep = 0; rep < 100; ++rep) {
                ExperimentConfig ec{0, nu, {1.0}, {}};
                ec.sim.paths = 100'000;
                ec.sim.horizon = 8;
                ec.sim.seed = derive_seed(opt.seed, 0x7e, rep);
                ec.sim.stream = nu;
                ec.sim.workers = opt.workers;
                const Estimate e = misid_from_tally(simulate_diagnosis(hs, ec)[0], 0);
                if (std::abs(e.value - *exact.conditional_misid) <= 3.0 * e.se)
                    ++agree;
                else
                    r.failures.push_back("nu=" + std::to_string(nu) + " rep " + std::to_string(rep) + ": " +
                                         detail::fmt(e.value) + " vs " + detail::fmt(*exact.conditional_misid));
            }
            r.passed = r.passed && agree >= 99;
            obs << "nu=" << nu << ": exact " << detail::fmt(*exact.conditional_misid, 8) << ", " << agree
                << "/100 agree; ";
        }
        r.observed = obs.str();
        r.expected = ">= 99 of 100 repetitions agree, per nu";
        r.tolerance = "3 SE";
        return r;
    });
}

// 8. Conditional pre-change tail below e^-x.
inline CheckResult prechange_tail(const CheckOptions& opt) {
    return detail::timed(8, "pre-change tail condition", [&] {
        CheckResult r;
        const auto hs = build_single_fault(gaussian_channels(3));
        std::vector<double> xs;
        for (int k = 0; k <= 8; ++k) xs.push_back(0.5 * k);
        SimulationOptions sim;
        sim.paths = 100'000;
        sim.seed = opt.seed;
        sim.stream = 0x34;
        sim.workers = opt.workers;
        const auto rep = verify_prechange_tail(hs, 20, 4.0, xs, sim);
        double worst = -1.0;
        for (std::size_t i = 0; i < hs.size(); ++i)
            for (std::size_t k = 0; k < xs.size(); ++k) {
                const Estimate& e = rep.tail[i][k];
                const double excess = e.value - std::exp(-xs[k]) - 3.0 * e.se;
                worst = std::max(worst, excess);
                if (excess > 0.0)
                    r.failures.push_back("i=" + hs.label(i) + " x=" + detail::fmt(xs[k]) + ": " +
                                         detail::fmt(e.value) + " > e^-x + 3SE");
            }
        r.passed = r.failures.empty() && rep.defined();
        r.observed = std::to_string(rep.survivors) + " survivors of " + std::to_string(sim.paths) +
                     ", max(value - e^-x - 3SE) = " + detail::fmt(worst, 3);
        r.expected = "P_inf(Y_i(20) >= x | sigma(4) > 20) <= e^-x";
        r.tolerance = "3 SE";
        return r;
    });
}

// 9. Lower bound on L_ij(x; b) and monotonicity in x.
inline CheckResult run_length_bound(const CheckOptions& opt) {
    return detail::timed(9, "run-length lower bound", [&] {
        CheckResult r;
        const auto hs = build_single_fault(gaussian_channels(3));
        const std::size_t i = 1, j = 0;
        const double b = 5.0;
        ConstantOptions co;
        co.seed = opt.seed;
        const PairBound pb = pair_bound(hs, i, j, co);
        const Estimate omega = overshoot_bound(hs, i, j, co);
        const KLMatrix kl = kl_matrix(hs);
        const double gap = kl.I(j, i) - kl.I(j);
        const double rr = pb.root->value;
        const std::vector<double> xs{0.0, 1.0, 2.0, 3.0, 4.0};
        std::vector<Estimate> L;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            SimulationOptions sim;
            sim.paths = 10'000;
            sim.horizon = 10'000'000;
            sim.seed = opt.seed;
            sim.stream = 0x9100 + k;
            sim.workers = opt.workers;
            L.push_back(estimate_L(hs, i, j, xs[k], b, sim));
            if (L.back().n_truncated > 0) r.failures.push_back("x=" + detail::fmt(xs[k]) + ": truncated paths");
        }
        const double L0 = L[0].value;
        std::ostringstream obs;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            const double x = xs[k];
            const double e = std::exp(-rr * (b - x));
            const double lower = run_length_lower(x, b, rr, omega.value, gap, L0);
            const double se = std::sqrt(L[k].se * L[k].se + std::pow((1.0 - e) * L[0].se, 2) +
                                        std::pow(e / gap * omega.se, 2));
            obs << "x=" << x << ": " << detail::fmt(L[k].value) << " vs " << detail::fmt(lower) << "; ";
            if (L[k].value < lower - 3.0 * se)
                r.failures.push_back("x=" + detail::fmt(x) + ": L=" + detail::fmt(L[k].value) + " < l=" +
                                     detail::fmt(lower) + " - 3SE");
            if (k > 0 && L[k].value > L[k - 1].value + 3.0 * std::hypot(L[k].se, L[k - 1].se))
                r.failures.push_back("x=" + detail::fmt(x) + ": L increases");
        }
        r.passed = r.failures.empty();
        r.observed = obs.str();
        r.expected = "L(x) >= l(x) and non-increasing in x (i=2, j=1, b=5, r=" + detail::fmt(rr) + ", omega=" +
                     detail::fmt(omega.value, 4) + ")";
        r.tolerance = "3 SE";
        return r;
    });
}

// 10. One-step kernel dominance.
inline CheckResult kernel_monotonicity(const CheckOptions& opt) {
    return detail::timed(10, "stochastic monotonicity of the kernel", [&] {
        CheckResult r;
        const auto hs = build_single_fault(gaussian_channels(3));
        const std::vector<std::pair<double, double>> pairs{{0.0, 1.0}, {1.0, 2.0}, {0.0, 3.0}};
        const auto rep = monotone_kernel_check(hs, 0, pairs, 100'000, opt.seed);
        std::ostringstream obs;
        for (const auto& k : rep) {
            obs << "(" << k.x << "," << k.x_prime << "): " << detail::fmt(k.violation, 3) << "; ";
            if (!k.holds)
                r.failures.push_back("(" + detail::fmt(k.x) + "," + detail::fmt(k.x_prime) + ") violation " +
                                     detail::fmt(k.violation) + " > " + detail::fmt(k.band));
        }
        r.passed = r.failures.empty();
        r.observed = obs.str();
        r.expected = "sup_y [F_x'(y) - F_x(y)] <= DKW band, P(Y(1) >= 0) = 1";
        r.tolerance = "band " + detail::fmt(rep.front().band, 3) + " (two 3-sigma DKW half-widths)";
        return r;
    });
}

// 11. Byte-identical study output for any worker count.
inline CheckResult determinism(const CheckOptions& opt) {
    return detail::timed(11, "determinism", [&] {
        CheckResult r;
        StudyConfig cfg = figure_study("fig2");
        cfg.sim.seed = opt.seed;
        std::vector<std::string> outputs;
        for (std::size_t w : {std::size_t{1}, std::size_t{4}, std::size_t{1}}) {
            cfg.sim.workers = w;
            outputs.push_back(results_csv(run_study(cfg)));
        }
        r.passed = outputs[0] == outputs[1] && outputs[0] == outputs[2];
        r.observed = std::to_string(outputs[0].size()) + " bytes; workers 1 vs 4 " +
                     (outputs[0] == outputs[1] ? "identical" : "differ") + ", rerun " +
                     (outputs[0] == outputs[2] ? "identical" : "differs");
        r.expected = "identical CSV bytes";
        r.tolerance = "exact";
        return r;
    });
}

using CheckFn = std::function<CheckResult(const CheckOptions&)>;

inline const std::vector<std::pair<int, CheckFn>>& all_checks() {
    static const std::vector<std::pair<int, CheckFn>> list{
        {1, engine_equivalence}, {2, fig2_reproduction},  {3, fig4_ordering},     {4, arl_bound},
        {5, delay_bounds},       {6, root_values},        {7, enumeration_oracle}, {8, prechange_tail},
        {9, run_length_bound},  {10, kernel_monotonicity}, {11, determinism}};
    return list;
}

/// Check ids per verify suite; empty for an unknown suite.
inline std::vector<int> suite(std::string_view name) {
    if (name == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
    if (name == "engine") return {1, 10};
    if (name == "bounds") return {5, 6, 9};
    if (name == "oracle") return {7};
    if (name == "tail" || name == "condition34") return {8};
    if (name == "studies") return {2, 3, 4, 11};
    return {};
}

inline std::string report_line(const CheckResult& r) {
    std::ostringstream os;
    os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.observed
       << " | expected " << r.expected << " | tolerance " << r.tolerance << " | " << detail::fmt(r.seconds, 3)
       << " s";
    return os.str();
}

}  // namespace mincusum::checks
