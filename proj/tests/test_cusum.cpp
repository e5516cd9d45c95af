#include <catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mincusum/cusum.hpp"

using namespace mincusum;
using Catch::Approx;

namespace {

using Path = std::vector<std::vector<double>>;

Path draw_path(const HypothesisSet& hs, std::optional<std::size_t> j, std::size_t n, RandomStream& rng) {
    Path p(n, std::vector<double>(hs.dimension()));
    for (auto& x : p) hs.sample(j, rng, x);
    return p;
}

}  // namespace

TEST_CASE("one update step", "[cusum]") {
    const auto hs = build_single_fault(gaussian_channels(3));
    auto s = update(initial_state(hs), std::vector<double>{2.0, 0.0, 0.0}, hs);
    CHECK(s.n == 1);
    CHECK(s.y == std::vector<double>{1.5, 0.0, 0.0});

    CusumState t{4, {0.2, 0.0, 0.0}};
    t = update(t, std::vector<double>{-3.0, 0.0, 0.0}, hs);
    CHECK(t.y == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(t.n == 5);

    CHECK_THROWS_AS(update(initial_state(hs), std::vector<double>{1.0}, hs), std::invalid_argument);
}

TEST_CASE("direct definition on short paths", "[cusum]") {
    const auto hs = build_single_fault(gaussian_channels(2));
    const Path one{{3.0, 0.0}};
    CHECK(cusum_direct(one, hs, 0) == std::vector<double>{2.5});
    const Path neg{{-1.0, 0.0}};
    CHECK(cusum_direct(neg, hs, 0) == std::vector<double>{0.0});
    // x = 1/2 makes every increment zero
    const Path flat(10, std::vector<double>{0.5, 0.5});
    for (double v : cusum_direct(flat, hs, 0)) CHECK(v == 0.0);
    CHECK_THROWS_AS(cusum_direct(Path{}, hs, 0), std::invalid_argument);
}

TEST_CASE("recursion equals the direct definition", "[cusum][property]") {
    RandomStream rng(99);
    const auto gauss = build_concurrent_fault(gaussian_channels(3));
    const auto bern = build_concurrent_fault(bernoulli_channels(3, 0.2, 0.8));
    for (const auto* hs : {&gauss, &bern}) {
        for (int rep = 0; rep < 20; ++rep) {
            const Path p = draw_path(*hs, rep % 3 ? std::optional<std::size_t>(rep % hs->size()) : std::nullopt, 100,
                                     rng);
            CusumState s = initial_state(*hs);
            std::vector<std::vector<double>> rec;
            for (const auto& x : p) {
                s = update(s, x, *hs);
                rec.push_back(s.y);
            }
            for (std::size_t i = 0; i < hs->size(); ++i) {
                const auto direct = cusum_direct(p, *hs, i);
                for (std::size_t n = 0; n < p.size(); ++n) {
                    if (hs->discrete())
                        CHECK(rec[n][i] == Approx(direct[n]).margin(1e-12));
                    else
                        CHECK(std::abs(rec[n][i] - direct[n]) <= 1e-12);
                    CHECK(rec[n][i] >= 0.0);
                }
            }
        }
    }
}

TEST_CASE("run stops at the first crossing", "[cusum][run]") {
    const auto hs = build_single_fault(gaussian_channels(3));
    // l_1 = x_1 - 1/2 = b + 1
    const double b = 4.0;
    const Path p{{b + 1.5, 0.0, 0.0}, {0.0, 0.0, 0.0}};
    const auto r = run(hs, b, PathSource(p), 10);
    CHECK(r.stop_time == 1);
    CHECK(r.decision == 0);
    CHECK_FALSE(r.truncated);

    const Path quiet(5, std::vector<double>{0.0, 0.0, 0.0});
    const auto t = run(hs, b, PathSource(quiet), 5);
    CHECK(t.truncated);
    CHECK(t.stop_time == 5);
    CHECK(t.decision == DiagnosisResult::npos);
    CHECK_THROWS_AS(run(hs, b, PathSource(quiet), 6), std::out_of_range);
    CHECK_THROWS_AS(run(hs, 0.0, PathSource(quiet), 5), std::invalid_argument);
}

TEST_CASE("ties go to the smallest canonical index", "[cusum][run]") {
    const auto hs = build_single_fault(bernoulli_channels(2, 0.2, 0.8));
    // both channels fire: l_1 = l_2 = log 4 each step
    const Path p(3, std::vector<double>{1.0, 1.0});
    const auto r = run(hs, 2.0, PathSource(p), 3);
    CHECK(r.stop_time == 2);
    CHECK(r.decision == 0);
    CHECK(argmax_canonical(std::vector<double>{1.0, 3.0, 3.0}) == 1);
}

TEST_CASE("decision depends only on data up to the stop", "[cusum][run][property]") {
    RandomStream rng(3);
    const auto hs = build_concurrent_fault(gaussian_channels(3));
    for (int rep = 0; rep < 50; ++rep) {
        Path p = draw_path(hs, 3, 400, rng);
        const auto r = run(hs, 3.0, PathSource(p), p.size(), RunOptions{0, true});
        REQUIRE_FALSE(r.truncated);
        for (std::size_t n = r.stop_time; n < p.size(); ++n)
            for (auto& v : p[n]) v = -v * 7.0;
        const auto again = run(hs, 3.0, PathSource(p), p.size());
        CHECK(again.stop_time == r.stop_time);
        CHECK(again.decision == r.decision);
        CHECK(r.trace.size() == r.stop_time);
        CHECK(r.trace.back()[r.decision] >= 3.0);
        CHECK(r.stop_time >= 1);
    }
}

TEST_CASE("initialized runs", "[cusum][run]") {
    const auto hs = build_single_fault(gaussian_channels(2));
    const double b = 3.0;
    const Path up{{0.6, 0.0}};
    auto r = run_initialized(hs, b, PathSource(up), 0, b, 1);
    CHECK(r.stop_time == 1);  // l_1 = 0.1 >= 0
    const Path down{{0.0, 0.0}, {0.0, 0.0}};
    r = run_initialized(hs, b, PathSource(down), 0, b, 2);
    CHECK(r.truncated);  // first l is -0.5, no crossing at n = 0
    CHECK_THROWS_AS(run_initialized(hs, b, PathSource(down), 0, b + 0.1, 2), std::invalid_argument);
    CHECK_THROWS_AS(run_initialized(hs, b, PathSource(down), 0, -0.1, 2), std::invalid_argument);

    RandomStream rng(8);
    const Path p = draw_path(hs, 1, 200, rng);
    const auto a = run(hs, b, PathSource(p), p.size());
    const auto z = run_initialized(hs, b, PathSource(p), 1, 0.0, p.size());
    CHECK(a.stop_time == z.stop_time);
    CHECK(a.decision == z.decision);
}

TEST_CASE("engine works with any conforming model", "[cusum]") {
    // scalar model: two hypotheses with l = +x and -x
    struct Mirror {
        std::vector<int> t{0};
        std::size_t size() const { return 2; }
        std::size_t dimension() const { return 1; }
        const std::vector<int>& terms() const { return t; }
        void llr_all(std::span<const double> x, std::span<double> out, std::span<double>) const {
            out[0] = x[0];
            out[1] = -x[0];
        }
    };
    Mirror m;
    MinCusum<Mirror> engine(m, 2.0);
    CHECK_FALSE(engine.step(std::vector<double>{-1.0}));
    CHECK(engine.step(std::vector<double>{-1.5}));
    CHECK(engine.decision() == 1);
    CHECK(engine.state().y[1] == 2.5);
}

TEST_CASE("seeded sources replay identically", "[cusum][run]") {
    const auto hs = build_concurrent_fault(gaussian_channels(3));
    for (std::uint64_t seed : {1ULL, 2ULL, 99ULL}) {
        RandomStream a(seed), b(seed);
        const auto ra = run(hs, 5.0, ChangeSource(hs, 2, 30, a), 10'000, RunOptions{30});
        const auto rb = run(hs, 5.0, ChangeSource(hs, 2, 30, b), 10'000, RunOptions{30});
        CHECK(ra.stop_time == rb.stop_time);
        CHECK(ra.decision == rb.decision);
        CHECK(ra.survived_change == (ra.stop_time > 30));
    }
}
