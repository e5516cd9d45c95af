// Three sensors, one of which may shift from N(0,1) to N(1,1). Runs the
// detector on one path, then estimates the misidentification rate and
// prints the matching bound.

#include <iostream>

#include "mincusum/mincusum.hpp"

int main() {
    using namespace mincusum;
    const HypothesisSet hs = build_single_fault(gaussian_channels(3));
    const double alpha = 0.01;
    const double b = b_alpha(alpha, hs.size());

    RandomStream rng(derive_seed(42, 0, 0));
    const auto one = simulate_path(hs, 1, 50, b, rng, 10'000);
    std::cout << "b = " << b << ": stopped at n = " << one.stop_time << ", decided " << hs.label(one.decision)
              << " (truth " << hs.label(1) << ", change after n = 50)\n";

    ExperimentConfig cfg{1, 50, {b}, {}};
    cfg.sim.paths = 20'000;
    cfg.sim.seed = 42;
    const Estimate misid = estimate_conditional_misid(hs, cfg).front();
    const ConstantBound bound = single_fault_bound(hs, b);  // C b e^-b with C = 6
    std::cout << "P(wrong | no false alarm) = " << misid.value << " +/- " << misid.se << "  bound "
              << bound.value << "\n";

    const KLMatrix kl = kl_matrix(hs);
    std::cout << "delay ~ " << delay_approximation(alpha, kl.I(1)) << " steps, ARL >= " << arl_lower_bound(b, hs.size())
              << "\n";
}
