#pragma once

#include <sstream>

#include "oneshot/channels.hpp"
#include "oneshot/entropy.hpp"

namespace oneshot {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CheckConfig {
    std::uint64_t seed = 1;
    int duality_states = 30;
    int chain_states = 20;
    int product_ball_states = 20;
    int conditioning_states = 20;
    int envelope_states = 20;
    int superadditivity_pairs = 10;
    int isometry_states = 5;
    int favg_channels = 50;
    std::size_t favg_samples = 10000;
};

namespace detail_checks {

inline DensityOperator random_tripartite(Rng& rng, std::size_t dc = 2) {
    SystemLayout lay({Factor{"A", 2}, Factor{"B", 2}, Factor{"C", dc}});
    return random_density(lay, rng);
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace detail_checks

/// |H_max^eps(A|C) + H_min^eps(A|B)| on random tripartite pure states.
inline CheckResult check_duality(const CheckConfig& cfg) {
    Rng rng(cfg.seed);
    double worst = 0.0;
    for (int t = 0; t < cfg.duality_states; ++t) {
        std::size_t dc = t % 2 == 0 ? 2 : 4;
        SystemLayout lay({Factor{"A", 2}, Factor{"B", 2}, Factor{"C", dc}});
        PureState psi = haar_random_pure(lay, rng);
        DensityOperator full = psi.to_density();
        for (double eps : {0.0, 0.05, 0.1}) {
            EntropyResult hmax = h_max_smooth(full.restricted_to({"A", "C"}), {"A"}, {"C"}, eps);
            EntropyResult hmin = h_min_smooth(full.restricted_to({"A", "B"}), {"A"}, {"B"}, eps);
            if (!hmax.ok() || !hmin.ok()) return {"duality_relation", false, "solver failure"};
            worst = std::max(worst, std::abs(hmax.value + hmin.value));
        }
    }
    return {"duality_relation", worst <= 1e-5, "max |H_max(A|C)+H_min(A|B)| = " + detail_checks::fmt(worst)};
}

/// H_min^{e+2e'+e''}(AB|C) >= H_min^{e'}(A|BC) + H_min^{e''}(B|C) - log(2/e^2).
inline CheckResult check_chain_rule(const CheckConfig& cfg) {
    Rng rng(cfg.seed + 1);
    const double e = 0.2, ep = 0.05, epp = 0.05;
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < cfg.chain_states; ++t) {
        DensityOperator rho = detail_checks::random_tripartite(rng);
        EntropyResult lhs = h_min_smooth(rho, {"A", "B"}, {"C"}, e + 2 * ep + epp);
        EntropyResult r1 = h_min_smooth(rho, {"A"}, {"B", "C"}, ep);
        EntropyResult r2 = h_min_smooth(rho.restricted_to({"B", "C"}), {"B"}, {"C"}, epp);
        if (!lhs.ok() || !r1.ok() || !r2.ok()) return {"chain_rule", false, "solver failure"};
        double margin = lhs.value - (r1.value + r2.value - std::log2(2.0 / (e * e)));
        worst = std::min(worst, margin);
    }
    return {"chain_rule", worst >= -1e-5, "min margin = " + detail_checks::fmt(worst)};
}

/// States near a product: H_min^{d+e}(A|B)_rho >= H_min^d(A)_sigma.
inline CheckResult check_smoothing_product_ball(const CheckConfig& cfg) {
    Rng rng(cfg.seed + 2);
    const double delta = 0.1;
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < cfg.product_ball_states; ++t) {
        SystemLayout la = SystemLayout::single("A", 2);
        SystemLayout lb = SystemLayout::single("B", 2);
        DensityOperator sig = random_density(la, rng);
        DensityOperator rhoB = random_density(lb, rng);
        SystemLayout lab({Factor{"A", 2}, Factor{"B", 2}});
        ComplexMatrix prod = tensor(sig.matrix(), rhoB.matrix());
        DensityOperator noise = random_density(lab, rng);
        double w = 0.05 * rng.uniform01();
        ComplexMatrix mixed = prod;
        mixed *= complexd(1.0 - w);
        mixed += noise.matrix() * complexd(w);
        DensityOperator rho(mixed, lab);
        DensityOperator prod_op(DensityOperator::unchecked_t{}, prod, lab);
        double eps = purified_distance_c(rho, prod_op) * (1.0 + 1e-9) + 1e-12;
        if (delta + eps >= 1.0) continue;
        EntropyResult lhs = h_min_smooth(rho, {"A"}, {"B"}, delta + eps);
        EntropyResult rhs = h_min_smooth(sig, {"A"}, {}, delta);
        if (!lhs.ok() || !rhs.ok()) return {"smoothing_product_ball", false, "solver failure"};
        worst = std::min(worst, lhs.value - rhs.value);
    }
    return {"smoothing_product_ball", worst >= -1e-5, "min margin = " + detail_checks::fmt(worst)};
}

/// Discarding conditioning systems cannot help: H^eps(A|BC) <= H^eps(A|B).
inline CheckResult check_conditioning_monotone(const CheckConfig& cfg) {
    Rng rng(cfg.seed + 3);
    const double eps = 0.1;
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < cfg.conditioning_states; ++t) {
        DensityOperator rho = detail_checks::random_tripartite(rng);
        EntropyResult minABC = h_min_smooth(rho, {"A"}, {"B", "C"}, eps);
        EntropyResult minAB = h_min_smooth(rho.restricted_to({"A", "B"}), {"A"}, {"B"}, eps);
        EntropyResult maxABC = h_max_smooth(rho, {"A"}, {"B", "C"}, eps);
        EntropyResult maxAB = h_max_smooth(rho.restricted_to({"A", "B"}), {"A"}, {"B"}, eps);
        if (!minABC.ok() || !minAB.ok() || !maxABC.ok() || !maxAB.ok())
            return {"conditioning_monotone", false, "solver failure"};
        worst = std::min(worst, minAB.value - minABC.value);
        worst = std::min(worst, maxAB.value - maxABC.value);
    }
    return {"conditioning_monotone", worst >= -1e-5, "min margin = " + detail_checks::fmt(worst)};
}

/// Smoothed entropies stay in the envelope H +/- (8 eps log|A| + 2 h(2 eps)).
inline CheckResult check_entropy_envelope(const CheckConfig& cfg) {
    Rng rng(cfg.seed + 4);
    const double eps = 0.1;
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < cfg.envelope_states; ++t) {
        SystemLayout lab({Factor{"A", 2}, Factor{"B", 2}});
        DensityOperator rho = random_density(lab, rng);
        double h = conditional_von_neumann(rho, {"A"}, {"B"});
        double width = 8.0 * eps * 1.0 + 2.0 * binary_entropy(2.0 * eps);
        EntropyResult hmin = h_min_smooth(rho, {"A"}, {"B"}, eps);
        EntropyResult hmax = h_max_smooth(rho, {"A"}, {"B"}, eps);
        if (!hmin.ok() || !hmax.ok()) return {"entropy_envelope", false, "solver failure"};
        worst = std::min(worst, h + width - hmin.value);
        worst = std::min(worst, hmax.value - (h - width));
    }
    return {"entropy_envelope", worst >= -1e-5, "min margin = " + detail_checks::fmt(worst)};
}

/// H_min^{2eps}(AA'|BB') >= H_min^eps(A|B) + H_min^eps(A'|B') on product pairs.
inline CheckResult check_superadditivity(const CheckConfig& cfg) {
    Rng rng(cfg.seed + 5);
    const double eps = 0.1;
    double worst = std::numeric_limits<double>::infinity();
    for (int t = 0; t < cfg.superadditivity_pairs; ++t) {
        SystemLayout lab({Factor{"A", 2}, Factor{"B", 2}});
        DensityOperator r1 = random_density(lab, rng);
        DensityOperator r2 = random_density(lab, rng);
        SystemLayout big({Factor{"A", 2}, Factor{"B", 2}, Factor{"A2", 2}, Factor{"B2", 2}});
        DensityOperator joint(DensityOperator::unchecked_t{}, tensor(r1.matrix(), r2.matrix()),
                              big);
        EntropyResult lhs = h_min_smooth(joint, {"A", "A2"}, {"B", "B2"}, 2 * eps);
        EntropyResult a = h_min_smooth(r1, {"A"}, {"B"}, eps);
        EntropyResult b = h_min_smooth(r2, {"A"}, {"B"}, eps);
        if (!lhs.ok() || !a.ok() || !b.ok()) return {"superadditivity", false, "solver failure"};
        worst = std::min(worst, lhs.value - (a.value + b.value));
    }
    return {"superadditivity", worst >= -1e-5, "min margin = " + detail_checks::fmt(worst)};
}

/// Local isometries leave conditional entropies unchanged.
inline CheckResult check_isometry_invariance(const CheckConfig& cfg) {
    Rng rng(cfg.seed + 6);
    double worst = 0.0;
    for (int t = 0; t < cfg.isometry_states; ++t) {
        SystemLayout lab({Factor{"A", 2}, Factor{"B", 2}});
        DensityOperator rho = random_density(lab, rng);
        ComplexMatrix ua = haar_random_unitary(3, rng);
        ComplexMatrix vb = haar_random_unitary(3, rng);
        ComplexMatrix iso_a(3, 2), iso_b(3, 2);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 2; ++j) {
                iso_a(i, j) = ua(i, j);
                iso_b(i, j) = vb(i, j);
            }
        ComplexMatrix big = tensor(iso_a, iso_b);
        ComplexMatrix omega = big * rho.matrix() * big.adjoint();
        SystemLayout lcd({Factor{"A", 3}, Factor{"B", 3}});
        DensityOperator omega_op(DensityOperator::unchecked_t{}, omega, lcd);
        for (double eps : {0.0, 0.1}) {
            EntropyResult h1 = h_min_smooth(rho, {"A"}, {"B"}, eps);
            EntropyResult h2 = h_min_smooth(omega_op, {"A"}, {"B"}, eps);
            EntropyResult m1 = h_max_smooth(rho, {"A"}, {"B"}, eps);
            EntropyResult m2 = h_max_smooth(omega_op, {"A"}, {"B"}, eps);
            if (!h1.ok() || !h2.ok() || !m1.ok() || !m2.ok())
                return {"isometry_invariance", false, "solver failure"};
            worst = std::max(worst, std::abs(h1.value - h2.value));
            worst = std::max(worst, std::abs(m1.value - m2.value));
        }
    }
    return {"isometry_invariance", worst <= 1e-6, "max deviation = " + detail_checks::fmt(worst)};
}

/// Monte-Carlo average fidelity against (m F_e + 1)/(m + 1).
inline CheckResult check_average_fidelity_identity(const CheckConfig& cfg) {
    Rng rng(cfg.seed + 7);
    double worst_sigmas = 0.0;
    for (int t = 0; t < cfg.favg_channels; ++t) {
        std::size_t m = 2 + (t % 3);
        KrausChannel ch = random_channel(m, m, 2 + (t % 3), rng);
        DensityOperator tau = maximally_mixed(SystemLayout::single("A", m));
        double fe = entanglement_fidelity(tau, ch);
        double md = static_cast<double>(m);
        double predicted = (md * fe + 1.0) / (md + 1.0);
        MonteCarloEstimate est = average_fidelity_mc(ch, cfg.favg_samples, rng.raw());
        double sigmas = std::abs(est.mean - predicted) / std::max(est.std_error, 1e-12);
        worst_sigmas = std::max(worst_sigmas, sigmas);
        if (sigmas > 3.0)
            return {"average_fidelity_identity", false,
                    "deviation " + detail_checks::fmt(sigmas) + " sigma"};
    }
    return {"average_fidelity_identity", true,
            "max deviation = " + detail_checks::fmt(worst_sigmas) + " sigma"};
}

inline std::vector<CheckResult> run_property_suite(const CheckConfig& cfg) {
    return {check_isometry_invariance(cfg), check_chain_rule(cfg),
            check_smoothing_product_ball(cfg), check_conditioning_monotone(cfg),
            check_duality(cfg), check_entropy_envelope(cfg), check_superadditivity(cfg),
            check_average_fidelity_identity(cfg)};
}

}  // namespace oneshot
