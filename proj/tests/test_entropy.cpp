#include <catch2/catch_amalgamated.hpp>

#include "oneshot/checks.hpp"
#include "oneshot/entropy.hpp"
#include "oracles.hpp"

using namespace oneshot;

namespace {

const SystemLayout kQubit = SystemLayout::single("A", 2);
const SystemLayout kPair({Factor{"A", 2}, Factor{"B", 2}});

DensityOperator mes_density(std::size_t d) {
    return max_entangled(d, "A", "B").to_density();
}

DensityOperator product_state(const DensityOperator& a, const DensityOperator& b) {
    SystemLayout lay({Factor{"A", a.dim()}, Factor{"B", b.dim()}});
    return DensityOperator(DensityOperator::unchecked_t{}, tensor(a.matrix(), b.matrix()), lay);
}

}  // namespace

TEST_CASE("von Neumann entropy basics") {
    REQUIRE(von_neumann(basis_state(kQubit, 0).to_density()) == Catch::Approx(0.0).margin(1e-12));
    for (std::size_t d : {2, 3, 4})
        REQUIRE(von_neumann(maximally_mixed(SystemLayout::single("A", d))) ==
                Catch::Approx(std::log2(double(d))).margin(1e-12));
    DensityOperator half(ComplexMatrix::diag({0.5, 0.5, 0.0, 0.0}), SystemLayout::single("A", 4));
    REQUIRE(von_neumann(half) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("mutual information basics") {
    Rng rng(61);
    DensityOperator prod = product_state(random_density(kQubit, rng),
                                         random_density(SystemLayout::single("B", 2), rng));
    REQUIRE(mutual_information(prod, {"A"}, {"B"}) == Catch::Approx(0.0).margin(1e-9));

    for (std::size_t d : {2, 3})
        REQUIRE(mutual_information(mes_density(d), {"A"}, {"B"}) ==
                Catch::Approx(2.0 * std::log2(double(d))).margin(1e-9));

    ComplexMatrix cc(4, 4);
    cc(0, 0) = 0.5;
    cc(3, 3) = 0.5;
    REQUIRE(mutual_information(DensityOperator(cc, kPair), {"A"}, {"B"}) ==
            Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("max-relative entropy") {
    Rng rng(62);
    DensityOperator rho = random_density(SystemLayout::single("A", 3), rng);
    REQUIRE(d_max(rho, rho).value == Catch::Approx(0.0).margin(1e-7));

    DensityOperator tau = maximally_mixed(SystemLayout::single("A", 3));
    REQUIRE(d_max(tau, tau).value == Catch::Approx(0.0).margin(1e-9));

    for (std::size_t d : {2, 4}) {
        SystemLayout lay = SystemLayout::single("A", d);
        DensityOperator pure = basis_state(lay, 0).to_density();
        DmaxResult r = d_max(pure, maximally_mixed(lay));
        REQUIRE(r.finite);
        REQUIRE(r.value == Catch::Approx(std::log2(double(d))).margin(1e-7));
    }

    // support violation returns the +infinity sentinel
    DensityOperator p0(ComplexMatrix::diag({1.0, 0.0}), kQubit);
    DensityOperator p1(ComplexMatrix::diag({0.0, 1.0}), kQubit);
    DmaxResult r = d_max(p1, p0);
    REQUIRE_FALSE(r.finite);
    REQUIRE(std::isinf(r.value));
}

TEST_CASE("conditional min-entropy: product, entangled, trivial") {
    Rng rng(63);
    // tau_A (x) sigma_B has H_min(A|B) = log d
    DensityOperator sigma = random_density(SystemLayout::single("B", 2), rng);
    DensityOperator prod = product_state(maximally_mixed(kQubit), sigma);
    EntropyResult r = h_min_cond(prod, {"A"}, {"B"});
    REQUIRE(r.ok());
    REQUIRE(r.value == Catch::Approx(1.0).margin(1e-7));

    for (std::size_t d : {2, 3}) {
        EntropyResult m = h_min_cond(mes_density(d), {"A"}, {"B"});
        REQUIRE(m.ok());
        REQUIRE(m.value == Catch::Approx(-std::log2(double(d))).margin(1e-7));
    }

    EntropyResult t = h_min_cond(basis_state(kQubit, 1).to_density(), {"A"}, {});
    REQUIRE(t.value == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(t.method == EntropyMethod::closed_form);
}

TEST_CASE("unconditional max-entropy") {
    REQUIRE(h_max_uncond(basis_state(kQubit, 0).to_density()) == Catch::Approx(0.0).margin(1e-9));
    for (std::size_t d : {2, 3})
        REQUIRE(h_max_uncond(maximally_mixed(SystemLayout::single("A", d))) ==
                Catch::Approx(std::log2(double(d))).margin(1e-9));
    DensityOperator rho(ComplexMatrix::diag({0.9, 0.1}), kQubit);
    // 2 log2(sqrt 0.9 + sqrt 0.1) = log2(1.6)
    REQUIRE(h_max_uncond(rho) == Catch::Approx(std::log2(1.6)).margin(1e-10));
}

TEST_CASE("conditional max-entropy: closed-form anchors") {
    for (std::size_t d : {2, 3}) {
        EntropyResult r = h_max_cond(mes_density(d), {"A"}, {"B"});
        REQUIRE(r.ok());
        REQUIRE(r.value == Catch::Approx(-std::log2(double(d))).margin(1e-6));
    }

    Rng rng(64);
    DensityOperator rho_a = random_density(kQubit, rng);
    DensityOperator sig_b = random_density(SystemLayout::single("B", 2), rng);
    EntropyResult r = h_max_cond(product_state(rho_a, sig_b), {"A"}, {"B"});
    REQUIRE(r.value == Catch::Approx(h_max_uncond(rho_a)).margin(1e-6));

    EntropyResult t = h_max_cond(basis_state(kQubit, 0).to_density(), {"A"}, {});
    REQUIRE(t.value == Catch::Approx(0.0).margin(1e-6));
}

TEST_CASE("binary entropy") {
    REQUIRE(binary_entropy(0.0) == 0.0);
    REQUIRE(binary_entropy(1.0) == 0.0);
    REQUIRE(binary_entropy(0.5) == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(binary_entropy(0.11) == Catch::Approx(0.499915958164528).margin(1e-12));
    REQUIRE(binary_entropy(0.3) == Catch::Approx(binary_entropy(0.7)).margin(1e-15));
    REQUIRE_THROWS_AS(binary_entropy(1.2), std::domain_error);
}

TEST_CASE("smoothed min-entropy: zero radius and monotonicity") {
    Rng rng(65);
    DensityOperator rho = random_density(kPair, rng);
    EntropyResult plain = h_min_cond(rho, {"A"}, {"B"});
    EntropyResult sm0 = h_min_smooth(rho, {"A"}, {"B"}, 0.0);
    REQUIRE(std::abs(sm0.value - plain.value) <= 1e-6);

    // radii below the documented floor fall back to the unsmoothed program
    EntropyResult floored = h_min_smooth(rho, {"A"}, {"B"}, 2e-4);
    REQUIRE(floored.ok());
    REQUIRE(floored.value == plain.value);
    REQUIRE(floored.smoothing_eps == 2e-4);

    // above the floor the smoothed program itself runs and stays close
    EntropyResult tiny = h_min_smooth(rho, {"A"}, {"B"}, 1e-2);
    REQUIRE(tiny.ok());
    REQUIRE(tiny.value >= plain.value - 1e-6);
    REQUIRE(std::abs(tiny.value - plain.value) <= 0.05);

    double prev = plain.value;
    for (double eps : {0.05, 0.1, 0.2, 0.4}) {
        EntropyResult r = h_min_smooth(rho, {"A"}, {"B"}, eps);
        REQUIRE(r.ok());
        REQUIRE(r.value >= prev - 1e-6);
        prev = r.value;
    }

    EntropyResult mes = h_min_smooth(mes_density(2), {"A"}, {"B"}, 0.1);
    REQUIRE(mes.value >= -1.0 - 1e-9);

    EntropyResult bad = h_min_smooth(rho, {"A"}, {"B"}, 1.5);
    REQUIRE(bad.validity == EntropyValidity::smoothing_out_of_range);
}

TEST_CASE("smoothed min-entropy agrees with the derivative-free oracle") {
    Rng rng(66);
    DensityOperator rho = random_density(kPair, rng);
    const double eps = 0.1;
    EntropyResult sdp_val = h_min_smooth(rho, {"A"}, {"B"}, eps);
    REQUIRE(sdp_val.ok());
    double oracle = test_oracle::brute_force_h_min_smooth(rho, {"A"}, {"B"}, eps, 32, 400, 7);
    // the oracle explores feasible candidates only: it can undershoot but
    // never exceed the optimum
    REQUIRE(oracle <= sdp_val.value + 1e-6);
    REQUIRE(std::abs(oracle - sdp_val.value) <= 1e-3);
}

TEST_CASE("smoothed max-entropy: duality anchors") {
    Rng rng(67);
    DensityOperator rho = random_density(kPair, rng);
    EntropyResult sm0 = h_max_smooth(rho, {"A"}, {"B"}, 0.0);
    EntropyResult plain = h_max_cond(rho, {"A"}, {"B"});
    REQUIRE(std::abs(sm0.value - plain.value) <= 1e-6);

    // pure bipartite states: H_min^eps(A|B) = -H_max^eps(A), both sides
    // computed through different programs
    PureState psi = haar_random_pure(kPair, rng);
    for (double eps : {0.0, 0.1}) {
        EntropyResult lhs = h_min_smooth(psi.to_density(), {"A"}, {"B"}, eps);
        EntropyResult rhs = h_max_smooth(psi.marginal({"A"}), {"A"}, {}, eps);
        REQUIRE(lhs.ok());
        REQUIRE(rhs.ok());
        REQUIRE(std::abs(lhs.value + rhs.value) <= 1e-5);
    }

    // monotone nonincreasing in eps
    double prev = plain.value;
    for (double eps : {0.05, 0.1, 0.2}) {
        EntropyResult r = h_max_smooth(rho, {"A"}, {"B"}, eps);
        REQUIRE(r.ok());
        REQUIRE(r.value <= prev + 1e-6);
        prev = r.value;
    }
}

TEST_CASE("duality relation on a small battery") {
    CheckConfig cfg;
    cfg.seed = 11;
    cfg.duality_states = 6;
    CheckResult r = check_duality(cfg);
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("chain rule and conditioning on a small battery") {
    CheckConfig cfg;
    cfg.seed = 12;
    cfg.chain_states = 5;
    cfg.conditioning_states = 5;
    CheckResult chain = check_chain_rule(cfg);
    INFO(chain.detail);
    REQUIRE(chain.pass);
    CheckResult cond = check_conditioning_monotone(cfg);
    INFO(cond.detail);
    REQUIRE(cond.pass);
}

TEST_CASE("envelope, product ball, superadditivity on a small battery") {
    CheckConfig cfg;
    cfg.seed = 13;
    cfg.envelope_states = 5;
    cfg.product_ball_states = 5;
    cfg.superadditivity_pairs = 3;
    CheckResult env = check_entropy_envelope(cfg);
    INFO(env.detail);
    REQUIRE(env.pass);
    CheckResult ball = check_smoothing_product_ball(cfg);
    INFO(ball.detail);
    REQUIRE(ball.pass);
    CheckResult sup = check_superadditivity(cfg);
    INFO(sup.detail);
    REQUIRE(sup.pass);
}

TEST_CASE("local isometries leave entropies unchanged") {
    CheckConfig cfg;
    cfg.seed = 14;
    cfg.isometry_states = 3;
    CheckResult r = check_isometry_invariance(cfg);
    INFO(r.detail);
    REQUIRE(r.pass);
}

TEST_CASE("entropy split validation") {
    Rng rng(68);
    DensityOperator rho = random_density(kPair, rng);
    REQUIRE_THROWS_AS(h_min_cond(rho, {"A"}, {"Z"}), std::exception);
    REQUIRE_THROWS_AS(mutual_information(rho, {"A"}, {}), std::invalid_argument);
}
