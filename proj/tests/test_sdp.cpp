#include <catch2/catch_amalgamated.hpp>

#include "oneshot/hermitian_sdp.hpp"
#include "oneshot/states.hpp"

using namespace oneshot;
using sdp::HermitianSdpBuilder;
using sdp::SolveStatus;

#include "sdp_programs.hpp"

using namespace oneshot::test_programs;


TEST_CASE("dominance: X must cover a PSD matrix") {
    ComplexMatrix h = ComplexMatrix::diag({0.7, 0.3});
    sdp::SdpSolution sol = solve_dominance(h);
    REQUIRE(sol.status == SolveStatus::optimal);
    REQUIRE(sol.primal_value == Catch::Approx(1.0).margin(1e-7));
    REQUIRE(sol.gap <= 1e-7);
}

TEST_CASE("dominance: only the positive part contributes") {
    // brute force over X = V diag(x) V^dag with x >= max(lambda, 0)
    ComplexMatrix u{{std::sqrt(0.5), std::sqrt(0.5)}, {std::sqrt(0.5), -std::sqrt(0.5)}};
    ComplexMatrix lam = ComplexMatrix::diag({-1.0, 2.0});
    ComplexMatrix h = u * lam * u.adjoint();
    double brute = 0.0;
    for (double v : {-1.0, 2.0}) brute += std::max(v, 0.0);
    sdp::SdpSolution sol = solve_dominance(h);
    REQUIRE(sol.status == SolveStatus::optimal);
    REQUIRE(sol.primal_value == Catch::Approx(brute).margin(1e-7));
}

TEST_CASE("min-entropy program for the maximally entangled pair") {
    ComplexMatrix phi(4, 4);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) phi(i * 2 + i, j * 2 + j) = 0.5;

    // coarse brute-force grid over 2x2 PSD X_B
    auto feasible = [&](double a, double b2, double cre, double cim) {
        ComplexMatrix x{{a, complexd(cre, cim)}, {complexd(cre, -cim), b2}};
        ComplexMatrix big = tensor(ComplexMatrix::identity(2), x) - phi;
        return eig_hermitian(big).eigenvalues.front() >= -1e-9 &&
               eig_hermitian(x).eigenvalues.front() >= -1e-9;
    };
    double best = 1e9;
    for (double a = 0.0; a <= 1.6; a += 0.1)
        for (double b2 = 0.0; b2 <= 1.6; b2 += 0.1)
            for (double cre = -0.5; cre <= 0.5; cre += 0.25)
                for (double cim = -0.5; cim <= 0.5; cim += 0.25)
                    if (feasible(a, b2, cre, cim)) best = std::min(best, a + b2);
    REQUIRE(best == Catch::Approx(2.0).margin(0.25));

    sdp::SdpSolution sol = solve_hmin_program(phi, 2, 2);
    REQUIRE(sol.status == SolveStatus::optimal);
    REQUIRE(sol.primal_value == Catch::Approx(2.0).margin(1e-7));
    REQUIRE(sol.primal_value <= best + 1e-6);
}

TEST_CASE("closed-form regression battery") {
    Rng rng(606);
    int count = 0;
    const double tol = 1e-9;

    for (int t = 0; t < 7; ++t) {  // max-eigenvalue programs
        std::size_t d = 2 + (t % 3);
        ComplexMatrix h = random_hermitian(d, rng);
        auto ev = eig_hermitian(h).eigenvalues;
        double lmax = ev.back();
        if (lmax <= 0.01) continue;
        sdp::SdpSolution sol = solve_max_eig(h, tol);
        REQUIRE(sol.status == SolveStatus::optimal);
        REQUIRE(sol.gap <= 1e-7);
        REQUIRE(sol.primal_value == Catch::Approx(lmax).margin(1e-7));
        REQUIRE(sol.primal_value >= sol.dual_value - weak_duality_slack(sol, tol));
        ++count;
    }
    for (int t = 0; t < 7; ++t) {  // trace-minimization dominations
        std::size_t d = 2 + (t % 3);
        ComplexMatrix h = random_hermitian(d, rng);
        double pos = 0.0;
        for (double v : eig_hermitian(h).eigenvalues) pos += std::max(v, 0.0);
        sdp::SdpSolution sol = solve_dominance(h, tol);
        REQUIRE(sol.status == SolveStatus::optimal);
        REQUIRE(sol.gap <= 1e-7);
        REQUIRE(sol.primal_value == Catch::Approx(pos).margin(1e-7));
        REQUIRE(sol.primal_value >= sol.dual_value - weak_duality_slack(sol, tol));
        ++count;
    }
    for (int t = 0; t < 6; ++t) {  // fidelity programs against the direct formula
        std::size_t d = 2 + (t % 3);
        SystemLayout lay = SystemLayout::single("A", d);
        DensityOperator rho = random_density(lay, rng);
        DensityOperator sig = random_density(lay, rng);
        double f_sdp = fidelity_by_sdp(rho.matrix(), sig.matrix(), tol);
        double f_direct = fidelity(rho, sig);
        REQUIRE(std::abs(f_sdp - f_direct) <= 1e-7);
        ++count;
    }
    REQUIRE(count >= 18);
}

TEST_CASE("fidelity via SDP equals the square-root formula on random pairs") {
    Rng rng(707);
    for (int t = 0; t < 50; ++t) {
        std::size_t d = 2 + (t % 3);
        SystemLayout lay = SystemLayout::single("A", d);
        DensityOperator rho = random_density(lay, rng);
        DensityOperator sig = random_density(lay, rng);
        double f_sdp = fidelity_by_sdp(rho.matrix(), sig.matrix());
        REQUIRE(std::abs(f_sdp - fidelity(rho, sig)) <= 1e-7);
    }
}

TEST_CASE("fidelity constraint fragment: feasibility endpoints") {
    // threshold 0 is always feasible (K = 0)
    DensityOperator tau = maximally_mixed(SystemLayout::single("A", 2));
    std::size_t d = 2;
    HermitianSdpBuilder b;
    int bg = b.add_hermitian_block(2 * d);
    int bu = b.add_scalar_block();
    b.min_objective_trace(bg, 1.0);
    pin_corner(b, bg, tau.matrix(), 0);
    pin_corner(b, bg, tau.matrix(), d);
    int row = b.new_constraint(0.0);  // Re tr K - u = 0
    for (std::size_t i = 0; i < d; ++i) b.constraint_entry(row, bg, i, d + i, complexd(0.5, 0.0));
    b.constraint_scalar(row, bu, -1.0);
    sdp::SdpSolution sol = b.solve();
    REQUIRE(sol.status == SolveStatus::optimal);
    REQUIRE(sol.primal_value == Catch::Approx(2.0).margin(1e-6));

    // the fragment admits K = rho_ref itself at threshold 1 (boundary feasible)
    ComplexMatrix g(2 * d, 2 * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            g(i, j) = tau.matrix()(i, j);
            g(d + i, d + j) = tau.matrix()(i, j);
            g(i, d + j) = tau.matrix()(i, j);
            g(d + i, j) = tau.matrix()(i, j);
        }
    REQUIRE(eig_hermitian(g).eigenvalues.front() >= -1e-12);
    REQUIRE(std::abs(g(0, d).real() + g(1, d + 1).real() - 1.0) < 1e-12);
}

TEST_CASE("fidelity constraint fragment: orthogonal states are infeasible") {
    // rho = |1><1|, ref = |0><0|, threshold 0.1: F = 0 makes this infeasible
    std::size_t d = 2;
    ComplexMatrix p1 = ComplexMatrix::diag({0.0, 1.0});
    ComplexMatrix p0 = ComplexMatrix::diag({1.0, 0.0});
    HermitianSdpBuilder b;
    int bg = b.add_hermitian_block(2 * d);
    int bu = b.add_scalar_block();
    b.min_objective_trace(bg, 1.0);
    pin_corner(b, bg, p1, 0);
    pin_corner(b, bg, p0, d);
    int row = b.new_constraint(0.1);
    for (std::size_t i = 0; i < d; ++i) b.constraint_entry(row, bg, i, d + i, complexd(0.5, 0.0));
    b.constraint_scalar(row, bu, -1.0);
    sdp::SdpSolution sol = b.solve();
    REQUIRE(sol.status == SolveStatus::infeasible);
}

TEST_CASE("debug dump round-trips the problem shape") {
    ComplexMatrix h = ComplexMatrix::diag({0.7, 0.3});
    HermitianSdpBuilder b;
    int bx = b.add_hermitian_block(2);
    int bs = b.add_hermitian_block(2);
    b.min_objective_trace(bx, 1.0);
    int row = b.new_constraint(1.0);
    b.constraint_entry_re(row, bx, 0, 0, 1.0);
    b.constraint_entry_re(row, bs, 0, 0, -1.0);
    (void)h;
    std::string dump = sdp::dump_problem_json(b.problem());
    REQUIRE(dump.find("\"blocks\":[4,4]") != std::string::npos);
    REQUIRE(dump.find("\"rhs\":1") != std::string::npos);
    REQUIRE(dump.find("\"constraints\"") != std::string::npos);
}

TEST_CASE("iteration cap reports max_iter") {
    Rng rng(809);
    ComplexMatrix h = random_hermitian(3, rng);
    HermitianSdpBuilder b;
    int bx = b.add_hermitian_block(3);
    int bs = b.add_hermitian_block(3);
    b.min_objective_trace(bx, 1.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i; j < 3; ++j) {
            int row = b.new_constraint(h(i, j).real());
            b.constraint_entry_re(row, bx, i, j, 1.0);
            b.constraint_entry_re(row, bs, i, j, -1.0);
            if (i != j) {
                int row2 = b.new_constraint(h(i, j).imag());
                b.constraint_entry_im(row2, bx, i, j, 1.0);
                b.constraint_entry_im(row2, bs, i, j, -1.0);
            }
        }
    sdp::SolverOptions opt;
    opt.max_iter = 2;
    sdp::SdpSolution sol = b.solve(opt);
    REQUIRE(sol.status == SolveStatus::max_iter);
    REQUIRE(sol.iterations <= 2);
}

TEST_CASE("solver is deterministic") {
    Rng rng(808);
    ComplexMatrix h = random_hermitian(3, rng);
    sdp::SdpSolution a = solve_dominance(h);
    sdp::SdpSolution b = solve_dominance(h);
    REQUIRE(a.primal_value == b.primal_value);
    REQUIRE(a.dual_value == b.dual_value);
    REQUIRE(a.iterations == b.iterations);
}

TEST_CASE("solution extraction returns the optimizer") {
    ComplexMatrix h = ComplexMatrix::diag({0.7, 0.3});
    HermitianSdpBuilder b;
    int bx = b.add_hermitian_block(2);
    int bs = b.add_hermitian_block(2);
    b.min_objective_trace(bx, 1.0);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = i; j < 2; ++j) {
            int row = b.new_constraint(h(i, j).real());
            b.constraint_entry_re(row, bx, i, j, 1.0);
            b.constraint_entry_re(row, bs, i, j, -1.0);
            if (i != j) {
                int row2 = b.new_constraint(h(i, j).imag());
                b.constraint_entry_im(row2, bx, i, j, 1.0);
                b.constraint_entry_im(row2, bs, i, j, -1.0);
            }
        }
    sdp::SdpSolution sol = b.solve();
    REQUIRE(sol.status == SolveStatus::optimal);
    ComplexMatrix x = b.extract_hermitian(sol, bx);
    REQUIRE((x - h).frobenius_norm() < 1e-5);
}
