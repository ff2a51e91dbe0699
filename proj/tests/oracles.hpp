// Test-only brute-force oracles, independent of the production solve paths.
#pragma once

#include "oneshot/entropy.hpp"
#include "oneshot/optim.hpp"

namespace oneshot::test_oracle {

/// Derivative-free ascent over ball candidates for the smoothed min-entropy.
/// Candidates are parameterized by a purification vector w on the doubled
/// space; the subnormalization scale is eliminated analytically: for a
/// normalized candidate sigma with f = F(sigma, rho) >= t = sqrt(1 - eps^2),
/// the best ball member along its ray is (t/f)^2 sigma, giving the objective
///     H_min(A|B)_sigma + 2 log2(f / t).
/// Each candidate's min-entropy is evaluated with the unsmoothed program, so
/// this path never touches the smoothed SDP it is checking.
inline double brute_force_h_min_smooth(const DensityOperator& rho,
                                       const std::vector<std::string>& sys_a,
                                       const std::vector<std::string>& sys_b, double eps,
                                       int restarts = 32, int evals = 400,
                                       std::uint64_t seed = 1) {
    const SystemLayout& lay = rho.layout();
    std::size_t d = lay.total_dim();
    SystemLayout doubled = tensor(lay, SystemLayout::single("_oracleR", d));
    const double t = std::sqrt(std::max(0.0, 1.0 - eps * eps));

    auto objective = [&](const std::vector<double>& x) {
        std::vector<complexd> amp(d * d);
        double n2 = 0.0;
        for (std::size_t i = 0; i < d * d; ++i) {
            amp[i] = complexd(x[2 * i], x[2 * i + 1]);
            n2 += std::norm(amp[i]);
        }
        if (n2 < 1e-12) return 1e6;
        double inv = 1.0 / std::sqrt(n2);
        for (auto& z : amp) z *= inv;
        PureState w(std::move(amp), doubled);
        DensityOperator sigma(DensityOperator::unchecked_t{},
                              partial_trace(w.projector(), doubled, lay.labels()), lay);
        double f = fidelity(sigma, rho);
        if (f < t) return 1e3 * (t - f) + 10.0;
        EntropyResult h = h_min_cond(sigma, sys_a, sys_b);
        if (!h.ok()) return 1e6;
        return -(h.value + 2.0 * std::log2(f / t));
    };

    // warm starts: the center's own purification plus shrinking Gaussian noise
    EigenDecomposition ed = eig_hermitian(rho.matrix());
    std::vector<double> x_center(2 * d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        double lam = std::max(ed.eigenvalues[k], 0.0);
        for (std::size_t i = 0; i < d; ++i) {
            complexd amp = std::sqrt(lam) * ed.eigenvectors(i, k);
            x_center[2 * (i * d + k)] = amp.real();
            x_center[2 * (i * d + k) + 1] = amp.imag();
        }
    }

    NelderMeadOptions opt;
    opt.max_evals = evals;
    opt.initial_step = 0.15;
    Rng master(seed);
    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (int rsx = 0; rsx < restarts; ++rsx) {
        Rng rng(master.child_seed(static_cast<std::uint64_t>(rsx)));
        double noise = 0.02 + 0.3 * rng.uniform01();
        std::vector<double> x0 = x_center;
        for (auto& v : x0) v += noise * rng.gaussian();
        NelderMeadResult res = nelder_mead(objective, std::move(x0), opt);
        if (res.value < best.value) best = res;
    }
    // polish with progressively tighter simplices around the best point
    for (double step : {0.03, 0.01, 0.003, 0.001}) {
        NelderMeadOptions fine = opt;
        fine.initial_step = step;
        fine.max_evals = 2 * evals;
        NelderMeadResult res = nelder_mead(objective, best.x, fine);
        if (res.value < best.value) best = res;
    }
    return -best.value;
}

}  // namespace oneshot::test_oracle
