#pragma once

#include <functional>

#include "oneshot/rng.hpp"

namespace oneshot {

struct NelderMeadOptions {
    int max_evals = 500;
    double initial_step = 0.5;
    double ftol = 1e-10;
    double xtol = 1e-10;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evals = 0;
};

/// Downhill simplex minimization (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Deterministic for a fixed start point.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, NelderMeadOptions opt = {}) {
    const std::size_t n = x0.size();
    struct Vertex {
        std::vector<double> x;
        double fx;
    };
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        return f(x);
    };

    std::vector<Vertex> simplex;
    simplex.push_back({x0, eval(x0)});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = x0;
        x[i] += opt.initial_step;
        simplex.push_back({x, eval(x)});
    }

    auto order = [&] {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.fx < b.fx; });
    };
    order();

    while (evals < opt.max_evals) {
        // centroid of all but the worst
        std::vector<double> c(n, 0.0);
        for (std::size_t v = 0; v < n; ++v)
            for (std::size_t i = 0; i < n; ++i) c[i] += simplex[v].x[i] / static_cast<double>(n);
        Vertex& worst = simplex[n];

        auto blend = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) x[i] = c[i] + t * (worst.x[i] - c[i]);
            return x;
        };

        std::vector<double> xr = blend(-1.0);
        double fr = eval(xr);
        if (fr < simplex[0].fx) {
            std::vector<double> xe = blend(-2.0);
            double fe = eval(xe);
            if (fe < fr)
                worst = {xe, fe};
            else
                worst = {xr, fr};
        } else if (fr < simplex[n - 1].fx) {
            worst = {xr, fr};
        } else {
            bool outside = fr < worst.fx;
            std::vector<double> xc = blend(outside ? -0.5 : 0.5);
            double fc = eval(xc);
            if (fc < std::min(fr, worst.fx)) {
                worst = {xc, fc};
            } else {
                // shrink toward the best vertex
                for (std::size_t v = 1; v <= n; ++v) {
                    for (std::size_t i = 0; i < n; ++i)
                        simplex[v].x[i] = 0.5 * (simplex[v].x[i] + simplex[0].x[i]);
                    simplex[v].fx = eval(simplex[v].x);
                    if (evals >= opt.max_evals) break;
                }
            }
        }
        order();

        double fspread = std::abs(simplex[n].fx - simplex[0].fx);
        double xspread = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            xspread = std::max(xspread, std::abs(simplex[n].x[i] - simplex[0].x[i]));
        if (fspread < opt.ftol && xspread < opt.xtol) break;
    }
    return {simplex[0].x, simplex[0].fx, evals};
}

/// Best-of-restarts wrapper with seeded Gaussian starting points.
inline NelderMeadResult nelder_mead_restarts(
    const std::function<double(const std::vector<double>&)>& f, std::size_t dim, int restarts,
    std::uint64_t seed, NelderMeadOptions opt = {}) {
    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    Rng master(seed);
    for (int r = 0; r < restarts; ++r) {
        Rng rng(master.child_seed(static_cast<std::uint64_t>(r)));
        std::vector<double> x0(dim);
        for (auto& v : x0) v = rng.gaussian();
        NelderMeadResult res = nelder_mead(f, std::move(x0), opt);
        best.evals += res.evals;
        if (res.value < best.value) {
            best.value = res.value;
            best.x = res.x;
        }
    }
    return best;
}

}  // namespace oneshot
