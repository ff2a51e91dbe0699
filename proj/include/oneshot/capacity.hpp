#pragma once

#include <map>

#include "oneshot/channels.hpp"
#include "oneshot/entropy.hpp"
#include "oneshot/optim.hpp"

namespace oneshot {

/// Pure channel-output state |psi>^{ABE} = (I_A (x) U)|phi>^{AA'} with U a
/// Stinespring dilation and phi a purification of the channel input.
struct ChannelOutputState {
    PureState psi;  // labels A, B, E
    DensityOperator input;
};

inline ChannelOutputState channel_output_state(const KrausChannel& ch,
                                               const DensityOperator& input) {
    if (input.dim() != ch.dim_in())
        throw std::invalid_argument("channel_output_state: input dimension mismatch");
    DensityOperator in_flat(DensityOperator::unchecked_t{}, input.matrix(),
                            SystemLayout::single("Ain", input.dim()), input.normalization());
    PureState phi = purify(in_flat, "A");  // layout (Ain, A)
    StinespringIsometry u = stinespring(ch, "E");
    auto [vec, lay] = apply_to_factors(phi.amplitudes(), phi.layout(), u.isometry, {"Ain"},
                                       {Factor{"B", u.dim_out}, Factor{"E", u.dim_env}});
    PureState out(std::move(vec), lay);
    return {out.permuted({"A", "B", "E"}), input};
}

enum class EpsRelation { eaq, eac, father };

enum class KappaPrimeVariant { verbatim, substituted };

/// Derived smoothing parameters. The cube-root-free inversions use
/// x = sqrt(27 eps_inner): x^2 + 2x = target^2, so x = sqrt(1 + target^2) - 1,
/// with target = eps/2 (eaq), eps^2 (eac), eps (father). kappa = 2
/// sqrt(2 sqrt(4 eps)); kappa' = 2 sqrt(8 sqrt(eps)) as stated, or
/// 2 sqrt(2 sqrt(8 eps)) under the substituted reading.
struct DerivedEps {
    double eps = 0.0;
    double eps_inner = 0.0;  // eps' (eaq, father) or eps'' (eac)
    double kappa = 0.0;
    double kappa_prime = 0.0;
};

inline DerivedEps solve_eps_relations(double eps, EpsRelation which,
                                      KappaPrimeVariant variant = KappaPrimeVariant::verbatim) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("solve_eps_relations: eps outside (0,1)");
    double target = 0.0;
    switch (which) {
        case EpsRelation::eaq: target = eps / 2.0; break;
        case EpsRelation::eac: target = eps * eps; break;
        case EpsRelation::father: target = eps; break;
    }
    double t2 = target * target;
    // sqrt(1+t2)-1 via expm1-style guard against cancellation for tiny targets
    double x = t2 / (std::sqrt(1.0 + t2) + 1.0);
    DerivedEps out;
    out.eps = eps;
    out.eps_inner = x * x / 27.0;
    out.kappa = 2.0 * std::sqrt(2.0 * std::sqrt(4.0 * eps));
    out.kappa_prime = variant == KappaPrimeVariant::verbatim
                          ? 2.0 * std::sqrt(8.0 * std::sqrt(eps))
                          : 2.0 * std::sqrt(2.0 * std::sqrt(8.0 * eps));

    // forward verification of the defining relations
    double y = std::sqrt(27.0 * out.eps_inner);
    double forward = std::sqrt(2.0 * y + 27.0 * out.eps_inner);
    double recon = which == EpsRelation::eaq ? 2.0 * forward
                   : which == EpsRelation::eac ? std::sqrt(forward)
                                               : forward;
    if (std::abs(recon - eps) > 1e-12 * std::max(1.0, eps))
        throw std::runtime_error("solve_eps_relations: forward check failed");
    return out;
}

/// H_min^{eps_a}(A) and H_max^{eps_b}(A|B) of a channel-output state; the
/// max-entropy is computed by duality on the dilation purifier E.
struct SmoothedCore {
    EntropyResult hmin_a;
    EntropyResult hmax_ab;
    double core() const { return hmin_a.value - hmax_ab.value; }
    bool ok() const { return hmin_a.ok() && hmax_ab.ok(); }
};

inline SmoothedCore smoothed_core(const ChannelOutputState& out, double eps_a, double eps_b,
                                  const EntropyOptions& opt = {}) {
    SmoothedCore core;
    core.hmin_a = h_min_smooth(out.psi.marginal({"A"}), {"A"}, {}, eps_a, opt);
    EntropyResult dual = h_min_smooth(out.psi.marginal({"A", "E"}), {"A"}, {"E"}, eps_b, opt);
    core.hmax_ab = dual;
    core.hmax_ab.value = -dual.value;
    core.hmax_ab.method = EntropyMethod::duality;
    return core;
}

enum class BoundValidity { ok, vacuous_negative, smoothing_out_of_range };

inline const char* to_string(BoundValidity v) {
    switch (v) {
        case BoundValidity::ok: return "ok";
        case BoundValidity::vacuous_negative: return "vacuous_negative";
        case BoundValidity::smoothing_out_of_range: return "smoothing_out_of_range";
    }
    return "?";
}

struct BoundSide {
    double value = 0.0;
    BoundValidity validity = BoundValidity::ok;
};

/// Lower/upper capacity bounds with every derived smoothing parameter and the
/// input the bounds were evaluated at.
struct BoundReport {
    BoundSide lower;
    BoundSide upper;
    double eps = 0.0;
    std::map<std::string, double> derived_params;
    std::map<std::string, double> smoothing_used;
    DensityOperator optimizer_input;
    double optimizer_objective = 0.0;
};

/// Input-search policy: a fixed input, or seeded derivative-free maximization
/// over purification parameters (budget = total objective evaluations, split
/// across the restarts).
struct InputSearch {
    enum class Mode { fixed, optimize };
    Mode mode = Mode::optimize;
    DensityOperator input;
    int budget = 2000;
    int restarts = 16;
    std::uint64_t seed = 7;

    static InputSearch fixed(DensityOperator in) {
        InputSearch s;
        s.mode = Mode::fixed;
        s.input = std::move(in);
        return s;
    }
    static InputSearch optimized(int budget = 2000, std::uint64_t seed = 7) {
        InputSearch s;
        s.mode = Mode::optimize;
        s.budget = budget;
        s.seed = seed;
        return s;
    }
};

struct OptimizedInput {
    DensityOperator input;
    double objective = 0.0;
    int evals = 0;
};

/// Derivative-free maximization of an objective over channel inputs,
/// parameterized through purification vectors. Restart phase followed by a
/// simplex polish around the best point; deterministic per seed.
inline OptimizedInput optimize_input(std::size_t dim_in,
                                     const std::function<double(const DensityOperator&)>& objective,
                                     int budget = 2000, std::uint64_t seed = 7, int restarts = 16) {
    SystemLayout lay = SystemLayout::single("Ain", dim_in);
    SystemLayout doubled = tensor(lay, SystemLayout::single("_ref", dim_in));
    auto decode = [&](const std::vector<double>& x) {
        std::vector<complexd> amp(dim_in * dim_in);
        double n2 = 0.0;
        for (std::size_t i = 0; i < amp.size(); ++i) {
            amp[i] = complexd(x[2 * i], x[2 * i + 1]);
            n2 += std::norm(amp[i]);
        }
        if (n2 < 1e-12) {
            amp[0] = 1.0;
            n2 = 1.0;
        }
        double inv = 1.0 / std::sqrt(n2);
        for (auto& z : amp) z *= inv;
        PureState v(std::move(amp), doubled);
        return DensityOperator(DensityOperator::unchecked_t{},
                               partial_trace(v.projector(), doubled, {"Ain"}), lay);
    };
    int evals_used = 0;
    auto f = [&](const std::vector<double>& x) {
        ++evals_used;
        return -objective(decode(x));
    };

    std::size_t nparams = 2 * dim_in * dim_in;
    int restart_budget = std::max(20, budget / (2 * std::max(restarts, 1)));
    Rng master(seed);
    NelderMeadResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(master.child_seed(static_cast<std::uint64_t>(r)));
        std::vector<double> x0(nparams);
        for (auto& v : x0) v = rng.gaussian();
        NelderMeadOptions opt;
        opt.max_evals = restart_budget;
        opt.initial_step = 0.5;
        NelderMeadResult res = nelder_mead(f, std::move(x0), opt);
        if (res.value < best.value) best = res;
    }
    int polish_budget = std::max(20, budget / 6);
    for (double step : {0.2, 0.05, 0.01, 0.002}) {
        NelderMeadOptions opt;
        opt.max_evals = polish_budget;
        opt.initial_step = step;
        NelderMeadResult res = nelder_mead(f, best.x, opt);
        if (res.value < best.value) best = res;
    }
    return {decode(best.x), -best.value, evals_used};
}

struct FatherResources {
    double q_rate = 0.0;  // qubits transmitted
    double e_cost = 0.0;  // ebits consumed
    DerivedEps derived;
    SmoothedCore core;
};

/// One-shot entanglement-assisted quantum communication resources at a fixed
/// input: q = (H_min - H_max)/2 + 2 log eps' - 1, e = (H_min + H_max)/2, with
/// eps' from eps = sqrt(2 sqrt(27 eps') + 27 eps').
inline FatherResources father_resources(const KrausChannel& ch, const DensityOperator& input,
                                        double eps, const EntropyOptions& opt = {}) {
    FatherResources out;
    out.derived = solve_eps_relations(eps, EpsRelation::father);
    ChannelOutputState cos = channel_output_state(ch, input);
    out.core = smoothed_core(cos, out.derived.eps_inner, out.derived.eps_inner, opt);
    if (!out.core.ok()) throw std::runtime_error("father_resources: entropy solve failed");
    double hmin = out.core.hmin_a.value, hmax = out.core.hmax_ab.value;
    out.q_rate = 0.5 * (hmin - hmax) + 2.0 * std::log2(out.derived.eps_inner) - 1.0;
    out.e_cost = 0.5 * (hmin + hmax);
    return out;
}

/// One-shot entanglement-assisted entanglement-transmission bounds:
///   lower = max_phi (H_min^{e'}(A) - H_max^{e'}(A|B))/2 + 2 log e'
///   upper = max_phi (H_min^{e}(A) - H_max^{2e+2 sqrt(k)}(A|B))/2 + log(sqrt2/e)
inline BoundReport eaq_bounds(const KrausChannel& ch, double eps, const InputSearch& search,
                              const EntropyOptions& opt = {}) {
    DerivedEps de = solve_eps_relations(eps, EpsRelation::eaq);
    double upper_radius = 2.0 * eps + 2.0 * std::sqrt(de.kappa);

    auto lower_at = [&](const DensityOperator& input) {
        ChannelOutputState cos = channel_output_state(ch, input);
        SmoothedCore core = smoothed_core(cos, de.eps_inner, de.eps_inner, opt);
        if (!core.ok()) throw std::runtime_error("eaq_bounds: entropy solve failed");
        return 0.5 * core.core() + 2.0 * std::log2(de.eps_inner);
    };

    DensityOperator input;
    double obj = 0.0;
    if (search.mode == InputSearch::Mode::fixed) {
        input = search.input;
        obj = lower_at(input);
    } else {
        OptimizedInput best =
            optimize_input(ch.dim_in(), lower_at, search.budget, search.seed, search.restarts);
        input = best.input;
        obj = best.objective;
    }

    BoundReport rep;
    rep.eps = eps;
    rep.optimizer_input = input;
    rep.optimizer_objective = obj;
    rep.derived_params = {{"eps_prime", de.eps_inner}, {"kappa", de.kappa}};
    rep.smoothing_used = {{"lower_hmin", de.eps_inner},
                          {"lower_hmax", de.eps_inner},
                          {"upper_hmin", eps},
                          {"upper_hmax", upper_radius}};

    rep.lower.value = obj;
    rep.lower.validity = obj < 0.0 ? BoundValidity::vacuous_negative : BoundValidity::ok;

    if (upper_radius >= 1.0) {
        rep.upper.value = std::numeric_limits<double>::infinity();
        rep.upper.validity = BoundValidity::smoothing_out_of_range;
    } else {
        ChannelOutputState cos = channel_output_state(ch, input);
        SmoothedCore core = smoothed_core(cos, eps, upper_radius, opt);
        if (!core.ok()) throw std::runtime_error("eaq_bounds: entropy solve failed");
        rep.upper.value = 0.5 * core.core() + std::log2(std::sqrt(2.0) / eps);
        rep.upper.validity = BoundValidity::ok;
    }
    return rep;
}

/// One-shot entanglement-assisted classical bounds. The lower bound is, by
/// construction, exactly twice the father q-rate at eps^2:
///   lower = max_phi (H_min^{e''}(A) - H_max^{e''}(A|B)) + 4 log e'' - 2
///   upper = max_phi (H_min^{4e}(A) - H_max^{8e+2 sqrt(k')}(A|B)) + log(1/(2 sqrt2 e))
inline BoundReport eac_bounds(const KrausChannel& ch, double eps, const InputSearch& search,
                              const EntropyOptions& opt = {},
                              KappaPrimeVariant variant = KappaPrimeVariant::verbatim) {
    DerivedEps de = solve_eps_relations(eps, EpsRelation::eac, variant);
    double upper_hmin_radius = 4.0 * eps;
    double upper_hmax_radius = 8.0 * eps + 2.0 * std::sqrt(de.kappa_prime);

    auto lower_at = [&](const DensityOperator& input) {
        return 2.0 * father_resources(ch, input, eps * eps, opt).q_rate;
    };

    DensityOperator input;
    double obj = 0.0;
    if (search.mode == InputSearch::Mode::fixed) {
        input = search.input;
        obj = lower_at(input);
    } else {
        OptimizedInput best =
            optimize_input(ch.dim_in(), lower_at, search.budget, search.seed, search.restarts);
        input = best.input;
        obj = best.objective;
    }

    BoundReport rep;
    rep.eps = eps;
    rep.optimizer_input = input;
    rep.optimizer_objective = obj;
    rep.derived_params = {{"eps_dprime", de.eps_inner}, {"kappa_prime", de.kappa_prime}};
    rep.smoothing_used = {{"lower_hmin", de.eps_inner},
                          {"lower_hmax", de.eps_inner},
                          {"upper_hmin", upper_hmin_radius},
                          {"upper_hmax", upper_hmax_radius}};

    rep.lower.value = obj;
    rep.lower.validity = obj < 0.0 ? BoundValidity::vacuous_negative : BoundValidity::ok;

    if (upper_hmin_radius >= 1.0 || upper_hmax_radius >= 1.0) {
        rep.upper.value = std::numeric_limits<double>::infinity();
        rep.upper.validity = BoundValidity::smoothing_out_of_range;
    } else {
        ChannelOutputState cos = channel_output_state(ch, input);
        SmoothedCore core = smoothed_core(cos, upper_hmin_radius, upper_hmax_radius, opt);
        if (!core.ok()) throw std::runtime_error("eac_bounds: entropy solve failed");
        rep.upper.value = core.core() + std::log2(1.0 / (2.0 * std::sqrt(2.0) * eps));
        rep.upper.validity = BoundValidity::ok;
    }
    return rep;
}

struct AsymptoticCapacity {
    double c_ea = 0.0;  // classical bits per use
    double q_ea = 0.0;  // qubits per use = c_ea / 2
    DensityOperator argmax_input;
};

/// Asymptotic memoryless capacities C = max_phi I(A:B), Q = C/2.
inline AsymptoticCapacity asymptotic_capacity(const KrausChannel& ch,
                                              const InputSearch& search = {}) {
    if (ch.dim_in() > 8)
        throw std::invalid_argument("asymptotic_capacity: input dimension cap is 8");
    auto mi_at = [&](const DensityOperator& input) {
        ChannelOutputState cos = channel_output_state(ch, input);
        return mutual_information(cos.psi.marginal({"A", "B"}), {"A"}, {"B"});
    };
    AsymptoticCapacity out;
    if (search.mode == InputSearch::Mode::fixed) {
        out.argmax_input = search.input;
        out.c_ea = mi_at(search.input);
    } else {
        OptimizedInput best =
            optimize_input(ch.dim_in(), mi_at, std::max(search.budget, 4000), search.seed,
                           search.restarts);
        out.argmax_input = best.input;
        out.c_ea = best.objective;
    }
    out.q_ea = 0.5 * out.c_ea;
    return out;
}

struct TrendRow {
    std::size_t n = 0;
    double core_per_n = 0.0;
    double mutual_info = 0.0;
};

/// Normalized one-shot core terms (H_min^e(A^n) - H_max^e(A^n|B^n))/n on
/// product inputs, next to the single-letter mutual-information target.
inline std::vector<TrendRow> n_copy_trend(const KrausChannel& ch, const DensityOperator& input,
                                          double eps, std::size_t n_max,
                                          const EntropyOptions& opt = {}) {
    if (n_max == 0) throw std::invalid_argument("n_copy_trend: n_max must be positive");
    ChannelOutputState single = channel_output_state(ch, input);
    double mi = mutual_information(single.psi.marginal({"A", "B"}), {"A"}, {"B"});

    std::vector<TrendRow> rows;
    for (std::size_t n = 1; n <= n_max; ++n) {
        KrausChannel chn = n == 1 ? ch : tensor_power(ch, n);
        ComplexMatrix in_n = input.matrix();
        for (std::size_t k = 1; k < n; ++k) in_n = tensor(in_n, input.matrix());
        std::size_t din = in_n.rows();
        DensityOperator input_n(DensityOperator::unchecked_t{}, std::move(in_n),
                                SystemLayout::single("Ain", din));
        ChannelOutputState cos = channel_output_state(chn, input_n);
        std::size_t smooth_dim = cos.psi.layout().dim_of("A") * cos.psi.layout().dim_of("E");
        if (smooth_dim > max_dim())
            throw std::length_error("n_copy_trend: smoothing program exceeds the dimension cap");
        SmoothedCore core = smoothed_core(cos, eps, eps, opt);
        if (!core.ok()) throw std::runtime_error("n_copy_trend: entropy solve failed");
        rows.push_back({n, core.core() / static_cast<double>(n), mi});
    }
    return rows;
}

}  // namespace oneshot
