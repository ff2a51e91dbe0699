#pragma once

#include <thread>

#include "oneshot/capacity.hpp"

namespace oneshot {

struct DeltaBounds {
    double delta1 = 0.0;
    double delta2 = 0.0;
    double bound() const { return 2.0 * std::sqrt(delta1) + delta2; }
};

/// delta1 = 3 * 2^{(H_max^e(Atilde) - H_min^e(A))/2} + 24 e and
/// delta2 = 3 * 2^{-(H_min^e(A|E) + H_min^e(Atilde|R))/2} + 24 e.
/// Infinite entropy gaps follow the limit convention 2^{-inf} = 0.
inline DeltaBounds delta_bounds(double hmax_a_tilde, double hmin_a, double hmin_a_given_e,
                                double hmin_atilde_given_r, double eps) {
    if (eps < 0.0) throw std::invalid_argument("delta_bounds: eps must be nonnegative");
    DeltaBounds out;
    out.delta1 = 3.0 * std::exp2(0.5 * (hmax_a_tilde - hmin_a)) + 24.0 * eps;
    out.delta2 = 3.0 * std::exp2(-0.5 * (hmin_a_given_e + hmin_atilde_given_r)) + 24.0 * eps;
    return out;
}

/// Haar-random partial isometry: the first dim_in columns of a Haar unitary.
inline ComplexMatrix sample_encoder(std::size_t dim_in, std::size_t dim_out, std::uint64_t seed) {
    if (dim_in > dim_out) throw std::invalid_argument("sample_encoder: dim_in exceeds dim_out");
    Rng rng(seed);
    ComplexMatrix u = haar_random_unitary(dim_out, rng);
    ComplexMatrix v(dim_out, dim_in);
    for (std::size_t i = 0; i < dim_out; ++i)
        for (std::size_t j = 0; j < dim_in; ++j) v(i, j) = u(i, j);
    return v;
}

/// Uhlmann alignment of two purifications over their shared factors: the
/// isometry W on the first state's purifier that maximizes the overlap with
/// the second state, achieving F(shared marginals). Degenerate singular values
/// are tie-broken by the solver's fixed sweep order and the deterministic
/// basis completion.
struct UhlmannDecoder {
    ComplexMatrix isometry;   // dim(target purifier) x dim(source purifier)
    double fidelity_opt = 0.0;
    SystemLayout in_layout;   // source purifier factors
    SystemLayout out_layout;  // target purifier factors
};

inline UhlmannDecoder uhlmann_decoder(const PureState& source, const PureState& target,
                                      const std::vector<std::string>& shared) {
    SystemLayout shared_src = source.layout().sublayout(shared);
    SystemLayout shared_tgt = target.layout().sublayout(shared);
    if (!(shared_src == shared_tgt))
        throw std::invalid_argument("uhlmann_decoder: shared factors disagree");
    SystemLayout pur_src = source.layout().complement_layout(shared);
    SystemLayout pur_tgt = target.layout().complement_layout(shared);
    std::size_t ds = shared_src.total_dim();
    std::size_t dx = pur_src.total_dim();
    std::size_t dy = pur_tgt.total_dim();
    if (dx > dy) throw std::invalid_argument("uhlmann_decoder: target purifier too small");

    auto as_matrix = [&](const PureState& st, const SystemLayout& pur) {
        std::vector<std::string> order = shared;
        for (const auto& l : pur.labels()) order.push_back(l);
        std::vector<complexd> perm = permute_vector(st.amplitudes(), st.layout(), order);
        return perm;  // row-major (shared x purifier)
    };
    std::vector<complexd> mx = as_matrix(source, pur_src);
    std::vector<complexd> my = as_matrix(target, pur_tgt);

    // D = My^dag Mx, dy x dx; the optimum of Re tr(My^dag Mx W^T) over
    // isometries is the singular-value sum of D.
    ComplexMatrix d(dy, dx);
    for (std::size_t q = 0; q < dy; ++q)
        for (std::size_t p = 0; p < dx; ++p) {
            complexd s = 0.0;
            for (std::size_t sh = 0; sh < ds; ++sh)
                s += std::conj(my[sh * dy + q]) * mx[sh * dx + p];
            d(q, p) = s;
        }
    Svd sv = svd(d);
    double fopt = 0.0;
    for (double s : sv.singular) fopt += s;

    // W^T = V U^dag on the supported part, completed to a full isometry
    ComplexMatrix u_full = complete_isometry(sv.u, dx);  // dy x dx
    ComplexMatrix v_full = complete_isometry(sv.v, dx);  // dx x dx
    ComplexMatrix wt = v_full * u_full.adjoint();  // dx x dy
    ComplexMatrix w = wt.transpose();              // dy x dx

    UhlmannDecoder out;
    out.isometry = std::move(w);
    out.fidelity_opt = fopt;
    out.in_layout = pur_src;
    out.out_layout = pur_tgt;
    ComplexMatrix gram = out.isometry.adjoint() * out.isometry;
    if ((gram - ComplexMatrix::identity(dx)).frobenius_norm() > 1e-8)
        throw std::runtime_error("uhlmann_decoder: alignment is not an isometry");
    return out;
}

/// CPTP decoding map obtained from the alignment isometry by discarding the
/// listed output factors.
inline KrausChannel decoder_channel(const UhlmannDecoder& dec,
                                    const std::vector<std::string>& discard) {
    SystemLayout keep = dec.out_layout.complement_layout(discard);
    SystemLayout disc = dec.out_layout.sublayout(discard);
    std::vector<std::string> order = disc.labels();
    for (const auto& l : keep.labels()) order.push_back(l);
    auto map = detail::permutation_index_map(dec.out_layout, order);
    // map: (discard, keep)-ordered index -> original row of the isometry
    std::size_t dd = disc.total_dim(), dk = keep.total_dim(), din = dec.isometry.cols();
    std::vector<ComplexMatrix> kraus;
    kraus.reserve(dd);
    for (std::size_t e = 0; e < dd; ++e) {
        ComplexMatrix k(dk, din);
        for (std::size_t i = 0; i < dk; ++i)
            for (std::size_t j = 0; j < din; ++j) k(i, j) = dec.isometry(map[e * dk + i], j);
        kraus.push_back(std::move(k));
    }
    return KrausChannel(std::move(kraus), "Bob", "Decoded", "uhlmann_decoder");
}

/// One decoupling trial: a sampled encoder, its exact decoupling error, the
/// entropic bound, and the Uhlmann decoder's achieved fidelity.
struct DecouplingTrial {
    std::uint64_t seed = 0;
    ComplexMatrix encoder;
    double decoupling_error = 0.0;
    double bound = 0.0;
    double decoder_fidelity = 0.0;
    double protocol_trace_error = 0.0;  // || decoded output - phi ||_1
    double rate_a0 = 0.0;               // log2 |A0|
    double rate_a1 = 0.0;               // log2 |A1|
};

struct DecouplingSummary {
    double min_error = 0.0;
    double mean_error = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double bound = 0.0;
    double max_protocol_error = 0.0;
    double hmax_a_tilde = 0.0;
    double hmin_a = 0.0;
    double hmin_a_given_e = 0.0;
    double hmin_atilde_given_r = 0.0;
};

struct DecouplingExperiment {
    std::vector<DecouplingTrial> trials;
    DecouplingSummary summary;
};

/// Simulation context for the entanglement-transmission instantiation of the
/// decoupling protocol: phi = Phi^{A0 R} (x) Phi^{A1 B1}, encoders V: A0 A1 ->
/// A'' sampled Haar, reference state sigma = the purified channel input.
class DecouplingSetup {
  public:
    /// with_bounds = false skips the four smoothed-entropy solves (used when
    /// only encoder errors are needed, e.g. seed sweeps).
    DecouplingSetup(KrausChannel channel, DensityOperator input, std::size_t dim_a0,
                    std::size_t dim_a1, double eps, EntropyOptions opt = {},
                    bool with_bounds = true)
        : channel_(std::move(channel)),
          input_(std::move(input)),
          dim_a0_(dim_a0),
          dim_a1_(dim_a1),
          eps_(eps) {
        if (dim_a0_ * dim_a1_ > channel_.dim_in())
            throw std::invalid_argument("DecouplingSetup: encoder input exceeds channel input");
        if (!(eps_ >= 0.0 && eps_ < 1.0))
            throw std::invalid_argument("DecouplingSetup: eps outside [0,1)");

        // phi^{A0 R A1 B1} and its A0 A1 R marginal
        PureState phi_a0r = max_entangled(dim_a0_, "A0", "R");
        PureState phi_a1b1 = max_entangled(dim_a1_, "A1", "B1");
        std::vector<complexd> amp(phi_a0r.dim() * phi_a1b1.dim());
        for (std::size_t i = 0; i < phi_a0r.dim(); ++i)
            for (std::size_t j = 0; j < phi_a1b1.dim(); ++j)
                amp[i * phi_a1b1.dim() + j] = phi_a0r.amplitudes()[i] * phi_a1b1.amplitudes()[j];
        phi_ = PureState(std::move(amp), tensor(phi_a0r.layout(), phi_a1b1.layout()));
        phi_encode_side_ = phi_.marginal({"A0", "A1", "R"});

        // reference output Omega^{ABE} and its environment marginal
        omega_ = channel_output_state(channel_, input_);
        omega_env_ = omega_.psi.marginal({"E"});

        // smoothed entropies feeding the delta bounds
        if (with_bounds) {
            EntropyResult hmax_atilde = h_max_smooth(
                maximally_mixed(SystemLayout({Factor{"A0", dim_a0_}, Factor{"A1", dim_a1_}})),
                {"A0", "A1"}, {}, eps_, opt);
            EntropyResult hmin_a = h_min_smooth(omega_.psi.marginal({"A"}), {"A"}, {}, eps_, opt);
            EntropyResult hmin_ae =
                h_min_smooth(omega_.psi.marginal({"A", "E"}), {"A"}, {"E"}, eps_, opt);
            EntropyResult hmin_ar =
                h_min_smooth(phi_.marginal({"A0", "A1", "R"}), {"A0", "A1"}, {"R"}, eps_, opt);
            if (!hmax_atilde.ok() || !hmin_a.ok() || !hmin_ae.ok() || !hmin_ar.ok())
                throw std::runtime_error("DecouplingSetup: entropy evaluation failed");
            hmax_a_tilde_ = hmax_atilde.value;
            hmin_a_ = hmin_a.value;
            hmin_a_given_e_ = hmin_ae.value;
            hmin_atilde_given_r_ = hmin_ar.value;
            deltas_ =
                delta_bounds(hmax_a_tilde_, hmin_a_, hmin_a_given_e_, hmin_atilde_given_r_, eps_);
        }

        // Uhlmann target: |Omega>^{TA TB E} (x) |phi>^{A0 R A1 B1}
        PureState omega_relabel(omega_.psi.amplitudes(),
                                SystemLayout({Factor{"TA", omega_.psi.layout().dim_of("A")},
                                              Factor{"TB", omega_.psi.layout().dim_of("B")},
                                              Factor{"E", omega_.psi.layout().dim_of("E")}}));
        std::vector<complexd> tamp(omega_relabel.dim() * phi_.dim());
        for (std::size_t i = 0; i < omega_relabel.dim(); ++i)
            for (std::size_t j = 0; j < phi_.dim(); ++j)
                tamp[i * phi_.dim() + j] = omega_relabel.amplitudes()[i] * phi_.amplitudes()[j];
        target_ = PureState(std::move(tamp), tensor(omega_relabel.layout(), phi_.layout()));
    }

    const KrausChannel& channel() const { return channel_; }
    const DensityOperator& input() const { return input_; }
    double eps() const { return eps_; }
    const DeltaBounds& deltas() const { return deltas_; }
    double hmax_a_tilde() const { return hmax_a_tilde_; }
    double hmin_a() const { return hmin_a_; }
    double hmin_a_given_e() const { return hmin_a_given_e_; }
    double hmin_atilde_given_r() const { return hmin_atilde_given_r_; }
    std::size_t dim_a0() const { return dim_a0_; }
    std::size_t dim_a1() const { return dim_a1_; }

    /// || N_c(V (Phi^{A0 R} (x) tau^{A1}) V^dag) - Omega^E (x) tau^R ||_1.
    double decoupling_error(const ComplexMatrix& encoder) const {
        auto [enc, lay] =
            conjugate_on_factors(phi_encode_side_.matrix(), phi_encode_side_.layout(), encoder,
                                 {"A0", "A1"}, {Factor{"Ain", channel_.dim_in()}});
        DensityOperator encoded(DensityOperator::unchecked_t{}, std::move(enc), lay);
        KrausChannel comp = complementary(channel_, "E");
        DensityOperator env_r = apply_on(comp, encoded, "Ain");  // layout (E, R)
        std::size_t dr = dim_a0_;
        ComplexMatrix tau_r = ComplexMatrix::identity(dr);
        tau_r *= complexd(1.0 / static_cast<double>(dr));
        ComplexMatrix product = tensor(omega_env_.matrix(), tau_r);
        return trace_norm(env_r.matrix() - product);
    }

    /// Runs encoder + dilation + Uhlmann decoder; returns the achieved global
    /// fidelity and the trace distance of the decoded A0 A1 B1 R state to phi.
    struct DecodeOutcome {
        double fidelity = 0.0;
        double trace_error = 0.0;
        double fidelity_opt = 0.0;
    };

    DecodeOutcome decode_with(const ComplexMatrix& encoder) const {
        // |Theta> = (U_N V (x) I) |phi>, layout (B, E, R, B1)
        auto [v1, l1] = apply_to_factors(phi_.amplitudes(), phi_.layout(), encoder, {"A0", "A1"},
                                         {Factor{"Ain", channel_.dim_in()}});
        StinespringIsometry u = stinespring(channel_, "E");
        auto [v2, l2] = apply_to_factors(v1, l1, u.isometry, {"Ain"},
                                         {Factor{"B", u.dim_out}, Factor{"E", u.dim_env}});
        PureState theta(std::move(v2), l2);

        UhlmannDecoder dec = uhlmann_decoder(theta, target_, {"E", "R"});

        // apply W on Bob's purifier (B, B1) and measure the outcome
        std::vector<std::string> bob = dec.in_layout.labels();
        auto [v3, l3] =
            apply_to_factors(theta.amplitudes(), theta.layout(), dec.isometry, bob,
                             dec.out_layout.factors());
        PureState decoded(std::move(v3), l3);

        // achieved overlap with the target
        PureState tgt_aligned = target_.permuted(l3.labels());
        complexd overlap = 0.0;
        for (std::size_t i = 0; i < decoded.dim(); ++i)
            overlap += std::conj(tgt_aligned.amplitudes()[i]) * decoded.amplitudes()[i];

        DecodeOutcome out;
        out.fidelity = std::abs(overlap);
        out.fidelity_opt = dec.fidelity_opt;
        DensityOperator phi_target = phi_.marginal({"A0", "A1", "B1", "R"});
        DensityOperator final_state =
            decoded.marginal({"A0", "A1", "B1", "R"}).permuted(phi_target.layout().labels());
        out.trace_error = trace_norm(final_state.matrix() - phi_target.matrix());
        return out;
    }

  private:
    KrausChannel channel_;
    DensityOperator input_;
    std::size_t dim_a0_, dim_a1_;
    double eps_;
    PureState phi_;
    DensityOperator phi_encode_side_;
    ChannelOutputState omega_;
    DensityOperator omega_env_;
    PureState target_;
    double hmax_a_tilde_ = 0.0, hmin_a_ = 0.0, hmin_a_given_e_ = 0.0, hmin_atilde_given_r_ = 0.0;
    DeltaBounds deltas_;
};

/// Achievable one-shot rate pair at a fixed channel input:
/// log|A0| = (H_min^e(A) - H_max^e(A|B))/2 + 2 log e,
/// log|A1| = (H_min^e(A) + H_max^e(A|B))/2.
struct AchievableRates {
    double log_a0 = 0.0;
    double log_a1 = 0.0;
    SmoothedCore core;
};

inline AchievableRates achievable_rates(const KrausChannel& ch, const DensityOperator& input,
                                        double eps, const EntropyOptions& opt = {}) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("achievable_rates: eps outside (0,1)");
    ChannelOutputState cos = channel_output_state(ch, input);
    AchievableRates out;
    out.core = smoothed_core(cos, eps, eps, opt);
    if (!out.core.ok()) throw std::runtime_error("achievable_rates: entropy solve failed");
    double hmin = out.core.hmin_a.value, hmax = out.core.hmax_ab.value;
    out.log_a0 = 0.5 * (hmin - hmax) + 2.0 * std::log2(eps);
    out.log_a1 = 0.5 * (hmin + hmax);
    return out;
}

/// Monte-Carlo experiment over Haar encoders. The summary reports the minimum
/// observed decoupling error against the existence bound 2 sqrt(d1) + d2.
/// Trials own derived seeds and may fan out over `jobs` workers; results are
/// merged in trial order, so the output is independent of the worker count.
inline DecouplingExperiment run_experiment(const KrausChannel& ch, const DensityOperator& input,
                                           std::size_t dim_a0, std::size_t dim_a1, double eps,
                                           int trials, std::uint64_t seed,
                                           const EntropyOptions& opt = {}, int jobs = 1) {
    if (ch.dim_in() * ch.dim_out() > 4096 || ch.dim_in() > 64)
        throw std::invalid_argument("run_experiment: dimension cap exceeded");
    DecouplingSetup setup(ch, input, dim_a0, dim_a1, eps, opt);

    DecouplingExperiment ex;
    ex.summary.delta1 = setup.deltas().delta1;
    ex.summary.delta2 = setup.deltas().delta2;
    ex.summary.bound = setup.deltas().bound();
    ex.summary.hmax_a_tilde = setup.hmax_a_tilde();
    ex.summary.hmin_a = setup.hmin_a();
    ex.summary.hmin_a_given_e = setup.hmin_a_given_e();
    ex.summary.hmin_atilde_given_r = setup.hmin_atilde_given_r();

    Rng master(seed);
    ex.trials.resize(static_cast<std::size_t>(std::max(trials, 0)));
    auto run_trial = [&](int t) {
        DecouplingTrial& trial = ex.trials[static_cast<std::size_t>(t)];
        trial.seed = master.child_seed(static_cast<std::uint64_t>(t));
        trial.encoder = sample_encoder(dim_a0 * dim_a1, ch.dim_in(), trial.seed);
        trial.decoupling_error = setup.decoupling_error(trial.encoder);
        auto outcome = setup.decode_with(trial.encoder);
        trial.decoder_fidelity = outcome.fidelity;
        trial.protocol_trace_error = outcome.trace_error;
        trial.bound = ex.summary.bound;
        trial.rate_a0 = std::log2(static_cast<double>(dim_a0));
        trial.rate_a1 = std::log2(static_cast<double>(dim_a1));
    };
    if (jobs <= 1) {
        for (int t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w)
            workers.emplace_back([&, w] {
                for (int t = w; t < trials; t += jobs) run_trial(t);
            });
        for (auto& th : workers) th.join();
    }

    double sum = 0.0;
    double min_err = std::numeric_limits<double>::infinity();
    double max_protocol = 0.0;
    for (const auto& trial : ex.trials) {
        sum += trial.decoupling_error;
        min_err = std::min(min_err, trial.decoupling_error);
        max_protocol = std::max(max_protocol, trial.protocol_trace_error);
    }
    ex.summary.min_error = trials > 0 ? min_err : 0.0;
    ex.summary.mean_error = trials > 0 ? sum / trials : 0.0;
    ex.summary.max_protocol_error = max_protocol;
    return ex;
}

}  // namespace oneshot
