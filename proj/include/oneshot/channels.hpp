#pragma once

#include "oneshot/optim.hpp"
#include "oneshot/states.hpp"

namespace oneshot {

/// CPTP map in Kraus form, sum_k K rho K^dagger with sum_k K^dagger K = I.
class KrausChannel {
  public:
    KrausChannel() = default;

    KrausChannel(std::vector<ComplexMatrix> kraus, std::string in_label = "A",
                 std::string out_label = "B", std::string name = "")
        : kraus_(std::move(kraus)),
          in_label_(std::move(in_label)),
          out_label_(std::move(out_label)),
          name_(std::move(name)) {
        if (kraus_.empty()) throw std::invalid_argument("KrausChannel: empty Kraus list");
        dim_in_ = kraus_.front().cols();
        dim_out_ = kraus_.front().rows();
        ComplexMatrix sum(dim_in_, dim_in_);
        for (const auto& k : kraus_) {
            k.check_finite("KrausChannel");
            if (k.rows() != dim_out_ || k.cols() != dim_in_)
                throw std::invalid_argument("KrausChannel: inconsistent Kraus shapes");
            sum += k.adjoint() * k;
        }
        if ((sum - ComplexMatrix::identity(dim_in_)).frobenius_norm() > 1e-9 * std::sqrt(double(dim_in_)))
            throw std::invalid_argument("KrausChannel: not trace preserving");
    }

    const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
    std::size_t dim_in() const { return dim_in_; }
    std::size_t dim_out() const { return dim_out_; }
    const std::string& in_label() const { return in_label_; }
    const std::string& out_label() const { return out_label_; }
    const std::string& name() const { return name_; }

  private:
    std::vector<ComplexMatrix> kraus_;
    std::size_t dim_in_ = 0, dim_out_ = 0;
    std::string in_label_, out_label_, name_;
};

/// Isometry U: in -> out (x) env with tr_env(U rho U^dagger) realizing the
/// channel; the environment dimension equals the Kraus count.
struct StinespringIsometry {
    ComplexMatrix isometry;  // (dim_out * dim_env) x dim_in, out is the leading factor
    std::size_t dim_out = 0;
    std::size_t dim_env = 0;
    std::string out_label;
    std::string env_label;
};

inline DensityOperator apply(const KrausChannel& ch, const DensityOperator& rho) {
    if (rho.dim() != ch.dim_in()) throw std::invalid_argument("apply: input dimension mismatch");
    ComplexMatrix out(ch.dim_out(), ch.dim_out());
    for (const auto& k : ch.kraus()) out += k * rho.matrix() * k.adjoint();
    return DensityOperator(DensityOperator::unchecked_t{}, std::move(out),
                           SystemLayout::single(ch.out_label(), ch.dim_out()),
                           rho.normalization());
}

/// Apply the channel to one labeled factor of a larger state.
inline DensityOperator apply_on(const KrausChannel& ch, const DensityOperator& rho,
                                const std::string& target_label) {
    if (rho.layout().dim_of(target_label) != ch.dim_in())
        throw std::invalid_argument("apply_on: target factor dimension mismatch");
    ComplexMatrix acc;
    SystemLayout out_layout;
    bool first = true;
    for (const auto& k : ch.kraus()) {
        auto [term, lay] = conjugate_on_factors(rho.matrix(), rho.layout(), k, {target_label},
                                                {Factor{target_label, ch.dim_out()}});
        if (first) {
            acc = std::move(term);
            out_layout = lay;
            first = false;
        } else {
            acc += term;
        }
    }
    return DensityOperator(DensityOperator::unchecked_t{}, std::move(acc), out_layout,
                           rho.normalization());
}

inline StinespringIsometry stinespring(const KrausChannel& ch, const std::string& env_label = "E") {
    std::size_t ne = ch.kraus().size();
    std::size_t rows = ch.dim_out() * ne;
    ComplexMatrix u(rows, ch.dim_in());
    for (std::size_t k = 0; k < ne; ++k)
        for (std::size_t o = 0; o < ch.dim_out(); ++o)
            for (std::size_t i = 0; i < ch.dim_in(); ++i)
                u(o * ne + k, i) = ch.kraus()[k](o, i);
    return StinespringIsometry{std::move(u), ch.dim_out(), ne, ch.out_label(), env_label};
}

/// Channel to the environment: tr_out(U rho U^dagger). Kraus operators are the
/// row slices of the dilation, one per output-basis index.
inline KrausChannel complementary(const KrausChannel& ch, const std::string& env_label = "E") {
    std::size_t ne = ch.kraus().size();
    std::vector<ComplexMatrix> fs;
    fs.reserve(ch.dim_out());
    for (std::size_t o = 0; o < ch.dim_out(); ++o) {
        ComplexMatrix f(ne, ch.dim_in());
        for (std::size_t k = 0; k < ne; ++k)
            for (std::size_t i = 0; i < ch.dim_in(); ++i) f(k, i) = ch.kraus()[k](o, i);
        fs.push_back(std::move(f));
    }
    return KrausChannel(std::move(fs), ch.in_label(), env_label,
                        ch.name().empty() ? "" : ch.name() + "_complement");
}

inline KrausChannel tensor_power(const KrausChannel& ch, std::size_t n) {
    if (n == 0) throw std::invalid_argument("tensor_power: n must be positive");
    std::size_t din = 1, dout = 1;
    for (std::size_t k = 0; k < n; ++k) {
        din *= ch.dim_in();
        dout *= ch.dim_out();
        if (din > max_dim() || dout > max_dim())
            throw std::length_error("tensor_power: dimension exceeds configured cap");
    }
    std::vector<ComplexMatrix> ops = {ComplexMatrix::identity(1)};
    for (std::size_t k = 0; k < n; ++k) {
        std::vector<ComplexMatrix> next;
        next.reserve(ops.size() * ch.kraus().size());
        for (const auto& a : ops)
            for (const auto& b : ch.kraus()) next.push_back(tensor(a, b));
        ops = std::move(next);
    }
    return KrausChannel(std::move(ops), ch.in_label(), ch.out_label(),
                        ch.name().empty() ? "" : ch.name() + "_power");
}

enum class ChannelKind { identity, depolarizing, dephasing, amplitude_damping, erasure };

inline const char* to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::identity: return "identity";
        case ChannelKind::depolarizing: return "depolarizing";
        case ChannelKind::dephasing: return "dephasing";
        case ChannelKind::amplitude_damping: return "amplitude_damping";
        case ChannelKind::erasure: return "erasure";
    }
    return "?";
}

/// Standard test-bed channels.
///   identity(dim)             -- single Kraus I
///   depolarizing(dim, p)      -- rho -> (1-p) rho + p tau, discrete Weyl form
///   dephasing(dim, p)         -- rho -> (1-p) rho + p diag(rho)
///   amplitude_damping(2, g)   -- qubit damping toward |0>
///   erasure(dim, q)           -- output dim+1 with erasure flag of weight q
inline KrausChannel make_channel(ChannelKind kind, std::size_t dim, double param = 0.0) {
    auto named = [&](std::vector<ComplexMatrix> ks) {
        return KrausChannel(std::move(ks), "A", "B", to_string(kind));
    };
    switch (kind) {
        case ChannelKind::identity:
            return named({ComplexMatrix::identity(dim)});
        case ChannelKind::depolarizing: {
            double dd = static_cast<double>(dim);
            double pmax = dd * dd / (dd * dd - 1.0);
            if (param < 0.0 || param > pmax)
                throw std::invalid_argument("depolarizing: parameter out of range");
            // discrete Weyl operators X^a Z^b
            const double two_pi = 2.0 * 3.14159265358979323846;
            std::vector<ComplexMatrix> ks;
            for (std::size_t a = 0; a < dim; ++a)
                for (std::size_t b = 0; b < dim; ++b) {
                    double w = (a == 0 && b == 0)
                                   ? std::sqrt(1.0 - param * (dd * dd - 1.0) / (dd * dd))
                                   : std::sqrt(param / (dd * dd));
                    if (w == 0.0 && !(a == 0 && b == 0)) continue;
                    ComplexMatrix k(dim, dim);
                    for (std::size_t j = 0; j < dim; ++j) {
                        double phase = two_pi * static_cast<double>(b * j) / dd;
                        k((j + a) % dim, j) = w * complexd(std::cos(phase), std::sin(phase));
                    }
                    ks.push_back(std::move(k));
                }
            return named(std::move(ks));
        }
        case ChannelKind::dephasing: {
            if (param < 0.0 || param > 1.0)
                throw std::invalid_argument("dephasing: parameter out of range");
            if (dim == 2) {
                ComplexMatrix k0 = ComplexMatrix::identity(2);
                k0 *= complexd(std::sqrt(1.0 - param / 2.0));
                ComplexMatrix k1 = ComplexMatrix::diag({1.0, -1.0});
                k1 *= complexd(std::sqrt(param / 2.0));
                return named({k0, k1});
            }
            std::vector<ComplexMatrix> ks;
            ComplexMatrix k0 = ComplexMatrix::identity(dim);
            k0 *= complexd(std::sqrt(1.0 - param));
            ks.push_back(k0);
            for (std::size_t i = 0; i < dim; ++i) {
                ComplexMatrix k(dim, dim);
                k(i, i) = std::sqrt(param);
                ks.push_back(std::move(k));
            }
            return named(std::move(ks));
        }
        case ChannelKind::amplitude_damping: {
            if (dim != 2) throw std::invalid_argument("amplitude_damping: qubit only");
            if (param < 0.0 || param > 1.0)
                throw std::invalid_argument("amplitude_damping: parameter out of range");
            ComplexMatrix k0{{1.0, 0.0}, {0.0, std::sqrt(1.0 - param)}};
            ComplexMatrix k1{{0.0, std::sqrt(param)}, {0.0, 0.0}};
            return named({k0, k1});
        }
        case ChannelKind::erasure: {
            if (param < 0.0 || param > 1.0)
                throw std::invalid_argument("erasure: parameter out of range");
            std::vector<ComplexMatrix> ks;
            ComplexMatrix keep(dim + 1, dim);
            for (std::size_t i = 0; i < dim; ++i) keep(i, i) = std::sqrt(1.0 - param);
            ks.push_back(std::move(keep));
            for (std::size_t i = 0; i < dim; ++i) {
                ComplexMatrix k(dim + 1, dim);
                k(dim, i) = std::sqrt(param);
                ks.push_back(std::move(k));
            }
            return named(std::move(ks));
        }
    }
    throw std::invalid_argument("make_channel: unknown kind");
}

/// Fully depolarizing map rho -> tau on the given dimension.
inline KrausChannel fully_depolarizing(std::size_t dim) {
    std::vector<ComplexMatrix> ks;
    double w = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            ComplexMatrix k(dim, dim);
            k(i, j) = w;
            ks.push_back(std::move(k));
        }
    return KrausChannel(std::move(ks), "A", "B", "fully_depolarizing");
}

/// Entanglement fidelity <Psi| (id (x) ch)(Psi) |Psi> on the spectral
/// purification of rho (reference basis = eigenbasis). The value does not
/// depend on the purification choice.
inline double entanglement_fidelity(const DensityOperator& rho, const KrausChannel& ch) {
    if (ch.dim_in() != rho.dim() || ch.dim_out() != rho.dim())
        throw std::invalid_argument("entanglement_fidelity: channel must preserve the space");
    PureState psi = purify(rho, "_R");
    std::size_t ref_dim = psi.layout().dim_of("_R");
    ComplexMatrix proj = psi.projector();
    ComplexMatrix acc(proj.rows(), proj.cols());
    for (const auto& k : ch.kraus()) {
        ComplexMatrix big = tensor(k, ComplexMatrix::identity(ref_dim));
        acc += big * proj * big.adjoint();
    }
    complexd val = 0.0;
    const auto& amp = psi.amplitudes();
    for (std::size_t i = 0; i < amp.size(); ++i)
        for (std::size_t j = 0; j < amp.size(); ++j)
            val += std::conj(amp[i]) * acc(i, j) * amp[j];
    return std::clamp(val.real(), 0.0, 1.0);
}

/// Entanglement fidelity on an explicitly supplied purification (system factor
/// leading); used to confirm independence of the purification choice.
inline double entanglement_fidelity_with_purification(const PureState& psi,
                                                      const KrausChannel& ch) {
    std::size_t d = ch.dim_in();
    if (psi.dim() % d != 0)
        throw std::invalid_argument("entanglement_fidelity_with_purification: bad shapes");
    std::size_t ref_dim = psi.dim() / d;
    ComplexMatrix proj = psi.projector();
    ComplexMatrix acc(proj.rows(), proj.cols());
    for (const auto& k : ch.kraus()) {
        ComplexMatrix big = tensor(k, ComplexMatrix::identity(ref_dim));
        acc += big * proj * big.adjoint();
    }
    complexd val = 0.0;
    const auto& amp = psi.amplitudes();
    for (std::size_t i = 0; i < amp.size(); ++i)
        for (std::size_t j = 0; j < amp.size(); ++j)
            val += std::conj(amp[i]) * acc(i, j) * amp[j];
    return std::clamp(val.real(), 0.0, 1.0);
}

/// Kraus-form shortcut sum_k |tr(rho K_k)|^2; used as an independent check of
/// entanglement_fidelity in the tests.
inline double entanglement_fidelity_kraus(const DensityOperator& rho, const KrausChannel& ch) {
    double s = 0.0;
    for (const auto& k : ch.kraus()) {
        complexd t = (k * rho.matrix()).trace();
        s += std::norm(t);
    }
    return s;
}

/// Random CPTP map: Kraus slices of a Haar-random Stinespring isometry with
/// the given environment dimension.
inline KrausChannel random_channel(std::size_t dim_in, std::size_t dim_out, std::size_t env_dim,
                                   Rng& rng) {
    std::size_t big = dim_out * env_dim;
    if (big < dim_in) throw std::invalid_argument("random_channel: environment too small");
    ComplexMatrix u = haar_random_unitary(big, rng);
    std::vector<ComplexMatrix> ks;
    for (std::size_t e = 0; e < env_dim; ++e) {
        ComplexMatrix k(dim_out, dim_in);
        for (std::size_t o = 0; o < dim_out; ++o)
            for (std::size_t i = 0; i < dim_in; ++i) k(o, i) = u(o * env_dim + e, i);
        ks.push_back(std::move(k));
    }
    return KrausChannel(std::move(ks), "A", "B", "random");
}

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
};

/// Monte-Carlo average of <phi| ch(phi) |phi> over Haar-random pure inputs.
inline MonteCarloEstimate average_fidelity_mc(const KrausChannel& ch, std::size_t samples,
                                              std::uint64_t seed) {
    if (ch.dim_in() != ch.dim_out())
        throw std::invalid_argument("average_fidelity_mc: channel must preserve the space");
    if (samples < 100) throw std::invalid_argument("average_fidelity_mc: need at least 100 samples");
    SystemLayout lay = SystemLayout::single("A", ch.dim_in());
    Rng rng(seed);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        PureState phi = haar_random_pure(lay, rng);
        DensityOperator out = apply(ch, phi.to_density());
        complexd v = 0.0;
        for (std::size_t a = 0; a < phi.dim(); ++a)
            for (std::size_t b = 0; b < phi.dim(); ++b)
                v += std::conj(phi.amplitudes()[a]) * out.matrix()(a, b) * phi.amplitudes()[b];
        s += v.real();
        s2 += v.real() * v.real();
    }
    double n = static_cast<double>(samples);
    double mean = s / n;
    double var = std::max(0.0, s2 / n - mean * mean);
    return {mean, std::sqrt(var / n), samples};
}

/// Upper bound on the minimum output fidelity min_phi <phi| ch(phi) |phi>,
/// found by downhill-simplex over the pure-state sphere with seeded restarts.
inline double min_fidelity_est(const KrausChannel& ch, int restarts = 64, std::uint64_t seed = 1,
                               int max_evals = 500) {
    if (ch.dim_in() != ch.dim_out())
        throw std::invalid_argument("min_fidelity_est: channel must preserve the space");
    std::size_t d = ch.dim_in();
    if (d > 16) throw std::invalid_argument("min_fidelity_est: dimension cap is 16");
    SystemLayout lay = SystemLayout::single("A", d);
    auto objective = [&](const std::vector<double>& x) {
        std::vector<complexd> amp(d);
        double n2 = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            amp[i] = complexd(x[2 * i], x[2 * i + 1]);
            n2 += std::norm(amp[i]);
        }
        if (n2 < 1e-12) return 1.0;
        double inv = 1.0 / std::sqrt(n2);
        for (auto& z : amp) z *= inv;
        PureState phi(std::move(amp), lay);
        DensityOperator out = apply(ch, phi.to_density());
        complexd v = 0.0;
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                v += std::conj(phi.amplitudes()[a]) * out.matrix()(a, b) * phi.amplitudes()[b];
        return v.real();
    };
    NelderMeadOptions opt;
    opt.max_evals = max_evals;
    NelderMeadResult best = nelder_mead_restarts(objective, 2 * d, restarts, seed, opt);
    return std::clamp(best.value, 0.0, 1.0);
}

}  // namespace oneshot
