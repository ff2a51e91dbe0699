#pragma once

#include "oneshot/layout.hpp"
#include "oneshot/linalg.hpp"
#include "oneshot/rng.hpp"

namespace oneshot {

enum class Normalization { normalized, subnormalized };

/// Positive operator with trace one (or at most one), on a labeled layout.
class DensityOperator {
  public:
    DensityOperator() = default;

    DensityOperator(ComplexMatrix m, SystemLayout layout,
                    Normalization norm = Normalization::normalized)
        : matrix_(std::move(m)), layout_(std::move(layout)), norm_(norm) {
        validate();
    }

    struct unchecked_t {};
    DensityOperator(unchecked_t, ComplexMatrix m, SystemLayout layout,
                    Normalization norm = Normalization::normalized)
        : matrix_(std::move(m)), layout_(std::move(layout)), norm_(norm) {}

    const ComplexMatrix& matrix() const { return matrix_; }
    const SystemLayout& layout() const { return layout_; }
    Normalization normalization() const { return norm_; }
    std::size_t dim() const { return matrix_.rows(); }
    double trace() const { return matrix_.trace().real(); }

    void validate() const {
        matrix_.check_finite("DensityOperator");
        if (!matrix_.is_square() || matrix_.rows() != layout_.total_dim())
            throw std::invalid_argument("DensityOperator: matrix does not match layout");
        double scale = std::max(1.0, matrix_.frobenius_norm());
        if (matrix_.hermiticity_error() > 1e-10 * scale)
            throw std::invalid_argument("DensityOperator: matrix not Hermitian");
        EigenDecomposition ed = eig_hermitian(matrix_);
        if (ed.eigenvalues.front() < -1e-10 * scale)
            throw std::invalid_argument("DensityOperator: matrix not positive semidefinite");
        double tr = trace();
        if (norm_ == Normalization::normalized) {
            if (std::abs(tr - 1.0) > 1e-8)
                throw std::invalid_argument("DensityOperator: trace differs from one");
        } else if (tr > 1.0 + 1e-8) {
            throw std::invalid_argument("DensityOperator: trace exceeds one");
        }
    }

    DensityOperator restricted_to(const std::vector<std::string>& keep) const {
        return DensityOperator(unchecked_t{}, partial_trace(matrix_, layout_, keep),
                               layout_.sublayout(keep), norm_);
    }

    DensityOperator permuted(const std::vector<std::string>& order) const {
        std::vector<Factor> fs;
        for (const auto& l : order) fs.push_back(Factor{l, layout_.dim_of(l)});
        return DensityOperator(unchecked_t{}, permute_operator(matrix_, layout_, order),
                               SystemLayout(fs), norm_);
    }

  private:
    ComplexMatrix matrix_;
    SystemLayout layout_;
    Normalization norm_ = Normalization::normalized;
};

/// Unit vector with a labeled layout. psi denotes the projector when used as
/// an operator.
class PureState {
  public:
    PureState() = default;

    PureState(std::vector<complexd> amplitudes, SystemLayout layout)
        : amp_(std::move(amplitudes)), layout_(std::move(layout)) {
        if (amp_.size() != layout_.total_dim())
            throw std::invalid_argument("PureState: amplitude count does not match layout");
        double n2 = 0.0;
        for (const auto& z : amp_) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw std::invalid_argument("PureState: non-finite amplitude");
            n2 += std::norm(z);
        }
        if (std::abs(n2 - 1.0) > 1e-12 * std::max(1.0, n2))
            throw std::invalid_argument("PureState: vector not normalized");
    }

    const std::vector<complexd>& amplitudes() const { return amp_; }
    const SystemLayout& layout() const { return layout_; }
    std::size_t dim() const { return amp_.size(); }

    ComplexMatrix projector() const {
        std::size_t n = amp_.size();
        ComplexMatrix p(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) p(i, j) = amp_[i] * std::conj(amp_[j]);
        return p;
    }

    DensityOperator to_density() const {
        return DensityOperator(DensityOperator::unchecked_t{}, projector(), layout_);
    }

    /// Reduced state on the kept factors, via the (keep x rest) amplitude
    /// matrix rather than the full projector.
    DensityOperator marginal(const std::vector<std::string>& keep) const {
        SystemLayout kept = layout_.sublayout(keep);
        SystemLayout rest = layout_.complement_layout(kept.labels());
        std::vector<std::string> order = kept.labels();
        for (const auto& l : rest.labels()) order.push_back(l);
        std::vector<complexd> perm = permute_vector(amp_, layout_, order);
        std::size_t dk = kept.total_dim(), dr = rest.total_dim();
        ComplexMatrix rho(dk, dk);
        Eigen::Map<const Eigen::Matrix<complexd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            m(perm.data(), static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dr));
        rho.map().noalias() = m * m.adjoint();
        return DensityOperator(DensityOperator::unchecked_t{}, std::move(rho), kept);
    }

    PureState permuted(const std::vector<std::string>& order) const {
        std::vector<Factor> fs;
        for (const auto& l : order) fs.push_back(Factor{l, layout_.dim_of(l)});
        return PureState(permute_vector(amp_, layout_, order), SystemLayout(fs));
    }

  private:
    std::vector<complexd> amp_;
    SystemLayout layout_;
};

inline DensityOperator maximally_mixed(const SystemLayout& layout) {
    std::size_t d = layout.total_dim();
    ComplexMatrix m = ComplexMatrix::identity(d);
    m *= complexd(1.0 / static_cast<double>(d), 0.0);
    return DensityOperator(DensityOperator::unchecked_t{}, std::move(m), layout);
}

namespace detail {
inline void check_same_layout(const DensityOperator& a, const DensityOperator& b,
                              const char* where) {
    if (!(a.layout() == b.layout()))
        throw std::invalid_argument(std::string(where) + ": layout mismatch");
}
}  // namespace detail

/// Fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)); extended as-is to subnormalized
/// operators. Evaluated through both algebraic branches (trace of the PSD square
/// root, and the trace norm of sqrt(rho) sqrt(sigma)) and cross-checked to 1e-8.
inline double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    detail::check_same_layout(rho, sigma, "fidelity");
    ComplexMatrix sr = psd_sqrt(rho.matrix());
    ComplexMatrix inner = sr * sigma.matrix() * sr;
    // symmetrize away roundoff before the PSD square root
    ComplexMatrix sym = inner;
    for (std::size_t i = 0; i < sym.rows(); ++i)
        for (std::size_t j = 0; j < sym.cols(); ++j)
            sym(i, j) = 0.5 * (inner(i, j) + std::conj(inner(j, i)));
    double f1 = psd_sqrt(sym).trace().real();

    ComplexMatrix ss = psd_sqrt(sigma.matrix());
    double f2 = trace_norm(sr * ss);
    if (std::abs(f1 - f2) > 1e-8 * std::max(1.0, std::abs(f1)))
        throw std::runtime_error("fidelity: algebraic branches disagree beyond tolerance");
    return std::clamp(f1, 0.0, 1.0);
}

inline double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    detail::check_same_layout(rho, sigma, "trace_distance");
    return trace_norm(rho.matrix() - sigma.matrix());
}

/// C(rho, sigma) = sqrt(1 - F^2), a metric on (sub)normalized states.
inline double purified_distance_c(const DensityOperator& rho, const DensityOperator& sigma) {
    double f = fidelity(rho, sigma);
    return std::sqrt(std::max(0.0, 1.0 - f * f));
}

/// Generalized fidelity F + sqrt((1 - tr rho)(1 - tr sigma)); optional variant
/// for ball membership (see FidelityKind).
inline double generalized_fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    double f = fidelity(rho, sigma);
    double a = std::max(0.0, 1.0 - rho.trace());
    double b = std::max(0.0, 1.0 - sigma.trace());
    return f + std::sqrt(a * b);
}

enum class FidelityKind { plain, generalized };

/// Membership in the eps-ball around a normalized center: F^2 >= 1 - eps^2,
/// with 1e-9 additive slack because optimizer output sits on the boundary.
inline bool in_eps_ball(const DensityOperator& candidate, const DensityOperator& center, double eps,
                        FidelityKind kind = FidelityKind::plain) {
    if (!(eps >= 0.0 && eps < 1.0)) throw std::invalid_argument("in_eps_ball: eps outside [0, 1)");
    double f = kind == FidelityKind::plain ? fidelity(candidate, center)
                                           : generalized_fidelity(candidate, center);
    return f * f >= 1.0 - eps * eps - 1e-9;
}

/// Spectral purification: |Psi> = sum_k sqrt(lambda_k) |v_k> (x) |k>_ref with
/// eigenvalues in descending order; the reference dimension is the numerical
/// rank of rho. Tracing out ref_label recovers rho.
inline PureState purify(const DensityOperator& rho, const std::string& ref_label) {
    if (rho.layout().has_label(ref_label))
        throw std::invalid_argument("purify: reference label already in layout");
    EigenDecomposition ed = eig_hermitian(rho.matrix());
    std::size_t n = rho.dim();
    double lmax = std::max(ed.eigenvalues.back(), 0.0);
    // descending eigenvalues, ties kept in ascending index order
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < n; ++k)
        if (ed.eigenvalues[k] > 1e-12 * std::max(1.0, lmax)) kept.push_back(k);
    if (kept.empty()) throw std::invalid_argument("purify: zero operator");
    std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
        return ed.eigenvalues[a] > ed.eigenvalues[b];
    });
    std::size_t r = kept.size();

    std::vector<complexd> amp(n * r, complexd(0.0));
    for (std::size_t a = 0; a < r; ++a) {
        double w = std::sqrt(ed.eigenvalues[kept[a]]);
        for (std::size_t i = 0; i < n; ++i) amp[i * r + a] = w * ed.eigenvectors(i, kept[a]);
    }
    SystemLayout lay = tensor(rho.layout(), SystemLayout::single(ref_label, r));
    return PureState(std::move(amp), lay);
}

/// Maximally entangled state of Schmidt rank d: (1/sqrt d) sum_i |i>|i>.
inline PureState max_entangled(std::size_t d, const std::string& label_a,
                               const std::string& label_b) {
    if (d == 0) throw std::invalid_argument("max_entangled: d must be positive");
    std::vector<complexd> amp(d * d, complexd(0.0));
    double w = 1.0 / std::sqrt(static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i) amp[i * d + i] = w;
    return PureState(std::move(amp),
                     SystemLayout({Factor{label_a, d}, Factor{label_b, d}}));
}

inline PureState basis_state(const SystemLayout& layout, std::size_t index) {
    std::vector<complexd> amp(layout.total_dim(), complexd(0.0));
    amp.at(index) = 1.0;
    return PureState(std::move(amp), layout);
}

/// Haar-random pure state: normalized vector of iid complex Gaussians.
inline PureState haar_random_pure(const SystemLayout& layout, Rng& rng) {
    std::size_t n = layout.total_dim();
    std::vector<complexd> amp(n);
    double n2 = 0.0;
    for (auto& z : amp) {
        z = rng.complex_gaussian();
        n2 += std::norm(z);
    }
    double inv = 1.0 / std::sqrt(n2);
    for (auto& z : amp) z *= inv;
    return PureState(std::move(amp), layout);
}

inline PureState haar_random_pure(const SystemLayout& layout, std::uint64_t seed) {
    Rng rng(seed);
    return haar_random_pure(layout, rng);
}

/// Random density operator: partial trace of a Haar pure state on the doubled
/// space (layout (x) reference of equal total dimension).
inline DensityOperator random_density(const SystemLayout& layout, Rng& rng) {
    SystemLayout doubled = tensor(layout, SystemLayout::single("_purifier", layout.total_dim()));
    PureState psi = haar_random_pure(doubled, rng);
    return DensityOperator(DensityOperator::unchecked_t{},
                           partial_trace(psi.projector(), doubled, layout.labels()), layout);
}

inline DensityOperator random_density(const SystemLayout& layout, std::uint64_t seed) {
    Rng rng(seed);
    return random_density(layout, rng);
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the R-diagonal
/// phase fix.
inline ComplexMatrix haar_random_unitary(std::size_t d, Rng& rng) {
    Eigen::MatrixXcd g(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.complex_gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Eigen::MatrixXcd q = qr.householderQ();
    Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (std::size_t j = 0; j < d; ++j) {
        complexd rj = r(j, j);
        complexd phase = std::abs(rj) > 0 ? rj / std::abs(rj) : complexd(1.0);
        for (std::size_t i = 0; i < d; ++i) q(i, j) *= phase;
    }
    ComplexMatrix out(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) out(i, j) = q(i, j);
    return out;
}

}  // namespace oneshot
