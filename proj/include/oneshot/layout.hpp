#pragma once

#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "oneshot/matrix.hpp"

namespace oneshot {

struct Factor {
    std::string label;
    std::size_t dim = 1;
    bool operator==(const Factor&) const = default;
};

/// Ordered list of labeled tensor factors. The leftmost factor is the most
/// significant index: a basis index i decomposes as i = ((i_0 d_1 + i_1) d_2 + ...).
class SystemLayout {
  public:
    SystemLayout() = default;

    explicit SystemLayout(std::vector<Factor> factors) : factors_(std::move(factors)) {
        std::set<std::string> seen;
        for (const auto& f : factors_) {
            if (f.dim == 0) throw std::invalid_argument("SystemLayout: zero-dimensional factor");
            if (!seen.insert(f.label).second)
                throw std::invalid_argument("SystemLayout: duplicate label '" + f.label + "'");
        }
    }

    SystemLayout(std::initializer_list<Factor> factors)
        : SystemLayout(std::vector<Factor>(factors)) {}

    static SystemLayout single(const std::string& label, std::size_t dim) {
        return SystemLayout({Factor{label, dim}});
    }

    std::size_t size() const { return factors_.size(); }
    const std::vector<Factor>& factors() const { return factors_; }
    const Factor& factor(std::size_t k) const { return factors_[k]; }

    std::size_t total_dim() const {
        std::size_t d = 1;
        for (const auto& f : factors_) d *= f.dim;
        return d;
    }

    bool has_label(const std::string& label) const {
        for (const auto& f : factors_)
            if (f.label == label) return true;
        return false;
    }

    std::size_t index_of(const std::string& label) const {
        for (std::size_t k = 0; k < factors_.size(); ++k)
            if (factors_[k].label == label) return k;
        throw std::out_of_range("SystemLayout: unknown label '" + label + "'");
    }

    std::size_t dim_of(const std::string& label) const { return factors_[index_of(label)].dim; }

    std::size_t dim_of(const std::vector<std::string>& labels) const {
        std::size_t d = 1;
        for (const auto& l : labels) d *= dim_of(l);
        return d;
    }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        out.reserve(factors_.size());
        for (const auto& f : factors_) out.push_back(f.label);
        return out;
    }

    /// Row-major strides; stride of the leftmost factor is the largest.
    std::vector<std::size_t> strides() const {
        std::vector<std::size_t> s(factors_.size(), 1);
        for (std::size_t k = factors_.size(); k-- > 1;) s[k - 1] = s[k] * factors_[k].dim;
        return s;
    }

    /// Sub-layout of the given labels, kept in this layout's order.
    SystemLayout sublayout(const std::vector<std::string>& labels) const {
        std::vector<Factor> kept;
        for (const auto& f : factors_)
            if (std::find(labels.begin(), labels.end(), f.label) != labels.end()) kept.push_back(f);
        if (kept.size() != labels.size())
            throw std::out_of_range("SystemLayout: sublayout with unknown or repeated label");
        return SystemLayout(kept);
    }

    SystemLayout complement_layout(const std::vector<std::string>& labels) const {
        std::vector<Factor> kept;
        for (const auto& f : factors_)
            if (std::find(labels.begin(), labels.end(), f.label) == labels.end()) kept.push_back(f);
        return SystemLayout(kept);
    }

    friend SystemLayout tensor(const SystemLayout& a, const SystemLayout& b) {
        std::vector<Factor> fs = a.factors_;
        fs.insert(fs.end(), b.factors_.begin(), b.factors_.end());
        return SystemLayout(fs);
    }

    bool operator==(const SystemLayout&) const = default;

  private:
    std::vector<Factor> factors_;
};

namespace detail {

/// Index map realizing a factor reordering: out_index -> in_index.
inline std::vector<std::size_t> permutation_index_map(const SystemLayout& in,
                                                      const std::vector<std::string>& new_order) {
    if (new_order.size() != in.size())
        throw std::invalid_argument("permute: order must list every factor exactly once");
    std::vector<std::size_t> src_pos(new_order.size());
    for (std::size_t k = 0; k < new_order.size(); ++k) src_pos[k] = in.index_of(new_order[k]);

    const auto in_strides = in.strides();
    SystemLayout out = in.sublayout(new_order);
    // sublayout keeps original order; build the reordered layout explicitly
    std::vector<Factor> fs;
    for (const auto& l : new_order) fs.push_back(Factor{l, in.dim_of(l)});
    out = SystemLayout(fs);
    const auto out_strides = out.strides();

    std::size_t n = in.total_dim();
    std::vector<std::size_t> map(n);
    std::vector<std::size_t> digits(new_order.size(), 0);
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t rem = idx, src = 0;
        for (std::size_t k = 0; k < new_order.size(); ++k) {
            std::size_t dk = rem / out_strides[k];
            rem %= out_strides[k];
            src += dk * in_strides[src_pos[k]];
        }
        map[idx] = src;
    }
    return map;
}

}  // namespace detail

/// Reorder the tensor factors of a vector (pure-state amplitudes).
inline std::vector<complexd> permute_vector(const std::vector<complexd>& v, const SystemLayout& layout,
                                            const std::vector<std::string>& new_order) {
    auto map = detail::permutation_index_map(layout, new_order);
    std::vector<complexd> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[map[i]];
    return out;
}

/// Reorder the tensor factors of a square operator.
inline ComplexMatrix permute_operator(const ComplexMatrix& m, const SystemLayout& layout,
                                      const std::vector<std::string>& new_order) {
    if (!m.is_square() || m.rows() != layout.total_dim())
        throw std::invalid_argument("permute_operator: matrix does not match layout");
    auto map = detail::permutation_index_map(layout, new_order);
    ComplexMatrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(map[i], map[j]);
    return out;
}

/// Partial trace onto the kept labels. Kept factors retain their layout order,
/// regardless of the order in `keep`.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const SystemLayout& layout,
                                   const std::vector<std::string>& keep) {
    if (!m.is_square() || m.rows() != layout.total_dim())
        throw std::invalid_argument("partial_trace: matrix does not match layout");
    for (const auto& l : keep) layout.index_of(l);  // validates labels

    SystemLayout kept = layout.sublayout(keep);
    SystemLayout traced = layout.complement_layout(keep);
    if (traced.size() == 0) return m;

    std::size_t dk = kept.total_dim();
    std::size_t dt = traced.total_dim();

    // Index arithmetic: full index = sum over kept digits * stride + traced digits * stride.
    const auto strides = layout.strides();
    std::vector<std::size_t> kept_stride, traced_stride;
    std::vector<std::size_t> kept_dim, traced_dim;
    for (std::size_t k = 0; k < layout.size(); ++k) {
        const auto& f = layout.factor(k);
        if (std::find(keep.begin(), keep.end(), f.label) != keep.end()) {
            kept_stride.push_back(strides[k]);
            kept_dim.push_back(f.dim);
        } else {
            traced_stride.push_back(strides[k]);
            traced_dim.push_back(f.dim);
        }
    }
    auto expand = [](std::size_t idx, const std::vector<std::size_t>& dims,
                     const std::vector<std::size_t>& strd) {
        std::size_t full = 0;
        for (std::size_t k = dims.size(); k-- > 0;) {
            full += (idx % dims[k]) * strd[k];
            idx /= dims[k];
        }
        return full;
    };

    std::vector<std::size_t> kept_full(dk), traced_full(dt);
    for (std::size_t i = 0; i < dk; ++i) kept_full[i] = expand(i, kept_dim, kept_stride);
    for (std::size_t t = 0; t < dt; ++t) traced_full[t] = expand(t, traced_dim, traced_stride);

    ComplexMatrix out(dk, dk);
    for (std::size_t i = 0; i < dk; ++i)
        for (std::size_t j = 0; j < dk; ++j) {
            complexd s = 0.0;
            for (std::size_t t = 0; t < dt; ++t)
                s += m(kept_full[i] + traced_full[t], kept_full[j] + traced_full[t]);
            out(i, j) = s;
        }
    return out;
}

/// Apply an operator op (d_out x d_in) to the listed factors of a vector; the
/// acted factors are consumed in the order given and replaced by `out_factors`
/// at the front of the resulting layout, followed by the untouched factors in
/// their original order.
inline std::pair<std::vector<complexd>, SystemLayout> apply_to_factors(
    const std::vector<complexd>& v, const SystemLayout& layout, const ComplexMatrix& op,
    const std::vector<std::string>& acted, const std::vector<Factor>& out_factors) {
    std::size_t d_act = layout.dim_of(acted);
    if (op.cols() != d_act)
        throw std::invalid_argument("apply_to_factors: operator input dimension mismatch");
    SystemLayout rest = layout.complement_layout(acted);
    std::vector<std::string> front_order = acted;
    for (const auto& l : rest.labels()) front_order.push_back(l);
    std::vector<complexd> perm = permute_vector(v, layout, front_order);

    std::size_t d_rest = rest.total_dim();
    std::size_t d_out = op.rows();
    std::vector<complexd> out(d_out * d_rest, complexd(0.0));
    // out[(o, r)] = sum_a op(o, a) perm[(a, r)]
    for (std::size_t o = 0; o < d_out; ++o)
        for (std::size_t a = 0; a < d_act; ++a) {
            complexd w = op(o, a);
            if (w == complexd(0.0)) continue;
            const complexd* src = perm.data() + a * d_rest;
            complexd* dst = out.data() + o * d_rest;
            for (std::size_t r = 0; r < d_rest; ++r) dst[r] += w * src[r];
        }

    std::size_t d_new = 1;
    for (const auto& f : out_factors) d_new *= f.dim;
    if (d_new != d_out)
        throw std::invalid_argument("apply_to_factors: out_factors do not match operator output");
    std::vector<Factor> fs = out_factors;
    for (const auto& f : rest.factors()) fs.push_back(f);
    return {std::move(out), SystemLayout(fs)};
}

/// Conjugate a density operator by op on the listed factors: op rho op^dagger.
inline std::pair<ComplexMatrix, SystemLayout> conjugate_on_factors(
    const ComplexMatrix& rho, const SystemLayout& layout, const ComplexMatrix& op,
    const std::vector<std::string>& acted, const std::vector<Factor>& out_factors) {
    std::size_t d_act = layout.dim_of(acted);
    if (op.cols() != d_act)
        throw std::invalid_argument("conjugate_on_factors: operator input dimension mismatch");
    SystemLayout rest = layout.complement_layout(acted);
    std::vector<std::string> front_order = acted;
    for (const auto& l : rest.labels()) front_order.push_back(l);
    ComplexMatrix perm = permute_operator(rho, layout, front_order);

    std::size_t d_rest = rest.total_dim();
    ComplexMatrix big = tensor(op, ComplexMatrix::identity(d_rest));
    ComplexMatrix out = big * perm * big.adjoint();

    std::vector<Factor> fs = out_factors;
    for (const auto& f : rest.factors()) fs.push_back(f);
    SystemLayout out_layout(fs);
    if (out_layout.total_dim() != out.rows())
        throw std::invalid_argument("conjugate_on_factors: out_factors do not match operator output");
    return {std::move(out), out_layout};
}

}  // namespace oneshot
