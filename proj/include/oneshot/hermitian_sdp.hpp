#pragma once

#include "oneshot/sdp.hpp"

namespace oneshot::sdp {

/// Builder for semidefinite programs over complex Hermitian PSD blocks (plus
/// nonnegative scalar slack blocks). Hermitian blocks are handled through the
/// real symmetric embedding H = A + iB -> [[A, -B], [B, A]] of dimension 2n;
/// coefficients carry a factor 1/2 so objective and constraint values coincide
/// with their complex counterparts, and solutions are extracted by averaging
/// the two embedded copies.
class HermitianSdpBuilder {
  public:
    enum class BlockKind { hermitian, scalar };

    int add_hermitian_block(std::size_t cdim) {
        int real_id = problem_.add_block(static_cast<int>(2 * cdim));
        blocks_.push_back({BlockKind::hermitian, cdim, real_id});
        return static_cast<int>(blocks_.size()) - 1;
    }

    int add_scalar_block() {
        int real_id = problem_.add_block(1);
        blocks_.push_back({BlockKind::scalar, 1, real_id});
        return static_cast<int>(blocks_.size()) - 1;
    }

    int new_constraint(double rhs) {
        problem_.constraints.push_back(LinearConstraint{{}, rhs});
        return static_cast<int>(problem_.constraints.size()) - 1;
    }

    // ---- objective (minimized) ----

    void min_objective_entry(int block, std::size_t i, std::size_t j, complexd v) {
        emit(problem_.objective[real_block(block)], block, i, j, v);
    }

    void min_objective_trace(int block, double coeff) {
        for (std::size_t i = 0; i < cdim(block); ++i)
            min_objective_entry(block, i, i, complexd(coeff, 0.0));
    }

    void min_objective_scalar(int block, double coeff) {
        check_scalar(block);
        problem_.objective[real_block(block)].push_back({0, 0, coeff});
    }

    // ---- constraint terms; see entry semantics below ----

    /// Adds w * Re X_ij (i <= j) to the constraint row.
    void constraint_entry_re(int row, int block, std::size_t i, std::size_t j, double w) {
        if (i == j)
            constraint_entry(row, block, i, i, complexd(w, 0.0));
        else
            constraint_entry(row, block, i, j, complexd(0.5 * w, 0.0));
    }

    /// Adds w * Im X_ij (i < j) to the constraint row.
    void constraint_entry_im(int row, int block, std::size_t i, std::size_t j, double w) {
        if (i >= j) throw std::invalid_argument("constraint_entry_im: need i < j");
        constraint_entry(row, block, i, j, complexd(0.0, 0.5 * w));
    }

    /// Raw pair semantics: coefficient matrix A gains A_ij += v, A_ji += conj(v)
    /// (i < j), contributing 2 Re(conj(v) X_ij); for i == j, v must be real and
    /// contributes v X_ii.
    void constraint_entry(int row, int block, std::size_t i, std::size_t j, complexd v) {
        emit(term_entries(row, block), block, i, j, v);
    }

    void constraint_trace(int row, int block, double w) {
        for (std::size_t i = 0; i < cdim(block); ++i)
            constraint_entry(row, block, i, i, complexd(w, 0.0));
    }

    /// + <A, X> for a dense Hermitian coefficient.
    void constraint_dense(int row, int block, const ComplexMatrix& a) {
        if (a.rows() != cdim(block) || a.cols() != cdim(block))
            throw std::invalid_argument("constraint_dense: coefficient shape mismatch");
        for (std::size_t i = 0; i < a.rows(); ++i) {
            if (std::abs(a(i, i).imag()) > 1e-12)
                throw std::invalid_argument("constraint_dense: coefficient not Hermitian");
            if (a(i, i).real() != 0.0) constraint_entry(row, block, i, i, a(i, i).real());
            for (std::size_t j = i + 1; j < a.cols(); ++j)
                if (a(i, j) != complexd(0.0)) constraint_entry(row, block, i, j, a(i, j));
        }
    }

    void constraint_scalar(int row, int block, double w) {
        check_scalar(block);
        term_entries(row, block).push_back({0, 0, w});
    }

    const SdpProblem& problem() const { return problem_; }

    SdpSolution solve(SolverOptions opt = {}) const { return sdp::solve(problem_, opt); }

    ComplexMatrix extract_hermitian(const SdpSolution& sol, int block) const {
        const auto& info = blocks_.at(block);
        if (info.kind != BlockKind::hermitian)
            throw std::invalid_argument("extract_hermitian: not a Hermitian block");
        const Eigen::MatrixXd& xr = sol.variable.at(info.real_id);
        std::size_t d = info.cdim;
        ComplexMatrix out(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                double re = 0.5 * (xr(i, j) + xr(d + i, d + j));
                double im = 0.5 * (xr(d + i, j) - xr(i, d + j));
                out(i, j) = complexd(re, im);
            }
        // average out the residual anti-Hermitian part of the embedding
        ComplexMatrix herm(d, d);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                herm(i, j) = 0.5 * (out(i, j) + std::conj(out(j, i)));
        return herm;
    }

    double extract_scalar(const SdpSolution& sol, int block) const {
        const auto& info = blocks_.at(block);
        if (info.kind != BlockKind::scalar)
            throw std::invalid_argument("extract_scalar: not a scalar block");
        return sol.variable.at(info.real_id)(0, 0);
    }

  private:
    struct BlockInfo {
        BlockKind kind;
        std::size_t cdim;
        int real_id;
    };

    std::size_t cdim(int block) const { return blocks_.at(block).cdim; }
    int real_block(int block) const { return blocks_.at(block).real_id; }

    void check_scalar(int block) const {
        if (blocks_.at(block).kind != BlockKind::scalar)
            throw std::invalid_argument("expected a scalar block");
    }

    std::vector<SparseEntry>& term_entries(int row, int block) {
        auto& terms = problem_.constraints.at(row).terms;
        int real_id = real_block(block);
        for (auto& t : terms)
            if (t.block == real_id) return t.entries;
        terms.push_back(BlockTerm{real_id, {}});
        return terms.back().entries;
    }

    /// Embedded sparse entries for the complex coefficient pair (i, j, v), with
    /// the 1/2 factor folded in.
    void emit(std::vector<SparseEntry>& dst, int block, std::size_t i, std::size_t j, complexd v) {
        const auto& info = blocks_.at(block);
        if (info.kind != BlockKind::hermitian)
            throw std::invalid_argument("entry term on a scalar block");
        int d = static_cast<int>(info.cdim);
        int ii = static_cast<int>(i), jj = static_cast<int>(j);
        if (i >= info.cdim || j >= info.cdim) throw std::out_of_range("entry index out of range");
        if (i == j) {
            if (std::abs(v.imag()) > 1e-14)
                throw std::invalid_argument("diagonal coefficient must be real");
            dst.push_back({ii, ii, 0.5 * v.real()});
            dst.push_back({d + ii, d + ii, 0.5 * v.real()});
            return;
        }
        if (i > j) {  // canonicalize to i < j
            std::swap(ii, jj);
            v = std::conj(v);
        }
        double a = v.real(), b = v.imag();
        if (a != 0.0) {
            dst.push_back({jj, ii, 0.5 * a});
            dst.push_back({d + jj, d + ii, 0.5 * a});
        }
        if (b != 0.0) {
            dst.push_back({d + jj, ii, -0.5 * b});
            dst.push_back({d + ii, jj, 0.5 * b});
        }
    }

    SdpProblem problem_;
    std::vector<BlockInfo> blocks_;
};

}  // namespace oneshot::sdp
