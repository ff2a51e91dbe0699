#pragma once

#include <Eigen/Dense>

#include "oneshot/matrix.hpp"

namespace oneshot {

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
struct EigenDecomposition {
    std::vector<double> eigenvalues;
    ComplexMatrix eigenvectors;  // columns, unitary

    ComplexMatrix reconstruct() const {
        std::size_t n = eigenvalues.size();
        ComplexMatrix d(n, n);
        for (std::size_t i = 0; i < n; ++i) d(i, i) = eigenvalues[i];
        return eigenvectors * d * eigenvectors.adjoint();
    }

    /// V f(diag) V^dagger for a scalar function of the eigenvalues.
    template <typename F>
    ComplexMatrix apply(F&& f) const {
        std::size_t n = eigenvalues.size();
        ComplexMatrix d(n, n);
        for (std::size_t i = 0; i < n; ++i) d(i, i) = f(eigenvalues[i]);
        return eigenvectors * d * eigenvectors.adjoint();
    }
};

/// Hermitian eigendecomposition (tridiagonalization + implicit shifted QL/QR,
/// as provided by Eigen's SelfAdjointEigenSolver). The input is symmetrized
/// internally; inputs farther than 1e-10 (relative) from Hermitian are rejected.
inline EigenDecomposition eig_hermitian(const ComplexMatrix& h) {
    if (!h.is_square()) throw std::invalid_argument("eig_hermitian: matrix not square");
    double scale = std::max(1.0, h.frobenius_norm());
    if (h.hermiticity_error() > 1e-10 * scale)
        throw std::domain_error("eig_hermitian: matrix is not Hermitian within tolerance");

    std::size_t n = h.rows();
    Eigen::MatrixXcd m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m(i, j) = 0.5 * (h(i, j) + std::conj(h(j, i)));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eig_hermitian: eigensolver failed to converge");

    EigenDecomposition out;
    out.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    out.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out.eigenvectors(i, j) = solver.eigenvectors()(i, j);
    return out;
}

/// Square root of a positive semidefinite matrix. Eigenvalues in
/// [-1e-10 * max(1, ||p||_F), 0) are clipped to zero; anything lower is an error.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& p) {
    EigenDecomposition ed = eig_hermitian(p);
    double tol = 1e-10 * std::max(1.0, p.frobenius_norm());
    for (double lam : ed.eigenvalues)
        if (lam < -tol) throw std::domain_error("psd_sqrt: matrix has a negative eigenvalue");
    return ed.apply([](double lam) { return std::sqrt(std::max(lam, 0.0)); });
}

/// Sum of singular values, computed through the Hermitian embedding
/// [[0, M], [M^dagger, 0]], whose spectrum is the +/- singular-value pairs.
inline double trace_norm(const ComplexMatrix& m) {
    if (!m.is_square()) throw std::invalid_argument("trace_norm: matrix not square");
    std::size_t n = m.rows();
    ComplexMatrix big(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            big(i, n + j) = m(i, j);
            big(n + j, i) = std::conj(m(i, j));
        }
    EigenDecomposition ed = eig_hermitian(big);
    double s = 0.0;
    for (double lam : ed.eigenvalues) s += std::abs(lam);
    return 0.5 * s;
}

struct Svd {
    ComplexMatrix u;                  // rows x r
    std::vector<double> singular;     // descending
    ComplexMatrix v;                  // cols x r, M = U diag(s) V^dagger
};

/// Thin SVD via Eigen's two-sided Jacobi (deterministic; ties resolved by the
/// solver's fixed sweep order).
inline Svd svd(const ComplexMatrix& m) {
    Eigen::MatrixXcd em(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) em(i, j) = m(i, j);
    Eigen::JacobiSVD<Eigen::MatrixXcd> solver(em, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Svd out;
    Eigen::Index r = solver.singularValues().size();
    out.singular.assign(solver.singularValues().data(), solver.singularValues().data() + r);
    out.u = ComplexMatrix(m.rows(), static_cast<std::size_t>(r));
    out.v = ComplexMatrix(m.cols(), static_cast<std::size_t>(r));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < r; ++j) out.u(i, static_cast<std::size_t>(j)) = solver.matrixU()(i, j);
    for (std::size_t i = 0; i < m.cols(); ++i)
        for (Eigen::Index j = 0; j < r; ++j) out.v(i, static_cast<std::size_t>(j)) = solver.matrixV()(i, j);
    return out;
}

/// Largest eigenvalue of a Hermitian matrix.
inline double max_eigenvalue(const ComplexMatrix& h) {
    EigenDecomposition ed = eig_hermitian(h);
    return ed.eigenvalues.back();
}

/// Completes the columns of a (rows x k) isometry to a full unitary basis by
/// Gram-Schmidt against the standard basis in lexicographic order.
inline ComplexMatrix complete_isometry(const ComplexMatrix& v, std::size_t target_cols) {
    std::size_t rows = v.rows();
    if (target_cols > rows || v.cols() > target_cols)
        throw std::invalid_argument("complete_isometry: invalid target");
    std::vector<std::vector<complexd>> basis;
    for (std::size_t j = 0; j < v.cols(); ++j) {
        std::vector<complexd> col(rows);
        for (std::size_t i = 0; i < rows; ++i) col[i] = v(i, j);
        basis.push_back(std::move(col));
    }
    for (std::size_t e = 0; e < rows && basis.size() < target_cols; ++e) {
        std::vector<complexd> cand(rows, complexd(0.0));
        cand[e] = 1.0;
        for (const auto& b : basis) {
            complexd ov = 0.0;
            for (std::size_t i = 0; i < rows; ++i) ov += std::conj(b[i]) * cand[i];
            for (std::size_t i = 0; i < rows; ++i) cand[i] -= ov * b[i];
        }
        double nrm = 0.0;
        for (const auto& z : cand) nrm += std::norm(z);
        nrm = std::sqrt(nrm);
        if (nrm > 1e-8) {
            for (auto& z : cand) z /= nrm;
            basis.push_back(std::move(cand));
        }
    }
    if (basis.size() < target_cols)
        throw std::runtime_error("complete_isometry: could not complete basis");
    ComplexMatrix out(rows, target_cols);
    for (std::size_t j = 0; j < target_cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) out(i, j) = basis[j][i];
    return out;
}

}  // namespace oneshot
