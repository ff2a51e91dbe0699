#pragma once

#include "oneshot/hermitian_sdp.hpp"
#include "oneshot/states.hpp"

namespace oneshot {

enum class EntropyMethod { closed_form, sdp_primal_dual, duality };
enum class EntropyValidity { ok, smoothing_out_of_range, solver_failure };

inline const char* to_string(EntropyMethod m) {
    switch (m) {
        case EntropyMethod::closed_form: return "closed_form";
        case EntropyMethod::sdp_primal_dual: return "sdp_primal_dual";
        case EntropyMethod::duality: return "duality";
    }
    return "?";
}

inline const char* to_string(EntropyValidity v) {
    switch (v) {
        case EntropyValidity::ok: return "ok";
        case EntropyValidity::smoothing_out_of_range: return "smoothing_out_of_range";
        case EntropyValidity::solver_failure: return "solver_failure";
    }
    return "?";
}

struct SdpCertificate {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
};

/// Entropic value in bits with its smoothing radius and solver certificate.
struct EntropyResult {
    double value = 0.0;
    double smoothing_eps = 0.0;
    EntropyMethod method = EntropyMethod::closed_form;
    SdpCertificate certificate;
    EntropyValidity validity = EntropyValidity::ok;

    bool ok() const { return validity == EntropyValidity::ok; }
};

struct EntropyOptions {
    double tol_unsmoothed = 1e-8;
    double tol_smoothed = 1e-7;
    /// Radii with eps^2 below solver resolution are evaluated at eps = 0; the
    /// value difference is below the certificate tolerance.
    double smoothing_floor = 1e-3;
    int max_iter = 200;
};

namespace detail_entropy {

inline double log2_clamped(double x) { return std::log2(std::max(x, 1e-300)); }

inline sdp::SolverOptions solver_opts(const EntropyOptions& opt, bool smoothed) {
    sdp::SolverOptions s;
    s.tol = smoothed ? opt.tol_smoothed : opt.tol_unsmoothed;
    s.max_iter = opt.max_iter;
    return s;
}

/// Reorders rho to [sys_a..., sys_b...] and returns the matrix with the two
/// side dimensions.
struct SplitState {
    ComplexMatrix matrix;
    std::size_t da = 1;
    std::size_t db = 1;
};

inline SplitState split(const DensityOperator& rho, const std::vector<std::string>& sys_a,
                        const std::vector<std::string>& sys_b) {
    std::vector<std::string> order = sys_a;
    order.insert(order.end(), sys_b.begin(), sys_b.end());
    if (order.size() != rho.layout().size())
        throw std::invalid_argument("entropy split: labels must cover the state exactly");
    DensityOperator perm = rho.permuted(order);
    SplitState out;
    out.matrix = perm.matrix();
    out.da = rho.layout().dim_of(sys_a);
    out.db = rho.layout().dim_of(sys_b);
    return out;
}

/// Pins block[off.., off..] of a Hermitian SDP block to the matrix m.
inline void pin_corner(sdp::HermitianSdpBuilder& b, int block, const ComplexMatrix& m,
                       std::size_t off) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i; j < m.cols(); ++j) {
            int row = b.new_constraint(m(i, j).real());
            b.constraint_entry_re(row, block, off + i, off + j, 1.0);
            if (i != j) {
                int row2 = b.new_constraint(m(i, j).imag());
                b.constraint_entry_im(row2, block, off + i, off + j, 1.0);
            }
        }
}

/// Support factorization rho = W diag(lam) W^dagger with lam > 0 descending.
/// Restricting pinned fidelity corners to the support keeps the programs
/// strictly feasible for rank-deficient centers.
struct SupportBasis {
    ComplexMatrix w;             // d x r isometry
    std::vector<double> lam;     // positive eigenvalues, descending
    std::size_t rank() const { return lam.size(); }
};

inline SupportBasis support_basis(const ComplexMatrix& rho) {
    EigenDecomposition ed = eig_hermitian(rho);
    double lmax = std::max(ed.eigenvalues.back(), 0.0);
    double tol = 1e-12 * std::max(1.0, lmax);
    SupportBasis sb;
    std::size_t d = rho.rows();
    std::vector<std::size_t> kept;
    for (std::size_t k = d; k-- > 0;)
        if (ed.eigenvalues[k] > tol) kept.push_back(k);
    if (kept.empty()) throw std::invalid_argument("support_basis: zero operator");
    sb.w = ComplexMatrix(d, kept.size());
    for (std::size_t a = 0; a < kept.size(); ++a) {
        sb.lam.push_back(ed.eigenvalues[kept[a]]);
        for (std::size_t i = 0; i < d; ++i) sb.w(i, a) = ed.eigenvectors(i, kept[a]);
    }
    return sb;
}

/// Pins the (off, off) corner of a block to diag(lam).
inline void pin_corner_diag(sdp::HermitianSdpBuilder& b, int block, const std::vector<double>& lam,
                            std::size_t off) {
    for (std::size_t i = 0; i < lam.size(); ++i)
        for (std::size_t j = i; j < lam.size(); ++j) {
            int row = b.new_constraint(i == j ? lam[i] : 0.0);
            b.constraint_entry_re(row, block, off + i, off + j, 1.0);
            if (i != j) {
                int row2 = b.new_constraint(0.0);
                b.constraint_entry_im(row2, block, off + i, off + j, 1.0);
            }
        }
}

}  // namespace detail_entropy

/// Von Neumann entropy in bits, with 0 log 0 = 0.
inline double von_neumann(const DensityOperator& rho) {
    double h = 0.0;
    for (double lam : eig_hermitian(rho.matrix()).eigenvalues)
        if (lam > 1e-15) h -= lam * std::log2(lam);
    return std::max(h, 0.0);
}

inline double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::domain_error("binary_entropy: argument outside [0,1]");
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

/// I(A:B) = H(A) + H(B) - H(AB).
inline double mutual_information(const DensityOperator& rho, const std::vector<std::string>& sys_a,
                                 const std::vector<std::string>& sys_b) {
    detail_entropy::split(rho, sys_a, sys_b);  // validates the partition
    double ha = von_neumann(rho.restricted_to(sys_a));
    double hb = von_neumann(rho.restricted_to(sys_b));
    double hab = von_neumann(rho);
    return ha + hb - hab;
}

/// H(A|B) = H(AB) - H(B).
inline double conditional_von_neumann(const DensityOperator& rho,
                                      const std::vector<std::string>& sys_a,
                                      const std::vector<std::string>& sys_b) {
    detail_entropy::split(rho, sys_a, sys_b);
    return von_neumann(rho) - von_neumann(rho.restricted_to(sys_b));
}

/// H_max(A) = 2 log tr sqrt(rho), defined for subnormalized operators.
inline double h_max_uncond(const DensityOperator& rho) {
    double s = 0.0;
    for (double lam : eig_hermitian(rho.matrix()).eigenvalues) s += std::sqrt(std::max(lam, 0.0));
    return 2.0 * detail_entropy::log2_clamped(s);
}

struct DmaxResult {
    double value = 0.0;  // bits; +infinity on support violation
    bool finite = true;
    SdpCertificate certificate;
};

/// Max-relative entropy log min{lambda : rho <= lambda sigma}. Computed on the
/// support of sigma via the spectral route and cross-checked against the
/// trace-scaling SDP to 1e-7.
inline DmaxResult d_max(const DensityOperator& rho, const DensityOperator& sigma,
                        EntropyOptions opt = {}) {
    detail::check_same_layout(rho, sigma, "d_max");
    std::size_t d = rho.dim();
    EigenDecomposition es = eig_hermitian(sigma.matrix());
    double lmax_s = std::max(es.eigenvalues.back(), 0.0);
    double support_tol = 1e-12 * std::max(1.0, lmax_s);

    // support violation: rho has weight outside supp(sigma)
    ComplexMatrix proj_perp(d, d);
    for (std::size_t k = 0; k < d; ++k) {
        if (es.eigenvalues[k] > support_tol) continue;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j)
                proj_perp(i, j) += es.eigenvectors(i, k) * std::conj(es.eigenvectors(j, k));
    }
    double outside = (proj_perp * rho.matrix() * proj_perp).trace().real();
    if (outside > 1e-10) {
        DmaxResult r;
        r.value = std::numeric_limits<double>::infinity();
        r.finite = false;
        return r;
    }

    ComplexMatrix sinv_half = es.apply([&](double lam) {
        return lam > support_tol ? 1.0 / std::sqrt(lam) : 0.0;
    });
    double lam_spec = max_eigenvalue(sinv_half * rho.matrix() * sinv_half);

    DmaxResult r;
    r.value = detail_entropy::log2_clamped(lam_spec);
    if (es.eigenvalues.front() <= 1e-8 * std::max(1.0, lmax_s)) {
        // rank-deficient sigma: the scaling program has no interior, keep the
        // spectral value only
        return r;
    }

    // SDP cross-check: min t with t sigma - rho >= 0
    sdp::HermitianSdpBuilder b;
    int bt = b.add_scalar_block();
    int bs = b.add_hermitian_block(d);
    b.min_objective_scalar(bt, 1.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            int row = b.new_constraint(-rho.matrix()(i, j).real());
            b.constraint_entry_re(row, bs, i, j, 1.0);
            b.constraint_scalar(row, bt, -sigma.matrix()(i, j).real());
            if (i != j) {
                int row2 = b.new_constraint(-rho.matrix()(i, j).imag());
                b.constraint_entry_im(row2, bs, i, j, 1.0);
                b.constraint_scalar(row2, bt, -sigma.matrix()(i, j).imag());
            }
        }
    sdp::SdpSolution sol = b.solve(detail_entropy::solver_opts(opt, false));
    r.certificate = {sol.primal_value, sol.dual_value, sol.gap};
    if (sol.status == sdp::SolveStatus::optimal &&
        std::abs(sol.primal_value - lam_spec) > 1e-7 * std::max(1.0, lam_spec))
        throw std::runtime_error("d_max: spectral and SDP routes disagree");
    return r;
}

/// Conditional min-entropy: -log min{tr X_B : I_A (x) X_B >= rho_AB, X_B >= 0}.
inline EntropyResult h_min_cond(const DensityOperator& rho, const std::vector<std::string>& sys_a,
                                const std::vector<std::string>& sys_b, EntropyOptions opt = {}) {
    detail_entropy::SplitState st = detail_entropy::split(rho, sys_a, sys_b);
    EntropyResult res;
    res.smoothing_eps = 0.0;

    if (st.db == 1) {
        double lmax = max_eigenvalue(st.matrix);
        res.value = -detail_entropy::log2_clamped(lmax);
        res.method = EntropyMethod::closed_form;
        res.certificate = {lmax, lmax, 0.0};
        return res;
    }

    sdp::HermitianSdpBuilder b;
    int bx = b.add_hermitian_block(st.db);
    int bs = b.add_hermitian_block(st.da * st.db);
    b.min_objective_trace(bx, 1.0);
    std::size_t dab = st.da * st.db;
    for (std::size_t p = 0; p < dab; ++p)
        for (std::size_t q = p; q < dab; ++q) {
            std::size_t a = p / st.db, bi = p % st.db, a2 = q / st.db, bj = q % st.db;
            int row = b.new_constraint(-st.matrix(p, q).real());
            b.constraint_entry_re(row, bs, p, q, 1.0);
            if (a == a2) b.constraint_entry_re(row, bx, bi, bj, -1.0);
            if (p != q) {
                int row2 = b.new_constraint(-st.matrix(p, q).imag());
                b.constraint_entry_im(row2, bs, p, q, 1.0);
                if (a == a2 && bi < bj) b.constraint_entry_im(row2, bx, bi, bj, -1.0);
            }
        }
    sdp::SdpSolution sol = b.solve(detail_entropy::solver_opts(opt, false));
    res.method = EntropyMethod::sdp_primal_dual;
    res.certificate = {sol.primal_value, sol.dual_value, sol.gap};
    if (sol.status != sdp::SolveStatus::optimal) {
        res.validity = EntropyValidity::solver_failure;
        res.value = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    res.value = -detail_entropy::log2_clamped(sol.primal_value);
    return res;
}

/// Smoothed conditional min-entropy as one program over the fidelity ball:
/// minimize tr X_B over {rho_bar >= 0, tr rho_bar <= 1, F(rho_bar, rho) >=
/// sqrt(1 - eps^2), rho_bar <= I (x) X_B}.
inline EntropyResult h_min_smooth(const DensityOperator& rho, const std::vector<std::string>& sys_a,
                                  const std::vector<std::string>& sys_b, double eps,
                                  EntropyOptions opt = {}) {
    if (!(eps >= 0.0 && eps < 1.0)) {
        EntropyResult res;
        res.smoothing_eps = eps;
        res.validity = EntropyValidity::smoothing_out_of_range;
        res.value = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    if (eps < opt.smoothing_floor) {
        EntropyResult res = h_min_cond(rho, sys_a, sys_b, opt);
        res.smoothing_eps = eps;
        return res;
    }

    detail_entropy::SplitState st = detail_entropy::split(rho, sys_a, sys_b);
    std::size_t d = st.da * st.db;
    double threshold = std::sqrt(std::max(0.0, 1.0 - eps * eps));

    // F(rho_bar, rho) = max Re tr(K W^dag) over [[rho_bar, K], [K^dag, diag(lam)]]
    // >= 0 with the center factored on its support, rho = W diag(lam) W^dag
    detail_entropy::SupportBasis sb = detail_entropy::support_basis(st.matrix);
    std::size_t r = sb.rank();

    sdp::HermitianSdpBuilder b;
    int bg = b.add_hermitian_block(d + r);  // [[rho_bar, K], [K^dag, diag(lam)]]
    int bs1 = b.add_hermitian_block(d);     // I (x) X_B - rho_bar
    int bx = b.add_hermitian_block(st.db);
    int btr = b.add_scalar_block();  // 1 - tr rho_bar
    int bu = b.add_scalar_block();   // Re tr(K W^dag) - threshold
    b.min_objective_trace(bx, 1.0);

    detail_entropy::pin_corner_diag(b, bg, sb.lam, d);

    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p; q < d; ++q) {
            std::size_t a = p / st.db, bi = p % st.db, a2 = q / st.db, bj = q % st.db;
            int row = b.new_constraint(0.0);  // S1 + rho_bar - I (x) X_B = 0
            b.constraint_entry_re(row, bs1, p, q, 1.0);
            b.constraint_entry_re(row, bg, p, q, 1.0);
            if (a == a2) b.constraint_entry_re(row, bx, bi, bj, -1.0);
            if (p != q) {
                int row2 = b.new_constraint(0.0);
                b.constraint_entry_im(row2, bs1, p, q, 1.0);
                b.constraint_entry_im(row2, bg, p, q, 1.0);
                if (a == a2 && bi < bj) b.constraint_entry_im(row2, bx, bi, bj, -1.0);
            }
        }
    {
        int row = b.new_constraint(1.0);  // tr rho_bar + s = 1
        for (std::size_t i = 0; i < d; ++i) b.constraint_entry_re(row, bg, i, i, 1.0);
        b.constraint_scalar(row, btr, 1.0);
    }
    {
        int row = b.new_constraint(threshold);  // Re tr(K W^dag) - u = threshold
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t a = 0; a < r; ++a)
                if (sb.w(i, a) != complexd(0.0))
                    b.constraint_entry(row, bg, i, d + a, 0.5 * sb.w(i, a));
        b.constraint_scalar(row, bu, -1.0);
    }

    sdp::SdpSolution sol = b.solve(detail_entropy::solver_opts(opt, true));
    EntropyResult res;
    res.smoothing_eps = eps;
    res.method = EntropyMethod::sdp_primal_dual;
    res.certificate = {sol.primal_value, sol.dual_value, sol.gap};
    if (sol.status != sdp::SolveStatus::optimal) {
        res.validity = EntropyValidity::solver_failure;
        res.value = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    res.value = -detail_entropy::log2_clamped(sol.primal_value);
    return res;
}

/// Unsmoothed conditional max-entropy, computed by duality on a purification
/// and cross-checked against the direct program max_sigma 2 log F(rho_AB,
/// I_A (x) sigma_B) to 1e-6.
inline EntropyResult h_max_cond(const DensityOperator& rho, const std::vector<std::string>& sys_a,
                                const std::vector<std::string>& sys_b, EntropyOptions opt = {}) {
    // duality route
    PureState psi = purify(rho, "_hmaxC");
    std::vector<std::string> keep = sys_a;
    keep.push_back("_hmaxC");
    DensityOperator rho_ac = psi.marginal(keep);
    EntropyResult hmin = h_min_cond(rho_ac, sys_a, {"_hmaxC"}, opt);
    EntropyResult res;
    res.value = -hmin.value;
    res.smoothing_eps = 0.0;
    res.method = EntropyMethod::duality;
    res.certificate = hmin.certificate;
    res.validity = hmin.validity;
    if (!res.ok()) return res;

    // direct route: max Re tr(W K) with [[diag(lam) pinned, K], [K^dag,
    // I (x) sigma_B]] >= 0 and rho = W diag(lam) W^dag on its support
    detail_entropy::SplitState st = detail_entropy::split(rho, sys_a, sys_b);
    std::size_t d = st.da * st.db;
    detail_entropy::SupportBasis sb = detail_entropy::support_basis(st.matrix);
    std::size_t r = sb.rank();
    sdp::HermitianSdpBuilder b;
    int bg = b.add_hermitian_block(r + d);
    int bsig = b.add_hermitian_block(st.db);
    for (std::size_t a = 0; a < r; ++a)
        for (std::size_t p = 0; p < d; ++p)
            if (sb.w(p, a) != complexd(0.0))
                b.min_objective_entry(bg, a, r + p, -0.5 * std::conj(sb.w(p, a)));
    detail_entropy::pin_corner_diag(b, bg, sb.lam, 0);
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p; q < d; ++q) {
            std::size_t a = p / st.db, bi = p % st.db, a2 = q / st.db, bj = q % st.db;
            int row = b.new_constraint(0.0);  // G22 - I (x) sigma_B = 0
            b.constraint_entry_re(row, bg, r + p, r + q, 1.0);
            if (a == a2) b.constraint_entry_re(row, bsig, bi, bj, -1.0);
            if (p != q) {
                int row2 = b.new_constraint(0.0);
                b.constraint_entry_im(row2, bg, r + p, r + q, 1.0);
                if (a == a2 && bi < bj) b.constraint_entry_im(row2, bsig, bi, bj, -1.0);
            }
        }
    {
        int row = b.new_constraint(1.0);
        b.constraint_trace(row, bsig, 1.0);
    }
    sdp::SdpSolution sol = b.solve(detail_entropy::solver_opts(opt, false));
    if (sol.status == sdp::SolveStatus::optimal) {
        double direct = 2.0 * detail_entropy::log2_clamped(-sol.primal_value);
        if (std::abs(direct - res.value) > 1e-6)
            throw std::runtime_error("h_max_cond: duality and direct routes disagree");
    }
    return res;
}

/// Smoothed conditional max-entropy via the duality route: purify rho_AB with
/// C and return -H_min^eps(A|C).
inline EntropyResult h_max_smooth(const DensityOperator& rho, const std::vector<std::string>& sys_a,
                                  const std::vector<std::string>& sys_b, double eps,
                                  EntropyOptions opt = {}) {
    if (!(eps >= 0.0 && eps < 1.0)) {
        EntropyResult res;
        res.smoothing_eps = eps;
        res.validity = EntropyValidity::smoothing_out_of_range;
        res.value = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    detail_entropy::split(rho, sys_a, sys_b);  // validates the partition
    PureState psi = purify(rho, "_hmaxC");
    std::vector<std::string> keep = sys_a;
    keep.push_back("_hmaxC");
    DensityOperator rho_ac = psi.marginal(keep);
    EntropyResult hmin = h_min_smooth(rho_ac, sys_a, {"_hmaxC"}, eps, opt);
    EntropyResult res;
    res.value = -hmin.value;
    res.smoothing_eps = eps;
    res.method = EntropyMethod::duality;
    res.certificate = hmin.certificate;
    res.validity = hmin.validity;
    return res;
}

}  // namespace oneshot
