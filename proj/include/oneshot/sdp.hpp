#pragma once

#include <fstream>
#include <optional>
#include <sstream>

#include <Eigen/Dense>

#include "oneshot/matrix.hpp"

namespace oneshot::sdp {

/// One entry of a sparse symmetric matrix, canonical form i >= j; an
/// off-diagonal entry stands for the symmetric pair (i,j) and (j,i).
struct SparseEntry {
    int i = 0;
    int j = 0;
    double v = 0.0;
};

struct BlockTerm {
    int block = 0;
    std::vector<SparseEntry> entries;
};

struct LinearConstraint {
    std::vector<BlockTerm> terms;
    double rhs = 0.0;
};

/// Standard-form semidefinite program over a block-diagonal symmetric PSD
/// variable X: minimize sum_b <C_b, X_b> subject to <A_j, X> = b_j, X >= 0.
struct SdpProblem {
    std::vector<int> block_dims;
    std::vector<std::vector<SparseEntry>> objective;  // one sparse C per block
    std::vector<LinearConstraint> constraints;

    int add_block(int dim) {
        block_dims.push_back(dim);
        objective.emplace_back();
        return static_cast<int>(block_dims.size()) - 1;
    }
};

enum class SolveStatus { optimal, infeasible, max_iter, numerical_failure };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::numerical_failure: return "numerical_failure";
    }
    return "?";
}

struct SdpSolution {
    SolveStatus status = SolveStatus::numerical_failure;
    double primal_value = 0.0;
    double dual_value = 0.0;
    double gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    std::vector<Eigen::MatrixXd> variable;  // X blocks
    std::vector<Eigen::MatrixXd> dual_slack;
    std::vector<double> y;
    int iterations = 0;
};

struct SolverOptions {
    double tol = 1e-8;
    int max_iter = 200;
    double step_fraction = 0.98;
    double infeasibility_ray_norm = 1e6;
    bool verbose = false;
    /// When nonempty, the problem is dumped as JSON before solving (debugging
    /// aid for cross-checking against external solvers; not a stable API).
    std::string debug_dump_path;
};

/// Debug serialization. Schema: {"blocks": [dim, ...], "objective":
/// [[[i, j, v], ...] per block], "constraints": [{"rhs": r, "terms":
/// [{"block": b, "entries": [[i, j, v], ...]}, ...]}, ...]}, where each entry
/// [i, j, v] with i >= j denotes the symmetric pair.
inline std::string dump_problem_json(const SdpProblem& p) {
    std::ostringstream out;
    out.precision(17);
    out << "{\"blocks\":[";
    for (std::size_t b = 0; b < p.block_dims.size(); ++b)
        out << (b ? "," : "") << p.block_dims[b];
    out << "],\"objective\":[";
    for (std::size_t b = 0; b < p.objective.size(); ++b) {
        out << (b ? "," : "") << "[";
        for (std::size_t k = 0; k < p.objective[b].size(); ++k) {
            const auto& e = p.objective[b][k];
            out << (k ? "," : "") << "[" << e.i << "," << e.j << "," << e.v << "]";
        }
        out << "]";
    }
    out << "],\"constraints\":[";
    for (std::size_t j = 0; j < p.constraints.size(); ++j) {
        const auto& c = p.constraints[j];
        out << (j ? "," : "") << "{\"rhs\":" << c.rhs << ",\"terms\":[";
        for (std::size_t t = 0; t < c.terms.size(); ++t) {
            out << (t ? "," : "") << "{\"block\":" << c.terms[t].block << ",\"entries\":[";
            for (std::size_t k = 0; k < c.terms[t].entries.size(); ++k) {
                const auto& e = c.terms[t].entries[k];
                out << (k ? "," : "") << "[" << e.i << "," << e.j << "," << e.v << "]";
            }
            out << "]}";
        }
        out << "]}";
    }
    out << "]}";
    return out.str();
}

namespace detail {

inline void add_sparse(Eigen::MatrixXd& dense, const std::vector<SparseEntry>& entries,
                       double coeff) {
    for (const auto& e : entries) {
        dense(e.i, e.j) += coeff * e.v;
        if (e.i != e.j) dense(e.j, e.i) += coeff * e.v;
    }
}

inline double sparse_dot(const std::vector<SparseEntry>& entries, const Eigen::MatrixXd& dense) {
    double s = 0.0;
    for (const auto& e : entries) s += e.v * (e.i == e.j ? dense(e.i, e.i) : 2.0 * dense(e.i, e.j));
    return s;
}

inline double sparse_fnorm(const std::vector<SparseEntry>& entries) {
    double s = 0.0;
    for (const auto& e : entries) s += e.v * e.v * (e.i == e.j ? 1.0 : 2.0);
    return std::sqrt(s);
}

/// W A W for sparse symmetric A: sum of scaled outer products of W's columns.
inline void sandwich_sparse(const Eigen::MatrixXd& w, const std::vector<SparseEntry>& entries,
                            Eigen::MatrixXd& out) {
    out.setZero(w.rows(), w.cols());
    for (const auto& e : entries) {
        if (e.i == e.j) {
            out.noalias() += e.v * w.col(e.i) * w.col(e.i).transpose();
        } else {
            out.noalias() += e.v * w.col(e.i) * w.col(e.j).transpose();
            out.noalias() += e.v * w.col(e.j) * w.col(e.i).transpose();
        }
    }
}

struct SymEig {
    Eigen::MatrixXd q;
    Eigen::VectorXd lam;
};

inline SymEig sym_eig(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) throw std::runtime_error("sdp: eigensolver failure");
    return {es.eigenvectors(), es.eigenvalues()};
}

inline Eigen::MatrixXd spectral_fn(const SymEig& e, double (*fn)(double)) {
    Eigen::VectorXd f(e.lam.size());
    for (Eigen::Index k = 0; k < e.lam.size(); ++k) f(k) = fn(e.lam(k));
    return e.q * f.asDiagonal() * e.q.transpose();
}

/// Largest alpha with X + alpha dX >= 0 (infinite steps capped at 1e6).
inline double max_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dx) {
    Eigen::LLT<Eigen::MatrixXd> llt(x);
    Eigen::MatrixXd s;
    if (llt.info() == Eigen::Success) {
        Eigen::MatrixXd l = llt.matrixL();
        s = l.triangularView<Eigen::Lower>().solve(dx);
        s = l.triangularView<Eigen::Lower>().solve(s.transpose()).transpose();
    } else {
        SymEig e = sym_eig(x);
        Eigen::VectorXd inv_sqrt(e.lam.size());
        for (Eigen::Index k = 0; k < e.lam.size(); ++k)
            inv_sqrt(k) = 1.0 / std::sqrt(std::max(e.lam(k), 1e-300));
        Eigen::MatrixXd xm = e.q * inv_sqrt.asDiagonal() * e.q.transpose();
        s = xm * dx * xm;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()),
                                                      Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= -1e-14) return 1e6;
    return -1.0 / lmin;
}

}  // namespace detail

/// Primal-dual interior-point solver with Nesterov-Todd scaling and a Mehrotra
/// predictor-corrector step; the Schur complement is assembled densely and
/// factored by Cholesky. Single-threaded and deterministic.
class InteriorPointSolver {
  public:
    InteriorPointSolver(const SdpProblem& p, SolverOptions opt = {}) : p_(p), opt_(opt) {
        nblocks_ = p_.block_dims.size();
        m_ = p_.constraints.size();
        if (m_ == 0) throw std::invalid_argument("sdp: at least one constraint required");
        for (int d : p_.block_dims)
            if (d <= 0) throw std::invalid_argument("sdp: nonpositive block dimension");
        // constraints indexed per block for Schur assembly
        block_constraints_.resize(nblocks_);
        for (std::size_t j = 0; j < m_; ++j)
            for (std::size_t t = 0; t < p_.constraints[j].terms.size(); ++t) {
                const auto& term = p_.constraints[j].terms[t];
                block_constraints_[term.block].push_back({j, t});
            }
    }

    SdpSolution solve() {
        using Eigen::MatrixXd;
        using Eigen::VectorXd;

        if (!opt_.debug_dump_path.empty()) {
            std::ofstream dump(opt_.debug_dump_path);
            dump << dump_problem_json(p_) << "\n";
        }

        const std::size_t nb = nblocks_;
        double n_total = 0.0;
        for (int d : p_.block_dims) n_total += d;

        // dense objective blocks and data norms
        std::vector<MatrixXd> c(nb);
        double c_norm = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            c[b].setZero(p_.block_dims[b], p_.block_dims[b]);
            detail::add_sparse(c[b], p_.objective[b], 1.0);
            c_norm += c[b].squaredNorm();
        }
        c_norm = std::sqrt(c_norm);
        VectorXd bvec(m_);
        double a_norm_max = 0.0, b_over_a = 0.0;
        for (std::size_t j = 0; j < m_; ++j) {
            bvec(j) = p_.constraints[j].rhs;
            double anorm = 0.0;
            for (const auto& term : p_.constraints[j].terms)
                anorm += std::pow(detail::sparse_fnorm(term.entries), 2);
            anorm = std::sqrt(anorm);
            a_norm_max = std::max(a_norm_max, anorm);
            b_over_a = std::max(b_over_a, (1.0 + std::abs(bvec(j))) / (1.0 + anorm));
        }

        // identity-scaled strictly feasible start with a x10 data margin
        double xi = std::max({10.0, std::sqrt(n_total), 10.0 * b_over_a});
        double eta = std::max({10.0, std::sqrt(n_total), 10.0 * std::max(c_norm, a_norm_max)});

        std::vector<MatrixXd> x(nb), z(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            x[b] = xi * MatrixXd::Identity(p_.block_dims[b], p_.block_dims[b]);
            z[b] = eta * MatrixXd::Identity(p_.block_dims[b], p_.block_dims[b]);
        }
        VectorXd y = VectorXd::Zero(m_);

        SdpSolution sol;
        sol.y.resize(m_);

        std::vector<MatrixXd> w(nb), whalf(nb), wihalf(nb);
        std::vector<detail::SymEig> veig(nb);
        std::vector<MatrixXd> rd(nb), wrdw(nb), rc(nb), dz(nb), dx(nb), dz_cor(nb), dx_cor(nb);
        MatrixXd schur;
        VectorXd rp(m_), rhs(m_), dy(m_), dy_cor(m_);

        int consecutive_short_steps = 0;

        for (int iter = 0; iter < opt_.max_iter; ++iter) {
            // residuals, objective values, mu
            double pobj = 0.0, dobj = bvec.dot(y);
            for (std::size_t j = 0; j < m_; ++j) {
                double ax = 0.0;
                for (const auto& term : p_.constraints[j].terms)
                    ax += detail::sparse_dot(term.entries, x[term.block]);
                rp(j) = bvec(j) - ax;
            }
            double mu = 0.0, dres2 = 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                pobj += (c[b].array() * x[b].array()).sum();
                mu += (x[b].array() * z[b].array()).sum();
                rd[b] = c[b] - z[b];
            }
            mu /= n_total;
            for (std::size_t j = 0; j < m_; ++j)
                for (const auto& term : p_.constraints[j].terms)
                    detail::add_sparse(rd[term.block], term.entries, -y(j));
            for (std::size_t b = 0; b < nb; ++b) dres2 += rd[b].squaredNorm();

            double pres = rp.norm() / (1.0 + bvec.norm());
            double dres = std::sqrt(dres2) / (1.0 + c_norm);
            double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

            sol.primal_value = pobj;
            sol.dual_value = dobj;
            sol.gap = std::abs(pobj - dobj);
            sol.primal_residual = pres;
            sol.dual_residual = dres;
            sol.iterations = iter;

            if (relgap <= opt_.tol && pres <= opt_.tol && dres <= opt_.tol) {
                sol.status = SolveStatus::optimal;
                finalize(sol, x, z, y);
                return sol;
            }

            // primal-infeasibility certificate: an improving dual ray
            if (y.norm() > opt_.infeasibility_ray_norm) {
                VectorXd yhat = y / y.norm();
                double ray_obj = bvec.dot(yhat);
                double ray_psd = -std::numeric_limits<double>::infinity();
                for (std::size_t b = 0; b < nb; ++b) {
                    MatrixXd s = MatrixXd::Zero(p_.block_dims[b], p_.block_dims[b]);
                    for (const auto& [j, t] : block_constraints_[b])
                        detail::add_sparse(s, p_.constraints[j].terms[t].entries, yhat(j));
                    Eigen::SelfAdjointEigenSolver<MatrixXd> es(s, Eigen::EigenvaluesOnly);
                    ray_psd = std::max(ray_psd, es.eigenvalues().maxCoeff());
                }
                if (ray_obj > 1e-7 && ray_psd <= 1e-7) {
                    sol.status = SolveStatus::infeasible;
                    finalize(sol, x, z, y);
                    return sol;
                }
            }

            // Nesterov-Todd scaling point per block: W Z W = X
            bool scaling_ok = true;
            for (std::size_t b = 0; b < nb; ++b) {
                detail::SymEig ex = detail::sym_eig(x[b]);
                if (ex.lam.minCoeff() <= 0.0) {
                    for (Eigen::Index k = 0; k < ex.lam.size(); ++k)
                        ex.lam(k) = std::max(ex.lam(k), 1e-14 * std::max(1.0, ex.lam.maxCoeff()));
                }
                MatrixXd xh = detail::spectral_fn(ex, [](double v) { return std::sqrt(std::max(v, 0.0)); });
                MatrixXd t = xh * z[b] * xh;
                detail::SymEig et = detail::sym_eig(t);
                if (et.lam.minCoeff() <= 0.0) scaling_ok = false;
                MatrixXd tmh = detail::spectral_fn(
                    et, [](double v) { return 1.0 / std::sqrt(std::max(v, 1e-300)); });
                w[b] = xh * tmh * xh;
                w[b] = 0.5 * (w[b] + w[b].transpose()).eval();
                detail::SymEig ew = detail::sym_eig(w[b]);
                whalf[b] = detail::spectral_fn(ew, [](double v) { return std::sqrt(std::max(v, 1e-300)); });
                wihalf[b] = detail::spectral_fn(
                    ew, [](double v) { return 1.0 / std::sqrt(std::max(v, 1e-300)); });
                MatrixXd vmat = whalf[b] * z[b] * whalf[b];
                veig[b] = detail::sym_eig(vmat);
                if (veig[b].lam.minCoeff() <= 0.0) scaling_ok = false;
            }
            if (!scaling_ok) {
                sol.status = SolveStatus::numerical_failure;
                finalize(sol, x, z, y);
                return sol;
            }

            // Schur complement M_jk = <A_j, W A_k W>, assembled column-wise into
            // the lower triangle; factored in place, re-assembled with diagonal
            // jitter on a Cholesky breakdown.
            auto assemble_schur = [&](double jitter) {
                schur.setZero(m_, m_);
                MatrixXd bsand;
                std::vector<double> col(m_, 0.0);
                std::vector<char> seen(m_, 0);
                std::vector<int> touched;
                for (std::size_t k = 0; k < m_; ++k) {
                    touched.clear();
                    for (const auto& term : p_.constraints[k].terms) {
                        detail::sandwich_sparse(w[term.block], term.entries, bsand);
                        for (const auto& [j, t] : block_constraints_[term.block]) {
                            if (j > k) continue;
                            if (!seen[j]) {
                                seen[j] = 1;
                                touched.push_back(static_cast<int>(j));
                            }
                            col[j] += detail::sparse_dot(p_.constraints[j].terms[t].entries, bsand);
                        }
                    }
                    for (int j : touched) {
                        schur(k, j) = col[j];
                        col[j] = 0.0;
                        seen[j] = 0;
                    }
                }
                if (jitter > 0.0) schur.diagonal().array() += jitter;
            };

            std::optional<Eigen::LLT<Eigen::Ref<MatrixXd>>> llt;
            {
                double jitter = 0.0;
                bool ok = false;
                for (int attempt = 0; attempt < 4 && !ok; ++attempt) {
                    assemble_schur(jitter);
                    double scale = schur.diagonal().cwiseAbs().maxCoeff() + 1.0;
                    llt.emplace(schur);
                    ok = llt->info() == Eigen::Success;
                    jitter = jitter == 0.0 ? 1e-13 * scale : jitter * 1e3;
                }
                if (!ok) {
                    sol.status = SolveStatus::numerical_failure;
                    finalize(sol, x, z, y);
                    return sol;
                }
            }

            for (std::size_t b = 0; b < nb; ++b) wrdw[b] = w[b] * rd[b] * w[b];

            auto newton = [&](const std::vector<MatrixXd>& rc_in, VectorXd& dy_out,
                              std::vector<MatrixXd>& dz_out, std::vector<MatrixXd>& dx_out) {
                for (std::size_t j = 0; j < m_; ++j) {
                    double s = rp(j);
                    for (const auto& term : p_.constraints[j].terms) {
                        s -= detail::sparse_dot(term.entries, rc_in[term.block]);
                        s += detail::sparse_dot(term.entries, wrdw[term.block]);
                    }
                    rhs(j) = s;
                }
                dy_out = llt->solve(rhs);
                for (std::size_t b = 0; b < nb; ++b) {
                    dz_out[b] = rd[b];
                    for (const auto& [j, t] : block_constraints_[b])
                        detail::add_sparse(dz_out[b], p_.constraints[j].terms[t].entries,
                                           -dy_out(j));
                    dx_out[b] = rc_in[b] - w[b] * dz_out[b] * w[b];
                    dx_out[b] = 0.5 * (dx_out[b] + dx_out[b].transpose()).eval();
                    dz_out[b] = 0.5 * (dz_out[b] + dz_out[b].transpose()).eval();
                }
            };

            // predictor (affine scaling direction)
            for (std::size_t b = 0; b < nb; ++b) rc[b] = -x[b];
            newton(rc, dy, dz, dx);

            double ap = 1e6, ad = 1e6;
            for (std::size_t b = 0; b < nb; ++b) {
                ap = std::min(ap, detail::max_step(x[b], dx[b]));
                ad = std::min(ad, detail::max_step(z[b], dz[b]));
            }
            double ap_clip = std::min(1.0, opt_.step_fraction * ap);
            double ad_clip = std::min(1.0, opt_.step_fraction * ad);

            double mu_aff = 0.0;
            for (std::size_t b = 0; b < nb; ++b)
                mu_aff += ((x[b] + ap_clip * dx[b]).array() * (z[b] + ad_clip * dz[b]).array()).sum();
            mu_aff /= n_total;
            double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 1e-10, 1.0);

            // Mehrotra corrector through the scaled-space Lyapunov solve
            for (std::size_t b = 0; b < nb; ++b) {
                MatrixXd dxt = wihalf[b] * dx[b] * wihalf[b];
                MatrixXd dzt = whalf[b] * dz[b] * whalf[b];
                MatrixXd second = 0.5 * (dxt * dzt + dzt * dxt);
                const auto& ve = veig[b];
                MatrixXd rtilde = -second;
                rtilde.noalias() -= ve.q * ve.lam.cwiseProduct(ve.lam).asDiagonal() * ve.q.transpose();
                rtilde.diagonal().array() += sigma * mu;
                MatrixXd rp_basis = ve.q.transpose() * rtilde * ve.q;
                for (Eigen::Index i = 0; i < rp_basis.rows(); ++i)
                    for (Eigen::Index j2 = 0; j2 < rp_basis.cols(); ++j2)
                        rp_basis(i, j2) *= 2.0 / (ve.lam(i) + ve.lam(j2));
                MatrixXd u = ve.q * rp_basis * ve.q.transpose();
                rc[b] = whalf[b] * u * whalf[b];
                rc[b] = 0.5 * (rc[b] + rc[b].transpose()).eval();
            }
            newton(rc, dy_cor, dz_cor, dx_cor);

            double ap2 = 1e6, ad2 = 1e6;
            for (std::size_t b = 0; b < nb; ++b) {
                ap2 = std::min(ap2, detail::max_step(x[b], dx_cor[b]));
                ad2 = std::min(ad2, detail::max_step(z[b], dz_cor[b]));
            }
            ap2 = std::min(1.0, opt_.step_fraction * ap2);
            ad2 = std::min(1.0, opt_.step_fraction * ad2);

            // fall back to the plain predictor if the corrector step collapses
            bool use_corrector = ap2 >= 0.1 * ap_clip && ad2 >= 0.1 * ad_clip;
            const auto& fdx = use_corrector ? dx_cor : dx;
            const auto& fdz = use_corrector ? dz_cor : dz;
            const auto& fdy = use_corrector ? dy_cor : dy;
            double fap = use_corrector ? ap2 : ap_clip;
            double fad = use_corrector ? ad2 : ad_clip;

            bool finite = true;
            for (std::size_t b = 0; b < nb; ++b) {
                x[b] += fap * fdx[b];
                z[b] += fad * fdz[b];
                if (!x[b].allFinite() || !z[b].allFinite()) finite = false;
            }
            y += fad * fdy;
            if (!finite || !y.allFinite()) {
                sol.status = SolveStatus::numerical_failure;
                finalize(sol, x, z, y);
                return sol;
            }

            if (std::max(fap, fad) < 1e-5) {
                if (++consecutive_short_steps >= 3) {
                    sol.status = SolveStatus::numerical_failure;
                    finalize(sol, x, z, y);
                    return sol;
                }
            } else {
                consecutive_short_steps = 0;
            }
            if (opt_.verbose) {
                std::fprintf(stderr, "iter %3d  p %.6e  d %.6e  gap %.2e  pres %.2e  dres %.2e\n",
                             iter, pobj, dobj, relgap, pres, dres);
            }
        }
        sol.status = SolveStatus::max_iter;
        finalize(sol, x, z, y);
        return sol;
    }

  private:
    void finalize(SdpSolution& sol, const std::vector<Eigen::MatrixXd>& x,
                  const std::vector<Eigen::MatrixXd>& z, const Eigen::VectorXd& y) const {
        sol.variable = x;
        sol.dual_slack = z;
        for (std::size_t j = 0; j < m_; ++j) sol.y[j] = y(j);
    }

    const SdpProblem& p_;
    SolverOptions opt_;
    std::size_t nblocks_ = 0;
    std::size_t m_ = 0;
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> block_constraints_;
};

inline SdpSolution solve(const SdpProblem& p, SolverOptions opt = {}) {
    InteriorPointSolver solver(p, opt);
    return solver.solve();
}

inline SdpSolution solve(const SdpProblem& p, double tol) {
    SolverOptions opt;
    opt.tol = tol;
    return solve(p, opt);
}

}  // namespace oneshot::sdp
