#include "gsindy/regression.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace gsindy {

void OptimizerConfig::validate() const {
  if (!(threshold >= 0) || !std::isfinite(threshold))
    throw Error(ErrorKind::InvalidArgument, "threshold must be finite and >= 0");
  if (!(alpha >= 0) || !std::isfinite(alpha))
    throw Error(ErrorKind::InvalidArgument, "ridge weight alpha must be finite and >= 0");
  if (!(nu > 0) || !std::isfinite(nu))
    throw Error(ErrorKind::InvalidArgument, "relaxation nu must be finite and > 0");
  if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 1");
  if (!(tolerance > 0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be > 0");
}

ConstraintSet ConstraintSet::fix_equation(Eigen::Index n_terms, Eigen::Index n_equations,
                                          Eigen::Index equation, const Eigen::VectorXd& values) {
  if (equation < 0 || equation >= n_equations || values.size() != n_terms)
    throw Error(ErrorKind::InvalidArgument, "fix_equation: index or size mismatch");
  ConstraintSet cs;
  cs.lhs = Eigen::MatrixXd::Zero(n_terms, n_terms * n_equations);
  for (Eigen::Index j = 0; j < n_terms; ++j) cs.lhs(j, equation * n_terms + j) = 1.0;
  cs.rhs = values;
  return cs;
}

namespace {

void check_shapes(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                  const Eigen::Ref<const Eigen::MatrixXd>& targets) {
  if (theta.rows() < 1) throw Error(ErrorKind::InvalidArgument, "design matrix has no rows");
  if (theta.rows() != targets.rows())
    throw Error(ErrorKind::InvalidArgument, "design matrix and targets differ in row count");
  if (!theta.allFinite() || !targets.allFinite())
    throw Error(ErrorKind::NonFiniteInput, "regression inputs must be finite");
}

std::vector<Eigen::Index> active_indices(const SupportMask& mask, Eigen::Index eq) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < mask.rows(); ++j)
    if (mask(j, eq)) idx.push_back(j);
  return idx;
}

Eigen::MatrixXd gather_columns(const Eigen::Ref<const Eigen::MatrixXd>& m,
                               const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = m.col(idx[k]);
  return out;
}

}  // namespace

Eigen::MatrixXd ridge_solve(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                            const Eigen::Ref<const Eigen::MatrixXd>& targets, double alpha) {
  check_shapes(theta, targets);
  if (!(alpha >= 0) || !std::isfinite(alpha))
    throw Error(ErrorKind::InvalidArgument, "ridge weight alpha must be finite and >= 0");
  const Eigen::Index p = theta.cols();
  if (p == 0) return Eigen::MatrixXd::Zero(0, targets.cols());

  Eigen::MatrixXd gram = theta.transpose() * theta;
  gram.diagonal().array() += alpha;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > std::numeric_limits<double>::epsilon())) {
    std::ostringstream os;
    os << "normal equations are singular (alpha=" << alpha << ", " << p << " terms)";
    throw Error(ErrorKind::IllConditioned, os.str());
  }
  return llt.solve(theta.transpose() * targets);
}

Eigen::MatrixXd least_squares_on_support(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                         const Eigen::Ref<const Eigen::MatrixXd>& targets,
                                         const SupportMask& support) {
  check_shapes(theta, targets);
  if (support.rows() != theta.cols() || support.cols() != targets.cols())
    throw Error(ErrorKind::InvalidArgument, "support mask shape mismatch");
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(theta.cols(), targets.cols());
  for (Eigen::Index e = 0; e < targets.cols(); ++e) {
    const auto idx = active_indices(support, e);
    if (idx.empty()) continue;
    const Eigen::MatrixXd sub = gather_columns(theta, idx);
    Eigen::VectorXd c;
    try {
      c = ridge_solve(sub, targets.col(e), 0.0);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::IllConditioned) throw;
      c = sub.completeOrthogonalDecomposition().solve(targets.col(e));
    }
    for (std::size_t k = 0; k < idx.size(); ++k) coef(idx[k], e) = c(static_cast<Eigen::Index>(k));
  }
  return coef;
}

SparseCoefficients stlsq(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                         const Eigen::Ref<const Eigen::MatrixXd>& targets, const OptimizerConfig& cfg,
                         const std::optional<SupportMask>& initial_support) {
  cfg.validate();
  check_shapes(theta, targets);
  const Eigen::Index p = theta.cols();
  const Eigen::Index m = targets.cols();

  SupportMask mask = initial_support ? *initial_support : SupportMask::Constant(p, m, true);
  if (mask.rows() != p || mask.cols() != m)
    throw Error(ErrorKind::InvalidArgument, "initial support shape mismatch");

  SparseCoefficients out;
  out.support_path.push_back(mask);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    SupportMask next = SupportMask::Constant(p, m, false);
    for (Eigen::Index e = 0; e < m; ++e) {
      const auto idx = active_indices(mask, e);
      if (idx.empty()) continue;
      const Eigen::VectorXd c = ridge_solve(gather_columns(theta, idx), targets.col(e), cfg.alpha);
      for (std::size_t k = 0; k < idx.size(); ++k)
        next(idx[k], e) = std::abs(c(static_cast<Eigen::Index>(k))) >= cfg.threshold;
    }
    out.iterations = it;
    out.support_path.push_back(next);
    const bool stable = next == mask;
    mask = std::move(next);
    if (!mask.any()) break;
    if (stable) {
      out.converged = true;
      break;
    }
  }
  if (!mask.any())
    throw Error(ErrorKind::EmptyModel, "all library terms were thresholded away");

  out.coefficients = least_squares_on_support(theta, targets, mask);
  out.support = mask;
  return out;
}

SparseCoefficients sr3_constrained(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                   const Eigen::Ref<const Eigen::MatrixXd>& targets,
                                   const OptimizerConfig& cfg, const ConstraintSet& constraints,
                                   const Eigen::MatrixXd& weights) {
  cfg.validate();
  check_shapes(theta, targets);
  const Eigen::Index p = theta.cols();
  const Eigen::Index m = targets.cols();
  const Eigen::Index n_flat = p * m;
  if (p == 0) throw Error(ErrorKind::InvalidArgument, "library has no terms");
  if (weights.size() != 0 && (weights.rows() != p || weights.cols() != m))
    throw Error(ErrorKind::InvalidArgument, "threshold weights shape mismatch");

  const Eigen::Index r = constraints.size();
  if (r > 0) {
    if (constraints.lhs.cols() != n_flat || constraints.rhs.size() != r)
      throw Error(ErrorKind::InvalidArgument, "constraint matrix shape mismatch");
    if (!constraints.lhs.allFinite() || !constraints.rhs.allFinite())
      throw Error(ErrorKind::InvalidArgument, "constraints must be finite");
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(constraints.lhs);
    if (qr.rank() < r) {
      const Eigen::VectorXd x = qr.solve(constraints.rhs);
      const double resid = (constraints.lhs * x - constraints.rhs).lpNorm<Eigen::Infinity>();
      if (resid > 1e-9 * std::max(1.0, constraints.rhs.lpNorm<Eigen::Infinity>()))
        throw Error(ErrorKind::Infeasible, "equality constraints are inconsistent");
      throw Error(ErrorKind::InvalidArgument, "constraint rows are linearly dependent");
    }
  }

  // Entries touched by any constraint are exempt from thresholding.
  SupportMask constrained = SupportMask::Constant(p, m, false);
  for (Eigen::Index f = 0; f < n_flat; ++f)
    if (r > 0 && (constraints.lhs.col(f).array() != 0.0).any()) constrained(f % p, f / p) = true;

  Eigen::MatrixXd h = theta.transpose() * theta;
  h.diagonal().array() += 1.0 / cfg.nu;
  const Eigen::LLT<Eigen::MatrixXd> hfac(h);
  if (hfac.info() != Eigen::Success)
    throw Error(ErrorKind::IllConditioned, "relaxed normal equations are not positive definite");
  const Eigen::MatrixXd gram_rhs = theta.transpose() * targets;

  auto block_solve = [&](const Eigen::VectorXd& flat) {
    Eigen::VectorXd out(n_flat);
    for (Eigen::Index e = 0; e < m; ++e) out.segment(e * p, p) = hfac.solve(flat.segment(e * p, p));
    return out;
  };

  Eigen::MatrixXd hinv_ct;  // Hbig^{-1} C^T
  Eigen::LLT<Eigen::MatrixXd> schur;
  if (r > 0) {
    hinv_ct.resize(n_flat, r);
    for (Eigen::Index k = 0; k < r; ++k) hinv_ct.col(k) = block_solve(constraints.lhs.row(k).transpose());
    schur.compute(constraints.lhs * hinv_ct);
    if (schur.info() != Eigen::Success)
      throw Error(ErrorKind::IllConditioned, "constraint Schur complement is singular");
  }

  auto coupled_step = [&](const Eigen::MatrixXd& w) -> Eigen::MatrixXd {
    const Eigen::MatrixXd g = gram_rhs + w / cfg.nu;
    const Eigen::VectorXd z = block_solve(g.reshaped());
    Eigen::VectorXd xi = z;
    if (r > 0) {
      const Eigen::VectorXd mu = schur.solve(constraints.lhs * z - constraints.rhs);
      xi -= hinv_ct * mu;
    }
    return xi.reshaped(p, m);
  };

  auto prox = [&](const Eigen::MatrixXd& xi) {
    Eigen::MatrixXd w = xi;
    for (Eigen::Index e = 0; e < m; ++e)
      for (Eigen::Index j = 0; j < p; ++j) {
        if (constrained(j, e)) continue;
        const double thr = cfg.threshold * (weights.size() ? weights(j, e) : 1.0);
        if (std::abs(w(j, e)) < thr) w(j, e) = 0.0;
      }
    return w;
  };

  Eigen::MatrixXd w = theta.completeOrthogonalDecomposition().solve(targets);

  SparseCoefficients out;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    Eigen::MatrixXd w_new = prox(coupled_step(w));
    const double delta = (w_new - w).lpNorm<Eigen::Infinity>();
    const double scale = std::max(1.0, w_new.lpNorm<Eigen::Infinity>());
    w = std::move(w_new);
    out.iterations = it;
    if (delta < cfg.tolerance * scale) {
      out.converged = true;
      break;
    }
  }
  if (!w.allFinite()) throw Error(ErrorKind::IllConditioned, "SR3 iterates became non-finite");

  // Rows that pin a single entry are applied exactly, so pinned zeros stay
  // out of the support.
  for (Eigen::Index k = 0; k < r; ++k) {
    Eigen::Index hit = -1;
    int nonzero = 0;
    for (Eigen::Index f = 0; f < n_flat; ++f)
      if (constraints.lhs(k, f) != 0.0) {
        hit = f;
        ++nonzero;
      }
    if (nonzero == 1) w(hit % p, hit / p) = constraints.rhs(k) / constraints.lhs(k, hit);
  }

  bool any_free = false;
  bool any_free_active = false;
  for (Eigen::Index e = 0; e < m; ++e)
    for (Eigen::Index j = 0; j < p; ++j)
      if (!constrained(j, e)) {
        any_free = true;
        any_free_active = any_free_active || w(j, e) != 0.0;
      }
  if (any_free && !any_free_active)
    throw Error(ErrorKind::EmptyModel, "all free library terms were thresholded away");

  out.support = (w.array() != 0.0);
  out.coefficients = w;
  return out;
}

}  // namespace gsindy
