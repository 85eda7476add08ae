#pragma once

#include <Eigen/Dense>

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "keyforge/errors.hpp"

namespace keyforge {

// Per-user training block: rows are discretized feature samples. The owner
// tag exists so cross-validation can assert that held-out users never reach
// a fold's training set.
struct UserSamples {
  int owner = -1;
  Eigen::MatrixXd x;  // m_u rows, n columns

  Eigen::RowVectorXd mean() const { return x.colwise().mean(); }

  /// Per-feature population variance.
  Eigen::RowVectorXd variance() const {
    Eigen::MatrixXd centered = x.rowwise() - mean();
    return centered.array().square().colwise().mean();
  }
};

// Published LDA parameters: projection W (n x (n-1)), eigenvalues in
// descending order, and the population variance vector mapped into LDA space.
struct LdaModel {
  Eigen::MatrixXd w;
  Eigen::VectorXd lambda;
  Eigen::VectorXd v;
  int generation = 0;

  nlohmann::json to_json() const;
  static LdaModel from_json(const nlohmann::json& j);
};

/// Sum over users of the centered Gram matrix X_u^T C X_u. Symmetric PSD.
Eigen::MatrixXd scatter_within(const std::vector<UserSamples>& users);

/// Spread of the user means around their overall mean:
/// sum (mu_t - mu)^T (mu_t - mu). Requires at least two users.
Eigen::MatrixXd scatter_between(const std::vector<Eigen::RowVectorXd>& means);

/// Default ridge for a possibly singular scatter-within matrix.
double default_ridge(const Eigen::MatrixXd& sw);

/// Solves S_b w = lambda (S_w + ridge I) w and returns the top n-1
/// eigenpairs, eigenvalues descending, eigenvectors unit-norm with the
/// largest-magnitude entry positive. Both matrices are brought to unit norm
/// before factorization (eigenpairs are invariant under a common scaling);
/// every returned pair satisfies ||S_b w - lambda (S_w + ridge I) w||
/// <= 1e-8 (1 + |lambda|) on that normalized pencil, else a NumericError
/// carrying the worst residual is thrown. The returned model has no
/// variance vector; fill it via transform_variance.
LdaModel solve_lda(const Eigen::MatrixXd& sw, const Eigen::MatrixXd& sb,
                   double ridge);

/// Row-vector projection x W.
Eigen::RowVectorXd transform(const Eigen::RowVectorXd& x, const LdaModel& model);

/// Variance propagation under the diagonal-covariance assumption:
/// v_k = sum_i W_ik^2 v'_i.
Eigen::VectorXd transform_variance(const Eigen::VectorXd& v_prime,
                                   const LdaModel& model);

}  // namespace keyforge
