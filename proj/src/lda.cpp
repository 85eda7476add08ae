#include "keyforge/lda.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace keyforge {

Eigen::MatrixXd scatter_within(const std::vector<UserSamples>& users) {
  if (users.empty()) throw ValidationError("scatter_within needs at least one user");
  const Eigen::Index n = users.front().x.cols();
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(n, n);
  for (const auto& u : users) {
    if (u.x.cols() != n) throw ValidationError("inconsistent feature count");
    if (u.x.rows() < 1) throw ValidationError("user with no samples");
    Eigen::MatrixXd centered = u.x.rowwise() - u.mean();
    sw += centered.transpose() * centered;
  }
  return (sw + sw.transpose()) / 2.0;  // enforce exact symmetry
}

Eigen::MatrixXd scatter_between(const std::vector<Eigen::RowVectorXd>& means) {
  if (means.size() < 2) throw ValidationError("scatter_between needs >= 2 users");
  const Eigen::Index n = means.front().size();
  Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(n);
  for (const auto& m : means) {
    if (m.size() != n) throw ValidationError("inconsistent feature count");
    mu += m;
  }
  mu /= static_cast<double>(means.size());
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(n, n);
  for (const auto& m : means) {
    Eigen::RowVectorXd diff = m - mu;
    sb += diff.transpose() * diff;
  }
  return (sb + sb.transpose()) / 2.0;
}

double default_ridge(const Eigen::MatrixXd& sw) {
  return 1e-6 * sw.trace() / static_cast<double>(sw.rows());
}

LdaModel solve_lda(const Eigen::MatrixXd& sw, const Eigen::MatrixXd& sb,
                   double ridge) {
  if (sw.rows() != sw.cols() || sb.rows() != sb.cols() || sw.rows() != sb.rows())
    throw ValidationError("scatter matrices must be square and equal-sized");
  if (ridge < 0) throw ValidationError("ridge must be >= 0");
  const Eigen::Index n = sw.rows();
  if (n < 2) throw ValidationError("need at least two features");

  Eigen::MatrixXd b = sw + ridge * Eigen::MatrixXd::Identity(n, n);

  // Eigenpairs are invariant under a common scaling of both matrices, so the
  // pencil is brought to unit norm before factorization; the residual bound
  // below is meaningful only at that scale.
  const double scale = std::max(sb.norm(), b.norm());
  if (!(scale > 0) || !std::isfinite(scale))
    throw NumericError("degenerate zero pencil");
  const Eigen::MatrixXd sbn = sb / scale;
  const Eigen::MatrixXd bn = b / scale;

  Eigen::LLT<Eigen::MatrixXd> llt(bn);
  if (llt.info() != Eigen::Success)
    throw NumericError("scatter-within not positive definite; pass a ridge");

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sbn, bn);
  if (solver.info() != Eigen::Success)
    throw NumericError("generalized eigensolver failed to converge");

  // Eigen returns ascending order; keep the top n-1 pairs descending.
  const Eigen::Index keep = n - 1;
  LdaModel model;
  model.w.resize(n, keep);
  model.lambda.resize(keep);
  double worst_residual = 0;
  for (Eigen::Index k = 0; k < keep; ++k) {
    const Eigen::Index src = n - 1 - k;
    double lam = solver.eigenvalues()(src);
    if (lam < 0 && lam > -1e-10) lam = 0;  // PSD pencil round-off
    Eigen::VectorXd w = solver.eigenvectors().col(src);
    const double norm = w.norm();
    if (!(norm > 0) || !std::isfinite(norm))
      throw NumericError("degenerate eigenvector");
    w /= norm;
    Eigen::Index max_idx = 0;
    w.cwiseAbs().maxCoeff(&max_idx);
    if (w(max_idx) < 0) w = -w;

    const double residual = (sbn * w - lam * (bn * w)).norm();
    worst_residual = std::max(worst_residual, residual);
    if (residual > 1e-8 * (1.0 + std::abs(lam)))
      throw NumericError("eigenpair residual " + std::to_string(residual) +
                             " exceeds bound",
                         residual);
    model.w.col(k) = w;
    model.lambda(k) = lam;
  }
  (void)worst_residual;
  return model;
}

Eigen::RowVectorXd transform(const Eigen::RowVectorXd& x, const LdaModel& model) {
  if (x.size() != model.w.rows())
    throw ValidationError("transform: dimension mismatch");
  return x * model.w;
}

Eigen::VectorXd transform_variance(const Eigen::VectorXd& v_prime,
                                   const LdaModel& model) {
  if (v_prime.size() != model.w.rows())
    throw ValidationError("transform_variance: dimension mismatch");
  return (model.w.array().square().matrix().transpose()) * v_prime;
}

nlohmann::json LdaModel::to_json() const {
  std::vector<double> w_flat(w.size());
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      w_flat[static_cast<std::size_t>(r * w.cols() + c)] = w(r, c);
  return nlohmann::json{
      {"rows", w.rows()},
      {"cols", w.cols()},
      {"W", w_flat},
      {"Lambda", std::vector<double>(lambda.data(), lambda.data() + lambda.size())},
      {"v", std::vector<double>(v.data(), v.data() + v.size())},
      {"generation", generation}};
}

LdaModel LdaModel::from_json(const nlohmann::json& j) {
  LdaModel model;
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto w_flat = j.at("W").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(w_flat.size()) != rows * cols)
    throw ParseError("W size mismatch");
  model.w.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      model.w(r, c) = w_flat[static_cast<std::size_t>(r * cols + c)];
  const auto lam = j.at("Lambda").get<std::vector<double>>();
  model.lambda = Eigen::Map<const Eigen::VectorXd>(lam.data(),
                                                   static_cast<Eigen::Index>(lam.size()));
  const auto v = j.at("v").get<std::vector<double>>();
  model.v = Eigen::Map<const Eigen::VectorXd>(v.data(),
                                              static_cast<Eigen::Index>(v.size()));
  model.generation = j.at("generation").get<int>();
  return model;
}

}  // namespace keyforge
