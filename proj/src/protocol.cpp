#include "keyforge/protocol.hpp"

#include <cmath>

namespace keyforge::pplda {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ProtocolError(what);
}

mpz_class round_scaled(double value, int fractional_bits) {
  FixedPointCodec c;
  c.fractional_bits = fractional_bits;
  c.magnitude_bound = std::ldexp(1.0, 900);  // bounds enforced by capacity checks
  return he::encode_fixed(value, c);
}

}  // namespace

RoundTag round_tag(const ProtocolMessage& msg) {
  return std::visit(
      [](const auto& m) -> RoundTag {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Enroll1Msg>) return RoundTag::Enroll1;
        if constexpr (std::is_same_v<T, EsReplyMsg>) return RoundTag::EsReply;
        if constexpr (std::is_same_v<T, Enroll2Msg>) return RoundTag::Enroll2;
        if constexpr (std::is_same_v<T, EsOutputMsg>) return RoundTag::EsOutput;
        if constexpr (std::is_same_v<T, MpPublishMsg>) return RoundTag::MpPublish;
      },
      msg);
}

EnrollmentInput prepare_enrollment(const UserSamples& samples,
                                   const FixedPointCodec& codec) {
  const Eigen::Index n = samples.x.cols();
  if (samples.x.rows() < 1) throw ValidationError("user with no samples");
  EnrollmentInput input;
  input.mean.reserve(n);
  input.variance.reserve(n);

  const Eigen::RowVectorXd mean = samples.mean();
  const Eigen::RowVectorXd var = samples.variance();
  // Means carry f fractional bits; second-moment quantities carry 2f so the
  // whole pipeline shares one scale after the protocol's products.
  for (Eigen::Index i = 0; i < n; ++i)
    input.mean.push_back(round_scaled(mean(i), codec.fractional_bits));
  for (Eigen::Index i = 0; i < n; ++i)
    input.variance.push_back(round_scaled(var(i), 2 * codec.fractional_bits));

  Eigen::MatrixXd centered = samples.x.rowwise() - mean;
  Eigen::MatrixXd scatter = centered.transpose() * centered;
  input.scatter.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    input.scatter[i].reserve(n);
    for (Eigen::Index j = 0; j < n; ++j)
      input.scatter[i].push_back(
          round_scaled(scatter(i, j), 2 * codec.fractional_bits));
  }
  return input;
}

// ---------------------------------------------------------------------------
// UserClient
// ---------------------------------------------------------------------------

UserClient::UserClient(const PublicKey& pk, SystemConfig config, Rng& rng,
                       OpCounters* counters)
    : ops_(pk, rng, counters), config_(config) {
  if (config_.n < 1) throw ValidationError("feature count must be >= 1");
}

Enroll1Msg UserClient::round1(const EnrollmentInput& input) {
  if (round1_done_) throw SessionError("round 1 already sent");
  if (input.n() != config_.n ||
      static_cast<int>(input.variance.size()) != config_.n ||
      static_cast<int>(input.scatter.size()) != config_.n)
    throw ValidationError("enrollment input dimension mismatch");

  const he::CapacityReport cap = he::validate_capacity(
      ops_.pk().params(), config_.codec, config_.n, config_.m_max, config_.d);
  if (!cap.ok)
    throw CapacityError("refusing to enroll: " + cap.binding_bound +
                        " needs " + std::to_string(cap.required_bits) +
                        " bits, window has " + std::to_string(cap.available_bits));

  Enroll1Msg msg;
  msg.n = config_.n;
  msg.scatter.n = config_.n;
  for (const auto& row : input.scatter) {
    if (static_cast<int>(row.size()) != config_.n)
      throw ValidationError("scatter matrix is not square");
    for (const auto& v : row) msg.scatter.e.push_back(ops_.encrypt(v));
  }
  for (const auto& v : input.variance) msg.variance.e.push_back(ops_.encrypt(v));
  for (const auto& v : input.mean) msg.mean.e.push_back(ops_.encrypt(v));

  mean_ = input.mean;
  round1_done_ = true;
  return msg;
}

Enroll2Msg UserClient::round2(const EsReplyMsg& reply) {
  if (!round1_done_) throw SessionError("round 1 has not run");
  if (round2_done_) throw SessionError("round 2 already sent");
  require(reply.n == config_.n, "ES reply dimension mismatch");
  require(static_cast<int>(reply.user_means.size()) == reply.prior_users,
          "ES reply user-mean count mismatch");
  require(reply.mean_sum_updated.size() == static_cast<std::size_t>(config_.n) &&
              reply.mean_sum_prev.size() == static_cast<std::size_t>(config_.n),
          "ES reply vector shape mismatch");

  const int n = config_.n;
  Enroll2Msg msg;
  msg.n = n;
  msg.n_mat.n = n;
  msg.p_mat.n = n;

  // N is encrypted fresh; P and R_t scale ES-provided ciphertexts by the
  // user's own mean entries. P uses the pre-update sum.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      msg.n_mat.e.push_back(ops_.encrypt(mean_[static_cast<std::size_t>(i)] *
                                         mean_[static_cast<std::size_t>(j)]));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      msg.p_mat.e.push_back(
          ops_.scalar_mul(reply.mean_sum_prev.e[static_cast<std::size_t>(i)],
                          mean_[static_cast<std::size_t>(j)]));
  msg.r_mats.reserve(reply.user_means.size());
  for (const auto& mu_t : reply.user_means) {
    require(mu_t.size() == static_cast<std::size_t>(n),
            "ES reply stored-mean shape mismatch");
    EncMat r;
    r.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        r.e.push_back(ops_.scalar_mul(mu_t.e[static_cast<std::size_t>(i)],
                                      mean_[static_cast<std::size_t>(j)]));
    msg.r_mats.push_back(std::move(r));
  }
  round2_done_ = true;
  return msg;
}

// ---------------------------------------------------------------------------
// EnrollmentServer
// ---------------------------------------------------------------------------

EnrollmentServer::EnrollmentServer(const PublicKey& pk, int n, Rng& rng,
                                   OpCounters* counters)
    : ops_(pk, rng, counters), n_(n) {
  if (n < 1) throw ValidationError("feature count must be >= 1");
  // Empty ledger: every aggregate starts as an encryption of zero.
  scatter_sum_.n = n;
  k_mat_.n = n;
  for (int i = 0; i < n * n; ++i) {
    scatter_sum_.e.push_back(ops_.encrypt(0));
    k_mat_.e.push_back(ops_.encrypt(0));
  }
  for (int i = 0; i < n; ++i) {
    mean_sum_.e.push_back(ops_.encrypt(0));
    variance_sum_.e.push_back(ops_.encrypt(0));
  }
}

EncVec EnrollmentServer::rerandomized(const EncVec& v) {
  EncVec out;
  out.e.reserve(v.e.size());
  for (const auto& c : v.e) out.e.push_back(ops_.rerandomize(c));
  return out;
}

EsReplyMsg EnrollmentServer::begin_enrollment(const Enroll1Msg& msg) {
  if (session_)
    throw SessionError("enrollment already in progress; rounds are sequential");
  require(msg.n == n_, "ENROLL_1 dimension mismatch");
  require(msg.scatter.n == n_ &&
              msg.scatter.e.size() == static_cast<std::size_t>(n_) * n_,
          "ENROLL_1 scatter shape mismatch");
  require(msg.variance.size() == static_cast<std::size_t>(n_) &&
              msg.mean.size() == static_cast<std::size_t>(n_),
          "ENROLL_1 vector shape mismatch");

  Session s;
  s.scatter_new.n = n_;
  s.scatter_new.e.reserve(msg.scatter.e.size());
  for (std::size_t i = 0; i < msg.scatter.e.size(); ++i)
    s.scatter_new.e.push_back(ops_.add(scatter_sum_.e[i], msg.scatter.e[i]));
  for (int i = 0; i < n_; ++i) {
    s.mean_new.e.push_back(
        ops_.add(mean_sum_.e[static_cast<std::size_t>(i)],
                 msg.mean.e[static_cast<std::size_t>(i)]));
    s.variance_new.e.push_back(
        ops_.add(variance_sum_.e[static_cast<std::size_t>(i)],
                 msg.variance.e[static_cast<std::size_t>(i)]));
  }
  s.user_mean = msg.mean;

  EsReplyMsg reply;
  reply.n = n_;
  reply.prior_users = static_cast<int>(user_means_.size());
  reply.mean_sum_updated = rerandomized(s.mean_new);
  reply.mean_sum_prev = rerandomized(mean_sum_);
  reply.user_means.reserve(user_means_.size());
  for (const auto& mu : user_means_) reply.user_means.push_back(rerandomized(mu));

  session_ = std::move(s);
  return reply;
}

EsOutputMsg EnrollmentServer::complete_enrollment(const Enroll2Msg& msg) {
  if (!session_) throw SessionError("ENROLL_2 without a preceding ENROLL_1");
  require(msg.n == n_, "ENROLL_2 dimension mismatch");
  const std::size_t nn = static_cast<std::size_t>(n_) * n_;
  require(msg.n_mat.e.size() == nn && msg.p_mat.e.size() == nn,
          "ENROLL_2 matrix shape mismatch");
  require(msg.r_mats.size() == user_means_.size(),
          "ENROLL_2 R_t count != enrolled users");
  for (const auto& r : msg.r_mats)
    require(r.e.size() == nn, "ENROLL_2 R_t shape mismatch");

  const long prior = static_cast<long>(user_means_.size());
  const long m = prior + 1;

  // K accumulates P_{i,j} + P_{j,i} + N_{i,j}.
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      Ciphertext acc = ops_.add(k_mat_.at(i, j), msg.p_mat.at(i, j));
      acc = ops_.add(acc, msg.p_mat.at(j, i));
      k_mat_.at(i, j) = ops_.add(acc, msg.n_mat.at(i, j));
    }

  // Existing users pick up the new enrollee's cross terms.
  for (long t = 0; t < prior; ++t)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        l_mats_[static_cast<std::size_t>(t)].at(i, j) =
            ops_.add(l_mats_[static_cast<std::size_t>(t)].at(i, j),
                     msg.r_mats[static_cast<std::size_t>(t)].at(j, i));

  // The new user's own row: L_u = P + N, M_u = N.
  EncMat l_u;
  l_u.n = n_;
  l_u.e.reserve(nn);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      l_u.e.push_back(ops_.add(msg.p_mat.at(i, j), msg.n_mat.at(i, j)));
  l_mats_.push_back(std::move(l_u));
  m_mats_.push_back(msg.n_mat);

  // Commit the running sums computed in round 1.
  scatter_sum_ = session_->scatter_new;
  mean_sum_ = session_->mean_new;
  variance_sum_ = session_->variance_new;
  user_means_.push_back(session_->user_mean);
  session_.reset();

  // Assemble the m^2-scaled scatter-between.
  const mpz_class m_mpz(m);
  const mpz_class m_sq = m_mpz * m_mpz;
  const mpz_class minus_m = -m_mpz;
  EsOutputMsg out;
  out.n = n_;
  out.m = m;
  out.scatter_between_m2.n = n_;
  out.scatter_between_m2.e.reserve(nn);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) {
      std::optional<Ciphertext> acc;
      for (long t = 0; t < m; ++t) {
        const auto& mt = m_mats_[static_cast<std::size_t>(t)];
        const auto& lt = l_mats_[static_cast<std::size_t>(t)];
        Ciphertext term = ops_.scalar_mul(mt.at(i, j), m_sq);
        acc = acc ? ops_.add(*acc, term) : term;
        acc = ops_.add(*acc, ops_.scalar_mul(lt.at(i, j), minus_m));
        acc = ops_.add(*acc, ops_.scalar_mul(lt.at(j, i), minus_m));
        acc = ops_.add(*acc, k_mat_.at(i, j));
      }
      out.scatter_between_m2.e.push_back(*acc);
    }
  out.scatter_within = scatter_sum_;
  out.variance_sum = variance_sum_;
  return out;
}

// ---------------------------------------------------------------------------
// MatrixPublisher
// ---------------------------------------------------------------------------

MatrixPublisher::MatrixPublisher(const SecretKey& sk, BatchPolicy policy,
                                 FixedPointCodec codec, Rng& rng,
                                 OpCounters* counters)
    : ops_(sk, rng, counters), policy_(policy), codec_(codec) {
  if (policy_.w < 1) throw ValidationError("batch size must be >= 1");
}

MpPublishMsg MatrixPublisher::process(const EsOutputMsg& output) {
  require(output.n >= 2, "publication needs at least two features");
  const std::size_t nn = static_cast<std::size_t>(output.n) * output.n;
  require(output.scatter_within.e.size() == nn &&
              output.scatter_between_m2.e.size() == nn &&
              output.variance_sum.size() == static_cast<std::size_t>(output.n),
          "ES output shape mismatch");

  ++since_publication_;
  if (since_publication_ < policy_.w) {
    // Deferred: nothing is decrypted, the output is discarded.
    return MpPublishMsg{false, policy_.w - since_publication_, std::nullopt};
  }
  since_publication_ = 0;

  const int n = output.n;
  const long m = output.m;
  const mpz_class m_mpz(m);
  const double scale = std::ldexp(1.0, 2 * codec_.fractional_bits);

  DecryptedView view;
  view.m = m;
  view.scatter_within.resize(n, n);
  view.scatter_between_m2.resize(n, n);
  view.variance_sum.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      view.scatter_within(i, j) =
          mpz_get_d(ops_.decrypt(output.scatter_within.at(i, j)).get_mpz_t());
      mpz_class sb = ops_.decrypt(output.scatter_between_m2.at(i, j));
      // An honest transcript always yields multiples of m here.
      if (!mpz_divisible_p(sb.get_mpz_t(), m_mpz.get_mpz_t()))
        throw ProtocolError("scatter-between aggregate not divisible by the "
                            "user count: transcript corrupted");
      view.scatter_between_m2(i, j) = mpz_get_d(sb.get_mpz_t());
    }
  for (int i = 0; i < n; ++i)
    view.variance_sum(i) =
        mpz_get_d(ops_.decrypt(output.variance_sum.e[static_cast<std::size_t>(i)])
                      .get_mpz_t());
  views_.push_back(view);

  Eigen::MatrixXd sw = view.scatter_within / scale;
  Eigen::MatrixXd sb = view.scatter_between_m2 /
                       (scale * static_cast<double>(m) * static_cast<double>(m));
  Eigen::VectorXd global_var = view.variance_sum / (scale * static_cast<double>(m));

  const double ridge = std::max(default_ridge(sw), 1e-9);
  LdaModel model = solve_lda(sw, sb, ridge);
  model.v = transform_variance(global_var, model);
  model.generation = ++generation_;
  return MpPublishMsg{true, 0, std::move(model)};
}

}  // namespace keyforge::pplda
