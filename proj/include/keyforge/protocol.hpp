#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "keyforge/he.hpp"
#include "keyforge/lda.hpp"

namespace keyforge::pplda {

using he::Ciphertext;
using he::FixedPointCodec;
using he::HeOps;
using he::OpCounters;
using he::PublicKey;
using he::SecretKey;

// ---------------------------------------------------------------------------
// Encrypted containers and protocol messages
// ---------------------------------------------------------------------------

struct EncVec {
  std::vector<Ciphertext> e;

  std::size_t size() const { return e.size(); }
};

struct EncMat {
  int n = 0;
  std::vector<Ciphertext> e;  // row-major n x n

  Ciphertext& at(int i, int j) { return e[static_cast<std::size_t>(i) * n + j]; }
  const Ciphertext& at(int i, int j) const {
    return e[static_cast<std::size_t>(i) * n + j];
  }
};

enum class RoundTag : std::uint8_t {
  Enroll1 = 1,
  EsReply = 2,
  Enroll2 = 3,
  EsOutput = 4,
  MpPublish = 5,
};

enum class Role : std::uint8_t { User = 1, Es = 2, Mp = 3 };

// User -> ES: encrypted scatter-within, variance vector and mean vector.
struct Enroll1Msg {
  int n = 0;
  EncMat scatter;
  EncVec variance;
  EncVec mean;
};

// ES -> user: updated mean sum, the pre-update mean sum, and every stored
// per-user mean. All rerandomized before leaving the server.
struct EsReplyMsg {
  int n = 0;
  int prior_users = 0;
  EncVec mean_sum_updated;
  EncVec mean_sum_prev;
  std::vector<EncVec> user_means;
};

// User -> ES: fresh mean products N, cross products P against the pre-update
// mean sum, and R_t against every stored user mean.
struct Enroll2Msg {
  int n = 0;
  EncMat n_mat;
  EncMat p_mat;
  std::vector<EncMat> r_mats;
};

// ES -> MP: aggregated scatter-within, the m^2-scaled scatter-between and
// the variance sum, plus the post-enrollment user count.
struct EsOutputMsg {
  int n = 0;
  long m = 0;
  EncMat scatter_within;
  EncMat scatter_between_m2;
  EncVec variance_sum;
};

// MP's answer to an output: either a fresh model or a deferral note.
struct MpPublishMsg {
  bool published = false;
  int pending = 0;  // enrollments still needed before the next publication
  std::optional<LdaModel> model;
};

using ProtocolMessage =
    std::variant<Enroll1Msg, EsReplyMsg, Enroll2Msg, EsOutputMsg, MpPublishMsg>;

RoundTag round_tag(const ProtocolMessage& msg);

// ---------------------------------------------------------------------------
// Enrollment input
// ---------------------------------------------------------------------------

// The user's plaintext statistics, already mapped to integers by the
// fixed-point codec: mean vector, per-feature variance and the scatter
// matrix about the true mean.
struct EnrollmentInput {
  std::vector<mpz_class> mean;
  std::vector<mpz_class> variance;
  std::vector<std::vector<mpz_class>> scatter;

  int n() const { return static_cast<int>(mean.size()); }
};

/// Encodes a user's training block for enrollment.
EnrollmentInput prepare_enrollment(const UserSamples& samples,
                                   const FixedPointCodec& codec);

// ---------------------------------------------------------------------------
// Roles
// ---------------------------------------------------------------------------

struct SystemConfig {
  int n = 0;          // feature count
  int d = 8;          // discretization bit width of the underlying features
  long m_max = 1000;  // capacity-validation bound on users and samples
  FixedPointCodec codec;
};

/// Enrolling user. One instance drives one enrollment: round1 produces the
/// ENROLL_1 message, round2 consumes the ES reply and produces ENROLL_2.
class UserClient {
 public:
  UserClient(const PublicKey& pk, SystemConfig config, Rng& rng,
             OpCounters* counters = nullptr);

  Enroll1Msg round1(const EnrollmentInput& input);
  Enroll2Msg round2(const EsReplyMsg& reply);

 private:
  HeOps ops_;
  SystemConfig config_;
  std::vector<mpz_class> mean_;  // kept between rounds; exponent role
  bool round1_done_ = false;
  bool round2_done_ = false;
};

/// Enrollment server. Holds only the public key; it never decrypts.
/// Enrollments are strictly sequential: a session opened by ENROLL_1 must be
/// completed by ENROLL_2 before the next may begin.
class EnrollmentServer {
 public:
  EnrollmentServer(const PublicKey& pk, int n, Rng& rng,
                   OpCounters* counters = nullptr);

  EsReplyMsg begin_enrollment(const Enroll1Msg& msg);
  EsOutputMsg complete_enrollment(const Enroll2Msg& msg);

  int enrolled_users() const { return static_cast<int>(user_means_.size()); }
  bool session_open() const { return session_.has_value(); }

 private:
  EncVec rerandomized(const EncVec& v);

  HeOps ops_;
  int n_;

  // Ledger: running encrypted aggregates plus per-user products. user_means_
  // holds each enrollee's encrypted mean; the reply message needs them.
  EncMat scatter_sum_;
  EncVec mean_sum_;
  EncVec variance_sum_;
  EncMat k_mat_;
  std::vector<EncMat> m_mats_;
  std::vector<EncMat> l_mats_;
  std::vector<EncVec> user_means_;

  struct Session {
    EncMat scatter_new;
    EncVec mean_new;
    EncVec variance_new;
    EncVec user_mean;
  };
  std::optional<Session> session_;
};

struct BatchPolicy {
  int w = 1;  // publications happen every w enrollments; secure use wants w >> 1
};

/// Matrix publisher: the only key holder. Buffers nothing and decrypts
/// nothing until the batch fills; then decrypts the aggregates, solves the
/// generalized eigenproblem and publishes the model.
class MatrixPublisher {
 public:
  MatrixPublisher(const SecretKey& sk, BatchPolicy policy,
                  FixedPointCodec codec, Rng& rng,
                  OpCounters* counters = nullptr);

  MpPublishMsg process(const EsOutputMsg& output);

  int generation() const { return generation_; }

  // Decrypted aggregates per publication; this is exactly MP's protocol view
  // and what the batching policy is protecting.
  struct DecryptedView {
    long m = 0;
    Eigen::MatrixXd scatter_within;
    Eigen::MatrixXd scatter_between_m2;  // still carries the m^2 factor
    Eigen::VectorXd variance_sum;
  };
  const std::vector<DecryptedView>& views() const { return views_; }

 private:
  HeOps ops_;
  BatchPolicy policy_;
  FixedPointCodec codec_;
  int since_publication_ = 0;
  int generation_ = 0;
  std::vector<DecryptedView> views_;
};

}  // namespace keyforge::pplda
