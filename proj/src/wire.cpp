#include "keyforge/wire.hpp"

#include <nlohmann/json.hpp>

#include "keyforge/commitment.hpp"  // hex helpers

namespace keyforge::pplda {

namespace {

using nlohmann::json;

json enc_vec(const EncVec& v, const PublicKey& pk) {
  json out = json::array();
  for (const auto& c : v.e) out.push_back(to_hex(he::ciphertext_bytes(c, pk)));
  return out;
}

json enc_mat(const EncMat& m, const PublicKey& pk) {
  json out = json::array();
  for (const auto& c : m.e) out.push_back(to_hex(he::ciphertext_bytes(c, pk)));
  return out;
}

EncVec dec_vec(const json& j, const PublicKey& pk, std::size_t expected) {
  if (!j.is_array() || j.size() != expected)
    throw WireError("ciphertext vector has wrong shape");
  EncVec v;
  v.e.reserve(j.size());
  for (const auto& item : j)
    v.e.push_back(
        he::ciphertext_from_bytes(from_hex(item.get<std::string>()), pk));
  return v;
}

EncMat dec_mat(const json& j, const PublicKey& pk, int n) {
  const std::size_t nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  if (!j.is_array() || j.size() != nn)
    throw WireError("ciphertext matrix has wrong shape");
  EncMat m;
  m.n = n;
  m.e.reserve(nn);
  for (const auto& item : j)
    m.e.push_back(
        he::ciphertext_from_bytes(from_hex(item.get<std::string>()), pk));
  return m;
}

int read_n(const json& j) {
  const int n = j.at("n").get<int>();
  if (n < 1 || n > 4096) throw WireError("implausible feature count");
  return n;
}

json payload_json(const ProtocolMessage& msg, const PublicKey& pk) {
  return std::visit(
      [&pk](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Enroll1Msg>) {
          return json{{"sender", "user"},
                      {"n", m.n},
                      {"scatter", enc_mat(m.scatter, pk)},
                      {"variance", enc_vec(m.variance, pk)},
                      {"mean", enc_vec(m.mean, pk)}};
        } else if constexpr (std::is_same_v<T, EsReplyMsg>) {
          json means = json::array();
          for (const auto& u : m.user_means) means.push_back(enc_vec(u, pk));
          return json{{"sender", "es"},
                      {"n", m.n},
                      {"prior_users", m.prior_users},
                      {"mean_sum_updated", enc_vec(m.mean_sum_updated, pk)},
                      {"mean_sum_prev", enc_vec(m.mean_sum_prev, pk)},
                      {"user_means", means}};
        } else if constexpr (std::is_same_v<T, Enroll2Msg>) {
          json rs = json::array();
          for (const auto& r : m.r_mats) rs.push_back(enc_mat(r, pk));
          return json{{"sender", "user"},
                      {"n", m.n},
                      {"N", enc_mat(m.n_mat, pk)},
                      {"P", enc_mat(m.p_mat, pk)},
                      {"R", rs}};
        } else if constexpr (std::is_same_v<T, EsOutputMsg>) {
          return json{{"sender", "es"},
                      {"n", m.n},
                      {"m", m.m},
                      {"scatter_within", enc_mat(m.scatter_within, pk)},
                      {"scatter_between_m2", enc_mat(m.scatter_between_m2, pk)},
                      {"variance_sum", enc_vec(m.variance_sum, pk)}};
        } else {
          static_assert(std::is_same_v<T, MpPublishMsg>);
          json j{{"sender", "mp"},
                 {"published", m.published},
                 {"pending", m.pending}};
          j["model"] = m.model ? m.model->to_json() : json(nullptr);
          return j;
        }
      },
      msg);
}

ProtocolMessage parse_payload(RoundTag tag, const json& j, const PublicKey& pk) {
  switch (tag) {
    case RoundTag::Enroll1: {
      Enroll1Msg m;
      m.n = read_n(j);
      m.scatter = dec_mat(j.at("scatter"), pk, m.n);
      m.variance = dec_vec(j.at("variance"), pk, static_cast<std::size_t>(m.n));
      m.mean = dec_vec(j.at("mean"), pk, static_cast<std::size_t>(m.n));
      return m;
    }
    case RoundTag::EsReply: {
      EsReplyMsg m;
      m.n = read_n(j);
      m.prior_users = j.at("prior_users").get<int>();
      if (m.prior_users < 0) throw WireError("negative user count");
      m.mean_sum_updated =
          dec_vec(j.at("mean_sum_updated"), pk, static_cast<std::size_t>(m.n));
      m.mean_sum_prev =
          dec_vec(j.at("mean_sum_prev"), pk, static_cast<std::size_t>(m.n));
      const auto& means = j.at("user_means");
      if (!means.is_array() ||
          means.size() != static_cast<std::size_t>(m.prior_users))
        throw WireError("user_means count mismatch");
      for (const auto& u : means)
        m.user_means.push_back(dec_vec(u, pk, static_cast<std::size_t>(m.n)));
      return m;
    }
    case RoundTag::Enroll2: {
      Enroll2Msg m;
      m.n = read_n(j);
      m.n_mat = dec_mat(j.at("N"), pk, m.n);
      m.p_mat = dec_mat(j.at("P"), pk, m.n);
      const auto& rs = j.at("R");
      if (!rs.is_array()) throw WireError("R must be an array");
      for (const auto& r : rs) m.r_mats.push_back(dec_mat(r, pk, m.n));
      return m;
    }
    case RoundTag::EsOutput: {
      EsOutputMsg m;
      m.n = read_n(j);
      m.m = j.at("m").get<long>();
      if (m.m < 1) throw WireError("implausible enrolled-user count");
      m.scatter_within = dec_mat(j.at("scatter_within"), pk, m.n);
      m.scatter_between_m2 = dec_mat(j.at("scatter_between_m2"), pk, m.n);
      m.variance_sum =
          dec_vec(j.at("variance_sum"), pk, static_cast<std::size_t>(m.n));
      return m;
    }
    case RoundTag::MpPublish: {
      MpPublishMsg m;
      m.published = j.at("published").get<bool>();
      m.pending = j.at("pending").get<int>();
      if (!j.at("model").is_null()) m.model = LdaModel::from_json(j.at("model"));
      return m;
    }
  }
  throw WireError("unknown round tag");
}

}  // namespace

std::vector<std::uint8_t> wire_encode(const ProtocolMessage& msg,
                                      const PublicKey& pk) {
  const std::string payload = payload_json(msg, pk).dump();
  const std::uint32_t body_len = static_cast<std::uint32_t>(payload.size() + 2);
  if (body_len > kMaxFrameBytes) throw WireError("frame too large");

  std::vector<std::uint8_t> out;
  out.reserve(4 + body_len);
  out.push_back(static_cast<std::uint8_t>(body_len >> 24));
  out.push_back(static_cast<std::uint8_t>(body_len >> 16));
  out.push_back(static_cast<std::uint8_t>(body_len >> 8));
  out.push_back(static_cast<std::uint8_t>(body_len));
  out.push_back(kWireVersion);
  out.push_back(static_cast<std::uint8_t>(round_tag(msg)));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::optional<std::size_t> frame_size(std::span<const std::uint8_t> buffer) {
  if (buffer.size() < 4) return std::nullopt;
  const std::uint32_t body_len = (static_cast<std::uint32_t>(buffer[0]) << 24) |
                                 (static_cast<std::uint32_t>(buffer[1]) << 16) |
                                 (static_cast<std::uint32_t>(buffer[2]) << 8) |
                                 static_cast<std::uint32_t>(buffer[3]);
  if (body_len < 2) throw WireError("frame body shorter than its header");
  if (body_len > kMaxFrameBytes) throw WireError("declared frame length too large");
  const std::size_t total = 4 + static_cast<std::size_t>(body_len);
  if (buffer.size() < total) return std::nullopt;
  return total;
}

ProtocolMessage wire_decode(std::span<const std::uint8_t> frame,
                            const PublicKey& pk) {
  const auto size = frame_size(frame);
  if (!size || *size != frame.size()) throw WireError("truncated frame");
  if (frame[4] != kWireVersion)
    throw WireError("unknown wire version " + std::to_string(frame[4]));
  const std::uint8_t tag_byte = frame[5];
  if (tag_byte < 1 || tag_byte > 5)
    throw WireError("unknown round tag " + std::to_string(tag_byte));

  nlohmann::json payload;
  try {
    payload = nlohmann::json::parse(frame.begin() + 6, frame.end());
  } catch (const nlohmann::json::exception& e) {
    throw WireError(std::string("payload is not valid JSON: ") + e.what());
  }
  try {
    return parse_payload(static_cast<RoundTag>(tag_byte), payload, pk);
  } catch (const nlohmann::json::exception& e) {
    throw WireError(std::string("payload schema violation: ") + e.what());
  } catch (const ParseError& e) {
    throw WireError(std::string("payload field malformed: ") + e.what());
  } catch (const ValidationError& e) {
    throw WireError(std::string("payload value invalid: ") + e.what());
  }
}

}  // namespace keyforge::pplda
