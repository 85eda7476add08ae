#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "keyforge/eval.hpp"
#include "keyforge/net.hpp"
#include "keyforge/protocol.hpp"
#include "keyforge/synth.hpp"
#include "keyforge/wire.hpp"

namespace fs = std::filesystem;
using keyforge::Rng;
namespace he = keyforge::he;
namespace pp = keyforge::pplda;
namespace net = keyforge::net;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw keyforge::Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw keyforge::Error("cannot write " + path.string());
  out << content;
}

std::vector<double> parse_sweep(const std::string& text) {
  // "a:b:step" or a comma-separated list.
  std::vector<double> sweep;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(text);
    if (!(in >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
      throw keyforge::ParseError("sweep must be a:b:step, got: " + text);
    for (double k = a; k <= b + 1e-12; k += step) sweep.push_back(k);
  } else {
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) sweep.push_back(std::stod(item));
  }
  if (sweep.empty()) throw keyforge::ParseError("empty sweep");
  return sweep;
}

std::vector<long> parse_list(const std::string& text) {
  std::vector<long> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stol(item));
  return out;
}

he::PublicKey load_pubkey(const fs::path& path) {
  return he::PublicKey::from_json(nlohmann::json::parse(read_file(path)));
}

// --- subcommands ------------------------------------------------------------

int cmd_gen(int users, std::uint64_t seed, const std::string& out_dir,
            int session_minutes, double tempo_sd) {
  keyforge::PopulationConfig config;
  config.users = users;
  config.session_minutes = session_minutes;
  config.tempo_sd = tempo_sd;
  const auto pop = keyforge::plan_population(config, seed);
  keyforge::write_population(pop, out_dir);
  std::cout << "wrote " << users * config.sessions << " session logs to "
            << out_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& dataset_dir, const std::string& mode,
             int slice_min, int min_samples, const std::string& sweep,
             const std::string& out_path) {
  keyforge::Dataset dataset = keyforge::load_dataset(dataset_dir);
  keyforge::EvalConfig config;
  config.slice_minutes = slice_min;
  config.min_samples = min_samples;
  if (!sweep.empty()) config.kappa_sweep = parse_sweep(sweep);

  keyforge::EvalReport report = mode == "lda"
                                    ? keyforge::run_crossval_lda(dataset, config)
                                    : keyforge::run_zero_effort(dataset, config);
  const std::string text = report.to_json().dump(2) + "\n";
  if (out_path.empty() || out_path == "-")
    std::cout << text;
  else
    write_file(out_path, text);
  std::cout << "mode=" << report.mode << " eer: kappa=" << report.eer.kappa
            << " FAR=" << report.eer.far << " FRR=" << report.eer.frr
            << " availability=" << report.availability << "\n";
  return 0;
}

int cmd_bench(const std::string& grid, const std::string& out_path,
              std::uint64_t seed) {
  // grid: "n=4,6;m=3,5"
  std::vector<long> ns_l, ms;
  std::istringstream in(grid);
  std::string part;
  while (std::getline(in, part, ';')) {
    auto eq = part.find('=');
    if (eq == std::string::npos)
      throw keyforge::ParseError("grid must look like n=4,6;m=3,5");
    const std::string key = part.substr(0, eq);
    if (key == "n")
      ns_l = parse_list(part.substr(eq + 1));
    else if (key == "m")
      ms = parse_list(part.substr(eq + 1));
    else
      throw keyforge::ParseError("unknown grid axis: " + key);
  }
  if (ns_l.empty() || ms.empty())
    throw keyforge::ParseError("grid needs both n= and m= axes");
  std::vector<int> ns(ns_l.begin(), ns_l.end());

  const he::HeParams params = he::HeParams::from_env_or_default();
  const auto results = keyforge::bench_pplda(ns, ms, params, seed);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : results) {
    out.push_back(r.to_json());
    std::cout << "n=" << r.n << " m=" << r.m << " user=" << r.user_ms
              << "ms es=" << r.es_ms << "ms mp=" << r.mp_ms
              << "ms user-es=" << r.user_es_bytes
              << "B es-mp=" << r.es_mp_bytes << "B\n";
  }
  if (!out_path.empty()) write_file(out_path, out.dump(2) + "\n");
  return 0;
}

int cmd_mp(const std::string& listen, int batch, const std::string& keyfile,
           const std::string& publish_dir) {
  const he::HeParams params = he::HeParams::from_env_or_default();
  Rng rng = Rng::from_entropy();

  he::SecretKey sk;
  if (fs::exists(keyfile)) {
    sk = he::SecretKey::from_json(nlohmann::json::parse(read_file(keyfile)));
    std::cout << "loaded keypair from " << keyfile << "\n";
  } else {
    std::cout << "generating " << params.modulus_bits << "-bit keypair...\n";
    auto [pk_new, sk_new] = he::keygen(params, rng);
    sk = sk_new;
    write_file(keyfile, sk.to_json().dump(2) + "\n");
    write_file(keyfile + ".pub", pk_new.to_json().dump(2) + "\n");
    std::cout << "wrote " << keyfile << " and " << keyfile << ".pub\n";
  }
  const he::PublicKey& pk = sk.public_key();

  pp::MatrixPublisher mp(sk, pp::BatchPolicy{batch}, he::FixedPointCodec{}, rng);
  if (!publish_dir.empty()) fs::create_directories(publish_dir);

  net::TcpListener listener(net::parse_endpoint(listen));
  std::cout << "matrix publisher on port " << listener.port() << ", batch w="
            << batch << "\n";
  while (true) {
    net::TcpStream conn = listener.accept();
    try {
      pp::ProtocolMessage msg = pp::wire_decode(conn.recv_frame(), pk);
      auto* output = std::get_if<pp::EsOutputMsg>(&msg);
      if (!output) throw keyforge::ProtocolError("expected ES_OUTPUT");
      pp::MpPublishMsg publish = mp.process(*output);
      if (publish.published && !publish_dir.empty()) {
        const fs::path path = fs::path(publish_dir) /
                              ("model-gen" + std::to_string(publish.model->generation) +
                               ".json");
        write_file(path, publish.model->to_json().dump(2) + "\n");
        std::cout << "published generation " << publish.model->generation
                  << " -> " << path.string() << "\n";
      } else if (!publish.published) {
        std::cout << "deferred (" << publish.pending
                  << " enrollments until publication)\n";
      }
      conn.send_frame(pp::wire_encode(publish, pk));
    } catch (const std::exception& e) {
      std::cerr << "mp: dropped request: " << e.what() << "\n";
    }
  }
}

int cmd_es(const std::string& listen, int features, const std::string& pubkey_path,
           const std::string& mp_addr) {
  const he::PublicKey pk = load_pubkey(pubkey_path);
  Rng rng = Rng::from_entropy();
  pp::EnrollmentServer es(pk, features, rng);

  net::TcpListener listener(net::parse_endpoint(listen));
  std::cout << "enrollment server on port " << listener.port() << ", n="
            << features << "\n";
  while (true) {
    net::TcpStream conn = listener.accept();
    try {
      pp::ProtocolMessage msg1 = pp::wire_decode(conn.recv_frame(), pk);
      auto* enroll1 = std::get_if<pp::Enroll1Msg>(&msg1);
      if (!enroll1) throw keyforge::ProtocolError("expected ENROLL_1");
      conn.send_frame(pp::wire_encode(es.begin_enrollment(*enroll1), pk));

      pp::ProtocolMessage msg2 = pp::wire_decode(conn.recv_frame(), pk);
      auto* enroll2 = std::get_if<pp::Enroll2Msg>(&msg2);
      if (!enroll2) throw keyforge::ProtocolError("expected ENROLL_2");
      pp::EsOutputMsg output = es.complete_enrollment(*enroll2);
      std::cout << "enrolled user #" << es.enrolled_users() << "\n";

      pp::MpPublishMsg publish{false, -1, std::nullopt};
      if (!mp_addr.empty()) {
        net::TcpStream mp_conn = net::TcpStream::connect(net::parse_endpoint(mp_addr));
        mp_conn.send_frame(pp::wire_encode(output, pk));
        pp::ProtocolMessage reply = pp::wire_decode(mp_conn.recv_frame(), pk);
        publish = std::get<pp::MpPublishMsg>(reply);
      }
      conn.send_frame(pp::wire_encode(publish, pk));
    } catch (const std::exception& e) {
      std::cerr << "es: enrollment failed: " << e.what() << "\n";
    }
  }
}

int cmd_enroll(const std::string& es_addr, const std::string& template_path,
               const std::string& pubkey_path) {
  const he::PublicKey pk = load_pubkey(pubkey_path);
  Rng rng = Rng::from_entropy();

  // Template file: JSON {"samples": [[...], ...]} of discretized rows.
  const auto doc = nlohmann::json::parse(read_file(template_path));
  const auto rows = doc.at("samples").get<std::vector<std::vector<double>>>();
  if (rows.empty()) throw keyforge::ValidationError("template has no samples");
  keyforge::UserSamples samples;
  samples.x.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size())
      throw keyforge::ValidationError("ragged sample rows");
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      samples.x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
  }

  pp::SystemConfig sys;
  sys.n = static_cast<int>(rows.front().size());
  sys.d = doc.value("d", 8);
  sys.m_max = doc.value("m_max", 1000);

  pp::UserClient client(pk, sys, rng);
  const pp::EnrollmentInput input = pp::prepare_enrollment(samples, sys.codec);

  net::TcpStream conn = net::TcpStream::connect(net::parse_endpoint(es_addr));
  conn.send_frame(pp::wire_encode(client.round1(input), pk));
  pp::ProtocolMessage reply = pp::wire_decode(conn.recv_frame(), pk);
  auto* es_reply = std::get_if<pp::EsReplyMsg>(&reply);
  if (!es_reply) throw keyforge::ProtocolError("expected ES_REPLY");
  conn.send_frame(pp::wire_encode(client.round2(*es_reply), pk));

  pp::ProtocolMessage status = pp::wire_decode(conn.recv_frame(), pk);
  const auto& publish = std::get<pp::MpPublishMsg>(status);
  if (publish.published)
    std::cout << "enrolled; model generation " << publish.model->generation
              << " published\n";
  else if (publish.pending >= 0)
    std::cout << "enrolled; publication deferred (" << publish.pending
              << " more enrollments needed)\n";
  else
    std::cout << "enrolled; no matrix publisher attached\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"keystroke-dynamics key generation toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic population");
  int gen_users = 10;
  std::uint64_t gen_seed = 1;
  std::string gen_out = "dataset";
  int gen_minutes = 45;
  double gen_tempo = 12.0;
  gen->add_option("--users", gen_users, "number of users")->required();
  gen->add_option("--seed", gen_seed, "generator seed")->required();
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--minutes", gen_minutes, "session length in minutes");
  gen->add_option("--tempo-sd", gen_tempo, "shared tempo factor sd (ms)");

  // eval
  auto* eval = app.add_subcommand("eval", "FAR/FRR/EER evaluation");
  std::string eval_dataset, eval_mode = "plain", eval_sweep, eval_out;
  int eval_slice = 4, eval_min_samples = 1;
  eval->add_option("--dataset", eval_dataset, "dataset directory")->required();
  eval->add_option("--mode", eval_mode, "plain|lda")
      ->check(CLI::IsMember({"plain", "lda"}));
  eval->add_option("--slice-min", eval_slice, "slice length in minutes")
      ->check(CLI::IsMember({4, 8}));
  eval->add_option("--min-samples", eval_min_samples, "observations per feature");
  eval->add_option("--kappa-sweep", eval_sweep, "a:b:step or comma list");
  eval->add_option("--out", eval_out, "report path (default stdout)");

  // bench-pplda
  auto* bench = app.add_subcommand("bench-pplda", "protocol cost benchmark");
  std::string bench_grid = "n=4,6;m=3,5", bench_out;
  std::uint64_t bench_seed = 1;
  bench->add_option("--grid", bench_grid, "grid spec, e.g. n=4,6;m=3,5");
  bench->add_option("--out", bench_out, "report path");
  bench->add_option("--seed", bench_seed, "bench seed");

  // es
  auto* es = app.add_subcommand("es", "run the enrollment server");
  std::string es_listen, es_pubkey = "mp-key.json.pub", es_mp;
  int es_features = 0;
  es->add_option("--listen", es_listen, "host:port to listen on")->required();
  es->add_option("--features", es_features, "feature count n")->required();
  es->add_option("--pubkey", es_pubkey, "matrix publisher public key file");
  es->add_option("--mp", es_mp, "matrix publisher host:port");

  // mp
  auto* mp = app.add_subcommand("mp", "run the matrix publisher");
  std::string mp_listen, mp_keyfile = "mp-key.json", mp_publish = "models";
  int mp_batch = 1;
  mp->add_option("--listen", mp_listen, "host:port to listen on")->required();
  mp->add_option("--batch", mp_batch, "publication batch size w")->required();
  mp->add_option("--keyfile", mp_keyfile, "secret key file (created if absent)");
  mp->add_option("--publish-dir", mp_publish, "directory for published models");

  // enroll
  auto* enroll = app.add_subcommand("enroll", "enroll a user template");
  std::string enroll_es, enroll_template, enroll_pubkey = "mp-key.json.pub";
  enroll->add_option("--es", enroll_es, "enrollment server host:port")->required();
  enroll->add_option("--template", enroll_template, "template JSON file")->required();
  enroll->add_option("--pubkey", enroll_pubkey, "matrix publisher public key file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen(gen_users, gen_seed, gen_out, gen_minutes, gen_tempo);
    if (eval->parsed())
      return cmd_eval(eval_dataset, eval_mode, eval_slice, eval_min_samples,
                      eval_sweep, eval_out);
    if (bench->parsed()) return cmd_bench(bench_grid, bench_out, bench_seed);
    if (es->parsed()) return cmd_es(es_listen, es_features, es_pubkey, es_mp);
    if (mp->parsed()) return cmd_mp(mp_listen, mp_batch, mp_keyfile, mp_publish);
    if (enroll->parsed()) return cmd_enroll(enroll_es, enroll_template, enroll_pubkey);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
