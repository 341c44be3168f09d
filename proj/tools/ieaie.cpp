// Command-line front end: encryption, keystream dumps, the differential
// attack, functional-graph analysis and image metrics.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ieaie/attack.hpp"
#include "ieaie/cipher.hpp"
#include "ieaie/io.hpp"
#include "ieaie/metrics.hpp"
#include "ieaie/precision_lab.hpp"
#include "ieaie/report.hpp"

namespace {

using namespace ieaie;

struct Options {
  std::string key;
  std::string in;
  std::vector<std::string> inputs;
  std::string out;
  std::string dims;
  std::string report;
  std::string format = "fixed:3";
  std::string quantizer = "floor";
  std::string denominator = "image";
  unsigned rounds = 2;
  double mu = 0.8116;
  std::optional<double> entropy;
  std::uint64_t seed = 1;
  std::size_t trials = 20;
  std::size_t samples = 0;
  std::vector<double> bit_distance;
  std::string float_format = "binary32";
  std::string strategy = "automatic";
  std::string histogram_csv;
};

bool strict_from_env() {
  const char* v = std::getenv("IEAIE_STRICT_PAPER");
  return v != nullptr && std::string(v) == "1";
}

EntropyDenominator parse_denominator(const std::string& s) {
  if (s == "image") return EntropyDenominator::image_size;
  if (s == "block") return EntropyDenominator::block_size;
  throw CLI::ValidationError("--entropy-denominator", "must be image or block");
}

CipherConfig cipher_config(const Options& o) {
  CipherConfig cfg;
  cfg.rounds = o.rounds;
  cfg.denominator = parse_denominator(o.denominator);
  cfg.keystream.printed_modulus = strict_from_env();
  return cfg;
}

std::optional<Dimensions> optional_dims(const Options& o) {
  if (o.dims.empty()) return std::nullopt;
  return parse_dims(o.dims);
}

Json base_config(std::string_view cmd, const Options& o) {
  Json c;
  c["subcommand"] = cmd;
  c["printed_modulus"] = strict_from_env();
  if (!o.key.empty()) c["key"] = o.key;
  if (!o.in.empty()) c["in"] = o.in;
  if (!o.out.empty()) c["out"] = o.out;
  if (!o.dims.empty()) c["dims"] = o.dims;
  c["seed"] = o.seed;
  return c;
}

void maybe_report(const Options& o, const Json& j) {
  if (!o.report.empty()) write_json(o.report, j);
}

int cmd_encrypt(const Options& o) {
  const SecretKey key = load_key(o.key);
  const Image img = load_image(o.in, optional_dims(o));
  const CipherConfig cfg = cipher_config(o);
  const EncryptionTrace t = encrypt_traced(img, key, cfg);
  save_container(o.out, {t.cipher, cfg.rounds, t.s, cfg.denominator,
                         cfg.keystream.printed_modulus});
  Json j = report_header("encrypt");
  j["config"] = base_config("encrypt", o);
  j["config"]["rounds"] = cfg.rounds;
  j["config"]["entropy_denominator"] = o.denominator;
  j["rows"] = img.rows();
  j["cols"] = img.cols();
  j["s"] = t.s;
  j["cipher_entropy"] = entropy(t.cipher);
  maybe_report(o, j);
  std::cout << "encrypted " << img.rows() << "x" << img.cols() << ", s = " << t.s << "\n";
  return 0;
}

int cmd_decrypt(const Options& o) {
  const SecretKey key = load_key(o.key);
  const CipherContainer c = load_container(o.in);
  if (!c.s) {
    throw FormatError("container carries no plain-image entropy s; cannot decrypt");
  }
  CipherConfig cfg;
  cfg.rounds = c.rounds;
  cfg.denominator = c.denominator;
  cfg.keystream.printed_modulus = c.printed_modulus;
  const Image plain = decrypt(c.cipher, key, cfg, *c.s);
  if (!o.dims.empty() || o.out.ends_with(".raw")) {
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + o.out);
    write_raw(out, plain);
  } else {
    save_pgm(o.out, plain);
  }
  Json j = report_header("decrypt");
  j["config"] = base_config("decrypt", o);
  j["rounds"] = c.rounds;
  j["s"] = *c.s;
  maybe_report(o, j);
  return 0;
}

int cmd_keystream(const Options& o) {
  const SecretKey key = load_key(o.key);
  double s = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!o.in.empty()) {
    const Image img = load_image(o.in, optional_dims(o));
    s = entropy(img);
    rows = img.rows();
    cols = img.cols();
  } else {
    if (o.dims.empty()) throw CLI::ValidationError("--dims", "required without --in");
    const Dimensions d = parse_dims(o.dims);
    rows = d.rows;
    cols = d.cols;
    s = o.entropy.value_or(0.0);
  }
  const CipherConfig cfg = cipher_config(o);
  const Keystream ks = derive_keystream(key, s, rows, cols, cfg.keystream);
  Json j = report_header("keystream");
  j["config"] = base_config("keystream", o);
  j["s"] = s;
  j["keystream"] = to_json(ks);
  if (!o.out.empty()) write_json(o.out, j);
  maybe_report(o, j);
  if (o.out.empty() && o.report.empty()) std::cout << j.dump(2) << "\n";
  return 0;
}

AttackStrategy parse_strategy(const std::string& s) {
  if (s == "automatic") return AttackStrategy::automatic;
  if (s == "shared-base") return AttackStrategy::shared_base;
  if (s == "pairwise") return AttackStrategy::pairwise;
  throw CLI::ValidationError("--strategy", "must be automatic, shared-base or pairwise");
}

int cmd_attack(const Options& o) {
  const SecretKey key = load_key(o.key);
  const Dimensions dims = o.dims.empty() ? Dimensions{8, 8} : parse_dims(o.dims);
  CipherConfig cfg = cipher_config(o);
  cfg.rounds = 1;
  EncryptionOracle oracle = EncryptionOracle::one_round(key, cfg);

  AttackOptions opts;
  opts.strategy = parse_strategy(o.strategy);
  opts.denominator = cfg.denominator;
  opts.seed = o.seed;
  const AttackResult res = run_attack(oracle, dims.rows, dims.cols, opts);
  const VerificationReport ver =
      verify_equivalent_key(oracle, res.key, res.family, o.trials, o.seed + 1);

  Json j = report_header("attack");
  j["config"] = base_config("attack", o);
  j["config"]["trials"] = o.trials;
  j["config"]["strategy"] = o.strategy;
  j["config"]["entropy_denominator"] = o.denominator;
  j["strategy"] = to_string(res.strategy);
  j["permutation_queries"] = res.permutation_queries;
  j["attack_queries"] = res.total_queries;
  j["equivalent_key"] = to_json(res.key);
  j["verification"] = to_json(ver);
  Json queries = Json::array();
  for (const QueryRecord& q : res.transcript) queries.push_back(to_json(q));
  j["transcript"] = std::move(queries);
  maybe_report(o, j);
  if (!o.out.empty()) write_json(o.out, to_json(res.key));

  std::cout << "strategy: " << to_string(res.strategy) << "\n"
            << "permutation queries: " << res.permutation_queries << "\n"
            << "attack queries: " << res.total_queries << "\n"
            << "verification: " << ver.matches << "/" << ver.trials << " exact ("
            << 100.0 * ver.match_rate() << "%)\n";
  if (ver.matches != ver.trials) {
    std::cout << "first failure: trial " << *ver.first_failing_trial;
    if (ver.first_failing_position) {
      std::cout << " at (" << ver.first_failing_position->row << ", "
                << ver.first_failing_position->col << ")";
    }
    std::cout << "\n";
    return 2;
  }
  return 0;
}

int cmd_map_graph(const Options& o) {
  const NumberFormat fmt = NumberFormat::parse(o.format);
  const QuantizeMode mode = parse_quantize_mode(o.quantizer);
  const FunctionalGraph g = build_functional_graph(ControlParam(o.mu), fmt, mode);
  if (!o.out.empty()) {
    std::ofstream out(o.out, std::ios::trunc);
    if (!out) throw FormatError("cannot write " + o.out);
    out << export_dot(g);
  }
  const GraphStats st = graph_stats(g);
  Json j = report_header("map-graph");
  j["config"] = base_config("map-graph", o);
  j["config"]["format"] = fmt.to_string();
  j["config"]["quantizer"] = to_string(mode);
  j["config"]["mu"] = o.mu;
  j["stats"] = to_json(st);
  maybe_report(o, j);
  std::cout << "nodes: " << st.nodes << ", components: " << st.components
            << ", max tail: " << st.max_tail << ", self loops: " << st.self_loops << "\n";
  return 0;
}

int cmd_metrics(const Options& o) {
  Json j = report_header("metrics");
  j["config"] = base_config("metrics", o);
  j["config"]["samples"] = o.samples;
  bool did = false;
  if (!o.bit_distance.empty()) {
    if (o.bit_distance.size() != 2) throw CLI::ValidationError("--bit-distance", "needs two values");
    const FloatFormat ff = o.float_format == "binary64" ? FloatFormat::binary64 : FloatFormat::binary32;
    const BitDistance bd = float_bit_distance(o.bit_distance[0], o.bit_distance[1], ff);
    j["bit_distance"] = {{"format", o.float_format},
                         {"fraction_bits", bd.fraction_bits},
                         {"exponent_bits", bd.exponent_bits},
                         {"sign_differs", bd.sign_differs}};
    std::cout << "differing fraction bits: " << bd.fraction_bits << "\n";
    did = true;
  }
  if (!o.inputs.empty()) {
    if (o.inputs.size() > 2) throw CLI::ValidationError("--in", "at most two images");
    const Image a = load_image(o.inputs[0], optional_dims(o));
    std::optional<Image> b;
    if (o.inputs.size() == 2) b = load_image(o.inputs[1], optional_dims(o));
    if (b && !a.same_shape(*b)) throw FormatError("pairwise metrics need equal dimensions");
    const MetricsReport m = audit(a, b ? &*b : nullptr, o.samples, o.seed);
    j["image"] = to_json(m);
    if (!o.histogram_csv.empty()) {
      std::ofstream csv(o.histogram_csv, std::ios::trunc);
      if (!csv) throw FormatError("cannot write " + o.histogram_csv);
      csv << histogram_csv(histogram(a));
    }
    std::cout << "entropy: " << m.entropy << "\n";
    if (m.npcr) std::cout << "NPCR: " << *m.npcr << "%, UACI: " << *m.uaci << "%\n";
    did = true;
  }
  if (!did) throw CLI::ValidationError("metrics", "give --in and/or --bit-distance");
  maybe_report(o, j);
  if (o.report.empty()) std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_flat_image(const Options& o) {
  const Dimensions d = o.dims.empty() ? Dimensions{512, 512} : parse_dims(o.dims);
  const Image img = flat_histogram_image(d.rows, d.cols, o.seed);
  save_pgm(o.out, img);
  Json j = report_header("flat-image");
  j["config"] = base_config("flat-image", o);
  j["entropy"] = entropy(img);
  j["histogram_variance"] = histogram_variance(histogram(img).counts);
  maybe_report(o, j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IEAIE image cipher, differential attack and analysis tools"};
  app.require_subcommand(1);
  Options o;

  auto* enc = app.add_subcommand("encrypt", "encrypt a PGM/raw image into a ciphertext container");
  enc->add_option("--key", o.key, "key file")->required()->check(CLI::ExistingFile);
  enc->add_option("--in", o.in, "input image")->required()->check(CLI::ExistingFile);
  enc->add_option("--out", o.out, "ciphertext container")->required();
  enc->add_option("--dims", o.dims, "MxN, marks the input as raw bytes");
  enc->add_option("--rounds", o.rounds, "rounds")->check(CLI::Range(1u, 64u));
  enc->add_option("--entropy-denominator", o.denominator, "image|block");
  enc->add_option("--report", o.report, "JSON report");

  auto* dec = app.add_subcommand("decrypt", "decrypt a ciphertext container");
  dec->add_option("--key", o.key, "key file")->required()->check(CLI::ExistingFile);
  dec->add_option("--in", o.in, "ciphertext container")->required()->check(CLI::ExistingFile);
  dec->add_option("--out", o.out, "plain image (PGM, or raw with --dims / .raw)")->required();
  dec->add_option("--dims", o.dims, "write raw bytes");
  dec->add_option("--report", o.report, "JSON report");

  auto* ksc = app.add_subcommand("keystream", "dump u, v, a, b and K as JSON");
  ksc->add_option("--key", o.key, "key file")->required()->check(CLI::ExistingFile);
  ksc->add_option("--in", o.in, "plain image supplying s and the size");
  ksc->add_option("--dims", o.dims, "MxN (raw input size, or size without --in)");
  ksc->add_option("--entropy", o.entropy, "s when no image is given (default 0)");
  ksc->add_option("--out", o.out, "JSON output");
  ksc->add_option("--report", o.report, "JSON report");

  auto* att = app.add_subcommand("attack", "break one-round IEAIE with chosen plaintexts");
  att->add_option("--key", o.key, "hidden key of the local oracle")->required()->check(CLI::ExistingFile);
  att->add_option("--dims", o.dims, "MxN (default 8x8)");
  att->add_option("--trials", o.trials, "verification images");
  att->add_option("--seed", o.seed, "RNG seed");
  att->add_option("--strategy", o.strategy, "automatic|shared-base|pairwise");
  att->add_option("--entropy-denominator", o.denominator, "image|block");
  att->add_option("--out", o.out, "equivalent key JSON");
  att->add_option("--report", o.report, "JSON report with transcript");

  auto* mg = app.add_subcommand("map-graph", "functional graph of the quantized map");
  mg->add_option("--format", o.format, "fixed:N | float:E:M[:BIAS]");
  mg->add_option("--quantizer", o.quantizer, "floor|round|ceil");
  mg->add_option("--mu", o.mu, "control parameter");
  mg->add_option("--out", o.out, "DOT output");
  mg->add_option("--report", o.report, "JSON stats");

  auto* met = app.add_subcommand("metrics", "entropy, correlation, NPCR/UACI, bit distance");
  met->add_option("--in", o.inputs, "one image, or two for NPCR/UACI")->check(CLI::ExistingFile);
  met->add_option("--dims", o.dims, "MxN for raw inputs");
  met->add_option("--samples", o.samples, "correlation sample count (0 = all pairs)");
  met->add_option("--seed", o.seed, "RNG seed");
  met->add_option("--bit-distance", o.bit_distance, "two reals to compare bitwise")->expected(2);
  met->add_option("--float", o.float_format, "binary32|binary64")
      ->check(CLI::IsMember({"binary32", "binary64"}));
  met->add_option("--histogram-csv", o.histogram_csv, "histogram of the first image as CSV");
  met->add_option("--report", o.report, "JSON report");

  auto* flat = app.add_subcommand("flat-image", "image with a perfectly flat histogram");
  flat->add_option("--dims", o.dims, "MxN (default 512x512)");
  flat->add_option("--seed", o.seed, "RNG seed");
  flat->add_option("--out", o.out, "PGM output")->required();
  flat->add_option("--report", o.report, "JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*enc) return cmd_encrypt(o);
    if (*dec) return cmd_decrypt(o);
    if (*ksc) return cmd_keystream(o);
    if (*att) return cmd_attack(o);
    if (*mg) return cmd_map_graph(o);
    if (*met) return cmd_metrics(o);
    if (*flat) return cmd_flat_image(o);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
