#include <doctest.h>

#include <bit>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ieaie/io.hpp"
#include "ieaie/report.hpp"

using namespace ieaie;

namespace {

Image random_image(std::mt19937_64& rng, std::size_t M, std::size_t N) {
  Image img(M, N);
  for (auto& p : img.data()) p = static_cast<std::uint8_t>(rng());
  return img;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ieaie_test_io_" + name);
}

}  // namespace

TEST_CASE("dimension strings") {
  const Dimensions d = parse_dims("6x10");
  CHECK(d.rows == 6);
  CHECK(d.cols == 10);
  for (const char* bad : {"", "8", "8x", "x8", "0x4", "8x8x8", "-1x4", "8 x 8"}) {
    CHECK_THROWS_AS(parse_dims(bad), FormatError);
  }
}

TEST_CASE("PGM round trip and parsing") {
  std::mt19937_64 rng(1);
  const Image img = random_image(rng, 7, 13);
  std::stringstream ss;
  write_pgm(ss, img);
  CHECK(ss.str().rfind("P5\n13 7\n255\n", 0) == 0);
  CHECK(read_pgm(ss) == img);

  std::stringstream commented("P5\n# made by hand\n2 1 # width height\n255\n\x01\x02");
  const Image c = read_pgm(commented);
  CHECK(c.rows() == 1);
  CHECK(c.cols() == 2);
  CHECK(c(0, 1) == 2);

  std::stringstream p2("P2\n2 2\n255\n1 2 3 4");
  CHECK_THROWS_AS(read_pgm(p2), FormatError);
  std::stringstream deep("P5\n1 1\n65535\n\x00\x01");
  CHECK_THROWS_AS(read_pgm(deep), FormatError);
  std::stringstream shortd("P5\n4 4\n255\nabc");
  CHECK_THROWS_AS(read_pgm(shortd), FormatError);
  std::stringstream over("P5\n1 1\n15\n\x20");
  CHECK_THROWS_AS(read_pgm(over), FormatError);
}

TEST_CASE("raw round trip") {
  std::mt19937_64 rng(2);
  const Image img = random_image(rng, 4, 6);
  std::stringstream ss;
  write_raw(ss, img);
  CHECK(ss.str().size() == 24);
  CHECK(read_raw(ss, {4, 6}) == img);
  std::stringstream bad(std::string(23, 'a'));
  CHECK_THROWS_AS(read_raw(bad, {4, 6}), FormatError);
}

TEST_CASE("image files") {
  std::mt19937_64 rng(3);
  const Image img = random_image(rng, 8, 8);
  const auto pgm = temp_path("a.pgm");
  save_pgm(pgm, img);
  CHECK(load_image(pgm) == img);
  const auto raw = temp_path("a.raw");
  {
    std::ofstream out(raw, std::ios::binary);
    write_raw(out, img);
  }
  CHECK(load_image(raw, Dimensions{8, 8}) == img);
  CHECK_THROWS_AS(load_image(temp_path("missing.pgm")), FormatError);
  std::filesystem::remove(pgm);
  std::filesystem::remove(raw);
}

TEST_CASE("cipher container") {
  std::mt19937_64 rng(4);
  CipherContainer c;
  c.cipher = random_image(rng, 6, 10);
  c.rounds = 3;
  c.s = 7.123456789012345;
  c.denominator = EntropyDenominator::block_size;
  c.printed_modulus = true;
  std::stringstream ss;
  write_container(ss, c);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "IEAI");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0b111);
  CHECK(bytes.size() == 4 + 1 + 1 + 2 + 12 + 8 + 60);
  CHECK(read_container(ss) == c);

  CipherContainer plain;
  plain.cipher = random_image(rng, 2, 2);
  std::stringstream s2;
  write_container(s2, plain);
  CHECK(s2.str()[5] == 0);
  const CipherContainer back = read_container(s2);
  CHECK_FALSE(back.s.has_value());
  CHECK(back == plain);

  std::stringstream trailing(bytes + "x");
  CHECK_THROWS_AS(read_container(trailing), FormatError);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 1));
  CHECK_THROWS_AS(read_container(truncated), FormatError);
  std::string wrong = bytes;
  wrong[0] = 'X';
  std::stringstream magic(wrong);
  CHECK_THROWS_AS(read_container(magic), FormatError);
  wrong = bytes;
  wrong[4] = 9;
  std::stringstream ver(wrong);
  CHECK_THROWS_AS(read_container(ver), FormatError);

  const auto path = temp_path("c.ieai");
  save_container(path, c);
  CHECK(load_container(path) == c);
  std::filesystem::remove(path);
}

TEST_CASE("key files") {
  const SecretKey k = parse_key("0.0056 0.3678 0.6229 0.7676 0.8116\n");
  CHECK(k.x0() == 0.0056);
  CHECK(k.y0p() == 0.7676);
  CHECK(k.mu().value() == 0.8116);

  const SecretKey c = parse_key("# reference key\n\n0.0056 0.3678 0.6229 0.7676 0.8116\n");
  CHECK(c == k);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const SecretKey r(unit(rng), unit(rng), unit(rng), unit(rng), ControlParam{0.5 + 0.4 * unit(rng)});
    CHECK(parse_key(format_key(r)) == r);
  }

  // hex patterns win over the decimals
  const double odd = std::bit_cast<double>(std::bit_cast<std::uint64_t>(0.25) + 1);
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(odd)));
  const std::string text = std::string("0.25 0.5 0.5 0.5 0.8\nhex ") + hex + " " +
                           "3fe0000000000000 3fe0000000000000 3fe0000000000000 3fe999999999999a\n";
  CHECK(parse_key(text).x0() == odd);

  for (const char* bad : {"", "0.1 0.2 0.3 0.4", "0.1 0.2 0.3 0.4 abc", "0.1 0.2 0.3 0.4 0.8 0.9",
                          "1.5 0.2 0.3 0.4 0.8", "0.1 0.2 0.3 0.4 0.8\nhex 1 2 3",
                          "0.1 0.2 0.3 0.4 0.8\nfoo\nbar"}) {
    CHECK_THROWS_AS(parse_key(bad), FormatError);
  }
  try {
    parse_key("0.1 0.2 0.3 0.4 0.39");
    FAIL("accepted an invalid mu");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("outside") != std::string::npos);
  }

  const auto path = temp_path("key.txt");
  {
    std::ofstream out(path);
    out << format_key(k);
  }
  CHECK(load_key(path) == k);
  std::filesystem::remove(path);
}

TEST_CASE("JSON reports") {
  const Json h = report_header("attack");
  CHECK(h["schema"] == "ieaie-report/1");
  CHECK(h["kind"] == "attack");
  CHECK(to_json(Position{2, 3}) == Json::array({2, 3}));
  Image img(2, 2, 0);
  img(1, 0) = 9;
  CHECK(to_json(img) == Json::parse("[[0,0],[9,0]]"));

  GraphStats st;
  st.nodes = 4;
  st.components = 2;
  st.component_sizes = {3, 1};
  st.cycle_lengths = {1, 2};
  st.max_tail = 1;
  st.self_loops = 1;
  const Json js = to_json(st);
  for (const char* key : {"nodes", "components", "cycle_lengths", "max_tail", "self_loops"}) {
    CHECK(js.contains(key));
  }

  std::mt19937_64 rng(6);
  EquivalentKey ek;
  std::vector<std::uint32_t> u{3, 1, 2, 4}, v{2, 1};
  ek.perm = compose_permutation(u, v);
  ek.D = random_image(rng, 2, 4);
  ek.d = {2, 4, 1, 1};
  ek.s_class = 1.5;
  const EquivalentKey back = equivalent_key_from_json(to_json(ek));
  CHECK(back.perm == ek.perm);
  CHECK(back.D == ek.D);
  CHECK(back.d == ek.d);
  CHECK(back.s_class == ek.s_class);
  CHECK_THROWS_AS(equivalent_key_from_json(Json::object()), FormatError);

  const auto path = temp_path("r.json");
  write_json(path, h);
  std::ifstream in(path);
  CHECK(Json::parse(in) == h);
  std::filesystem::remove(path);
}
