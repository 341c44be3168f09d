#include "ieaie/io.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cstdio>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <type_traits>
#include <vector>

namespace ieaie {

namespace {

template <typename T>
bool parse_whole(std::string_view s, T& out, int base = 10) {
  std::from_chars_result r;
  if constexpr (std::is_floating_point_v<T>) {
    (void)base;
    r = std::from_chars(s.data(), s.data() + s.size(), out);
  } else {
    r = std::from_chars(s.data(), s.data() + s.size(), out, base);
  }
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n' && ch != '\r') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw FormatError("truncated PGM header");
  return tok;
}

std::size_t pgm_number(std::istream& in, const char* what) {
  const std::string tok = pgm_token(in);
  std::size_t v = 0;
  if (!parse_whole(std::string_view(tok), v)) {
    throw FormatError(std::string("bad PGM ") + what + ": '" + tok + "'");
  }
  return v;
}

void put_u16(std::ostream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xFF), static_cast<char>(v >> 8)};
  out.write(b.data(), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int ch = in.get();
    if (ch == EOF) throw FormatError("truncated ciphertext container header");
    v |= static_cast<std::uint64_t>(ch) << (8 * i);
  }
  return v;
}

constexpr std::uint8_t kHasS = 1;
constexpr std::uint8_t kBlockDenominator = 2;
constexpr std::uint8_t kStrictModulus = 4;

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

}  // namespace

Dimensions parse_dims(std::string_view text) {
  const auto x = text.find_first_of("xX");
  Dimensions d;
  if (x == std::string_view::npos || !parse_whole(text.substr(0, x), d.rows) ||
      !parse_whole(text.substr(x + 1), d.cols) || d.rows == 0 || d.cols == 0) {
    throw FormatError("dimensions must look like MxN, got '" + std::string(text) + "'");
  }
  return d;
}

Image read_pgm(std::istream& in) {
  if (pgm_token(in) != "P5") throw FormatError("not a binary PGM (P5) file");
  const std::size_t cols = pgm_number(in, "width");
  const std::size_t rows = pgm_number(in, "height");
  const std::size_t maxval = pgm_number(in, "maxval");
  if (rows == 0 || cols == 0) throw FormatError("PGM has zero size");
  if (maxval == 0 || maxval > 255) throw FormatError("only 8-bit PGM (maxval <= 255) is supported");
  std::vector<std::uint8_t> px(rows * cols);
  in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (static_cast<std::size_t>(in.gcount()) != px.size()) {
    throw FormatError("PGM pixel data truncated");
  }
  for (std::uint8_t p : px) {
    if (p > maxval) throw FormatError("PGM pixel exceeds maxval");
  }
  return Image(rows, cols, std::move(px));
}

void write_pgm(std::ostream& out, const Image& img) {
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data().data()),
            static_cast<std::streamsize>(img.size()));
  if (!out) throw FormatError("failed writing PGM");
}

Image read_raw(std::istream& in, Dimensions dims) {
  std::vector<std::uint8_t> px((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (px.size() != dims.rows * dims.cols) {
    throw FormatError("raw input has " + std::to_string(px.size()) + " bytes, expected " +
                      std::to_string(dims.rows * dims.cols));
  }
  return Image(dims.rows, dims.cols, std::move(px));
}

void write_raw(std::ostream& out, const Image& img) {
  out.write(reinterpret_cast<const char*>(img.data().data()),
            static_cast<std::streamsize>(img.size()));
  if (!out) throw FormatError("failed writing raw image");
}

Image load_image(const std::filesystem::path& path, std::optional<Dimensions> dims) {
  auto in = open_in(path);
  return dims ? read_raw(in, *dims) : read_pgm(in);
}

void save_pgm(const std::filesystem::path& path, const Image& img) {
  auto out = open_out(path);
  write_pgm(out, img);
}

void write_container(std::ostream& out, const CipherContainer& c) {
  std::uint8_t flags = 0;
  if (c.s) flags |= kHasS;
  if (c.denominator == EntropyDenominator::block_size) flags |= kBlockDenominator;
  if (c.printed_modulus) flags |= kStrictModulus;
  out.write("IEAI", 4);
  out.put(static_cast<char>(CipherContainer::kVersion));
  out.put(static_cast<char>(flags));
  put_u16(out, 0);
  put_u32(out, static_cast<std::uint32_t>(c.cipher.rows()));
  put_u32(out, static_cast<std::uint32_t>(c.cipher.cols()));
  put_u32(out, c.rounds);
  put_u64(out, c.s ? std::bit_cast<std::uint64_t>(*c.s) : 0);
  write_raw(out, c.cipher);
}

CipherContainer read_container(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (in.gcount() != 4 || std::memcmp(magic.data(), "IEAI", 4) != 0) {
    throw FormatError("not an IEAIE ciphertext container");
  }
  const auto version = static_cast<std::uint8_t>(get_le(in, 1));
  if (version != CipherContainer::kVersion) {
    throw FormatError("unsupported container version " + std::to_string(version));
  }
  const auto flags = static_cast<std::uint8_t>(get_le(in, 1));
  get_le(in, 2);
  const auto rows = static_cast<std::size_t>(get_le(in, 4));
  const auto cols = static_cast<std::size_t>(get_le(in, 4));
  CipherContainer c;
  c.rounds = static_cast<unsigned>(get_le(in, 4));
  const std::uint64_t s_bits = get_le(in, 8);
  if (flags & kHasS) c.s = std::bit_cast<double>(s_bits);
  c.denominator = (flags & kBlockDenominator) ? EntropyDenominator::block_size
                                              : EntropyDenominator::image_size;
  c.printed_modulus = (flags & kStrictModulus) != 0;
  if (rows == 0 || cols == 0) throw FormatError("container has zero size");
  if (rows * cols > (std::size_t{1} << 32)) throw FormatError("container dimensions are implausible");
  std::vector<std::uint8_t> px(rows * cols);
  in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (static_cast<std::size_t>(in.gcount()) != px.size()) {
    throw FormatError("container pixel data truncated");
  }
  if (in.peek() != EOF) throw FormatError("trailing bytes after container pixels");
  c.cipher = Image(rows, cols, std::move(px));
  return c;
}

void save_container(const std::filesystem::path& path, const CipherContainer& c) {
  auto out = open_out(path);
  write_container(out, c);
}

CipherContainer load_container(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_container(in);
}

SecretKey parse_key(std::string_view text) {
  std::vector<std::vector<std::string_view>> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    auto f = fields(line);
    if (f.empty() || f.front().front() == '#') continue;
    lines.push_back(std::move(f));
  }
  if (lines.empty()) throw FormatError("key file is empty");

  std::array<double, 5> v{};
  const auto& dec = lines.front();
  if (dec.size() != 5) {
    throw FormatError("key line needs 5 numbers: x0 y0 x0' y0' mu");
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (!parse_whole(dec[i], v[i])) {
      throw FormatError("bad key number '" + std::string(dec[i]) + "'");
    }
  }
  if (lines.size() >= 2) {
    const auto& hex = lines[1];
    if (hex.size() != 6 || hex.front() != "hex") {
      throw FormatError("second key line must be 'hex' followed by 5 bit patterns");
    }
    for (std::size_t i = 0; i < 5; ++i) {
      std::uint64_t bits = 0;
      if (hex[i + 1].size() != 16 || !parse_whole(hex[i + 1], bits, 16)) {
        throw FormatError("bad hex bit pattern '" + std::string(hex[i + 1]) + "'");
      }
      v[i] = std::bit_cast<double>(bits);
    }
  }
  if (lines.size() > 2) throw FormatError("unexpected extra lines in key file");
  if (!ControlParam::valid(v[4])) {
    throw FormatError("mu = " + std::to_string(v[4]) +
                      " is outside [0.37,0.38] u [0.4,0.42] u [0.44,0.93]");
  }
  try {
    return SecretKey(v[0], v[1], v[2], v[3], ControlParam(v[4]));
  } catch (const std::exception& e) {
    throw FormatError(std::string("invalid key: ") + e.what());
  }
}

std::string format_key(const SecretKey& key) {
  const std::array<double, 5> v{key.x0(), key.y0(), key.x0p(), key.y0p(), key.mu().value()};
  std::string dec;
  std::string hex = "hex";
  for (double x : v) {
    std::array<char, 32> buf{};
    auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (!dec.empty()) dec += ' ';
    dec.append(buf.data(), r.ptr);
    char hb[17];
    std::snprintf(hb, sizeof hb, "%016llx",
                  static_cast<unsigned long long>(std::bit_cast<std::uint64_t>(x)));
    hex += ' ';
    hex += hb;
  }
  return dec + "\n" + hex + "\n";
}

SecretKey load_key(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key(ss.str());
}

}  // namespace ieaie
