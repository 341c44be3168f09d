#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ieaie/cipher.hpp"
#include "ieaie/image.hpp"
#include "ieaie/lasm.hpp"

namespace ieaie {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Dimensions {
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// "MxN" (rows x cols).
Dimensions parse_dims(std::string_view text);

/// Binary PGM (P5). Accepts maxval up to 255; writes maxval 255.
Image read_pgm(std::istream& in);
void write_pgm(std::ostream& out, const Image& img);

/// Exactly rows*cols bytes in raster order.
Image read_raw(std::istream& in, Dimensions dims);
void write_raw(std::ostream& out, const Image& img);

/// Raw when dims are given, PGM otherwise.
Image load_image(const std::filesystem::path& path, std::optional<Dimensions> dims = {});
void save_pgm(const std::filesystem::path& path, const Image& img);

/// Encrypted image plus what the decryptor needs besides the key.
///
/// Layout (little endian): "IEAI", version u8, flags u8, reserved u16,
/// rows u32, cols u32, rounds u32, s as the u64 bit pattern of a double,
/// then rows*cols pixel bytes. Flag bit 0: s present; bit 1: block-size
/// entropy denominator; bit 2: printed index modulus.
struct CipherContainer {
  static constexpr std::uint8_t kVersion = 1;

  Image cipher;
  unsigned rounds = 2;
  std::optional<double> s;
  EntropyDenominator denominator = EntropyDenominator::image_size;
  bool printed_modulus = false;

  bool operator==(const CipherContainer&) const = default;
};

void write_container(std::ostream& out, const CipherContainer& c);
CipherContainer read_container(std::istream& in);
void save_container(const std::filesystem::path& path, const CipherContainer& c);
CipherContainer load_container(const std::filesystem::path& path);

/// Key text: "x0 y0 x0p y0p mu" in decimal, optionally followed by a line
/// "hex" plus five 16-digit binary64 bit patterns, which take precedence.
/// Lines starting with '#' are comments.
SecretKey parse_key(std::string_view text);
std::string format_key(const SecretKey& key);
SecretKey load_key(const std::filesystem::path& path);

}  // namespace ieaie
