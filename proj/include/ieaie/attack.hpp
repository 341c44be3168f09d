#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ieaie/cipher.hpp"
#include "ieaie/image.hpp"

namespace ieaie {

/// Raised when an attack assumption (keystream class, bijectivity) fails.
class AttackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chosen-plaintext access to a cipher under a hidden key, with a query counter.
class EncryptionOracle {
 public:
  using Function = std::function<Image(const Image&)>;

  explicit EncryptionOracle(Function fn) : fn_(std::move(fn)) {}

  /// One-round IEAIE under `key`; the attack's usual target.
  static EncryptionOracle one_round(const SecretKey& key, CipherConfig cfg = {});

  Image query(const Image& plain) {
    ++count_;
    return fn_(plain);
  }
  std::size_t queries() const { return count_; }
  void reset_counter() { count_ = 0; }

 private:
  Function fn_;
  std::size_t count_ = 0;
};

/// Two images equal to c everywhere except a (resp. b) at `pos`.
std::pair<Image, Image> craft_pair(std::size_t rows, std::size_t cols, Position pos,
                                   std::uint8_t a, std::uint8_t b, std::uint8_t c);

/// (c1 - c2) mod 256 elementwise.
Image differential(const Image& c1, const Image& c2);

/// First nonzero entry in raster order; throws AttackError on an all-zero input.
Position locate_first_nonzero(const Image& dc);

/// x with x * prev = cur (mod 256), or nothing when prev is even.
std::optional<std::uint8_t> solve_multiplier(std::uint8_t prev, std::uint8_t cur);

/// All d in 1..max_d with d * prev = cur (mod 256).
std::vector<std::uint32_t> candidate_multipliers(std::uint8_t prev, std::uint8_t cur,
                                                 std::uint32_t max_d);

/// Largest t such that a value offset by t from every other pixel's value can
/// never meet it after the gray shift: |t| must exceed M + N - 2.
std::uint32_t shift_spread(std::size_t rows, std::size_t cols);

/// True if v + T(p) differs from w + T(x) for every pair of positions p, x.
bool is_fresh_offset(std::uint8_t v, std::uint8_t w, std::size_t rows, std::size_t cols);

/// A family of plaintexts sharing one (s, d_1..d_N) keystream class.
class ClassTemplate {
 public:
  enum class Kind { column_structured, single_special };

  /// Columns hold distinct values c0 + W*sigma(j); one pixel holds a fresh
  /// value. Every member has all-distinct gray-shifted values, so the entropy
  /// and every d_j agree across the family. Throws if M x N is too large.
  static ClassTemplate column_structured(std::size_t rows, std::size_t cols);
  /// Constant c with one fresh value at `special`.
  static ClassTemplate single_special(std::size_t rows, std::size_t cols, Position special);

  static bool column_structured_feasible(std::size_t rows, std::size_t cols);

  Kind kind() const { return kind_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Position special() const { return special_; }
  /// Plain-image entropy shared by every member.
  double entropy() const;

  Image sample(std::mt19937_64& rng) const;

 private:
  ClassTemplate(Kind kind, std::size_t rows, std::size_t cols, Position special)
      : kind_(kind), rows_(rows), cols_(cols), special_(special) {}

  Kind kind_;
  std::size_t rows_;
  std::size_t cols_;
  Position special_;
};

/// Column-structured base image: Z(i, j) = c0 + W*j (mod 256), 0-based j.
Image column_base(std::size_t rows, std::size_t cols, std::uint8_t c0, std::uint32_t width);

struct EquivalentKey {
  PermutationMap perm;
  Matrix<std::uint8_t> D;
  DiffusionParams d;
  double s_class = 0.0;
};

/// One chosen-plaintext differential: input difference delta at `source`
/// reappears at `dest` after permutation.
struct Observation {
  Position source;
  Position dest;
  std::uint8_t delta = 0;
  Image dc;
};

struct QueryRecord {
  std::string phase;
  std::uint64_t digest = 0;  ///< FNV-1a of the plaintext bytes
  std::optional<Position> position;
  std::optional<Position> first_nonzero;
};

enum class AttackStrategy { automatic, shared_base, pairwise };

struct AttackOptions {
  AttackStrategy strategy = AttackStrategy::automatic;
  /// Entropy convention of the target; part of the public algorithm.
  EntropyDenominator denominator = EntropyDenominator::image_size;
  std::uint64_t seed = 1;
  unsigned max_retries = 16;
};

struct PermutationRecovery {
  AttackStrategy strategy = AttackStrategy::shared_base;
  PermutationMap perm;
  std::size_t queries = 0;
  std::vector<Observation> observations;  ///< shared-base only
  Image known_plain;                       ///< a queried class member
  Image known_cipher;
};

std::uint64_t image_digest(const Image& img);

/// Equivalent permutation map of a one-round oracle. Shared-base strategy:
/// exactly M*N queries, one per position. Pairwise strategy: two queries per
/// position except the last, which is found by elimination.
PermutationRecovery recover_permutation(EncryptionOracle& oracle, std::size_t rows,
                                        std::size_t cols, const AttackOptions& opts = {},
                                        std::vector<QueryRecord>* transcript = nullptr);

/// d_2..d_N from observations whose difference is odd and lands left of the
/// last column; entry 0 (d_1) stays unresolved.
std::vector<std::optional<std::uint32_t>> recover_dj(const std::vector<Observation>& obs,
                                                     std::size_t rows, std::size_t cols);

struct ChainRecovery {
  std::vector<std::optional<std::uint32_t>> d;
  Image plain;
  Image cipher;
};

/// Crafts one pair whose difference lands in column 1 of R and walks the
/// rightward chain. Entries stay unresolved where the multiplier is ambiguous.
ChainRecovery recover_dj(EncryptionOracle& oracle, const PermutationMap& perm,
                         const AttackOptions& opts = {},
                         std::vector<QueryRecord>* transcript = nullptr);

/// d recomputed from a known plaintext once the permutation is known.
DiffusionParams class_diffusion(const Image& plain, const PermutationMap& perm,
                                EntropyDenominator denom);

/// D(i,j) = C(i,j) - R(i,j) - d_j C(i,j-1) (mod 256) from one known pair.
Matrix<std::uint8_t> recover_d_matrix(const Image& plain, const Image& cipher,
                                      const PermutationMap& perm, const DiffusionParams& d);

Image decrypt_with_equivalent_key(const Image& cipher, const EquivalentKey& key);

struct VerificationReport {
  std::size_t trials = 0;
  std::size_t matches = 0;
  std::optional<std::size_t> first_failing_trial;
  std::optional<Position> first_failing_position;

  double match_rate() const {
    return trials == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(trials);
  }
};

/// Encrypts `trials` fresh class members through the oracle and decrypts them
/// with `key`.
VerificationReport verify_equivalent_key(EncryptionOracle& oracle, const EquivalentKey& key,
                                         const ClassTemplate& family, std::size_t trials,
                                         std::uint64_t seed);

struct AttackResult {
  EquivalentKey key;
  AttackStrategy strategy = AttackStrategy::shared_base;
  std::size_t permutation_queries = 0;
  std::size_t total_queries = 0;
  ClassTemplate family = ClassTemplate::single_special(2, 2, {0, 0});
  std::vector<QueryRecord> transcript;
};

/// Permutation, coefficients and D against a one-round oracle.
AttackResult run_attack(EncryptionOracle& oracle, std::size_t rows, std::size_t cols,
                        const AttackOptions& opts = {});

std::string_view to_string(AttackStrategy s);

}  // namespace ieaie
