#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "ieaie/attack.hpp"
#include "ieaie/metrics.hpp"

using namespace ieaie;

namespace {

const SecretKey kReferenceKey{0.0056, 0.3678, 0.6229, 0.7676, ControlParam{0.8116}};

SecretKey random_key(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> mus(0.44, 0.93);
  return SecretKey(unit(rng), unit(rng), unit(rng), unit(rng), ControlParam{mus(rng)});
}

PermutationMap ground_truth_perm(const SecretKey& key, double s, std::size_t M, std::size_t N) {
  const Keystream ks = derive_keystream(key, s, M, N);
  return compose_permutation(ks.u, ks.v);
}

/// Cipher-shaped oracle with a fixed permutation, byte matrix and d that
/// ignore the plaintext's entropy.
EncryptionOracle synthetic_oracle(PermutationMap perm, Matrix<std::uint8_t> k, DiffusionParams d) {
  return EncryptionOracle([=](const Image& img) { return diffuse(gray_shift(scatter(img, perm)), k, d); });
}

PermutationMap random_map(std::mt19937_64& rng, std::size_t M, std::size_t N) {
  std::vector<std::uint32_t> u(N), v(M);
  std::iota(u.begin(), u.end(), 1u);
  std::iota(v.begin(), v.end(), 1u);
  std::shuffle(u.begin(), u.end(), rng);
  std::shuffle(v.begin(), v.end(), rng);
  return compose_permutation(u, v);
}

}  // namespace

TEST_CASE("crafted pairs") {
  const auto [a, b] = craft_pair(8, 8, {0, 0}, 1, 2, 0);
  CHECK(a(0, 0) == 1);
  CHECK(b(0, 0) == 2);
  std::size_t diff = 0;
  for (std::size_t k = 0; k < a.size(); ++k) diff += a.data()[k] != b.data()[k];
  CHECK(diff == 1);
  CHECK(entropy(a) == entropy(b));

  const auto [x, y] = craft_pair(4, 6, {3, 5}, 9, 200, 17);
  CHECK(x.data().back() == 9);
  CHECK(y.data().back() == 200);
  CHECK(x(0, 0) == 17);
  CHECK(entropy(x) == entropy(y));

  CHECK_THROWS_AS(craft_pair(4, 4, {0, 0}, 1, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(craft_pair(4, 4, {0, 0}, 1, 2, 2), std::invalid_argument);
  CHECK_THROWS_AS(craft_pair(4, 4, {4, 0}, 1, 2, 0), std::out_of_range);
}

TEST_CASE("differential and first nonzero") {
  Image c1(3, 3, 0), c2(3, 3, 0);
  CHECK(differential(c1, c2) == Image(3, 3, 0));
  c2(1, 1) = 1;
  CHECK(differential(c1, c2)(1, 1) == 255);
  CHECK_THROWS_AS(differential(c1, Image(3, 2)), std::invalid_argument);

  Image dc(4, 6, 0);
  dc(2, 4) = 7;
  dc(2, 5) = 9;
  CHECK(locate_first_nonzero(dc) == Position{2, 4});
  dc(1, 5) = 1;
  CHECK(locate_first_nonzero(dc) == Position{1, 5});
  CHECK_THROWS_AS(locate_first_nonzero(Image(2, 2, 0)), AttackError);

  std::mt19937_64 rng(1);
  Image r1(5, 5), r2(5, 5);
  for (auto& p : r1.data()) p = static_cast<std::uint8_t>(rng());
  for (auto& p : r2.data()) p = static_cast<std::uint8_t>(rng());
  const Image d = differential(r1, r2);
  for (std::size_t k = 0; k < d.size(); ++k)
    CHECK(d.data()[k] == static_cast<std::uint8_t>((r1.data()[k] - r2.data()[k] + 256) % 256));
}

TEST_CASE("modular multiplier recovery") {
  for (int prev = 0; prev < 256; ++prev) {
    for (int x : {1, 3, 77, 200, 255}) {
      const auto cur = static_cast<std::uint8_t>(prev * x);
      const auto got = solve_multiplier(static_cast<std::uint8_t>(prev), cur);
      if (prev % 2 == 0) {
        CHECK_FALSE(got.has_value());
      } else {
        REQUIRE(got.has_value());
        CHECK(*got == x);
      }
    }
  }
  CHECK(candidate_multipliers(3, 9, 8) == std::vector<std::uint32_t>{3});
  CHECK(candidate_multipliers(2, 6, 200) == std::vector<std::uint32_t>{3, 131});
  CHECK(candidate_multipliers(2, 6, 100) == std::vector<std::uint32_t>{3});
  CHECK(candidate_multipliers(0, 0, 4) == std::vector<std::uint32_t>{1, 2, 3, 4});
  CHECK(candidate_multipliers(2, 3, 256).empty());
}

TEST_CASE("fresh offsets") {
  CHECK(shift_spread(8, 8) == 14);
  CHECK(shift_spread(2, 2) == 2);
  CHECK(is_fresh_offset(100, 0, 8, 8));
  CHECK_FALSE(is_fresh_offset(14, 0, 8, 8));
  CHECK(is_fresh_offset(15, 0, 8, 8));
  CHECK_FALSE(is_fresh_offset(0, 242, 8, 8));
  CHECK(is_fresh_offset(0, 241, 8, 8));
  CHECK_FALSE(is_fresh_offset(5, 5, 8, 8));
  CHECK_FALSE(is_fresh_offset(100, 0, 100, 100));
  // freshness means the gray-shifted special value never meets another pixel
  for (int v = 0; v < 256; ++v) {
    if (!is_fresh_offset(static_cast<std::uint8_t>(v), 0, 4, 6)) continue;
    Image img(4, 6, 0);
    img(0, 0) = static_cast<std::uint8_t>(v);
    const Image r = gray_shift(img);
    for (std::size_t k = 1; k < r.size(); ++k) CHECK(r.data()[k] != r(0, 0));
  }
}

TEST_CASE("class templates keep s and d fixed") {
  std::mt19937_64 rng(2);
  for (auto [M, N] : {std::pair<std::size_t, std::size_t>{8, 8}, {2, 2}, {4, 6}, {10, 10}}) {
    REQUIRE(ClassTemplate::column_structured_feasible(M, N));
    const ClassTemplate fam = ClassTemplate::column_structured(M, N);
    const PermutationMap perm = random_map(rng, M, N);
    const Image first = fam.sample(rng);
    const DiffusionParams d0 = compute_d(gray_shift(scatter(first, perm)), EntropyDenominator::image_size);
    for (int t = 0; t < 30; ++t) {
      const Image img = fam.sample(rng);
      CHECK(entropy(img) == fam.entropy());
      CHECK(compute_d(gray_shift(scatter(img, perm)), EntropyDenominator::image_size) == d0);
    }
  }
  const ClassTemplate single = ClassTemplate::single_special(16, 16, {3, 4});
  CHECK(single.special() == Position{3, 4});
  const PermutationMap perm = random_map(rng, 16, 16);
  const DiffusionParams d0 =
      compute_d(gray_shift(scatter(single.sample(rng), perm)), EntropyDenominator::image_size);
  for (int t = 0; t < 30; ++t) {
    const Image img = single.sample(rng);
    CHECK(entropy(img) == single.entropy());
    CHECK(compute_d(gray_shift(scatter(img, perm)), EntropyDenominator::image_size) == d0);
  }
  CHECK_FALSE(ClassTemplate::column_structured_feasible(16, 16));
  CHECK_THROWS_AS(ClassTemplate::column_structured(16, 16), std::invalid_argument);
  CHECK_THROWS_AS(ClassTemplate::single_special(4, 4, {4, 0}), std::out_of_range);
  CHECK(column_base(2, 3, 250, 4)(1, 2) == 2);
}

TEST_CASE("8x8 reference key: permutation matches the keystream ground truth") {
  EncryptionOracle oracle = EncryptionOracle::one_round(kReferenceKey);
  std::vector<QueryRecord> transcript;
  const PermutationRecovery rec = recover_permutation(oracle, 8, 8, {}, &transcript);
  CHECK(rec.strategy == AttackStrategy::shared_base);
  CHECK(oracle.queries() == 64);
  CHECK(rec.queries == 64);
  CHECK(transcript.size() == 64);
  CHECK(is_bijection(rec.perm));
  const double s = entropy(rec.known_plain);
  CHECK(rec.perm == ground_truth_perm(kReferenceKey, s, 8, 8));
}

TEST_CASE("full attack against the reference key") {
  EncryptionOracle oracle = EncryptionOracle::one_round(kReferenceKey);
  const AttackResult res = run_attack(oracle, 8, 8);
  CHECK(res.permutation_queries == 64);
  const EquivalentKey& ek = res.key;
  const Keystream ks = derive_keystream(kReferenceKey, ek.s_class, 8, 8);
  CHECK(ek.perm == compose_permutation(ks.u, ks.v));

  std::mt19937_64 rng(3);
  const Image member = res.family.sample(rng);
  const EncryptionTrace tr = encrypt_traced(member, kReferenceKey, {1, EntropyDenominator::image_size, {}});
  CHECK(ek.d == tr.rounds[0].d);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      const std::uint32_t dj = ek.d[j];
      CHECK(ek.D(i, j) == static_cast<std::uint8_t>((dj * ks.k(i, j) + ks.k(i, dj - 1)) & 0xFF));
    }
  }
  // plaintext independence of D within the class
  CHECK(recover_d_matrix(member, tr.cipher, ek.perm, ek.d) == ek.D);
  CHECK(decrypt_with_equivalent_key(tr.cipher, ek) == member);

  const VerificationReport rep = verify_equivalent_key(oracle, ek, res.family, 20, 99);
  CHECK(rep.trials == 20);
  CHECK(rep.matches == 20);
  CHECK(rep.match_rate() == 1.0);
  CHECK_FALSE(rep.first_failing_trial.has_value());
}

TEST_CASE("2x2 attack recovers every realizable map") {
  std::mt19937_64 rng(4);
  std::set<std::vector<Position>> seen;
  for (int t = 0; t < 200; ++t) {
    const SecretKey key = random_key(rng);
    EncryptionOracle oracle = EncryptionOracle::one_round(key);
    const PermutationRecovery rec = recover_permutation(oracle, 2, 2);
    const double s = entropy(rec.known_plain);
    REQUIRE(rec.perm == ground_truth_perm(key, s, 2, 2));
    seen.insert({rec.perm.data().begin(), rec.perm.data().end()});
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("random keys and shapes") {
  std::mt19937_64 rng(5);
  for (auto [M, N] : {std::pair<std::size_t, std::size_t>{4, 4}, {6, 10}, {3, 8}, {12, 12}, {16, 16}}) {
    for (int t = 0; t < 3; ++t) {
      const SecretKey key = random_key(rng);
      EncryptionOracle oracle = EncryptionOracle::one_round(key);
      const AttackResult res = run_attack(oracle, M, N, {AttackStrategy::automatic,
                                                          EntropyDenominator::image_size, rng(), 16});
      CHECK(res.key.perm == ground_truth_perm(key, res.key.s_class, M, N));
      const VerificationReport rep = verify_equivalent_key(oracle, res.key, res.family, 5, rng());
      CHECK(rep.matches == rep.trials);
      if (res.strategy == AttackStrategy::shared_base) CHECK(res.permutation_queries == M * N);
    }
  }
}

TEST_CASE("pairwise strategy") {
  EncryptionOracle oracle = EncryptionOracle::one_round(kReferenceKey);
  AttackOptions opts;
  opts.strategy = AttackStrategy::pairwise;
  const PermutationRecovery rec = recover_permutation(oracle, 8, 8, opts);
  CHECK(rec.strategy == AttackStrategy::pairwise);
  CHECK(rec.queries >= 2 * 63);
  CHECK(rec.perm == ground_truth_perm(kReferenceKey, entropy(rec.known_plain), 8, 8));

  oracle.reset_counter();
  const AttackResult res = run_attack(oracle, 8, 8, opts);
  CHECK(res.strategy == AttackStrategy::pairwise);
  CHECK(res.family.kind() == ClassTemplate::Kind::single_special);
  CHECK(verify_equivalent_key(oracle, res.key, res.family, 10, 7).matches == 10);
}

TEST_CASE("block-size entropy convention") {
  AttackOptions opts;
  opts.denominator = EntropyDenominator::block_size;
  EncryptionOracle oracle =
      EncryptionOracle::one_round(kReferenceKey, {1, EntropyDenominator::block_size, {}});
  const AttackResult res = run_attack(oracle, 8, 8, opts);
  CHECK(verify_equivalent_key(oracle, res.key, res.family, 10, 3).matches == 10);
}

TEST_CASE("synthetic oracle with injected coefficients") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    const std::size_t M = 2 + rng() % 7, N = 2 + rng() % 7;
    if ((M * N) % 2) continue;
    const PermutationMap perm = random_map(rng, M, N);
    Matrix<std::uint8_t> k(M, N);
    for (auto& x : k.data()) x = static_cast<std::uint8_t>(rng());
    DiffusionParams d(N);
    for (auto& x : d) x = 1 + static_cast<std::uint32_t>(rng() % N);
    d.back() = 1;
    EncryptionOracle oracle = synthetic_oracle(perm, k, d);

    if (ClassTemplate::column_structured_feasible(M, N)) {
      const PermutationRecovery rec = recover_permutation(oracle, M, N, {AttackStrategy::shared_base});
      CHECK(rec.perm == perm);
      const auto got = recover_dj(rec.observations, M, N);
      CHECK_FALSE(got[0].has_value());
      for (std::size_t j = 1; j < N; ++j) {
        REQUIRE(got[j].has_value());
        CHECK(*got[j] == d[j]);
      }
    }
    const PermutationRecovery pw = recover_permutation(oracle, M, N, {AttackStrategy::pairwise});
    CHECK(pw.perm == perm);
    const ChainRecovery chain = recover_dj(oracle, perm);
    for (std::size_t j = 1; j < N; ++j) {
      if (chain.d[j]) CHECK(*chain.d[j] == d[j]);
    }
  }
}

TEST_CASE("all-one coefficients give a constant differential row") {
  const std::size_t M = 4, N = 6;
  std::mt19937_64 rng(7);
  const PermutationMap perm = random_map(rng, M, N);
  EncryptionOracle oracle = synthetic_oracle(perm, Matrix<std::uint8_t>(M, N, 5), DiffusionParams(N, 1));
  const ChainRecovery chain = recover_dj(oracle, perm);
  for (std::size_t j = 1; j < N; ++j) CHECK(chain.d[j] == std::optional<std::uint32_t>{1});
  const PermutationRecovery rec = recover_permutation(oracle, M, N, {AttackStrategy::shared_base});
  for (const Observation& o : rec.observations) {
    for (std::size_t j = o.dest.col; j < N; ++j) CHECK(o.dc(o.dest.row, j) == o.delta);
  }
}

TEST_CASE("even differences are not inverted") {
  Observation o;
  o.source = {0, 0};
  o.dest = {0, 0};
  o.delta = 4;
  o.dc = Image(2, 4, 0);
  o.dc(0, 0) = 4;
  o.dc(0, 1) = 12;
  const auto d = recover_dj({o}, 2, 4);
  for (const auto& x : d) CHECK_FALSE(x.has_value());
  o.delta = 3;
  o.dc(0, 0) = 3;
  o.dc(0, 1) = 9;
  CHECK(recover_dj({o}, 2, 4)[1] == std::optional<std::uint32_t>{3});
  Observation other = o;
  other.dest = {1, 0};
  other.dc = Image(2, 4, 0);
  other.dc(1, 0) = 3;
  other.dc(1, 1) = 6;
  CHECK_THROWS_AS(recover_dj({o, other}, 2, 4), AttackError);
}

TEST_CASE("zero byte matrix gives a zero D") {
  std::mt19937_64 rng(8);
  const PermutationMap perm = random_map(rng, 6, 6);
  DiffusionParams d{3, 1, 4, 1, 5, 1};
  EncryptionOracle oracle = synthetic_oracle(perm, Matrix<std::uint8_t>(6, 6, 0), d);
  Image plain(6, 6);
  for (auto& p : plain.data()) p = static_cast<std::uint8_t>(rng());
  CHECK(recover_d_matrix(plain, oracle.query(plain), perm, d) == Matrix<std::uint8_t>(6, 6, 0));
}

TEST_CASE("equivalent-key decryption fails outside the class") {
  EncryptionOracle oracle = EncryptionOracle::one_round(kReferenceKey);
  const AttackResult res = run_attack(oracle, 8, 8);
  std::mt19937_64 rng(9);
  Image other(8, 8);
  for (auto& p : other.data()) p = static_cast<std::uint8_t>(rng());
  CHECK(decrypt_with_equivalent_key(oracle.query(other), res.key) != other);

  EquivalentKey broken = res.key;
  std::swap(broken.perm(2, 3), broken.perm(5, 1));
  const VerificationReport rep = verify_equivalent_key(oracle, broken, res.family, 10, 4);
  CHECK(rep.matches < rep.trials);
  REQUIRE(rep.first_failing_trial.has_value());
  REQUIRE(rep.first_failing_position.has_value());
  CHECK((*rep.first_failing_position == Position{2, 3} || *rep.first_failing_position == Position{5, 1}));

  const VerificationReport empty = verify_equivalent_key(oracle, res.key, res.family, 0, 1);
  CHECK(empty.trials == 0);
  CHECK(empty.match_rate() == 0.0);
  CHECK_THROWS_AS(decrypt_with_equivalent_key(Image(4, 4), res.key), std::invalid_argument);
}

TEST_CASE("differentials follow the degenerate one-round recurrence") {
  for (auto [M, N] : {std::pair<std::size_t, std::size_t>{2, 2}, {4, 4}}) {
    std::mt19937_64 rng(10 + M);
    for (int k = 0; k < 3; ++k) {
      const SecretKey key = random_key(rng);
      EncryptionOracle oracle = EncryptionOracle::one_round(key);
      for (std::size_t q = 0; q < M * N; ++q) {
        const Position pos = raster_position(q, N);
        const std::uint8_t c = 0, a = 100, b = 171;
        REQUIRE(is_fresh_offset(a, c, M, N));
        REQUIRE(is_fresh_offset(b, c, M, N));
        const auto [img_a, img_b] = craft_pair(M, N, pos, a, b, c);
        const Image dc = differential(oracle.query(img_a), oracle.query(img_b));

        const double s = entropy(img_a);
        const Keystream ks = derive_keystream(key, s, M, N);
        const PermutationMap perm = compose_permutation(ks.u, ks.v);
        const DiffusionParams d =
            compute_d(gray_shift(scatter(img_a, perm)), EntropyDenominator::image_size);
        REQUIRE(d == compute_d(gray_shift(scatter(img_b, perm)), EntropyDenominator::image_size));

        Image predicted(M, N, 0);
        const Position p = perm[pos];
        std::uint32_t prev = 0;
        for (std::size_t j = 0; j < N; ++j) {
          const std::uint32_t dr = j == p.col ? static_cast<std::uint8_t>(a - b) : 0u;
          prev = (dr + d[j] * prev) & 0xFFu;
          predicted(p.row, j) = static_cast<std::uint8_t>(prev);
        }
        CHECK(dc == predicted);
        CHECK(locate_first_nonzero(dc) == p);
      }
    }
  }
}

TEST_CASE("query digests") {
  CHECK(image_digest(Image()) == 0xcbf29ce484222325ull);
  CHECK(image_digest(Image(2, 2, 1)) != image_digest(Image(2, 2, 2)));
  EncryptionOracle oracle = EncryptionOracle::one_round(kReferenceKey);
  const AttackResult res = run_attack(oracle, 4, 4);
  CHECK(res.transcript.size() == res.total_queries);
  CHECK(to_string(AttackStrategy::shared_base) == "shared_base");
}
