#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace glmscale {

// Philox4x32-10 counter-based generator (Salmon et al., Random123). Output
// depends only on (seed, stream, counter), so draws are reproducible across
// platforms and independent streams can be derived from one seed.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed, std::uint64_t stream = 0);

  static Block encrypt(Block counter, Key key);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on the open interval (0,1) with 53 bits of resolution.
  double uniform();
  double normal();
  // Exp(1) draw.
  double exponential();
  double rademacher() { return (next_u32() & 1u) ? 1.0 : -1.0; }
  bool bernoulli(double prob) { return uniform() < prob; }
  std::uint64_t poisson(double mean);
  // Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t below(std::uint64_t bound);

 private:
  void refill();

  Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Block buffer_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    Philox4x32& rng);

// Stream identifiers keep independent uses of one seed decorrelated.
namespace streams {
inline constexpr std::uint64_t kDesign = 1;
inline constexpr std::uint64_t kResponse = 2;
inline constexpr std::uint64_t kCoefficients = 3;
inline constexpr std::uint64_t kSplit = 4;
inline constexpr std::uint64_t kCovariance = 5;
inline constexpr std::uint64_t kSubsample = 6;
inline constexpr std::uint64_t kInit = 7;
}  // namespace streams

}  // namespace glmscale
