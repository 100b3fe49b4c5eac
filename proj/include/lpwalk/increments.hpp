#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lpwalk {

enum class LawKind { Rademacher, UniformSym, StandardNormal, CenteredExponential, ScaledRademacher };

/// Distribution of a single increment coordinate. Every kind is centered with
/// all moments finite.
struct IncrementLaw {
  LawKind kind = LawKind::Rademacher;
  double scale = 1.0;  // only meaningful for ScaledRademacher

  static IncrementLaw rademacher() { return {LawKind::Rademacher, 1.0}; }
  static IncrementLaw uniform() { return {LawKind::UniformSym, 1.0}; }
  static IncrementLaw normal() { return {LawKind::StandardNormal, 1.0}; }
  static IncrementLaw centered_exponential() { return {LawKind::CenteredExponential, 1.0}; }
  static IncrementLaw scaled_rademacher(double c);

  /// Parses `rademacher`, `uniform`, `normal`, `cexp` or `rademacher:c=<real>`.
  static IncrementLaw parse(std::string_view text);
  std::string name() const;

  bool operator==(const IncrementLaw&) const = default;
};

/// Exact standard deviation of the law.
double law_sigma(const IncrementLaw& law);

/// E|xi|^q in closed form, or nullopt where no closed form is implemented.
std::optional<double> law_abs_moment(const IncrementLaw& law, double q);

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t replicate_index = 0;
};

/// Philox4x32-10 block function: one 128-bit output per 128-bit counter.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Counter-addressed stream of 64-bit words keyed by (master_seed, replicate_index).
///
/// Word w of the stream is half (w & 1) of Philox4x32-10 applied to the counter
/// (w >> 1 low, w >> 1 high, replicate low, replicate high) under the key
/// master_seed. Any word can be computed without touching the others, so the
/// output never depends on how work is split across threads.
class CounterStream {
 public:
  explicit CounterStream(SeedSpec seed);

  std::uint64_t word(std::uint64_t index) const;
  /// Writes words [first, first + out.size()) into out.
  void words(std::uint64_t first, std::span<std::uint64_t> out) const;

  const SeedSpec& seed() const { return seed_; }

 private:
  SeedSpec seed_;
  std::array<std::uint32_t, 2> key_;
};

/// Draws xi_{offset}, ..., xi_{offset+count-1} from the stream.
///
/// Word budget per draw depends on the law: Rademacher kinds use one bit
/// (draw k is bit k%64 of word k/64, set bit means +1), uniform and centered
/// exponential use one word, the normal uses one Box-Muller pair per two draws.
void sample_xi_block(const IncrementLaw& law, const CounterStream& stream, std::uint64_t offset,
                     std::span<double> out);

std::vector<double> sample_xi_block(const IncrementLaw& law, std::size_t count, SeedSpec seed,
                                    std::uint64_t offset = 0);

/// Sum of draws [offset, offset + count). Equal to summing sample_xi_block
/// output; Rademacher kinds use popcount over whole words.
double sum_xi_block(const IncrementLaw& law, const CounterStream& stream, std::uint64_t offset,
                    std::uint64_t count);

/// Uniform double in the open interval (0, 1) from the top 53 bits of a word.
inline double word_to_open_unit(std::uint64_t w) {
  return (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace lpwalk
