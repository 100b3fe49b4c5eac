#include "lpwalk/increments.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lpwalk/analytic_limits.hpp"

namespace lpwalk {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(prod >> 32);
  lo = static_cast<std::uint32_t>(prod);
}

inline std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
inline std::uint32_t hi32(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

const double kSqrt3 = std::sqrt(3.0);

double draw_from_words(LawKind kind, std::uint64_t w) {
  switch (kind) {
    case LawKind::UniformSym:
      return kSqrt3 * (2.0 * word_to_open_unit(w) - 1.0);
    case LawKind::CenteredExponential:
      return -std::log(word_to_open_unit(w)) - 1.0;
    default:
      throw std::logic_error("draw_from_words: law needs a different word budget");
  }
}

}  // namespace

IncrementLaw IncrementLaw::scaled_rademacher(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("scaled rademacher needs a finite c > 0");
  }
  return {LawKind::ScaledRademacher, c};
}

IncrementLaw IncrementLaw::parse(std::string_view text) {
  if (text == "rademacher") return rademacher();
  if (text == "uniform") return uniform();
  if (text == "normal") return normal();
  if (text == "cexp") return centered_exponential();
  constexpr std::string_view prefix = "rademacher:c=";
  if (text.starts_with(prefix)) {
    const std::string value(text.substr(prefix.size()));
    std::size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw std::invalid_argument("bad scale in law '" + std::string(text) + "'");
    }
    return scaled_rademacher(c);
  }
  throw std::invalid_argument("unknown law '" + std::string(text) +
                              "' (expected rademacher, uniform, normal, cexp, rademacher:c=<real>)");
}

std::string IncrementLaw::name() const {
  switch (kind) {
    case LawKind::Rademacher: return "rademacher";
    case LawKind::UniformSym: return "uniform";
    case LawKind::StandardNormal: return "normal";
    case LawKind::CenteredExponential: return "cexp";
    case LawKind::ScaledRademacher: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, scale);
      return "rademacher:c=" + std::string(buf, end);
    }
  }
  return "?";
}

double law_sigma(const IncrementLaw& law) {
  return law.kind == LawKind::ScaledRademacher ? law.scale : 1.0;
}

std::optional<double> law_abs_moment(const IncrementLaw& law, double q) {
  if (!(q >= 0.0)) return std::nullopt;
  switch (law.kind) {
    case LawKind::Rademacher: return 1.0;
    case LawKind::ScaledRademacher: return std::pow(law.scale, q);
    case LawKind::UniformSym: return std::pow(kSqrt3, q) / (q + 1.0);
    case LawKind::StandardNormal: return mp_closed_form(q);
    case LawKind::CenteredExponential: return std::nullopt;
  }
  return std::nullopt;
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

CounterStream::CounterStream(SeedSpec seed)
    : seed_(seed), key_{lo32(seed.master_seed), hi32(seed.master_seed)} {}

std::uint64_t CounterStream::word(std::uint64_t index) const {
  const std::uint64_t block = index >> 1;
  const auto out = philox4x32(
      {lo32(block), hi32(block), lo32(seed_.replicate_index), hi32(seed_.replicate_index)}, key_);
  return (index & 1) ? (static_cast<std::uint64_t>(out[3]) << 32 | out[2])
                     : (static_cast<std::uint64_t>(out[1]) << 32 | out[0]);
}

void CounterStream::words(std::uint64_t first, std::span<std::uint64_t> out) const {
  std::size_t i = 0;
  if (out.empty()) return;
  if (first & 1) out[i++] = word(first);
  while (i + 1 < out.size()) {
    const std::uint64_t block = (first + i) >> 1;
    const auto r = philox4x32(
        {lo32(block), hi32(block), lo32(seed_.replicate_index), hi32(seed_.replicate_index)}, key_);
    out[i++] = static_cast<std::uint64_t>(r[1]) << 32 | r[0];
    out[i++] = static_cast<std::uint64_t>(r[3]) << 32 | r[2];
  }
  if (i < out.size()) out[i] = word(first + i);
}

void sample_xi_block(const IncrementLaw& law, const CounterStream& stream, std::uint64_t offset,
                     std::span<double> out) {
  const std::size_t count = out.size();
  if (count == 0) return;
  switch (law.kind) {
    case LawKind::Rademacher:
    case LawKind::ScaledRademacher: {
      const double c = law.kind == LawKind::Rademacher ? 1.0 : law.scale;
      const std::uint64_t first_word = offset >> 6;
      const std::uint64_t last_word = (offset + count - 1) >> 6;
      std::vector<std::uint64_t> bits(last_word - first_word + 1);
      stream.words(first_word, bits);
      for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t pos = offset + k;
        const std::uint64_t w = bits[(pos >> 6) - first_word];
        out[k] = ((w >> (pos & 63)) & 1u) ? c : -c;
      }
      return;
    }
    case LawKind::UniformSym:
    case LawKind::CenteredExponential: {
      std::vector<std::uint64_t> w(count);
      stream.words(offset, w);
      for (std::size_t k = 0; k < count; ++k) out[k] = draw_from_words(law.kind, w[k]);
      return;
    }
    case LawKind::StandardNormal: {
      // Draw k belongs to pair k/2, which owns words 2*(k/2) and 2*(k/2)+1.
      const std::uint64_t first_pair = offset >> 1;
      const std::uint64_t last_pair = (offset + count - 1) >> 1;
      std::vector<std::uint64_t> w(2 * (last_pair - first_pair + 1));
      stream.words(2 * first_pair, w);
      for (std::size_t k = 0; k < count; ++k) {
        const std::uint64_t pos = offset + k;
        const std::size_t pair = static_cast<std::size_t>((pos >> 1) - first_pair);
        const double radius = std::sqrt(-2.0 * std::log(word_to_open_unit(w[2 * pair])));
        const double angle = 2.0 * std::numbers::pi * word_to_open_unit(w[2 * pair + 1]);
        out[k] = radius * ((pos & 1) ? std::sin(angle) : std::cos(angle));
      }
      return;
    }
  }
}

std::vector<double> sample_xi_block(const IncrementLaw& law, std::size_t count, SeedSpec seed,
                                    std::uint64_t offset) {
  std::vector<double> out(count);
  sample_xi_block(law, CounterStream(seed), offset, out);
  return out;
}

double sum_xi_block(const IncrementLaw& law, const CounterStream& stream, std::uint64_t offset,
                    std::uint64_t count) {
  if (count == 0) return 0.0;
  if (law.kind == LawKind::Rademacher || law.kind == LawKind::ScaledRademacher) {
    const double c = law.kind == LawKind::Rademacher ? 1.0 : law.scale;
    std::int64_t ones = 0;
    std::uint64_t pos = offset;
    const std::uint64_t end = offset + count;
    constexpr std::size_t kChunk = 256;
    std::array<std::uint64_t, kChunk> buf;
    while (pos < end) {
      const std::uint64_t word_index = pos >> 6;
      const unsigned bit = static_cast<unsigned>(pos & 63);
      if (bit != 0 || end - pos < 64) {
        const std::uint64_t take = std::min<std::uint64_t>(64 - bit, end - pos);
        std::uint64_t w = stream.word(word_index) >> bit;
        if (take < 64) w &= (std::uint64_t{1} << take) - 1;
        ones += std::popcount(w);
        pos += take;
        continue;
      }
      const std::size_t full = static_cast<std::size_t>(std::min<std::uint64_t>((end - pos) >> 6, kChunk));
      stream.words(word_index, std::span(buf.data(), full));
      for (std::size_t i = 0; i < full; ++i) ones += std::popcount(buf[i]);
      pos += 64 * full;
    }
    const auto n = static_cast<std::int64_t>(count);
    return c * static_cast<double>(2 * ones - n);
  }
  constexpr std::size_t kChunk = 4096;
  std::vector<double> buf;
  double sum = 0.0;
  for (std::uint64_t done = 0; done < count;) {
    const std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, count - done));
    buf.resize(take);
    sample_xi_block(law, stream, offset + done, buf);
    for (double v : buf) sum += v;
    done += take;
  }
  return sum;
}

}  // namespace lpwalk
