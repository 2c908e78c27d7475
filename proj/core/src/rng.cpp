#include "g2sim/rng.hpp"

#include <cmath>

namespace g2sim {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53U;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57U;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9U;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85U;

inline void philox_round(std::uint32_t& c0, std::uint32_t& c1, std::uint32_t& c2,
                         std::uint32_t& c3, std::uint32_t k0, std::uint32_t k1) noexcept {
  const std::uint64_t p0 = std::uint64_t{kPhiloxM0} * c0;
  const std::uint64_t p1 = std::uint64_t{kPhiloxM1} * c2;
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  c0 = hi1 ^ c1 ^ k0;
  c1 = lo1;
  c2 = hi0 ^ c3 ^ k1;
  c3 = lo0;
}

detail::ZigguratTables build_ziggurat() noexcept {
  detail::ZigguratTables t{};
  constexpr double m1 = 16777216.0;  // 2^24, magnitude range of the 25-bit signed value
  constexpr double vn = 9.91256303526217e-3;
  double dn = 3.442619855899;
  double tn = dn;
  const double q = vn / std::exp(-0.5 * dn * dn);

  t.k[0] = static_cast<std::uint32_t>((dn / q) * m1);
  t.k[1] = 0;
  t.w[0] = q / m1;
  t.w[127] = dn / m1;
  t.f[0] = 1.0;
  t.f[127] = std::exp(-0.5 * dn * dn);
  for (int i = 126; i >= 1; --i) {
    dn = std::sqrt(-2.0 * std::log(vn / dn + std::exp(-0.5 * dn * dn)));
    t.k[i + 1] = static_cast<std::uint32_t>((dn / tn) * m1);
    tn = dn;
    t.f[i] = std::exp(-0.5 * dn * dn);
    t.w[i] = dn / m1;
  }
  return t;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept {
  auto [c0, c1, c2, c3] = counter;
  auto [k0, k1] = key;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    philox_round(c0, c1, c2, c3, k0, k1);
  }
  return {c0, c1, c2, c3};
}

namespace detail {
const ZigguratTables& ziggurat_tables() noexcept {
  static const ZigguratTables tables = build_ziggurat();
  return tables;
}
}  // namespace detail

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_id_(stream_id) {}

void RandomStream::refill() noexcept {
  const auto k0 = static_cast<std::uint32_t>(seed_);
  const auto k1 = static_cast<std::uint32_t>(seed_ >> 32);
  const auto s0 = static_cast<std::uint32_t>(stream_id_);
  const auto s1 = static_cast<std::uint32_t>(stream_id_ >> 32);

  // Lane-wise loop so the compiler can vectorize the ten rounds.
  std::array<std::uint32_t, kBlocksPerRefill> c0{}, c1{}, c2{}, c3{};
  for (std::size_t b = 0; b < kBlocksPerRefill; ++b) {
    const std::uint64_t blk = block_ + b;
    c0[b] = static_cast<std::uint32_t>(blk);
    c1[b] = static_cast<std::uint32_t>(blk >> 32);
    c2[b] = s0;
    c3[b] = s1;
  }
  std::uint32_t rk0 = k0;
  std::uint32_t rk1 = k1;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      rk0 += kPhiloxW0;
      rk1 += kPhiloxW1;
    }
    for (std::size_t b = 0; b < kBlocksPerRefill; ++b) {
      philox_round(c0[b], c1[b], c2[b], c3[b], rk0, rk1);
    }
  }
  for (std::size_t b = 0; b < kBlocksPerRefill; ++b) {
    buffer_[4 * b + 0] = c0[b];
    buffer_[4 * b + 1] = c1[b];
    buffer_[4 * b + 2] = c2[b];
    buffer_[4 * b + 3] = c3[b];
  }
  block_ += kBlocksPerRefill;
  pos_ = 0;
}

double RandomStream::normal_slow(std::int32_t j, std::uint32_t i) noexcept {
  constexpr double r = 3.442619855899;
  const auto& t = detail::ziggurat_tables();
  for (;;) {
    const double x = static_cast<double>(j) * t.w[i];
    if (i == 0) {
      double tail = 0.0;
      double y = 0.0;
      do {
        tail = -std::log(uniform_pos()) / r;
        y = -std::log(uniform_pos());
      } while (y + y < tail * tail);
      return j > 0 ? r + tail : -r - tail;
    }
    if (t.f[i] + uniform() * (t.f[i - 1] - t.f[i]) < std::exp(-0.5 * x * x)) return x;

    const std::uint32_t u = next_u32();
    j = static_cast<std::int32_t>(u) >> 7;
    i = u & 127U;
    const std::uint32_t mag = static_cast<std::uint32_t>(j < 0 ? -static_cast<std::int64_t>(j) : j);
    if (mag < t.k[i]) return static_cast<double>(j) * t.w[i];
  }
}

std::uint64_t RandomStream::geometric_failures(double p) noexcept {
  if (p >= 1.0) return 0;
  if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  const double k = std::floor(std::log(uniform_pos()) / std::log1p(-p));
  if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(k);
}

double RandomStream::gamma(double shape) noexcept {
  if (shape < 1.0) {
    const double u = uniform_pos();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

}  // namespace g2sim
