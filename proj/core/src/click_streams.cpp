#include "g2sim/click_streams.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "g2sim/errors.hpp"

namespace g2sim {

namespace {

static_assert(std::endian::native == std::endian::little,
              "PSTM I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const char* what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw FormatError(std::string("PSTM: truncated while reading ") + what);
  }
  return value;
}

std::size_t words_for(std::uint64_t n_bins) { return static_cast<std::size_t>((n_bins + 63) / 64); }

}  // namespace

ClickStreams::ClickStreams(std::uint64_t n_bins, double bin_width)
    : n_bins_(n_bins), bin_width_(bin_width) {
  for (auto& w : words_) w.assign(words_for(n_bins), 0);
}

std::uint64_t ClickStreams::count(Channel c) const noexcept {
  std::uint64_t n = 0;
  for (std::uint64_t w : words_[index(c)]) n += static_cast<std::uint64_t>(std::popcount(w));
  return n;
}

void ClickStreams::clear() noexcept {
  for (auto& w : words_) std::fill(w.begin(), w.end(), 0);
}

void write_segment(ClickStreams& streams, const SegmentClicks& segment) {
  for (Channel c : kChannels) {
    for (std::uint32_t local : segment.bins_clicked[index(c)]) {
      streams.set(c, segment.first_bin + local);
    }
  }
}

void write_pstm(std::ostream& out, const ClickStreams& streams) {
  out.write("PSTM", 4);
  put<std::uint32_t>(out, kPstmVersion);
  put<std::uint64_t>(out, streams.n_bins());
  put<double>(out, streams.bin_width());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(kChannelCount));
  for (Channel c : kChannels) {
    const auto words = streams.words(c);
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size_bytes()));
  }
  if (!out) throw FormatError("PSTM: write failed");
}

ClickStreams read_pstm(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "PSTM", 4) != 0) {
    throw FormatError("PSTM: bad magic bytes");
  }
  const auto version = get<std::uint32_t>(in, "version");
  if (version != kPstmVersion) {
    throw FormatError("PSTM: unsupported version " + std::to_string(version));
  }
  const auto n_bins = get<std::uint64_t>(in, "n_bins");
  const auto bin_width = get<double>(in, "bin_width");
  const auto channels = get<std::uint32_t>(in, "channel count");
  if (channels != kChannelCount) {
    throw FormatError("PSTM: expected 3 channels, found " + std::to_string(channels));
  }
  if (!(bin_width > 0.0)) throw FormatError("PSTM: bin_width must be positive");

  ClickStreams streams(n_bins, bin_width);
  const std::uint64_t tail_bits = n_bins & 63;
  for (Channel c : kChannels) {
    auto words = streams.words(c);
    if (!in.read(reinterpret_cast<char*>(words.data()),
                 static_cast<std::streamsize>(words.size_bytes()))) {
      throw FormatError("PSTM: truncated bitmap");
    }
    if (tail_bits != 0 && (words.back() >> tail_bits) != 0) {
      throw FormatError("PSTM: bits set beyond n_bins");
    }
  }
  return streams;
}

void save_pstm(const std::filesystem::path& path, const ClickStreams& streams) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path.string() + ": cannot open for writing");
  write_pstm(out, streams);
}

ClickStreams load_pstm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open");
  return read_pstm(in);
}

void write_click_csv(std::ostream& out, const ClickStreams& streams) {
  out << "channel,bin_index\n";
  for (Channel c : kChannels) {
    const auto words = streams.words(c);
    for (std::size_t w = 0; w < words.size(); ++w) {
      std::uint64_t bits = words[w];
      while (bits != 0) {
        const int b = std::countr_zero(bits);
        out << channel_name(c) << ',' << (static_cast<std::uint64_t>(w) * 64 + b) << '\n';
        bits &= bits - 1;
      }
    }
  }
}

}  // namespace g2sim
