#include <doctest.h>

#include <random>
#include <sstream>
#include <string>

#include "g2sim/click_streams.hpp"
#include "g2sim/errors.hpp"
#include "oracles.hpp"

using namespace g2sim;

TEST_CASE("set and count") {
  ClickStreams s(130, 1e-9);
  CHECK(s.word_count() == 3);
  s.set(Channel::herald, 0);
  s.set(Channel::herald, 64);
  s.set(Channel::herald, 129);
  s.set(Channel::two, 5);
  CHECK(s.count(Channel::herald) == 3);
  CHECK(s.count(Channel::one) == 0);
  CHECK(s.click(Channel::herald, 129));
  CHECK_FALSE(s.click(Channel::herald, 128));
  s.clear();
  CHECK(s.count(Channel::herald) == 0);
  CHECK(s.n_bins() == 130);
}

TEST_CASE("segments are written at their absolute position") {
  ClickStreams s(200, 1e-9);
  SegmentClicks seg;
  seg.first_bin = 100;
  seg.bins = 100;
  seg.bins_clicked[1] = {0, 63, 99};
  write_segment(s, seg);
  CHECK(s.click(Channel::one, 100));
  CHECK(s.click(Channel::one, 163));
  CHECK(s.click(Channel::one, 199));
  CHECK(s.count(Channel::one) == 3);
}

TEST_CASE("PSTM round trip is exact") {
  std::mt19937_64 gen(3);
  for (std::uint64_t n : {0ULL, 1ULL, 63ULL, 64ULL, 65ULL, 10007ULL}) {
    const auto s = oracle::random_streams(n, 0.3, gen);
    std::stringstream buf;
    write_pstm(buf, s);
    CHECK(buf.str().size() == 4 + 4 + 8 + 8 + 4 + 3 * 8 * ((n + 63) / 64));
    CHECK(read_pstm(buf) == s);
  }
}

TEST_CASE("PSTM header is little-endian") {
  ClickStreams s(1, 20.83e-9);
  s.set(Channel::two, 0);
  std::stringstream buf;
  write_pstm(buf, s);
  const std::string b = buf.str();
  CHECK(b.substr(0, 4) == "PSTM");
  CHECK(static_cast<unsigned char>(b[4]) == 1);
  CHECK(static_cast<unsigned char>(b[8]) == 1);
  CHECK(static_cast<unsigned char>(b[24]) == 3);
  CHECK(static_cast<unsigned char>(b[28 + 16]) == 1);
}

TEST_CASE("PSTM rejects malformed input") {
  ClickStreams s(100, 1e-9);
  std::stringstream good;
  write_pstm(good, s);
  const std::string bytes = good.str();

  auto read = [](std::string data) {
    std::istringstream in(data);
    return read_pstm(in);
  };
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(read(bad_magic), FormatError);
  std::string bad_version = bytes;
  bad_version[4] = 2;
  CHECK_THROWS_WITH_AS(read(bad_version), doctest::Contains("version 2"), FormatError);
  CHECK_THROWS_AS(read(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(read(bytes.substr(0, 10)), FormatError);
  std::string stray = bytes;
  stray[28 + 8 + 7] = '\x80';  // bit 127 of the herald map, past n_bins
  CHECK_THROWS_AS(read(stray), FormatError);
}

TEST_CASE("click CSV lists clicks by channel then bin") {
  ClickStreams s(10, 1e-9);
  s.set(Channel::two, 1);
  s.set(Channel::herald, 7);
  s.set(Channel::herald, 2);
  std::ostringstream out;
  write_click_csv(out, s);
  CHECK(out.str() == "channel,bin_index\nh,2\nh,7\n2,1\n");
}
