#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tasq {

using Tokens = std::uint32_t;
using TokenSeconds = std::uint64_t;

// Per-second token-usage trace of one job execution. One entry per second;
// entry value = tokens in use during that second. Never empty: the length is
// the run-time in seconds.
class Skyline {
 public:
  explicit Skyline(std::vector<Tokens> usage);

  std::span<const Tokens> usage() const { return usage_; }
  std::size_t runtime_seconds() const { return usage_.size(); }

  // Total token-seconds under the curve.
  TokenSeconds area() const;
  Tokens peak() const;

  bool operator==(const Skyline& other) const = default;

  // CSV with header `second,tokens`, seconds strictly increasing from 0.
  static Skyline from_csv(std::istream& in);
  static Skyline from_csv_file(const std::string& path);
  void to_csv(std::ostream& out) const;
  void to_csv_file(const std::string& path) const;

 private:
  std::vector<Tokens> usage_;
};

// Maximal run of seconds on one side of the threshold. `over` means every
// value in the run exceeds the threshold; runs at or below it (including
// idle zeros) are "under-or-equal". Runs where the value equals the
// threshold form their own sections.
struct Section {
  std::size_t start = 0;
  std::vector<Tokens> values;
  bool over = false;
};

// Cut the skyline wherever sign(value - threshold) changes. Concatenating
// the sections in order reproduces the skyline.
std::vector<Section> split_sections(const Skyline& skyline, Tokens threshold);

// Area-preserving reshaping of the skyline under a new allocation: sections
// over the allocation are flattened at the allocation (last slot holds the
// remainder so the section area is kept exactly); sections at or below it
// are copied unchanged. An allocation at or above the peak returns the
// input skyline.
Skyline simulate(const Skyline& skyline, Tokens new_allocation);

// True when the two areas differ by at most `tolerance` relative to the
// larger of the two. Two empty areas match by convention.
bool area_match(const Skyline& a, const Skyline& b, double tolerance);

}  // namespace tasq
