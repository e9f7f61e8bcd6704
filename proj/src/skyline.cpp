#include "tasq/skyline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tasq/error.hpp"

namespace tasq {

Skyline::Skyline(std::vector<Tokens> usage) : usage_(std::move(usage)) {
  if (usage_.empty()) fail(ErrorKind::InvalidSkyline, "skyline must have at least one second");
}

TokenSeconds Skyline::area() const {
  TokenSeconds total = 0;
  for (const Tokens v : usage_) total += v;
  return total;
}

Tokens Skyline::peak() const { return *std::max_element(usage_.begin(), usage_.end()); }

namespace {

int sign_vs_threshold(Tokens value, Tokens threshold) {
  if (value > threshold) return 1;
  if (value < threshold) return -1;
  return 0;
}

}  // namespace

std::vector<Section> split_sections(const Skyline& skyline, Tokens threshold) {
  if (threshold < 1) fail(ErrorKind::InvalidThreshold, "threshold must be >= 1");
  const auto usage = skyline.usage();
  std::vector<Section> sections;
  std::size_t i = 0;
  while (i < usage.size()) {
    const int s = sign_vs_threshold(usage[i], threshold);
    std::size_t j = i + 1;
    while (j < usage.size() && sign_vs_threshold(usage[j], threshold) == s) ++j;
    Section section;
    section.start = i;
    section.values.assign(usage.begin() + i, usage.begin() + j);
    section.over = (s > 0);
    sections.push_back(std::move(section));
    i = j;
  }
  return sections;
}

Skyline simulate(const Skyline& skyline, Tokens new_allocation) {
  if (new_allocation < 1) fail(ErrorKind::InvalidThreshold, "allocation must be >= 1");
  std::vector<Tokens> out;
  out.reserve(skyline.runtime_seconds());
  for (const Section& section : split_sections(skyline, new_allocation)) {
    if (section.over) {
      TokenSeconds section_area = 0;
      for (const Tokens v : section.values) section_area += v;
      const TokenSeconds slots = (section_area + new_allocation - 1) / new_allocation;
      for (TokenSeconds k = 0; k + 1 < slots; ++k) out.push_back(new_allocation);
      out.push_back(static_cast<Tokens>(section_area - (slots - 1) * new_allocation));
    } else {
      out.insert(out.end(), section.values.begin(), section.values.end());
    }
  }
  return Skyline(std::move(out));
}

bool area_match(const Skyline& a, const Skyline& b, double tolerance) {
  if (tolerance < 0.0) fail(ErrorKind::DomainError, "tolerance must be >= 0");
  const TokenSeconds area_a = a.area();
  const TokenSeconds area_b = b.area();
  if (area_a == 0 && area_b == 0) return true;
  const TokenSeconds diff = area_a > area_b ? area_a - area_b : area_b - area_a;
  const TokenSeconds denom = std::max(area_a, area_b);
  return static_cast<double>(diff) <= tolerance * static_cast<double>(denom);
}

Skyline Skyline::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::ParseError, "line 1: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "second,tokens")
    fail(ErrorKind::ParseError, "line 1: expected header 'second,tokens', got '" + line + "'");
  std::vector<Tokens> usage;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected 'second,tokens'");
    std::uint64_t second = 0;
    std::uint64_t tokens = 0;
    try {
      second = std::stoull(line.substr(0, comma));
      tokens = std::stoull(line.substr(comma + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": not a number");
    }
    if (second != usage.size())
      fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": seconds must increase from 0 with no gaps");
    usage.push_back(static_cast<Tokens>(tokens));
  }
  if (usage.empty()) fail(ErrorKind::ParseError, "skyline CSV has no rows");
  return Skyline(std::move(usage));
}

Skyline Skyline::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  return from_csv(in);
}

void Skyline::to_csv(std::ostream& out) const {
  out << "second,tokens\n";
  for (std::size_t i = 0; i < usage_.size(); ++i) out << i << ',' << usage_[i] << '\n';
}

void Skyline::to_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot open " + path + " for writing");
  to_csv(out);
}

}  // namespace tasq
