#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "spinelaw/experiments.hpp"

namespace spinelaw {

struct Verify_options {
  std::string out_dir;  // empty: keep the CSVs in memory only
  unsigned threads = 1;
  unsigned alt_threads = 0;  // thread count of the determinism rerun; 0 means threads + 1
  std::uint64_t seed = 0;
  // Multiplies every statistical tolerance. Values near 0 must make the suite fail.
  double tolerance_scale = 1.0;
  std::vector<int> only;  // criterion ids; empty runs all
};

struct Criterion_result {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Verify_report {
  std::vector<Criterion_result> criteria;
  std::map<std::string, std::string> files;  // relative path -> CSV bytes

  auto passed() const -> bool;
};

// The frozen acceptance configurations, by file stem.
auto acceptance_configs() -> std::map<std::string, std::string>;

// Runs the acceptance criteria, printing one line per criterion to `log` when given.
auto run_verify(const Verify_options& options, std::ostream* log = nullptr) -> Verify_report;

auto format_criterion(const Criterion_result& c) -> std::string;

}  // namespace spinelaw
