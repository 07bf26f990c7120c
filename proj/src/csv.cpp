#include "spinelaw/csv.hpp"

#include <fstream>
#include <ostream>

#include <fmt/format.h>

namespace spinelaw {

auto format_double(double x) -> std::string { return fmt::format("{:.17g}", x); }

auto format_double(std::optional<double> x) -> std::string { return x ? format_double(*x) : std::string{}; }

void write_series(std::ostream& out, std::span<const Series_row> rows) {
  out << k_series_header << '\n';
  for (const auto& r : rows) {
    out << r.rep << ',' << format_double(r.t) << ',';
    if (r.pop) out << *r.pop;
    out << ',' << format_double(r.z) << ',' << format_double(r.star) << ',' << (r.extinct ? 1 : 0) << ','
        << (r.truncated ? 1 : 0) << ',' << format_double(r.f_context) << '\n';
  }
}

void write_summary(std::ostream& out, std::span<const Summary_row> rows) {
  out << k_summary_header << '\n';
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << r.estimator << ',' << format_double(r.mean) << ',' << format_double(r.se)
        << ',' << format_double(r.ci_lo) << ',' << format_double(r.ci_hi) << ',' << format_double(r.oracle) << ','
        << format_double(r.z) << ',' << r.used_reps << ',' << format_double(r.trunc_rate) << ','
        << format_double(r.ext_rate) << '\n';
  }
}

namespace {

template <typename Rows, typename Writer>
void write_file(const std::string& path, Rows rows, Writer writer) {
  auto out = std::ofstream{path, std::ios::binary | std::ios::trunc};
  if (!out) throw Error{Error_kind::io, fmt::format("cannot open {} for writing", path)};
  writer(out, rows);
  out.flush();
  if (!out) throw Error{Error_kind::io, fmt::format("write to {} failed", path)};
}

}  // namespace

void write_series_file(const std::string& path, std::span<const Series_row> rows) {
  write_file(path, rows, [](std::ostream& o, std::span<const Series_row> r) { write_series(o, r); });
}

void write_summary_file(const std::string& path, std::span<const Summary_row> rows) {
  write_file(path, rows, [](std::ostream& o, std::span<const Summary_row> r) { write_summary(o, r); });
}

}  // namespace spinelaw
