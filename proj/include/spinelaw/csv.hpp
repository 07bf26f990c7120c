#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "spinelaw/experiments.hpp"

namespace spinelaw {

inline constexpr std::string_view k_series_header = "rep,t,pop,Z,star,extinct,truncated,f_context";
inline constexpr std::string_view k_summary_header = "t,estimator,mean,se,ci_lo,ci_hi,oracle,z,used_reps,trunc_rate,ext_rate";

// 17 significant digits; missing values are empty fields.
auto format_double(double x) -> std::string;
auto format_double(std::optional<double> x) -> std::string;

void write_series(std::ostream& out, std::span<const Series_row> rows);
void write_summary(std::ostream& out, std::span<const Summary_row> rows);

// Writes to a file, throwing Io errors.
void write_series_file(const std::string& path, std::span<const Series_row> rows);
void write_summary_file(const std::string& path, std::span<const Summary_row> rows);

}  // namespace spinelaw
