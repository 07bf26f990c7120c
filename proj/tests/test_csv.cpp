#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spinelaw/csv.hpp"

using namespace spinelaw;

TEST(Csv, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(std::optional<double>{}), "");
  EXPECT_EQ(std::stod(format_double(M_PI)), M_PI);
}

TEST(Csv, SeriesRows) {
  auto rows = std::vector<Series_row>(3);
  rows[0] = {0, 2.0, 3, 0.5, 1.0, false, false, 0.25};
  rows[1] = {1, 2.0, 0, 0.0, std::nullopt, true, false, 0.0};
  rows[2] = {2, 2.0, std::nullopt, std::nullopt, std::nullopt, false, true, std::nullopt};
  auto out = std::ostringstream{};
  write_series(out, rows);
  EXPECT_EQ(out.str(),
            "rep,t,pop,Z,star,extinct,truncated,f_context\n"
            "0,2,3,0.5,1,0,0,0.25\n"
            "1,2,0,0,,1,0,0\n"
            "2,2,,,,0,1,\n");
}

TEST(Csv, SummaryRows) {
  auto row = Summary_row{};
  row.t = 4.0;
  row.estimator = "Z";
  row.mean = 1.0;
  row.se = 0.5;
  row.ci_lo = 0.02;
  row.ci_hi = 1.98;
  row.oracle = 1.0;
  row.z = 0.0;
  row.used_reps = 10;
  row.trunc_rate = 0.0;
  row.ext_rate = 0.25;
  auto empty = Summary_row{};
  empty.t = 4.0;
  empty.estimator = "star";
  empty.used_reps = 1;
  auto out = std::ostringstream{};
  write_summary(out, std::vector<Summary_row>{row, empty});
  EXPECT_EQ(out.str(),
            "t,estimator,mean,se,ci_lo,ci_hi,oracle,z,used_reps,trunc_rate,ext_rate\n"
            "4,Z,1,0.5,0.02,1.98,1,0,10,0,0.25\n"
            "4,star,,,,,,,1,0,0\n");
}

TEST(Csv, Files) {
  const auto dir = std::filesystem::temp_directory_path() / "spinelaw_csv_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "series.csv").string();
  write_series_file(path, std::vector<Series_row>{});
  auto in = std::ifstream{path};
  auto text = std::string{};
  std::getline(in, text);
  EXPECT_EQ(text, k_series_header);
  std::filesystem::remove_all(dir);
  try {
    write_summary_file("/nonexistent/dir/summary.csv", std::vector<Summary_row>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), Error_kind::io);
  }
}
