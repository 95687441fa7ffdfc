#include <filesystem>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "conflow/error.hpp"
#include "conflow/field_io.hpp"
#include "generators.hpp"

using namespace conflow;

TEST(FieldIo, RoundTripIsBitExact) {
  gen::Source src(21);
  auto g = make_grid({5, {12, 10}, {2.0 * std::numbers::pi, 0.1 + 1.0 / 3.0}});
  const ScalarField u = src.rough(g, -1e3, 1e3);
  std::stringstream ss;
  write_field(ss, u);
  const ScalarField back = read_field(ss);
  EXPECT_EQ(back.grid().spec(), g->spec());
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(back[i], u[i]);
}

TEST(FieldIo, HeaderText) {
  auto g = make_grid_1d(4, 8, 2.0);
  EXPECT_EQ(field_header(*g), "conflow-field v1 n=4 dims=1 shape=8 period=2");
}

TEST(FieldIo, FileRoundTripAndMakeField) {
  auto g = make_grid_1d(3, 16, 2.0 * std::numbers::pi);
  gen::Source src(22);
  const ScalarField u = src.smooth(g, 1.0, 0.2);
  const auto path = std::filesystem::temp_directory_path() / "conflow_field_io_test.field";
  write_field(path.string(), u);
  const ScalarField back = make_field(g, "file:" + path.string());
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_EQ(back[i], u[i]);
  auto other = make_grid_1d(3, 32, 2.0 * std::numbers::pi);
  EXPECT_THROW(make_field(other, "file:" + path.string()), Error);
  std::filesystem::remove(path);
}

TEST(FieldIo, RejectsCorruptInput) {
  std::stringstream bad("not a field\n");
  EXPECT_THROW(read_field(bad), Error);
  auto g = make_grid_1d(4, 8, 1.0);
  std::stringstream ss;
  write_field(ss, ScalarField(g, 1.0));
  std::string text = ss.str();
  text.resize(text.size() - 5);
  std::stringstream truncated(text);
  EXPECT_THROW(read_field(truncated), Error);
  EXPECT_THROW(read_field(std::string("/nonexistent/dir/x.field")), Error);
}
