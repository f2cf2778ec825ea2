// SPDX-FileCopyrightText: Copyright (c) 2026 The deskmip Authors
// SPDX-License-Identifier: Apache-2.0

#include "deskmip/mps.h"

#include <gtest/gtest.h>

#include "deskmip/rng.h"
#include "test_util.h"

namespace deskmip {
namespace {

TEST(ParseMps, SmallestBinaryInstance) {
  const auto inst = parse_mps(
      "NAME tiny\n"
      "ROWS\n"
      " N obj\n"
      "COLUMNS\n"
      "    x obj 1\n"
      "BOUNDS\n"
      " BV BND x\n"
      "ENDATA\n");
  EXPECT_EQ(inst.num_vars(), 1);
  EXPECT_EQ(inst.num_int(), 1);
  EXPECT_EQ(inst.objective, std::vector<double>{1.0});
  EXPECT_EQ(inst.lower[0], 0.0);
  EXPECT_EQ(inst.upper[0], 1.0);
}

TEST(ParseMps, SingleConstraint) {
  const auto inst = parse_mps(
      "NAME t\nROWS\n N obj\n L c1\nCOLUMNS\n    x obj 1.0 c1 2.0\nRHS\n    RHS c1 4.0\n"
      "ENDATA\n");
  ASSERT_EQ(inst.num_rows(), 1);
  const auto& c = inst.constraints[0];
  EXPECT_EQ(c.sense, RowSense::kLe);
  EXPECT_EQ(c.rhs, 4.0);
  EXPECT_EQ(c.row.index, std::vector<int>{0});
  EXPECT_EQ(c.row.value, std::vector<double>{2.0});
  EXPECT_EQ(inst.num_int(), 0);
}

TEST(ParseMps, SensesAndMarkers) {
  const auto inst = parse_mps(
      "NAME t\nROWS\n N obj\n G g\n E e\n L l\nCOLUMNS\n"
      "    M1 'MARKER' 'INTORG'\n"
      "    a obj 1 g 1\n    a e 1\n"
      "    M2 'MARKER' 'INTEND'\n"
      "    b l 1 e -1\n"
      "RHS\n    RHS g 1 e 2\n"
      "BOUNDS\n UP BND a 7\n MI BND b\n UP BND b 3\nENDATA\n");
  EXPECT_EQ(inst.constraints[0].sense, RowSense::kGe);
  EXPECT_EQ(inst.constraints[1].sense, RowSense::kEq);
  EXPECT_EQ(inst.constraints[2].sense, RowSense::kLe);
  EXPECT_TRUE(inst.is_integer[0]);
  EXPECT_FALSE(inst.is_integer[1]);
  EXPECT_EQ(inst.upper[0], 7.0);
  EXPECT_EQ(inst.lower[1], -kInf);
  EXPECT_EQ(inst.constraints[1].rhs, 2.0);
}

void expect_error_at(const std::string& text, int line) {
  try {
    parse_mps(text);
    FAIL() << "expected MpsError";
  } catch (const MpsError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
  }
}

TEST(ParseMps, ErrorsCarryLineNumbers) {
  expect_error_at("NAME t\nCOLUMNS\n x obj 1\nENDATA\n", 2);
  expect_error_at("NAME t\nROWS\n N obj\nCOLUMNS\n x c9 1\nENDATA\n", 5);
  expect_error_at("NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x c 1\n x c 2\nENDATA\n", 7);
  expect_error_at("NAME t\nROWS\n N obj\nCOLUMNS\n x obj abc\nENDATA\n", 5);
  expect_error_at("NAME t\nROWS\n N obj\nCOLUMNS\n x obj 1\nBOUNDS\nRHS\nENDATA\n", 7);
  expect_error_at("NAME t\nROWS\n N obj\nCOLUMNS\n x obj 1\nRANGES\nENDATA\n", 6);
  expect_error_at("NAME t\nROWS\n N obj\n L c\nCOLUMNS\n x c 1\nRHS\n RHS obj 3\nENDATA\n", 8);
}

TEST(WriteMps, SectionSkeleton) {
  MilpInstance inst;
  inst.name = "one";
  inst.add_var(0, 1, 1, true, "x");
  const std::string text = write_mps(inst);
  const auto pos = [&](const char* s) { return text.find(s); };
  ASSERT_NE(pos("NAME"), std::string::npos);
  EXPECT_LT(pos("NAME"), pos("ROWS"));
  EXPECT_LT(pos("ROWS"), pos("COLUMNS"));
  EXPECT_LT(pos("COLUMNS"), pos("BOUNDS"));
  EXPECT_LT(pos("BOUNDS"), pos("ENDATA"));
}

TEST(WriteMps, MarkersWrapIntegerBlock) {
  MilpInstance inst;
  inst.add_var(0, 1, 1, true, "i1");
  inst.add_var(0, 5, 1, true, "i2");
  inst.add_var(0, kInf, 1, false, "c1");
  const std::string text = write_mps(inst);
  const auto org = text.find("'INTORG'");
  const auto end = text.find("'INTEND'");
  EXPECT_LT(org, text.find("i1 obj"));
  EXPECT_GT(end, text.find("i2 obj"));
  EXPECT_LT(end, text.find("c1 obj"));
}

MilpInstance random_mixed(std::uint64_t seed) {
  Rng rng(seed);
  MilpInstance inst;
  inst.name = "r" + std::to_string(seed);
  const int n = 20;
  for (int j = 0; j < n; ++j) {
    const bool integer = j < 8;
    double lo = rng.bernoulli(0.2) ? -kInf : rng.uniform(-5, 5);
    double hi = rng.bernoulli(0.2) ? kInf : (std::isfinite(lo) ? lo : 0) + rng.uniform(0, 9);
    if (integer) {
      lo = std::round(rng.uniform(-3, 2));
      hi = lo + static_cast<double>(rng.uniform_int(0, 4));
    }
    if (rng.bernoulli(0.05)) hi = lo = std::isfinite(lo) ? lo : 1.0 / 3.0;
    inst.add_var(lo, hi, rng.bernoulli(0.2) ? 0.0 : rng.uniform(-10, 10) / 3.0, integer);
  }
  const int m = static_cast<int>(rng.uniform_int(1, 15));
  for (int i = 0; i < m; ++i) {
    SparseRow row;
    for (int j = 0; j < n; ++j)
      if (rng.bernoulli(0.3)) row.add(j, rng.uniform(-1e3, 1e3) / 7.0);
    const auto s = static_cast<RowSense>(rng.uniform_int(0, 2));
    inst.add_row(row, s, rng.bernoulli(0.2) ? 0.0 : rng.uniform(-100, 100) / 3.0);
  }
  return inst;
}

TEST(MpsRoundTrip, RandomInstancesAreFixedPoints) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = random_mixed(seed);
    const auto back = parse_mps(write_mps(inst));
    EXPECT_TRUE(approx_equal(inst, back, 1e-12)) << "seed " << seed;
    EXPECT_EQ(write_mps(back), write_mps(inst));
  }
}

}  // namespace
}  // namespace deskmip
