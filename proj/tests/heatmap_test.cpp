// Copyright 2026 The evplace Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "evplace/heatmap.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "evplace/synth.hpp"

namespace evplace {
namespace {

TEST(HeatmapTest, UniformFieldIsMidGray) {
  const GridSpec g(5, 4);
  const std::vector<double> v(20, 3.5);
  const auto px = heatmap_pixels(v, g);
  for (auto p : px) EXPECT_EQ(p, 128);
}

TEST(HeatmapTest, SingleHotCell) {
  const GridSpec g(6, 6);
  std::vector<double> v(36, 0.0);
  v[g.index(2, 4)] = 9.0;
  const auto px = heatmap_pixels(v, g);
  EXPECT_EQ(std::count(px.begin(), px.end(), 255), 1);
  EXPECT_EQ(px[g.index(2, 4)], 255);
  EXPECT_EQ(std::count(px.begin(), px.end(), 0), 35);
}

TEST(HeatmapTest, LinearRamp) {
  const GridSpec g(3, 1);
  const std::vector<double> v = {10.0, 15.0, 20.0};
  const auto px = heatmap_pixels(v, g);
  EXPECT_EQ(px[0], 0);
  EXPECT_EQ(px[1], 128);  // 127.5 rounds away from zero
  EXPECT_EQ(px[2], 255);
}

TEST(HeatmapTest, SupplyCrossesAreClipped) {
  const GridSpec g(4, 4);
  const std::vector<double> v(16, 1.0);
  const std::vector<SupplyPoint> sp = {{0, 0.2, 0.4, 1, 0, 0},
                                       {1, 2.0, 2.0, 1, 0, 0}};
  const auto px = heatmap_pixels(v, g, sp);
  // Corner cross keeps 3 pixels, interior cross 5.
  EXPECT_EQ(std::count(px.begin(), px.end(), 255), 8);
  EXPECT_EQ(px[g.index(0, 0)], 255);
  EXPECT_EQ(px[g.index(1, 0)], 255);
  EXPECT_EQ(px[g.index(0, 1)], 255);
  EXPECT_EQ(px[g.index(1, 1)], 128);
  EXPECT_EQ(px[g.index(2, 3)], 255);
}

TEST(HeatmapTest, PgmByteLayout) {
  SynthConfig c;
  c.n_supply = 10;
  const auto inst = generate_instance(c);
  std::ostringstream out;
  write_pgm(out, inst.history.year_slice(0), c.grid);
  const std::string bytes = out.str();
  const std::string header = "P5\n64 64\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 4096);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
}

TEST(HeatmapTest, ShapeErrors) {
  const GridSpec g(2, 2);
  const std::vector<double> v(3, 1.0);
  EXPECT_THROW(heatmap_pixels(v, g), InvalidArgument);
  EXPECT_THROW(heatmap_pixels({}, g), InvalidArgument);
}

}  // namespace
}  // namespace evplace
