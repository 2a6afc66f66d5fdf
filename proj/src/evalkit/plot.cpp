// Copyright 2026 The polarcast Authors
//
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

#include "polarcast/evalkit/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <vector>

#include "polarcast/scene/io.hpp"

namespace polarcast::evalkit
{

namespace
{

using geometry::Vec2;

struct Bounds
{
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(Vec2 p)
  {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
};

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

class Canvas
{
public:
  Canvas(const Bounds & b, const PlotOptions & o) : b_(b), o_(o) {}

  double width() const { return (b_.max_x - b_.min_x) * o_.pixels_per_meter + 2.0 * o_.margin; }
  double height() const { return (b_.max_y - b_.min_y) * o_.pixels_per_meter + 2.0 * o_.margin; }

  // The y axis points up in the scene and down in SVG.
  std::string point(Vec2 p) const
  {
    return fmt((p.x - b_.min_x) * o_.pixels_per_meter + o_.margin) + "," +
           fmt((b_.max_y - p.y) * o_.pixels_per_meter + o_.margin);
  }

  std::string polyline(const std::vector<Vec2> & pts, const std::string & style) const
  {
    std::string s = "<polyline fill=\"none\" " + style + " points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      s += (i ? " " : "") + point(pts[i]);
    }
    return s + "\"/>\n";
  }

private:
  Bounds b_;
  PlotOptions o_;
};

}  // namespace

std::string render_svg(const scene::Scene & s, const scene::TrajectoryBundle & b, const PlotOptions & options)
{
  std::vector<std::vector<Vec2>> lanes;
  for (std::size_t i = 0; i < s.num_lanes(); ++i) {
    std::vector<Vec2> pts;
    for (std::size_t j = 0; j < s.lane_len; ++j) {
      if (s.lane_valid(i, j)) {
        pts.push_back(geometry::polar_to_cart(geometry::from_feature(s.lane_point(i, j))));
      }
    }
    lanes.push_back(std::move(pts));
  }
  std::vector<std::vector<Vec2>> history;
  for (std::size_t a = 0; a < s.num_agents(); ++a) {
    std::vector<Vec2> pts;
    for (std::size_t t = 0; t < s.hist_len; ++t) {
      if (s.agent(a, t).valid) {
        pts.push_back(geometry::polar_to_cart(geometry::from_feature(s.agent(a, t).position)));
      }
    }
    history.push_back(std::move(pts));
  }
  std::vector<std::vector<Vec2>> predicted(b.modes * b.agents);
  for (std::size_t m = 0; m < b.modes; ++m) {
    for (std::size_t n = 0; n < b.agents; ++n) {
      for (std::size_t t = 0; t < b.steps; ++t) {
        predicted[m * b.agents + n].push_back(geometry::polar_to_cart(b.at(m, n, t)));
      }
    }
  }
  std::vector<std::vector<Vec2>> truth;
  if (options.ground_truth) {
    for (std::size_t n = 0; n < s.num_aoi() && !s.ground_truth.empty(); ++n) {
      std::vector<Vec2> pts;
      for (std::size_t t = 0; t < s.fut_len; ++t) {
        pts.push_back(geometry::polar_to_cart(s.future(n, t)));
      }
      truth.push_back(std::move(pts));
    }
  }

  Bounds bounds;
  bounds.add({0.0, 0.0});
  for (const auto * group : {&lanes, &history, &predicted, &truth}) {
    for (const auto & line : *group) {
      for (auto p : line) {
        bounds.add(p);
      }
    }
  }
  const Canvas canvas(bounds, options);
  std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(canvas.width()) + "\" height=\"" +
         fmt(canvas.height()) + "\" viewBox=\"0 0 " + fmt(canvas.width()) + " " + fmt(canvas.height()) + "\">\n";
  svg += "<title>" + s.id + "</title>\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto & line : lanes) {
    svg += canvas.polyline(line, "stroke=\"#b0b0b0\" stroke-width=\"2\"");
  }
  for (const auto & line : history) {
    svg += canvas.polyline(line, "stroke=\"#1f5fbf\" stroke-width=\"2\"");
  }
  for (std::size_t m = 0; m < b.modes; ++m) {
    for (std::size_t n = 0; n < b.agents; ++n) {
      const double p = b.prob(m, n);
      const auto & line = predicted[m * b.agents + n];
      svg += canvas.polyline(
        line, "stroke=\"#e8751a\" stroke-width=\"2\" stroke-opacity=\"" + fmt(0.25 + 0.75 * p) + "\"");
      if (!line.empty()) {
        const auto xy = canvas.point(line.back());
        const auto comma = xy.find(',');
        svg += "<text x=\"" + xy.substr(0, comma) + "\" y=\"" + xy.substr(comma + 1) +
               "\" font-size=\"9\" fill=\"#e8751a\">" + fmt(p) + "</text>\n";
      }
    }
  }
  for (const auto & line : truth) {
    svg += canvas.polyline(line, "stroke=\"#2a9d3a\" stroke-width=\"2\" stroke-dasharray=\"4,2\"");
  }
  return svg + "</svg>\n";
}

void write_svg(
  const std::filesystem::path & path, const scene::Scene & s, const scene::TrajectoryBundle & b,
  const PlotOptions & options)
{
  scene::write_text(path, render_svg(s, b, options));
}

}  // namespace polarcast::evalkit
