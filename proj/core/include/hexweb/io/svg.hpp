#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "hexweb/duality.hpp"
#include "hexweb/web3.hpp"

namespace hexweb::io {

using Point2 = std::array<double, 2>;
using Curve2 = std::vector<Point2>;

// A dual-space picture already projected to the page plane.
struct DualScene {
  std::vector<Curve2> wireframe;   // quadric rulings and parallels
  std::vector<Point2> section;     // samples of the plane section
  std::vector<Curve2> focal[2];    // dual curves of the P and Q foliations
};

// Quadric AC - B^2 + eps = 0 in the chart D = 1, seen through a fixed oblique
// projection, with the section of `plane` and the focal curves of the web.
DualScene build_dual_scene(const SlopeTriple& web, const PlaneSection& plane, int n = 12);

// Standalone SVG 1.1 whose viewBox is the chart rectangle; one group per
// foliation, in foliation order.
std::string emit_svg(const std::vector<Polyline>& leaves, const Domain& domain);
std::string emit_dual_svg(const DualScene& scene);

// Throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace hexweb::io
