#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <stack>

#include "doctest.h"
#include "hexweb/duality.hpp"
#include "hexweb/errors.hpp"
#include "hexweb/io/csv.hpp"
#include "hexweb/io/json_writer.hpp"
#include "hexweb/io/svg.hpp"
#include "hexweb/web3.hpp"

using namespace hexweb;
using namespace hexweb::io;

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hexweb_io_writers";
  fs::create_directories(dir);
  return dir / name;
}

// Minimal well-formedness check: tags nest and close, attributes are quoted.
// Returns the element names in document order.
std::vector<std::string> check_xml(const std::string& s) {
  std::vector<std::string> names;
  std::stack<std::string> open;
  std::size_t i = 0;
  while ((i = s.find('<', i)) != std::string::npos) {
    const std::size_t j = s.find('>', i);
    REQUIRE(j != std::string::npos);
    const std::string tag = s.substr(i + 1, j - i - 1);
    i = j + 1;
    if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
    if (tag[0] == '/') {
      REQUIRE_FALSE(open.empty());
      CHECK(open.top() == tag.substr(1));
      open.pop();
      continue;
    }
    const std::string name = tag.substr(0, tag.find_first_of(" /"));
    names.push_back(name);
    CHECK(std::count(tag.begin(), tag.end(), '"') % 2 == 0);
    if (tag.back() != '/') open.push(name);
  }
  CHECK(open.empty());
  return names;
}

}  // namespace

TEST_CASE("numbers keep full precision") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-2.0) == "-2");
  const Json j = Json::object({{"a", 0.1}, {"b", 3.0}, {"c", 7}, {"d", std::nan("")}, {"e", "x"}});
  const std::string t = to_json_text(j);
  CHECK(t.find("\"a\": 0.10000000000000001") != std::string::npos);
  CHECK(t.find("\"b\": 3.0") != std::string::npos);
  CHECK(t.find("\"c\": 7") != std::string::npos);
  CHECK(t.find("\"d\": null") != std::string::npos);
  CHECK(t.back() == '\n');
  // Round trip through a standard parser preserves every double bit.
  const Json back = Json::parse(t);
  CHECK(back["a"].get<double>() == 0.1);
  CHECK(back["b"].get<double>() == 3.0);
}

TEST_CASE("json keys keep insertion order and nest with two spaces") {
  Json j = Json::object();
  j["z"] = 1;
  j["a"] = Json::array({1.5, 2});
  j["m"] = Json::object({{"k", true}});
  const std::string t = to_json_text(j);
  CHECK(t.find("\"z\"") < t.find("\"a\""));
  CHECK(t.find("\"a\"") < t.find("\"m\""));
  CHECK(t.find("\n  \"z\"") != std::string::npos);
  CHECK(t.find("\n    \"k\": true") != std::string::npos);
  CHECK(to_json_text(j) == t);
}

TEST_CASE("json file and error") {
  const fs::path p = scratch("x.json");
  write_json(p, Json::object({{"v", 1}}));
  CHECK(Json::parse(slurp(p))["v"] == 1);
  try {
    write_json("/nonexistent/dir/x.json", Json::object());
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoError);
  }
}

TEST_CASE("csv") {
  const fs::path p = scratch("t.csv");
  {
    CsvWriter w(p, {"u", "v"});
    w.row({0.1, 2.0});
    w.row({-1.0, 1e-20});
    CHECK(w.rows() == 2);
    CHECK_THROWS_AS(w.row({1.0}), Error);
  }
  CHECK(slurp(p) == "u,v\n0.10000000000000001,2\n-1,9.9999999999999995e-21\n");
  CHECK_THROWS_AS(CsvWriter("/nonexistent/dir/t.csv", {"a"}), Error);
}

TEST_CASE("svg without leaves has only the axes") {
  const std::string s = emit_svg({}, {-1.0, 1.0, -1.0, 1.0});
  const auto names = check_xml(s);
  CHECK(s.find("viewBox=\"-1 -1 2 2\"") != std::string::npos);
  CHECK(std::count(names.begin(), names.end(), "polyline") == 0);
  CHECK(std::count(names.begin(), names.end(), "rect") == 1);
  CHECK(std::count(names.begin(), names.end(), "line") == 2);
  for (const char* id : {"axes", "foliation-1", "foliation-2", "foliation-3"}) {
    CHECK(s.find(std::string("id=\"") + id + "\"") != std::string::npos);
  }
}

TEST_CASE("svg of the flat coordinate web") {
  const Domain d{-1.0, 1.0, -1.0, 1.0};
  const auto leaves = sample_leaves(coordinate_web(d), 3, {});
  const std::string s = emit_svg(leaves, d);
  const auto names = check_xml(s);
  CHECK(std::count(names.begin(), names.end(), "polyline") == 9);
  // Every point of the diagonal foliation satisfies u + v = const.
  const std::size_t g3 = s.find("id=\"foliation-3\"");
  const std::size_t end = s.find("</g>", g3);
  const std::regex pts("points=\"([^\"]*)\"");
  const std::string block = s.substr(g3, end - g3);
  int lines = 0;
  for (std::sregex_iterator it(block.begin(), block.end(), pts), e; it != e; ++it, ++lines) {
    std::istringstream in((*it)[1].str());
    std::string pair;
    double c = NAN;
    while (in >> pair) {
      const double u = std::stod(pair.substr(0, pair.find(','))), v = std::stod(pair.substr(pair.find(',') + 1));
      if (std::isnan(c)) c = u + v;
      CHECK(std::abs(u + v - c) < 1e-5);
    }
  }
  CHECK(lines == 3);
}

TEST_CASE("dual scene matches the golden picture") {
  const SlopeTriple t = web_from_planes(1, {0.0, 0.0, 1.0, 1.0});
  const DualScene scene = build_dual_scene(t, {0.0, 0.0, 1.0, 1.0});
  CHECK_FALSE(scene.section.empty());
  CHECK_FALSE(scene.focal[0].empty());
  const std::string s = emit_dual_svg(scene);
  check_xml(s);
  const fs::path golden = fs::path(HEXWEB_GOLDEN_DIR) / "dual_dim3.svg";
  REQUIRE(fs::exists(golden));
  CHECK(s == slurp(golden));
}

TEST_CASE("dual scene section points lie on the plane") {
  // Plane C + D = 0 in the chart D = 1 reads C = -1; with x = (A + C)/2 and
  // y = (A - C)/2 that is x - y = -1.  Undo the projection X = y + 0.4 x,
  // Y = -(w + 0.3 x) using the quadric to recover the point.
  const SlopeTriple t = web_from_planes(1, {0.0, 0.0, 1.0, 1.0});
  const DualScene scene = build_dual_scene(t, {0.0, 0.0, 1.0, 1.0});
  for (const Point2& p : scene.section) {
    // On the plane, y = x + 1, so X = 1.4 x + 1.
    const double x = (p[0] - 1.0) / 1.4, y = x + 1.0;
    const double w = -p[1] - 0.3 * x;
    CHECK(std::abs(y * y + w * w - x * x - 1.0) < 1e-6);
  }
}
