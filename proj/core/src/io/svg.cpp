#include "hexweb/io/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hexweb/errors.hpp"

namespace hexweb::io {

namespace {

constexpr const char* kColors[3] = {"#1f77b4", "#d62728", "#2ca02c"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void polyline(std::ostringstream& os, const std::vector<Point2>& pts) {
  if (pts.size() < 2) return;
  os << "    <polyline points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) os << (i ? " " : "") << num(pts[i][0]) << "," << num(pts[i][1]);
  os << "\"/>\n";
}

const char* header() {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
         "<!DOCTYPE svg PUBLIC \"-//W3C//DTD SVG 1.1//EN\" \"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd\">\n";
}

// Page coordinates of an affine dual point (A, B, C).
Point2 project(double A, double B, double C) {
  const double x = 0.5 * (A + C), y = 0.5 * (A - C), w = B;
  return {y + 0.4 * x, -(w + 0.3 * x)};
}

Point2 project_xyw(double x, double y, double w) { return {y + 0.4 * x, -(w + 0.3 * x)}; }

}  // namespace

std::string emit_svg(const std::vector<Polyline>& leaves, const Domain& d) {
  const double w = d.u1 - d.u0, h = d.v1 - d.v0;
  const double stroke = 0.004 * std::max(w, h);
  std::ostringstream os;
  os << header();
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << num(d.u0) << " " << num(d.v0) << " "
     << num(w) << " " << num(h) << "\" width=\"600\" height=\"" << num(600.0 * h / w) << "\">\n";
  // Chart v grows upwards: reflect about the middle of the rectangle.
  os << "  <g transform=\"matrix(1 0 0 -1 0 " << num(d.v0 + d.v1) << ")\" fill=\"none\" stroke-width=\"" << num(stroke)
     << "\">\n";
  os << "   <g id=\"axes\" stroke=\"#000000\">\n";
  os << "    <rect x=\"" << num(d.u0) << "\" y=\"" << num(d.v0) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\"/>\n";
  if (d.u0 < 0.0 && d.u1 > 0.0) {
    os << "    <line x1=\"0\" y1=\"" << num(d.v0) << "\" x2=\"0\" y2=\"" << num(d.v1) << "\" stroke-dasharray=\""
       << num(4 * stroke) << "\"/>\n";
  }
  if (d.v0 < 0.0 && d.v1 > 0.0) {
    os << "    <line x1=\"" << num(d.u0) << "\" y1=\"0\" x2=\"" << num(d.u1) << "\" y2=\"0\" stroke-dasharray=\""
       << num(4 * stroke) << "\"/>\n";
  }
  os << "   </g>\n";
  for (int f = 0; f < 3; ++f) {
    os << "   <g id=\"foliation-" << (f + 1) << "\" stroke=\"" << kColors[f] << "\">\n";
    for (const Polyline& pl : leaves) {
      if (pl.foliation != f) continue;
      std::vector<Point2> pts;
      pts.reserve(pl.points.size());
      for (const ChartPoint& p : pl.points) pts.push_back({p.u, p.v});
      polyline(os, pts);
    }
    os << "   </g>\n";
  }
  os << "  </g>\n";
  const double fs = 0.04 * std::max(w, h);
  os << "  <g font-family=\"sans-serif\" font-size=\"" << num(fs) << "\" fill=\"#000000\">\n";
  os << "   <text x=\"" << num(d.u1 - 1.5 * fs) << "\" y=\"" << num(d.v1 - 0.3 * fs) << "\">u</text>\n";
  os << "   <text x=\"" << num(d.u0 + 0.3 * fs) << "\" y=\"" << num(d.v0 + 1.1 * fs) << "\">v</text>\n";
  os << "  </g>\n";
  os << "</svg>\n";
  return os.str();
}

DualScene build_dual_scene(const SlopeTriple& web, const PlaneSection& plane, int n) {
  DualScene scene;
  const Domain& d = web.domain;
  const int eps = web.eps;
  constexpr int kSamples = 64;

  double xlo = 1e300, xhi = -1e300, rmax = 0.0;
  for (int f = 0; f < 2; ++f) {
    Curve2 c;
    for (int k = 0; k <= kSamples; ++k) {
      const double t = static_cast<double>(k) / kSamples;
      const double z = d.u0 + t * (d.u1 - d.u0), y = d.v0 + t * (d.v1 - d.v0);
      const double P = web.at(z, y)[f].value();
      const DualPoint q = slope_to_dual(z, y, P, eps);
      if (!(std::abs(q.D) > 0.0)) continue;
      const double A = q.A / q.D, B = q.B / q.D, C = q.C / q.D;
      const double x = 0.5 * (A + C);
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      rmax = std::max(rmax, std::hypot(0.5 * (A - C), B));
      c.push_back(project(A, B, C));
    }
    scene.focal[f].push_back(std::move(c));
  }
  if (!(xlo <= xhi)) {
    xlo = -1.0;
    xhi = 1.0;
  }
  xlo -= 1.0;
  xhi += 1.0;
  rmax += 1.0;

  // In x = (A + C)/2, y = (A - C)/2, w = B the quadric is y^2 + w^2 = x^2 + eps.
  const double two_pi = 2.0 * std::numbers::pi;
  auto radius = [eps](double x) { return std::sqrt(std::max(0.0, x * x + eps)); };
  if (eps == 1) {
    for (int i = 0; i <= n; ++i) {
      const double x = xlo + (xhi - xlo) * i / n;
      Curve2 c;
      for (int k = 0; k <= 72; ++k) {
        const double th = two_pi * k / 72;
        c.push_back(project_xyw(x, radius(x) * std::cos(th), radius(x) * std::sin(th)));
      }
      scene.wireframe.push_back(std::move(c));
    }
    for (int k = 0; k < 2 * n; ++k) {
      const double th = two_pi * k / (2 * n);
      Curve2 c;
      for (int i = 0; i <= 48; ++i) {
        const double x = xlo + (xhi - xlo) * i / 48;
        c.push_back(project_xyw(x, radius(x) * std::cos(th), radius(x) * std::sin(th)));
      }
      scene.wireframe.push_back(std::move(c));
    }
  } else {
    for (int sheet = -1; sheet <= 1; sheet += 2) {
      for (int i = 1; i <= n; ++i) {
        const double r = rmax * i / n;
        Curve2 c;
        for (int k = 0; k <= 72; ++k) {
          const double th = two_pi * k / 72;
          c.push_back(project_xyw(sheet * std::sqrt(1.0 + r * r), r * std::cos(th), r * std::sin(th)));
        }
        scene.wireframe.push_back(std::move(c));
      }
      for (int k = 0; k < 2 * n; ++k) {
        const double th = two_pi * k / (2 * n);
        Curve2 c;
        for (int i = 0; i <= 48; ++i) {
          const double r = rmax * i / 48;
          c.push_back(project_xyw(sheet * std::sqrt(1.0 + r * r), r * std::cos(th), r * std::sin(th)));
        }
        scene.wireframe.push_back(std::move(c));
      }
    }
  }

  // Section: along each meridian solve the plane equation
  // (a + c) x + (a - c) y + b w + delta = 0 by a sign scan and bisection.
  const double ac = plane.a + plane.c, am = plane.a - plane.c;
  for (int k = 0; k < 360; ++k) {
    const double th = two_pi * k / 360;
    const double ct = std::cos(th), st = std::sin(th);
    auto point = [&](double s, int sheet) -> std::array<double, 3> {
      if (eps == 1) return {s, radius(s) * ct, radius(s) * st};
      return {sheet * std::sqrt(1.0 + s * s), s * ct, s * st};
    };
    auto g = [&](double s, int sheet) {
      const auto p = point(s, sheet);
      return ac * p[0] + am * p[1] + plane.b * p[2] + plane.delta;
    };
    const int sheets = eps == 1 ? 1 : 2;
    for (int sh = 0; sh < sheets; ++sh) {
      const int sheet = sh == 0 ? 1 : -1;
      const double lo = eps == 1 ? xlo : 0.0, hi = eps == 1 ? xhi : rmax;
      constexpr int kScan = 200;
      double s0 = lo, g0 = g(s0, sheet);
      for (int i = 1; i <= kScan; ++i) {
        const double s1 = lo + (hi - lo) * i / kScan, g1 = g(s1, sheet);
        if ((g0 < 0.0) != (g1 < 0.0)) {
          double a = s0, b = s1, ga = g0;
          for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b), gm = g(m, sheet);
            if ((gm < 0.0) == (ga < 0.0)) {
              a = m;
              ga = gm;
            } else {
              b = m;
            }
          }
          const auto p = point(0.5 * (a + b), sheet);
          scene.section.push_back(project_xyw(p[0], p[1], p[2]));
        }
        s0 = s1;
        g0 = g1;
      }
    }
  }
  return scene;
}

std::string emit_dual_svg(const DualScene& scene) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto grow = [&](const Point2& p) {
    x0 = std::min(x0, p[0]);
    x1 = std::max(x1, p[0]);
    y0 = std::min(y0, p[1]);
    y1 = std::max(y1, p[1]);
  };
  for (const auto& c : scene.wireframe) std::for_each(c.begin(), c.end(), grow);
  for (const auto& p : scene.section) grow(p);
  for (const auto& f : scene.focal) {
    for (const auto& c : f) std::for_each(c.begin(), c.end(), grow);
  }
  if (!(x0 < x1) || !(y0 < y1)) {
    x0 = y0 = -1.0;
    x1 = y1 = 1.0;
  }
  const double w = x1 - x0, h = y1 - y0, pad = 0.03 * std::max(w, h);
  const double stroke = 0.002 * std::max(w, h);
  std::ostringstream os;
  os << header();
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"" << num(x0 - pad) << " " << num(y0 - pad)
     << " " << num(w + 2 * pad) << " " << num(h + 2 * pad) << "\" width=\"600\" height=\""
     << num(600.0 * (h + 2 * pad) / (w + 2 * pad)) << "\">\n";
  os << "  <g id=\"quadric\" fill=\"none\" stroke=\"#999999\" stroke-width=\"" << num(stroke) << "\">\n";
  for (const auto& c : scene.wireframe) polyline(os, c);
  os << "  </g>\n";
  os << "  <g id=\"section\" fill=\"#000000\">\n";
  for (const auto& p : scene.section) {
    os << "    <circle cx=\"" << num(p[0]) << "\" cy=\"" << num(p[1]) << "\" r=\"" << num(1.5 * stroke) << "\"/>\n";
  }
  os << "  </g>\n";
  for (int f = 0; f < 2; ++f) {
    os << "  <g id=\"focal-" << (f + 1) << "\" fill=\"none\" stroke=\"" << kColors[f] << "\" stroke-width=\""
       << num(3 * stroke) << "\">\n";
    for (const auto& c : scene.focal[f]) polyline(os, c);
    os << "  </g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace hexweb::io
