#include "stlreach/plot_data.hpp"

#include "stlreach/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace stlreach {

namespace {

Eigen::Vector2d lerp_zero(double xa, double ya, double va, double xb, double yb,
                          double vb) {
  double t = va / (va - vb);
  t = std::clamp(t, 0.0, 1.0);
  return {xa + t * (xb - xa), ya + t * (yb - ya)};
}

} // namespace

std::vector<std::array<Eigen::Vector2d, 2>>
zero_contour(const std::vector<double> &field, int nx, int ny, double x0, double y0,
             double dx, double dy) {
  if (static_cast<std::size_t>(nx) * ny != field.size())
    throw ConfigError("contour field size mismatch");
  std::vector<std::array<Eigen::Vector2d, 2>> segs;
  auto at = [&](int i, int j) { return field[static_cast<std::size_t>(i) * ny + j]; };
  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      double v00 = at(i, j), v10 = at(i + 1, j), v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
      double xa = x0 + i * dx, xb = xa + dx;
      double ya = y0 + j * dy, yb = ya + dy;
      int cse = (v00 < 0 ? 1 : 0) | (v10 < 0 ? 2 : 0) | (v11 < 0 ? 4 : 0) | (v01 < 0 ? 8 : 0);
      if (cse == 0 || cse == 15) continue;
      // Edge crossings: bottom (00-10), right (10-11), top (01-11), left (00-01).
      Eigen::Vector2d eb = lerp_zero(xa, ya, v00, xb, ya, v10);
      Eigen::Vector2d er = lerp_zero(xb, ya, v10, xb, yb, v11);
      Eigen::Vector2d et = lerp_zero(xa, yb, v01, xb, yb, v11);
      Eigen::Vector2d el = lerp_zero(xa, ya, v00, xa, yb, v01);
      auto add = [&](Eigen::Vector2d a, Eigen::Vector2d b) { segs.push_back({a, b}); };
      switch (cse) {
      case 1: case 14: add(el, eb); break;
      case 2: case 13: add(eb, er); break;
      case 3: case 12: add(el, er); break;
      case 4: case 11: add(er, et); break;
      case 6: case 9: add(eb, et); break;
      case 7: case 8: add(el, et); break;
      case 5: case 10: {
        // Saddle: disambiguate with the cell-center average.
        double c = 0.25 * (v00 + v10 + v01 + v11);
        bool center_neg = c < 0;
        if ((cse == 5) == center_neg) {
          add(el, eb);
          add(er, et);
        } else {
          add(el, et);
          add(eb, er);
        }
        break;
      }
      default: break;
      }
    }
  }
  return segs;
}

std::vector<Eigen::Vector2d>
contour_points(const std::vector<std::array<Eigen::Vector2d, 2>> &segments) {
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(segments.size() * 3);
  for (const auto &s : segments) {
    pts.push_back(s[0]);
    pts.push_back(s[1]);
    pts.push_back(0.5 * (s[0] + s[1]));
  }
  return pts;
}

double hausdorff_distance(const std::vector<Eigen::Vector2d> &a,
                          const std::vector<Eigen::Vector2d> &b) {
  if (a.empty() || b.empty()) throw ConfigError("Hausdorff distance of an empty contour");
  auto directed = [](const std::vector<Eigen::Vector2d> &p,
                     const std::vector<Eigen::Vector2d> &q) {
    double worst = 0.0;
    for (const auto &x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto &y : q) best = std::min(best, (x - y).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

void write_contour_csv(const std::string &path,
                       const std::vector<std::array<Eigen::Vector2d, 2>> &segments,
                       const std::string &series_name) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "series,segment,x,y\n";
  for (std::size_t i = 0; i < segments.size(); ++i)
    for (int e = 0; e < 2; ++e)
      os << series_name << "," << i << "," << segments[i][e][0] << ","
         << segments[i][e][1] << "\n";
}

void write_trajectory_csv(const std::string &path, const Trajectory &traj) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  os << "t";
  for (int d = 0; d < traj.state_dim(); ++d) os << ",x" << d;
  os << "\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << traj.time_at(k);
    for (int d = 0; d < traj.state_dim(); ++d) os << "," << traj.states[k][d];
    os << "\n";
  }
}

namespace {
const char *kind_color(const std::string &kind) {
  if (kind == "target") return "#4a78d0";
  if (kind == "goal") return "#3fae5a";
  if (kind == "obstacle") return "#d65050";
  if (kind == "corridor") return "#e8e4d8";
  if (kind == "key") return "#d8b745";
  if (kind == "door") return "#9a6ecb";
  return "#b0b0b0";
}
} // namespace

void write_scene_svg(const std::string &path, double xmin, double xmax, double ymin,
                     double ymax, const std::vector<PlotRegion> &regions,
                     const std::vector<std::array<Eigen::Vector2d, 2>> &contour,
                     const std::vector<PlotSeries> &lines) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open for writing: " + path);
  const double W = 640.0, H = 640.0, pad = 40.0;
  double sx = (W - 2 * pad) / (xmax - xmin);
  double sy = (H - 2 * pad) / (ymax - ymin);
  auto px = [&](double x) { return pad + (x - xmin) * sx; };
  auto py = [&](double y) { return H - pad - (y - ymin) * sy; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
     << "\" fill=\"#fafafa\"/>\n";
  os << "<rect x=\"" << px(xmin) << "\" y=\"" << py(ymax) << "\" width=\""
     << (xmax - xmin) * sx << "\" height=\"" << (ymax - ymin) * sy
     << "\" fill=\"white\" stroke=\"#444\"/>\n";
  for (const auto &r : regions) {
    os << "<rect x=\"" << px(r.xmin) << "\" y=\"" << py(r.ymax) << "\" width=\""
       << (r.xmax - r.xmin) * sx << "\" height=\"" << (r.ymax - r.ymin) * sy
       << "\" fill=\"" << kind_color(r.kind) << "\" fill-opacity=\"0.55\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << px(0.5 * (r.xmin + r.xmax)) << "\" y=\""
       << py(0.5 * (r.ymin + r.ymax)) << "\" font-size=\"13\" text-anchor=\"middle\">"
       << r.name << "</text>\n";
  }
  for (const auto &s : contour)
    os << "<line x1=\"" << px(s[0][0]) << "\" y1=\"" << py(s[0][1]) << "\" x2=\""
       << px(s[1][0]) << "\" y2=\"" << py(s[1][1])
       << "\" stroke=\"black\" stroke-width=\"1.6\"/>\n";
  for (const auto &line : lines) {
    if (line.points.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\""
       << (line.color.empty() ? "#666" : line.color) << "\" stroke-width=\"2\" points=\"";
    for (const auto &p : line.points) os << px(p[0]) << "," << py(p[1]) << " ";
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

} // namespace stlreach
