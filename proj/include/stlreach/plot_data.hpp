#pragma once

#include "stlreach/level_set.hpp"
#include "stlreach/trajectory.hpp"

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace stlreach {

// Zero-contour segments of a 2-D scalar field sampled on nx x ny points
// (marching squares with linear edge interpolation).
std::vector<std::array<Eigen::Vector2d, 2>>
zero_contour(const std::vector<double> &field, int nx, int ny, double x0, double y0,
             double dx, double dy);

// Flattened sample points of a contour (segment endpoints and midpoints).
std::vector<Eigen::Vector2d>
contour_points(const std::vector<std::array<Eigen::Vector2d, 2>> &segments);

// Symmetric Hausdorff distance between two point sets.
double hausdorff_distance(const std::vector<Eigen::Vector2d> &a,
                          const std::vector<Eigen::Vector2d> &b);

struct PlotRegion {
  std::string name;
  double xmin, xmax, ymin, ymax;
  std::string kind; // target | goal | obstacle | corridor | key | door
};

struct PlotSeries {
  std::string name;
  std::vector<Eigen::Vector2d> points;
  std::string color; // css color; empty = default
  bool closed = false;
};

// contour.csv rows: series,segment,x,y ; trajectory.csv rows: t,<state...>
void write_contour_csv(const std::string &path,
                       const std::vector<std::array<Eigen::Vector2d, 2>> &segments,
                       const std::string &series_name);
void write_trajectory_csv(const std::string &path, const Trajectory &traj);

// Static SVG: regions colored by kind (targets blue, goal green, obstacles
// red), contour and trajectory polylines on top.
void write_scene_svg(const std::string &path, double xmin, double xmax, double ymin,
                     double ymax, const std::vector<PlotRegion> &regions,
                     const std::vector<std::array<Eigen::Vector2d, 2>> &contour,
                     const std::vector<PlotSeries> &lines);

} // namespace stlreach
