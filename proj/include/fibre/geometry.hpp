#pragma once

// Catalog atlases (circle3, sphere2, torus4), partitions of unity and
// quadrature of top-degree forms.
//
// A point of chart c is classified by its Region: for every ordered chart
// pair (a, b), the index of the connected component of U_a n U_b containing
// the point (as seen from chart a), or -1. Inside one region every pulled
// back quantity is a single expression, so chart-local fields are stored
// piecewise by region and differentiate exactly.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "fibre/expr.hpp"
#include "fibre/forms.hpp"

namespace fibre {

class UnknownManifold : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegreeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Domain {
  enum class Shape { Interval, Box, Disk };
  Shape shape = Shape::Box;
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // Interval / Box
  double radius = 0;                      // Disk, centred at the origin

  static Domain interval(double a, double b);
  static Domain box(double x0, double x1, double y0, double y1);
  static Domain disk(double r);

  bool contains(Point p) const;
  /// Points on the topological boundary, used to probe supports.
  std::vector<Point> boundary_probe(int count) const;
};

struct Sample {
  Point at;
  double weight = 0;  // quadrature weight including the area element
};

struct Chart {
  std::string name;
  Domain domain;
  std::vector<Sample> samples;
};

/// Coordinate change on one connected component of U_from n U_to.
class Transition {
 public:
  Transition(int from, int to, int dim, Expr map_x, Expr map_y);

  int from() const { return from_; }
  int to() const { return to_; }
  const Expr& map_x() const { return map_x_; }
  const Expr& map_y() const { return map_y_; }
  Point apply(Point p) const;
  /// jac[a][b] = d(target_a)/d(source_b), dim x dim.
  std::vector<std::vector<double>> jacobian(Point p) const;

 private:
  int from_, to_, dim_;
  Expr map_x_, map_y_;
  Program map_, jac_;
};

using Region = std::vector<int>;

class Atlas {
 public:
  Atlas(std::string id, int dim, std::vector<Chart> charts, std::vector<Transition> transitions);

  const std::string& id() const { return id_; }
  int dim() const { return dim_; }
  int chart_count() const { return static_cast<int>(charts_.size()); }
  const Chart& chart(int c) const { return charts_[static_cast<std::size_t>(c)]; }

  const std::vector<Transition>& transitions(int from, int to) const;
  /// Component of U_from n U_to containing p (chart `from` coordinates), or -1.
  int locate(int from, int to, Point p) const;
  const Transition* transition_at(int from, int to, Point p) const;

  Region region(int chart, Point p) const;
  int component(const Region& r, int a, int b) const { return r[static_cast<std::size_t>(a * chart_count() + b)]; }

  /// Distinct regions met by the samples of `chart`, and each sample's index into that list.
  const std::vector<Region>& sample_regions(int chart) const { return sample_regions_[static_cast<std::size_t>(chart)]; }
  int sample_region_index(int chart, std::size_t sample) const {
    return sample_region_index_[static_cast<std::size_t>(chart)][sample];
  }

  /// Samples of chart `from` lying in U_from n U_to (indices).
  std::vector<std::size_t> overlap_samples(int from, int to) const;

 private:
  std::string id_;
  int dim_;
  std::vector<Chart> charts_;
  std::vector<std::vector<std::vector<Transition>>> transitions_;
  std::vector<std::vector<Region>> sample_regions_;
  std::vector<std::vector<int>> sample_region_index_;
};

/// Quadrature samples for a domain: midpoint rule in (s, theta) with r = R s^2 for a
/// disk, midpoint tensor grid for boxes and intervals.
std::vector<Sample> sample_domain(const Domain& d, int resolution);

/// Known ids: circle3, sphere2, torus4.
std::shared_ptr<const Atlas> build_atlas(std::string_view manifold_id, int grid_resolution);

class ContainmentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finer cover by patches V_a inside charts U_{parent[a]}; each patch keeps
/// its parent's coordinates and inherits the parent's overlap maps.
std::shared_ptr<const Atlas> refine_atlas(const Atlas& atlas, const std::vector<int>& parent,
                                          const std::vector<Domain>& patches, int resolution);

/// Catalog bump functions (one per chart, in that chart's coordinates)
/// supported strictly inside each chart. `variant` selects between
/// distinct families for connection-independence tests.
std::vector<Expr> catalog_bumps(const Atlas& atlas, int variant = 0);

struct PartitionReport {
  double max_sum_residual = 0;     // |sum alpha - 1|
  double max_square_residual = 0;  // |sum beta^2 - 1|
  double min_alpha = 0;
  double support_residual = 0;     // max |bump| on chart boundaries
};

class PartitionOfUnity {
 public:
  struct Local {
    std::vector<Expr> alpha;
    std::vector<Expr> beta;
  };

  PartitionOfUnity(std::shared_ptr<const Atlas> atlas, std::vector<Expr> bumps);

  const Atlas& atlas() const { return *atlas_; }
  const std::shared_ptr<const Atlas>& atlas_ptr() const { return atlas_; }
  const std::vector<Expr>& bumps() const { return bumps_; }
  /// alpha_k and beta_k for all k, as expressions on `chart` within `region`.
  const Local& local(int chart, const Region& region) const;
  const PartitionReport& report() const { return report_; }

 private:
  friend std::shared_ptr<const PartitionOfUnity> build_partition(std::shared_ptr<const Atlas>, std::vector<Expr>);

  std::shared_ptr<const Atlas> atlas_;
  std::vector<Expr> bumps_;
  PartitionReport report_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<int, Region>, std::unique_ptr<Local>> cache_;
};

/// alpha_k = rho_k / sum rho_j, beta_k = alpha_k / sqrt(sum alpha_j^2).
/// Throws PartitionError on a common zero or a negative bump value.
std::shared_ptr<const PartitionOfUnity> build_partition(std::shared_ptr<const Atlas> atlas, std::vector<Expr> bumps);

/// Chart-local form given piecewise by region.
using FormField = std::function<Form(int chart, const Region& region)>;

/// sum_k integral over U_k of alpha_k * form_k (top degree only).
Complex integrate(const PartitionOfUnity& partition, const FormField& form);

}  // namespace fibre
