#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "membrane/exponent.hpp"

namespace membrane {

using DomainId = std::string;
using Vec = std::array<double, 2>;

// Id of the virtual node standing for the whole torus.
inline const DomainId kRootId = "root";

struct Point {
  Vec c{0.0, 0.0};
  int dim = 1;

  static Point line(double x) { return Point{{x, 0.0}, 1}; }
  static Point plane(double x, double y) { return Point{{x, y}, 2}; }

  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  bool operator==(const Point&) const = default;
};

// Arc (lo, hi) of the circle, traversed in increasing direction; may wrap past the period.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct Ball {
  Point center = Point::plane(0.0, 0.0);
  double radius = 0.0;
};

using Shape = std::variant<Interval, Ball>;

struct Domain {
  DomainId id;
  Shape shape;
  ExponentQ permeability_exponent{1};
};

struct Scene {
  int dimension = 1;
  double period = 1.0;
  std::vector<Domain> domains;
  // Minimum boundary separation, as a fraction of the period.
  double min_separation = 1e-6;

  const Domain* find(const DomainId& id) const;
  const Domain& domain(const DomainId& id) const;
};

double wrap_coord(double x, double period);
double wrap_delta(double d, double period);
Point wrap(const Scene& scene, Point p);
Vec torus_delta(const Point& from, const Point& to, double period);
double torus_distance(const Point& a, const Point& b, double period);

// Tolerance used for on-boundary tests.
double boundary_tolerance(const Scene& scene);

void validate_shapes(const Scene& scene);

double measure(const Scene& scene, const Domain& d);
bool inside(const Scene& scene, const Domain& d, const Point& x);
double signed_distance(const Scene& scene, const Domain& d, const Point& x);
double signed_distance(const Scene& scene, const DomainId& k, const Point& x);

// Smallest distance between two distinct boundary points/curves in the scene (period if none).
double min_membrane_gap(const Scene& scene);

class ContainmentTree {
 public:
  const DomainId& root() const { return kRootId; }
  bool contains(const DomainId& id) const { return nodes_.count(id) != 0; }
  bool is_root(const DomainId& id) const { return id == kRootId; }

  const DomainId& parent(const DomainId& id) const;
  const std::vector<DomainId>& children(const DomainId& id) const;
  int rank(const DomainId& id) const;
  const ExponentQ& exponent(const DomainId& id) const;
  int depth(const DomainId& id) const;

  // Root first, then domain ids in lexicographic order.
  const std::vector<DomainId>& ids() const { return order_; }
  // The root is a leaf only in an empty scene.
  std::vector<DomainId> leaves() const;
  // Strict ancestors from the parent up to the root.
  std::vector<DomainId> ancestors(const DomainId& id) const;
  bool is_ancestor(const DomainId& anc, const DomainId& id) const;
  int height() const { return rank(kRootId); }

 private:
  struct Node {
    DomainId parent;
    std::vector<DomainId> children;
    int rank = 1;
    int depth = 0;
    ExponentQ exponent{0};
  };
  const Node& node(const DomainId& id) const;

  std::map<DomainId, Node> nodes_;
  std::vector<DomainId> order_;

  friend ContainmentTree build_tree(const Scene& scene);
};

ContainmentTree build_tree(const Scene& scene);
bool precedes(const ContainmentTree& tree, const DomainId& l, const DomainId& k);

// Smallest domain containing x; throws OnBoundary if x lies on a membrane within tol.
DomainId locate_cell(const Scene& scene, const ContainmentTree& tree, const Point& x,
                     double tol = -1.0);

// Exterior unit normal of D_k at y. In 1D only component 0 is used.
Vec unit_normal(const Scene& scene, const DomainId& k, const Point& y, double tol = -1.0);

}  // namespace membrane
