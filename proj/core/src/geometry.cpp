#include "membrane/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "membrane/error.hpp"

namespace membrane {

namespace {

double arc_length(const Interval& iv) { return iv.hi - iv.lo; }

double circle_distance(double a, double b, double period) {
  return std::abs(wrap_delta(a - b, period));
}

enum class Relation { Disjoint, FirstInSecond, SecondInFirst, Crossing };

struct PairInfo {
  Relation relation = Relation::Disjoint;
  double separation = 0.0;
};

PairInfo relate(const Scene& s, const Domain& a, const Domain& b) {
  const double P = s.period;
  PairInfo info;
  if (s.dimension == 1) {
    const auto& A = std::get<Interval>(a.shape);
    const auto& B = std::get<Interval>(b.shape);
    const double la = arc_length(A);
    const double lb = arc_length(B);
    const double o = wrap_coord(B.lo - A.lo, P);
    const double o2 = wrap_coord(A.lo - B.lo, P);
    if (o > 0.0 && o + lb < la) {
      info.relation = Relation::SecondInFirst;
    } else if (o2 > 0.0 && o2 + la < lb) {
      info.relation = Relation::FirstInSecond;
    } else if (o >= la && o + lb <= P) {
      info.relation = Relation::Disjoint;
    } else {
      info.relation = Relation::Crossing;
    }
    info.separation = std::min({circle_distance(A.lo, B.lo, P), circle_distance(A.lo, B.hi, P),
                                circle_distance(A.hi, B.lo, P), circle_distance(A.hi, B.hi, P)});
    return info;
  }
  const auto& A = std::get<Ball>(a.shape);
  const auto& B = std::get<Ball>(b.shape);
  const double d = torus_distance(A.center, B.center, P);
  if (d + A.radius < B.radius) {
    info.relation = Relation::FirstInSecond;
    info.separation = B.radius - A.radius - d;
  } else if (d + B.radius < A.radius) {
    info.relation = Relation::SecondInFirst;
    info.separation = A.radius - B.radius - d;
  } else if (d > A.radius + B.radius) {
    info.relation = Relation::Disjoint;
    info.separation = d - A.radius - B.radius;
  } else {
    info.relation = Relation::Crossing;
    info.separation = 0.0;
  }
  return info;
}

}  // namespace

const Domain* Scene::find(const DomainId& id) const {
  for (const auto& d : domains)
    if (d.id == id) return &d;
  return nullptr;
}

const Domain& Scene::domain(const DomainId& id) const {
  const Domain* d = find(id);
  if (!d) fail(ErrorCode::UnknownId, "no domain '" + id + "'");
  return *d;
}

double wrap_coord(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0.0) r += period;
  if (r >= period) r -= period;
  return r;
}

double wrap_delta(double d, double period) {
  double r = wrap_coord(d, period);
  if (r > 0.5 * period) r -= period;
  return r;
}

Point wrap(const Scene& scene, Point p) {
  for (int i = 0; i < p.dim; ++i) p[i] = wrap_coord(p[i], scene.period);
  return p;
}

Vec torus_delta(const Point& from, const Point& to, double period) {
  Vec v{0.0, 0.0};
  for (int i = 0; i < from.dim; ++i) v[i] = wrap_delta(to[i] - from[i], period);
  return v;
}

double torus_distance(const Point& a, const Point& b, double period) {
  Vec v = torus_delta(a, b, period);
  return std::hypot(v[0], v[1]);
}

double boundary_tolerance(const Scene& scene) { return 1e-10 * scene.period; }

void validate_shapes(const Scene& s) {
  if (s.dimension != 1 && s.dimension != 2)
    fail(ErrorCode::InvalidScene, "dimension must be 1 or 2");
  if (!(s.period > 0.0) || !std::isfinite(s.period))
    fail(ErrorCode::InvalidScene, "period must be positive");
  if (!(s.min_separation >= 0.0)) fail(ErrorCode::InvalidScene, "min_separation must be >= 0");
  std::set<DomainId> seen;
  for (const auto& d : s.domains) {
    if (d.id.empty()) fail(ErrorCode::InvalidScene, "empty domain id");
    if (d.id == kRootId) fail(ErrorCode::InvalidScene, "domain id '" + kRootId + "' is reserved");
    if (!seen.insert(d.id).second) fail(ErrorCode::InvalidScene, "duplicate domain id '" + d.id + "'");
    if (!(d.permeability_exponent > ExponentQ(0)))
      fail(ErrorCode::InvalidScene, "permeability_exponent of '" + d.id + "' must be > 0");
    if (s.dimension == 1) {
      const auto* iv = std::get_if<Interval>(&d.shape);
      if (!iv) fail(ErrorCode::InvalidScene, "domain '" + d.id + "' must be an interval in 1D");
      const double len = arc_length(*iv);
      if (!std::isfinite(iv->lo) || !std::isfinite(iv->hi) || !(len > 0.0) || !(len < s.period))
        fail(ErrorCode::InvalidScene, "interval '" + d.id + "' needs 0 < b - a < period");
    } else {
      const auto* b = std::get_if<Ball>(&d.shape);
      if (!b) fail(ErrorCode::InvalidScene, "domain '" + d.id + "' must be a ball in 2D");
      if (b->center.dim != 2 || !std::isfinite(b->center[0]) || !std::isfinite(b->center[1]))
        fail(ErrorCode::InvalidScene, "ball '" + d.id + "' needs a 2D center");
      if (!(b->radius > 0.0) || !(b->radius < 0.5 * s.period))
        fail(ErrorCode::InvalidScene, "ball '" + d.id + "' needs 0 < radius < period/2");
    }
  }
}

double measure(const Scene& scene, const Domain& d) {
  if (scene.dimension == 1) return arc_length(std::get<Interval>(d.shape));
  const double r = std::get<Ball>(d.shape).radius;
  return M_PI * r * r;
}

bool inside(const Scene& scene, const Domain& d, const Point& x) {
  return signed_distance(scene, d, x) < 0.0;
}

double signed_distance(const Scene& scene, const Domain& d, const Point& x) {
  const double P = scene.period;
  if (scene.dimension == 1) {
    const auto& iv = std::get<Interval>(d.shape);
    const double rel = wrap_coord(x[0] - iv.lo, P);
    const double dist = std::min(circle_distance(x[0], iv.lo, P), circle_distance(x[0], iv.hi, P));
    const bool in = rel > 0.0 && rel < arc_length(iv);
    return in ? -dist : dist;
  }
  const auto& b = std::get<Ball>(d.shape);
  return torus_distance(x, b.center, P) - b.radius;
}

double signed_distance(const Scene& scene, const DomainId& k, const Point& x) {
  return signed_distance(scene, scene.domain(k), x);
}

double min_membrane_gap(const Scene& s) {
  const double P = s.period;
  double gap = P;
  if (s.dimension == 1) {
    std::vector<double> pts;
    for (const auto& d : s.domains) {
      const auto& iv = std::get<Interval>(d.shape);
      pts.push_back(wrap_coord(iv.lo, P));
      pts.push_back(wrap_coord(iv.hi, P));
    }
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double next = (i + 1 < pts.size()) ? pts[i + 1] : pts[0] + P;
      if (pts.size() > 1) gap = std::min(gap, next - pts[i]);
    }
    return gap;
  }
  for (std::size_t i = 0; i < s.domains.size(); ++i) {
    const auto& bi = std::get<Ball>(s.domains[i].shape);
    gap = std::min({gap, 2.0 * bi.radius, P - 2.0 * bi.radius});
    for (std::size_t j = i + 1; j < s.domains.size(); ++j)
      gap = std::min(gap, relate(s, s.domains[i], s.domains[j]).separation);
  }
  return gap;
}

const ContainmentTree::Node& ContainmentTree::node(const DomainId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) fail(ErrorCode::UnknownId, "no domain '" + id + "' in tree");
  return it->second;
}

const DomainId& ContainmentTree::parent(const DomainId& id) const {
  const Node& n = node(id);
  if (id == kRootId) fail(ErrorCode::InvalidArgument, "root has no parent");
  return n.parent;
}

const std::vector<DomainId>& ContainmentTree::children(const DomainId& id) const {
  return node(id).children;
}

int ContainmentTree::rank(const DomainId& id) const { return node(id).rank; }
const ExponentQ& ContainmentTree::exponent(const DomainId& id) const { return node(id).exponent; }
int ContainmentTree::depth(const DomainId& id) const { return node(id).depth; }

std::vector<DomainId> ContainmentTree::leaves() const {
  std::vector<DomainId> out;
  for (const auto& id : order_)
    if (node(id).children.empty()) out.push_back(id);
  return out;
}

std::vector<DomainId> ContainmentTree::ancestors(const DomainId& id) const {
  std::vector<DomainId> out;
  DomainId cur = id;
  while (cur != kRootId) {
    cur = node(cur).parent;
    out.push_back(cur);
  }
  return out;
}

bool ContainmentTree::is_ancestor(const DomainId& anc, const DomainId& id) const {
  node(anc);
  for (const auto& a : ancestors(id))
    if (a == anc) return true;
  return false;
}

ContainmentTree build_tree(const Scene& scene) {
  validate_shapes(scene);
  const auto& doms = scene.domains;
  const std::size_t n = doms.size();
  const double min_sep = scene.min_separation * scene.period;

  // container[i] = indices of domains strictly containing i
  std::vector<std::vector<std::size_t>> containers(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const PairInfo info = relate(scene, doms[i], doms[j]);
      if (info.separation <= min_sep)
        fail(ErrorCode::OverlappingBoundaries,
             "boundaries of '" + doms[i].id + "' and '" + doms[j].id + "' intersect or are too close");
      if (info.relation == Relation::Crossing)
        fail(ErrorCode::PartialOverlap,
             "'" + doms[i].id + "' and '" + doms[j].id + "' overlap without nesting");
      if (info.relation == Relation::FirstInSecond) containers[i].push_back(j);
      if (info.relation == Relation::SecondInFirst) containers[j].push_back(i);
    }
  }
  if (scene.dimension == 2) {
    for (const auto& d : doms) {
      const double r = std::get<Ball>(d.shape).radius;
      if (scene.period - 2.0 * r <= min_sep)
        fail(ErrorCode::OverlappingBoundaries, "ball '" + d.id + "' touches its own periodic image");
    }
  }

  ContainmentTree tree;
  tree.nodes_[kRootId] = ContainmentTree::Node{};
  for (const auto& d : doms) {
    ContainmentTree::Node nd;
    nd.exponent = d.permeability_exponent;
    tree.nodes_[d.id] = nd;
  }
  for (std::size_t i = 0; i < n; ++i) {
    DomainId parent = kRootId;
    double best = 0.0;
    for (std::size_t j : containers[i]) {
      const double m = measure(scene, doms[j]);
      if (parent == kRootId || m < best || (m == best && doms[j].id < parent)) {
        parent = doms[j].id;
        best = m;
      }
    }
    tree.nodes_[doms[i].id].parent = parent;
    tree.nodes_[doms[i].id].depth = static_cast<int>(containers[i].size()) + 1;
    tree.nodes_[parent].children.push_back(doms[i].id);
  }
  for (auto& [id, nd] : tree.nodes_) std::sort(nd.children.begin(), nd.children.end());

  // Deepest first so children are ranked before their parents.
  std::vector<DomainId> by_depth;
  for (const auto& d : doms) by_depth.push_back(d.id);
  std::sort(by_depth.begin(), by_depth.end(), [&](const DomainId& a, const DomainId& b) {
    const int da = tree.nodes_[a].depth, db = tree.nodes_[b].depth;
    return da != db ? da > db : a < b;
  });
  by_depth.push_back(kRootId);
  for (const auto& id : by_depth) {
    auto& nd = tree.nodes_[id];
    int r = 1;
    for (const auto& c : nd.children) r = std::max(r, 1 + tree.nodes_[c].rank);
    nd.rank = r;
  }

  tree.order_.push_back(kRootId);
  for (const auto& [id, nd] : tree.nodes_)
    if (id != kRootId) tree.order_.push_back(id);
  return tree;
}

bool precedes(const ContainmentTree& tree, const DomainId& l, const DomainId& k) {
  if (!tree.contains(l)) fail(ErrorCode::UnknownId, "no domain '" + l + "'");
  if (!tree.contains(k)) fail(ErrorCode::UnknownId, "no domain '" + k + "'");
  if (tree.is_root(l)) return false;
  return tree.parent(l) == k;
}

DomainId locate_cell(const Scene& scene, const ContainmentTree& tree, const Point& x, double tol) {
  if (tol < 0.0) tol = boundary_tolerance(scene);
  for (const auto& d : scene.domains)
    if (std::abs(signed_distance(scene, d, x)) <= tol)
      fail(ErrorCode::OnBoundary, "point lies on the boundary of '" + d.id + "'");
  DomainId cur = kRootId;
  for (;;) {
    bool moved = false;
    for (const auto& c : tree.children(cur)) {
      if (inside(scene, scene.domain(c), x)) {
        cur = c;
        moved = true;
        break;
      }
    }
    if (!moved) return cur;
  }
}

Vec unit_normal(const Scene& scene, const DomainId& k, const Point& y, double tol) {
  if (tol < 0.0) tol = 1e-9 * scene.period;
  const Domain& d = scene.domain(k);
  const double P = scene.period;
  if (scene.dimension == 1) {
    const auto& iv = std::get<Interval>(d.shape);
    if (circle_distance(y[0], iv.lo, P) <= tol) return {-1.0, 0.0};
    if (circle_distance(y[0], iv.hi, P) <= tol) return {1.0, 0.0};
    fail(ErrorCode::NotOnBoundary, "point is not on the boundary of '" + k + "'");
  }
  const auto& b = std::get<Ball>(d.shape);
  const Vec v = torus_delta(b.center, y, P);
  const double rho = std::hypot(v[0], v[1]);
  if (std::abs(rho - b.radius) > tol)
    fail(ErrorCode::NotOnBoundary, "point is not on the boundary of '" + k + "'");
  return {v[0] / rho, v[1] / rho};
}

}  // namespace membrane
