#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>

#include <Eigen/Dense>

#include "membrane/error.hpp"
#include "membrane/solve.hpp"

namespace membrane {

namespace {

enum class NodeKind { Wall, Target, Redistribution };

struct Node {
  double s = 0.0;  // coordinate along the circle from the origin
  NodeKind kind = NodeKind::Wall;
  DomainId owner;
  int side = 0;      // 0 = lo endpoint, 1 = hi endpoint
  int unknown = -1;  // column in the linear system, -1 for Dirichlet nodes
};

struct Segment {
  std::size_t a, b;  // node indices, b follows a in the positive direction
  double s0, s1;
};

struct Layout {
  double origin = 0.0;
  double length = 0.0;
  bool periodic = false;
  std::vector<Node> nodes;
  std::vector<Segment> segments;
  std::map<DomainId, std::pair<double, double>> child_span;  // S and T children in s-coords
  std::map<DomainId, int> component_unknown;
  int unknowns = 0;
};

Layout make_layout(const Scene& scene, const ContainmentTree& tree, const HittingQuery& q) {
  validate_query(tree, q);
  const double P = scene.period;
  Layout L;
  L.periodic = tree.is_root(q.ambient);
  if (L.periodic) {
    L.origin = wrap_coord(std::get<Interval>(scene.domain(q.targets.front()).shape).lo, P);
    L.length = P;
  } else {
    const auto& amb = std::get<Interval>(scene.domain(q.ambient).shape);
    L.origin = wrap_coord(amb.lo, P);
    L.length = amb.hi - amb.lo;
    L.nodes.push_back({0.0, NodeKind::Wall, q.ambient, 0});
    L.nodes.push_back({L.length, NodeKind::Wall, q.ambient, 1});
  }
  auto add_child = [&](const DomainId& id, NodeKind kind) {
    const auto& iv = std::get<Interval>(scene.domain(id).shape);
    const double s0 = wrap_coord(iv.lo - L.origin, P);
    const double s1 = s0 + (iv.hi - iv.lo);
    L.child_span[id] = {s0, s1};
    L.nodes.push_back({s0, kind, id, 0});
    L.nodes.push_back({s1, kind, id, 1});
  };
  for (const auto& id : q.targets) add_child(id, NodeKind::Target);
  for (const auto& id : q.redistribution) add_child(id, NodeKind::Redistribution);
  std::stable_sort(L.nodes.begin(), L.nodes.end(),
                   [](const Node& a, const Node& b) { return a.s < b.s; });

  for (auto& n : L.nodes) {
    if (n.kind == NodeKind::Target) continue;
    if (n.kind == NodeKind::Redistribution) {
      auto [it, fresh] = L.component_unknown.try_emplace(n.owner, L.unknowns);
      if (fresh) ++L.unknowns;
      n.unknown = it->second;
    } else {
      n.unknown = L.unknowns++;
    }
  }

  const std::size_t m = L.nodes.size();
  const std::size_t last = L.periodic ? m : m - 1;
  for (std::size_t i = 0; i < last; ++i) {
    const std::size_t j = (i + 1) % m;
    const Node& a = L.nodes[i];
    const Node& b = L.nodes[j];
    if (a.kind != NodeKind::Wall && a.owner == b.owner && a.side == 0 && b.side == 1) continue;
    const double s1 = (j == 0) ? b.s + L.length : b.s;
    L.segments.push_back({i, j, a.s, s1});
  }
  return L;
}

// Value of the solution at the start, as weights over nodes (and components).
struct StartWeights {
  std::vector<std::pair<std::size_t, double>> node_weights;
  std::optional<int> component;
};

StartWeights locate_start(const Scene& scene, const Layout& L, const HittingQuery& q) {
  StartWeights w;
  if (const auto* c = std::get_if<CollapsedStart>(&q.start)) {
    w.component = L.component_unknown.at(c->component);
    return w;
  }
  const Point& x = std::get<Point>(q.start);
  const double P = scene.period;
  const double tol = 1e-9 * P;
  double s = wrap_coord(x[0] - L.origin, P);
  if (!L.periodic) {
    if (s > L.length + tol) {
      if (P - s <= tol)
        s = 0.0;
      else
        fail(ErrorCode::InvalidArgument, "start lies outside the ambient domain '" + q.ambient + "'");
    }
    s = std::min(s, L.length);
  } else if (P - s <= tol) {
    s = 0.0;
  }
  for (std::size_t i = 0; i < L.nodes.size(); ++i) {
    if (std::abs(L.nodes[i].s - s) <= tol) {
      const Node& n = L.nodes[i];
      if (n.kind == NodeKind::Redistribution)
        w.component = n.unknown;
      else
        w.node_weights.emplace_back(i, 1.0);
      return w;
    }
  }
  for (const auto& [id, span] : L.child_span) {
    if (s > span.first && s < span.second) {
      const bool is_target = std::find(q.targets.begin(), q.targets.end(), id) != q.targets.end();
      if (is_target) fail(ErrorCode::StartInsideTarget, "start lies inside target '" + id + "'");
      w.component = L.component_unknown.at(id);
      return w;
    }
  }
  for (const auto& seg : L.segments) {
    double ss = s;
    if (ss < seg.s0) ss += L.length;
    if (ss > seg.s0 && ss < seg.s1) {
      const double t = (ss - seg.s0) / (seg.s1 - seg.s0);
      w.node_weights.emplace_back(seg.a, 1.0 - t);
      w.node_weights.emplace_back(seg.b, t);
      return w;
    }
  }
  fail(ErrorCode::InvalidArgument, "start could not be located in the ambient domain");
}

}  // namespace

HittingDistribution hitting_1d(const Scene& scene, const ContainmentTree& tree,
                               const HittingQuery& q) {
  if (scene.dimension != 1) fail(ErrorCode::InvalidArgument, "hitting_1d needs a 1D scene");
  const Layout L = make_layout(scene, tree, q);
  const StartWeights sw = locate_start(scene, L, q);

  std::vector<std::size_t> dirichlet;
  for (std::size_t i = 0; i < L.nodes.size(); ++i)
    if (L.nodes[i].kind == NodeKind::Target) dirichlet.push_back(i);
  const int n = L.unknowns;
  const int k = static_cast<int>(dirichlet.size());

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, k);
  auto dirichlet_col = [&](std::size_t node) {
    return static_cast<int>(std::find(dirichlet.begin(), dirichlet.end(), node) - dirichlet.begin());
  };
  // Flux balance at every free node; redistribution endpoints share a row.
  for (const auto& seg : L.segments) {
    const double g = 1.0 / (seg.s1 - seg.s0);
    const Node& a = L.nodes[seg.a];
    const Node& b = L.nodes[seg.b];
    for (int pass = 0; pass < 2; ++pass) {
      const Node& self = pass == 0 ? a : b;
      const Node& other = pass == 0 ? b : a;
      const std::size_t other_idx = pass == 0 ? seg.b : seg.a;
      if (self.unknown < 0) continue;
      A(self.unknown, self.unknown) -= g;
      if (other.unknown >= 0)
        A(self.unknown, other.unknown) += g;
      else
        B(self.unknown, dirichlet_col(other_idx)) -= g;
    }
  }

  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, k);
  if (n > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < n) fail(ErrorCode::SingularSystem, "1D hitting system is singular");
    U = lu.solve(B);
  }

  HittingDistribution out;
  for (const auto& id : q.targets) out.mass[id] = 0.0;
  for (int j = 0; j < k; ++j) {
    double v = 0.0;
    if (sw.component) {
      v = U(*sw.component, j);
    } else {
      for (const auto& [node, wgt] : sw.node_weights) {
        const Node& nd = L.nodes[node];
        const double val = nd.unknown >= 0 ? U(nd.unknown, j)
                                           : (static_cast<int>(dirichlet_col(node)) == j ? 1.0 : 0.0);
        v += wgt * val;
      }
    }
    v = std::clamp(v, 0.0, 1.0);
    const Node& nd = L.nodes[dirichlet[j]];
    out.mass[nd.owner] += v;
    if (v > 0.0)
      out.atoms.push_back({nd.owner, Point::line(wrap_coord(nd.s + L.origin, scene.period)), v});
  }
  return out;
}

HittingDistribution harmonic_measure_1d(const Scene& scene, const ContainmentTree& tree,
                                        const DomainId& ambient, const DomainId& target,
                                        const Point& start) {
  HittingQuery q;
  q.ambient = ambient;
  q.targets = {target};
  q.start = start;
  const HittingDistribution h = hitting_1d(scene, tree, q);
  HittingDistribution out;
  const auto& iv = std::get<Interval>(scene.domain(target).shape);
  for (double e : {iv.lo, iv.hi}) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", wrap_coord(e, scene.period));
    out.mass[buf] = 0.0;
  }
  for (const auto& a : h.atoms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", a.position[0]);
    out.mass[buf] += a.weight;
    out.atoms.push_back(a);
  }
  return out;
}

HittingDistribution transmission_hitting_1d(const Scene& scene, double eps,
                                            const std::vector<AbsorbingPoint>& targets,
                                            double start) {
  if (scene.dimension != 1) fail(ErrorCode::InvalidArgument, "transmission solver needs a 1D scene");
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  if (targets.empty()) fail(ErrorCode::InvalidArgument, "no absorbing points");
  const double P = scene.period;
  const double tol = 1e-9 * P;

  struct TNode {
    double x;
    int absorbing = -1;    // index into targets
    double eps_k = 1.0;    // permeability of the membrane at this node
    int inside_dir = 0;    // +1 if the domain lies to the right, -1 to the left, 0 no membrane
  };
  std::vector<TNode> nodes;
  for (std::size_t j = 0; j < targets.size(); ++j)
    nodes.push_back({wrap_coord(targets[j].x, P), static_cast<int>(j)});
  for (const auto& d : scene.domains) {
    const auto& iv = std::get<Interval>(d.shape);
    const double ek = std::pow(eps, d.permeability_exponent.to_double());
    for (int side = 0; side < 2; ++side) {
      const double x = wrap_coord(side == 0 ? iv.lo : iv.hi, P);
      bool merged = false;
      for (auto& n : nodes) {
        if (n.absorbing >= 0 && std::abs(wrap_delta(n.x - x, P)) <= tol) merged = true;
      }
      if (!merged) nodes.push_back({x, -1, ek, side == 0 ? 1 : -1});
    }
  }
  std::sort(nodes.begin(), nodes.end(), [](const TNode& a, const TNode& b) { return a.x < b.x; });
  const std::size_t m = nodes.size();

  std::vector<int> unknown(m, -1);
  int n = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (nodes[i].absorbing < 0) unknown[i] = n++;
  const int k = static_cast<int>(targets.size());

  auto gap = [&](std::size_t i, std::size_t j) {  // positive length from node i forward to node j
    double g = nodes[j].x - nodes[i].x;
    if (g <= 0.0) g += P;
    return g;
  };

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, k);
  for (std::size_t i = 0; i < m; ++i) {
    if (unknown[i] < 0) continue;
    const std::size_t l = (i + m - 1) % m;
    const std::size_t r = (i + 1) % m;
    const double gl = 1.0 / gap(l, i);
    const double gr = 1.0 / gap(i, r);
    // Left slope sL = (u_i - u_l) gl, right slope sR = (u_r - u_i) gr.
    double wl = 1.0, wr = 1.0;  // row: wl*sL - wr*sR = 0
    if (nodes[i].inside_dir == 1) {
      wl = nodes[i].eps_k;
    } else if (nodes[i].inside_dir == -1) {
      wr = nodes[i].eps_k;
    }
    const int row = unknown[i];
    A(row, row) += wl * gl + wr * gr;
    auto add = [&](std::size_t j, double c) {
      if (unknown[j] >= 0)
        A(row, unknown[j]) += c;
      else
        B(row, nodes[j].absorbing) -= c;
    };
    add(l, -wl * gl);
    add(r, -wr * gr);
  }
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, k);
  if (n > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < n) fail(ErrorCode::SingularSystem, "transmission system is singular");
    U = lu.solve(B);
  }
  auto value = [&](std::size_t i, int j) {
    return unknown[i] >= 0 ? U(unknown[i], j) : (nodes[i].absorbing == j ? 1.0 : 0.0);
  };

  const double xs = wrap_coord(start, P);
  HittingDistribution out;
  for (int j = 0; j < k; ++j) {
    double v = 0.0;
    bool done = false;
    for (std::size_t i = 0; i < m && !done; ++i) {
      if (std::abs(wrap_delta(nodes[i].x - xs, P)) <= tol) {
        v = value(i, j);
        done = true;
      }
    }
    for (std::size_t i = 0; i < m && !done; ++i) {
      const std::size_t r = (i + 1) % m;
      const double g = gap(i, r);
      const double off = wrap_coord(xs - nodes[i].x, P);
      if (off > 0.0 && off < g) {
        const double t = off / g;
        v = (1.0 - t) * value(i, j) + t * value(r, j);
        done = true;
      }
    }
    out.mass[targets[static_cast<std::size_t>(j)].label] += std::clamp(v, 0.0, 1.0);
    out.atoms.push_back({targets[static_cast<std::size_t>(j)].label,
                         Point::line(wrap_coord(targets[static_cast<std::size_t>(j)].x, P)),
                         std::clamp(v, 0.0, 1.0)});
  }
  return out;
}

HittingOracle make_analytic_oracle(const Scene& scene, const ContainmentTree& tree) {
  return [scene, tree](const HittingQuery& q) { return hitting_1d(scene, tree, q); };
}

}  // namespace membrane
