#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "membrane/error.hpp"
#include "membrane/solve.hpp"

namespace membrane {

struct FdProblem2D::Impl {
  double P = 1.0;
  double h = 0.0;
  int n = 0;
  bool periodic = true;
  Ball ambient;
  std::vector<DomainId> s_ids, t_ids;
  std::vector<Ball> s_balls, t_balls;

  // Per node: >= 0 unknown index; -1 outside ambient; -(2 + l) inside S child l;
  // -(100000 + t) inside T child t.
  std::vector<int> state;
  int active = 0;
  int unknowns = 0;

  struct Cut {
    int unknown;
    int target;
    Point pos;
    double w;
  };
  std::vector<Cut> cuts;
  std::vector<Point> node_pos;  // by unknown index (active nodes only)

  Eigen::SparseMatrix<double> M;  // minus the discrete Laplacian, SPD
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;

  int idx(int i, int j) const { return ((i % n + n) % n) * n + ((j % n + n) % n); }
  Point at(int i, int j) const {
    return Point::plane(((i % n + n) % n) * h, ((j % n + n) % n) * h);
  }
};

namespace {

constexpr int kOutside = -1;
int s_code(int l) { return -(2 + l); }
int t_code(int t) { return -(100000 + t); }
bool is_s(int st) { return st <= -2 && st > -100000; }
bool is_t(int st) { return st <= -100000; }
int s_of(int st) { return -st - 2; }
int t_of(int st) { return -st - 100000; }

double face_aperture(const FdProblem2D::Impl& g, const Point& p, int axis, int dir) {
  if (g.periodic) return 1.0;
  const double R = g.ambient.radius;
  Vec d = torus_delta(g.ambient.center, p, g.P);  // node relative to center
  const double along = d[axis] + 0.5 * dir * g.h;
  if (std::abs(along) >= R) return 0.0;
  const double half = std::sqrt(R * R - along * along);
  const double c = d[1 - axis];
  const double lo = std::max(c - 0.5 * g.h, -half);
  const double hi = std::min(c + 0.5 * g.h, half);
  return std::max(0.0, hi - lo) / g.h;
}

// Fraction along p -> p + h e_axis*dir where the segment first meets the circle.
double crossing_fraction(const FdProblem2D::Impl& g, const Point& p, const Ball& b, int axis, int dir) {
  const Vec d = torus_delta(p, b.center, g.P);
  const double ed = dir * d[axis];
  const double c = d[0] * d[0] + d[1] * d[1] - b.radius * b.radius;
  const double disc = ed * ed - c;
  double theta = 1.0;
  if (disc >= 0.0) theta = (ed - std::sqrt(disc)) / g.h;
  return std::clamp(theta, 1e-8, 1.0);
}

Point nearest_on_circle(const Scene& scene, const Ball& b, const Point& p) {
  Vec v = torus_delta(b.center, p, scene.period);
  double r = std::hypot(v[0], v[1]);
  if (r == 0.0) {
    v = {1.0, 0.0};
    r = 1.0;
  }
  return wrap(scene, Point::plane(b.center[0] + b.radius * v[0] / r, b.center[1] + b.radius * v[1] / r));
}

}  // namespace

FdProblem2D::FdProblem2D(const Scene& scene, const ContainmentTree& tree,
                         const HittingQuery& q, double spacing) {
  if (scene.dimension != 2) fail(ErrorCode::InvalidArgument, "2D solver needs a 2D scene");
  validate_query(tree, q);
  auto g = std::make_shared<Impl>();
  g->P = scene.period;
  g->h = spacing;
  const double nn = scene.period / spacing;
  g->n = static_cast<int>(std::lround(nn));
  if (!(spacing > 0.0) || g->n < 8 || std::abs(nn - g->n) > 1e-9 * nn)
    fail(ErrorCode::InvalidArgument, "grid spacing must divide the period");
  g->periodic = tree.is_root(q.ambient);
  auto check_res = [&](const Ball& b, const DomainId& id) {
    if (2.0 * b.radius / spacing < 8.0)
      fail(ErrorCode::GridTooCoarse, "'" + id + "' spans fewer than 8 grid cells");
  };
  if (!g->periodic) {
    g->ambient = std::get<Ball>(scene.domain(q.ambient).shape);
    check_res(g->ambient, q.ambient);
  }
  for (const auto& id : q.redistribution) {
    g->s_ids.push_back(id);
    g->s_balls.push_back(std::get<Ball>(scene.domain(id).shape));
    check_res(g->s_balls.back(), id);
  }
  for (const auto& id : q.targets) {
    g->t_ids.push_back(id);
    g->t_balls.push_back(std::get<Ball>(scene.domain(id).shape));
    check_res(g->t_balls.back(), id);
  }

  const int n = g->n;
  g->state.assign(static_cast<std::size_t>(n) * n, kOutside);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Point p = g->at(i, j);
      int st = kOutside;
      bool in_amb = g->periodic;
      if (!in_amb) {
        for (int axis = 0; axis < 2 && !in_amb; ++axis)
          for (int dir : {-1, 1})
            if (face_aperture(*g, p, axis, dir) > 1e-12) in_amb = true;
      }
      if (in_amb) {
        st = 0;
        for (std::size_t l = 0; l < g->s_balls.size(); ++l)
          if (torus_distance(p, g->s_balls[l].center, g->P) <= g->s_balls[l].radius)
            st = s_code(static_cast<int>(l));
        for (std::size_t t = 0; t < g->t_balls.size(); ++t)
          if (torus_distance(p, g->t_balls[t].center, g->P) <= g->t_balls[t].radius)
            st = t_code(static_cast<int>(t));
      }
      if (st == 0) {
        st = g->active++;
        g->node_pos.push_back(p);
      }
      g->state[static_cast<std::size_t>(g->idx(i, j))] = st;
    }
  }
  g->unknowns = g->active + static_cast<int>(g->s_balls.size());

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(g->active) * 5);
  std::vector<double> s_diag(g->s_balls.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int u = g->state[static_cast<std::size_t>(g->idx(i, j))];
      if (u < 0) continue;
      const Point p = g->at(i, j);
      double diag = 0.0;
      for (int axis = 0; axis < 2; ++axis) {
        for (int dir : {-1, 1}) {
          const int qi = axis == 0 ? i + dir : i;
          const int qj = axis == 1 ? j + dir : j;
          const int qs = g->state[static_cast<std::size_t>(g->idx(qi, qj))];
          const double a = face_aperture(*g, p, axis, dir);
          if (a <= 0.0) continue;
          if (qs >= 0) {
            diag += a;
            trip.emplace_back(u, qs, -a);
          } else if (is_s(qs)) {
            const int l = s_of(qs);
            const double w = a / crossing_fraction(*g, p, g->s_balls[static_cast<std::size_t>(l)], axis, dir);
            diag += w;
            trip.emplace_back(u, g->active + l, -w);
            trip.emplace_back(g->active + l, u, -w);
            s_diag[static_cast<std::size_t>(l)] += w;
          } else if (is_t(qs)) {
            const int t = t_of(qs);
            const double th = crossing_fraction(*g, p, g->t_balls[static_cast<std::size_t>(t)], axis, dir);
            const double w = a / th;
            diag += w;
            Point c = p;
            c[axis] += dir * th * g->h;
            g->cuts.push_back({u, t, wrap(scene, c), w});
          }
        }
      }
      trip.emplace_back(u, u, diag);
    }
  }
  for (std::size_t l = 0; l < s_diag.size(); ++l) {
    if (s_diag[l] <= 0.0)
      fail(ErrorCode::GridTooCoarse, "redistribution child '" + g->s_ids[l] + "' is not resolved");
    trip.emplace_back(g->active + static_cast<int>(l), g->active + static_cast<int>(l), s_diag[l]);
  }
  g->M.resize(g->unknowns, g->unknowns);
  g->M.setFromTriplets(trip.begin(), trip.end());
  g->ldlt.compute(g->M);
  if (g->ldlt.info() != Eigen::Success)
    fail(ErrorCode::LinearSolveFailure, "factorization of the 2D system failed");
  const auto D = g->ldlt.vectorD();
  if (D.size() > 0 && D.minCoeff() <= 1e-13 * D.maxCoeff())
    fail(ErrorCode::LinearSolveFailure, "2D system is singular (a region cannot reach any target)");
  impl_ = g;
}

double FdProblem2D::spacing() const { return impl_->h; }
std::size_t FdProblem2D::unknowns() const { return static_cast<std::size_t>(impl_->unknowns); }

HittingDistribution FdProblem2D::solve(const QueryStart& start) const {
  const Impl& g = *impl_;
  Scene sc;
  sc.dimension = 2;
  sc.period = g.P;
  HittingDistribution out;
  for (const auto& id : g.t_ids) out.mass[id] = 0.0;

  Eigen::VectorXd e = Eigen::VectorXd::Zero(g.unknowns);
  std::vector<double> direct(g.t_ids.size(), 0.0);
  std::vector<Point> direct_pos(g.t_ids.size());
  if (const auto* c = std::get_if<CollapsedStart>(&start)) {
    auto it = std::find(g.s_ids.begin(), g.s_ids.end(), c->component);
    if (it == g.s_ids.end()) fail(ErrorCode::InvalidArgument, "collapsed start not in S");
    e[g.active + static_cast<int>(it - g.s_ids.begin())] = 1.0;
  } else {
    const Point x = wrap(sc, std::get<Point>(start));
    const double tol = 1e-9 * g.P;
    for (std::size_t t = 0; t < g.t_balls.size(); ++t) {
      const double sd = torus_distance(x, g.t_balls[t].center, g.P) - g.t_balls[t].radius;
      if (std::abs(sd) <= tol) {
        out.mass[g.t_ids[t]] = 1.0;
        out.atoms.push_back({g.t_ids[t], x, 1.0});
        return out;
      }
      if (sd < 0.0) fail(ErrorCode::StartInsideTarget, "start lies inside target '" + g.t_ids[t] + "'");
    }
    for (std::size_t l = 0; l < g.s_balls.size(); ++l) {
      if (torus_distance(x, g.s_balls[l].center, g.P) <= g.s_balls[l].radius + tol) {
        HittingDistribution r = solve(CollapsedStart{g.s_ids[l]});
        return r;
      }
    }
    if (!g.periodic && torus_distance(x, g.ambient.center, g.P) > g.ambient.radius + tol)
      fail(ErrorCode::InvalidArgument, "start lies outside the ambient domain");
    const int i0 = static_cast<int>(std::floor(x[0] / g.h));
    const int j0 = static_cast<int>(std::floor(x[1] / g.h));
    const double fx = x[0] / g.h - i0;
    const double fy = x[1] / g.h - j0;
    double kept = 0.0;
    for (int di = 0; di < 2; ++di) {
      for (int dj = 0; dj < 2; ++dj) {
        const double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy);
        if (w <= 0.0) continue;
        const int st = g.state[static_cast<std::size_t>(g.idx(i0 + di, j0 + dj))];
        if (st >= 0) {
          e[st] += w;
        } else if (is_s(st)) {
          e[g.active + s_of(st)] += w;
        } else if (is_t(st)) {
          const auto t = static_cast<std::size_t>(t_of(st));
          direct[t] += w;
          direct_pos[t] = nearest_on_circle(sc, g.t_balls[t], g.at(i0 + di, j0 + dj));
        } else {
          continue;
        }
        kept += w;
      }
    }
    if (kept <= 0.0) fail(ErrorCode::InvalidArgument, "start is not resolved by the grid");
    e /= kept;
    for (auto& d : direct) d /= kept;
  }

  const Eigen::VectorXd z = g.ldlt.solve(e);
  if (g.ldlt.info() != Eigen::Success) fail(ErrorCode::LinearSolveFailure, "2D solve failed");
  for (const auto& c : g.cuts) {
    const double w = z[c.unknown] * c.w;
    if (w <= 0.0) continue;
    out.mass[g.t_ids[static_cast<std::size_t>(c.target)]] += w;
    out.atoms.push_back({g.t_ids[static_cast<std::size_t>(c.target)], c.pos, w});
  }
  for (std::size_t t = 0; t < direct.size(); ++t) {
    if (direct[t] <= 0.0) continue;
    out.mass[g.t_ids[t]] += direct[t];
    out.atoms.push_back({g.t_ids[t], direct_pos[t], direct[t]});
  }
  return out;
}

std::vector<double> FdProblem2D::field(const DomainId& target) const {
  const Impl& g = *impl_;
  auto it = std::find(g.t_ids.begin(), g.t_ids.end(), target);
  if (it == g.t_ids.end()) fail(ErrorCode::UnknownId, "'" + target + "' is not a target");
  const int t = static_cast<int>(it - g.t_ids.begin());
  Eigen::VectorXd r = Eigen::VectorXd::Zero(g.unknowns);
  for (const auto& c : g.cuts)
    if (c.target == t) r[c.unknown] += c.w;
  const Eigen::VectorXd u = g.ldlt.solve(r);
  return std::vector<double>(u.data(), u.data() + u.size());
}

void FdProblem2D::write_csv(std::ostream& os, const std::vector<double>& field) const {
  const Impl& g = *impl_;
  os << "x,y,value\n";
  char buf[96];
  for (int u = 0; u < g.active; ++u) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.12g\n", g.node_pos[static_cast<std::size_t>(u)][0],
                  g.node_pos[static_cast<std::size_t>(u)][1], field[static_cast<std::size_t>(u)]);
    os << buf;
  }
}

HittingDistribution hitting_2d_fd(const Scene& scene, const ContainmentTree& tree,
                                  const HittingQuery& query, double spacing, bool richardson) {
  FdProblem2D coarse(scene, tree, query, spacing);
  HittingDistribution hc = coarse.solve(query.start);
  if (!richardson) return hc;
  FdProblem2D fine(scene, tree, query, 0.5 * spacing);
  HittingDistribution hf = fine.solve(query.start);
  double err = 0.0;
  for (const auto& [id, m] : hf.mass) err = std::max(err, std::abs(m - hc.at(id)));
  hf.tolerance = err;
  return hf;
}

HittingOracle make_fd_oracle(const Scene& scene, const ContainmentTree& tree, double spacing,
                             bool richardson) {
  struct Cache {
    std::mutex mu;
    std::map<std::string, std::shared_ptr<FdProblem2D>> problems;
  };
  auto cache = std::make_shared<Cache>();
  return [scene, tree, spacing, richardson, cache](const HittingQuery& q) {
    auto get = [&](double hh) {
      HittingQuery key_q = q;
      key_q.start = Point::plane(0.0, 0.0);
      char buf[32];
      std::snprintf(buf, sizeof buf, "|%.12g", hh);
      const std::string key = describe(key_q) + buf;
      std::lock_guard<std::mutex> lock(cache->mu);
      auto it = cache->problems.find(key);
      if (it == cache->problems.end())
        it = cache->problems.emplace(key, std::make_shared<FdProblem2D>(scene, tree, q, hh)).first;
      return it->second;
    };
    HittingDistribution hc = get(spacing)->solve(q.start);
    if (!richardson) return hc;
    HittingDistribution hf = get(0.5 * spacing)->solve(q.start);
    double err = 0.0;
    for (const auto& [id, m] : hf.mass) err = std::max(err, std::abs(m - hc.at(id)));
    hf.tolerance = err;
    return hf;
  };
}

}  // namespace membrane
