#include <algorithm>
#include <cmath>
#include <numbers>

#include "membrane/error.hpp"
#include "stepper_detail.hpp"

namespace membrane {

namespace detail {

namespace {
int domain_index(const Scene& scene, const DomainId& id) {
  for (std::size_t i = 0; i < scene.domains.size(); ++i)
    if (scene.domains[i].id == id) return static_cast<int>(i);
  fail(ErrorCode::UnknownId, "no domain '" + id + "'");
}
}  // namespace

double Mover::distance(const Surface& s, const Point& x) const {
  if (dim_ == 1) return std::abs(wrap_delta(x[0] - s.p, P_));
  return std::abs(torus_distance(x, s.center, P_) - s.radius);
}

Point Mover::project(const Surface& s, const Point& x) const {
  if (dim_ == 1) return Point::line(s.p);
  Vec v = torus_delta(s.center, x, P_);
  double r = std::hypot(v[0], v[1]);
  if (r == 0.0) {
    v = {1.0, 0.0};
    r = 1.0;
  }
  Point y = Point::plane(s.center[0] + s.radius * v[0] / r, s.center[1] + s.radius * v[1] / r);
  y[0] = wrap_coord(y[0], P_);
  y[1] = wrap_coord(y[1], P_);
  return y;
}

Vec Mover::outward(const Surface& s, const Point& y) const {
  if (dim_ == 1) return {static_cast<double>(-s.inside_dir), 0.0};
  Vec v = torus_delta(s.center, y, P_);
  const double r = std::hypot(v[0], v[1]);
  return {v[0] / r, v[1] / r};
}

double Mover::nearest(const std::vector<int>& active, const Point& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int k : active) d = std::min(d, distance((*s_)[static_cast<std::size_t>(k)], x));
  return d;
}

double Mover::crossing(const Surface& s, const Point& x, const Vec& d) const {
  if (dim_ == 1) {
    const double dx = d[0];
    if (dx > 0.0) {
      const double rel = wrap_coord(s.p - x[0], P_);
      if (rel > 0.0 && rel <= dx) return rel / dx;
    } else if (dx < 0.0) {
      const double rel = wrap_coord(x[0] - s.p, P_);
      if (rel > 0.0 && rel <= -dx) return rel / -dx;
    }
    return 2.0;
  }
  const Vec cv = torus_delta(x, s.center, P_);
  const double a = d[0] * d[0] + d[1] * d[1];
  if (a == 0.0) return 2.0;
  const double b = -2.0 * (d[0] * cv[0] + d[1] * cv[1]);
  const double c = cv[0] * cv[0] + cv[1] * cv[1] - s.radius * s.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return 2.0;
  const double sq = std::sqrt(disc);
  const double f = c > 0.0 ? (-b - sq) / (2.0 * a) : (-b + sq) / (2.0 * a);
  return (f > 0.0 && f <= 1.0) ? f : 2.0;
}

// True if a nearer circle separates x from the closest point of circle k.
bool Mover::shadowed(const std::vector<int>& active, int k, const Point& x, double dk) const {
  const Point y = project((*s_)[static_cast<std::size_t>(k)], x);
  for (int j : active) {
    if (j == k) continue;
    const Surface& s = (*s_)[static_cast<std::size_t>(j)];
    if (distance(s, x) >= dk) continue;
    const bool xin = torus_distance(x, s.center, P_) < s.radius;
    const bool yin = torus_distance(y, s.center, P_) < s.radius;
    if (xin != yin) return true;
  }
  return false;
}

Point Mover::shift(const Point& x, const Vec& d, double f) const {
  Point y = x;
  for (int i = 0; i < dim_; ++i) y[i] = wrap_coord(x[i] + f * d[static_cast<std::size_t>(i)], P_);
  return y;
}

StepOutcome Mover::move(const std::vector<int>& active, const std::vector<std::uint8_t>& reflect,
                        const Point& x, double dt_cap, RngStream& rng) const {
  StepOutcome out;
  double d = std::numeric_limits<double>::infinity();
  for (int k : active)
    if (!reflect[static_cast<std::size_t>(k)]) d = std::min(d, distance((*s_)[static_cast<std::size_t>(k)], x));
  double dt = prm_.refine * d * d;
  if (dt > prm_.max_step) dt = prm_.max_step;
  if (dt < prm_.floor) {
    dt = prm_.floor;
    out.floored = true;
  }
  if (dt >= dt_cap) {
    dt = dt_cap;
    out.floored = false;
  }
  const double sq = std::sqrt(dt);
  Vec disp{sq * rng.normal(), dim_ == 2 ? sq * rng.normal() : 0.0};
  const double total = std::hypot(disp[0], disp[1]);
  double consumed = 0.0;
  Point seg = x;
  int skip = -1;
  bool folded = false;
  for (int iter = 0; iter < 16; ++iter) {
    double best = 2.0;
    int bi = -1;
    for (int k : active) {
      if (k == skip) continue;
      const double f = crossing((*s_)[static_cast<std::size_t>(k)], seg, disp);
      if (f < best) {
        best = f;
        bi = k;
      }
    }
    const double len = std::hypot(disp[0], disp[1]);
    if (bi < 0) {
      out.pos = shift(seg, disp, 1.0);
      break;
    }
    if (reflect[static_cast<std::size_t>(bi)]) {
      const Surface& s = (*s_)[static_cast<std::size_t>(bi)];
      const Point w = shift(seg, disp, best);
      Vec rem{disp[0] * (1.0 - best), disp[1] * (1.0 - best)};
      if (dim_ == 1) {
        rem[0] = -rem[0];
      } else {
        const Vec cv = torus_delta(w, s.center, P_);
        const Vec v{rem[0] - cv[0], rem[1] - cv[1]};
        const double rho = std::hypot(v[0], v[1]);
        const double scale = rho > 0.0 ? std::max(0.0, 2.0 * s.radius - rho) / rho : 0.0;
        rem = {cv[0] + v[0] * scale, cv[1] + v[1] * scale};
      }
      consumed += best * len;
      seg = w;
      disp = rem;
      skip = bi;
      folded = true;
      continue;
    }
    out.surface = bi;
    out.pos = project((*s_)[static_cast<std::size_t>(bi)], shift(seg, disp, best));
    out.dt = total > 0.0 ? dt * std::min(1.0, (consumed + best * len) / total) : 0.0;
    return out;
  }
  out.dt = dt;
  if (!prm_.bridge || folded) return out;
  // Every unshadowed surface within reach gets a bridge test; the touched one is picked by weight.
  double cand_p[8];
  int cand_k[8];
  int nc = 0;
  double miss = 1.0, psum = 0.0;
  int lo_k = -1, hi_k = -1;
  if (dim_ == 1) {
    double lo_d = std::numeric_limits<double>::infinity(), hi_d = lo_d;
    for (int k : active) {
      const double r = wrap_coord((*s_)[static_cast<std::size_t>(k)].p - x[0], P_);
      if (r > 0.0 && r < hi_d) {
        hi_d = r;
        hi_k = k;
      }
      const double l = wrap_coord(x[0] - (*s_)[static_cast<std::size_t>(k)].p, P_);
      if (l > 0.0 && l < lo_d) {
        lo_d = l;
        lo_k = k;
      }
    }
  }
  for (int k : active) {
    if (reflect[static_cast<std::size_t>(k)]) continue;
    if (dim_ == 1 && k != lo_k && k != hi_k) continue;
    const Surface& s = (*s_)[static_cast<std::size_t>(k)];
    const double d0 = distance(s, x);
    if (d0 > 5.0 * sq) continue;
    if (dim_ == 2 && shadowed(active, k, x, d0)) continue;
    const double p = std::exp(-2.0 * d0 * distance(s, out.pos) / dt);
    if (nc < 8) {
      cand_p[nc] = p;
      cand_k[nc] = k;
      ++nc;
      psum += p;
    }
    miss *= 1.0 - p;
  }
  if (nc == 0) return out;
  const double hit = 1.0 - miss;
  const double u = rng.uniform();
  if (u >= hit) return out;
  double acc = u / hit * psum;
  int bk = cand_k[nc - 1];
  for (int i = 0; i < nc; ++i) {
    if (acc < cand_p[i]) {
      bk = cand_k[i];
      break;
    }
    acc -= cand_p[i];
  }
  out.surface = bk;
  out.pos = project((*s_)[static_cast<std::size_t>(bk)], x);
  out.dt = 0.5 * dt;
  return out;
}

void add_boundary_surfaces(const Scene& scene, int domain, int tag, std::vector<Surface>& out) {
  const Domain& d = scene.domains[static_cast<std::size_t>(domain)];
  if (scene.dimension == 1) {
    const auto& iv = std::get<Interval>(d.shape);
    Surface lo, hi;
    lo.p = wrap_coord(iv.lo, scene.period);
    lo.inside_dir = 1;
    hi.p = wrap_coord(iv.hi, scene.period);
    hi.inside_dir = -1;
    lo.domain = hi.domain = domain;
    lo.tag = hi.tag = tag;
    out.push_back(lo);
    out.push_back(hi);
  } else {
    const auto& b = std::get<Ball>(d.shape);
    Surface s;
    s.center = b.center;
    s.radius = b.radius;
    s.domain = domain;
    s.tag = tag;
    out.push_back(s);
  }
}

SceneSurfaces::SceneSurfaces(const Scene& scene, const ContainmentTree& tree) {
  const std::size_t n = scene.domains.size();
  by_domain.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t before = surfaces.size();
    add_boundary_surfaces(scene, static_cast<int>(k), -1, surfaces);
    for (std::size_t i = before; i < surfaces.size(); ++i) by_domain[k].push_back(static_cast<int>(i));
  }
  cell_id.push_back(kRootId);
  for (const auto& d : scene.domains) cell_id.push_back(d.id);
  parent.assign(n + 1, 0);
  cell_active.assign(n + 1, {});
  for (std::size_t k = 0; k < n; ++k) {
    const int p = cell_index(tree.parent(scene.domains[k].id));
    parent[k + 1] = p;
    for (int s : by_domain[k]) {
      cell_active[k + 1].push_back(s);
      cell_active[static_cast<std::size_t>(p)].push_back(s);
    }
  }
}

int SceneSurfaces::cell_index(const DomainId& id) const {
  for (std::size_t i = 0; i < cell_id.size(); ++i)
    if (cell_id[i] == id) return static_cast<int>(i);
  fail(ErrorCode::UnknownId, "no domain '" + id + "'");
}

XEngine::XEngine(const Scene& scene, const ContainmentTree& tree, const XSimConfig& config,
                 std::vector<Surface> extra_stops, const std::vector<DomainId>& target_membranes)
    : scene_(scene),
      tree_(tree),
      cfg_(config),
      delta_(effective_jump_delta(scene, config)),
      ss_(scene, tree),
      mover_(scene.dimension, scene.period, &all_, {}) {
  if (!(config.max_step > 0.0)) fail(ErrorCode::InvalidArgument, "max_step must be positive");
  if (!(config.boundary_refine > 0.0)) fail(ErrorCode::InvalidArgument, "boundary_refine must be positive");
  all_ = ss_.surfaces;
  stop_.assign(all_.size(), 0);
  for (const auto& id : target_membranes)
    for (int s : ss_.by_domain[static_cast<std::size_t>(domain_index(scene, id))])
      stop_[static_cast<std::size_t>(s)] = 1;
  active_ = ss_.cell_active;
  for (auto& s : extra_stops) {
    all_.push_back(s);
    stop_.push_back(1);
    for (auto& a : active_) a.push_back(static_cast<int>(all_.size()) - 1);
  }
  no_reflect_.assign(all_.size(), 0);
  for (const auto& d : scene.domains)
    eps_k_.push_back(std::pow(config.epsilon, d.permeability_exponent.to_double()));
  excluded_.assign(ss_.cell_id.size(), 0);
  for (const auto& ex : config.trace_excluded) {
    if (!tree.contains(ex)) fail(ErrorCode::UnknownId, "no domain '" + ex + "'");
    for (std::size_t c = 1; c < ss_.cell_id.size(); ++c)
      if (ss_.cell_id[c] == ex || tree.is_ancestor(ex, ss_.cell_id[c])) excluded_[c] = 1;
  }
  StepParams prm;
  prm.refine = config.boundary_refine;
  prm.max_step = config.max_step;
  prm.floor = (delta_ / 8.0) * (delta_ / 8.0);
  prm.bridge = config.bridge_correction;
  mover_ = Mover(scene.dimension, scene.period, &all_, prm);
}

void XEngine::jump(State& st, int surf, RngStream& rng, std::vector<HitEvent>* log) const {
  const Surface& s = all_[static_cast<std::size_t>(surf)];
  const std::size_t k = static_cast<std::size_t>(s.domain);
  const Point y = mover_.project(s, st.x);
  const Vec n = mover_.outward(s, y);
  const bool in = rng.uniform() * (1.0 + eps_k_[k]) < 1.0;
  const double sg = in ? -delta_ : delta_;
  Point x = y;
  for (int i = 0; i < scene_.dimension; ++i) x[i] = wrap_coord(y[i] + sg * n[static_cast<std::size_t>(i)], scene_.period);
  st.x = x;
  st.cell = in ? static_cast<int>(k) + 1 : ss_.parent[k + 1];
  if (log) log->push_back({st.t, scene_.domains[k].id, in ? 1 : -1, y});
}

int XEngine::start(State& st, const Point& x0, RngStream& rng, std::vector<HitEvent>* log) const {
  if (x0.dim != scene_.dimension) fail(ErrorCode::InvalidArgument, "start dimension mismatch");
  st = State{};
  st.x = wrap(scene_, x0);
  st.occupation.assign(ss_.cell_id.size(), 0.0);
  const double tol = boundary_tolerance(scene_);
  for (std::size_t i = 0; i < all_.size(); ++i) {
    if (!stop_[i]) continue;
    if (mover_.distance(all_[i], st.x) <= tol) return static_cast<int>(i);
  }
  for (std::size_t i = 0; i < all_.size(); ++i) {
    if (all_[i].domain < 0) continue;
    if (mover_.distance(all_[i], st.x) <= tol) {
      jump(st, static_cast<int>(i), rng, log);
      return -1;
    }
  }
  st.cell = ss_.cell_index(locate_cell(scene_, tree_, st.x));
  return -1;
}

int XEngine::advance(State& st, double t_final, RngStream& rng, std::vector<HitEvent>* log) const {
  const bool timed = std::isfinite(t_final);
  std::uint64_t floored = 0;
  for (;;) {
    const double cap = timed ? t_final - st.t : std::numeric_limits<double>::infinity();
    if (cap <= 0.0) return -1;
    if (!timed && st.t > cfg_.time_budget)
      fail(ErrorCode::TimeBudgetExceeded, "particle exceeded the time budget");
    const StepOutcome out = mover_.move(active_[static_cast<std::size_t>(st.cell)], no_reflect_, st.x, cap, rng);
    st.t += out.dt;
    st.occupation[static_cast<std::size_t>(st.cell)] += out.dt;
    if (!excluded_[static_cast<std::size_t>(st.cell)]) st.trace += out.dt;
    ++st.steps;
    st.x = out.pos;
    if (out.surface < 0) {
      floored = out.floored ? floored + 1 : 0;
      if (floored > 10000000)
        fail(ErrorCode::StepUnderflow, "adaptive step stuck at its floor without progress");
      continue;
    }
    floored = 0;
    if (stop_[static_cast<std::size_t>(out.surface)]) return out.surface;
    jump(st, out.surface, rng, log);
  }
}

YEngine::YEngine(const Scene& scene, const ContainmentTree& tree, const HittingQuery& query,
                 const YSimConfig& config)
    : scene_(scene), query_(query), cfg_(config), mover_(scene.dimension, scene.period, &surf_, {}) {
  validate_query(tree, query);
  if (!(config.max_step > 0.0)) fail(ErrorCode::InvalidArgument, "max_step must be positive");
  eta_ = config.push_off > 0.0 ? config.push_off : default_push_off(scene);
  if (!tree.is_root(query.ambient)) {
    ambient_domain_ = domain_index(scene, query.ambient);
    add_boundary_surfaces(scene, ambient_domain_, -1, surf_);
    while (kind_.size() < surf_.size()) {
      kind_.push_back(Kind::Wall);
      owner_.push_back(-1);
    }
  }
  for (std::size_t l = 0; l < query.redistribution.size(); ++l) {
    s_domain_.push_back(domain_index(scene, query.redistribution[l]));
    add_boundary_surfaces(scene, s_domain_.back(), static_cast<int>(l), surf_);
    while (kind_.size() < surf_.size()) {
      kind_.push_back(Kind::Redistribute);
      owner_.push_back(static_cast<int>(l));
    }
  }
  for (std::size_t t = 0; t < query.targets.size(); ++t) {
    t_domain_.push_back(domain_index(scene, query.targets[t]));
    add_boundary_surfaces(scene, t_domain_.back(), static_cast<int>(t), surf_);
    while (kind_.size() < surf_.size()) {
      kind_.push_back(Kind::Target);
      owner_.push_back(static_cast<int>(t));
    }
  }
  for (std::size_t i = 0; i < surf_.size(); ++i) {
    active_.push_back(static_cast<int>(i));
    reflect_.push_back(kind_[i] == Kind::Wall ? 1 : 0);
  }
  StepParams prm;
  prm.refine = config.boundary_refine;
  prm.max_step = config.max_step;
  prm.floor = (eta_ / 8.0) * (eta_ / 8.0);
  prm.bridge = config.bridge_correction;
  mover_ = Mover(scene.dimension, scene.period, &surf_, prm);
}

Point YEngine::redistribute(int l, RngStream& rng) const {
  const Domain& d = scene_.domains[static_cast<std::size_t>(s_domain_[static_cast<std::size_t>(l)])];
  const double P = scene_.period;
  Point y, x;
  if (scene_.dimension == 1) {
    const auto& iv = std::get<Interval>(d.shape);
    const bool hi = rng.uniform() < 0.5;
    y = Point::line(wrap_coord(hi ? iv.hi : iv.lo, P));
    x = Point::line(wrap_coord(hi ? iv.hi + eta_ : iv.lo - eta_, P));
  } else {
    const auto& b = std::get<Ball>(d.shape);
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    const double c = std::cos(th), s = std::sin(th);
    y = Point::plane(wrap_coord(b.center[0] + b.radius * c, P), wrap_coord(b.center[1] + b.radius * s, P));
    x = Point::plane(wrap_coord(b.center[0] + (b.radius + eta_) * c, P),
                     wrap_coord(b.center[1] + (b.radius + eta_) * s, P));
  }
  if (cfg_.on_redistribute) cfg_.on_redistribute(d.id, y);
  return x;
}

HitResult YEngine::run(RngStream& rng) const {
  const double tol = boundary_tolerance(scene_);
  Point x;
  double t = 0.0;
  if (const auto* c = std::get_if<CollapsedStart>(&query_.start)) {
    const auto it = std::find(query_.redistribution.begin(), query_.redistribution.end(), c->component);
    x = redistribute(static_cast<int>(it - query_.redistribution.begin()), rng);
  } else {
    x = wrap(scene_, std::get<Point>(query_.start));
    if (x.dim != scene_.dimension) fail(ErrorCode::InvalidArgument, "start dimension mismatch");
    bool placed = false;
    for (std::size_t k = 0; k < t_domain_.size() && !placed; ++k) {
      const double sd = signed_distance(scene_, scene_.domains[static_cast<std::size_t>(t_domain_[k])], x);
      if (std::abs(sd) <= tol) return HitResult{query_.targets[k], 0.0, x, 0.0};
      if (sd < 0.0) fail(ErrorCode::StartInsideTarget, "start lies inside target '" + query_.targets[k] + "'");
    }
    for (std::size_t l = 0; l < s_domain_.size() && !placed; ++l) {
      if (signed_distance(scene_, scene_.domains[static_cast<std::size_t>(s_domain_[l])], x) <= tol) {
        x = redistribute(static_cast<int>(l), rng);
        placed = true;
      }
    }
    if (!placed && ambient_domain_ >= 0) {
      const Domain& amb = scene_.domains[static_cast<std::size_t>(ambient_domain_)];
      const double sd = signed_distance(scene_, amb, x);
      if (sd > tol) fail(ErrorCode::InvalidArgument, "start lies outside the ambient domain");
      if (sd > -eta_) {
        // Start on (or within eta of) the reflecting wall: move to distance eta inside.
        for (std::size_t i = 0; i < surf_.size(); ++i) {
          if (kind_[i] != Kind::Wall) continue;
          if (mover_.distance(surf_[i], x) <= eta_) {
            const Point y = mover_.project(surf_[i], x);
            const Vec n = mover_.outward(surf_[i], y);
            for (int a = 0; a < scene_.dimension; ++a)
              x[a] = wrap_coord(y[a] - eta_ * n[static_cast<std::size_t>(a)], scene_.period);
            break;
          }
        }
      }
    }
  }
  std::uint64_t floored = 0;
  for (;;) {
    if (t > cfg_.time_budget) fail(ErrorCode::TimeBudgetExceeded, "Y particle exceeded the time budget");
    const StepOutcome out = mover_.move(active_, reflect_, x, std::numeric_limits<double>::infinity(), rng);
    t += out.dt;
    x = out.pos;
    if (out.surface < 0) {
      floored = out.floored ? floored + 1 : 0;
      if (floored > 10000000)
        fail(ErrorCode::StepUnderflow, "adaptive step stuck at its floor without progress");
      continue;
    }
    floored = 0;
    const std::size_t s = static_cast<std::size_t>(out.surface);
    if (kind_[s] == Kind::Target)
      return HitResult{query_.targets[static_cast<std::size_t>(owner_[s])], t, x, t};
    x = redistribute(owner_[s], rng);
  }
}

}  // namespace detail

double default_jump_delta(const Scene& scene, double eps) {
  return std::min(eps, min_membrane_gap(scene) / 10.0) / 4.0;
}

double default_push_off(const Scene& scene) { return min_membrane_gap(scene) / 40.0; }

double effective_jump_delta(const Scene& scene, const XSimConfig& config) {
  if (!(config.epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  const double d = config.jump_delta > 0.0 ? config.jump_delta : default_jump_delta(scene, config.epsilon);
  if (!(d < 0.25 * min_membrane_gap(scene)))
    fail(ErrorCode::InvalidArgument, "jump_delta must be below a quarter of the minimum membrane gap");
  return d;
}

namespace {

std::map<DomainId, double> occupation_map(const detail::XEngine& e, const std::vector<double>& occ) {
  std::map<DomainId, double> m;
  for (std::size_t c = 0; c < occ.size(); ++c) m[e.cells().cell_id[c]] = occ[c];
  return m;
}

}  // namespace

ParticleRunResult run_x_to_time(const Scene& scene, const ContainmentTree& tree,
                                const XSimConfig& config, const Point& start, double t_final,
                                std::uint64_t particle) {
  if (!(t_final > 0.0)) fail(ErrorCode::InvalidArgument, "t_final must be positive");
  if (t_final > config.time_budget)
    fail(ErrorCode::TimeBudgetExceeded, "t_final exceeds the per-particle time budget");
  detail::XEngine eng(scene, tree, config);
  RngStream rng(config.rng_seed, particle);
  ParticleRunResult r;
  detail::XEngine::State st;
  std::vector<HitEvent>* log = config.record_hits ? &r.hit_log : nullptr;
  eng.start(st, start, rng, log);
  eng.advance(st, t_final, rng, log);
  r.final_position = st.x;
  r.final_cell = eng.cells().cell_id[static_cast<std::size_t>(st.cell)];
  r.occupation_time = occupation_map(eng, st.occupation);
  r.trace_time = st.trace;
  r.elapsed = st.t;
  r.steps = st.steps;
  return r;
}

HitResult run_x_until_hit(const Scene& scene, const ContainmentTree& tree, const XSimConfig& config,
                          const Point& start, const std::vector<DomainId>& target_membranes,
                          std::uint64_t particle) {
  if (target_membranes.empty()) fail(ErrorCode::InvalidArgument, "no target membranes");
  detail::XEngine eng(scene, tree, config, {}, target_membranes);
  RngStream rng(config.rng_seed, particle);
  detail::XEngine::State st;
  int hit = eng.start(st, start, rng, nullptr);
  if (hit < 0) hit = eng.advance(st, std::numeric_limits<double>::infinity(), rng, nullptr);
  const auto& s = eng.surface(hit);
  return HitResult{scene.domains[static_cast<std::size_t>(s.domain)].id, st.t,
                   eng.mover().project(s, st.x), st.trace};
}

HitResult run_x_until_absorbed(const Scene& scene, const ContainmentTree& tree,
                               const XSimConfig& config, const Point& start,
                               const std::vector<AbsorbingPoint>& points, std::uint64_t particle) {
  if (scene.dimension != 1) fail(ErrorCode::InvalidArgument, "absorbing points need a 1D scene");
  if (points.empty()) fail(ErrorCode::InvalidArgument, "no absorbing points");
  std::vector<detail::Surface> extra;
  for (std::size_t j = 0; j < points.size(); ++j) {
    detail::Surface s;
    s.p = wrap_coord(points[j].x, scene.period);
    s.tag = static_cast<int>(j);
    extra.push_back(s);
  }
  detail::XEngine eng(scene, tree, config, extra);
  RngStream rng(config.rng_seed, particle);
  detail::XEngine::State st;
  int hit = eng.start(st, start, rng, nullptr);
  if (hit < 0) hit = eng.advance(st, std::numeric_limits<double>::infinity(), rng, nullptr);
  const auto& s = eng.surface(hit);
  return HitResult{points[static_cast<std::size_t>(s.tag)].label, st.t, Point::line(s.p), st.trace};
}

HitResult run_y_until_hit(const Scene& scene, const ContainmentTree& tree, const HittingQuery& query,
                          const YSimConfig& config, std::uint64_t particle) {
  detail::YEngine eng(scene, tree, query, config);
  RngStream rng(config.rng_seed, particle);
  return eng.run(rng);
}

}  // namespace membrane
