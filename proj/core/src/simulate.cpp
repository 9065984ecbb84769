#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "membrane/error.hpp"
#include "membrane/predictor.hpp"
#include "membrane/simulate.hpp"
#include "stepper_detail.hpp"

namespace membrane {

HittingDistribution estimate_y_hitting(const Scene& scene, const ContainmentTree& tree,
                                       const HittingQuery& query, const YSimConfig& config,
                                       std::size_t samples) {
  if (samples == 0) fail(ErrorCode::InvalidArgument, "need at least one sample");
  detail::YEngine eng(scene, tree, query, config);
  std::vector<HitResult> hits(samples);
  parallel_for(samples, [&](std::size_t i) {
    RngStream rng(config.rng_seed, i);
    hits[i] = eng.run(rng);
  });
  HittingDistribution raw;
  for (const auto& t : query.targets) raw.mass[t] = 0.0;
  const double w = 1.0 / static_cast<double>(samples);
  for (const auto& h : hits) {
    raw.mass[h.target] += w;
    raw.atoms.push_back({h.target, h.position, w});
  }
  double se = 0.0;
  for (const auto& [id, p] : raw.mass) se = std::max(se, std::sqrt(p * (1.0 - p) * w));
  raw.tolerance = 3.0 * std::max(se, w);
  HittingDistribution out;
  out.mass = raw.mass;
  out.tolerance = raw.tolerance;
  out.atoms = compact_atoms(scene, raw, 16);
  return out;
}

HittingOracle make_mc_oracle(const Scene& scene, const ContainmentTree& tree,
                             const YSimConfig& config, std::size_t samples) {
  return [scene, tree, config, samples](const HittingQuery& q) {
    return estimate_y_hitting(scene, tree, q, config, samples);
  };
}

void CollarSpec::validate() const {
  if (!(0.0 < beta && beta < alpha && alpha < 1.0))
    fail(ErrorCode::InvalidArgument, "collar exponents need 0 < beta < alpha < 1");
}

namespace {

struct CollarGeometry {
  int dim = 1;
  double r = 0.0;
  double lo = 0.0, hi = 0.0;  // 1D
  Point center;               // 2D
  double radius = 0.0;
};

CollarGeometry collar_geometry(const Scene& scene, const Domain& d, double r) {
  CollarGeometry g;
  g.dim = scene.dimension;
  g.r = r;
  const double P = scene.period;
  if (scene.dimension == 1) {
    const auto& iv = std::get<Interval>(d.shape);
    g.lo = iv.lo;
    g.hi = iv.hi;
    std::vector<double> pts;
    for (const auto& o : scene.domains) {
      const auto& ov = std::get<Interval>(o.shape);
      pts.push_back(ov.lo);
      pts.push_back(ov.hi);
    }
    for (double m : {iv.lo, iv.hi}) {
      for (double q : pts) {
        const double dist = std::abs(wrap_delta(q - m, P));
        if (dist > boundary_tolerance(scene) && r >= dist)
          fail(ErrorCode::CollarTooWide, "collar radius reaches another membrane point");
      }
    }
    if (2.0 * r >= P) fail(ErrorCode::CollarTooWide, "collar radius exceeds half the period");
  } else {
    const auto& b = std::get<Ball>(d.shape);
    g.center = b.center;
    g.radius = b.radius;
    if (r >= b.radius) fail(ErrorCode::CollarTooWide, "collar radius exceeds the ball radius");
    if (r >= (P - 2.0 * b.radius) / 2.0)
      fail(ErrorCode::CollarTooWide, "collar wraps around the torus");
    for (const auto& o : scene.domains) {
      if (o.id == d.id) continue;
      const auto& ob = std::get<Ball>(o.shape);
      const double cd = torus_distance(b.center, ob.center, P);
      const double sep = std::min(std::abs(cd - b.radius - ob.radius), std::abs(cd - std::abs(b.radius - ob.radius)));
      if (r >= sep) fail(ErrorCode::CollarTooWide, "collar reaches another membrane");
    }
  }
  return g;
}

detail::Surface point_stop(double p, int tag, double P) {
  detail::Surface s;
  s.p = wrap_coord(p, P);
  s.tag = tag;
  return s;
}

detail::Surface circle_stop(const Point& c, double radius, int tag) {
  detail::Surface s;
  s.center = c;
  s.radius = radius;
  s.tag = tag;
  return s;
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double q = 0.0;
    for (double x : v) q += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(q / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return m;
}

double angle_of(const Point& c, const Point& y, double P) {
  const Vec v = torus_delta(c, y, P);
  double a = std::atan2(v[1], v[0]);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

}  // namespace

ExcursionSummary boundary_excursion_stats(const Scene& scene, const ContainmentTree& tree,
                                          const XSimConfig& config, const DomainId& membrane,
                                          const CollarSpec& collar, std::size_t samples,
                                          const ExcursionOptions& options) {
  collar.validate();
  const Domain& d = scene.domain(membrane);
  const double P = scene.period;
  const double r = std::pow(config.epsilon, collar.alpha);
  const CollarGeometry g = collar_geometry(scene, d, r);
  XSimConfig cfg = config;
  cfg.record_hits = false;
  const double pi2 = 2.0 * std::numbers::pi;

  ExcursionSummary out;
  out.epsilon = config.epsilon;
  out.collar_radius = r;
  out.samples = samples;

  // Collar exit from the membrane; tag 1 = outward surface. In 1D each endpoint has its own collar.
  std::vector<std::vector<detail::Surface>> exit_stops;
  if (g.dim == 1) {
    exit_stops = {{point_stop(g.lo - r, 1, P), point_stop(g.lo + r, 0, P)},
                  {point_stop(g.hi + r, 1, P), point_stop(g.hi - r, 0, P)}};
  } else {
    exit_stops = {{circle_stop(g.center, g.radius + r, 1), circle_stop(g.center, g.radius - r, 0)}};
  }
  std::vector<std::unique_ptr<detail::XEngine>> exit_engines;
  for (auto& st : exit_stops) exit_engines.push_back(std::make_unique<detail::XEngine>(scene, tree, cfg, st));
  std::vector<std::uint8_t> outward(samples, 0);
  std::vector<double> times(samples, 0.0), disp(samples, 0.0);
  parallel_for(samples, [&](std::size_t i) {
    RngStream rng(cfg.rng_seed, i);
    Point x0;
    double theta = 0.0;
    if (g.dim == 1) {
      x0 = Point::line(wrap_coord(i % 2 == 0 ? g.lo : g.hi, P));
    } else {
      theta = pi2 * rng.uniform();
      x0 = Point::plane(wrap_coord(g.center[0] + g.radius * std::cos(theta), P),
                        wrap_coord(g.center[1] + g.radius * std::sin(theta), P));
    }
    const detail::XEngine& exit_eng = *exit_engines[g.dim == 1 ? i % 2 : 0];
    detail::XEngine::State st;
    int hit = exit_eng.start(st, x0, rng, nullptr);
    if (hit < 0) hit = exit_eng.advance(st, std::numeric_limits<double>::infinity(), rng, nullptr);
    outward[i] = exit_eng.surface(hit).tag == 1 ? 1 : 0;
    times[i] = st.t;
    if (g.dim == 2) {
      double da = angle_of(g.center, st.x, P) - theta;
      da = std::remainder(da, pi2);
      disp[i] = g.radius * da;
    }
  });
  for (auto o : outward) out.outward += o;
  if (samples > 0) {
    const double n = static_cast<double>(samples);
    out.p_out = static_cast<double>(out.outward) / n;
    out.p_out_se = std::sqrt(out.p_out * (1.0 - out.p_out) / n);
    const Moments m = moments(times);
    out.mean_exit_time = m.mean;
    out.exit_time_se = m.se;
    double q = 0.0;
    for (double v : disp) q += v * v;
    out.exit_dispersion = std::sqrt(q / n);
  }

  // Escape from the membrane to the outer collar surface.
  const std::size_t ne = options.escape_samples;
  if (ne > 0) {
    std::vector<detail::Surface> stops;
    if (g.dim == 1)
      stops = {point_stop(g.lo - r, 1, P), point_stop(g.hi + r, 1, P)};
    else
      stops = {circle_stop(g.center, g.radius + r, 1)};
    const detail::XEngine eng(scene, tree, cfg, stops);
    std::vector<double> et(ne, 0.0);
    parallel_for(ne, [&](std::size_t i) {
      RngStream rng(cfg.rng_seed, samples + i);
      Point x0;
      if (g.dim == 1) {
        x0 = Point::line(wrap_coord(i % 2 == 0 ? g.lo : g.hi, P));
      } else {
        const double th = pi2 * rng.uniform();
        x0 = Point::plane(wrap_coord(g.center[0] + g.radius * std::cos(th), P),
                          wrap_coord(g.center[1] + g.radius * std::sin(th), P));
      }
      detail::XEngine::State st;
      if (eng.start(st, x0, rng, nullptr) < 0)
        eng.advance(st, std::numeric_limits<double>::infinity(), rng, nullptr);
      et[i] = st.t;
    });
    const Moments m = moments(et);
    out.mean_escape_time = m.mean;
    out.escape_time_se = m.se;
  }

  // Relax inside the trap, then record where the particle first reaches the outer collar surface.
  const std::size_t nd = options.deep_samples;
  if (nd > 0) {
    std::vector<detail::Surface> stops;
    if (g.dim == 1)
      stops = {point_stop(g.lo - r, 0, P), point_stop(g.hi + r, 1, P)};
    else
      stops = {circle_stop(g.center, g.radius + r, 1)};
    const detail::XEngine relax(scene, tree, cfg);
    const detail::XEngine eng(scene, tree, cfg, stops);
    Point x0;
    if (g.dim == 1) {
      const double len = wrap_coord(g.hi - g.lo, P);
      x0 = Point::line(wrap_coord(g.lo + 0.5 * len, P));
    } else {
      x0 = g.center;
    }
    out.deep_exit_angles.assign(nd, 0.0);
    parallel_for(nd, [&](std::size_t i) {
      RngStream rng(cfg.rng_seed, samples + ne + i);
      detail::XEngine::State st;
      relax.start(st, x0, rng, nullptr);
      relax.advance(st, options.relax_time, rng, nullptr);
      const int hit = eng.advance(st, std::numeric_limits<double>::infinity(), rng, nullptr);
      if (g.dim == 1)
        out.deep_exit_angles[i] = static_cast<double>(eng.surface(hit).tag);
      else
        out.deep_exit_angles[i] = angle_of(g.center, st.x, P);
    });
  }
  return out;
}

}  // namespace membrane
