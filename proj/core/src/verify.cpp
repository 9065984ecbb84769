#include "membrane/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "membrane/error.hpp"
#include "membrane/solve.hpp"

namespace membrane {

void ExperimentSpec::validate() const {
  if (epsilons.empty()) fail(ErrorCode::InvalidArgument, "empty epsilon ladder");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      fail(ErrorCode::InvalidArgument, "epsilon ladder must be strictly decreasing");
  }
  if (particles < 1000) fail(ErrorCode::InvalidArgument, "experiments need at least 1000 particles");
  if (starts.empty()) fail(ErrorCode::InvalidArgument, "no start points");
  if (!(tv_tolerance > 0.0)) fail(ErrorCode::InvalidArgument, "tv tolerance must be positive");
}

namespace {

DomainId leaf_or_transient(const std::set<DomainId>& leaves, const DomainId& cell) {
  return leaves.count(cell) ? cell : kTransient;
}

std::set<DomainId> leaf_set(const ContainmentTree& tree) {
  const auto l = tree.leaves();
  return {l.begin(), l.end()};
}

}  // namespace

EndToEndRun end_to_end_run(const Scene& scene, const ContainmentTree& tree, const ExperimentSpec& spec,
                           double epsilon, const Point& start, const MixtureMeasure& predicted) {
  const double t = std::pow(epsilon, -spec.b.to_double());
  Engine engine = spec.engine;
  if (engine == Engine::Auto) engine = scene.dimension == 1 ? Engine::Lattice : Engine::Stepper;
  if (engine == Engine::Lattice && scene.dimension != 1)
    fail(ErrorCode::InvalidArgument, "lattice engine needs a 1D scene");
  const std::set<DomainId> leaves = leaf_set(tree);
  const std::size_t n = spec.particles;
  std::vector<DomainId> cell(n);
  EndToEndRun run;
  run.finals.resize(n);

  if (engine == Engine::Lattice) {
    const LatticePropagator1D lat(scene, tree, epsilon, spec.lattice_cells);
    const std::vector<double> p = lat.distribution(start, t);
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);
    for (std::size_t k = 0; k < n; ++k) {
      RngStream rng(spec.seed, k);
      const double u = rng.uniform() * acc;
      std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      i = std::min(i, p.size() - 1);
      while (p[i] == 0.0 && i > 0) --i;
      cell[k] = lat.cell_domain(i);
      run.finals[k] = Point::line(wrap_coord((static_cast<double>(i) + rng.uniform()) * lat.spacing(),
                                             scene.period));
    }
  } else {
    XSimConfig cfg = spec.sim;
    cfg.epsilon = epsilon;
    cfg.rng_seed = spec.seed;
    cfg.record_hits = false;
    if (cfg.time_budget < t) cfg.time_budget = t;
    parallel_for(n, [&](std::size_t k) {
      const ParticleRunResult r = run_x_to_time(scene, tree, cfg, start, t, k);
      cell[k] = r.final_cell;
      run.finals[k] = r.final_position;
    });
  }

  ComparisonReport& rep = run.report;
  rep.epsilon = epsilon;
  rep.b = spec.b;
  rep.start = start;
  rep.t_final = t;
  rep.particles = n;
  rep.predicted = predicted;
  std::map<DomainId, std::size_t> counts;
  for (const auto& c : cell) ++counts[leaf_or_transient(leaves, c)];
  std::set<DomainId> keys;
  for (const auto& [k, v] : counts) keys.insert(k);
  for (const auto& [k, v] : predicted.weights) keys.insert(k);
  for (const auto& k : keys) {
    const std::size_t c = counts.count(k) ? counts[k] : 0;
    rep.empirical[k] = static_cast<double>(c) / static_cast<double>(n);
    rep.intervals[k] = wilson_interval(c, n);
  }
  rep.tv = tv_distance(rep.empirical, predicted.weights);
  rep.pass = rep.tv <= spec.tv_tolerance;
  return run;
}

std::vector<ComparisonReport> end_to_end(const Scene& scene, const ContainmentTree& tree,
                                         const ExperimentSpec& spec) {
  spec.validate();
  HittingOracle oracle = spec.oracle;
  if (!oracle)
    oracle = scene.dimension == 1 ? make_analytic_oracle(scene, tree)
                                  : make_fd_oracle(scene, tree, spec.fd_spacing);
  std::vector<ComparisonReport> out;
  for (const auto& x : spec.starts) {
    const MixtureMeasure pred = predict(scene, tree, spec.b, x, oracle);
    for (double eps : spec.epsilons) out.push_back(end_to_end_run(scene, tree, spec, eps, x, pred).report);
  }
  return out;
}

bool tv_non_increasing(const std::vector<double>& tv, double slack) {
  for (std::size_t i = 1; i < tv.size(); ++i)
    if (tv[i] > tv[i - 1] + slack) return false;
  return true;
}

TestResult within_cell_uniformity(const Scene& scene, const std::vector<Point>& samples,
                                  const DomainId& leaf, int bins) {
  if (bins < 2) fail(ErrorCode::InvalidArgument, "need at least two bins");
  const Domain& d = scene.domain(leaf);
  const double P = scene.period;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  std::size_t used = 0;
  if (scene.dimension == 1) {
    const auto& iv = std::get<Interval>(d.shape);
    const double len = wrap_coord(iv.hi - iv.lo, P);
    for (const auto& x : samples) {
      if (!inside(scene, d, x)) continue;
      const double u = wrap_coord(x[0] - iv.lo, P) / len;
      counts[std::min(static_cast<std::size_t>(u * bins), counts.size() - 1)] += 1.0;
      ++used;
    }
  } else {
    const auto& b = std::get<Ball>(d.shape);
    const int rings = bins >= 4 ? 2 : 1;
    const int sectors = bins / rings;
    counts.assign(static_cast<std::size_t>(rings * sectors), 0.0);
    for (const auto& x : samples) {
      if (!inside(scene, d, x)) continue;
      const Vec v = torus_delta(b.center, x, P);
      const double rr = (v[0] * v[0] + v[1] * v[1]) / (b.radius * b.radius);
      double a = std::atan2(v[1], v[0]);
      if (a < 0.0) a += 2.0 * std::numbers::pi;
      const int ri = std::min(rings - 1, static_cast<int>(rr * rings));
      const int si = std::min(sectors - 1, static_cast<int>(a / (2.0 * std::numbers::pi) * sectors));
      counts[static_cast<std::size_t>(ri * sectors + si)] += 1.0;
      ++used;
    }
  }
  if (used < 50) fail(ErrorCode::InsufficientSamples, "fewer than 50 samples in '" + leaf + "'");
  const std::vector<double> expected(counts.size(), static_cast<double>(used) / static_cast<double>(counts.size()));
  return chi_square(counts, expected);
}

double closure_occupancy(const Scene& scene, const ContainmentTree& tree, const XSimConfig& config,
                         const DomainId& d, const Point& x, double t, std::size_t samples) {
  if (samples == 0) fail(ErrorCode::InvalidArgument, "need at least one sample");
  XSimConfig cfg = config;
  cfg.record_hits = false;
  if (cfg.time_budget < t) cfg.time_budget = t;
  std::vector<std::uint8_t> in(samples, 0);
  parallel_for(samples, [&](std::size_t k) {
    const ParticleRunResult r = run_x_to_time(scene, tree, cfg, x, t, k);
    in[k] = (r.final_cell == d || tree.is_ancestor(d, r.final_cell)) ? 1 : 0;
  });
  double s = 0.0;
  for (auto v : in) s += v;
  return s / static_cast<double>(samples);
}

LemmaReport lemma_suite(const Scene& scene, const ContainmentTree& tree, const XSimConfig& config,
                        const DomainId& membrane, const std::vector<double>& epsilons,
                        const CollarSpec& collar, std::size_t samples, const LemmaOptions& options) {
  collar.validate();
  if (epsilons.size() < 2) fail(ErrorCode::InvalidArgument, "lemma suite needs at least two epsilons");
  LemmaReport rep;
  std::vector<double> e, pout, texit, tesc;
  for (double eps : epsilons) {
    XSimConfig cfg = config;
    cfg.epsilon = eps;
    ExcursionOptions eo;
    eo.escape_samples = options.escape_samples;
    LemmaRow row;
    row.epsilon = eps;
    row.excursion = boundary_excursion_stats(scene, tree, cfg, membrane, collar, samples, eo);
    e.push_back(eps);
    pout.push_back(row.excursion.p_out);
    texit.push_back(row.excursion.mean_exit_time);
    tesc.push_back(row.excursion.mean_escape_time);
    rep.rows.push_back(row);
  }
  rep.outward_fit = loglog_fit(e, pout);
  rep.exit_time_fit = loglog_fit(e, texit);
  if (options.escape_samples > 0) rep.escape_time_fit = loglog_fit(e, tesc);
  if (options.return_epsilon > 0.0 && options.return_samples > 0) {
    XSimConfig cfg = config;
    cfg.epsilon = options.return_epsilon;
    const Domain& d = scene.domain(membrane);
    Point x;
    if (scene.dimension == 1) {
      const auto& iv = std::get<Interval>(d.shape);
      x = Point::line(wrap_coord(iv.lo + 0.5 * wrap_coord(iv.hi - iv.lo, scene.period), scene.period));
    } else {
      x = std::get<Ball>(d.shape).center;
    }
    const double t = std::pow(options.return_epsilon, -options.return_b.to_double());
    rep.return_probability = closure_occupancy(scene, tree, cfg, membrane, x, t, options.return_samples);
    rep.return_se = std::sqrt(rep.return_probability * (1.0 - rep.return_probability) /
                              static_cast<double>(options.return_samples));
  }
  return rep;
}

TraceReport trace_consistency(const Scene& scene, const ContainmentTree& tree, const XSimConfig& xcfg,
                              const YSimConfig& ycfg, const HittingQuery& query, std::size_t samples) {
  validate_query(tree, query);
  if (samples == 0) fail(ErrorCode::InvalidArgument, "need at least one sample");
  const auto* x0 = std::get_if<Point>(&query.start);
  if (!x0) fail(ErrorCode::InvalidArgument, "trace comparison needs a point start");
  XSimConfig cfg = xcfg;
  cfg.record_hits = false;
  cfg.trace_excluded = query.redistribution;
  std::vector<DomainId> hit(samples);
  parallel_for(samples, [&](std::size_t k) {
    hit[k] = run_x_until_hit(scene, tree, cfg, *x0, query.targets, k).target;
  });
  TraceReport rep;
  for (const auto& t : query.targets) rep.x_split[t] = 0.0;
  const double w = 1.0 / static_cast<double>(samples);
  for (const auto& h : hit) rep.x_split[h] += w;
  double se = 0.0;
  for (const auto& [k, p] : rep.x_split) se = std::max(se, std::sqrt(p * (1.0 - p) * w));
  rep.x_tolerance = 3.0 * std::max(se, w);
  const HittingDistribution y = estimate_y_hitting(scene, tree, query, ycfg, samples);
  rep.y_split = y.mass;
  rep.y_tolerance = y.tolerance;
  rep.tv = tv_distance(rep.x_split, rep.y_split);
  return rep;
}

}  // namespace membrane
