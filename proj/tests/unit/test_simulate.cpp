#include <gtest/gtest.h>

#include <cmath>

#include "membrane/error.hpp"
#include "membrane/simulate.hpp"
#include "membrane/stats.hpp"
#include "support/scenes.hpp"

using namespace membrane;
using namespace membrane::testing;

namespace {

double binomial_se(double p, std::size_t n) { return std::sqrt(std::max(p * (1 - p), 1e-4) / static_cast<double>(n)); }

}  // namespace

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  RngStream a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int i = 0; i < 10; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(a.uniform(), c.uniform());
  RngStream a2(7, 3);
  EXPECT_NE(a2.uniform(), d.uniform());
}

TEST(Rng, ParallelForCoversEveryIndexOnce) {
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("x");
               }),
               std::runtime_error);
}

TEST(StepperX, JumpSizeDefaultsAndValidation) {
  const Scene a = scene_a();
  EXPECT_NEAR(default_jump_delta(a, 0.05), 0.01, 1e-15);
  XSimConfig cfg;
  cfg.epsilon = 0.05;
  cfg.jump_delta = 0.2;
  EXPECT_THROW(effective_jump_delta(a, cfg), Error);
  cfg.jump_delta = 0.001;
  EXPECT_DOUBLE_EQ(effective_jump_delta(a, cfg), 0.001);
}

TEST(StepperX, DeterministicPerSeedAndParticle) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  XSimConfig cfg;
  cfg.epsilon = 0.2;
  cfg.rng_seed = 99;
  const auto r1 = run_x_to_time(s, t, cfg, Point::line(0.425), 0.2, 5);
  const auto r2 = run_x_to_time(s, t, cfg, Point::line(0.425), 0.2, 5);
  const auto r3 = run_x_to_time(s, t, cfg, Point::line(0.425), 0.2, 6);
  EXPECT_EQ(r1.final_position, r2.final_position);
  EXPECT_EQ(r1.hit_log.size(), r2.hit_log.size());
  EXPECT_EQ(r1.steps, r2.steps);
  EXPECT_NE(r1.final_position, r3.final_position);
}

TEST(StepperX, HitLogReplaysCellAndOccupationIsConserved) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  XSimConfig cfg;
  cfg.epsilon = 0.3;
  for (std::uint64_t p = 0; p < 40; ++p) {
    const Point x0 = Point::line(0.025 * static_cast<double>(p) + 0.0123);
    const auto r = run_x_to_time(s, t, cfg, x0, 0.5, p);
    DomainId cell = locate_cell(s, t, x0);
    double last = 0.0;
    for (const auto& e : r.hit_log) {
      EXPECT_GE(e.time, last);
      last = e.time;
      // Every touch is logged, including ones that land back on the same side.
      EXPECT_TRUE(cell == e.membrane || cell == t.parent(e.membrane)) << e.membrane << " from " << cell;
      cell = e.side > 0 ? e.membrane : t.parent(e.membrane);
    }
    EXPECT_EQ(cell, r.final_cell);
    EXPECT_EQ(locate_cell(s, t, r.final_position), r.final_cell);
    double occ = 0.0;
    for (const auto& [id, v] : r.occupation_time) occ += v;
    EXPECT_NEAR(occ, 0.5, 1e-9);
    EXPECT_NEAR(r.elapsed, 0.5, 1e-12);
  }
}

TEST(StepperX, TimeBudget) {
  const Scene s = scene_a();
  const auto t = build_tree(s);
  XSimConfig cfg;
  cfg.time_budget = 1.0;
  try {
    run_x_to_time(s, t, cfg, Point::line(0.5), 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TimeBudgetExceeded);
  }
}

TEST(StepperX, AbsorbedHitsMatchTransmissionForTwoJumpSizes) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  const std::vector<AbsorbingPoint> pts{{"a", 0.12}, {"b", 0.47}};
  const double eps = 0.2;
  const auto want = transmission_hitting_1d(s, eps, pts, 0.32).at("b");
  const std::size_t n = 3000;
  for (double delta : {0.0, 0.002}) {
    XSimConfig cfg;
    cfg.epsilon = eps;
    cfg.jump_delta = delta;
    cfg.record_hits = false;
    std::vector<int> hit_b(n, 0);
    parallel_for(n, [&](std::size_t i) {
      hit_b[i] = run_x_until_absorbed(s, t, cfg, Point::line(0.32), pts, i).target == "b";
    });
    double p = 0.0;
    for (int h : hit_b) p += h;
    p /= static_cast<double>(n);
    EXPECT_NEAR(p, want, 4 * binomial_se(want, n)) << "delta " << delta;
  }
}

TEST(StepperX, BridgeDoesNotReachStopsBehindAMembrane) {
  const Scene a = scene_a();
  const auto t = build_tree(a);
  const std::vector<AbsorbingPoint> pts{{"left", 0.25}, {"right", 0.72}};
  const double want = transmission_hitting_1d(a, 0.05, pts, 0.45).at("left");
  XSimConfig cfg;
  cfg.epsilon = 0.05;
  cfg.record_hits = false;
  const std::size_t n = 30000;
  std::vector<int> left(n, 0);
  parallel_for(n, [&](std::size_t i) {
    left[i] = run_x_until_absorbed(a, t, cfg, Point::line(0.45), pts, i).target == "left";
  });
  double p = 0.0;
  for (int h : left) p += h;
  p /= static_cast<double>(n);
  EXPECT_NEAR(p, want, 4 * binomial_se(want, n));
}

TEST(StepperX, MembraneStartJumpsInwardWithSkewProbability) {
  const Scene a = scene_a();
  const auto t = build_tree(a);
  const double eps = 0.25;
  XSimConfig cfg;
  cfg.epsilon = eps;
  const std::size_t n = 4000;
  std::vector<int> in(n, 0);
  parallel_for(n, [&](std::size_t i) {
    const auto r = run_x_until_absorbed(a, t, cfg, Point::line(0.7), {{"in", 0.6}, {"out", 0.8}}, i);
    in[i] = r.target == "in";
  });
  double p = 0.0;
  for (int v : in) p += v;
  p /= static_cast<double>(n);
  EXPECT_NEAR(p, 1.0 / (1.0 + eps), 4 * binomial_se(1.0 / (1.0 + eps), n));
}

TEST(StepperX, UntilHitStopsOnTargetMembrane) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  XSimConfig cfg;
  cfg.epsilon = 0.1;
  const auto r = run_x_until_hit(s, t, cfg, Point::line(0.425), {"D6", "D5"}, 3);
  EXPECT_TRUE(r.target == "D6" || r.target == "D5");
  EXPECT_NEAR(std::abs(signed_distance(s, r.target, r.position)), 0.0, 1e-9);
  EXPECT_GT(r.time, 0.0);
}

TEST(StepperY, MatchesExactSolverIn1D) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  HittingQuery q;
  q.ambient = "D7";
  q.redistribution = {"D3"};
  q.targets = {"D6", "D5"};
  q.start = Point::line(0.675);
  const auto exact = hitting_1d(s, t, q);
  YSimConfig cfg;
  const auto mc = estimate_y_hitting(s, t, q, cfg, 4000);
  EXPECT_NEAR(mc.total(), 1.0, 1e-12);
  for (const auto& id : q.targets) EXPECT_NEAR(mc.at(id), exact.at(id), 4.0 / 3.0 * mc.tolerance) << id;
}

TEST(StepperY, RedistributionIsUniformOnTheCircle) {
  const Scene s = scene_d();
  const auto t = build_tree(s);
  HittingQuery q;
  q.ambient = "O";
  q.redistribution = {"A"};
  q.targets = {"B"};
  q.start = CollapsedStart{"A"};
  std::vector<double> angles;
  YSimConfig cfg;
  cfg.on_redistribute = [&](const DomainId& id, const Point& y) {
    EXPECT_EQ(id, "A");
    EXPECT_NEAR(signed_distance(s, "A", y), 0.0, 1e-12);
    const Vec v = torus_delta(Point::plane(0.30, 0.45), y, 1.0);
    angles.push_back(std::atan2(v[1], v[0]) + M_PI);
  };
  for (std::uint64_t p = 0; p < 400 && angles.size() < 3000; ++p) run_y_until_hit(s, t, q, cfg, p);
  ASSERT_GE(angles.size(), 400u);
  std::vector<double> counts(12, 0.0);
  for (double a : angles) counts[std::min<std::size_t>(11, static_cast<std::size_t>(a / (2 * M_PI) * 12))] += 1;
  const std::vector<double> expected(12, static_cast<double>(angles.size()) / 12);
  EXPECT_GT(chi_square(counts, expected).p_value, 0.001);
}

TEST(StepperY, RedistributionIsEvenOverEndpointsIn1D) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  HittingQuery q;
  q.ambient = "D7";
  q.redistribution = {"D5"};
  q.targets = {"D6", "D3"};
  q.start = CollapsedStart{"D5"};
  int lo = 0, hi = 0;
  YSimConfig cfg;
  cfg.on_redistribute = [&](const DomainId&, const Point& y) { (std::abs(y[0] - 0.45) < 1e-12 ? lo : hi) += 1; };
  for (std::uint64_t p = 0; p < 2000; ++p) run_y_until_hit(s, t, q, cfg, p);
  const double n = lo + hi;
  EXPECT_NEAR(lo / n, 0.5, 4 * std::sqrt(0.25 / n));
}

TEST(Lattice, InvariantOccupationMatchesDensity) {
  const Scene a = scene_a();
  const auto t = build_tree(a);
  const double eps = 0.05;
  LatticePropagator1D lat(a, t, eps, 400);
  const auto dist = lat.distribution(Point::line(0.1), 200.0);
  double in = 0.0, total = 0.0;
  for (std::size_t i = 0; i < lat.cells(); ++i) {
    total += dist[i];
    if (lat.cell_domain(i) == "D") in += dist[i];
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  const double want = (0.4 / eps) / (0.4 / eps + 0.6);
  EXPECT_NEAR(in, want, 1e-6);
  const auto occ = lat.expected_occupation(Point::line(0.1), 1.0);
  double s = 0.0;
  for (double v : occ) s += v;
  EXPECT_NEAR(s, 1.0, 1e-9);
}

TEST(Lattice, CellsAlignWithMembranes) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  LatticePropagator1D lat(s, t, 0.1, 400);
  EXPECT_GE(lat.cells(), 400u);
  for (std::size_t i = 0; i < lat.cells(); ++i)
    EXPECT_EQ(lat.cell_domain(i), locate_cell(s, t, Point::line(lat.cell_center(i))));
}

TEST(Lattice, AgreesWithStepperAtShortHorizon) {
  const Scene s = scene_b();
  const auto t = build_tree(s);
  const double eps = 0.2, horizon = 0.05;
  const Point x0 = Point::line(0.42);
  LatticePropagator1D lat(s, t, eps, 800);
  const auto dist = lat.distribution(x0, horizon);
  std::map<std::string, double> lp, sp;
  for (std::size_t i = 0; i < lat.cells(); ++i) lp[lat.cell_domain(i)] += dist[i];
  const std::size_t n = 4000;
  std::vector<DomainId> cells(n);
  XSimConfig cfg;
  cfg.epsilon = eps;
  cfg.record_hits = false;
  parallel_for(n, [&](std::size_t i) { cells[i] = run_x_to_time(s, t, cfg, x0, horizon, i).final_cell; });
  for (const auto& c : cells) sp[c] += 1.0 / static_cast<double>(n);
  EXPECT_LT(tv_distance(lp, sp), 0.03);
}

TEST(Lattice, SamplesFollowDistribution) {
  const Scene a = scene_a();
  const auto t = build_tree(a);
  LatticePropagator1D lat(a, t, 0.1, 400);
  const auto pts = lat.sample(Point::line(0.5), 0.05, 20000, 3);
  const auto dist = lat.distribution(Point::line(0.5), 0.05);
  double in = 0.0, want = 0.0;
  for (const auto& p : pts) in += inside(a, a.domains[0], p) ? 1.0 : 0.0;
  for (std::size_t i = 0; i < lat.cells(); ++i)
    if (lat.cell_domain(i) == "D") want += dist[i];
  EXPECT_NEAR(in / 20000.0, want, 4 * binomial_se(want, 20000));
  EXPECT_EQ(lat.sample(Point::line(0.5), 0.05, 10, 3), lat.sample(Point::line(0.5), 0.05, 10, 3));
}

TEST(Excursion, OutwardFractionAndDeepSymmetry) {
  const Scene a = scene_a();
  const auto t = build_tree(a);
  XSimConfig cfg;
  cfg.epsilon = 0.1;
  ExcursionOptions opt;
  opt.deep_samples = 1000;
  opt.escape_samples = 500;
  const auto r = boundary_excursion_stats(a, t, cfg, "D", CollarSpec{0.5, 0.25}, 4000, opt);
  const double want = 0.1 / 1.1;
  EXPECT_NEAR(r.p_out, want, 4 * binomial_se(want, 4000));
  EXPECT_GT(r.mean_exit_time, 0.0);
  EXPECT_GT(r.mean_escape_time, r.mean_exit_time);
  ASSERT_EQ(r.deep_exit_angles.size(), 1000u);
  double hi = 0.0;
  for (double v : r.deep_exit_angles) hi += v;
  EXPECT_NEAR(hi / 1000.0, 0.5, 4 * std::sqrt(0.25 / 1000));
}

TEST(Excursion, CollarValidation) {
  const Scene a = scene_a();
  const auto t = build_tree(a);
  XSimConfig cfg;
  cfg.epsilon = 0.1;
  EXPECT_THROW(boundary_excursion_stats(a, t, cfg, "D", CollarSpec{0.25, 0.5}, 10), Error);
  cfg.epsilon = 0.5;
  try {
    boundary_excursion_stats(a, t, cfg, "D", CollarSpec{0.5, 0.25}, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CollarTooWide);
  }
}
