#include "membrane_cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "membrane/membrane.hpp"
#include "membrane_cli/scene_file.hpp"

#ifndef MEMBRANE_VERSION
#define MEMBRANE_VERSION "0.0.0"
#endif

namespace membrane::cli {

using nlohmann::json;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MEMBRANE_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && end != env) return v;
    fail(ErrorCode::InvalidArgument, std::string("MEMBRANE_SEED is not an integer: '") + env + "'");
  }
  return 42;
}

std::string manifest_timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && end != env) t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_manifest(const std::string& command, const std::string& scene_path, const json& parameters,
                   std::uint64_t seed) {
  json m;
  m["command"] = command;
  m["scene"] = scene_path;
  m["parameters"] = parameters;
  m["seed"] = seed;
  m["version"] = MEMBRANE_VERSION;
  m["timestamp"] = manifest_timestamp();
  return m;
}

namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Usage(what + ": not a number: '" + s + "'");
  }
}

Point parse_point(const std::string& s, int dim) {
  const auto parts = split(s, ',');
  if (static_cast<int>(parts.size()) != dim)
    throw Usage("--start expects " + std::to_string(dim) + " comma-separated coordinate(s), got '" + s + "'");
  if (dim == 1) return Point::line(to_double(parts[0], "--start"));
  return Point::plane(to_double(parts[0], "--start"), to_double(parts[1], "--start"));
}

std::vector<double> parse_doubles(const std::string& s, const std::string& what) {
  std::vector<double> v;
  for (const auto& p : split(s, ',')) v.push_back(to_double(p, what));
  if (v.empty()) throw Usage(what + ": empty list");
  return v;
}

std::vector<ExponentQ> parse_exponents(const std::string& s) {
  std::vector<ExponentQ> v;
  for (const auto& p : split(s, ',')) v.push_back(ExponentQ::parse(p));
  if (v.empty()) throw Usage("--time-exponent: empty list");
  return v;
}

std::string fmt_point(const Point& p) {
  return p.dim == 1 ? fmt::format("{}", p[0]) : fmt::format("({}, {})", p[0], p[1]);
}

json point_json(const Point& p) {
  return p.dim == 1 ? json(p[0]) : json::array({p[0], p[1]});
}

std::string fmt_mixture(const std::map<DomainId, double>& w) {
  std::string s = "{";
  bool first = true;
  for (const auto& [k, v] : w) {
    s += fmt::format("{}{}: {:.6f}", first ? "" : ", ", k, v);
    first = false;
  }
  return s + "}";
}

void write_file(const std::string& path, const std::string& content) {
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!dir.empty()) std::filesystem::create_directories(dir, ec);
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  f << content;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  std::string scene;
  std::string b;
  bool json = false;
};

json classify_json(const Scene& scene, const ContainmentTree& tree, const Classification& cls) {
  json j;
  j["time_exponent"] = cls.time_exponent.to_string();
  json nodes = json::array();
  for (const auto& id : tree.ids()) {
    json n;
    n["id"] = id;
    n["parent"] = tree.is_root(id) ? json(nullptr) : json(tree.parent(id));
    n["rank"] = tree.rank(id);
    n["permeability_exponent"] = tree.exponent(id).to_string();
    n["order_exponent"] = cls.order.at(id).to_string();
    n["status"] = tree.is_root(id) ? "root" : (cls.is_trapping(id) ? "trapping" : "non-trapping");
    n["characteristic"] = characteristic_domain(tree, cls, id);
    json chains = json::array();
    for (const auto& c : chains_to(tree, id))
      chains.push_back({{"chain", format_chain(c)}, {"order_exponent", c.order_exponent.to_string()}});
    n["chains"] = chains;
    nodes.push_back(n);
  }
  j["domains"] = nodes;
  json adm = json::object();
  std::set<DomainId> chars;
  for (const auto& id : tree.ids()) chars.insert(characteristic_domain(tree, cls, id));
  for (const auto& d : chars) {
    json a = json::array();
    for (const auto& c : admissible_chains(tree, cls, d)) a.push_back(format_chain(c));
    adm[d] = a;
  }
  j["admissible_chains"] = adm;
  j["dimension"] = scene.dimension;
  return j;
}

int cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const Scene scene = load_scene(a.scene);
  const ContainmentTree tree = build_tree(scene);
  const Classification cls = classify(tree, ExponentQ::parse(a.b));
  const json j = classify_json(scene, tree, cls);
  if (a.json) {
    out << j.dump(2) << "\n";
    return kOk;
  }
  fmt::print(out, "scene {} (dimension {}, period {}, {} domains)\n", a.scene, scene.dimension, scene.period,
             scene.domains.size());
  fmt::print(out, "time exponent b = {}\n\n", cls.time_exponent.to_string());
  fmt::print(out, "{:<12} {:<12} {:>4} {:>6} {:>6}  {:<13} {}\n", "domain", "parent", "rank", "a", "m",
             "status", "characteristic");
  for (const auto& n : j["domains"]) {
    fmt::print(out, "{:<12} {:<12} {:>4} {:>6} {:>6}  {:<13} {}\n", n["id"].get<std::string>(),
               n["parent"].is_null() ? "-" : n["parent"].get<std::string>(), n["rank"].get<int>(),
               n["permeability_exponent"].get<std::string>(), n["order_exponent"].get<std::string>(),
               n["status"].get<std::string>(), n["characteristic"].get<std::string>());
  }
  fmt::print(out, "\nchains\n");
  for (const auto& n : j["domains"])
    for (const auto& c : n["chains"])
      fmt::print(out, "  {:<40} order {}\n", c["chain"].get<std::string>(), c["order_exponent"].get<std::string>());
  fmt::print(out, "\nadmissible chains\n");
  for (const auto& [d, list] : j["admissible_chains"].items()) {
    fmt::print(out, "  {}:", d);
    if (list.empty()) fmt::print(out, " none");
    for (const auto& c : list) fmt::print(out, " {}", c.get<std::string>());
    fmt::print(out, "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string scene;
  std::string b;
  std::string start;
  std::string oracle = "analytic";
  double spacing = 0.01;
  std::size_t particles = 10000;
  std::optional<std::uint64_t> seed;
  bool json = false;
};

json trace_json(const PredictionTrace& t) {
  json j;
  j["start"] = describe(t.start);
  j["characteristic"] = t.characteristic;
  j["trapping_children"] = t.trapping_children;
  j["non_trapping_children"] = t.non_trapping_children;
  json adm = json::array();
  for (const auto& c : t.admissible) adm.push_back(format_chain(c));
  j["admissible"] = adm;
  if (t.query) j["query"] = describe(*t.query);
  if (t.resolved) {
    j["hitting"] = t.resolved->mass;
    j["hitting_tolerance"] = t.resolved->tolerance;
  }
  json br = json::array();
  for (const auto& b : t.branches)
    br.push_back({{"target", b.target}, {"entry", point_json(b.entry)}, {"weight", b.weight}, {"trace", trace_json(b.trace)}});
  j["branches"] = br;
  j["result"] = t.result.weights;
  return j;
}

void print_trace(std::ostream& out, const PredictionTrace& t, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  fmt::print(out, "{}start {}: characteristic {}\n", pad, describe(t.start), t.characteristic);
  std::string tr, nt;
  for (const auto& d : t.trapping_children) tr += (tr.empty() ? "" : ",") + d;
  for (const auto& d : t.non_trapping_children) nt += (nt.empty() ? "" : ",") + d;
  fmt::print(out, "{}  trapping children {{{}}}, non-trapping {{{}}}\n", pad, tr, nt);
  if (!t.admissible.empty()) {
    fmt::print(out, "{}  admissible chains:", pad);
    for (const auto& c : t.admissible) fmt::print(out, " {}", format_chain(c));
    fmt::print(out, "\n");
  }
  if (t.query) fmt::print(out, "{}  query {}\n", pad, describe(*t.query));
  if (t.resolved)
    fmt::print(out, "{}  hitting law {} (tolerance {:.2g})\n", pad, fmt_mixture(t.resolved->mass), t.resolved->tolerance);
  for (const auto& b : t.branches) {
    fmt::print(out, "{}  -> {} at {} weight {:.6f}\n", pad, b.target, fmt_point(b.entry), b.weight);
    print_trace(out, b.trace, depth + 2);
  }
  fmt::print(out, "{}  = {}\n", pad, fmt_mixture(t.result.weights));
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Scene scene = load_scene(a.scene);
  const ContainmentTree tree = build_tree(scene);
  const ExponentQ b = ExponentQ::parse(a.b);
  const Point x = parse_point(a.start, scene.dimension);
  HittingOracle oracle;
  if (a.oracle == "analytic") {
    if (scene.dimension != 1) throw Usage("--oracle analytic is only available for 1D scenes");
    oracle = make_analytic_oracle(scene, tree);
  } else if (a.oracle == "fd") {
    if (scene.dimension != 2) throw Usage("--oracle fd is only available for 2D scenes");
    oracle = make_fd_oracle(scene, tree, a.spacing);
  } else {
    if (a.particles == 0) throw Usage("--particles must be positive");
    YSimConfig y;
    y.rng_seed = resolve_seed(a.seed);
    oracle = make_mc_oracle(scene, tree, y, a.particles);
  }
  const PredictionReport rep = predict_report(scene, tree, b, x, oracle);
  if (a.json) {
    json j;
    j["time_exponent"] = b.to_string();
    j["start"] = point_json(x);
    j["mixture"] = rep.mixture.weights;
    j["trace"] = trace_json(rep.trace);
    out << j.dump(2) << "\n";
    return kOk;
  }
  fmt::print(out, "time exponent b = {}, start {}, oracle {}\n", b.to_string(), fmt_point(x), a.oracle);
  fmt::print(out, "mixture {}\n\nrecursion\n", fmt_mixture(rep.mixture.weights));
  print_trace(out, rep.trace, 1);
  return kOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scene;
  double epsilon = 0.05;
  std::string b;
  double t_final = 0.0;
  std::string start;
  long long particles = 1000;
  std::optional<std::uint64_t> seed;
  double delta = 0.0;
  double max_step = 1e-2;
  std::string engine = "stepper";
  int bins = 50;
  bool events = false;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.particles <= 0) throw Usage("--particles must be positive");
  if (a.bins <= 0) throw Usage("--bins must be positive");
  if (a.b.empty() == (a.t_final <= 0.0)) throw Usage("give exactly one of --time-exponent and --t-final");
  const Scene scene = load_scene(a.scene);
  const ContainmentTree tree = build_tree(scene);
  const Point x = parse_point(a.start, scene.dimension);
  const std::uint64_t seed = resolve_seed(a.seed);
  const double t = a.b.empty() ? a.t_final : std::pow(a.epsilon, -ExponentQ::parse(a.b).to_double());
  const auto n = static_cast<std::size_t>(a.particles);
  const double P = scene.period;

  std::vector<Point> finals(n);
  std::vector<DomainId> cells(n);
  std::map<DomainId, double> occupation;
  for (const auto& id : tree.ids()) occupation[id] = 0.0;
  std::vector<std::vector<HitEvent>> events;

  if (a.engine == "lattice") {
    if (a.events) throw Usage("--events needs the stepper engine");
    const LatticePropagator1D lat(scene, tree, a.epsilon);
    finals = lat.sample(x, t, n, seed);
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = std::min(lat.cells() - 1, static_cast<std::size_t>(wrap_coord(finals[k][0], P) / lat.spacing()));
      cells[k] = lat.cell_domain(i);
    }
    const auto occ = lat.expected_occupation(x, t);
    for (std::size_t i = 0; i < occ.size(); ++i) occupation[lat.cell_domain(i)] += occ[i];
  } else if (a.engine == "stepper") {
    XSimConfig cfg;
    cfg.epsilon = a.epsilon;
    cfg.jump_delta = a.delta;
    cfg.max_step = a.max_step;
    cfg.rng_seed = seed;
    cfg.record_hits = a.events;
    cfg.time_budget = std::max(cfg.time_budget, t);
    std::vector<std::map<DomainId, double>> occ(n);
    if (a.events) events.resize(n);
    parallel_for(n, [&](std::size_t k) {
      ParticleRunResult r = run_x_to_time(scene, tree, cfg, x, t, k);
      finals[k] = r.final_position;
      cells[k] = r.final_cell;
      occ[k] = std::move(r.occupation_time);
      if (a.events) events[k] = std::move(r.hit_log);
    });
    for (const auto& m : occ)
      for (const auto& [id, v] : m) occupation[id] += v / static_cast<double>(n);
  } else {
    throw Usage("--engine must be stepper or lattice");
  }

  std::string hist;
  const double w = P / a.bins;
  if (scene.dimension == 1) {
    std::vector<std::size_t> c(static_cast<std::size_t>(a.bins), 0);
    for (const auto& p : finals) ++c[std::min(c.size() - 1, static_cast<std::size_t>(wrap_coord(p[0], P) / w))];
    hist = "bin_lo,bin_hi,count,fraction\n";
    for (std::size_t i = 0; i < c.size(); ++i)
      hist += fmt::format("{},{},{},{}\n", static_cast<double>(i) * w, static_cast<double>(i + 1) * w, c[i],
                          static_cast<double>(c[i]) / static_cast<double>(n));
  } else {
    const auto nb = static_cast<std::size_t>(a.bins);
    std::vector<std::size_t> c(nb * nb, 0);
    for (const auto& p : finals) {
      const auto ix = std::min(nb - 1, static_cast<std::size_t>(wrap_coord(p[0], P) / w));
      const auto iy = std::min(nb - 1, static_cast<std::size_t>(wrap_coord(p[1], P) / w));
      ++c[ix * nb + iy];
    }
    hist = "x_lo,y_lo,count,fraction\n";
    for (std::size_t ix = 0; ix < nb; ++ix)
      for (std::size_t iy = 0; iy < nb; ++iy)
        hist += fmt::format("{},{},{},{}\n", static_cast<double>(ix) * w, static_cast<double>(iy) * w,
                            c[ix * nb + iy], static_cast<double>(c[ix * nb + iy]) / static_cast<double>(n));
  }

  std::string occ_csv = "cell,mean_time,fraction\n";
  for (const auto& [id, v] : occupation) occ_csv += fmt::format("{},{},{}\n", id, v, v / t);

  const auto leaf_list = tree.leaves();
  const std::set<DomainId> leaves(leaf_list.begin(), leaf_list.end());
  std::map<DomainId, std::size_t> lc;
  for (const auto& l : leaves) lc[l] = 0;
  lc[kTransient] = 0;
  for (const auto& c : cells) ++lc[leaves.count(c) ? c : kTransient];
  std::string leaves_csv = "leaf,count,fraction\n";
  for (const auto& [id, c] : lc)
    leaves_csv += fmt::format("{},{},{}\n", id, c, static_cast<double>(c) / static_cast<double>(n));

  json params = {{"epsilon", a.epsilon}, {"t_final", t}, {"start", point_json(x)}, {"particles", n},
                 {"engine", a.engine}, {"bins", a.bins}, {"max_step", a.max_step}};
  if (!a.b.empty()) params["time_exponent"] = a.b;
  if (a.engine == "stepper") {
    XSimConfig probe;
    probe.epsilon = a.epsilon;
    probe.jump_delta = a.delta;
    params["jump_delta"] = effective_jump_delta(scene, probe);
  }
  write_file(a.out + "histogram.csv", hist);
  write_file(a.out + "occupation.csv", occ_csv);
  write_file(a.out + "leaves.csv", leaves_csv);
  if (a.events) {
    std::string ev = "particle,time,event,membrane,position\n";
    for (std::size_t k = 0; k < events.size(); ++k)
      for (const auto& e : events[k])
        ev += fmt::format("{},{},{},{},{}\n", k, e.time, e.side > 0 ? "in" : "out", e.membrane,
                          e.position.dim == 1 ? fmt::format("{}", e.position[0])
                                              : fmt::format("{} {}", e.position[0], e.position[1]));
    write_file(a.out + "events.csv", ev);
  }
  write_file(a.out + "manifest.json", make_manifest("simulate", a.scene, params, seed).dump(2) + "\n");
  fmt::print(out, "simulated {} particles to t = {} ({} engine)\n", n, t, a.engine);
  fmt::print(out, "leaf fractions:");
  for (const auto& [id, c] : lc) fmt::print(out, " {}={:.4f}", id, static_cast<double>(c) / static_cast<double>(n));
  fmt::print(out, "\nwrote {}{{histogram,occupation,leaves{},manifest}}\n", a.out, a.events ? ",events" : "");
  return kOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::string scene;
  std::string suite = "all";
  std::string epsilons;
  std::string b = "1/2,3/2,5/2";
  std::vector<std::string> starts;
  std::size_t particles = 10000;
  std::optional<std::uint64_t> seed;
  double tv_tolerance = 0.05;
  std::string engine = "auto";
  std::string membrane;
  double alpha = 0.75;
  double beta = 0.25;
  std::size_t escape_samples = 0;
  double return_epsilon = 0.0;
  std::string return_b = "1/2";
  std::string ambient = "root";
  std::string redistribute;
  std::string targets;
  double trace_epsilon = 0.01;
  bool inject_wrong = false;
  std::string out;
};

struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  std::string bound;
  bool pass = false;
};

void suite_end_to_end(const Scene& scene, const ContainmentTree& tree, const VerifyArgs& a, std::uint64_t seed,
                      std::vector<Check>& checks, json& detail) {
  if (a.starts.empty()) throw Usage("end-to-end suite needs at least one --start");
  ExperimentSpec spec;
  spec.epsilons = parse_doubles(a.epsilons.empty() ? "0.05,0.02" : a.epsilons, "--epsilon");
  spec.particles = a.particles;
  spec.seed = seed;
  spec.tv_tolerance = a.tv_tolerance;
  spec.engine = a.engine == "stepper" ? Engine::Stepper : a.engine == "lattice" ? Engine::Lattice : Engine::Auto;
  for (const auto& s : a.starts) spec.starts.push_back(parse_point(s, scene.dimension));
  spec.validate();
  const HittingOracle oracle =
      scene.dimension == 1 ? make_analytic_oracle(scene, tree) : make_fd_oracle(scene, tree, spec.fd_spacing);
  json rows = json::array();
  for (const auto& b : parse_exponents(a.b)) {
    spec.b = b;
    for (const auto& x : spec.starts) {
      MixtureMeasure pred = predict(scene, tree, b, x, oracle);
      if (a.inject_wrong) pred.weights = {{"injected", 1.0}};
      for (double eps : spec.epsilons) {
        const ComparisonReport r = end_to_end_run(scene, tree, spec, eps, x, pred).report;
        checks.push_back({"end-to-end", fmt::format("b={} start={} eps={}", b.to_string(), fmt_point(x), eps), r.tv,
                          fmt::format("<= {}", spec.tv_tolerance), r.pass});
        rows.push_back({{"b", b.to_string()}, {"start", point_json(x)}, {"epsilon", eps}, {"t", r.t_final},
                        {"empirical", r.empirical}, {"predicted", r.predicted.weights}, {"tv", r.tv}, {"pass", r.pass}});
      }
    }
  }
  detail["end-to-end"] = rows;
}

void suite_lemmas(const Scene& scene, const ContainmentTree& tree, const VerifyArgs& a, std::uint64_t seed,
                  std::vector<Check>& checks, json& detail) {
  if (scene.domains.empty()) throw Usage("lemma suite needs a domain");
  const DomainId m = a.membrane.empty() ? scene.domains.front().id : a.membrane;
  const std::vector<double> eps = parse_doubles(a.epsilons.empty() ? "0.2,0.1,0.05,0.025" : a.epsilons, "--epsilon");
  XSimConfig cfg;
  cfg.rng_seed = seed;
  LemmaOptions lo;
  lo.escape_samples = a.escape_samples;
  lo.return_epsilon = a.return_epsilon;
  lo.return_b = ExponentQ::parse(a.return_b);
  lo.return_samples = a.return_epsilon > 0.0 ? a.particles : 0;
  const CollarSpec collar{a.alpha, a.beta};
  const LemmaReport rep = lemma_suite(scene, tree, cfg, m, eps, collar, a.particles, lo);
  json rows = json::array();
  for (const auto& r : rep.rows) {
    const auto& e = r.excursion;
    rows.push_back({{"epsilon", r.epsilon}, {"collar_radius", e.collar_radius}, {"p_out", e.p_out},
                    {"p_out_se", e.p_out_se}, {"scaled_p_out", e.p_out / r.epsilon}, {"mean_exit_time", e.mean_exit_time},
                    {"mean_escape_time", e.mean_escape_time}, {"exit_dispersion", e.exit_dispersion}});
  }
  detail["lemmas"] = {{"membrane", m},
                      {"alpha", a.alpha},
                      {"rows", rows},
                      {"outward_slope", rep.outward_fit.slope},
                      {"outward_r2", rep.outward_fit.r2},
                      {"exit_time_slope", rep.exit_time_fit.slope},
                      {"escape_time_slope", rep.escape_time_fit.slope},
                      {"return_probability", rep.return_probability}};
  checks.push_back({"lemmas", "outward probability slope", rep.outward_fit.slope, "1 +- 0.1",
                    std::abs(rep.outward_fit.slope - 1.0) <= 0.1});
  checks.push_back({"lemmas", "outward probability R^2", rep.outward_fit.r2, ">= 0.98", rep.outward_fit.r2 >= 0.98});
  for (std::size_t i = 0; i < rep.rows.size(); ++i)
    for (std::size_t j = i + 1; j < rep.rows.size(); ++j) {
      if (std::abs(rep.rows[j].epsilon * 4.0 / rep.rows[i].epsilon - 1.0) > 1e-9) continue;
      const double want = std::pow(4.0, 2.0 * a.alpha);
      const double got = rep.rows[i].excursion.mean_exit_time / rep.rows[j].excursion.mean_exit_time;
      checks.push_back({"lemmas", fmt::format("collar exit time ratio eps={}/{}", rep.rows[i].epsilon, rep.rows[j].epsilon),
                        got, fmt::format("{:.4g} +- 20%", want), std::abs(got / want - 1.0) <= 0.2});
    }
  if (a.escape_samples > 0)
    checks.push_back({"lemmas", "trap escape time slope", rep.escape_time_fit.slope,
                      fmt::format("{} +- 0.15", a.alpha - 1.0), std::abs(rep.escape_time_fit.slope - (a.alpha - 1.0)) <= 0.15});
  if (a.return_epsilon > 0.0)
    checks.push_back({"lemmas", fmt::format("return probability eps={}", a.return_epsilon), rep.return_probability,
                      ">= 0.95", rep.return_probability >= 0.95});
}

void suite_trace(const Scene& scene, const ContainmentTree& tree, const VerifyArgs& a, std::uint64_t seed,
                 std::vector<Check>& checks, json& detail) {
  if (a.targets.empty() || a.starts.empty()) throw Usage("trace suite needs --targets and --start");
  HittingQuery q;
  q.ambient = a.ambient;
  q.redistribution = split(a.redistribute, ',');
  q.targets = split(a.targets, ',');
  q.start = parse_point(a.starts.front(), scene.dimension);
  XSimConfig x;
  x.epsilon = a.trace_epsilon;
  x.rng_seed = seed;
  YSimConfig y;
  y.rng_seed = seed;
  const TraceReport r = trace_consistency(scene, tree, x, y, q, a.particles);
  detail["trace"] = {{"query", describe(q)}, {"epsilon", a.trace_epsilon}, {"x_split", r.x_split},
                     {"y_split", r.y_split}, {"tv", r.tv}};
  checks.push_back({"trace", describe(q), r.tv, fmt::format("<= {}", a.tv_tolerance), r.tv <= a.tv_tolerance});
}

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  static const std::set<std::string> suites{"lemmas", "end-to-end", "trace", "all"};
  if (!suites.count(a.suite)) throw Usage("--suite must be lemmas, end-to-end, trace or all");
  if (a.particles == 0) throw Usage("--particles must be positive");
  if (a.engine != "auto" && a.engine != "stepper" && a.engine != "lattice")
    throw Usage("--engine must be auto, stepper or lattice");
  const Scene scene = load_scene(a.scene);
  const ContainmentTree tree = build_tree(scene);
  const std::uint64_t seed = resolve_seed(a.seed);
  std::vector<Check> checks;
  json detail = json::object();
  const bool all = a.suite == "all";
  if (all || a.suite == "lemmas") suite_lemmas(scene, tree, a, seed, checks, detail);
  if ((all && !a.starts.empty()) || a.suite == "end-to-end") suite_end_to_end(scene, tree, a, seed, checks, detail);
  if ((all && !a.targets.empty()) || a.suite == "trace") suite_trace(scene, tree, a, seed, checks, detail);

  bool ok = true;
  fmt::print(out, "{:<11} {:<48} {:>12} {:>16}  {}\n", "suite", "check", "value", "bound", "result");
  json summary = json::array();
  for (const auto& c : checks) {
    ok = ok && c.pass;
    fmt::print(out, "{:<11} {:<48} {:>12.6g} {:>16}  {}\n", c.suite, c.name, c.value, c.bound, c.pass ? "PASS" : "FAIL");
    summary.push_back({{"suite", c.suite}, {"check", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
  }
  json result = {{"pass", ok}, {"checks", summary}};
  out << "summary " << result.dump() << "\n";
  if (!a.out.empty()) {
    json params = {{"suite", a.suite}, {"particles", a.particles}, {"engine", a.engine},
                   {"tv_tolerance", a.tv_tolerance}, {"inject_wrong", a.inject_wrong}};
    write_file(a.out + "verify.json", json({{"summary", result}, {"detail", detail}}).dump(2) + "\n");
    write_file(a.out + "manifest.json", make_manifest("verify", a.scene, params, seed).dump(2) + "\n");
  }
  return ok ? kOk : kCriterionFailed;
}

bool is_usage_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidScene:
    case ErrorCode::OverlappingBoundaries:
    case ErrorCode::PartialOverlap:
    case ErrorCode::UnknownId:
    case ErrorCode::OnBoundary:
    case ErrorCode::NotOnBoundary:
    case ErrorCode::BoundaryTimeScale:
    case ErrorCode::RootHasNoSiblings:
    case ErrorCode::NoAdmissibleChain:
    case ErrorCode::MultipleAdmissibleChainsWithEmptyTrapSet:
    case ErrorCode::StartInsideTarget:
    case ErrorCode::CollarTooWide:
    case ErrorCode::InvalidArgument:
    case ErrorCode::GridTooCoarse:
      return true;
    default:
      return false;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Brownian motion with nested semi-permeable membranes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MEMBRANE_VERSION);

  ClassifyArgs ca;
  auto* c = app.add_subcommand("classify", "Containment tree, orders and trapping statuses");
  c->add_option("scene", ca.scene, "Scene file")->required();
  c->add_option("-b,--time-exponent", ca.b, "Time exponent b, t = eps^-b")->required();
  c->add_flag("--json", ca.json, "Machine-readable output");

  PredictArgs pa;
  auto* p = app.add_subcommand("predict", "Limiting distribution of the position at time eps^-b");
  p->add_option("scene", pa.scene, "Scene file")->required();
  p->add_option("-b,--time-exponent", pa.b, "Time exponent b")->required();
  p->add_option("--start", pa.start, "Start point: x or x,y")->required();
  p->add_option("--oracle", pa.oracle, "Hitting-law oracle")->check(CLI::IsMember({"analytic", "fd", "mc"}));
  p->add_option("--grid-spacing", pa.spacing, "Finite-difference grid spacing");
  p->add_option("--particles", pa.particles, "Particles for the mc oracle");
  p->add_option("--seed", pa.seed, "RNG seed");
  p->add_flag("--json", pa.json, "Machine-readable output");

  SimulateArgs sa;
  auto* s = app.add_subcommand("simulate", "Simulate particles to a fixed time");
  s->add_option("scene", sa.scene, "Scene file")->required();
  s->add_option("--epsilon", sa.epsilon, "Permeability parameter");
  s->add_option("-b,--time-exponent", sa.b, "Run to t = eps^-b");
  s->add_option("--t-final", sa.t_final, "Run to this time");
  s->add_option("--start", sa.start, "Start point: x or x,y")->required();
  s->add_option("--particles", sa.particles, "Number of particles");
  s->add_option("--seed", sa.seed, "RNG seed");
  s->add_option("--delta", sa.delta, "Membrane jump size (0 = default)");
  s->add_option("--max-step", sa.max_step, "Largest time step");
  s->add_option("--engine", sa.engine, "stepper or lattice (1D)");
  s->add_option("--bins", sa.bins, "Histogram bins per axis");
  s->add_flag("--events", sa.events, "Also write the membrane event log");
  s->add_option("--out", sa.out, "Output prefix")->required();

  VerifyArgs va;
  auto* v = app.add_subcommand("verify", "Run a verification suite");
  v->add_option("scene", va.scene, "Scene file")->required();
  v->add_option("--suite", va.suite, "lemmas, end-to-end, trace or all");
  v->add_option("--epsilon", va.epsilons, "Comma-separated epsilon ladder, decreasing");
  v->add_option("-b,--time-exponent", va.b, "Comma-separated time exponents");
  v->add_option("--start", va.starts, "Start point (repeatable)");
  v->add_option("--particles", va.particles, "Particles per experiment");
  v->add_option("--seed", va.seed, "RNG seed");
  v->add_option("--tv-tolerance", va.tv_tolerance, "Largest accepted total-variation distance");
  v->add_option("--engine", va.engine, "auto, stepper or lattice");
  v->add_option("--membrane", va.membrane, "Domain whose membrane the lemma suite studies");
  v->add_option("--alpha", va.alpha, "Collar exponent alpha");
  v->add_option("--beta", va.beta, "Collar exponent beta");
  v->add_option("--escape-samples", va.escape_samples, "Trap-escape samples per epsilon");
  v->add_option("--return-epsilon", va.return_epsilon, "Epsilon for the return-probability check");
  v->add_option("--return-b", va.return_b, "Time exponent for the return-probability check");
  v->add_option("--ambient", va.ambient, "Trace suite: ambient domain");
  v->add_option("--redistribute", va.redistribute, "Trace suite: comma-separated redistribution children");
  v->add_option("--targets", va.targets, "Trace suite: comma-separated targets");
  v->add_option("--trace-epsilon", va.trace_epsilon, "Trace suite: epsilon");
  v->add_flag("--inject-wrong", va.inject_wrong, "Test mode: replace predictions by a wrong law");
  v->add_option("--out", va.out, "Write verify.json and manifest.json with this prefix");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (*c) return cmd_classify(ca, out);
    if (*p) return cmd_predict(pa, out);
    if (*s) return cmd_simulate(sa, out);
    return cmd_verify(va, out);
  } catch (const Usage& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return is_usage_error(e.code()) ? kUsage : kInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace membrane::cli
