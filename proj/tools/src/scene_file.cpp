#include "membrane_cli/scene_file.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "membrane/error.hpp"

namespace membrane::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::InvalidScene, path + ": " + what);
}

void only_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(path, "expected an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) bad(path, "unknown key '" + k + "'");
}

const json& need(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) bad(path, "missing key '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  return j.get<double>();
}

ExponentQ exponent(const json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return ExponentQ::parse(j.get<std::string>());
    } catch (const Error& e) {
      bad(path, e.what());
    }
  }
  if (j.is_number_integer()) return ExponentQ(j.get<std::int64_t>());
  bad(path, "expected a rational string such as \"3/2\"");
}

}  // namespace

Scene scene_from_json(const json& j) {
  only_keys(j, "$", {"dimension", "period", "min_separation", "domains"});
  Scene s;
  const json& dim = need(j, "$", "dimension");
  if (!dim.is_number_integer()) bad("$.dimension", "expected 1 or 2");
  s.dimension = dim.get<int>();
  if (s.dimension != 1 && s.dimension != 2) bad("$.dimension", "expected 1 or 2");
  s.period = j.contains("period") ? number(j.at("period"), "$.period") : 1.0;
  if (j.contains("min_separation")) s.min_separation = number(j.at("min_separation"), "$.min_separation");
  const json& ds = need(j, "$", "domains");
  if (!ds.is_array()) bad("$.domains", "expected an array");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::string p = "$.domains[" + std::to_string(i) + "]";
    const json& d = ds[i];
    Domain dom;
    if (s.dimension == 1) {
      only_keys(d, p, {"id", "lo", "hi", "permeability_exponent"});
      dom.shape = Interval{number(need(d, p, "lo"), p + ".lo"), number(need(d, p, "hi"), p + ".hi")};
    } else {
      only_keys(d, p, {"id", "center", "radius", "permeability_exponent"});
      const json& c = need(d, p, "center");
      if (!c.is_array() || c.size() != 2) bad(p + ".center", "expected [x, y]");
      dom.shape = Ball{Point::plane(number(c[0], p + ".center[0]"), number(c[1], p + ".center[1]")),
                       number(need(d, p, "radius"), p + ".radius")};
    }
    const json& id = need(d, p, "id");
    if (!id.is_string()) bad(p + ".id", "expected a string");
    dom.id = id.get<std::string>();
    dom.permeability_exponent = exponent(need(d, p, "permeability_exponent"), p + ".permeability_exponent");
    s.domains.push_back(dom);
  }
  validate_shapes(s);
  return s;
}

json scene_to_json(const Scene& scene) {
  json j;
  j["dimension"] = scene.dimension;
  j["period"] = scene.period;
  j["min_separation"] = scene.min_separation;
  json ds = json::array();
  for (const auto& d : scene.domains) {
    json o;
    o["id"] = d.id;
    if (const auto* iv = std::get_if<Interval>(&d.shape)) {
      o["lo"] = iv->lo;
      o["hi"] = iv->hi;
    } else {
      const auto& b = std::get<Ball>(d.shape);
      o["center"] = {b.center[0], b.center[1]};
      o["radius"] = b.radius;
    }
    o["permeability_exponent"] = d.permeability_exponent.to_string();
    ds.push_back(o);
  }
  j["domains"] = ds;
  return j;
}

Scene parse_scene(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::InvalidScene,
         origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON");
  }
  try {
    return scene_from_json(j);
  } catch (const Error& e) {
    fail(e.code(), origin + ": " + std::string(e.what()).substr(std::string(to_string(e.code())).size() + 2));
  }
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::InvalidArgument, "cannot read scene file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str(), path);
}

}  // namespace membrane::cli
