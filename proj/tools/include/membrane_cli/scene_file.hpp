#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "membrane/geometry.hpp"

namespace membrane::cli {

// Scene file schema:
//   { "dimension": 1 | 2, "period": P, "min_separation": s (optional),
//     "domains": [ { "id": "...", "lo": x, "hi": y, "permeability_exponent": "p/q" },
//                  { "id": "...", "center": [x, y], "radius": r, "permeability_exponent": "1" } ] }
// Unknown keys are rejected. Errors carry the JSON path of the offending field.
Scene scene_from_json(const nlohmann::json& j);
nlohmann::json scene_to_json(const Scene& scene);

Scene parse_scene(const std::string& text, const std::string& origin = "<string>");
Scene load_scene(const std::string& path);

}  // namespace membrane::cli
