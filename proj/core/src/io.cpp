#include "derivelog/io.hpp"

#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "derivelog/error.hpp"

namespace derivelog {

namespace {

void expect_keys(const Json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw InputError(std::string(what) + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      throw InputError("unknown key '" + key + "' in " + what);
    }
  }
}

Point point_from_json(const Json& j, std::size_t points) {
  if (!j.is_number_integer() || j.get<long long>() < 0 ||
      static_cast<std::size_t>(j.get<long long>()) >= points) {
    throw InputError("point id " + j.dump() + " out of range 0.." + std::to_string(points - 1));
  }
  return static_cast<Point>(j.get<long long>());
}

std::size_t worlds_from_json(const Json& j) {
  if (!j.contains("worlds")) throw InputError("missing 'worlds'");
  const Json& w = j.at("worlds");
  if (!w.is_number_integer() || w.get<long long>() < 1) {
    throw InputError("'worlds' must be a positive integer");
  }
  const auto n = static_cast<std::size_t>(w.get<long long>());
  if (n > kMaxPoints) throw CapacityExceeded("more than " + std::to_string(kMaxPoints) + " worlds");
  return n;
}

std::vector<std::pair<Point, Point>> pairs_from_json(const Json& j, std::size_t n) {
  if (!j.is_array()) throw InputError("'rel' must be an array of pairs");
  std::vector<std::pair<Point, Point>> out;
  for (const auto& pr : j) {
    if (!pr.is_array() || pr.size() != 2) throw InputError("'rel' entries must be [u, v] pairs");
    out.emplace_back(point_from_json(pr[0], n), point_from_json(pr[1], n));
  }
  return out;
}

std::optional<std::vector<Point>> func_from_json(const Json& j, std::size_t n) {
  if (!j.contains("func") || j.at("func").is_null()) return std::nullopt;
  const Json& f = j.at("func");
  if (!f.is_array() || f.size() != n) throw InputError("'func' must list one image per world");
  std::vector<Point> out;
  for (const auto& x : f) out.push_back(point_from_json(x, n));
  return out;
}

std::optional<FrameClass> class_from_json(const Json& j) {
  if (!j.contains("class") || j.at("class").is_null()) return std::nullopt;
  if (!j.at("class").is_string()) throw InputError("'class' must be a string");
  return parse_frame_class(j.at("class").get<std::string>());
}

std::vector<PointSet> sets_from_json(const Json& j, std::size_t n, const char* what) {
  if (!j.is_array()) throw InputError(std::string("'") + what + "' must be an array of id lists");
  std::vector<PointSet> out;
  for (const auto& s : j) out.push_back(point_set_from_json(s, n));
  return out;
}

Json pairs_to_json(const DynamicFrame& fr) {
  Json rel = Json::array();
  for (const auto& [a, b] : fr.pairs()) rel.push_back({a, b});
  return rel;
}

}  // namespace

Json point_set_to_json(const PointSet& s) {
  Json out = Json::array();
  s.for_each([&](Point p) { out.push_back(p); });
  return out;
}

PointSet point_set_from_json(const Json& j, std::size_t points) {
  if (!j.is_array()) throw InputError("expected an array of point ids, got " + j.dump());
  PointSet s;
  for (const auto& x : j) s.insert(point_from_json(x, points));
  return s;
}

Valuation valuation_from_json(const Json& j, std::size_t n) {
  Valuation val;
  if (!j.contains("val") || j.at("val").is_null()) return val;
  const Json& v = j.at("val");
  if (!v.is_object()) throw InputError("'val' must map variables to id lists");
  for (const auto& [name, ids] : v.items()) val[name] = point_set_from_json(ids, n);
  return val;
}

DerivativeSpace space_from_json(const Json& j) {
  expect_keys(j, {"worlds", "rel", "nbhd", "opens", "rho", "func", "val", "class", "provenance"},
              "space");
  const std::size_t n = worlds_from_json(j);
  const int kinds = static_cast<int>(j.contains("rel")) + static_cast<int>(j.contains("nbhd")) +
                    static_cast<int>(j.contains("opens")) + static_cast<int>(j.contains("rho"));
  if (kinds > 1) throw InputError("give exactly one of 'rel', 'nbhd', 'opens', 'rho'");
  if (j.contains("nbhd")) {
    auto nb = sets_from_json(j.at("nbhd"), n, "nbhd");
    if (nb.size() != n) throw InputError("'nbhd' must list one neighbourhood per point");
    return DerivativeSpace::from_topology(FiniteTopology::from_neighborhoods(std::move(nb)));
  }
  if (j.contains("opens")) {
    return DerivativeSpace::from_topology(
        FiniteTopology::from_opens(n, sets_from_json(j.at("opens"), n, "opens")));
  }
  if (j.contains("rho")) {
    return DerivativeSpace::from_table(n, sets_from_json(j.at("rho"), n, "rho"));
  }
  const auto rel = j.contains("rel") ? pairs_from_json(j.at("rel"), n)
                                     : std::vector<std::pair<Point, Point>>{};
  return DerivativeSpace::from_frame(DynamicFrame(n, rel));
}

Json space_to_json(const DerivativeSpace& sp) {
  Json out;
  out["worlds"] = sp.size();
  if (const DynamicFrame* fr = sp.frame()) {
    out["rel"] = pairs_to_json(*fr);
  } else if (const FiniteTopology* top = sp.topology()) {
    Json nb = Json::array();
    for (const auto& s : top->neighborhoods()) nb.push_back(point_set_to_json(s));
    out["nbhd"] = nb;
  } else {
    if (sp.size() > DerivativeSpace::kTableCap) {
      throw CapacityExceeded("derivative table output is limited to " +
                             std::to_string(DerivativeSpace::kTableCap) + " points");
    }
    Json rho = Json::array();
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << sp.size()); ++m) {
      rho.push_back(point_set_to_json(sp.rho(PointSet::from_mask(m))));
    }
    out["rho"] = rho;
  }
  return out;
}

DynamicFrame frame_from_json(const Json& j) {
  expect_keys(j, {"worlds", "rel", "func", "val", "class", "provenance", "root"}, "frame");
  const std::size_t n = worlds_from_json(j);
  const auto rel = j.contains("rel") ? pairs_from_json(j.at("rel"), n)
                                     : std::vector<std::pair<Point, Point>>{};
  return DynamicFrame(n, rel, func_from_json(j, n));
}

LoadedModel model_from_json(const Json& j) {
  expect_keys(j, {"worlds", "rel", "nbhd", "opens", "rho", "func", "val", "class", "provenance"},
              "model");
  const std::size_t n = worlds_from_json(j);
  auto func = func_from_json(j, n);
  if (!func) throw MissingFunction();
  DerivativeSpace sp = space_from_json(j);
  std::optional<std::string> provenance;
  if (j.contains("provenance") && j.at("provenance").is_string()) {
    provenance = j.at("provenance").get<std::string>();
  }
  return {Model(std::move(sp), std::move(*func), valuation_from_json(j, n)), class_from_json(j),
          provenance};
}

Json model_to_json(const Model& m, std::optional<FrameClass> cls, const std::string& provenance) {
  Json out = space_to_json(m.space());
  Json func = Json::array();
  for (Point p : m.function()) func.push_back(p);
  out["func"] = func;
  Json val = Json::object();
  for (const auto& [name, set] : m.valuation()) val[name] = point_set_to_json(set);
  out["val"] = val;
  out["class"] = cls ? Json(to_string(*cls)) : Json(nullptr);
  if (!provenance.empty()) out["provenance"] = provenance;
  return out;
}

Story story_from_json(const Json& j, FrameClass default_cls) {
  expect_keys(j, {"layers", "maps"}, "story");
  if (!j.contains("layers") || !j.at("layers").is_array()) {
    throw InputError("story needs a 'layers' array");
  }
  Story s;
  for (const auto& layer : j.at("layers")) {
    DynamicFrame fr = frame_from_json(layer);
    if (fr.has_function()) throw InputError("story layers must not carry 'func'");
    const std::size_t n = fr.size();
    Point root = 0;
    if (layer.contains("root")) root = point_from_json(layer.at("root"), n);
    s.layers.push_back(Moment{std::move(fr), root, valuation_from_json(layer, n),
                              class_from_json(layer).value_or(default_cls)});
  }
  if (j.contains("maps")) {
    if (!j.at("maps").is_array()) throw InputError("'maps' must be an array");
    for (const auto& m : j.at("maps")) {
      if (!m.is_array()) throw InputError("each map must be an array of ids");
      std::vector<Point> f;
      for (const auto& x : m) {
        if (!x.is_number_integer() || x.get<long long>() < 0) {
          throw InputError("map entries must be non-negative integers");
        }
        f.push_back(static_cast<Point>(x.get<long long>()));
      }
      s.maps.push_back(std::move(f));
    }
  }
  return s;
}

ExtendedValuation extended_valuation_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("extended valuation must map variables to lists");
  ExtendedValuation ev;
  for (const auto& [name, layers] : j.items()) {
    if (!layers.is_array()) throw InputError("extended valuation of '" + name + "' must be a list");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      ev[{name, i}] = point_set_from_json(layers[i], kMaxPoints);
    }
  }
  return ev;
}

Json budget_to_json(const SearchBudget& b) {
  Json out;
  out["max_worlds"] = b.max_worlds;
  out["max_story_branching"] = b.max_story_branching;
  out["valuations"] = b.sampled_valuations ? "sampled:" + std::to_string(*b.sampled_valuations)
                                           : std::string("exhaustive");
  out["time_limit_ms"] = b.time_limit.count();
  out["seed"] = b.seed;
  out["class_filter"] = b.class_filter;
  out["prune_isomorphic"] = b.prune_isomorphic;
  if (b.story_duration) out["story_duration"] = *b.story_duration;
  return out;
}

Json verdict_to_json(const Verdict& v, const Formula& f, FrameClass cls) {
  Json out;
  out["verdict"] = to_string(v.kind);
  out["class"] = to_string(cls);
  out["formula"] = render(f);
  out["method"] = v.method;
  if (v.duration) out["duration"] = *v.duration;
  out["structures_scanned"] = v.structures_scanned;
  if (v.model) {
    out["point"] = v.point;
    out["model"] = model_to_json(*v.model, v.budget.class_filter ? std::optional(cls) : std::nullopt,
                                 v.method == "story" ? "story_search" : "sat_search");
  } else {
    out["budget"] = budget_to_json(v.budget);
    out["caveat"] = v.kind == VerdictKind::UnsatUpToBound
                        ? "bounded search: not a proof of unsatisfiability"
                        : "bounded search: not a proof of validity";
  }
  return out;
}

std::vector<CorpusQuery> parse_corpus(std::istream& in) {
  std::vector<CorpusQuery> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    auto where = [&] { return "corpus line " + std::to_string(lineno) + ": "; };
    if (cols.size() != 4) throw InputError(where() + "expected 4 tab-separated fields");
    CorpusQuery q;
    q.line = lineno;
    try {
      q.cls = parse_frame_class(cols[0]);
      q.formula = parse(cols[2]);
    } catch (const InputError& e) {
      throw InputError(where() + e.what());
    }
    if (cols[1] == "sat") {
      q.validity = false;
      if (cols[3] != "sat" && cols[3] != "unsat") throw InputError(where() + "expected sat|unsat");
    } else if (cols[1] == "valid") {
      q.validity = true;
      if (cols[3] != "valid" && cols[3] != "counter") {
        throw InputError(where() + "expected valid|counter");
      }
    } else {
      throw InputError(where() + "mode must be sat or valid");
    }
    q.expected = cols[3];
    out.push_back(std::move(q));
  }
  return out;
}

Config parse_config(std::istream& in) {
  Config cfg;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') continue;  // section headers are accepted and ignored
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (key.empty()) throw InputError("config line " + std::to_string(lineno) + ": empty key");
    cfg[key] = value;
  }
  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace derivelog
