#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "derivelog/frames.hpp"
#include "derivelog/search.hpp"
#include "derivelog/semantics.hpp"
#include "derivelog/spaces.hpp"
#include "derivelog/transforms.hpp"

namespace derivelog {

using Json = nlohmann::ordered_json;

/// A model read from file, with its declared class when present.
struct LoadedModel {
  Model model;
  std::optional<FrameClass> cls;
  std::optional<std::string> provenance;
};

/// Frame-based models: {"worlds", "rel", "func", "val", "class"}.
/// Topology-based models use "nbhd" or "opens" instead of "rel". Unknown
/// keys and malformed ids throw InputError.
LoadedModel model_from_json(const Json& j);
Json model_to_json(const Model& m, std::optional<FrameClass> cls = std::nullopt,
                   const std::string& provenance = {});

/// The "val" member of a model object (empty when absent or null).
Valuation valuation_from_json(const Json& j, std::size_t points);

/// Frame with optional function ("func" may be null or absent).
DynamicFrame frame_from_json(const Json& j);
/// Space from "rel", "nbhd", "opens" or an explicit "rho" table.
DerivativeSpace space_from_json(const Json& j);
Json space_to_json(const DerivativeSpace& sp);

/// {"layers": [...], "maps": [[...], ...]}; layers are models without
/// "func", with an optional "root" (default 0) and "class".
Story story_from_json(const Json& j, FrameClass default_cls);

/// Extended valuation file: {"p": [[ids at X^0], [ids at X^1], ...], ...}.
ExtendedValuation extended_valuation_from_json(const Json& j);

Json point_set_to_json(const PointSet& s);
PointSet point_set_from_json(const Json& j, std::size_t points);

Json verdict_to_json(const Verdict& v, const Formula& f, FrameClass cls);
Json budget_to_json(const SearchBudget& b);

/// Lines `CLASS<TAB>sat|valid<TAB>formula<TAB>expected`; blank lines and
/// lines starting with '#' are skipped. Throws InputError with the line
/// number on malformed lines.
std::vector<CorpusQuery> parse_corpus(std::istream& in);

/// key = value lines; '#' starts a comment; values may be quoted.
using Config = std::map<std::string, std::string>;
Config parse_config(std::istream& in);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_file(const std::string& path);
Json read_json_file(const std::string& path);

}  // namespace derivelog
