#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "derivelog/point_set.hpp"

namespace derivelog {

/// Finite Kripke frame <W, rel, f>. Worlds are 0..n-1; `rel` is stored as a
/// successor bitset per world. The function is optional so the same type
/// serves static frames (moments).
class DynamicFrame {
 public:
  explicit DynamicFrame(std::size_t worlds);
  DynamicFrame(std::size_t worlds, const std::vector<std::pair<Point, Point>>& rel,
               std::optional<std::vector<Point>> func = std::nullopt);

  std::size_t size() const { return succ_.size(); }

  bool related(Point w, Point v) const { return succ_[w].contains(v); }
  /// Reflexive closure of rel.
  bool related_or_equal(Point w, Point v) const { return w == v || related(w, v); }
  const PointSet& successors(Point w) const { return succ_[w]; }
  PointSet predecessors(Point v) const;
  PointSet worlds() const { return PointSet::full(size()); }

  void relate(Point w, Point v);
  void unrelate(Point w, Point v);
  /// Sorted list of pairs.
  std::vector<std::pair<Point, Point>> pairs() const;

  bool has_function() const { return func_.has_value(); }
  /// Throws MissingFunction.
  const std::vector<Point>& function() const;
  Point apply(Point w) const { return function()[w]; }
  /// Throws InputError unless the table is total on the worlds.
  void set_function(std::vector<Point> func);
  void clear_function() { func_.reset(); }

  friend bool operator==(const DynamicFrame&, const DynamicFrame&) = default;

 private:
  std::vector<PointSet> succ_;
  std::optional<std::vector<Point>> func_;
};

enum class FrameClass { WK4C, K4C, GLC, WK4H, K4H, GLH };

inline constexpr std::array<FrameClass, 6> kAllClasses = {
    FrameClass::WK4C, FrameClass::K4C, FrameClass::GLC,
    FrameClass::WK4H, FrameClass::K4H, FrameClass::GLH};

/// "wK4C", "K4C", ...
std::string to_string(FrameClass cls);
/// Accepts the printed names case-insensitively; throws InputError.
FrameClass parse_frame_class(std::string_view name);

/// H classes require a persistent function, C classes a weakly monotonic one.
bool is_invertible_class(FrameClass cls);
/// Static relational part: wK4 (weakly transitive), K4 (transitive) or GL
/// (transitive and irreflexive).
enum class StaticLogic { WK4, K4, GL };
StaticLogic static_logic(FrameClass cls);
std::string to_string(StaticLogic logic);

/// Points with a successor in A.
PointSet downset(const DynamicFrame& fr, const PointSet& a);

/// A boolean property together with the lexicographically least failing
/// tuple when it does not hold.
struct Flag {
  bool holds = true;
  std::vector<Point> witness;
};

struct RelationReport {
  Flag weakly_transitive;      // (w, v, u): w rel v rel u, w != u, not w rel u
  Flag transitive;             // (w, v, u): w rel v rel u, not w rel u
  Flag irreflexive;            // (w)
  Flag antisymmetric;          // (w, v): w rel v rel w, w != v
  Flag converse_well_founded;  // a reflexive point (w) or a cycle through distinct points
  Flag tree_like;              // (a, b, c): a, b both below-or-equal c, incomparable
};

RelationReport relation_properties(const DynamicFrame& fr);

/// Static-logic condition on the relation alone.
bool satisfies_static_logic(const DynamicFrame& fr, StaticLogic logic);

struct FunctionReport {
  Flag weakly_monotonic;  // (w, v): w rel v, not f(w) rel-or-equal f(v)
  Flag monotonic;         // (w, v): w rel v, not f(w) rel f(v)
  Flag persistent;        // (w, v) where the biconditional fails, or (w, v) with f(w) = f(v)
};

/// Throws MissingFunction.
FunctionReport function_properties(const DynamicFrame& fr);

/// Throws MissingFunction.
bool in_class(const DynamicFrame& fr, FrameClass cls);

/// C(w) = {w} + {v : w rel v rel w}, per world. Partitions the worlds only
/// when the relation is weakly transitive.
std::vector<PointSet> clusters(const DynamicFrame& fr);

/// Reflexive-transitive closure of rel, as successor sets.
std::vector<PointSet> reflexive_transitive_closure(const DynamicFrame& fr);

}  // namespace derivelog
