#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "derivelog/formula.hpp"
#include "derivelog/frames.hpp"
#include "derivelog/semantics.hpp"
#include "derivelog/spaces.hpp"

namespace derivelog {

/// Values of the expressions X^i p, keyed by (p, i).
using ExtendedValuation = std::map<std::pair<std::string, std::size_t>, PointSet>;

/// A constructed model together with the projection back onto its source.
struct Projected {
  Model model;
  std::vector<Point> projection;
};

/// Doubles every reflexive world into an irreflexive pair. World ids follow
/// the source order: (w,0) then, for reflexive w, (w,1). Throws
/// ClassViolation unless the input frame is in wK4C.
Projected oplus(const Model& m);

struct Unwound {
  Model model;
  std::vector<Point> projection;
  /// sequences[x] is the increasing path represented by world x.
  std::vector<std::vector<Point>> sequences;
  bool exact = false;
  std::size_t depth_bound = 0;
  /// Maximal-length sequences whose last world still has successors.
  PointSet frontier;
};

/// Sequences of rel-increasing worlds up to `depth_bound` entries, ordered
/// by length then lexicographically. With no bound: |W| when the frame is
/// irreflexive and antisymmetric, else |W| + next_depth(query) (or |W|).
/// Throws ClassViolation unless the input frame is in K4C, and
/// CapacityExceeded when the result would not fit in a PointSet.
Unwound unwind(const Model& m, std::optional<std::size_t> depth_bound = std::nullopt,
               const std::optional<Formula>& query = std::nullopt);

/// n copies of the space, f(w,i) = (w, i+1 mod n) with point id i*|A| + w,
/// and (w,i) in val(p) iff w in ev(p, i). Throws InputError for n = 0.
Model power_system(const DerivativeSpace& sp, std::size_t n, const ExtendedValuation& ev);

/// Truth set on a static space of a formula in next-normal form, reading
/// X^i p from ev. Throws PreconditionViolated for other uses of X.
PointSet extended_truth_set(const DerivativeSpace& sp, const ExtendedValuation& ev,
                            const Formula& f);

struct PMorphismOptions {
  bool require_surjective = false;
  /// Worlds of M where the back condition is not checked.
  PointSet skip_back;
  /// Worlds of M where commuting is not checked.
  PointSet skip_commuting;
};

struct PMorphismVerdict {
  bool ok = true;
  /// "forth", "back", "commuting", "atoms" or "surjective".
  std::string failed;
  std::vector<Point> witness;
  /// Variable involved in an "atoms" failure.
  std::string variable;
};

/// Both models must be frame-based; throws InputError otherwise or when h is
/// not a total map into N.
PMorphismVerdict check_dynamic_pmorphism(const Model& m, const Model& n, const std::vector<Point>& h,
                                         const PMorphismOptions& opts = {});

/// Per-point layer index of a story and its duration. A formula is only
/// compared at points of layer j when its next-depth is at most
/// duration - j.
struct LayerBound {
  std::vector<std::size_t> layer_of;
  std::size_t duration = 0;
};

struct TruthViolation {
  Formula formula;
  PointSet points;
};

struct TruthPreservationReport {
  std::vector<TruthViolation> violations;
  std::size_t formulas_checked = 0;
  bool ok() const { return violations.empty(); }
};

/// truth_M(phi) == h^-1(truth_N(phi)) per formula. Throws
/// PreconditionViolated if h fails the p-morphism check under `opts`.
TruthPreservationReport check_truth_preservation(const Model& m, const Model& n,
                                                 const std::vector<Point>& h,
                                                 const std::vector<Formula>& formulas,
                                                 const PMorphismOptions& opts = {},
                                                 const std::optional<LayerBound>& layers = std::nullopt);

/// Finite rooted tree-like static frame of a declared class, with valuation.
struct Moment {
  DynamicFrame frame{1};
  Point root = 0;
  Valuation valuation;
  FrameClass cls = FrameClass::WK4C;
};

struct MomentVerdict {
  bool ok = true;
  /// "frame has function", "root", "rooted", "tree-like", "class", "valuation"
  std::string failed;
  std::vector<Point> witness;
};

MomentVerdict validate_moment(const Moment& m);

/// Root cluster for compose_moment. Members are 0..size-1.
struct ClusterSpec {
  std::size_t size = 1;
  std::vector<std::pair<Point, Point>> rel;
  Valuation valuation;
};

/// Cluster ids first, then each submoment re-based in order. Every cluster
/// member sees every submoment world; the root is cluster member 0.
/// Throws ClassViolation when the result is not a valid moment of cls
/// (GL classes admit only a single irreflexive root).
Moment compose_moment(const ClusterSpec& cluster, const std::vector<Moment>& submoments,
                      FrameClass cls);

struct Story {
  std::vector<Moment> layers;
  /// maps[i] sends layer i into layer i+1, in layer-local ids.
  std::vector<std::vector<Point>> maps;

  std::size_t duration() const { return layers.empty() ? 0 : layers.size() - 1; }
};

struct StoryVerdict {
  bool ok = true;
  /// "layers", "maps", "moment: <reason>", "total map", "weakly monotonic",
  /// "root preserving"
  std::string failed;
  std::size_t layer = 0;
  std::vector<Point> witness;
};

StoryVerdict validate_story(const Story& s);

struct StoryModel {
  Model model;
  /// Global id of layer i's world w is offsets[i] + w.
  std::vector<std::size_t> offsets;
  LayerBound layers;
};

/// Disjoint union of the layers, f = union of the maps plus the identity on
/// the last layer. Throws ClassViolation when the story is invalid or the
/// result is not in cls.
StoryModel story_to_model(const Story& s, FrameClass cls);

}  // namespace derivelog
