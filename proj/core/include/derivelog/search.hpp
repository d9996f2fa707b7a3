#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "derivelog/formula.hpp"
#include "derivelog/frames.hpp"
#include "derivelog/semantics.hpp"
#include "derivelog/transforms.hpp"

namespace derivelog {

/// Frames are enumerated by relation bitset, which is only feasible for a
/// handful of worlds.
inline constexpr std::size_t kMaxEnumerationWorlds = 5;
/// Exhaustive valuation sweeps are limited to 2^22 valuations per structure.
inline constexpr std::size_t kValuationBudgetBits = 22;

struct SearchBudget {
  std::size_t max_worlds = 4;
  std::size_t max_story_branching = 2;
  /// Unset: every valuation. Set: that many seeded samples per structure.
  std::optional<std::size_t> sampled_valuations;
  /// Zero means no limit.
  std::chrono::milliseconds time_limit{0};
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  /// When false, frames range over every relation and every function.
  bool class_filter = true;
  bool prune_isomorphic = true;
  /// Story duration; unset means next_depth of the (normal-form) formula.
  /// Must not be below that depth.
  std::optional<std::size_t> story_duration;

  /// Throws InputError on zero sizes or max_worlds beyond enumeration range.
  void validate() const;
};

enum class VerdictKind { Satisfiable, UnsatUpToBound, ValidUpToBound, CounterModel };
std::string to_string(VerdictKind k);

struct Verdict {
  VerdictKind kind = VerdictKind::UnsatUpToBound;
  /// Witness for Satisfiable (formula true at point) or CounterModel
  /// (formula false at point).
  std::optional<Model> model;
  Point point = 0;
  SearchBudget budget;
  /// Frames (or stories) examined up to and including the witness.
  std::size_t structures_scanned = 0;
  /// "frames" or "story".
  std::string method;
  /// Story verdicts: duration of the story searched.
  std::optional<std::size_t> duration;

  bool positive() const {
    return kind == VerdictKind::Satisfiable || kind == VerdictKind::CounterModel;
  }
};

struct FrameEnumOptions {
  bool class_filter = true;
  bool prune_isomorphic = false;
};

/// Frames with exactly n worlds, in lexicographic order of (relation bitset,
/// function table). Relation bit w*n+v encodes w rel v. `visit` returns
/// false to stop. Throws InputError for n = 0 or n > kMaxEnumerationWorlds.
void for_each_frame(std::size_t n, FrameClass cls, const FrameEnumOptions& opts,
                    const std::function<bool(const DynamicFrame&)>& visit);
std::vector<DynamicFrame> enumerate_frames(std::size_t n, FrameClass cls,
                                           const FrameEnumOptions& opts = {});

/// Satisfiability by scanning frames of 1..max_worlds worlds. Throws
/// BudgetExceeded when the valuation space or the time limit is exceeded.
Verdict sat_search(const Formula& f, FrameClass cls, const SearchBudget& b);
/// sat_search on the negation.
Verdict valid_at_bound(const Formula& f, FrameClass cls, const SearchBudget& b);

/// Search restricted to story-shaped models of duration next_depth(f), with
/// moments of height at most modal_depth(f)+1 and at most
/// max_story_branching immediate successor clusters per cluster. Invertible
/// classes search a single moment for the next-normal form under an
/// extended valuation and close it with power_system; formulas with <*>
/// then throw TangleUnsupported.
Verdict story_search(const Formula& f, FrameClass cls, const SearchBudget& b);
Verdict story_valid_at_bound(const Formula& f, FrameClass cls, const SearchBudget& b);

struct RandomModelOptions {
  /// Test hook: skip the function repair so class conditions can fail.
  bool broken_repair = false;
  /// Variables given random extensions.
  std::vector<std::string> variables{"p", "q"};
};

/// Seeded class-valid frame model. Throws GenerationFailed if repair does
/// not converge within its retry budget.
Model random_model(FrameClass cls, std::size_t size, std::uint64_t seed,
                   const RandomModelOptions& opts = {});

struct FuzzViolation {
  std::size_t trial = 0;
  std::size_t size = 0;
  std::string scheme;
  Point point = 0;
};

struct FuzzReport {
  std::size_t trials = 0;
  std::size_t scheme_checks = 0;
  std::vector<FuzzViolation> violations;
};

/// Every scheme of logic_axioms(cls) on `trials` random models of
/// 1..max_size worlds. Trial i uses seed mix_seed(seed, i).
FuzzReport soundness_fuzz(FrameClass cls, std::size_t trials, std::uint64_t seed,
                          std::size_t max_size = 6, const RandomModelOptions& opts = {},
                          std::size_t jobs = 1);

/// One line of a regression corpus.
struct CorpusQuery {
  FrameClass cls = FrameClass::WK4C;
  /// false: satisfiability query; true: validity query.
  bool validity = false;
  Formula formula = Formula::bot();
  /// "sat", "unsat", "valid" or "counter".
  std::string expected;
  std::size_t line = 0;
};

struct CorpusOutcome {
  CorpusQuery query;
  Verdict frames;
  Verdict story;
  bool agree = false;
  bool as_expected = false;
};

/// "sat"/"unsat" or "valid"/"counter" for a verdict.
std::string verdict_word(const Verdict& v);

CorpusOutcome run_corpus_query(const CorpusQuery& q, const SearchBudget& b);

}  // namespace derivelog
