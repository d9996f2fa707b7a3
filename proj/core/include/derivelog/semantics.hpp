#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "derivelog/formula.hpp"
#include "derivelog/frames.hpp"
#include "derivelog/point_set.hpp"
#include "derivelog/spaces.hpp"

namespace derivelog {

using Valuation = std::map<std::string, PointSet>;

/// Dynamic derivative model <X, rho, f, val>.
class Model {
 public:
  /// Uses the frame's function; throws MissingFunction if it has none.
  Model(DynamicFrame frame, Valuation val);
  /// Throws InputError unless f is total on the space and valuation sets fit.
  Model(DerivativeSpace space, std::vector<Point> func, Valuation val);

  std::size_t size() const { return space_.size(); }
  const DerivativeSpace& space() const { return space_; }
  /// Non-null for frame-based models.
  const DynamicFrame* frame() const { return space_.frame(); }
  const std::vector<Point>& function() const { return func_; }
  const Valuation& valuation() const { return val_; }
  /// Empty set for unknown variables.
  PointSet value(const std::string& var) const;

  Model with_valuation(Valuation val) const;

 private:
  DerivativeSpace space_;
  std::vector<Point> func_;
  Valuation val_;
};

/// Recursive evaluation. Variables missing from the valuation evaluate to
/// the empty set and are appended to `missing` when it is supplied.
PointSet truth_set(const Model& m, const Formula& f, std::vector<std::string>* missing = nullptr);

struct ModelCheckResult {
  bool holds = false;
  PointSet truth;
  /// Points where the formula fails.
  PointSet falsifying;
  std::vector<std::string> missing_variables;
};

/// Validity on the whole model (holds iff the truth set is everything).
ModelCheckResult model_check(const Model& m, const Formula& f);
/// Truth at one point (`falsifying` is {at} or empty).
ModelCheckResult model_check(const Model& m, const Formula& f, Point at);

/// Post-order flattening of a formula with variables mapped to indices, for
/// evaluating the same formula under many valuations.
class CompiledFormula {
 public:
  /// Variables of f not in `vars` throw InputError.
  CompiledFormula(const Formula& f, const std::vector<std::string>& vars);

  /// values[i] is the extension of vars[i].
  PointSet evaluate(const DerivativeSpace& space, const std::vector<Point>& func,
                    const std::vector<PointSet>& values) const;
  /// Same, reusing `scratch` between calls.
  PointSet evaluate(const DerivativeSpace& space, const std::vector<Point>& func,
                    const std::vector<PointSet>& values, std::vector<PointSet>& scratch) const;

 private:
  struct Instr {
    Op op;
    std::uint32_t a = 0;  // operand slot or variable index
    std::uint32_t b = 0;
    std::vector<std::uint32_t> family;  // tangle operand slots
  };
  std::vector<Instr> code_;
};

/// An axiom scheme; its template's variables are the scheme letters.
struct AxiomScheme {
  std::string name;
  Formula templ;
};

/// K, T, w4, 4, L, Next~, Next&, C, H. Throws InputError for unknown names.
AxiomScheme axiom(const std::string& name);
std::vector<AxiomScheme> all_axioms();

/// Axioms of the logic of a class: static part (K + w4 | K + 4 | K + 4 + L)
/// plus Next~, Next& and C (continuous classes) or H (invertible classes).
std::vector<AxiomScheme> logic_axioms(FrameClass cls);

struct ValuationMode {
  bool exhaustive = true;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  static ValuationMode all() { return {}; }
  static ValuationMode sampled(std::size_t k, std::uint64_t seed) { return {false, k, seed}; }
};

struct SchemeVerdict {
  bool valid = true;
  /// Counter-assignment of scheme letters to subsets, with a falsified point.
  std::optional<Valuation> counter_assignment;
  std::optional<Point> counter_point;
  std::size_t assignments_checked = 0;
  bool exhaustive = true;
};

/// Budget for exhaustive scheme checks: 2^(points * letters) <= 2^20.
inline constexpr std::size_t kSchemeBudgetBits = 20;

/// Scheme letters range over arbitrary subsets, valued directly. Exhaustive
/// mode throws BudgetExceeded past kSchemeBudgetBits.
SchemeVerdict check_scheme_validity(const Model& m, const AxiomScheme& s,
                                    ValuationMode mode = ValuationMode::all());

}  // namespace derivelog
