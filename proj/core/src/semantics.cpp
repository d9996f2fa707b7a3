#include "derivelog/semantics.hpp"

#include <algorithm>

#include "derivelog/error.hpp"
#include "derivelog/random.hpp"

namespace derivelog {

namespace {

void check_valuation(const Valuation& val, std::size_t n) {
  const PointSet all = PointSet::full(n);
  for (const auto& [name, set] : val) {
    if (!set.is_subset_of(all)) {
      throw InputError("valuation of '" + name + "' mentions unknown point");
    }
  }
}

}  // namespace

Model::Model(DynamicFrame frame, Valuation val)
    : space_(DerivativeSpace::from_frame(frame)), func_(frame.function()), val_(std::move(val)) {
  check_valuation(val_, size());
}

Model::Model(DerivativeSpace space, std::vector<Point> func, Valuation val)
    : space_(std::move(space)), func_(std::move(func)), val_(std::move(val)) {
  if (func_.size() != size()) throw InputError("transition function must be total");
  for (Point p : func_) {
    if (p >= size()) throw InputError("transition function leaves the space");
  }
  // Keep the frame view in step with the model's function.
  const DynamicFrame* fr = space_.frame();
  if (fr != nullptr && (!fr->has_function() || fr->function() != func_)) {
    DynamicFrame copy = *fr;
    copy.set_function(func_);
    space_ = DerivativeSpace::from_frame(copy);
  }
  check_valuation(val_, size());
}

PointSet Model::value(const std::string& var) const {
  auto it = val_.find(var);
  return it == val_.end() ? PointSet{} : it->second;
}

Model Model::with_valuation(Valuation val) const {
  return Model(space_, func_, std::move(val));
}

namespace {

struct Evaluator {
  const DerivativeSpace& space;
  const std::vector<Point>& func;
  const Valuation& val;
  std::vector<std::string>* missing;

  PointSet operator()(const Formula& f) const {
    switch (f.op()) {
      case Op::Var: {
        auto it = val.find(f.name());
        if (it == val.end()) {
          if (missing != nullptr &&
              std::find(missing->begin(), missing->end(), f.name()) == missing->end()) {
            missing->push_back(f.name());
          }
          return {};
        }
        return it->second;
      }
      case Op::Bot: return {};
      case Op::Neg: return (*this)(f.arg(0)).complement(space.size());
      case Op::And: return (*this)(f.arg(0)) & (*this)(f.arg(1));
      case Op::Dia: return space.rho((*this)(f.arg(0)));
      case Op::Next: return preimage(func, (*this)(f.arg(0)));
      case Op::Tangle: {
        std::vector<PointSet> family;
        for (const auto& a : f.args()) family.push_back((*this)(a));
        return tangled_derivative(space, family);
      }
    }
    return {};
  }
};

}  // namespace

PointSet truth_set(const Model& m, const Formula& f, std::vector<std::string>* missing) {
  PointSet out = Evaluator{m.space(), m.function(), m.valuation(), missing}(f);
  if (missing != nullptr) std::sort(missing->begin(), missing->end());
  return out;
}

CompiledFormula::CompiledFormula(const Formula& f, const std::vector<std::string>& vars) {
  auto emit = [&](auto& self, const Formula& g) -> std::uint32_t {
    Instr ins;
    ins.op = g.op();
    switch (g.op()) {
      case Op::Var: {
        auto it = std::find(vars.begin(), vars.end(), g.name());
        if (it == vars.end()) throw InputError("variable '" + g.name() + "' has no slot");
        ins.a = static_cast<std::uint32_t>(it - vars.begin());
        break;
      }
      case Op::Bot: break;
      case Op::Neg:
      case Op::Dia:
      case Op::Next: ins.a = self(self, g.arg(0)); break;
      case Op::And:
        ins.a = self(self, g.arg(0));
        ins.b = self(self, g.arg(1));
        break;
      case Op::Tangle:
        for (const auto& a : g.args()) ins.family.push_back(self(self, a));
        break;
    }
    code_.push_back(std::move(ins));
    return static_cast<std::uint32_t>(code_.size() - 1);
  };
  emit(emit, f);
}

PointSet CompiledFormula::evaluate(const DerivativeSpace& space, const std::vector<Point>& func,
                                   const std::vector<PointSet>& values) const {
  std::vector<PointSet> scratch;
  return evaluate(space, func, values, scratch);
}

PointSet CompiledFormula::evaluate(const DerivativeSpace& space, const std::vector<Point>& func,
                                   const std::vector<PointSet>& values,
                                   std::vector<PointSet>& slot) const {
  slot.resize(code_.size());
  for (std::size_t i = 0; i < code_.size(); ++i) {
    const Instr& ins = code_[i];
    switch (ins.op) {
      case Op::Var: slot[i] = values[ins.a]; break;
      case Op::Bot: slot[i] = PointSet{}; break;
      case Op::Neg: slot[i] = slot[ins.a].complement(space.size()); break;
      case Op::And: slot[i] = slot[ins.a] & slot[ins.b]; break;
      case Op::Dia: slot[i] = space.rho(slot[ins.a]); break;
      case Op::Next: slot[i] = preimage(func, slot[ins.a]); break;
      case Op::Tangle: {
        std::vector<PointSet> family;
        for (auto s : ins.family) family.push_back(slot[s]);
        slot[i] = tangled_derivative(space, family);
        break;
      }
    }
  }
  return slot.back();
}

ModelCheckResult model_check(const Model& m, const Formula& f) {
  ModelCheckResult r;
  r.truth = truth_set(m, f, &r.missing_variables);
  r.falsifying = r.truth.complement(m.size());
  r.holds = r.falsifying.empty();
  return r;
}

ModelCheckResult model_check(const Model& m, const Formula& f, Point at) {
  if (at >= m.size()) throw InputError("point " + std::to_string(at) + " out of range");
  ModelCheckResult r;
  r.truth = truth_set(m, f, &r.missing_variables);
  r.holds = r.truth.contains(at);
  if (!r.holds) r.falsifying = PointSet::singleton(at);
  return r;
}

AxiomScheme axiom(const std::string& name) {
  static const std::map<std::string, std::string> templates = {
      {"K", "[](p -> q) -> ([]p -> []q)"},
      {"T", "[]p -> p"},
      {"w4", "p & []p -> [][]p"},
      {"4", "[]p -> [][]p"},
      {"L", "[]([]p -> p) -> []p"},
      {"C", "X p & X []p -> []X p"},
  };
  if (auto it = templates.find(name); it != templates.end()) return {name, parse(it->second)};
  const Formula p = Formula::var("p");
  const Formula q = Formula::var("q");
  if (name == "Next~") {
    return {name, Formula::iff(Formula::neg(Formula::next(p)), Formula::next(Formula::neg(p)))};
  }
  if (name == "Next&") {
    return {name, Formula::iff(Formula::next(Formula::conj(p, q)),
                               Formula::conj(Formula::next(p), Formula::next(q)))};
  }
  if (name == "H") {
    return {name, Formula::iff(Formula::box(Formula::next(p)), Formula::next(Formula::box(p)))};
  }
  throw InputError("unknown axiom scheme '" + name + "'");
}

std::vector<AxiomScheme> all_axioms() {
  std::vector<AxiomScheme> out;
  for (const char* n : {"K", "T", "w4", "4", "L", "Next~", "Next&", "C", "H"}) {
    out.push_back(axiom(n));
  }
  return out;
}

std::vector<AxiomScheme> logic_axioms(FrameClass cls) {
  std::vector<std::string> names{"K"};
  switch (static_logic(cls)) {
    case StaticLogic::WK4: names.push_back("w4"); break;
    case StaticLogic::K4: names.push_back("4"); break;
    case StaticLogic::GL:
      names.push_back("4");
      names.push_back("L");
      break;
  }
  names.push_back("Next~");
  names.push_back("Next&");
  names.push_back(is_invertible_class(cls) ? "H" : "C");
  std::vector<AxiomScheme> out;
  for (const auto& n : names) out.push_back(axiom(n));
  return out;
}

SchemeVerdict check_scheme_validity(const Model& m, const AxiomScheme& s, ValuationMode mode) {
  const auto letters = variables(s.templ);
  const std::size_t n = m.size();
  const std::size_t bits = n * letters.size();
  SchemeVerdict v;
  v.exhaustive = mode.exhaustive;

  const CompiledFormula compiled(s.templ, letters);
  std::vector<PointSet> values(letters.size());
  std::vector<PointSet> scratch;
  auto try_assignment = [&]() {
    ++v.assignments_checked;
    PointSet bad = compiled.evaluate(m.space(), m.function(), values, scratch).complement(n);
    if (bad.empty()) return true;
    v.valid = false;
    Valuation val;
    for (std::size_t i = 0; i < letters.size(); ++i) val[letters[i]] = values[i];
    v.counter_assignment = std::move(val);
    v.counter_point = bad.first();
    return false;
  };

  if (mode.exhaustive) {
    if (bits > kSchemeBudgetBits) {
      throw BudgetExceeded("exhaustive scheme check needs 2^" + std::to_string(bits) +
                               " assignments (limit 2^" + std::to_string(kSchemeBudgetBits) + ")",
                           0, 0);
    }
    const std::uint64_t per_letter_mask = n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    const std::uint64_t total = std::uint64_t{1} << bits;
    for (std::uint64_t code = 0; code < total; ++code) {
      for (std::size_t i = 0; i < letters.size(); ++i) {
        values[i] = PointSet::from_mask((code >> (i * n)) & per_letter_mask);
      }
      if (!try_assignment()) break;
    }
    return v;
  }
  for (std::size_t i = 0; i < mode.samples; ++i) {
    Rng rng(mix_seed(mode.seed, i));
    for (auto& value : values) value = rng.subset(n);
    if (!try_assignment()) break;
  }
  return v;
}

}  // namespace derivelog
