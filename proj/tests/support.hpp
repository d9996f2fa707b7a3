#pragma once

// Shared helpers for the test binaries: random generators and naive
// reference implementations that deliberately avoid the library's bitset
// code paths.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "derivelog/formula.hpp"
#include "derivelog/frames.hpp"
#include "derivelog/random.hpp"
#include "derivelog/semantics.hpp"

namespace derivelog::testing {

struct FormulaGen {
  std::vector<std::string> vars{"p", "q"};
  bool allow_next = true;
  bool allow_tangle = false;
  bool allow_constants = true;
};

inline Formula random_formula(Rng& rng, std::size_t depth, const FormulaGen& g = {}) {
  if (depth == 0 || rng.chance(1, 4)) {
    if (g.allow_constants && rng.chance(1, 8)) {
      return rng.chance(1, 2) ? Formula::top() : Formula::bot();
    }
    return Formula::var(g.vars[rng.below(g.vars.size())]);
  }
  const std::uint64_t kinds = 9 + (g.allow_next ? 2 : 0) + (g.allow_tangle ? 1 : 0);
  const std::uint64_t k = rng.below(kinds);
  auto sub = [&] { return random_formula(rng, depth - 1, g); };
  switch (k) {
    case 0: return Formula::neg(sub());
    case 1: return Formula::conj(sub(), sub());
    case 2: return Formula::disj(sub(), sub());
    case 3: return Formula::imp(sub(), sub());
    case 4: return Formula::dia(sub());
    case 5: return Formula::box(sub());
    case 6: return Formula::boxdot(sub());
    case 7: return Formula::iff(sub(), sub());
    case 8: return Formula::neg(Formula::dia(sub()));
    case 9:
    case 10:
      if (g.allow_next) return Formula::next(sub());
      [[fallthrough]];
    default: {
      std::vector<Formula> args{sub()};
      if (rng.chance(1, 2)) args.push_back(sub());
      return Formula::tangle(std::move(args));
    }
  }
}

/// Relation from the bitset code used by the enumerator (bit w*n+v).
inline DynamicFrame frame_from_code(std::size_t n, std::uint64_t code,
                                    std::vector<Point> func) {
  std::vector<std::pair<Point, Point>> rel;
  for (Point w = 0; w < n; ++w) {
    for (Point v = 0; v < n; ++v) {
      if ((code >> (w * n + v)) & 1U) rel.emplace_back(w, v);
    }
  }
  return DynamicFrame(n, rel, std::move(func));
}

inline DynamicFrame frame_from_code(std::size_t n, std::uint64_t code) {
  std::vector<Point> id(n);
  for (Point w = 0; w < n; ++w) id[w] = w;
  return frame_from_code(n, code, id);
}

/// Calls fn on every static frame with n worlds (identity function).
inline void for_each_relation(std::size_t n, const std::function<void(const DynamicFrame&)>& fn) {
  const std::uint64_t total = std::uint64_t{1} << (n * n);
  for (std::uint64_t code = 0; code < total; ++code) fn(frame_from_code(n, code));
}

/// Calls fn on every total map {0..n-1} -> {0..n-1}.
inline void for_each_function(std::size_t n, const std::function<void(const std::vector<Point>&)>& fn) {
  std::vector<Point> f(n, 0);
  while (true) {
    fn(f);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++f[i] < n) break;
      f[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

// Naive predicates, written directly from the definitions over pairs and
// triples.

inline bool naive_weakly_transitive(const DynamicFrame& fr) {
  const Point n = static_cast<Point>(fr.size());
  for (Point w = 0; w < n; ++w)
    for (Point v = 0; v < n; ++v)
      for (Point u = 0; u < n; ++u)
        if (fr.related(w, v) && fr.related(v, u) && w != u && !fr.related(w, u)) return false;
  return true;
}

inline bool naive_transitive(const DynamicFrame& fr) {
  const Point n = static_cast<Point>(fr.size());
  for (Point w = 0; w < n; ++w)
    for (Point v = 0; v < n; ++v)
      for (Point u = 0; u < n; ++u)
        if (fr.related(w, v) && fr.related(v, u) && !fr.related(w, u)) return false;
  return true;
}

inline bool naive_irreflexive(const DynamicFrame& fr) {
  for (Point w = 0; w < fr.size(); ++w)
    if (fr.related(w, w)) return false;
  return true;
}

inline bool naive_antisymmetric(const DynamicFrame& fr) {
  for (Point w = 0; w < fr.size(); ++w)
    for (Point v = 0; v < fr.size(); ++v)
      if (w != v && fr.related(w, v) && fr.related(v, w)) return false;
  return true;
}

/// Finite converse well-foundedness: no path of length |W| (pigeonhole gives
/// a cycle otherwise).
inline bool naive_converse_well_founded(const DynamicFrame& fr) {
  const std::size_t n = fr.size();
  std::vector<bool> reach(n, true);
  for (std::size_t step = 0; step < n; ++step) {
    std::vector<bool> next(n, false);
    for (Point w = 0; w < n; ++w)
      for (Point v = 0; v < n; ++v)
        if (fr.related(w, v) && reach[v]) next[w] = true;
    reach = next;
  }
  for (bool b : reach)
    if (b) return false;
  return true;
}

inline bool naive_weakly_monotonic(const DynamicFrame& fr) {
  for (Point w = 0; w < fr.size(); ++w)
    for (Point v = 0; v < fr.size(); ++v)
      if (fr.related(w, v) && !fr.related_or_equal(fr.apply(w), fr.apply(v))) return false;
  return true;
}

inline bool naive_persistent(const DynamicFrame& fr) {
  std::vector<bool> hit(fr.size(), false);
  for (Point w = 0; w < fr.size(); ++w) {
    if (hit[fr.apply(w)]) return false;
    hit[fr.apply(w)] = true;
  }
  for (Point w = 0; w < fr.size(); ++w)
    for (Point v = 0; v < fr.size(); ++v)
      if (fr.related(w, v) != fr.related(fr.apply(w), fr.apply(v))) return false;
  return true;
}

inline bool naive_in_class(const DynamicFrame& fr, FrameClass cls) {
  bool rel_ok = false;
  switch (static_logic(cls)) {
    case StaticLogic::WK4: rel_ok = naive_weakly_transitive(fr); break;
    case StaticLogic::K4: rel_ok = naive_transitive(fr); break;
    case StaticLogic::GL: rel_ok = naive_transitive(fr) && naive_irreflexive(fr); break;
  }
  if (!rel_ok) return false;
  return is_invertible_class(cls) ? naive_persistent(fr) : naive_weakly_monotonic(fr);
}

/// Pointwise Kripke evaluation on a frame model. The tangle clause is the
/// greatest fixpoint, computed over vectors of bools.
class NaiveEvaluator {
 public:
  NaiveEvaluator(const DynamicFrame& fr, const Valuation& val) : fr_(fr), val_(val) {}

  std::vector<bool> eval(const Formula& f) const {
    const std::size_t n = fr_.size();
    std::vector<bool> out(n, false);
    switch (f.op()) {
      case Op::Var: {
        auto it = val_.find(f.name());
        for (Point w = 0; w < n; ++w) out[w] = it != val_.end() && it->second.contains(w);
        break;
      }
      case Op::Bot:
        break;
      case Op::Neg: {
        auto a = eval(f.arg(0));
        for (Point w = 0; w < n; ++w) out[w] = !a[w];
        break;
      }
      case Op::And: {
        auto a = eval(f.arg(0));
        auto b = eval(f.arg(1));
        for (Point w = 0; w < n; ++w) out[w] = a[w] && b[w];
        break;
      }
      case Op::Dia: {
        auto a = eval(f.arg(0));
        for (Point w = 0; w < n; ++w)
          for (Point v = 0; v < n; ++v)
            if (fr_.related(w, v) && a[v]) out[w] = true;
        break;
      }
      case Op::Next: {
        auto a = eval(f.arg(0));
        for (Point w = 0; w < n; ++w) out[w] = a[fr_.apply(w)];
        break;
      }
      case Op::Tangle: {
        std::vector<std::vector<bool>> fam;
        for (const auto& g : f.args()) fam.push_back(eval(g));
        std::vector<bool> a(n, true);
        while (true) {
          std::vector<bool> next(n, false);
          for (Point w = 0; w < n; ++w) {
            if (!a[w]) continue;
            bool all = true;
            for (const auto& s : fam) {
              bool found = false;
              for (Point v = 0; v < n; ++v)
                if (fr_.related(w, v) && s[v] && a[v]) found = true;
              all = all && found;
            }
            next[w] = all;
          }
          if (next == a) break;
          a = next;
        }
        out = a;
        break;
      }
    }
    return out;
  }

  PointSet eval_set(const Formula& f) const {
    auto v = eval(f);
    PointSet s;
    for (Point w = 0; w < v.size(); ++w)
      if (v[w]) s.insert(w);
    return s;
  }

 private:
  const DynamicFrame& fr_;
  const Valuation& val_;
};

}  // namespace derivelog::testing
