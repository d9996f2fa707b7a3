#include "derivelog/frames.hpp"

#include <algorithm>
#include <cctype>

#include "derivelog/error.hpp"

namespace derivelog {

DynamicFrame::DynamicFrame(std::size_t worlds) : succ_(worlds) {
  if (worlds == 0) throw InputError("a frame needs at least one world");
  if (worlds > kMaxPoints) {
    throw CapacityExceeded("frame with " + std::to_string(worlds) + " worlds exceeds capacity " +
                           std::to_string(kMaxPoints));
  }
}

DynamicFrame::DynamicFrame(std::size_t worlds, const std::vector<std::pair<Point, Point>>& rel,
                           std::optional<std::vector<Point>> func)
    : DynamicFrame(worlds) {
  for (auto [w, v] : rel) relate(w, v);
  if (func) set_function(std::move(*func));
}

PointSet DynamicFrame::predecessors(Point v) const {
  PointSet out;
  for (std::size_t w = 0; w < size(); ++w) {
    if (succ_[w].contains(v)) out.insert(static_cast<Point>(w));
  }
  return out;
}

void DynamicFrame::relate(Point w, Point v) {
  if (w >= size() || v >= size()) {
    throw InputError("relation pair (" + std::to_string(w) + "," + std::to_string(v) +
                     ") out of range");
  }
  succ_[w].insert(v);
}

void DynamicFrame::unrelate(Point w, Point v) { succ_[w].erase(v); }

std::vector<std::pair<Point, Point>> DynamicFrame::pairs() const {
  std::vector<std::pair<Point, Point>> out;
  for (std::size_t w = 0; w < size(); ++w) {
    succ_[w].for_each([&](Point v) { out.emplace_back(static_cast<Point>(w), v); });
  }
  return out;
}

const std::vector<Point>& DynamicFrame::function() const {
  if (!func_) throw MissingFunction();
  return *func_;
}

void DynamicFrame::set_function(std::vector<Point> func) {
  if (func.size() != size()) throw InputError("function table must have one entry per world");
  for (Point p : func) {
    if (p >= size()) throw InputError("function value " + std::to_string(p) + " out of range");
  }
  func_ = std::move(func);
}

std::string to_string(FrameClass cls) {
  switch (cls) {
    case FrameClass::WK4C: return "wK4C";
    case FrameClass::K4C: return "K4C";
    case FrameClass::GLC: return "GLC";
    case FrameClass::WK4H: return "wK4H";
    case FrameClass::K4H: return "K4H";
    case FrameClass::GLH: return "GLH";
  }
  return "?";
}

FrameClass parse_frame_class(std::string_view name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (FrameClass cls : kAllClasses) {
    std::string candidate;
    for (char c : to_string(cls)) {
      candidate += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (candidate == lower) return cls;
  }
  throw InputError("unknown frame class '" + std::string(name) + "'");
}

bool is_invertible_class(FrameClass cls) {
  return cls == FrameClass::WK4H || cls == FrameClass::K4H || cls == FrameClass::GLH;
}

StaticLogic static_logic(FrameClass cls) {
  switch (cls) {
    case FrameClass::WK4C:
    case FrameClass::WK4H: return StaticLogic::WK4;
    case FrameClass::K4C:
    case FrameClass::K4H: return StaticLogic::K4;
    case FrameClass::GLC:
    case FrameClass::GLH: return StaticLogic::GL;
  }
  return StaticLogic::WK4;
}

std::string to_string(StaticLogic logic) {
  switch (logic) {
    case StaticLogic::WK4: return "wK4";
    case StaticLogic::K4: return "K4";
    case StaticLogic::GL: return "GL";
  }
  return "?";
}

PointSet downset(const DynamicFrame& fr, const PointSet& a) {
  PointSet out;
  for (std::size_t w = 0; w < fr.size(); ++w) {
    if (fr.successors(static_cast<Point>(w)).intersects(a)) out.insert(static_cast<Point>(w));
  }
  return out;
}

namespace {

Flag fail(std::vector<Point> witness) { return Flag{false, std::move(witness)}; }

Flag check_weak_transitivity(const DynamicFrame& fr) {
  const auto n = static_cast<Point>(fr.size());
  for (Point w = 0; w < n; ++w) {
    for (Point v = 0; v < n; ++v) {
      if (!fr.related(w, v)) continue;
      for (Point u = 0; u < n; ++u) {
        if (fr.related(v, u) && !fr.related_or_equal(w, u)) return fail({w, v, u});
      }
    }
  }
  return {};
}

Flag check_transitivity(const DynamicFrame& fr) {
  const auto n = static_cast<Point>(fr.size());
  for (Point w = 0; w < n; ++w) {
    for (Point v = 0; v < n; ++v) {
      if (!fr.related(w, v)) continue;
      for (Point u = 0; u < n; ++u) {
        if (fr.related(v, u) && !fr.related(w, u)) return fail({w, v, u});
      }
    }
  }
  return {};
}

Flag check_irreflexivity(const DynamicFrame& fr) {
  for (Point w = 0; w < fr.size(); ++w) {
    if (fr.related(w, w)) return fail({w});
  }
  return {};
}

Flag check_antisymmetry(const DynamicFrame& fr) {
  for (Point w = 0; w < fr.size(); ++w) {
    for (Point v = 0; v < fr.size(); ++v) {
      if (w != v && fr.related(w, v) && fr.related(v, w)) return fail({w, v});
    }
  }
  return {};
}

Flag check_converse_well_founded(const DynamicFrame& fr, const std::vector<PointSet>& reach) {
  if (auto irr = check_irreflexivity(fr); !irr.holds) return irr;
  for (Point w = 0; w < fr.size(); ++w) {
    for (Point v = 0; v < fr.size(); ++v) {
      if (w != v && fr.related(w, v) && reach[v].contains(w)) return fail({w, v});
    }
  }
  return {};
}

Flag check_tree_like(const DynamicFrame& fr) {
  const auto n = static_cast<Point>(fr.size());
  for (Point a = 0; a < n; ++a) {
    for (Point b = 0; b < n; ++b) {
      if (fr.related_or_equal(a, b) || fr.related_or_equal(b, a)) continue;
      for (Point c = 0; c < n; ++c) {
        if (fr.related_or_equal(a, c) && fr.related_or_equal(b, c)) return fail({a, b, c});
      }
    }
  }
  return {};
}

}  // namespace

std::vector<PointSet> reflexive_transitive_closure(const DynamicFrame& fr) {
  const std::size_t n = fr.size();
  std::vector<PointSet> reach(n);
  for (std::size_t w = 0; w < n; ++w) {
    reach[w] = fr.successors(static_cast<Point>(w));
    reach[w].insert(static_cast<Point>(w));
  }
  // Warshall over bitset rows.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t w = 0; w < n; ++w) {
      if (reach[w].contains(static_cast<Point>(k))) reach[w] |= reach[k];
    }
  }
  return reach;
}

RelationReport relation_properties(const DynamicFrame& fr) {
  RelationReport r;
  r.weakly_transitive = check_weak_transitivity(fr);
  r.transitive = check_transitivity(fr);
  r.irreflexive = check_irreflexivity(fr);
  r.antisymmetric = check_antisymmetry(fr);
  r.converse_well_founded = check_converse_well_founded(fr, reflexive_transitive_closure(fr));
  r.tree_like = check_tree_like(fr);
  return r;
}

bool satisfies_static_logic(const DynamicFrame& fr, StaticLogic logic) {
  switch (logic) {
    case StaticLogic::WK4: return check_weak_transitivity(fr).holds;
    case StaticLogic::K4: return check_transitivity(fr).holds;
    case StaticLogic::GL:
      return check_irreflexivity(fr).holds && check_transitivity(fr).holds;
  }
  return false;
}

FunctionReport function_properties(const DynamicFrame& fr) {
  const auto& f = fr.function();
  const auto n = static_cast<Point>(fr.size());
  FunctionReport r;
  for (Point w = 0; w < n && r.weakly_monotonic.holds; ++w) {
    for (Point v = 0; v < n; ++v) {
      if (fr.related(w, v) && !fr.related_or_equal(f[w], f[v])) {
        r.weakly_monotonic = fail({w, v});
        break;
      }
    }
  }
  for (Point w = 0; w < n && r.monotonic.holds; ++w) {
    for (Point v = 0; v < n; ++v) {
      if (fr.related(w, v) && !fr.related(f[w], f[v])) {
        r.monotonic = fail({w, v});
        break;
      }
    }
  }
  for (Point w = 0; w < n && r.persistent.holds; ++w) {
    for (Point v = w + 1; v < n; ++v) {
      if (f[w] == f[v]) {
        r.persistent = fail({w, v});
        break;
      }
    }
  }
  for (Point w = 0; w < n && r.persistent.holds; ++w) {
    for (Point v = 0; v < n; ++v) {
      if (fr.related(w, v) != fr.related(f[w], f[v])) {
        r.persistent = fail({w, v});
        break;
      }
    }
  }
  return r;
}

bool in_class(const DynamicFrame& fr, FrameClass cls) {
  auto fp = function_properties(fr);
  bool dynamic_ok = is_invertible_class(cls) ? fp.persistent.holds : fp.weakly_monotonic.holds;
  return dynamic_ok && satisfies_static_logic(fr, static_logic(cls));
}

std::vector<PointSet> clusters(const DynamicFrame& fr) {
  std::vector<PointSet> out(fr.size());
  for (Point w = 0; w < fr.size(); ++w) {
    out[w].insert(w);
    for (Point v = 0; v < fr.size(); ++v) {
      if (fr.related(w, v) && fr.related(v, w)) out[w].insert(v);
    }
  }
  return out;
}

}  // namespace derivelog
