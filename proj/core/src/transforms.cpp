#include "derivelog/transforms.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "derivelog/error.hpp"

namespace derivelog {

namespace {

const DynamicFrame& require_frame(const Model& m, const char* what) {
  if (m.frame() == nullptr) throw InputError(std::string(what) + " requires a frame-based model");
  return *m.frame();
}

/// The model's frame with the model's function attached.
DynamicFrame dynamic_frame(const Model& m, const char* what) {
  DynamicFrame fr = require_frame(m, what);
  fr.set_function(m.function());
  return fr;
}

Valuation pull_back(const Valuation& val, const std::vector<Point>& proj) {
  Valuation out;
  for (const auto& [name, set] : val) out[name] = preimage(proj, set);
  return out;
}

}  // namespace

Projected oplus(const Model& m) {
  const DynamicFrame src = dynamic_frame(m, "oplus");
  if (!in_class(src, FrameClass::WK4C)) throw ClassViolation("oplus needs a wK4C frame");

  const std::size_t n = src.size();
  std::vector<std::pair<Point, int>> label;
  std::vector<Point> base_id(n);
  for (Point w = 0; w < n; ++w) {
    base_id[w] = static_cast<Point>(label.size());
    label.emplace_back(w, 0);
    if (src.related(w, w)) label.emplace_back(w, 1);
  }
  if (label.size() > kMaxPoints) throw CapacityExceeded("oplus result exceeds point capacity");

  const std::size_t size = label.size();
  DynamicFrame out(size);
  std::vector<Point> proj(size);
  std::vector<Point> func(size);
  for (Point x = 0; x < size; ++x) {
    proj[x] = label[x].first;
    func[x] = base_id[src.apply(label[x].first)];
    for (Point y = 0; y < size; ++y) {
      if (x != y && src.related(label[x].first, label[y].first)) out.relate(x, y);
    }
  }
  out.set_function(func);
  Projected result{Model(std::move(out), pull_back(m.valuation(), proj)), std::move(proj)};

  PMorphismOptions opts;
  opts.require_surjective = true;
  if (!check_dynamic_pmorphism(result.model, m, result.projection, opts).ok) {
    throw std::logic_error("oplus projection is not a p-morphism");
  }
  return result;
}

Unwound unwind(const Model& m, std::optional<std::size_t> depth_bound,
               const std::optional<Formula>& query) {
  const DynamicFrame src = dynamic_frame(m, "unwind");
  if (!in_class(src, FrameClass::K4C)) throw ClassViolation("unwind needs a K4C frame");

  const std::size_t n = src.size();
  const RelationReport rr = relation_properties(src);
  const bool strict = rr.irreflexive.holds && rr.antisymmetric.holds;
  std::size_t bound = n;
  if (depth_bound) {
    if (*depth_bound == 0) throw InputError("unwind depth bound must be positive");
    bound = *depth_bound;
  } else if (!strict && query) {
    bound = n + next_depth(*query);
  }

  // Shortlex enumeration: all sequences of length k come before length k+1.
  std::vector<std::vector<Point>> seqs;
  std::vector<std::vector<Point>> level;
  for (Point w = 0; w < n; ++w) level.push_back({w});
  for (std::size_t len = 1; !level.empty(); ++len) {
    if (seqs.size() + level.size() > kMaxPoints) {
      throw CapacityExceeded("unwinding exceeds point capacity at length " + std::to_string(len));
    }
    seqs.insert(seqs.end(), level.begin(), level.end());
    if (len == bound) break;
    std::vector<std::vector<Point>> next;
    for (const auto& s : level) {
      src.successors(s.back()).for_each([&](Point v) {
        auto t = s;
        t.push_back(v);
        next.push_back(std::move(t));
      });
    }
    level = std::move(next);
  }

  std::map<std::vector<Point>, Point> id;
  for (Point x = 0; x < seqs.size(); ++x) id[seqs[x]] = x;

  PointSet frontier;
  const std::size_t size = seqs.size();
  DynamicFrame out(size);
  std::vector<Point> proj(size);
  std::vector<Point> func(size);
  for (Point x = 0; x < size; ++x) {
    const auto& s = seqs[x];
    proj[x] = s.back();
    for (Point y = 0; y < size; ++y) {
      const auto& t = seqs[y];
      if (t.size() > s.size() && std::equal(s.begin(), s.end(), t.begin())) out.relate(x, y);
    }
    std::vector<Point> image;
    for (Point w : s) {
      const Point g = src.apply(w);
      if (image.empty() || image.back() != g) image.push_back(g);
    }
    auto it = id.find(image);
    if (it == id.end()) throw std::logic_error("unwinding not closed under the function");
    func[x] = it->second;
    if (s.size() == bound && !src.successors(s.back()).empty()) frontier.insert(x);
  }
  out.set_function(func);
  Model model(std::move(out), pull_back(m.valuation(), proj));
  const bool exact = frontier.empty();
  Unwound result{std::move(model), std::move(proj), std::move(seqs), exact, bound, frontier};

  PMorphismOptions opts;
  opts.require_surjective = true;
  opts.skip_back = frontier;
  if (!check_dynamic_pmorphism(result.model, m, result.projection, opts).ok) {
    throw std::logic_error("unwind projection is not a p-morphism off the frontier");
  }
  return result;
}

Model power_system(const DerivativeSpace& sp, std::size_t n, const ExtendedValuation& ev) {
  if (n == 0) throw InputError("power system needs at least one copy");
  const std::size_t a = sp.size();
  if (a * n > kMaxPoints) throw CapacityExceeded("power system exceeds point capacity");
  DerivativeSpace space = sp;
  for (std::size_t i = 1; i < n; ++i) space = sum(space, sp);

  std::vector<Point> func(a * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (Point w = 0; w < a; ++w) {
      func[i * a + w] = static_cast<Point>(((i + 1) % n) * a + w);
    }
  }
  Valuation val;
  for (const auto& [key, set] : ev) {
    const auto& [name, iterate] = key;
    PointSet& target = val[name];
    if (iterate >= n) continue;
    set.for_each([&](Point w) { target.insert(static_cast<Point>(iterate * a + w)); });
  }
  const CheckMode mode = space.size() <= CheckMode{}.cap ? CheckMode::exhaustive_up_to()
                                                         : CheckMode::sampled(256, 0);
  if (!check_homeomorphism(func, space, space, mode).holds) {
    throw std::logic_error("power system shift is not a homeomorphism");
  }
  return Model(std::move(space), std::move(func), std::move(val));
}

PointSet extended_truth_set(const DerivativeSpace& sp, const ExtendedValuation& ev,
                            const Formula& f) {
  auto lookup = [&](const std::string& name, std::size_t i) {
    auto it = ev.find({name, i});
    return it == ev.end() ? PointSet{} : it->second & sp.all();
  };
  switch (f.op()) {
    case Op::Var: return lookup(f.name(), 0);
    case Op::Bot: return {};
    case Op::Neg: return extended_truth_set(sp, ev, f.arg(0)).complement(sp.size());
    case Op::And:
      return extended_truth_set(sp, ev, f.arg(0)) & extended_truth_set(sp, ev, f.arg(1));
    case Op::Dia: return sp.rho(extended_truth_set(sp, ev, f.arg(0)));
    case Op::Next: {
      std::size_t k = 0;
      Formula g = f;
      while (g.op() == Op::Next) {
        ++k;
        g = g.arg(0);
      }
      if (g.op() != Op::Var) throw PreconditionViolated("formula is not in next-normal form");
      return lookup(g.name(), k);
    }
    case Op::Tangle: {
      std::vector<PointSet> family;
      for (const auto& a : f.args()) family.push_back(extended_truth_set(sp, ev, a));
      return tangled_derivative(sp, family);
    }
  }
  return {};
}

PMorphismVerdict check_dynamic_pmorphism(const Model& m, const Model& n, const std::vector<Point>& h,
                                         const PMorphismOptions& opts) {
  const DynamicFrame& fm = require_frame(m, "p-morphism check");
  const DynamicFrame& fn = require_frame(n, "p-morphism check");
  if (h.size() != m.size()) throw InputError("p-morphism map must be total");
  for (Point x : h) {
    if (x >= n.size()) throw InputError("p-morphism map leaves the target");
  }
  auto fail = [](std::string what, std::vector<Point> witness, std::string var = {}) {
    return PMorphismVerdict{false, std::move(what), std::move(witness), std::move(var)};
  };

  for (Point w = 0; w < m.size(); ++w) {
    for (Point v = 0; v < m.size(); ++v) {
      if (fm.related(w, v) && !fn.related(h[w], h[v])) return fail("forth", {w, v});
    }
  }
  for (Point w = 0; w < m.size(); ++w) {
    if (opts.skip_back.contains(w)) continue;
    const PointSet reached = image(h, fm.successors(w));
    for (Point u = 0; u < n.size(); ++u) {
      if (fn.related(h[w], u) && !reached.contains(u)) return fail("back", {w, u});
    }
  }
  for (Point w = 0; w < m.size(); ++w) {
    if (opts.skip_commuting.contains(w)) continue;
    if (h[m.function()[w]] != n.function()[h[w]]) return fail("commuting", {w});
  }
  std::vector<std::string> vars;
  for (const auto& [name, set] : m.valuation()) vars.push_back(name);
  for (const auto& [name, set] : n.valuation()) {
    if (!m.valuation().contains(name)) vars.push_back(name);
  }
  std::sort(vars.begin(), vars.end());
  for (Point w = 0; w < m.size(); ++w) {
    for (const auto& var : vars) {
      if (m.value(var).contains(w) != n.value(var).contains(h[w])) return fail("atoms", {w}, var);
    }
  }
  if (opts.require_surjective) {
    const PointSet hit = image(h, m.space().all());
    for (Point u = 0; u < n.size(); ++u) {
      if (!hit.contains(u)) return fail("surjective", {u});
    }
  }
  return {};
}

TruthPreservationReport check_truth_preservation(const Model& m, const Model& n,
                                                 const std::vector<Point>& h,
                                                 const std::vector<Formula>& formulas,
                                                 const PMorphismOptions& opts,
                                                 const std::optional<LayerBound>& layers) {
  const PMorphismVerdict pv = check_dynamic_pmorphism(m, n, h, opts);
  if (!pv.ok) throw PreconditionViolated("map is not a dynamic p-morphism (" + pv.failed + ")");
  if (layers && layers->layer_of.size() != m.size()) {
    throw InputError("layer index must cover every point");
  }
  TruthPreservationReport report;
  for (const auto& f : formulas) {
    ++report.formulas_checked;
    PointSet scope = m.space().all();
    if (layers) {
      const std::size_t depth = next_depth(f);
      scope = {};
      for (Point x = 0; x < m.size(); ++x) {
        const std::size_t j = layers->layer_of[x];
        if (j <= layers->duration && depth <= layers->duration - j) scope.insert(x);
      }
    }
    const PointSet lhs = truth_set(m, f) & scope;
    const PointSet rhs = preimage(h, truth_set(n, f)) & scope;
    PointSet diff = (lhs - rhs) | (rhs - lhs);
    if (!diff.empty()) report.violations.push_back({f, diff});
  }
  return report;
}

MomentVerdict validate_moment(const Moment& m) {
  auto fail = [](std::string what, std::vector<Point> witness = {}) {
    return MomentVerdict{false, std::move(what), std::move(witness)};
  };
  const DynamicFrame& fr = m.frame;
  if (fr.has_function()) return fail("frame has function");
  if (m.root >= fr.size()) return fail("root", {m.root});
  for (Point w = 0; w < fr.size(); ++w) {
    if (!fr.related_or_equal(m.root, w)) return fail("rooted", {w});
  }
  const RelationReport rr = relation_properties(fr);
  if (!rr.tree_like.holds) return fail("tree-like", rr.tree_like.witness);
  if (!satisfies_static_logic(fr, static_logic(m.cls))) return fail("class");
  const PointSet all = fr.worlds();
  for (const auto& [name, set] : m.valuation) {
    if (!set.is_subset_of(all)) return fail("valuation");
  }
  return {};
}

Moment compose_moment(const ClusterSpec& cluster, const std::vector<Moment>& submoments,
                      FrameClass cls) {
  if (cluster.size == 0) throw InputError("root cluster must be nonempty");
  if (static_logic(cls) == StaticLogic::GL && (cluster.size != 1 || !cluster.rel.empty())) {
    throw ClassViolation("GL moments need a single irreflexive root");
  }
  std::size_t total = cluster.size;
  for (const auto& sm : submoments) total += sm.frame.size();
  if (total > kMaxPoints) throw CapacityExceeded("moment exceeds point capacity");

  Moment out{DynamicFrame(total), 0, {}, cls};
  for (const auto& [a, b] : cluster.rel) {
    if (a >= cluster.size || b >= cluster.size) throw InputError("cluster relation out of range");
    out.frame.relate(a, b);
  }
  for (const auto& [name, set] : cluster.valuation) out.valuation[name] |= set;
  std::size_t offset = cluster.size;
  for (const auto& sm : submoments) {
    for (const auto& [a, b] : sm.frame.pairs()) {
      out.frame.relate(static_cast<Point>(offset + a), static_cast<Point>(offset + b));
    }
    for (Point y = 0; y < cluster.size; ++y) {
      for (Point z = 0; z < sm.frame.size(); ++z) out.frame.relate(y, static_cast<Point>(offset + z));
    }
    for (const auto& [name, set] : sm.valuation) {
      PointSet& target = out.valuation[name];
      set.for_each([&](Point z) { target.insert(static_cast<Point>(offset + z)); });
    }
    offset += sm.frame.size();
  }
  const MomentVerdict mv = validate_moment(out);
  if (!mv.ok) throw ClassViolation("composed moment is invalid: " + mv.failed);
  return out;
}

StoryVerdict validate_story(const Story& s) {
  auto fail = [](std::string what, std::size_t layer, std::vector<Point> witness = {}) {
    return StoryVerdict{false, std::move(what), layer, std::move(witness)};
  };
  if (s.layers.empty()) return fail("layers", 0);
  if (s.maps.size() + 1 != s.layers.size()) return fail("maps", s.maps.size());
  for (std::size_t i = 0; i < s.layers.size(); ++i) {
    const MomentVerdict mv = validate_moment(s.layers[i]);
    if (!mv.ok) return fail("moment: " + mv.failed, i, mv.witness);
  }
  for (std::size_t i = 0; i < s.maps.size(); ++i) {
    const DynamicFrame& from = s.layers[i].frame;
    const DynamicFrame& to = s.layers[i + 1].frame;
    const auto& f = s.maps[i];
    if (f.size() != from.size()) return fail("total map", i);
    for (Point w = 0; w < f.size(); ++w) {
      if (f[w] >= to.size()) return fail("total map", i, {w});
    }
    for (Point w = 0; w < from.size(); ++w) {
      for (Point v = 0; v < from.size(); ++v) {
        if (from.related(w, v) && !to.related_or_equal(f[w], f[v])) {
          return fail("weakly monotonic", i, {w, v});
        }
      }
    }
    if (f[s.layers[i].root] != s.layers[i + 1].root) {
      return fail("root preserving", i, {s.layers[i].root});
    }
  }
  return {};
}

StoryModel story_to_model(const Story& s, FrameClass cls) {
  const StoryVerdict sv = validate_story(s);
  if (!sv.ok) {
    throw ClassViolation("invalid story: " + sv.failed + " at layer " + std::to_string(sv.layer));
  }
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& layer : s.layers) {
    offsets.push_back(total);
    total += layer.frame.size();
  }
  if (total > kMaxPoints) throw CapacityExceeded("story exceeds point capacity");

  DynamicFrame fr(total);
  std::vector<Point> func(total);
  Valuation val;
  LayerBound layers{std::vector<std::size_t>(total), s.duration()};
  for (std::size_t i = 0; i < s.layers.size(); ++i) {
    const Moment& mo = s.layers[i];
    const auto off = static_cast<Point>(offsets[i]);
    for (const auto& [a, b] : mo.frame.pairs()) fr.relate(off + a, off + b);
    for (Point w = 0; w < mo.frame.size(); ++w) {
      layers.layer_of[off + w] = i;
      func[off + w] = i + 1 < s.layers.size()
                          ? static_cast<Point>(offsets[i + 1] + s.maps[i][w])
                          : off + w;
    }
    for (const auto& [name, set] : mo.valuation) {
      PointSet& target = val[name];
      set.for_each([&](Point w) { target.insert(off + w); });
    }
  }
  fr.set_function(func);
  if (!in_class(fr, cls)) throw ClassViolation("story model is not in " + to_string(cls));
  return {Model(std::move(fr), std::move(val)), std::move(offsets), std::move(layers)};
}

}  // namespace derivelog
