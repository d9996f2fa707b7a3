#include "derivelog/search.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "derivelog/error.hpp"
#include "derivelog/random.hpp"

namespace derivelog {

void SearchBudget::validate() const {
  if (max_worlds == 0) throw InputError("max_worlds must be positive");
  if (max_worlds > kMaxEnumerationWorlds) {
    throw InputError("max_worlds above " + std::to_string(kMaxEnumerationWorlds) +
                     " is beyond frame enumeration");
  }
  if (max_story_branching == 0) throw InputError("story branching must be positive");
  if (sampled_valuations && *sampled_valuations == 0) {
    throw InputError("sampled valuations need a positive sample count");
  }
  if (jobs == 0) throw InputError("jobs must be positive");
  if (time_limit.count() < 0) throw InputError("time limit must not be negative");
}

std::string to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Satisfiable: return "Satisfiable";
    case VerdictKind::UnsatUpToBound: return "UnsatUpToBound";
    case VerdictKind::ValidUpToBound: return "ValidUpToBound";
    case VerdictKind::CounterModel: return "CounterModel";
  }
  return "?";
}

namespace {

constexpr std::size_t kN = kMaxEnumerationWorlds;
using Rows = std::array<std::uint32_t, kN>;
using Table = std::array<Point, kN>;

Rows rows_of(std::uint64_t code, std::size_t n) {
  Rows r{};
  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  for (std::size_t w = 0; w < n; ++w) r[w] = static_cast<std::uint32_t>((code >> (w * n)) & mask);
  return r;
}

bool rel(const Rows& r, std::size_t a, std::size_t b) { return (r[a] >> b) & 1U; }
bool leq(const Rows& r, std::size_t a, std::size_t b) { return a == b || rel(r, a, b); }

bool static_ok(const Rows& r, std::size_t n, StaticLogic logic) {
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t v = 0; v < n; ++v) {
      if (!rel(r, w, v)) continue;
      std::uint32_t beyond = r[v] & ~r[w];
      if (logic == StaticLogic::WK4) beyond &= ~(1U << w);
      if (beyond != 0) return false;
    }
    if (logic == StaticLogic::GL && rel(r, w, w)) return false;
  }
  return true;
}

/// Relation codes of n worlds in increasing order, filtered by a static
/// logic or (logic == nullopt) unfiltered. Cached per process.
const std::vector<std::uint64_t>& relation_list(std::size_t n, std::optional<StaticLogic> logic) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, int>, std::unique_ptr<std::vector<std::uint64_t>>> cache;
  if (n == 0 || n > kN) {
    throw InputError("frame enumeration supports 1.." + std::to_string(kN) + " worlds");
  }
  if (!logic && n > 4) throw InputError("unfiltered frame enumeration supports at most 4 worlds");
  const int key = logic ? static_cast<int>(*logic) : -1;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, key}];
  if (!slot) {
    slot = std::make_unique<std::vector<std::uint64_t>>();
    const std::uint64_t total = std::uint64_t{1} << (n * n);
    for (std::uint64_t code = 0; code < total; ++code) {
      if (!logic || static_ok(rows_of(code, n), n, *logic)) slot->push_back(code);
    }
  }
  return *slot;
}

std::size_t indegree(const Rows& r, std::size_t n, std::size_t w) {
  std::size_t d = 0;
  for (std::size_t v = 0; v < n; ++v) d += rel(r, v, w) ? 1 : 0;
  return d;
}

using RelSig = std::array<std::size_t, 3>;

RelSig relation_signature(const Rows& r, std::size_t n, std::size_t w) {
  return {rel(r, w, w) ? 1U : 0U, static_cast<std::size_t>(std::popcount(r[w])), indegree(r, n, w)};
}

/// Necessary condition for the full signature order: the relational prefix
/// is already sorted.
bool relation_sorted(const Rows& r, std::size_t n) {
  for (std::size_t w = 1; w < n; ++w) {
    if (relation_signature(r, n, w) < relation_signature(r, n, w - 1)) return false;
  }
  return true;
}

/// Canonical-form filter: worlds sorted by (reflexive, out-degree,
/// in-degree, fixed by f, |f^-1(w)|). Every isomorphism class keeps at
/// least one member.
bool signature_sorted(const Rows& r, const Table& f, std::size_t n) {
  std::array<std::size_t, 5> prev{};
  for (std::size_t w = 0; w < n; ++w) {
    const RelSig rs = relation_signature(r, n, w);
    std::size_t pre = 0;
    for (std::size_t v = 0; v < n; ++v) pre += f[v] == w ? 1 : 0;
    std::array<std::size_t, 5> sig{rs[0], rs[1], rs[2], f[w] == w ? 1U : 0U, pre};
    if (w > 0 && sig < prev) return false;
    prev = sig;
  }
  return true;
}

enum class FuncMode { Any, WeaklyMonotonic, Persistent };

FuncMode func_mode(FrameClass cls, bool filter) {
  if (!filter) return FuncMode::Any;
  return is_invertible_class(cls) ? FuncMode::Persistent : FuncMode::WeaklyMonotonic;
}

/// Function tables on n worlds in lexicographic order, pruned by the mode's
/// pairwise condition as soon as both endpoints are assigned.
template <class Visit>
bool for_each_function(const Rows& r, std::size_t n, FuncMode mode, Visit&& visit) {
  Table f{};
  std::uint32_t used = 0;
  auto assign = [&](auto& self, std::size_t x) -> bool {
    if (x == n) return visit(f);
    for (Point y = 0; y < n; ++y) {
      if (mode == FuncMode::Persistent && ((used >> y) & 1U)) continue;
      f[x] = y;
      bool ok = true;
      for (std::size_t z = 0; z <= x && ok; ++z) {
        if (mode == FuncMode::WeaklyMonotonic) {
          if (rel(r, z, x) && !leq(r, f[z], y)) ok = false;
          if (rel(r, x, z) && !leq(r, y, f[z])) ok = false;
        } else if (mode == FuncMode::Persistent) {
          if (rel(r, z, x) != rel(r, f[z], y)) ok = false;
          if (rel(r, x, z) != rel(r, y, f[z])) ok = false;
        }
      }
      if (!ok) continue;
      used |= 1U << y;
      const bool go_on = self(self, x + 1);
      used &= ~(1U << y);
      if (!go_on) return false;
    }
    return true;
  };
  return assign(assign, 0);
}

DynamicFrame make_frame(const Rows& r, std::size_t n, const Table* f) {
  DynamicFrame fr(n);
  for (Point w = 0; w < n; ++w) {
    for (Point v = 0; v < n; ++v) {
      if (rel(r, w, v)) fr.relate(w, v);
    }
  }
  if (f != nullptr) fr.set_function(std::vector<Point>(f->begin(), f->begin() + n));
  return fr;
}

/// Codes of `bits` bits ordered by popcount, then value (Gosper's hack).
template <class Try>
bool for_each_code(std::size_t bits, Try&& attempt) {
  if (attempt(std::uint64_t{0})) return true;
  const std::uint64_t limit = std::uint64_t{1} << bits;
  for (std::size_t c = 1; c <= bits; ++c) {
    std::uint64_t v = (std::uint64_t{1} << c) - 1;
    while (v < limit) {
      if (attempt(v)) return true;
      const std::uint64_t u = v & (~v + 1);
      const std::uint64_t w = v + u;
      v = w | (((v ^ w) / u) >> 2);
    }
  }
  return false;
}

class Deadline {
 public:
  explicit Deadline(std::chrono::milliseconds limit)
      : active_(limit.count() > 0), end_(std::chrono::steady_clock::now() + limit) {}
  bool passed() const { return active_ && std::chrono::steady_clock::now() > end_; }

 private:
  bool active_;
  std::chrono::steady_clock::time_point end_;
};

/// Looks for a valuation of `values.size()` variables making `target` hold
/// at a point of `scope`. Exhaustive order: all-empty first, then by
/// cardinality. Leaves the witnessing values in `values`.
struct ValuationSweep {
  const CompiledFormula& compiled;
  std::optional<std::size_t> samples;
  std::vector<PointSet> values;
  std::vector<PointSet> scratch;

  std::optional<Point> run(const DerivativeSpace& sp, const std::vector<Point>& func,
                           const PointSet& scope, std::uint64_t seed) {
    const std::size_t n = sp.size();
    std::optional<Point> hit;
    auto test = [&]() {
      const PointSet truth = compiled.evaluate(sp, func, values, scratch) & scope;
      if (truth.empty()) return false;
      hit = truth.first();
      return true;
    };
    if (samples) {
      for (std::size_t s = 0; s < *samples; ++s) {
        Rng rng(mix_seed(seed, s));
        for (auto& v : values) v = rng.subset(n);
        if (test()) return hit;
      }
      return std::nullopt;
    }
    const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
    for_each_code(n * values.size(), [&](std::uint64_t code) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = PointSet::from_mask((code >> (i * n)) & mask);
      }
      return test();
    });
    return hit;
  }
};

Valuation to_valuation(const std::vector<std::string>& vars, const std::vector<PointSet>& values) {
  Valuation val;
  for (std::size_t i = 0; i < vars.size(); ++i) val[vars[i]] = values[i];
  return val;
}

void check_valuation_budget(const SearchBudget& b, std::size_t points, std::size_t vars,
                            std::size_t completed, std::size_t scanned) {
  if (b.sampled_valuations) return;
  const std::size_t bits = points * vars;
  if (bits > kValuationBudgetBits) {
    throw BudgetExceeded("exhaustive valuations over " + std::to_string(points) + " points and " +
                             std::to_string(vars) + " variables exceed 2^" +
                             std::to_string(kValuationBudgetBits),
                         completed, scanned);
  }
}

void atomic_min(std::atomic<std::size_t>& a, std::size_t v) {
  std::size_t cur = a.load();
  while (v < cur && !a.compare_exchange_weak(cur, v)) {
  }
}

template <class Fn>
void run_workers(std::size_t jobs, Fn&& fn) {
  if (jobs <= 1) {
    fn(0);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < jobs; ++k) pool.emplace_back([&fn, k] { fn(k); });
  for (auto& t : pool) t.join();
}

Verdict verified(Verdict v, const Formula& f, FrameClass cls, bool check_class) {
  const Model& m = *v.model;
  const bool want = v.kind == VerdictKind::Satisfiable;
  if (model_check(m, f, v.point).holds != want) {
    throw std::logic_error("search witness failed re-verification");
  }
  if (check_class) {
    DynamicFrame fr = *m.frame();
    fr.set_function(m.function());
    if (!in_class(fr, cls)) throw std::logic_error("search witness is not in the queried class");
  }
  return v;
}

Verdict negated(Verdict v) {
  v.kind = v.kind == VerdictKind::Satisfiable ? VerdictKind::CounterModel : VerdictKind::ValidUpToBound;
  return v;
}

}  // namespace

void for_each_frame(std::size_t n, FrameClass cls, const FrameEnumOptions& opts,
                    const std::function<bool(const DynamicFrame&)>& visit) {
  const auto& rels = relation_list(
      n, opts.class_filter ? std::optional<StaticLogic>(static_logic(cls)) : std::nullopt);
  const FuncMode mode = func_mode(cls, opts.class_filter);
  for (std::uint64_t code : rels) {
    const Rows r = rows_of(code, n);
    if (opts.prune_isomorphic && !relation_sorted(r, n)) continue;
    const bool go_on = for_each_function(r, n, mode, [&](const Table& f) {
      if (opts.prune_isomorphic && !signature_sorted(r, f, n)) return true;
      return visit(make_frame(r, n, &f));
    });
    if (!go_on) return;
  }
}

std::vector<DynamicFrame> enumerate_frames(std::size_t n, FrameClass cls,
                                           const FrameEnumOptions& opts) {
  std::vector<DynamicFrame> out;
  for_each_frame(n, cls, opts, [&](const DynamicFrame& fr) {
    out.push_back(fr);
    return true;
  });
  return out;
}

Verdict sat_search(const Formula& f, FrameClass cls, const SearchBudget& b) {
  b.validate();
  const auto vars = variables(f);
  const CompiledFormula compiled(f, vars);
  const Deadline deadline(b.time_limit);
  const FuncMode mode = func_mode(cls, b.class_filter);
  const std::size_t jobs = b.jobs;

  struct Hit {
    std::size_t rel_index;
    std::size_t within;
    DynamicFrame frame;
    std::vector<PointSet> values;
    Point point;
  };

  std::size_t scanned_total = 0;
  for (std::size_t n = 1; n <= b.max_worlds; ++n) {
    check_valuation_budget(b, n, vars.size(), n - 1, scanned_total);
    const auto& rels = relation_list(
        n, b.class_filter ? std::optional<StaticLogic>(static_logic(cls)) : std::nullopt);
    std::vector<std::uint32_t> counts(rels.size(), 0);
    std::atomic<std::size_t> best{std::numeric_limits<std::size_t>::max()};
    std::atomic<bool> timed_out{false};
    std::vector<std::optional<Hit>> hits(jobs);

    run_workers(jobs, [&](std::size_t k) {
      ValuationSweep sweep{compiled, b.sampled_valuations, std::vector<PointSet>(vars.size()), {}};
      for (std::size_t ri = k; ri < rels.size(); ri += jobs) {
        if (ri > best.load() || timed_out.load()) break;
        const Rows r = rows_of(rels[ri], n);
        if (b.prune_isomorphic && !relation_sorted(r, n)) continue;
        std::uint32_t count = 0;
        std::uint64_t func_index = 0;
        bool stop = false;
        for_each_function(r, n, mode, [&](const Table& t) {
          ++func_index;
          if (b.prune_isomorphic && !signature_sorted(r, t, n)) return true;
          if (deadline.passed()) {
            timed_out = true;
            stop = true;
            return false;
          }
          ++count;
          DynamicFrame fr = make_frame(r, n, &t);
          const DerivativeSpace sp = DerivativeSpace::from_frame(fr);
          const std::uint64_t seed = mix_seed(mix_seed(mix_seed(b.seed, n), ri), func_index);
          auto pt = sweep.run(sp, fr.function(), sp.all(), seed);
          if (!pt) return true;
          hits[k] = Hit{ri, count, std::move(fr), sweep.values, *pt};
          atomic_min(best, ri);
          stop = true;
          return false;
        });
        counts[ri] = count;
        if (stop) break;
      }
    });

    if (timed_out) {
      std::size_t partial = scanned_total;
      for (auto c : counts) partial += c;
      throw BudgetExceeded("time limit reached while scanning frames of size " + std::to_string(n),
                           n - 1, partial);
    }
    const Hit* winner = nullptr;
    for (const auto& h : hits) {
      if (h && (winner == nullptr || h->rel_index < winner->rel_index)) winner = &*h;
    }
    if (winner != nullptr) {
      std::size_t scanned = scanned_total;
      for (std::size_t ri = 0; ri < winner->rel_index; ++ri) scanned += counts[ri];
      scanned += winner->within;
      Verdict v;
      v.kind = VerdictKind::Satisfiable;
      v.model = Model(winner->frame, to_valuation(vars, winner->values));
      v.point = winner->point;
      v.budget = b;
      v.structures_scanned = scanned;
      v.method = "frames";
      return verified(std::move(v), f, cls, b.class_filter);
    }
    for (auto c : counts) scanned_total += c;
  }
  Verdict v;
  v.kind = VerdictKind::UnsatUpToBound;
  v.budget = b;
  v.structures_scanned = scanned_total;
  v.method = "frames";
  return v;
}

Verdict valid_at_bound(const Formula& f, FrameClass cls, const SearchBudget& b) {
  return negated(sat_search(Formula::neg(f), cls, b));
}

namespace {

struct MomentShape {
  std::size_t size;
  Rows rows;
};

bool tree_like(const Rows& r, std::size_t n) {
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      if (leq(r, a, b) || leq(r, b, a)) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (leq(r, a, c) && leq(r, b, c)) return false;
      }
    }
  }
  return true;
}

/// Longest chain of clusters from the root, and the largest number of
/// immediate successor clusters of any cluster. Assumes weak transitivity.
std::pair<std::size_t, std::size_t> height_and_branching(const Rows& r, std::size_t n) {
  auto strictly_below = [&](std::size_t x, std::size_t y) { return rel(r, x, y) && !rel(r, y, x); };
  auto same_cluster = [&](std::size_t x, std::size_t y) {
    return x == y || (rel(r, x, y) && rel(r, y, x));
  };
  std::array<std::size_t, kN> h{};
  // Points with fewer strict successors come first, so h is ready when read.
  std::array<std::size_t, kN> order{};
  std::iota(order.begin(), order.begin() + n, 0);
  std::array<std::size_t, kN> above{};
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) above[x] += strictly_below(x, y) ? 1 : 0;
  }
  std::sort(order.begin(), order.begin() + n,
            [&](std::size_t a, std::size_t b) { return above[a] < above[b]; });
  std::size_t height = 0;
  std::size_t branching = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = order[i];
    h[x] = 1;
    std::vector<std::size_t> reps;
    for (std::size_t y = 0; y < n; ++y) {
      if (!strictly_below(x, y)) continue;
      h[x] = std::max(h[x], h[y] + 1);
      bool immediate = true;
      for (std::size_t z = 0; z < n && immediate; ++z) {
        if (strictly_below(x, z) && strictly_below(z, y)) immediate = false;
      }
      if (!immediate) continue;
      if (std::none_of(reps.begin(), reps.end(), [&](std::size_t c) { return same_cluster(c, y); })) {
        reps.push_back(y);
      }
    }
    height = std::max(height, h[x]);
    branching = std::max(branching, reps.size());
  }
  return {height, branching};
}

/// Rooted (root 0) tree-like static frames of the logic, by relation code.
std::vector<MomentShape> moment_shapes(std::size_t s, StaticLogic logic, std::size_t max_height,
                                       std::size_t max_branching) {
  std::vector<MomentShape> out;
  const std::uint32_t full = (1U << s) - 1;
  for (std::uint64_t code : relation_list(s, logic)) {
    const Rows r = rows_of(code, s);
    if ((r[0] | 1U) != full) continue;
    if (!tree_like(r, s)) continue;
    const auto [height, branching] = height_and_branching(r, s);
    if (height > max_height || branching > max_branching) continue;
    out.push_back({s, r});
  }
  return out;
}

Moment to_moment(const MomentShape& shape, FrameClass cls) {
  return Moment{make_frame(shape.rows, shape.size, nullptr), 0, {}, cls};
}

/// Root-preserving weakly monotonic maps between two moments, in
/// lexicographic order.
std::vector<std::vector<Point>> story_maps(const MomentShape& from, const MomentShape& to) {
  std::vector<std::vector<Point>> out;
  std::vector<Point> f(from.size);
  auto assign = [&](auto& self, std::size_t x) -> void {
    if (x == from.size) {
      out.push_back(f);
      return;
    }
    for (Point y = 0; y < to.size; ++y) {
      if (x == 0 && y != 0) break;
      f[x] = y;
      bool ok = true;
      for (std::size_t z = 0; z <= x && ok; ++z) {
        if (rel(from.rows, z, x) && !leq(to.rows, f[z], y)) ok = false;
        if (rel(from.rows, x, z) && !leq(to.rows, y, f[z])) ok = false;
      }
      if (ok) self(self, x + 1);
    }
  };
  assign(assign, 0);
  return out;
}

/// Compositions of `total` into `parts` positive sizes, in lexicographic order.
void compositions(std::size_t total, std::size_t parts, std::vector<std::size_t>& cur,
                  std::vector<std::vector<std::size_t>>& out) {
  if (parts == 0) {
    if (total == 0) out.push_back(cur);
    return;
  }
  for (std::size_t s = 1; s + (parts - 1) <= total; ++s) {
    cur.push_back(s);
    compositions(total - s, parts - 1, cur, out);
    cur.pop_back();
  }
}

std::size_t story_duration(std::size_t depth, const SearchBudget& b) {
  if (!b.story_duration) return depth;
  if (*b.story_duration < depth) {
    throw InputError("story duration " + std::to_string(*b.story_duration) +
                     " is below the next-depth " + std::to_string(depth));
  }
  return *b.story_duration;
}

Verdict story_search_continuous(const Formula& f, FrameClass cls, const SearchBudget& b) {
  const std::size_t duration = story_duration(next_depth(f), b);
  const std::size_t layers = duration + 1;
  const auto vars = variables(f);
  const CompiledFormula compiled(f, vars);
  const Deadline deadline(b.time_limit);
  const StaticLogic logic = static_logic(cls);
  const std::size_t max_height = modal_depth(f) + 1;

  std::vector<std::vector<MomentShape>> shapes(b.max_worlds + 1);
  for (std::size_t s = 1; s <= b.max_worlds; ++s) {
    shapes[s] = moment_shapes(s, logic, max_height, b.max_story_branching);
  }

  ValuationSweep sweep{compiled, b.sampled_valuations, std::vector<PointSet>(vars.size()), {}};
  std::size_t scanned = 0;
  for (std::size_t total = layers; total <= b.max_worlds; ++total) {
    check_valuation_budget(b, total, vars.size(), total - 1, scanned);
    std::vector<std::vector<std::size_t>> sizes;
    std::vector<std::size_t> cur;
    compositions(total, layers, cur, sizes);
    for (const auto& sz : sizes) {
      std::vector<const MomentShape*> chosen(layers);
      std::vector<std::vector<Point>> maps(duration);
      std::optional<Verdict> found;

      auto try_story = [&]() -> bool {
        if (deadline.passed()) {
          throw BudgetExceeded("time limit reached during story search", total - 1, scanned);
        }
        ++scanned;
        DynamicFrame fr(total);
        std::vector<Point> func(total);
        std::size_t off = 0;
        for (std::size_t i = 0; i < layers; ++i) {
          const MomentShape& m = *chosen[i];
          for (std::size_t w = 0; w < m.size; ++w) {
            for (std::size_t v = 0; v < m.size; ++v) {
              if (rel(m.rows, w, v)) fr.relate(static_cast<Point>(off + w), static_cast<Point>(off + v));
            }
            func[off + w] = static_cast<Point>(i < duration ? off + m.size + maps[i][w] : off + w);
          }
          off += m.size;
        }
        const DerivativeSpace sp = DerivativeSpace::from_frame(fr);
        if (!sweep.run(sp, func, PointSet::singleton(0), mix_seed(b.seed, scanned))) return false;

        Story story;
        off = 0;
        for (std::size_t i = 0; i < layers; ++i) {
          Moment mo = to_moment(*chosen[i], cls);
          for (std::size_t vi = 0; vi < vars.size(); ++vi) {
            PointSet local;
            sweep.values[vi].for_each([&](Point x) {
              if (x >= off && x < off + chosen[i]->size) local.insert(static_cast<Point>(x - off));
            });
            mo.valuation[vars[vi]] = local;
          }
          off += chosen[i]->size;
          story.layers.push_back(std::move(mo));
        }
        story.maps = maps;
        Verdict v;
        v.kind = VerdictKind::Satisfiable;
        v.model = story_to_model(story, cls).model;
        v.point = 0;
        v.budget = b;
        v.structures_scanned = scanned;
        v.method = "story";
        v.duration = duration;
        found = verified(std::move(v), f, cls, true);
        return true;
      };

      auto pick_maps = [&](auto& self, std::size_t i) -> bool {
        if (i == duration) return try_story();
        for (const auto& m : story_maps(*chosen[i], *chosen[i + 1])) {
          maps[i] = m;
          if (self(self, i + 1)) return true;
        }
        return false;
      };
      auto pick_moments = [&](auto& self, std::size_t i) -> bool {
        if (i == layers) return pick_maps(pick_maps, 0);
        for (const auto& shape : shapes[sz[i]]) {
          chosen[i] = &shape;
          if (self(self, i + 1)) return true;
        }
        return false;
      };
      if (pick_moments(pick_moments, 0)) return *found;
    }
  }
  Verdict v;
  v.kind = VerdictKind::UnsatUpToBound;
  v.budget = b;
  v.structures_scanned = scanned;
  v.method = "story";
  v.duration = duration;
  return v;
}

std::string atom_name(const std::string& var, std::size_t iterate) {
  return var + "@" + std::to_string(iterate);
}

/// Replaces each X^i p of a next-normal formula by a fresh variable.
Formula flatten_atoms(const Formula& f, std::set<std::pair<std::string, std::size_t>>& atoms) {
  if (f.op() == Op::Var || f.op() == Op::Next) {
    std::size_t k = 0;
    Formula g = f;
    while (g.op() == Op::Next) {
      ++k;
      g = g.arg(0);
    }
    atoms.insert({g.name(), k});
    return Formula::var(atom_name(g.name(), k));
  }
  std::vector<Formula> args;
  for (const auto& a : f.args()) args.push_back(flatten_atoms(a, atoms));
  return args.empty() ? f : f.with_args(std::move(args));
}

Verdict story_search_invertible(const Formula& f, FrameClass cls, const SearchBudget& b) {
  const Formula nf = to_next_normal_form(f);
  const std::size_t duration = story_duration(next_depth(nf), b);
  const std::size_t copies = duration + 1;
  std::set<std::pair<std::string, std::size_t>> atom_set;
  const Formula flat = flatten_atoms(nf, atom_set);
  const std::vector<std::pair<std::string, std::size_t>> atoms(atom_set.begin(), atom_set.end());
  std::vector<std::string> names;
  for (const auto& [var, i] : atoms) names.push_back(atom_name(var, i));
  const CompiledFormula compiled(flat, names);
  const Deadline deadline(b.time_limit);
  const std::size_t max_height = modal_depth(f) + 1;

  ValuationSweep sweep{compiled, b.sampled_valuations, std::vector<PointSet>(names.size()), {}};
  std::size_t scanned = 0;
  for (std::size_t s = 1; s * copies <= b.max_worlds; ++s) {
    check_valuation_budget(b, s, names.size(), s - 1, scanned);
    for (const auto& shape : moment_shapes(s, static_logic(cls), max_height, b.max_story_branching)) {
      if (deadline.passed()) {
        throw BudgetExceeded("time limit reached during story search", s - 1, scanned);
      }
      ++scanned;
      const DynamicFrame fr = make_frame(shape.rows, s, nullptr);
      const DerivativeSpace sp = DerivativeSpace::from_frame(fr);
      std::vector<Point> id(s);
      std::iota(id.begin(), id.end(), 0);
      if (!sweep.run(sp, id, PointSet::singleton(0), mix_seed(b.seed, scanned))) continue;

      ExtendedValuation ev;
      for (std::size_t i = 0; i < atoms.size(); ++i) ev[atoms[i]] = sweep.values[i];
      Verdict v;
      v.kind = VerdictKind::Satisfiable;
      v.model = power_system(sp, copies, ev);
      v.point = 0;
      v.budget = b;
      v.structures_scanned = scanned;
      v.method = "story";
      v.duration = duration;
      return verified(std::move(v), f, cls, true);
    }
  }
  Verdict v;
  v.kind = VerdictKind::UnsatUpToBound;
  v.budget = b;
  v.structures_scanned = scanned;
  v.method = "story";
  v.duration = duration;
  return v;
}

}  // namespace

Verdict story_search(const Formula& f, FrameClass cls, const SearchBudget& b) {
  b.validate();
  return is_invertible_class(cls) ? story_search_invertible(f, cls, b)
                                  : story_search_continuous(f, cls, b);
}

Verdict story_valid_at_bound(const Formula& f, FrameClass cls, const SearchBudget& b) {
  return negated(story_search(Formula::neg(f), cls, b));
}

namespace {

void transitive_closure(DynamicFrame& fr) {
  const std::size_t n = fr.size();
  for (Point k = 0; k < n; ++k) {
    for (Point i = 0; i < n; ++i) {
      if (!fr.related(i, k)) continue;
      fr.successors(k).for_each([&](Point j) { fr.relate(i, j); });
    }
  }
}

DynamicFrame random_relation(StaticLogic logic, std::size_t n, Rng& rng) {
  DynamicFrame fr(n);
  if (logic == StaticLogic::GL) {
    std::vector<Point> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.chance(1, 2)) fr.relate(perm[i], perm[j]);
      }
    }
    transitive_closure(fr);
    return fr;
  }
  for (Point w = 0; w < n; ++w) {
    for (Point v = 0; v < n; ++v) {
      if (rng.chance(1, 3)) fr.relate(w, v);
    }
  }
  if (logic == StaticLogic::K4) {
    transitive_closure(fr);
    return fr;
  }
  // Weakly transitive closure: reachability between distinct worlds, with
  // reflexivity left as drawn.
  DynamicFrame tc = fr;
  transitive_closure(tc);
  for (Point w = 0; w < n; ++w) {
    tc.successors(w).for_each([&](Point u) {
      if (u != w) fr.relate(w, u);
    });
  }
  return fr;
}

/// Disjoint copies of a base relation; the copy shift is then an automorphism.
DynamicFrame copied_relation(const DynamicFrame& base, std::size_t copies) {
  const std::size_t m = base.size();
  DynamicFrame fr(m * copies);
  for (std::size_t c = 0; c < copies; ++c) {
    for (const auto& [a, b] : base.pairs()) {
      fr.relate(static_cast<Point>(c * m + a), static_cast<Point>(c * m + b));
    }
  }
  return fr;
}

std::vector<std::vector<Point>> automorphisms(const DynamicFrame& fr) {
  const std::size_t n = fr.size();
  std::vector<std::vector<Point>> out;
  std::vector<Point> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (Point w = 0; w < n && ok; ++w) {
      for (Point v = 0; v < n && ok; ++v) {
        if (fr.related(w, v) != fr.related(perm[w], perm[v])) ok = false;
      }
    }
    if (ok) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// Redirects f(v) to f(w) for the least violating pair w rel v until
/// weakly monotonic. Returns false if it has not settled within the bound.
bool repair_weakly_monotonic(const DynamicFrame& fr, std::vector<Point>& f) {
  const std::size_t n = fr.size();
  for (std::size_t round = 0; round < 4 * n * n + 4; ++round) {
    bool clean = true;
    for (Point w = 0; w < n && clean; ++w) {
      for (Point v = 0; v < n && clean; ++v) {
        if (fr.related(w, v) && !fr.related_or_equal(f[w], f[v])) {
          f[v] = f[w];
          clean = false;
        }
      }
    }
    if (clean) return true;
  }
  return false;
}

constexpr std::size_t kGenerationAttempts = 32;
constexpr std::size_t kAutomorphismSearchCap = 8;

}  // namespace

Model random_model(FrameClass cls, std::size_t size, std::uint64_t seed,
                   const RandomModelOptions& opts) {
  if (size == 0) throw InputError("random model needs at least one world");
  if (size > kMaxPoints) throw CapacityExceeded("random model exceeds point capacity");
  Rng rng(seed);
  const StaticLogic logic = static_logic(cls);
  for (std::size_t attempt = 0; attempt < kGenerationAttempts; ++attempt) {
    DynamicFrame fr(size);
    std::vector<Point> f(size);
    if (!is_invertible_class(cls)) {
      fr = random_relation(logic, size, rng);
      for (auto& x : f) x = static_cast<Point>(rng.below(size));
      if (!opts.broken_repair && !repair_weakly_monotonic(fr, f)) continue;
    } else {
      std::vector<std::size_t> divisors;
      for (std::size_t d = 2; d <= size; ++d) {
        if (size % d == 0) divisors.push_back(d);
      }
      std::size_t copies = 1;
      if (!divisors.empty() && rng.chance(1, 2)) copies = divisors[rng.below(divisors.size())];
      fr = copied_relation(random_relation(logic, size / copies, rng), copies);
      if (opts.broken_repair) {
        for (auto& x : f) x = static_cast<Point>(rng.below(size));
      } else if (size <= kAutomorphismSearchCap) {
        const auto autos = automorphisms(fr);
        f = autos[rng.below(autos.size())];
      } else {
        const std::size_t m = size / copies;
        for (Point x = 0; x < size; ++x) f[x] = static_cast<Point>((x + m) % size);
      }
    }
    fr.set_function(f);
    if (!opts.broken_repair && !in_class(fr, cls)) continue;
    Valuation val;
    for (const auto& var : opts.variables) val[var] = rng.subset(size);
    return Model(std::move(fr), std::move(val));
  }
  throw GenerationFailed("no " + to_string(cls) + " model of size " + std::to_string(size) +
                         " after " + std::to_string(kGenerationAttempts) + " attempts");
}

FuzzReport soundness_fuzz(FrameClass cls, std::size_t trials, std::uint64_t seed,
                          std::size_t max_size, const RandomModelOptions& opts, std::size_t jobs) {
  if (max_size == 0) throw InputError("fuzz max size must be positive");
  if (jobs == 0) throw InputError("jobs must be positive");
  const auto schemes = logic_axioms(cls);
  std::vector<std::vector<FuzzViolation>> per_trial(trials);
  std::atomic<std::size_t> checks{0};
  run_workers(jobs, [&](std::size_t k) {
    for (std::size_t t = k; t < trials; t += jobs) {
      Rng rng(mix_seed(seed, t));
      const std::size_t size = 1 + rng.below(max_size);
      const Model m = random_model(cls, size, rng.bits(), opts);
      for (const auto& s : schemes) {
        const std::size_t bits = size * variables(s.templ).size();
        const ValuationMode mode = bits <= kSchemeBudgetBits
                                       ? ValuationMode::all()
                                       : ValuationMode::sampled(1024, mix_seed(seed, t));
        const SchemeVerdict sv = check_scheme_validity(m, s, mode);
        ++checks;
        if (!sv.valid) per_trial[t].push_back({t, size, s.name, sv.counter_point.value_or(0)});
      }
    }
  });
  FuzzReport report;
  report.trials = trials;
  report.scheme_checks = checks.load();
  for (auto& v : per_trial) {
    report.violations.insert(report.violations.end(), v.begin(), v.end());
  }
  return report;
}

std::string verdict_word(const Verdict& v) {
  switch (v.kind) {
    case VerdictKind::Satisfiable: return "sat";
    case VerdictKind::UnsatUpToBound: return "unsat";
    case VerdictKind::ValidUpToBound: return "valid";
    case VerdictKind::CounterModel: return "counter";
  }
  return "?";
}

CorpusOutcome run_corpus_query(const CorpusQuery& q, const SearchBudget& b) {
  CorpusOutcome out;
  out.query = q;
  if (q.validity) {
    out.frames = valid_at_bound(q.formula, q.cls, b);
    out.story = story_valid_at_bound(q.formula, q.cls, b);
  } else {
    out.frames = sat_search(q.formula, q.cls, b);
    out.story = story_search(q.formula, q.cls, b);
  }
  out.agree = verdict_word(out.frames) == verdict_word(out.story);
  out.as_expected = out.agree && verdict_word(out.frames) == q.expected;
  return out;
}

}  // namespace derivelog
