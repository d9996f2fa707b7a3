#include "derivelog/spaces.hpp"

#include <algorithm>
#include <cassert>
#include <set>

#include "derivelog/error.hpp"
#include "derivelog/random.hpp"

namespace derivelog {

namespace {

PointSet shift_up(const PointSet& s, std::size_t offset) {
  PointSet out;
  s.for_each([&](Point p) { out.insert(static_cast<Point>(p + offset)); });
  return out;
}

// Members of s in [offset, offset + len), re-based to 0.
PointSet slice(const PointSet& s, std::size_t offset, std::size_t len) {
  PointSet out;
  s.for_each([&](Point p) {
    if (p >= offset && p < offset + len) out.insert(static_cast<Point>(p - offset));
  });
  return out;
}

void check_points(std::size_t n) {
  if (n == 0) throw InputError("a space needs at least one point");
  if (n > kMaxPoints) throw CapacityExceeded("space exceeds point capacity");
}

}  // namespace

// ---------------------------------------------------------------------------
// FiniteTopology

FiniteTopology FiniteTopology::from_neighborhoods(std::vector<PointSet> nbhd) {
  check_points(nbhd.size());
  const PointSet all = PointSet::full(nbhd.size());
  for (Point x = 0; x < nbhd.size(); ++x) {
    if (!nbhd[x].is_subset_of(all)) throw InputError("neighbourhood mentions unknown point");
    if (!nbhd[x].contains(x)) {
      throw InputError("point " + std::to_string(x) + " is missing from its own neighbourhood");
    }
  }
  for (Point x = 0; x < nbhd.size(); ++x) {
    nbhd[x].for_each([&](Point y) {
      if (!nbhd[y].is_subset_of(nbhd[x])) {
        throw InputError("neighbourhood of " + std::to_string(x) + " is not open: it contains " +
                         std::to_string(y) + " but not all of N(" + std::to_string(y) + ")");
      }
    });
  }
  return FiniteTopology(std::move(nbhd));
}

FiniteTopology FiniteTopology::from_opens(std::size_t points, const std::vector<PointSet>& opens) {
  check_points(points);
  const PointSet all = PointSet::full(points);
  std::set<PointSet> family(opens.begin(), opens.end());
  for (const auto& u : family) {
    if (!u.is_subset_of(all)) throw InputError("open set mentions unknown point");
  }
  if (!family.contains(PointSet{})) throw InputError("the empty set must be open");
  if (!family.contains(all)) throw InputError("the whole space must be open");
  for (const auto& u : family) {
    for (const auto& v : family) {
      if (!family.contains(u & v)) throw InputError("opens not closed under intersection");
      if (!family.contains(u | v)) throw InputError("opens not closed under union");
    }
  }
  std::vector<PointSet> nbhd(points, all);
  for (const auto& u : family) {
    u.for_each([&](Point x) { nbhd[x] &= u; });
  }
  return FiniteTopology(std::move(nbhd));
}

FiniteTopology FiniteTopology::discrete(std::size_t points) {
  check_points(points);
  std::vector<PointSet> nbhd(points);
  for (Point x = 0; x < points; ++x) nbhd[x] = PointSet::singleton(x);
  return FiniteTopology(std::move(nbhd));
}

FiniteTopology FiniteTopology::indiscrete(std::size_t points) {
  check_points(points);
  return FiniteTopology(std::vector<PointSet>(points, PointSet::full(points)));
}

bool FiniteTopology::is_open(const PointSet& s) const {
  bool open = true;
  s.for_each([&](Point x) { open = open && nbhd_[x].is_subset_of(s); });
  return open;
}

std::vector<PointSet> FiniteTopology::opens(std::size_t limit) const {
  std::set<PointSet> found{PointSet{}};
  std::vector<PointSet> frontier{PointSet{}};
  while (!frontier.empty()) {
    std::vector<PointSet> next;
    for (const auto& u : frontier) {
      for (const auto& n : nbhd_) {
        PointSet v = u | n;
        if (found.insert(v).second) {
          if (found.size() > limit) throw CapacityExceeded("too many open sets to list");
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  return {found.begin(), found.end()};
}

// ---------------------------------------------------------------------------
// DerivativeSpace

DerivativeSpace DerivativeSpace::from_frame(DynamicFrame fr) {
  std::size_t n = fr.size();
  return DerivativeSpace(n, std::move(fr));
}

DerivativeSpace DerivativeSpace::from_topology(FiniteTopology top) {
  std::size_t n = top.size();
  return DerivativeSpace(n, std::move(top));
}

DerivativeSpace DerivativeSpace::from_table(std::size_t points, std::vector<PointSet> table) {
  check_points(points);
  if (points > kTableCap) {
    throw CapacityExceeded("explicit derivative tables are limited to " +
                           std::to_string(kTableCap) + " points");
  }
  if (table.size() != (std::size_t{1} << points)) {
    throw InputError("derivative table needs 2^n entries");
  }
  const PointSet all = PointSet::full(points);
  for (const auto& s : table) {
    if (!s.is_subset_of(all)) throw InputError("derivative table mentions unknown point");
  }
  return DerivativeSpace(points, Table{std::move(table)});
}

PointSet DerivativeSpace::rho(const PointSet& s) const {
  struct Visitor {
    const PointSet& s;
    std::size_t size;
    PointSet operator()(const DynamicFrame& fr) const { return downset(fr, s); }
    PointSet operator()(const FiniteTopology& top) const { return cantor_derivative(top, s); }
    PointSet operator()(const Table& t) const { return t.rho[s.low_mask()]; }
    PointSet operator()(const Sum& sm) const {
      const std::size_t left_n = sm.left->size();
      PointSet out = sm.left->rho(slice(s, 0, left_n));
      out |= shift_up(sm.right->rho(slice(s, left_n, sm.right->size())), left_n);
      return out;
    }
  };
  return std::visit(Visitor{s & all(), size_}, repr_);
}

const DynamicFrame* DerivativeSpace::frame() const { return std::get_if<DynamicFrame>(&repr_); }
const FiniteTopology* DerivativeSpace::topology() const {
  return std::get_if<FiniteTopology>(&repr_);
}
bool DerivativeSpace::is_table() const { return std::holds_alternative<Table>(repr_); }
bool DerivativeSpace::is_sum() const { return std::holds_alternative<Sum>(repr_); }

DerivativeSpace sum(const DerivativeSpace& a, const DerivativeSpace& b) {
  const std::size_t n = a.size() + b.size();
  if (n > kMaxPoints) throw CapacityExceeded("sum exceeds point capacity");
  const std::size_t off = a.size();
  if (a.frame() != nullptr && b.frame() != nullptr) {
    DynamicFrame fr(n);
    for (auto [w, v] : a.frame()->pairs()) fr.relate(w, v);
    for (auto [w, v] : b.frame()->pairs()) {
      fr.relate(static_cast<Point>(w + off), static_cast<Point>(v + off));
    }
    return DerivativeSpace::from_frame(std::move(fr));
  }
  if (a.topology() != nullptr && b.topology() != nullptr) {
    std::vector<PointSet> nbhd = a.topology()->neighborhoods();
    for (const auto& nb : b.topology()->neighborhoods()) nbhd.push_back(shift_up(nb, off));
    return DerivativeSpace::from_topology(FiniteTopology::from_neighborhoods(std::move(nbhd)));
  }
  return DerivativeSpace(n, DerivativeSpace::Sum{std::make_shared<const DerivativeSpace>(a),
                                                 std::make_shared<const DerivativeSpace>(b)});
}

// ---------------------------------------------------------------------------
// Operators

PointSet cantor_derivative(const FiniteTopology& top, const PointSet& s) {
  PointSet out;
  for (Point x = 0; x < top.size(); ++x) {
    PointSet meet = top.neighborhood(x) & s;
    meet.erase(x);
    if (!meet.empty()) out.insert(x);
  }
  return out;
}

PointSet closure(const FiniteTopology& top, const PointSet& s) {
  return s | cantor_derivative(top, s);
}

PointSet closure(const DerivativeSpace& sp, const PointSet& s) { return s | sp.rho(s); }

PointSet co_derivative(const DerivativeSpace& sp, const PointSet& s) {
  const std::size_t n = sp.size();
  return sp.rho(s.complement(n)).complement(n);
}

PointSet interior(const DerivativeSpace& sp, const PointSet& s) {
  return s & co_derivative(sp, s);
}

FiniteTopology alexandroff_from_frame(const DynamicFrame& fr) {
  return FiniteTopology::from_neighborhoods(reflexive_transitive_closure(fr));
}

ScatteredReport is_scattered(const DerivativeSpace& sp) {
  PointSet a = sp.all();
  for (std::size_t step = 0; step <= sp.size(); ++step) {
    PointSet next = a & sp.rho(a);
    if (next == a) return {a.empty(), a};
    a = next;
  }
  assert(false && "greatest fixpoint iteration must stabilise within |X| steps");
  return {a.empty(), a};
}

bool is_td(const FiniteTopology& top) {
  for (Point x = 0; x < top.size(); ++x) {
    if ((top.neighborhood(x) & closure(top, PointSet::singleton(x))) != PointSet::singleton(x)) {
      return false;
    }
  }
  return true;
}

PointSet tangled_derivative(const DerivativeSpace& sp, const std::vector<PointSet>& family) {
  if (family.empty()) throw InputError("tangled derivative needs a nonempty family");
  PointSet a = sp.all();
  bool stable = false;
  for (std::size_t step = 0; step <= sp.size() && !stable; ++step) {
    PointSet next = a;
    for (const auto& s : family) next &= sp.rho(s & a);
    stable = next == a;
    a = next;
  }
  assert(stable && "tangle iteration must stabilise within |X| steps");
  for (const auto& s : family) {
    assert(a.is_subset_of(sp.rho(s & a)) && "tangled set must be tangled");
    (void)s;
  }
  return a;
}

namespace {

// Calls check(A) for every A subset of {0..n-1}, or for `samples` random A.
// check returns false on failure; the failing set is recorded.
template <typename Check>
SubsetCheck for_subsets(std::size_t n, CheckMode mode, Check&& check) {
  SubsetCheck out;
  out.exhaustive = mode.exhaustive;
  if (mode.exhaustive) {
    if (n > mode.cap || n > 24) throw SubsetCapExceeded(n, mode.cap);
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t m = 0; m < total; ++m) {
      ++out.checked;
      PointSet a = PointSet::from_mask(m);
      if (!check(a)) {
        out.holds = false;
        out.witness = a;
        return out;
      }
    }
    return out;
  }
  for (std::size_t i = 0; i < mode.samples; ++i) {
    Rng rng(mix_seed(mode.seed, i));
    PointSet a = rng.subset(n);
    ++out.checked;
    if (!check(a)) {
      out.holds = false;
      out.witness = a;
      return out;
    }
  }
  return out;
}

void check_map(const std::vector<Point>& f, const DerivativeSpace& x, const DerivativeSpace& y) {
  if (f.size() != x.size()) throw InputError("point map must be total on the domain");
  for (Point p : f) {
    if (p >= y.size()) throw InputError("point map leaves the codomain");
  }
}

}  // namespace

SubsetCheck check_continuous(const std::vector<Point>& f, const DerivativeSpace& x,
                             const DerivativeSpace& y, CheckMode mode) {
  check_map(f, x, y);
  return for_subsets(y.size(), mode, [&](const PointSet& a) {
    PointSet pre = preimage(f, a);
    return x.rho(pre).is_subset_of(pre | preimage(f, y.rho(a)));
  });
}

SubsetCheck check_homeomorphism(const std::vector<Point>& f, const DerivativeSpace& x,
                                const DerivativeSpace& y, CheckMode mode) {
  check_map(f, x, y);
  if (x.size() != y.size() || image(f, x.all()) != y.all()) {
    SubsetCheck out;
    out.holds = false;
    out.exhaustive = mode.exhaustive;
    return out;
  }
  return for_subsets(y.size(), mode, [&](const PointSet& a) {
    return x.rho(preimage(f, a)) == preimage(f, y.rho(a));
  });
}

DerivativeAxiomsReport validate_derivative_axioms(const DerivativeSpace& sp, CheckMode mode) {
  DerivativeAxiomsReport r;
  const std::size_t n = sp.size();
  r.empty.checked = 1;
  r.empty.exhaustive = mode.exhaustive;
  if (!sp.rho(PointSet{}).empty()) {
    r.empty.holds = false;
    r.empty.witness = PointSet{};
  }
  r.weak_idem = for_subsets(n, mode, [&](const PointSet& a) {
    PointSet d = sp.rho(a);
    return sp.rho(d).is_subset_of(a | d);
  });

  r.additive.exhaustive = mode.exhaustive;
  if (mode.exhaustive) {
    if (n > mode.cap || n > 24) throw SubsetCapExceeded(n, mode.cap);
    const std::uint64_t total = std::uint64_t{1} << n;
    std::vector<PointSet> table(total);
    for (std::uint64_t m = 0; m < total; ++m) table[m] = sp.rho(PointSet::from_mask(m));
    for (std::uint64_t a = 0; a < total && r.additive.holds; ++a) {
      for (std::uint64_t b = 0; b < total; ++b) {
        ++r.additive.checked;
        if (table[a | b] != (table[a] | table[b])) {
          r.additive.holds = false;
          r.additive.witness = PointSet::from_mask(a);
          r.additive_witness_b = PointSet::from_mask(b);
          break;
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < mode.samples; ++i) {
      Rng rng(mix_seed(mode.seed, i));
      PointSet a = rng.subset(n);
      PointSet b = rng.subset(n);
      ++r.additive.checked;
      if (sp.rho(a | b) != (sp.rho(a) | sp.rho(b))) {
        r.additive.holds = false;
        r.additive.witness = a;
        r.additive_witness_b = b;
        break;
      }
    }
  }
  return r;
}

}  // namespace derivelog
