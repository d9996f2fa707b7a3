#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "derivelog/frames.hpp"
#include "derivelog/point_set.hpp"

namespace derivelog {

/// Finite (hence Aleksandroff) topology in minimal-neighbourhood form:
/// N(x) is the least open set containing x.
class FiniteTopology {
 public:
  /// Validates x in N(x) and y in N(x) => N(y) subset of N(x).
  static FiniteTopology from_neighborhoods(std::vector<PointSet> nbhd);
  /// Validates the topology axioms on the given family, then derives N.
  static FiniteTopology from_opens(std::size_t points, const std::vector<PointSet>& opens);
  static FiniteTopology discrete(std::size_t points);
  static FiniteTopology indiscrete(std::size_t points);

  std::size_t size() const { return nbhd_.size(); }
  const PointSet& neighborhood(Point x) const { return nbhd_[x]; }
  const std::vector<PointSet>& neighborhoods() const { return nbhd_; }
  bool is_open(const PointSet& s) const;
  /// All open sets (unions of neighbourhoods), sorted. Throws
  /// CapacityExceeded past `limit` sets.
  std::vector<PointSet> opens(std::size_t limit = 1U << 20) const;

  friend bool operator==(const FiniteTopology&, const FiniteTopology&) = default;

 private:
  explicit FiniteTopology(std::vector<PointSet> nbhd) : nbhd_(std::move(nbhd)) {}
  std::vector<PointSet> nbhd_;
};

/// Exhaustive checks enumerate every subset (or pair of subsets) of the
/// point set; beyond `cap` points they throw SubsetCapExceeded. Sampled
/// checks draw `samples` reproducible random subsets from `seed`.
struct CheckMode {
  bool exhaustive = true;
  std::size_t cap = 10;
  std::size_t samples = 0;
  std::uint64_t seed = 0;

  static CheckMode exhaustive_up_to(std::size_t cap = 10) { return {true, cap, 0, 0}; }
  static CheckMode sampled(std::size_t samples, std::uint64_t seed) {
    return {false, 0, samples, seed};
  }
};

/// A set with a derivative operator rho. rho comes from a frame (rho = the
/// downset of rel), a topology (Cantor derivative), an explicit table
/// indexed by subset bitmask, or a topological sum of two spaces.
class DerivativeSpace {
 public:
  static DerivativeSpace from_frame(DynamicFrame fr);
  static DerivativeSpace from_topology(FiniteTopology top);
  /// `table` has 2^points entries; points <= kTableCap.
  static DerivativeSpace from_table(std::size_t points, std::vector<PointSet> table);

  static constexpr std::size_t kTableCap = 10;

  std::size_t size() const { return size_; }
  PointSet all() const { return PointSet::full(size_); }
  PointSet rho(const PointSet& s) const;

  /// Non-null for frame-based spaces.
  const DynamicFrame* frame() const;
  /// Non-null for topology-based spaces.
  const FiniteTopology* topology() const;
  bool is_table() const;
  bool is_sum() const;

 private:
  struct Table {
    std::vector<PointSet> rho;
  };
  struct Sum {
    std::shared_ptr<const DerivativeSpace> left;
    std::shared_ptr<const DerivativeSpace> right;
  };
  using Repr = std::variant<DynamicFrame, FiniteTopology, Table, Sum>;

  DerivativeSpace(std::size_t size, Repr repr) : size_(size), repr_(std::move(repr)) {}
  friend DerivativeSpace sum(const DerivativeSpace& a, const DerivativeSpace& b);

  std::size_t size_;
  Repr repr_;
};

/// d(S) = {x : (N(x) & S) - {x} nonempty}.
PointSet cantor_derivative(const FiniteTopology& top, const PointSet& s);
/// S | d(S)
PointSet closure(const FiniteTopology& top, const PointSet& s);
/// S | rho(S)
PointSet closure(const DerivativeSpace& sp, const PointSet& s);
/// X - rho(X - S)
PointSet co_derivative(const DerivativeSpace& sp, const PointSet& s);
/// S & co_derivative(S)
PointSet interior(const DerivativeSpace& sp, const PointSet& s);

/// Opens are the up-closed sets of rel; N(x) is x plus everything reachable.
FiniteTopology alexandroff_from_frame(const DynamicFrame& fr);

struct ScatteredReport {
  bool scattered = true;
  /// Greatest S with S subset of rho(S); empty iff scattered.
  PointSet witness;
};
ScatteredReport is_scattered(const DerivativeSpace& sp);

/// For every x: N(x) & closure({x}) == {x}.
bool is_td(const FiniteTopology& top);

/// Largest A with A subset of rho(S & A) for every S in the family.
PointSet tangled_derivative(const DerivativeSpace& sp, const std::vector<PointSet>& family);

/// Outcome of a subset-quantified check.
struct SubsetCheck {
  bool holds = true;
  std::optional<PointSet> witness;
  std::size_t checked = 0;
  bool exhaustive = true;
};

/// rho_X f^-1(A) subset of f^-1(A) | f^-1 rho_Y(A) for every A subset of Y.
SubsetCheck check_continuous(const std::vector<Point>& f, const DerivativeSpace& x,
                             const DerivativeSpace& y, CheckMode mode = {});
/// Bijective and rho_X f^-1(A) == f^-1 rho_Y(A) for every A. A failed
/// bijectivity test reports no witness set.
SubsetCheck check_homeomorphism(const std::vector<Point>& f, const DerivativeSpace& x,
                                const DerivativeSpace& y, CheckMode mode = {});

/// Disjoint union with the right summand re-based after the left one.
/// (rho_A + rho_B)(S) = rho_A(S & A) | rho_B(S & B).
DerivativeSpace sum(const DerivativeSpace& a, const DerivativeSpace& b);

struct DerivativeAxiomsReport {
  SubsetCheck empty;       // rho({}) = {}
  SubsetCheck additive;    // rho(A | B) = rho(A) | rho(B); witness holds A, witness_b holds B
  std::optional<PointSet> additive_witness_b;
  SubsetCheck weak_idem;   // rho(rho(A)) subset of A | rho(A)
  bool all_hold() const { return empty.holds && additive.holds && weak_idem.holds; }
};
DerivativeAxiomsReport validate_derivative_axioms(const DerivativeSpace& sp, CheckMode mode = {});

}  // namespace derivelog
