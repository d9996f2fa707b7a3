#pragma once

// Formulas of the derivative language with the next operator and the
// tangled derivative.
//
// The core AST has seven node kinds (Var, Bot, Neg, And, Dia, Next, Tangle).
// Derived connectives are expanded by their factory functions:
//
//   T        := ~F
//   a | b    := ~(~a & ~b)          (tagged Sugar::Or on the outer Neg)
//   a -> b   := ~(a & ~b)           (tagged Sugar::Imp on the outer Neg)
//   []a      := ~<>~a
//   [+]a     := a & []a             (tagged Sugar::BoxDot on the And)
//
// Tags only steer the printer; structural equality ignores them. `T` and
// `[]` are recognised structurally and need no tag.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace derivelog {

enum class Op : std::uint8_t { Var, Bot, Neg, And, Dia, Next, Tangle };

enum class Sugar : std::uint8_t { None, Or, Imp, BoxDot };

class Formula {
 public:
  static Formula var(std::string name);
  static Formula bot();
  static Formula top();
  static Formula neg(Formula a);
  static Formula conj(Formula a, Formula b);
  static Formula dia(Formula a);
  static Formula next(Formula a);
  /// Arguments are deduplicated and sorted by rendered text. Throws
  /// InputError on an empty family.
  static Formula tangle(std::vector<Formula> args);

  static Formula disj(Formula a, Formula b);
  static Formula imp(Formula a, Formula b);
  /// (a -> b) & (b -> a)
  static Formula iff(Formula a, Formula b);
  static Formula box(Formula a);
  static Formula boxdot(Formula a);
  /// X applied k times.
  static Formula next_pow(Formula a, std::size_t k);

  Op op() const { return node_->op; }
  Sugar sugar() const { return node_->sugar; }
  const std::string& name() const { return node_->name; }
  const std::vector<Formula>& args() const { return node_->args; }
  const Formula& arg(std::size_t i) const { return node_->args[i]; }

  /// Same node kind and tag with new children.
  Formula with_args(std::vector<Formula> args) const;

  friend bool operator==(const Formula& a, const Formula& b);
  /// Total structural order (kind, name, children); ignores sugar tags.
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  struct Node {
    Op op;
    Sugar sugar;
    std::string name;
    std::vector<Formula> args;
  };

  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Op op, std::vector<Formula> args, std::string name = {},
                      Sugar sugar = Sugar::None);

  std::shared_ptr<const Node> node_;
};

/// Parses the ASCII concrete syntax (see README). Throws SyntaxError.
Formula parse(std::string_view text);

/// Inverse of parse: parse(render(f)) == f for every AST.
std::string render(const Formula& f);

/// Maximum nesting of X along any path.
std::size_t next_depth(const Formula& f);

/// Maximum nesting of <> (a tangle counts as one modal level).
std::size_t modal_depth(const Formula& f);

/// Number of AST nodes.
std::size_t formula_size(const Formula& f);

/// Sorted, duplicate-free variable names.
std::vector<std::string> variables(const Formula& f);

bool contains_tangle(const Formula& f);

/// Smallest set containing f and closed under immediate subformulas, in
/// structural order.
std::vector<Formula> subformula_closure(const Formula& f);

/// Pushes every X down to the variables using X~a <-> ~Xa, X(a&b) <-> Xa&Xb
/// and X<>a <-> <>Xa. X applied to a constant is absorbed (XF = F), so the
/// X-depth is preserved except where it only guarded a constant.
/// Throws TangleUnsupported.
Formula to_next_normal_form(const Formula& f);

/// True iff every X node sits on a chain X...X p ending in a variable.
bool is_next_normal(const Formula& f);

}  // namespace derivelog
