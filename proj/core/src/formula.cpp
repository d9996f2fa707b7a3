#include "derivelog/formula.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "derivelog/error.hpp"

namespace derivelog {

Formula Formula::make(Op op, std::vector<Formula> args, std::string name, Sugar sugar) {
  return Formula(std::make_shared<const Node>(Node{op, sugar, std::move(name), std::move(args)}));
}

Formula Formula::var(std::string name) { return make(Op::Var, {}, std::move(name)); }
Formula Formula::bot() { return make(Op::Bot, {}); }
Formula Formula::top() { return neg(bot()); }
Formula Formula::neg(Formula a) { return make(Op::Neg, {std::move(a)}); }
Formula Formula::conj(Formula a, Formula b) { return make(Op::And, {std::move(a), std::move(b)}); }
Formula Formula::dia(Formula a) { return make(Op::Dia, {std::move(a)}); }
Formula Formula::next(Formula a) { return make(Op::Next, {std::move(a)}); }

Formula Formula::tangle(std::vector<Formula> args) {
  if (args.empty()) throw InputError("tangle requires a nonempty family");
  std::sort(args.begin(), args.end());
  args.erase(std::unique(args.begin(), args.end()), args.end());
  std::vector<std::pair<std::string, Formula>> keyed;
  keyed.reserve(args.size());
  for (auto& a : args) keyed.emplace_back(render(a), a);
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  args.clear();
  for (auto& [key, a] : keyed) args.push_back(a);
  return make(Op::Tangle, std::move(args));
}

Formula Formula::disj(Formula a, Formula b) {
  return make(Op::Neg, {conj(neg(std::move(a)), neg(std::move(b)))}, {}, Sugar::Or);
}

Formula Formula::imp(Formula a, Formula b) {
  return make(Op::Neg, {conj(std::move(a), neg(std::move(b)))}, {}, Sugar::Imp);
}

Formula Formula::iff(Formula a, Formula b) { return conj(imp(a, b), imp(b, a)); }

Formula Formula::box(Formula a) { return neg(dia(neg(std::move(a)))); }

Formula Formula::boxdot(Formula a) {
  Formula b = box(a);
  return make(Op::And, {std::move(a), std::move(b)}, {}, Sugar::BoxDot);
}

Formula Formula::next_pow(Formula a, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) a = next(std::move(a));
  return a;
}

Formula Formula::with_args(std::vector<Formula> args) const {
  if (op() == Op::Tangle) return tangle(std::move(args));
  return make(op(), std::move(args), name(), sugar());
}

bool operator==(const Formula& a, const Formula& b) {
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.op() <=> b.op(); c != 0) return c;
  if (auto c = a.name().compare(b.name()); c != 0) {
    return c < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  const auto& x = a.args();
  const auto& y = b.args();
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (auto c = x[i] <=> y[i]; c != 0) return c;
  }
  return x.size() <=> y.size();
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok {
  Ident, Top, Bot, Next, Not, Dia, Box, BoxDot, TangleOpen,
  LBrace, RBrace, LParen, RParen, Comma, And, Or, Imp, End
};

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
};

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto starts = [&](std::string_view lit) { return s.substr(i, lit.size()) == lit; };
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (std::islower(static_cast<unsigned char>(c))) {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      out.push_back({Tok::Ident, start, std::string(s.substr(start, i - start))});
      continue;
    }
    Tok kind;
    std::size_t len = 1;
    if (starts("<*>")) {
      kind = Tok::TangleOpen;
      len = 3;
    } else if (starts("<>")) {
      kind = Tok::Dia;
      len = 2;
    } else if (starts("[+]")) {
      kind = Tok::BoxDot;
      len = 3;
    } else if (starts("[]")) {
      kind = Tok::Box;
      len = 2;
    } else if (starts("->")) {
      kind = Tok::Imp;
      len = 2;
    } else {
      switch (c) {
        case 'T': kind = Tok::Top; break;
        case 'F': kind = Tok::Bot; break;
        case 'X': kind = Tok::Next; break;
        case '~': kind = Tok::Not; break;
        case '&': kind = Tok::And; break;
        case '|': kind = Tok::Or; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case ',': kind = Tok::Comma; break;
        default:
          throw SyntaxError(std::string("unexpected character '") + c + "'", i);
      }
    }
    out.push_back({kind, start, {}});
    i += len;
  }
  out.push_back({Tok::End, s.size(), {}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Formula parse_all() {
    Formula f = formula();
    if (peek().kind != Tok::End) throw SyntaxError("unexpected trailing input", peek().pos);
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  void expect(Tok kind, const char* what) {
    if (peek().kind != kind) throw SyntaxError(std::string("expected ") + what, peek().pos);
    ++pos_;
  }

  Formula formula() { return implication(); }

  Formula implication() {
    Formula lhs = disjunction();
    if (peek().kind == Tok::Imp) {
      take();
      return Formula::imp(std::move(lhs), implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula lhs = conjunction();
    while (peek().kind == Tok::Or) {
      take();
      lhs = Formula::disj(std::move(lhs), conjunction());
    }
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = unary();
    while (peek().kind == Tok::And) {
      take();
      lhs = Formula::conj(std::move(lhs), unary());
    }
    return lhs;
  }

  Formula unary() {
    const Token& t = take();
    switch (t.kind) {
      case Tok::Not: return Formula::neg(unary());
      case Tok::Dia: return Formula::dia(unary());
      case Tok::Box: return Formula::box(unary());
      case Tok::BoxDot: return Formula::boxdot(unary());
      case Tok::Next: return Formula::next(unary());
      case Tok::Top: return Formula::top();
      case Tok::Bot: return Formula::bot();
      case Tok::Ident: return Formula::var(t.text);
      case Tok::LParen: {
        Formula f = formula();
        expect(Tok::RParen, "')'");
        return f;
      }
      case Tok::TangleOpen: {
        expect(Tok::LBrace, "'{' after <*>");
        if (peek().kind == Tok::RBrace) throw SyntaxError("empty tangle set", peek().pos);
        std::vector<Formula> args{formula()};
        while (peek().kind == Tok::Comma) {
          take();
          args.push_back(formula());
        }
        expect(Tok::RBrace, "'}' or ','");
        return Formula::tangle(std::move(args));
      }
      default:
        throw SyntaxError("expected a formula", t.pos);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer. Precedence levels: 1 implication, 2 disjunction, 3 conjunction,
// 4 unary.

bool is_box(const Formula& f) {
  return f.op() == Op::Neg && f.arg(0).op() == Op::Dia && f.arg(0).arg(0).op() == Op::Neg;
}

std::string wrap(std::string s, bool paren) { return paren ? "(" + s + ")" : s; }

std::string render_at(const Formula& f, int ctx) {
  switch (f.op()) {
    case Op::Var: return f.name();
    case Op::Bot: return "F";
    case Op::Neg: {
      const Formula& a = f.arg(0);
      if (f.sugar() == Sugar::Imp) {
        return wrap(render_at(a.arg(0), 2) + " -> " + render_at(a.arg(1).arg(0), 1), ctx > 1);
      }
      if (f.sugar() == Sugar::Or) {
        return wrap(render_at(a.arg(0).arg(0), 2) + " | " + render_at(a.arg(1).arg(0), 3), ctx > 2);
      }
      if (a.op() == Op::Bot) return "T";
      if (is_box(f)) return "[]" + render_at(a.arg(0).arg(0), 4);
      return "~" + render_at(a, 4);
    }
    case Op::And:
      if (f.sugar() == Sugar::BoxDot) return "[+]" + render_at(f.arg(0), 4);
      return wrap(render_at(f.arg(0), 3) + " & " + render_at(f.arg(1), 4), ctx > 3);
    case Op::Dia: return "<>" + render_at(f.arg(0), 4);
    case Op::Next: return "X " + render_at(f.arg(0), 4);
    case Op::Tangle: {
      std::string s = "<*>{";
      for (std::size_t i = 0; i < f.args().size(); ++i) {
        if (i > 0) s += ',';
        s += render_at(f.arg(i), 0);
      }
      return s + "}";
    }
  }
  return {};
}

void collect_vars(const Formula& f, std::set<std::string>& out) {
  if (f.op() == Op::Var) out.insert(f.name());
  for (const auto& a : f.args()) collect_vars(a, out);
}

void collect_closure(const Formula& f, std::set<Formula>& out) {
  if (!out.insert(f).second) return;
  for (const auto& a : f.args()) collect_closure(a, out);
}

// X applied to a formula already in normal form.
Formula push_next(const Formula& g) {
  switch (g.op()) {
    case Op::Var:
    case Op::Next:
      return Formula::next(g);
    case Op::Bot:
      return g;
    case Op::Neg:
    case Op::And:
    case Op::Dia: {
      std::vector<Formula> args;
      for (const auto& a : g.args()) args.push_back(push_next(a));
      return g.with_args(std::move(args));
    }
    case Op::Tangle:
      throw TangleUnsupported();
  }
  return g;
}

}  // namespace

Formula parse(std::string_view text) { return Parser(lex(text)).parse_all(); }

std::string render(const Formula& f) { return render_at(f, 0); }

std::size_t next_depth(const Formula& f) {
  std::size_t d = 0;
  for (const auto& a : f.args()) d = std::max(d, next_depth(a));
  return f.op() == Op::Next ? d + 1 : d;
}

std::size_t modal_depth(const Formula& f) {
  std::size_t d = 0;
  for (const auto& a : f.args()) d = std::max(d, modal_depth(a));
  return (f.op() == Op::Dia || f.op() == Op::Tangle) ? d + 1 : d;
}

std::size_t formula_size(const Formula& f) {
  std::size_t n = 1;
  for (const auto& a : f.args()) n += formula_size(a);
  return n;
}

std::vector<std::string> variables(const Formula& f) {
  std::set<std::string> names;
  collect_vars(f, names);
  return {names.begin(), names.end()};
}

bool contains_tangle(const Formula& f) {
  if (f.op() == Op::Tangle) return true;
  return std::any_of(f.args().begin(), f.args().end(), contains_tangle);
}

std::vector<Formula> subformula_closure(const Formula& f) {
  std::set<Formula> out;
  collect_closure(f, out);
  return {out.begin(), out.end()};
}

Formula to_next_normal_form(const Formula& f) {
  switch (f.op()) {
    case Op::Var:
    case Op::Bot:
      return f;
    case Op::Tangle:
      throw TangleUnsupported();
    case Op::Next:
      return push_next(to_next_normal_form(f.arg(0)));
    default: {
      std::vector<Formula> args;
      for (const auto& a : f.args()) args.push_back(to_next_normal_form(a));
      return f.with_args(std::move(args));
    }
  }
}

bool is_next_normal(const Formula& f) {
  if (f.op() == Op::Next) {
    const Formula& a = f.arg(0);
    return a.op() == Op::Var || (a.op() == Op::Next && is_next_normal(a));
  }
  return std::all_of(f.args().begin(), f.args().end(), is_next_normal);
}

}  // namespace derivelog
