#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace dgvf {

// One-variable scalar expressions with exact symbolic differentiation.
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := ['-'] atom ['^' integer]
//   atom   := number | 'pi' | 'w' | func '(' expr ')' | '(' expr ')'
//   func   := 'sin' | 'cos' | 'atan'
// Trees are immutable after construction and safe to share across threads.

enum class UnaryOp { neg, sin, cos, atan };
enum class BinaryOp { add, sub, mul, div, pow };

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  enum class Kind { constant, variable, unary, binary } kind;
  double value = 0.0;           // constant
  UnaryOp uop = UnaryOp::neg;   // unary
  BinaryOp bop = BinaryOp::add; // binary; pow keeps an integer constant on the right
  ExprPtr a, b;                 // children (a = unary child / binary left)
  int offset = -1;              // byte offset in source text, -1 if synthesized
};

struct ParseError : std::runtime_error {
  int offset;
  ParseError(int off, const std::string& what)
      : std::runtime_error(what + " (offset " + std::to_string(off) + ")"), offset(off) {}
};

struct EvalError : std::runtime_error {
  int offset;
  EvalError(int off, const std::string& what)
      : std::runtime_error(what + (off >= 0 ? " (offset " + std::to_string(off) + ")" : "")),
        offset(off) {}
};

class Expr {
 public:
  Expr() : node_(constant_node(0.0, -1)) {}
  explicit Expr(ExprPtr node) : node_(std::move(node)) {}

  static Expr constant(double v) { return Expr(constant_node(v, -1)); }
  static Expr variable() { return Expr(variable_node(-1)); }

  const ExprNode& node() const { return *node_; }
  const ExprPtr& ptr() const { return node_; }

  double evaluate(double w) const { return eval_node(*node_, w); }
  Expr differentiate() const { return Expr(diff_node(node_)); }
  std::string to_string() const {
    std::string out;
    print_node(*node_, out, /*parent_prec=*/0, /*right_of_same=*/false);
    return out;
  }
  std::size_t node_count() const { return count_nodes(*node_); }

  bool structurally_equal(const Expr& other) const { return nodes_equal(*node_, *other.node_); }

  // -- construction helpers (fold constants and trivial identities) --

  static Expr make_unary(UnaryOp op, Expr child, int offset = -1) {
    return Expr(unary_folded(op, child.node_, offset));
  }
  static Expr make_binary(BinaryOp op, Expr lhs, Expr rhs, int offset = -1) {
    if (op == BinaryOp::pow) {
      const ExprNode& e = rhs.node();
      if (e.kind != ExprNode::Kind::constant || e.value < 0.0 ||
          e.value != static_cast<double>(static_cast<long long>(e.value)))
        throw std::invalid_argument("pow exponent must be a non-negative integer constant");
    }
    return Expr(binary_folded(op, lhs.node_, rhs.node_, offset));
  }

 private:
  ExprPtr node_;

  static ExprPtr constant_node(double v, int off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::constant;
    n->value = v;
    n->offset = off;
    return n;
  }
  static ExprPtr variable_node(int off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::variable;
    n->offset = off;
    return n;
  }
  static ExprPtr unary_node(UnaryOp op, ExprPtr child, int off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::unary;
    n->uop = op;
    n->a = std::move(child);
    n->offset = off;
    return n;
  }
  static ExprPtr binary_node(BinaryOp op, ExprPtr lhs, ExprPtr rhs, int off) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::binary;
    n->bop = op;
    n->a = std::move(lhs);
    n->b = std::move(rhs);
    n->offset = off;
    return n;
  }

  static bool is_const(const ExprPtr& n, double v) {
    return n->kind == ExprNode::Kind::constant && n->value == v;
  }

  // Folding keeps derivative trees small (polynomial in the input size); it
  // never fires inside parse(), so parsed trees mirror the source text.
  static ExprPtr unary_folded(UnaryOp op, ExprPtr child, int off) {
    if (child->kind == ExprNode::Kind::constant) {
      switch (op) {
        case UnaryOp::neg: return constant_node(-child->value, off);
        case UnaryOp::sin: return constant_node(std::sin(child->value), off);
        case UnaryOp::cos: return constant_node(std::cos(child->value), off);
        case UnaryOp::atan: return constant_node(std::atan(child->value), off);
      }
    }
    if (op == UnaryOp::neg && child->kind == ExprNode::Kind::unary && child->uop == UnaryOp::neg)
      return child->a;
    return unary_node(op, std::move(child), off);
  }

  static ExprPtr binary_folded(BinaryOp op, ExprPtr lhs, ExprPtr rhs, int off) {
    const bool lc = lhs->kind == ExprNode::Kind::constant;
    const bool rc = rhs->kind == ExprNode::Kind::constant;
    if (lc && rc) {
      switch (op) {
        case BinaryOp::add: return constant_node(lhs->value + rhs->value, off);
        case BinaryOp::sub: return constant_node(lhs->value - rhs->value, off);
        case BinaryOp::mul: return constant_node(lhs->value * rhs->value, off);
        case BinaryOp::div:
          if (rhs->value != 0.0) return constant_node(lhs->value / rhs->value, off);
          break;  // keep the node; evaluation reports the division by zero
        case BinaryOp::pow: return constant_node(ipow(lhs->value, static_cast<long long>(rhs->value)), off);
      }
    }
    switch (op) {
      case BinaryOp::add:
        if (is_const(lhs, 0.0)) return rhs;
        if (is_const(rhs, 0.0)) return lhs;
        break;
      case BinaryOp::sub:
        if (is_const(rhs, 0.0)) return lhs;
        if (is_const(lhs, 0.0)) return unary_folded(UnaryOp::neg, std::move(rhs), off);
        break;
      case BinaryOp::mul:
        if (is_const(lhs, 0.0) || is_const(rhs, 0.0)) return constant_node(0.0, off);
        if (is_const(lhs, 1.0)) return rhs;
        if (is_const(rhs, 1.0)) return lhs;
        break;
      case BinaryOp::div:
        if (is_const(lhs, 0.0) && !is_const(rhs, 0.0)) return constant_node(0.0, off);
        if (is_const(rhs, 1.0)) return lhs;
        break;
      case BinaryOp::pow:
        if (is_const(rhs, 0.0)) return constant_node(1.0, off);
        if (is_const(rhs, 1.0)) return lhs;
        break;
    }
    return binary_node(op, std::move(lhs), std::move(rhs), off);
  }

  static double ipow(double base, long long e) {
    double r = 1.0;
    for (long long i = 0; i < e; ++i) r *= base;
    return r;
  }

  static double eval_node(const ExprNode& n, double w) {
    switch (n.kind) {
      case ExprNode::Kind::constant: return n.value;
      case ExprNode::Kind::variable: return w;
      case ExprNode::Kind::unary: {
        const double c = eval_node(*n.a, w);
        switch (n.uop) {
          case UnaryOp::neg: return -c;
          case UnaryOp::sin: return std::sin(c);
          case UnaryOp::cos: return std::cos(c);
          case UnaryOp::atan: return std::atan(c);
        }
        return 0.0;
      }
      case ExprNode::Kind::binary: {
        const double l = eval_node(*n.a, w);
        const double r = eval_node(*n.b, w);
        switch (n.bop) {
          case BinaryOp::add: return l + r;
          case BinaryOp::sub: return l - r;
          case BinaryOp::mul: return l * r;
          case BinaryOp::div:
            if (r == 0.0) throw EvalError(n.offset, "division by zero");
            return l / r;
          case BinaryOp::pow: return ipow(l, static_cast<long long>(r));
        }
        return 0.0;
      }
    }
    return 0.0;
  }

  static ExprPtr diff_node(const ExprPtr& n) {
    const int off = n->offset;
    switch (n->kind) {
      case ExprNode::Kind::constant: return constant_node(0.0, off);
      case ExprNode::Kind::variable: return constant_node(1.0, off);
      case ExprNode::Kind::unary: {
        ExprPtr du = diff_node(n->a);
        switch (n->uop) {
          case UnaryOp::neg: return unary_folded(UnaryOp::neg, std::move(du), off);
          case UnaryOp::sin:
            return binary_folded(BinaryOp::mul, unary_folded(UnaryOp::cos, n->a, off), std::move(du), off);
          case UnaryOp::cos:
            return unary_folded(
                UnaryOp::neg,
                binary_folded(BinaryOp::mul, unary_folded(UnaryOp::sin, n->a, off), std::move(du), off), off);
          case UnaryOp::atan:
            return binary_folded(
                BinaryOp::div, std::move(du),
                binary_folded(BinaryOp::add, constant_node(1.0, off),
                              binary_folded(BinaryOp::pow, n->a, constant_node(2.0, off), off), off),
                off);
        }
        return constant_node(0.0, off);
      }
      case ExprNode::Kind::binary: {
        switch (n->bop) {
          case BinaryOp::add:
            return binary_folded(BinaryOp::add, diff_node(n->a), diff_node(n->b), off);
          case BinaryOp::sub:
            return binary_folded(BinaryOp::sub, diff_node(n->a), diff_node(n->b), off);
          case BinaryOp::mul:
            return binary_folded(BinaryOp::add,
                                 binary_folded(BinaryOp::mul, diff_node(n->a), n->b, off),
                                 binary_folded(BinaryOp::mul, n->a, diff_node(n->b), off), off);
          case BinaryOp::div:
            return binary_folded(
                BinaryOp::div,
                binary_folded(BinaryOp::sub,
                              binary_folded(BinaryOp::mul, diff_node(n->a), n->b, off),
                              binary_folded(BinaryOp::mul, n->a, diff_node(n->b), off), off),
                binary_folded(BinaryOp::pow, n->b, constant_node(2.0, off), off), off);
          case BinaryOp::pow: {
            // exponent is a non-negative integer constant by construction
            const long long m = static_cast<long long>(n->b->value);
            if (m == 0) return constant_node(0.0, off);
            ExprPtr um1 = binary_folded(BinaryOp::pow, n->a, constant_node(static_cast<double>(m - 1), off), off);
            ExprPtr coeff = binary_folded(BinaryOp::mul, constant_node(static_cast<double>(m), off),
                                          std::move(um1), off);
            return binary_folded(BinaryOp::mul, std::move(coeff), diff_node(n->a), off);
          }
        }
        return constant_node(0.0, off);
      }
    }
    return constant_node(0.0, off);
  }

  static std::size_t count_nodes(const ExprNode& n) {
    std::size_t c = 1;
    if (n.a) c += count_nodes(*n.a);
    if (n.b) c += count_nodes(*n.b);
    return c;
  }

  static bool nodes_equal(const ExprNode& x, const ExprNode& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case ExprNode::Kind::constant: return x.value == y.value;
      case ExprNode::Kind::variable: return true;
      case ExprNode::Kind::unary: return x.uop == y.uop && nodes_equal(*x.a, *y.a);
      case ExprNode::Kind::binary:
        return x.bop == y.bop && nodes_equal(*x.a, *y.a) && nodes_equal(*x.b, *y.b);
    }
    return false;
  }

  // precedence: add/sub = 1, mul/div = 2, neg = 3, pow = 4, atoms = 5
  static int node_prec(const ExprNode& n) {
    switch (n.kind) {
      case ExprNode::Kind::constant: return n.value < 0.0 ? 3 : 5;
      case ExprNode::Kind::variable: return 5;
      case ExprNode::Kind::unary: return n.uop == UnaryOp::neg ? 3 : 5;
      case ExprNode::Kind::binary:
        switch (n.bop) {
          case BinaryOp::add:
          case BinaryOp::sub: return 1;
          case BinaryOp::mul:
          case BinaryOp::div: return 2;
          case BinaryOp::pow: return 4;
        }
    }
    return 5;
  }

  static void format_number(double v, std::string& out) {
    char buf[64];
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
      std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    } else {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
    }
    out += buf;
  }

  static void print_node(const ExprNode& n, std::string& out, int parent_prec, bool right_of_same) {
    const int prec = node_prec(n);
    const bool parens = prec < parent_prec || (prec == parent_prec && right_of_same);
    if (parens) out += '(';
    switch (n.kind) {
      case ExprNode::Kind::constant:
        if (n.value < 0.0) {
          out += '-';
          format_number(-n.value, out);
        } else {
          format_number(n.value, out);
        }
        break;
      case ExprNode::Kind::variable: out += 'w'; break;
      case ExprNode::Kind::unary:
        switch (n.uop) {
          case UnaryOp::neg:
            out += '-';
            print_node(*n.a, out, 4, false);  // operand of '-' must be atom or power
            break;
          case UnaryOp::sin: out += "sin("; print_node(*n.a, out, 0, false); out += ')'; break;
          case UnaryOp::cos: out += "cos("; print_node(*n.a, out, 0, false); out += ')'; break;
          case UnaryOp::atan: out += "atan("; print_node(*n.a, out, 0, false); out += ')'; break;
        }
        break;
      case ExprNode::Kind::binary: {
        const char* sym = "+";
        switch (n.bop) {
          case BinaryOp::add: sym = "+"; break;
          case BinaryOp::sub: sym = "-"; break;
          case BinaryOp::mul: sym = "*"; break;
          case BinaryOp::div: sym = "/"; break;
          case BinaryOp::pow: sym = "^"; break;
        }
        if (n.bop == BinaryOp::pow) {
          print_node(*n.a, out, 5, false);  // base must be an atom
          out += sym;
          format_number(n.b->value, out);
        } else {
          print_node(*n.a, out, prec, false);
          out += sym;
          print_node(*n.b, out, prec, true);
        }
        break;
      }
    }
    if (parens) out += ')';
  }

  friend class ExprParser;
};

class ExprParser {
 public:
  static Expr parse(const std::string& text) {
    ExprParser p(text);
    ExprPtr root = p.parse_expr();
    p.skip_ws();
    if (p.pos_ != text.size()) throw ParseError(static_cast<int>(p.pos_), "unexpected trailing input");
    return Expr(std::move(root));
  }

 private:
  explicit ExprParser(const std::string& text) : text_(text) {}

  const std::string& text_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  bool accept(char c) {
    if (peek(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  ExprPtr parse_expr() {
    ExprPtr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        int off = static_cast<int>(pos_ - 1);
        lhs = Expr::binary_node(BinaryOp::add, std::move(lhs), parse_term(), off);
      } else if (accept('-')) {
        int off = static_cast<int>(pos_ - 1);
        lhs = Expr::binary_node(BinaryOp::sub, std::move(lhs), parse_term(), off);
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr lhs = parse_factor();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        int off = static_cast<int>(pos_ - 1);
        lhs = Expr::binary_node(BinaryOp::mul, std::move(lhs), parse_factor(), off);
      } else if (accept('/')) {
        int off = static_cast<int>(pos_ - 1);
        lhs = Expr::binary_node(BinaryOp::div, std::move(lhs), parse_factor(), off);
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_factor() {
    skip_ws();
    bool negated = false;
    int neg_off = static_cast<int>(pos_);
    if (accept('-')) negated = true;
    ExprPtr atom = parse_atom();
    skip_ws();
    if (accept('^')) {
      int pow_off = static_cast<int>(pos_ - 1);
      atom = Expr::binary_node(BinaryOp::pow, std::move(atom), parse_exponent(), pow_off);
    }
    if (negated) atom = Expr::unary_node(UnaryOp::neg, std::move(atom), neg_off);
    return atom;
  }

  ExprPtr parse_exponent() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
      throw ParseError(static_cast<int>(pos_), "expected non-negative integer exponent");
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.')
      throw ParseError(static_cast<int>(pos_), "exponent must be an integer");
    const long long v = std::stoll(text_.substr(start, pos_ - start));
    return Expr::constant_node(static_cast<double>(v), static_cast<int>(start));
  }

  ExprPtr parse_atom() {
    skip_ws();
    const int off = static_cast<int>(pos_);
    if (pos_ >= text_.size()) throw ParseError(off, "unexpected end of input");
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      ExprPtr inner = parse_expr();
      if (!accept(')')) throw ParseError(static_cast<int>(pos_), "expected ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      const std::string id = text_.substr(start, pos_ - start);
      if (id == "w") return Expr::variable_node(off);
      if (id == "pi") return Expr::constant_node(M_PI, off);
      if (id == "sin" || id == "cos" || id == "atan") {
        if (!accept('(')) throw ParseError(static_cast<int>(pos_), "expected '(' after function name");
        ExprPtr arg = parse_expr();
        if (!accept(')')) throw ParseError(static_cast<int>(pos_), "expected ')'");
        UnaryOp op = id == "sin" ? UnaryOp::sin : id == "cos" ? UnaryOp::cos : UnaryOp::atan;
        return Expr::unary_node(op, std::move(arg), off);
      }
      throw ParseError(off, "unknown identifier '" + id + "'");
    }
    throw ParseError(off, std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    if (pos_ == start || (pos_ == start + 1 && text_[start] == '.'))
      throw ParseError(static_cast<int>(start), "malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[p])))
        throw ParseError(static_cast<int>(pos_), "malformed exponent");
      pos_ = p;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    return Expr::constant_node(std::stod(text_.substr(start, pos_ - start)), static_cast<int>(start));
  }
};

inline Expr parse_expr(const std::string& text) { return ExprParser::parse(text); }

}  // namespace dgvf
