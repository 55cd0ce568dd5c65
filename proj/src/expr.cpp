#include "gosphere/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace gosphere::expr {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += parts[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::size_t off, const std::string& message,
                       std::vector<std::string> expected_tokens)
    : Error("parse error at offset " + std::to_string(off) + ": " + message +
            (expected_tokens.empty() ? "" : " (expected: " + join(expected_tokens) + ")")),
      offset(off),
      expected(std::move(expected_tokens)) {}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double Ast::eval(std::span<const double> vars) const {
  thread_local std::vector<double> scratch;
  scratch.resize(nodes_.size());
  // Children always precede parents, so one forward pass suffices.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    double r = 0.0;
    switch (n.kind) {
      case NodeKind::Constant: r = n.value; break;
      case NodeKind::Variable: r = vars[static_cast<std::size_t>(n.var)]; break;
      case NodeKind::Neg:  r = -scratch[n.a]; break;
      case NodeKind::Sqrt: r = std::sqrt(scratch[n.a]); break;
      case NodeKind::Exp:  r = std::exp(scratch[n.a]); break;
      case NodeKind::Log:  r = std::log(scratch[n.a]); break;
      case NodeKind::Add:  r = scratch[n.a] + scratch[n.b]; break;
      case NodeKind::Sub:  r = scratch[n.a] - scratch[n.b]; break;
      case NodeKind::Mul:  r = scratch[n.a] * scratch[n.b]; break;
      case NodeKind::Div:  r = scratch[n.a] / scratch[n.b]; break;
      case NodeKind::Pow:  r = std::pow(scratch[n.a], scratch[n.b]); break;
    }
    scratch[i] = r;
  }
  return scratch[root_];
}

bool Ast::structurally_equal(const Ast& other) const {
  if (vars_ != other.vars_) return false;
  // Compare trees recursively from the roots; node indices may differ.
  auto eq = [&](auto&& self, int i, int j) -> bool {
    if (i < 0 || j < 0) return i == j;
    const Node& x = nodes_[i];
    const Node& y = other.nodes_[j];
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case NodeKind::Constant: return x.value == y.value;
      case NodeKind::Variable: return x.var == y.var;
      case NodeKind::Neg:
      case NodeKind::Sqrt:
      case NodeKind::Exp:
      case NodeKind::Log: return self(self, x.a, y.a);
      default: return self(self, x.a, y.a) && self(self, x.b, y.b);
    }
  };
  return eq(eq, root_, other.root_);
}

namespace {

// Precedence levels used by the printer; match the grammar.
// 1: +,-   2: *,/   3: ^   4: unary/atom
int precedence(NodeKind k) {
  switch (k) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Pow: return 3;
    default: return 4;
  }
}

const char* call_name(NodeKind k) {
  switch (k) {
    case NodeKind::Sqrt: return "sqrt";
    case NodeKind::Exp: return "exp";
    case NodeKind::Log: return "log";
    default: return nullptr;
  }
}

}  // namespace

std::string Ast::str() const {
  std::string out;
  auto print = [&](auto&& self, int idx, int parent_prec, bool right_operand) -> void {
    const Node& n = nodes_[idx];
    int prec = precedence(n.kind);
    switch (n.kind) {
      case NodeKind::Constant:
        out += format_double(n.value);
        return;
      case NodeKind::Variable:
        out += vars_[static_cast<std::size_t>(n.var)];
        return;
      case NodeKind::Sqrt:
      case NodeKind::Exp:
      case NodeKind::Log:
        out += call_name(n.kind);
        out += '(';
        self(self, n.a, 0, false);
        out += ')';
        return;
      case NodeKind::Neg: {
        // The grammar only allows '-' in front of an atom, so any non-atom
        // child must be parenthesized. A '-' in operand position also needs
        // parens ("a*-b" is not grammatical).
        bool need_outer = parent_prec > 1 || right_operand;
        if (need_outer) out += '(';
        out += '-';
        const Node& c = nodes_[n.a];
        bool child_atom = c.kind == NodeKind::Constant || c.kind == NodeKind::Variable ||
                          call_name(c.kind) != nullptr;
        if (child_atom) {
          self(self, n.a, 0, false);
        } else {
          out += '(';
          self(self, n.a, 0, false);
          out += ')';
        }
        if (need_outer) out += ')';
        return;
      }
      default: {
        bool need = prec < parent_prec || (prec == parent_prec && right_operand);
        if (need) out += '(';
        // '^' is right-associative: its left child must be strictly tighter,
        // the others are left-associative with a strict right side.
        if (n.kind == NodeKind::Pow) {
          self(self, n.a, prec + 1, false);
          out += '^';
          self(self, n.b, prec, false);
        } else {
          char op = n.kind == NodeKind::Add ? '+'
                    : n.kind == NodeKind::Sub ? '-'
                    : n.kind == NodeKind::Mul ? '*'
                                              : '/';
          self(self, n.a, prec, false);
          out += op;
          self(self, n.b, prec + 1, true);
        }
        if (need) out += ')';
        return;
      }
    }
  };
  if (root_ >= 0) print(print, root_, 0, false);
  return out;
}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars)
      : text_(text), vars_(vars) {}

  int run(std::vector<Node>& nodes) {
    nodes_ = &nodes;
    skip_ws();
    int root = parse_expr();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError(pos_, "trailing input", {"operator", "end of input"});
    return root;
  }

 private:
  std::string_view text_;
  const std::vector<std::string>& vars_;
  std::vector<Node>* nodes_ = nullptr;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool accept(char c) {
    if (!at_end() && text_[pos_] == c) {
      ++pos_;
      skip_ws();
      return true;
    }
    return false;
  }

  int add(Node n) {
    nodes_->push_back(n);
    return static_cast<int>(nodes_->size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    while (!at_end() && (peek() == '+' || peek() == '-')) {
      char op = peek();
      ++pos_;
      skip_ws();
      int rhs = parse_term();
      lhs = add({op == '+' ? NodeKind::Add : NodeKind::Sub, 0.0, -1, lhs, rhs});
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_factor();
    while (!at_end() && (peek() == '*' || peek() == '/')) {
      char op = peek();
      ++pos_;
      skip_ws();
      int rhs = parse_factor();
      lhs = add({op == '*' ? NodeKind::Mul : NodeKind::Div, 0.0, -1, lhs, rhs});
    }
    return lhs;
  }

  int parse_factor() {
    int base = parse_unary();
    if (!at_end() && peek() == '^') {
      ++pos_;
      skip_ws();
      int exp = parse_factor();  // right-associative
      return add({NodeKind::Pow, 0.0, -1, base, exp});
    }
    return base;
  }

  int parse_unary() {
    if (!at_end() && peek() == '-') {
      ++pos_;
      skip_ws();
      int a = parse_atom();
      return add({NodeKind::Neg, 0.0, -1, a, -1});
    }
    return parse_atom();
  }

  int parse_atom() {
    if (at_end())
      throw ParseError(pos_, "unexpected end of input",
                       {"number", "identifier", "'('", "'-'"});
    char c = peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    if (accept('(')) {
      int e = parse_expr();
      if (!accept(')')) throw ParseError(pos_, "unbalanced parenthesis", {"')'"});
      return e;
    }
    throw ParseError(pos_, std::string("unexpected character '") + c + "'",
                     {"number", "identifier", "'('", "'-'"});
  }

  int parse_number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError(pos_, "malformed number", {"number"});
    pos_ += static_cast<std::size_t>(end - begin);
    skip_ws();
    return add({NodeKind::Constant, v, -1, -1, -1});
  }

  int parse_ident() {
    std::size_t start = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    skip_ws();
    if (!at_end() && peek() == '(') {
      NodeKind k;
      if (name == "sqrt")
        k = NodeKind::Sqrt;
      else if (name == "exp")
        k = NodeKind::Exp;
      else if (name == "log")
        k = NodeKind::Log;
      else
        throw ParseError(start, "unknown function '" + name + "'", {"sqrt", "exp", "log"});
      accept('(');
      int arg = parse_expr();
      if (accept(',')) throw ParseError(pos_ - 1, name + " takes one argument", {"')'"});
      if (!accept(')')) throw ParseError(pos_, "unbalanced call", {"')'"});
      return add({k, 0.0, -1, arg, -1});
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name)
        return add({NodeKind::Variable, 0.0, static_cast<int>(i), -1, -1});
    }
    throw ParseError(start, "unknown identifier '" + name + "'", vars_);
  }
};

}  // namespace

Ast parse(std::string_view text, const std::vector<std::string>& variables) {
  if (text.empty()) throw ParseError(0, "empty input", {"expression"});
  Ast ast;
  ast.vars_ = variables;
  ast.root_ = Parser(text, variables).run(ast.nodes_);
  return ast;
}

AstBuilder::AstBuilder(std::vector<std::string> variables) { ast_.vars_ = std::move(variables); }

int AstBuilder::constant(double v) {
  ast_.nodes_.push_back({NodeKind::Constant, v, -1, -1, -1});
  return static_cast<int>(ast_.nodes_.size()) - 1;
}
int AstBuilder::variable(int index) {
  ast_.nodes_.push_back({NodeKind::Variable, 0.0, index, -1, -1});
  return static_cast<int>(ast_.nodes_.size()) - 1;
}
int AstBuilder::unary(NodeKind k, int a) {
  ast_.nodes_.push_back({k, 0.0, -1, a, -1});
  return static_cast<int>(ast_.nodes_.size()) - 1;
}
int AstBuilder::binary(NodeKind k, int a, int b) {
  ast_.nodes_.push_back({k, 0.0, -1, a, b});
  return static_cast<int>(ast_.nodes_.size()) - 1;
}
Ast AstBuilder::finish(int root) {
  ast_.root_ = root;
  return std::move(ast_);
}

}  // namespace gosphere::expr
