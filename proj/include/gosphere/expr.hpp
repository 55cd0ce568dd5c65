#ifndef GOSPHERE_EXPR_HPP
#define GOSPHERE_EXPR_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gosphere/errors.hpp"

namespace gosphere::expr {

// Smooth expression language used for family functions f(s1,s2,s3) and for
// vector-field components. Grammar (EBNF):
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?
//   unary  := '-'? atom
//   atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//
// '+','-','*','/' are left-associative, '^' is right-associative.
// Calls: sqrt, exp, log (arity 1). No abs/min/max: every expression is
// smooth wherever it is defined.

enum class NodeKind {
  Constant,
  Variable,
  Neg,
  Sqrt,
  Exp,
  Log,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

struct Node {
  NodeKind kind = NodeKind::Constant;
  double value = 0.0;  // Constant payload
  int var = -1;        // Variable payload (index into variable list)
  int a = -1;          // first child
  int b = -1;          // second child (binaries only)
};

struct ParseError : Error {
  ParseError(std::size_t offset, const std::string& message,
             std::vector<std::string> expected_tokens);
  std::size_t offset;
  std::vector<std::string> expected;
};

class Ast {
 public:
  Ast() = default;

  double eval(std::span<const double> vars) const;
  std::string str() const;
  bool structurally_equal(const Ast& other) const;

  const std::vector<std::string>& variables() const { return vars_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }
  bool empty() const { return root_ < 0; }

 private:
  friend Ast parse(std::string_view, const std::vector<std::string>&);
  friend class AstBuilder;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<std::string> vars_;
};

/// Parses `text` over the declared variable set. Throws ParseError with the
/// byte offset of the failure and the set of tokens that would have been
/// accepted there.
Ast parse(std::string_view text, const std::vector<std::string>& variables);

/// Shortest decimal string that round-trips to exactly `v`.
std::string format_double(double v);

/// Test/tooling helper: builds ASTs programmatically (children first).
class AstBuilder {
 public:
  explicit AstBuilder(std::vector<std::string> variables);
  int constant(double v);
  int variable(int index);
  int unary(NodeKind k, int a);
  int binary(NodeKind k, int a, int b);
  Ast finish(int root);

 private:
  Ast ast_;
};

}  // namespace gosphere::expr

#endif
