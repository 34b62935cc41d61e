#pragma once

/// \file
/// Closed-form real angle fields of (t, x): a small infix calculator used to
/// configure coin families without recompiling.
///
/// Grammar (whitespace-insensitive):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?
///     primary := number | 't' | 'x' | 'pi' | 'e'
///              | func '(' expr ')' | '(' expr ')'
///     func    := sin | cos | tan | exp | ln | sqrt | abs
///
/// so `^` binds tighter than unary minus, which binds tighter than `* /`.
/// `^` is right-associative. All trigonometry is in radians.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qwalk {

/// Malformed expression text. `offset()` is the byte offset of the problem.
class ExprSyntaxError : public std::runtime_error {
 public:
  ExprSyntaxError(std::size_t offset, std::string expected,
                  const std::string& message);
  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class UnknownIdentifierError : public ExprSyntaxError {
 public:
  UnknownIdentifierError(std::size_t offset, std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation left the real domain (ln/sqrt of a negative value, division by
/// zero, overflow). Carries the offending subexpression and the point.
class ExprDomainError : public std::runtime_error {
 public:
  ExprDomainError(std::string subexpression, double t, double x,
                  const std::string& reason);
  const std::string& subexpression() const noexcept { return subexpression_; }
  double t() const noexcept { return t_; }
  double x() const noexcept { return x_; }

 private:
  std::string subexpression_;
  double t_;
  double x_;
};

namespace expr {

enum class NodeKind { Literal, VarT, VarX, ConstPi, ConstE, Neg, Binary, Call };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs };

struct Node {
  NodeKind kind = NodeKind::Literal;
  double value = 0.0;  // Literal only
  BinaryOp op = BinaryOp::Add;
  Function fn = Function::Sin;
  std::shared_ptr<const Node> lhs;  // Neg/Call operand, Binary left
  std::shared_ptr<const Node> rhs;  // Binary right
};

bool structurally_equal(const Node& a, const Node& b);
std::string to_string(const Node& n);

}  // namespace expr

/// Immutable parsed expression. Copies share the tree; evaluation is
/// reentrant.
class Expr {
 public:
  /// The constant 0.
  Expr();

  static Expr constant(double value);
  static Expr parse(std::string_view source);

  double eval(double t, double x) const;

  /// Canonical text with minimal parentheses; parses back to the same tree.
  std::string to_string() const;

  bool depends_on_t() const noexcept { return uses_t_; }
  bool depends_on_x() const noexcept { return uses_x_; }
  bool is_constant() const noexcept { return !uses_t_ && !uses_x_; }

  const expr::Node& root() const noexcept { return *root_; }

  friend bool operator==(const Expr& a, const Expr& b) {
    return expr::structurally_equal(*a.root_, *b.root_);
  }

 private:
  struct Instr;
  explicit Expr(std::shared_ptr<const expr::Node> root);
  void compile();

  std::shared_ptr<const expr::Node> root_;
  std::shared_ptr<const std::vector<Instr>> program_;
  std::size_t stack_depth_ = 0;
  bool uses_t_ = false;
  bool uses_x_ = false;
};

inline Expr parse_angle_expr(std::string_view source) {
  return Expr::parse(source);
}

inline double eval_expr(const Expr& e, double t, double x) {
  return e.eval(t, x);
}

}  // namespace qwalk
