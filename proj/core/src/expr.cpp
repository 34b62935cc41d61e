#include "qwalk/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <system_error>

namespace qwalk {

ExprSyntaxError::ExprSyntaxError(std::size_t offset, std::string expected,
                                 const std::string& message)
    : std::runtime_error("syntax error at offset " + std::to_string(offset) +
                         ": " + message),
      offset_(offset),
      expected_(std::move(expected)) {}

UnknownIdentifierError::UnknownIdentifierError(std::size_t offset,
                                               std::string name)
    : ExprSyntaxError(offset, "t, x, pi, e or a function name",
                      "unknown identifier '" + name + "'"),
      name_(std::move(name)) {}

namespace {

std::string format_point(double t, double x) {
  return "(t=" + std::to_string(t) + ", x=" + std::to_string(x) + ")";
}

}  // namespace

ExprDomainError::ExprDomainError(std::string subexpression, double t, double x,
                                 const std::string& reason)
    : std::runtime_error("domain error in '" + subexpression + "' at " +
                         format_point(t, x) + ": " + reason),
      subexpression_(std::move(subexpression)),
      t_(t),
      x_(x) {}

namespace expr {

namespace {

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_leaf(NodeKind kind, double value = 0.0) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->value = value;
  return n;
}

NodePtr make_neg(NodePtr operand) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Neg;
  n->lhs = std::move(operand);
  return n;
}

NodePtr make_binary(BinaryOp op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr make_call(Function fn, NodePtr arg) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Call;
  n->fn = fn;
  n->lhs = std::move(arg);
  return n;
}

struct FunctionName {
  std::string_view name;
  Function fn;
};

constexpr std::array<FunctionName, 7> kFunctions{{
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"tan", Function::Tan},
    {"exp", Function::Exp},
    {"ln", Function::Ln},
    {"sqrt", Function::Sqrt},
    {"abs", Function::Abs},
}};

std::string_view function_name(Function fn) {
  for (const auto& f : kFunctions) {
    if (f.fn == fn) return f.name;
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ == src_.size()) {
      throw ExprSyntaxError(pos_, "an expression", "empty expression");
    }
    NodePtr n = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) {
      throw ExprSyntaxError(pos_, "an operator or end of input",
                            std::string("unexpected '") + src_[pos_] + "'");
    }
    return n;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw ExprSyntaxError(pos_, std::string("'") + c + "'",
                            pos_ < src_.size()
                                ? std::string("expected '") + c + "', found '" +
                                      src_[pos_] + "'"
                                : std::string("expected '") + c +
                                      "', found end of input");
    }
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = make_binary(BinaryOp::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = make_binary(BinaryOp::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_binary(BinaryOp::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = make_binary(BinaryOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make_neg(parse_unary());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_binary(BinaryOp::Pow, base, parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ == src_.size()) {
      throw ExprSyntaxError(pos_, "a number, identifier or '('",
                            "unexpected end of input");
    }
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_identifier();
    }
    throw ExprSyntaxError(pos_, "a number, identifier or '('",
                          std::string("unexpected '") + c + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[end]))) {
        ++end;
      }
    };
    digits();
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      digits();
    }
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t k = end + 1;
      if (k < src_.size() && (src_[k] == '+' || src_[k] == '-')) ++k;
      if (k < src_.size() && std::isdigit(static_cast<unsigned char>(src_[k]))) {
        end = k;
        digits();
      }
    }
    double value = 0.0;
    const auto res =
        std::from_chars(src_.data() + start, src_.data() + end, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + end ||
        !std::isfinite(value)) {
      throw ExprSyntaxError(start, "a finite number",
                            "malformed number '" +
                                std::string(src_.substr(start, end - start)) +
                                "'");
    }
    pos_ = end;
    return make_leaf(NodeKind::Literal, value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") return make_leaf(NodeKind::VarT);
    if (name == "x") return make_leaf(NodeKind::VarX);
    if (name == "pi") return make_leaf(NodeKind::ConstPi);
    if (name == "e") return make_leaf(NodeKind::ConstE);
    for (const auto& f : kFunctions) {
      if (f.name == name) {
        expect('(');
        NodePtr arg = parse_expr();
        expect(')');
        return make_call(f.fn, arg);
      }
    }
    throw UnknownIdentifierError(start, std::string(name));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// Precedence levels used by the printer; atoms bind tightest.
int precedence(const Node& n) {
  switch (n.kind) {
    case NodeKind::Binary:
      switch (n.op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          return 1;
        case BinaryOp::Mul:
        case BinaryOp::Div:
          return 2;
        case BinaryOp::Pow:
          return 4;
      }
      return 0;
    case NodeKind::Neg:
      return 3;
    default:
      return 5;
  }
}

std::string format_literal(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void print(const Node& n, std::string& out);

void print_child(const Node& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::Literal:
      out += format_literal(n.value);
      return;
    case NodeKind::VarT:
      out += 't';
      return;
    case NodeKind::VarX:
      out += 'x';
      return;
    case NodeKind::ConstPi:
      out += "pi";
      return;
    case NodeKind::ConstE:
      out += 'e';
      return;
    case NodeKind::Neg:
      out += '-';
      print_child(*n.lhs, precedence(*n.lhs) < 3, out);
      return;
    case NodeKind::Call:
      out += function_name(n.fn);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    case NodeKind::Binary: {
      const int p = precedence(n);
      const int pl = precedence(*n.lhs);
      const int pr = precedence(*n.rhs);
      switch (n.op) {
        case BinaryOp::Add:
        case BinaryOp::Sub:
          print_child(*n.lhs, pl < 1, out);
          out += n.op == BinaryOp::Add ? " + " : " - ";
          print_child(*n.rhs, pr <= 1, out);
          return;
        case BinaryOp::Mul:
        case BinaryOp::Div:
          print_child(*n.lhs, pl < 2, out);
          out += n.op == BinaryOp::Mul ? "*" : "/";
          print_child(*n.rhs, pr <= 2, out);
          return;
        case BinaryOp::Pow:
          // base is a primary; exponent is a unary
          print_child(*n.lhs, pl <= p, out);
          out += '^';
          print_child(*n.rhs, pr < 3, out);
          return;
      }
      return;
    }
  }
}

}  // namespace

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Literal:
      return a.value == b.value;
    case NodeKind::VarT:
    case NodeKind::VarX:
    case NodeKind::ConstPi:
    case NodeKind::ConstE:
      return true;
    case NodeKind::Neg:
      return structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::Call:
      return a.fn == b.fn && structurally_equal(*a.lhs, *b.lhs);
    case NodeKind::Binary:
      return a.op == b.op && structurally_equal(*a.lhs, *b.lhs) &&
             structurally_equal(*a.rhs, *b.rhs);
  }
  return false;
}

std::string to_string(const Node& n) {
  std::string out;
  print(n, out);
  return out;
}

}  // namespace expr

// Postfix program; `node` is kept for error reporting.
struct Expr::Instr {
  enum class Code { Push, T, X, Neg, Add, Sub, Mul, Div, Pow, Call };
  Code code;
  double value;
  expr::Function fn;
  const expr::Node* node;
};

Expr::Expr() : Expr(expr::make_leaf(expr::NodeKind::Literal, 0.0)) {}

Expr::Expr(std::shared_ptr<const expr::Node> root) : root_(std::move(root)) {
  compile();
}

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("Expr::constant: non-finite value");
  }
  if (value < 0.0) {
    return Expr(expr::make_neg(expr::make_leaf(expr::NodeKind::Literal, -value)));
  }
  return Expr(expr::make_leaf(expr::NodeKind::Literal, value));
}

Expr Expr::parse(std::string_view source) {
  return Expr(expr::Parser(source).parse());
}

void Expr::compile() {
  using expr::NodeKind;
  auto program = std::make_shared<std::vector<Instr>>();
  std::size_t depth = 0;
  std::size_t max_depth = 0;
  auto push = [&](Instr in, int delta) {
    program->push_back(in);
    depth = static_cast<std::size_t>(static_cast<long>(depth) + delta);
    max_depth = std::max(max_depth, depth);
  };
  auto emit = [&](auto& self, const expr::Node& n) -> void {
    switch (n.kind) {
      case NodeKind::Literal:
        push({Instr::Code::Push, n.value, {}, &n}, +1);
        return;
      case NodeKind::ConstPi:
        push({Instr::Code::Push, std::numbers::pi, {}, &n}, +1);
        return;
      case NodeKind::ConstE:
        push({Instr::Code::Push, std::numbers::e, {}, &n}, +1);
        return;
      case NodeKind::VarT:
        uses_t_ = true;
        push({Instr::Code::T, 0.0, {}, &n}, +1);
        return;
      case NodeKind::VarX:
        uses_x_ = true;
        push({Instr::Code::X, 0.0, {}, &n}, +1);
        return;
      case NodeKind::Neg:
        self(self, *n.lhs);
        push({Instr::Code::Neg, 0.0, {}, &n}, 0);
        return;
      case NodeKind::Call:
        self(self, *n.lhs);
        push({Instr::Code::Call, 0.0, n.fn, &n}, 0);
        return;
      case NodeKind::Binary: {
        self(self, *n.lhs);
        self(self, *n.rhs);
        Instr::Code code = Instr::Code::Add;
        switch (n.op) {
          case expr::BinaryOp::Add: code = Instr::Code::Add; break;
          case expr::BinaryOp::Sub: code = Instr::Code::Sub; break;
          case expr::BinaryOp::Mul: code = Instr::Code::Mul; break;
          case expr::BinaryOp::Div: code = Instr::Code::Div; break;
          case expr::BinaryOp::Pow: code = Instr::Code::Pow; break;
        }
        push({code, 0.0, {}, &n}, -1);
        return;
      }
    }
  };
  emit(emit, *root_);
  program_ = std::move(program);
  stack_depth_ = max_depth;
}

namespace {

[[noreturn]] void domain_fail(const expr::Node* node, double t, double x,
                              const std::string& reason) {
  throw ExprDomainError(expr::to_string(*node), t, x, reason);
}

}  // namespace

double Expr::eval(double t, double x) const {
  constexpr std::size_t kInline = 32;
  std::array<double, kInline> inline_stack{};
  std::vector<double> heap_stack;
  double* stack = inline_stack.data();
  if (stack_depth_ > kInline) {
    heap_stack.resize(stack_depth_);
    stack = heap_stack.data();
  }
  std::size_t sp = 0;
  for (const Instr& in : *program_) {
    switch (in.code) {
      case Instr::Code::Push:
        stack[sp++] = in.value;
        break;
      case Instr::Code::T:
        stack[sp++] = t;
        break;
      case Instr::Code::X:
        stack[sp++] = x;
        break;
      case Instr::Code::Neg:
        stack[sp - 1] = -stack[sp - 1];
        break;
      case Instr::Code::Add:
        --sp;
        stack[sp - 1] += stack[sp];
        break;
      case Instr::Code::Sub:
        --sp;
        stack[sp - 1] -= stack[sp];
        break;
      case Instr::Code::Mul:
        --sp;
        stack[sp - 1] *= stack[sp];
        break;
      case Instr::Code::Div:
        --sp;
        if (stack[sp] == 0.0) domain_fail(in.node, t, x, "division by zero");
        stack[sp - 1] /= stack[sp];
        break;
      case Instr::Code::Pow:
        --sp;
        stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]);
        if (std::isnan(stack[sp - 1])) {
          domain_fail(in.node, t, x, "negative base with non-integer exponent");
        }
        break;
      case Instr::Code::Call: {
        double& v = stack[sp - 1];
        switch (in.fn) {
          case expr::Function::Sin: v = std::sin(v); break;
          case expr::Function::Cos: v = std::cos(v); break;
          case expr::Function::Tan: v = std::tan(v); break;
          case expr::Function::Exp: v = std::exp(v); break;
          case expr::Function::Abs: v = std::abs(v); break;
          case expr::Function::Ln:
            if (!(v > 0.0)) {
              domain_fail(in.node, t, x, "logarithm of a non-positive value");
            }
            v = std::log(v);
            break;
          case expr::Function::Sqrt:
            if (v < 0.0) {
              domain_fail(in.node, t, x, "square root of a negative value");
            }
            v = std::sqrt(v);
            break;
        }
        break;
      }
    }
    if (!std::isfinite(stack[sp - 1])) {
      domain_fail(in.node, t, x, "non-finite result");
    }
  }
  return stack[0];
}

std::string Expr::to_string() const { return expr::to_string(*root_); }

}  // namespace qwalk
