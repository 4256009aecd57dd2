// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>

#include "deepforge/common/text.hpp"
#include "deepforge/providers/sandbox.hpp"

namespace deepforge {

namespace {

struct Value {
  bool is_float = false;
  long long i = 0;
  double f = 0;
  std::string s;
  bool is_string = false;

  double as_double() const { return is_float ? f : static_cast<double>(i); }
};

std::string python_repr(const Value& v) {
  if (v.is_string) return v.s;
  if (!v.is_float) return std::to_string(v.i);
  if (std::isnan(v.f)) return "nan";
  if (std::isinf(v.f)) return v.f > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v.f);
  std::string out(buf, ptr);
  if (out.find_first_of(".en") == std::string::npos) out += ".0";
  return out;
}

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Evaluator {
 public:
  explicit Evaluator(std::map<std::string, Value>& vars) : vars_(vars) {}

  Value eval(std::string_view src) {
    src_ = src;
    pos_ = 0;
    Value v = expr();
    skip();
    if (pos_ != src_.size()) throw EvalError("unexpected trailing input");
    return v;
  }

  std::vector<Value> eval_args(std::string_view src) {
    src_ = src;
    pos_ = 0;
    std::vector<Value> out;
    skip();
    if (pos_ == src_.size()) return out;
    while (true) {
      out.push_back(expr());
      skip();
      if (pos_ == src_.size()) break;
      if (src_[pos_] != ',') throw EvalError("expected ','");
      ++pos_;
    }
    return out;
  }

 private:
  void skip() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }
  bool eat(std::string_view tok) {
    skip();
    if (src_.compare(pos_, tok.size(), tok) == 0) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  static Value arith(char op, const Value& a, const Value& b) {
    if (a.is_string || b.is_string) throw EvalError("unsupported operand types");
    Value r;
    const bool floating = a.is_float || b.is_float || op == '/';
    if (op == '/' && b.as_double() == 0) throw EvalError("ZeroDivisionError: division by zero");
    if (floating) {
      r.is_float = true;
      const double x = a.as_double(), y = b.as_double();
      switch (op) {
        case '+': r.f = x + y; break;
        case '-': r.f = x - y; break;
        case '*': r.f = x * y; break;
        case '/': r.f = x / y; break;
        case 'p': r.f = std::pow(x, y); break;
        case 'q': r.f = std::floor(x / y); break;
        case '%': r.f = x - y * std::floor(x / y); break;
      }
      return r;
    }
    const long long x = a.i, y = b.i;
    switch (op) {
      case '+': r.i = x + y; break;
      case '-': r.i = x - y; break;
      case '*': r.i = x * y; break;
      case 'p':
        if (y < 0) {
          r.is_float = true;
          r.f = std::pow(static_cast<double>(x), static_cast<double>(y));
        } else {
          r.i = static_cast<long long>(std::llround(std::pow(static_cast<double>(x), static_cast<double>(y))));
        }
        break;
      case 'q':
      case '%': {
        if (y == 0) throw EvalError("ZeroDivisionError: integer division or modulo by zero");
        long long q = x / y;
        if ((x % y != 0) && ((x < 0) != (y < 0))) --q;
        r.i = op == 'q' ? q : x - q * y;
        break;
      }
    }
    return r;
  }

  Value expr() {
    Value v = term();
    while (true) {
      if (eat("+")) {
        v = arith('+', v, term());
      } else if (eat("-")) {
        v = arith('-', v, term());
      } else {
        return v;
      }
    }
  }

  Value term() {
    Value v = unary();
    while (true) {
      skip();
      if (src_.compare(pos_, 2, "**") == 0) return v;
      if (eat("//")) {
        v = arith('q', v, unary());
      } else if (eat("*")) {
        v = arith('*', v, unary());
      } else if (eat("/")) {
        v = arith('/', v, unary());
      } else if (eat("%")) {
        v = arith('%', v, unary());
      } else {
        return v;
      }
    }
  }

  Value unary() {
    if (eat("-")) {
      Value v = unary();
      if (v.is_float) v.f = -v.f; else v.i = -v.i;
      return v;
    }
    if (eat("+")) return unary();
    Value base = atom();
    if (eat("**")) return arith('p', base, unary());
    return base;
  }

  Value atom() {
    skip();
    if (pos_ >= src_.size()) throw EvalError("unexpected end of expression");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Value v = expr();
      if (!eat(")")) throw EvalError("expected ')'");
      return v;
    }
    if (c == '"' || c == '\'') {
      const auto end = src_.find(c, pos_ + 1);
      if (end == std::string_view::npos) throw EvalError("unterminated string");
      Value v;
      v.is_string = true;
      v.s = std::string(src_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t end = pos_;
      bool floating = false;
      while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.' ||
                                   src_[end] == '_')) {
        if (src_[end] == '.') floating = true;
        ++end;
      }
      std::string digits;
      for (std::size_t k = pos_; k < end; ++k) {
        if (src_[k] != '_') digits.push_back(src_[k]);
      }
      pos_ = end;
      Value v;
      v.is_float = floating;
      if (floating) {
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v.f);
        if (ec != std::errc()) throw EvalError("bad number");
      } else {
        auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v.i);
        if (ec != std::errc()) throw EvalError("bad number");
      }
      return v;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) ++end;
      const std::string name(src_.substr(pos_, end - pos_));
      pos_ = end;
      if (eat("(")) {
        Value arg = expr();
        Value digits;
        bool has_digits = false;
        if (eat(",")) {
          digits = expr();
          has_digits = true;
        }
        if (!eat(")")) throw EvalError("expected ')'");
        return call(name, arg, has_digits ? &digits : nullptr);
      }
      auto it = vars_.find(name);
      if (it == vars_.end()) throw EvalError("NameError: name '" + name + "' is not defined");
      return it->second;
    }
    throw EvalError(std::string("SyntaxError: unexpected character '") + c + "'");
  }

  static Value call(const std::string& name, const Value& arg, const Value* digits) {
    Value r;
    if (name == "abs") {
      r = arg;
      if (r.is_float) r.f = std::fabs(r.f); else r.i = r.i < 0 ? -r.i : r.i;
      return r;
    }
    if (name == "float") {
      r.is_float = true;
      r.f = arg.as_double();
      return r;
    }
    if (name == "int") {
      r.i = static_cast<long long>(std::trunc(arg.as_double()));
      return r;
    }
    if (name == "round") {
      if (!digits) {
        r.i = static_cast<long long>(std::nearbyint(arg.as_double()));
        return r;
      }
      const double scale = std::pow(10.0, static_cast<double>(digits->i));
      r.is_float = true;
      r.f = std::nearbyint(arg.as_double() * scale) / scale;
      return r;
    }
    if (name == "ceil" || name == "floor") {
      r.i = static_cast<long long>(name == "ceil" ? std::ceil(arg.as_double()) : std::floor(arg.as_double()));
      return r;
    }
    throw EvalError("NameError: name '" + name + "' is not defined");
  }

  std::map<std::string, Value>& vars_;
  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

ExecResult MockSandbox::execute(const std::string& code, const ExecLimits& limits) {
  ExecResult result;
  std::map<std::string, Value> vars;
  Evaluator ev(vars);
  int line_no = 0;
  for (const auto& raw_line : text::split_lines(code)) {
    ++line_no;
    std::string line = text::trim(raw_line);
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("import ", 0) == 0) continue;
    line = text::replace_all(line, "math.", "");
    try {
      if (line.rfind("print(", 0) == 0 && line.back() == ')') {
        const auto args = ev.eval_args(std::string_view(line).substr(6, line.size() - 7));
        std::vector<std::string> parts;
        for (const auto& a : args) parts.push_back(python_repr(a));
        result.stdout_text += text::join(parts, " ") + "\n";
        continue;
      }
      const auto eq = line.find('=');
      if (eq != std::string::npos && eq > 0 && line.compare(eq, 2, "==") != 0) {
        const std::string name = text::trim(std::string_view(line).substr(0, eq));
        bool ident = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
        for (char c : name) ident = ident && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
        if (ident) {
          vars[name] = ev.eval(std::string_view(line).substr(eq + 1));
          continue;
        }
      }
      ev.eval(line);
    } catch (const EvalError& e) {
      result.stderr_text += "Traceback (most recent call last):\n  File \"main.py\", line " + std::to_string(line_no) +
                            "\n" + e.what() + "\n";
      result.exit = ExecExit::Error;
      result.exit_code = 1;
      break;
    }
  }
  if (result.stdout_text.size() > limits.output_bytes) {
    result.stdout_text.resize(limits.output_bytes);
    result.stdout_text += truncation_marker(limits.output_bytes);
    result.truncated = true;
  }
  return result;
}

}  // namespace deepforge
