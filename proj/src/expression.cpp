#include "despso/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "despso/error.hpp"

namespace despso::expr {

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& vars) : s_(text), vars_(vars) {}

  Expression run() {
    Expression e;
    e.source_ = std::string(s_);
    out_ = &e.code_;
    parse_expr();
    skip_space();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    if (e.code_.empty()) fail("empty expression");
    // Stack depth for preallocation during evaluation.
    std::size_t depth = 0, peak = 0;
    for (const auto& in : e.code_) {
      if (in.op == Expression::Op::kNumber || in.op == Expression::Op::kVariable)
        peak = std::max(peak, ++depth);
      else if (in.op != Expression::Op::kNeg)
        --depth;
    }
    e.stack_depth_ = peak;
    return e;
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " at column " + std::to_string(pos_ + 1) + " in '" +
                     std::string(s_) + "'");
  }

  void skip_space() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void emit(Op op) { out_->push_back({op}); }

  void parse_expr() {
    parse_term();
    for (;;) {
      if (accept('+')) {
        parse_term();
        emit(Op::kAdd);
      } else if (accept('-')) {
        parse_term();
        emit(Op::kSub);
      } else {
        return;
      }
    }
  }

  void parse_term() {
    parse_unary();
    for (;;) {
      if (accept('*')) {
        parse_unary();
        emit(Op::kMul);
      } else if (accept('/')) {
        parse_unary();
        emit(Op::kDiv);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (accept('-')) {
      parse_unary();
      emit(Op::kNeg);
    } else if (accept('+')) {
      parse_unary();
    } else {
      parse_power();
    }
  }

  void parse_power() {
    parse_atom();
    if (accept('^')) {
      parse_unary();
      emit(Op::kPow);
    }
  }

  void parse_atom() {
    skip_space();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      parse_expr();
      if (!accept(')')) fail("missing ')'");
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0.0;
      const char* first = s_.data() + pos_;
      const auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
      if (ec != std::errc()) fail("bad number");
      pos_ += static_cast<std::size_t>(ptr - first);
      out_->push_back({Op::kNumber, v});
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string name(s_.substr(start, pos_ - start));
      const auto it = std::find(vars_.begin(), vars_.end(), name);
      if (it == vars_.end()) {
        pos_ = start;
        fail("unknown variable '" + name + "'");
      }
      out_->push_back({Op::kVariable, 0.0, static_cast<Eigen::Index>(it - vars_.begin())});
      return;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::vector<Expression::Instr>* out_ = nullptr;
  std::size_t pos_ = 0;
};

Expression Expression::parse(std::string_view text, const std::vector<std::string>& variables) {
  return Parser(text, variables).run();
}

double Expression::evaluate(const Vector& x) const {
  double stack[64] = {};
  std::unique_ptr<double[]> heap;
  double* st = stack;
  if (stack_depth_ > 64) {
    heap = std::make_unique<double[]>(stack_depth_);
    st = heap.get();
  }
  std::size_t top = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::kNumber: st[top++] = in.value; break;
      case Op::kVariable: st[top++] = x(in.index); break;
      case Op::kNeg: st[top - 1] = -st[top - 1]; break;
      case Op::kAdd: --top; st[top - 1] += st[top]; break;
      case Op::kSub: --top; st[top - 1] -= st[top]; break;
      case Op::kMul: --top; st[top - 1] *= st[top]; break;
      case Op::kDiv: --top; st[top - 1] /= st[top]; break;
      case Op::kPow: --top; st[top - 1] = std::pow(st[top - 1], st[top]); break;
    }
  }
  return st[0];
}

namespace {

double parse_number(const std::string& token, int line) {
  double v = 0.0;
  const char* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ParseError("line " + std::to_string(line) + ": bad number '" + token + "'");
  return v;
}

}  // namespace

interval::IntervalProblem parse_problem(std::istream& in) {
  std::vector<interval::IntervalVariable> vars;
  std::vector<std::pair<std::string, std::string>> pending;  // name, expression text
  std::vector<int> pending_lines;

  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string keyword;
    if (!(ls >> keyword)) continue;
    const std::string where = "line " + std::to_string(line) + ": ";
    if (keyword == "variable") {
      std::string name, lo, hi, extra;
      if (!(ls >> name >> lo >> hi) || (ls >> extra))
        throw ParseError(where + "expected 'variable <name> <lower> <upper>'");
      for (const auto& v : vars)
        if (v.name == name) throw ParseError(where + "duplicate variable '" + name + "'");
      vars.push_back({name, parse_number(lo, line), parse_number(hi, line)});
      if (!(vars.back().lower < vars.back().upper))
        throw ParseError(where + "variable '" + name + "' needs lower < upper");
    } else if (keyword == "response") {
      std::string name, eq;
      if (!(ls >> name >> eq) || eq != "=")
        throw ParseError(where + "expected 'response <name> = <expression>'");
      std::string rest;
      std::getline(ls, rest);
      pending.emplace_back(name, rest);
      pending_lines.push_back(line);
    } else {
      throw ParseError(where + "unknown keyword '" + keyword + "'");
    }
  }
  if (vars.empty()) throw ParseError("problem declares no variables");
  if (pending.empty()) throw ParseError("problem declares no responses");

  std::vector<std::string> names;
  for (const auto& v : vars) names.push_back(v.name);
  std::vector<interval::Response> responses;
  for (std::size_t r = 0; r < pending.size(); ++r) {
    try {
      auto e = std::make_shared<Expression>(Expression::parse(pending[r].second, names));
      responses.push_back({pending[r].first, [e](const Vector& x) { return e->evaluate(x); }});
    } catch (const ParseError& err) {
      throw ParseError("line " + std::to_string(pending_lines[r]) + ": " + err.what());
    }
  }
  return interval::IntervalProblem(std::move(vars), std::move(responses));
}

interval::IntervalProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open problem file '" + path + "'");
  return parse_problem(in);
}

}  // namespace despso::expr
