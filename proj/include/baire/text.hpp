#pragma once

// Textual forms shared by every file format and CLI argument:
//   FinSeq   [3,1,4]   []
//   Point    [0,1]~const(0)   [0]~per(1,2)
//   Dyadic   0   1   2^-3   2^4
//   Rational 3/8   1

#include <cctype>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "baire/seq.hpp"

namespace baire {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Character cursor with 1-based line/column bookkeeping.
class Cursor {
 public:
  explicit Cursor(std::string_view text, std::size_t line = 1) : text_(text), line_(line) {}

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return col_; }

  char get() {
    char c = peek();
    ++pos_;
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) get();
  }

  bool consume(char c) {
    skip_space();
    if (peek() != c) return false;
    get();
    return true;
  }

  bool consume_word(std::string_view w) {
    skip_space();
    if (text_.substr(pos_, w.size()) != w) return false;
    for (std::size_t i = 0; i < w.size(); ++i) get();
    return true;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  Nat natural() {
    skip_space();
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected a natural number");
    Nat v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      Nat d = static_cast<Nat>(get() - '0');
      if (v > (~Nat{0} - d) / 10) fail("number too large");
      v = v * 10 + d;
    }
    return v;
  }

  std::string word() {
    skip_space();
    std::string out;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-'))
      out.push_back(get());
    if (out.empty()) fail("expected a word");
    return out;
  }

  void expect_end() {
    skip_space();
    if (!at_end()) fail("unexpected trailing input");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

inline std::vector<Nat> parse_nat_list(Cursor& c, char open, char close) {
  c.expect(open);
  std::vector<Nat> out;
  if (c.consume(close)) return out;
  do {
    out.push_back(c.natural());
  } while (c.consume(','));
  c.expect(close);
  return out;
}

inline FinSeq parse_finseq(Cursor& c) { return FinSeq(parse_nat_list(c, '[', ']')); }

inline Point parse_point(Cursor& c) {
  FinSeq head = parse_finseq(c);
  c.expect('~');
  if (c.consume_word("const")) {
    c.expect('(');
    Nat v = c.natural();
    c.expect(')');
    return Point::constant(std::move(head), v);
  }
  if (c.consume_word("per")) {
    auto cyc = parse_nat_list(c, '(', ')');
    if (cyc.empty()) c.fail("periodic tail must be nonempty");
    return Point::periodic(std::move(head), std::move(cyc));
  }
  c.fail("expected 'const' or 'per'");
}

inline Dyadic parse_dyadic(Cursor& c) {
  c.skip_space();
  if (c.consume_word("2^")) {
    bool neg = c.consume('-');
    Nat e = c.natural();
    if (e > 1000) c.fail("exponent too large");
    return Dyadic::pow2(neg ? -static_cast<int>(e) : static_cast<int>(e));
  }
  Nat v = c.natural();
  if (v == 0) return Dyadic::zero();
  if (v == 1) return Dyadic::one();
  c.fail("dyadic must be 0, 1 or 2^n");
}

inline Rational parse_rational(Cursor& c) {
  Nat p = c.natural();
  Nat q = 1;
  if (c.consume('/')) q = c.natural();
  if (q == 0) c.fail("zero denominator");
  if (p > static_cast<Nat>(INT64_MAX) || q > static_cast<Nat>(INT64_MAX)) c.fail("rational out of range");
  return Rational(static_cast<std::int64_t>(p), static_cast<std::int64_t>(q));
}

template <typename T, typename F>
T parse_whole(std::string_view text, F&& f, std::size_t line = 1) {
  Cursor c(text, line);
  T v = f(c);
  c.expect_end();
  return v;
}

inline FinSeq parse_finseq(std::string_view text) {
  return parse_whole<FinSeq>(text, [](Cursor& c) { return parse_finseq(c); });
}
inline Point parse_point(std::string_view text) {
  return parse_whole<Point>(text, [](Cursor& c) { return parse_point(c); });
}
inline Dyadic parse_dyadic(std::string_view text) {
  return parse_whole<Dyadic>(text, [](Cursor& c) { return parse_dyadic(c); });
}
inline Rational parse_rational(std::string_view text) {
  return parse_whole<Rational>(text, [](Cursor& c) { return parse_rational(c); });
}

inline std::string to_string(const FinSeq& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i]);
  }
  return out + "]";
}

inline std::string to_string(const Point& x) {
  std::string out = to_string(x.head()) + "~";
  if (x.tail_kind() == Point::TailKind::Constant) return out + "const(" + std::to_string(x.cycle()[0]) + ")";
  out += "per(";
  for (std::size_t i = 0; i < x.cycle().size(); ++i) {
    if (i) out += ',';
    out += std::to_string(x.cycle()[i]);
  }
  return out + ")";
}

inline std::string to_string(const Dyadic& d) { return d.to_string(); }

inline std::string to_string(const Rational& q) {
  if (q.denominator() == 1) return std::to_string(q.numerator());
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

// Non-blank, non-comment lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> content_lines(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t\r");
    out.emplace_back(n, line.substr(0, last + 1));
  }
  return out;
}

}  // namespace baire
