#include "stlreach/parser.hpp"

#include "stlreach/errors.hpp"

#include <cctype>
#include <cstdlib>
#include <optional>

namespace stlreach {

namespace {

struct Lexer {
  const std::string &s;
  std::size_t pos = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string &text) : s(text) {}

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
      if (s[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }

  [[noreturn]] void fail(const std::string &msg) const {
    throw ParseError(msg, line, col);
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  // Lookahead past an identifier-like char without consuming.
  char peek_at(std::size_t ahead) {
    std::size_t p = pos + ahead;
    while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
    return p < s.size() ? s[p] : '\0';
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos < s.size(); ++i) {
      if (s[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++pos;
    }
  }

  bool eat(char c) {
    if (peek() == c) {
      advance(1);
      return true;
    }
    return false;
  }

  void expect(char c, const std::string &what) {
    if (!eat(c)) fail("expected '" + std::string(1, c) + "' " + what);
  }

  bool eat_word(const std::string &w) {
    skip_ws();
    if (s.compare(pos, w.size(), w) == 0) {
      std::size_t end = pos + w.size();
      if (end < s.size() &&
          (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
        return false;
      advance(w.size());
      return true;
    }
    return false;
  }

  double number() {
    skip_ws();
    std::size_t start = pos;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
    bool digits = false;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      ++pos;
      digits = true;
    }
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        ++pos;
        digits = true;
      }
    }
    if (digits && pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
      std::size_t mark = pos;
      ++pos;
      if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
      bool exp_digits = false;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        ++pos;
        exp_digits = true;
      }
      if (!exp_digits) pos = mark;
    }
    if (!digits) {
      pos = start;
      fail("expected a number");
    }
    std::string tok = s.substr(start, pos - start);
    col += static_cast<int>(pos - start);
    return std::strtod(tok.c_str(), nullptr);
  }
};

class Parser {
public:
  Parser(const std::string &text, int state_dim) : lx_(text), dim_(state_dim) {
    if (state_dim < 1) throw ConfigError("state_dim must be >= 1");
  }

  Formula run() {
    Formula f = disj();
    lx_.skip_ws();
    if (lx_.pos != lx_.s.size()) lx_.fail("trailing input after formula");
    return f;
  }

private:
  Lexer lx_;
  int dim_;

  std::pair<double, double> window() {
    lx_.expect('[', "to open a temporal window");
    double lo = lx_.number();
    lx_.expect(',', "between window bounds");
    double hi = lx_.number();
    lx_.expect(']', "to close the temporal window");
    if (lo < 0.0 || hi < lo)
      throw ConfigError("temporal window must satisfy 0 <= lo <= hi, got [" +
                        std::to_string(lo) + "," + std::to_string(hi) + "]");
    return {lo, hi};
  }

  Formula disj() {
    std::vector<Formula> parts{conj()};
    while (lx_.eat('|')) parts.push_back(conj());
    return parts.size() == 1 ? parts[0] : Formula::disj(std::move(parts));
  }

  Formula conj() {
    std::vector<Formula> parts{unary()};
    while (lx_.eat('&')) parts.push_back(unary());
    return parts.size() == 1 ? parts[0] : Formula::conj(std::move(parts));
  }

  bool at_operator(char op) {
    // 'F', 'G', 'U' act as operators only when followed by '['.
    lx_.skip_ws();
    if (lx_.pos >= lx_.s.size() || lx_.s[lx_.pos] != op) return false;
    return lx_.peek_at(1) == '[';
  }

  // Prefix operators (!, F, G) bind tighter than the binary U, so
  // "!t1 U[0,T] g1" reads ((!t1) U g1); U itself is right-associative.
  Formula unary() {
    Formula left = prefix();
    if (at_operator('U')) {
      lx_.advance(1);
      auto [lo, hi] = window();
      Formula right = unary();
      return Formula::until(lo, hi, std::move(left), std::move(right));
    }
    return left;
  }

  Formula prefix() {
    if (lx_.eat('!')) return Formula::negate(prefix());
    if (at_operator('F')) {
      lx_.advance(1);
      auto [lo, hi] = window();
      return Formula::eventually(lo, hi, prefix());
    }
    if (at_operator('G')) {
      lx_.advance(1);
      auto [lo, hi] = window();
      return Formula::always(lo, hi, prefix());
    }
    return atom();
  }

  Formula atom() {
    if (lx_.eat('(')) {
      Formula f = disj();
      lx_.expect(')', "to close a group");
      return f;
    }
    if (lx_.eat_word("true")) return Formula::truth();
    if (lx_.eat_word("inbox")) return inbox();
    return comparison();
  }

  Formula inbox() {
    lx_.expect('(', "after inbox");
    double xmin = lx_.number();
    lx_.expect(',', "in inbox");
    double xmax = lx_.number();
    lx_.expect(',', "in inbox");
    double ymin = lx_.number();
    lx_.expect(',', "in inbox");
    double ymax = lx_.number();
    lx_.expect(')', "to close inbox");
    if (dim_ < 2) throw ConfigError("inbox macro needs state_dim >= 2");
    if (xmax <= xmin || ymax <= ymin)
      throw ConfigError("inbox requires xmin < xmax and ymin < ymax");
    std::vector<Formula> faces;
    faces.push_back(face(0, +1.0, xmin));  // x0 >= xmin
    faces.push_back(face(0, -1.0, -xmax)); // -x0 >= -xmax
    faces.push_back(face(1, +1.0, ymin));
    faces.push_back(face(1, -1.0, -ymax));
    return Formula::conj(std::move(faces));
  }

  Formula face(int dim, double sign, double b) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim_);
    a[dim] = sign;
    return Formula::pred(Predicate(std::move(a), b));
  }

  // linexpr ('>='|'<=') number
  Formula comparison() {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim_);
    bool any_term = false;
    double sign = 1.0;
    if (lx_.eat('-')) sign = -1.0;
    else lx_.eat('+');
    for (;;) {
      parse_term(a, sign);
      any_term = true;
      if (lx_.eat('+')) sign = 1.0;
      else if (lx_.eat('-')) sign = -1.0;
      else break;
    }
    if (!any_term) lx_.fail("expected a linear expression");

    bool geq;
    lx_.skip_ws();
    if (lx_.s.compare(lx_.pos, 2, ">=") == 0) {
      geq = true;
      lx_.advance(2);
    } else if (lx_.s.compare(lx_.pos, 2, "<=") == 0) {
      geq = false;
      lx_.advance(2);
    } else {
      lx_.fail("expected '>=' or '<=' after linear expression");
    }
    double b = lx_.number();
    if (a.isZero(0.0)) throw ConfigError("predicate coefficients are all zero");
    if (!geq) {
      a = -a;
      b = -b;
    }
    return Formula::pred(Predicate(std::move(a), b));
  }

  void parse_term(Eigen::VectorXd &a, double sign) {
    lx_.skip_ws();
    double coef = sign;
    char c = lx_.peek();
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      coef *= lx_.number();
      if (!lx_.eat('*')) lx_.fail("expected '*' between coefficient and variable");
    }
    lx_.skip_ws();
    if (lx_.peek() != 'x') lx_.fail("expected state variable 'x<k>'");
    lx_.advance(1);
    std::size_t start = lx_.pos;
    while (lx_.pos < lx_.s.size() &&
           std::isdigit(static_cast<unsigned char>(lx_.s[lx_.pos])))
      lx_.advance(1);
    if (lx_.pos == start) lx_.fail("expected variable index after 'x'");
    int idx = std::atoi(lx_.s.substr(start, lx_.pos - start).c_str());
    if (idx < 0 || idx >= dim_)
      throw ConfigError("variable x" + std::to_string(idx) +
                        " out of range for state_dim " + std::to_string(dim_));
    a[idx] += coef;
  }
};

} // namespace

Formula parse_formula(const std::string &text, int state_dim) {
  return Parser(text, state_dim).run();
}

} // namespace stlreach
