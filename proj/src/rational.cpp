#include "sparsetest/rational.hpp"

#include <cctype>
#include <cmath>

namespace sparsetest {

namespace {

bool is_integer_body(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

}  // namespace

std::optional<Rat> try_parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) return std::nullopt;

  if (auto slash = s.find('/'); slash != std::string::npos) {
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (!is_integer_body(num) || !is_integer_body(den)) return std::nullopt;
    Int n{num, 10}, d{den, 10};
    if (d == 0) return std::nullopt;
    Rat q{n, d};
    q.canonicalize();
    return q;
  }

  // [sign] digits [. digits] [e/E [sign] digits]
  long exp10 = 0;
  std::string mantissa = s;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    std::string es = s.substr(e + 1);
    if (!is_integer_body(es)) return std::nullopt;
    try {
      exp10 = std::stol(es);
    } catch (...) {
      return std::nullopt;
    }
    mantissa = s.substr(0, e);
  }
  std::string digits = mantissa;
  if (auto dot = mantissa.find('.'); dot != std::string::npos) {
    digits = mantissa.substr(0, dot) + mantissa.substr(dot + 1);
    exp10 -= static_cast<long>(mantissa.size() - dot - 1);
    if (digits == "" || digits == "+" || digits == "-") return std::nullopt;
  }
  if (!is_integer_body(digits)) return std::nullopt;
  Int mant{digits, 10};
  Rat q{mant};
  if (exp10 > 0) {
    q *= Rat(int_pow(Int(10), static_cast<unsigned long>(exp10)));
  } else if (exp10 < 0) {
    q /= Rat(int_pow(Int(10), static_cast<unsigned long>(-exp10)));
  }
  q.canonicalize();
  return q;
}

std::string to_string(const Rat& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rat rat_from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite double");
  Rat q;
  mpq_set_d(q.get_mpq_t(), x);
  return q;
}

Int monomial_count(unsigned n, unsigned d) {
  Int total = 0;
  for (unsigned j = 0; j <= d && j <= n; ++j) total += binomial(n, j);
  return total;
}

}  // namespace sparsetest
