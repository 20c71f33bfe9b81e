#include "gsindy/features.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>

#include "gsindy/csv.hpp"

namespace gsindy {

namespace {

constexpr std::string_view kVariableNames[] = {"x", "x'"};

std::string_view variable_name(std::size_t j) {
  return j < std::size(kVariableNames) ? kVariableNames[j] : std::string_view("?");
}

}  // namespace

Term::Term(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  if (exponents_.empty() || exponents_.size() > std::size(kVariableNames))
    throw Error(ErrorKind::InvalidArgument, "term arity must be 1 or 2");
  for (int e : exponents_)
    if (e < 0) throw Error(ErrorKind::InvalidArgument, "term exponents must be non-negative");
}

int Term::degree() const noexcept { return std::accumulate(exponents_.begin(), exponents_.end(), 0); }

std::string Term::name() const {
  if (is_constant()) return "1";
  std::string out;
  for (std::size_t j = 0; j < exponents_.size(); ++j) {
    if (exponents_[j] == 0) continue;
    if (!out.empty()) out += ' ';
    out += variable_name(j);
    if (exponents_[j] > 1) out += "^" + std::to_string(exponents_[j]);
  }
  return out;
}

Term Term::parse(std::string_view name, int arity) {
  if (arity < 1 || arity > static_cast<int>(std::size(kVariableNames)))
    throw Error(ErrorKind::InvalidArgument, "term arity must be 1 or 2");
  std::vector<int> exps(static_cast<std::size_t>(arity), 0);
  const auto body = csv::trim(name);
  if (body == "1") return Term(exps);
  const auto bad = [&] {
    return Error(ErrorKind::InvalidArgument, "cannot parse term '" + std::string(name) + "'");
  };
  if (body.empty()) throw bad();
  for (const auto& factor : csv::split(body, ' ')) {
    if (factor.empty()) continue;
    std::string_view f = factor;
    int power = 1;
    if (const auto caret = f.find('^'); caret != std::string_view::npos) {
      const auto digits = f.substr(caret + 1);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), power);
      if (ec != std::errc() || ptr != digits.data() + digits.size() || power < 1) throw bad();
      f = f.substr(0, caret);
    }
    std::size_t var = std::size(kVariableNames);
    for (std::size_t j = 0; j < std::size(kVariableNames); ++j)
      if (f == kVariableNames[j]) var = j;
    if (var >= exps.size()) throw bad();
    exps[var] += power;
  }
  return Term(exps);
}

bool term_order_less(const Term& lhs, const Term& rhs) noexcept {
  if (lhs.degree() != rhs.degree()) return lhs.degree() < rhs.degree();
  return lhs.exponents() > rhs.exponents();
}

FeatureLibrary FeatureLibrary::polynomial(int degree, int arity, bool cross_terms) {
  if (degree < 1 || degree > 4)
    throw Error(ErrorKind::InvalidArgument, "polynomial degree must be in 1..4");
  if (arity < 1 || arity > 2) throw Error(ErrorKind::InvalidArgument, "arity must be 1 or 2");
  std::vector<Term> terms;
  if (arity == 1) {
    for (int p = 0; p <= degree; ++p) terms.emplace_back(std::vector<int>{p});
  } else {
    for (int p = 0; p <= degree; ++p)
      for (int q = 0; p + q <= degree; ++q)
        if (cross_terms || p == 0 || q == 0) terms.emplace_back(std::vector<int>{p, q});
  }
  std::sort(terms.begin(), terms.end(), term_order_less);
  return FeatureLibrary(std::move(terms), arity);
}

FeatureLibrary FeatureLibrary::custom(std::vector<Term> terms) {
  if (terms.empty()) throw Error(ErrorKind::InvalidArgument, "library needs at least one term");
  const int arity = terms.front().arity();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].arity() != arity)
      throw Error(ErrorKind::InvalidArgument, "library terms have mixed arity");
    if (terms[i].is_constant() && i != 0)
      throw Error(ErrorKind::InvalidArgument, "constant term must be listed first");
    for (std::size_t j = 0; j < i; ++j)
      if (terms[j] == terms[i])
        throw Error(ErrorKind::DuplicateTerm, "duplicate term '" + terms[i].name() + "'");
  }
  return FeatureLibrary(std::move(terms), arity);
}

FeatureLibrary FeatureLibrary::custom(const std::vector<std::string>& names, int arity) {
  std::vector<Term> terms;
  terms.reserve(names.size());
  for (const auto& n : names) terms.push_back(Term::parse(n, arity));
  return custom(std::move(terms));
}

std::optional<Eigen::Index> FeatureLibrary::index_of(const Term& term) const {
  for (std::size_t i = 0; i < terms_.size(); ++i)
    if (terms_[i] == term) return static_cast<Eigen::Index>(i);
  return std::nullopt;
}

std::vector<std::string> FeatureLibrary::names() const {
  std::vector<std::string> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.name());
  return out;
}

}  // namespace gsindy
