#include "zrp/profile.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <regex>
#include <sstream>

#include "zrp/errors.hpp"

namespace zrp {

double ProfileComponent::operator()(double u) const {
  const double arg = 2.0 * std::numbers::pi * k * u;
  return a + b * std::cos(arg) + c * std::sin(arg);
}

ProfileComponent ProfileComponent::parse(std::string_view text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  }
  if (s.empty()) throw DomainError("empty profile expression");
  static const std::regex term(
      R"(([+-]?)([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)(?:\*?(cos|sin)\(2\*?(?:pi|π)\*?(?:([0-9]+)\*?)?u\))?)");
  ProfileComponent out;
  bool have_freq = false;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::smatch m;
    const std::string rest = s.substr(pos);
    if (!std::regex_search(rest, m, term, std::regex_constants::match_continuous) ||
        m.length(0) == 0) {
      throw DomainError("cannot parse profile expression '" + std::string(text) + "' at '" +
                        rest + "'");
    }
    if (pos > 0 && m[1].length() == 0) {
      throw DomainError("missing operator in profile expression '" + std::string(text) + "'");
    }
    const double value = (m[1] == "-" ? -1.0 : 1.0) * std::stod(m[2]);
    if (m[3].matched) {
      const int k = m[4].matched ? std::stoi(m[4]) : 1;
      if (have_freq && k != out.k) {
        throw DomainError("profile terms must share one frequency k");
      }
      out.k = k;
      have_freq = true;
      (m[3] == "cos" ? out.b : out.c) += value;
    } else {
      out.a += value;
    }
    pos += static_cast<std::size_t>(m.length(0));
  }
  return out;
}

std::string ProfileComponent::to_string() const {
  std::ostringstream os;
  os.precision(17);
  auto term = [&os](double coefficient) {
    os << (std::signbit(coefficient) ? " - " : " + ") << std::abs(coefficient);
  };
  os << a;
  term(b);
  os << "*cos(2*pi*" << k << "*u)";
  term(c);
  os << "*sin(2*pi*" << k << "*u)";
  return os.str();
}

Profile Profile::constant(Vec2 rho) {
  return Profile(ProfileComponent{rho[0], 0.0, 0.0, 1}, ProfileComponent{rho[1], 0.0, 0.0, 1});
}

double Profile::max_l1(int points) const {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) best = std::max(best, (*this)(double(i) / points).sum());
  return best;
}

double Profile::min_component(int points) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) best = std::min(best, (*this)(double(i) / points).minCoeff());
  return best;
}

namespace {

ProfileComponent component_from_json(const nlohmann::json& j) {
  if (j.is_string()) return ProfileComponent::parse(j.get<std::string>());
  if (j.is_number()) return ProfileComponent{j.get<double>(), 0.0, 0.0, 1};
  if (j.is_object()) {
    ProfileComponent c;
    c.a = j.value("a", 0.0);
    c.b = j.value("b", 0.0);
    c.c = j.value("c", 0.0);
    c.k = j.value("k", 1);
    return c;
  }
  throw DomainError("profile component must be a string, number or {a,b,c,k} object");
}

}  // namespace

Profile Profile::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rho1") || !j.contains("rho2")) {
    throw DomainError("profile needs rho1 and rho2 entries");
  }
  return Profile(component_from_json(j.at("rho1")), component_from_json(j.at("rho2")));
}

nlohmann::json Profile::to_json() const {
  nlohmann::json j;
  const char* names[] = {"rho1", "rho2"};
  for (int i = 0; i < 2; ++i) {
    const auto& c = components_[i];
    j[names[i]] = {{"a", c.a}, {"b", c.b}, {"c", c.c}, {"k", c.k}};
  }
  return j;
}

}  // namespace zrp
