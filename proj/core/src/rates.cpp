#include "zrp/rates.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "zrp/errors.hpp"

namespace zrp {

OneSpeciesRate OneSpeciesRate::linear() { return {Kind::linear, 0.0, 1.0, false}; }

OneSpeciesRate OneSpeciesRate::constant() { return {Kind::constant, 0.0, 1.0, true}; }

OneSpeciesRate OneSpeciesRate::evans(double b) {
  if (!(b >= 0.0)) throw DomainError("evans rate needs b >= 0");
  // sup |ĝ(k+1) - ĝ(k)| is attained at k = 0.
  return {Kind::evans, b, 1.0 + b, true};
}

OneSpeciesRate OneSpeciesRate::custom(std::function<double(Count)> fn, double lipschitz,
                                      bool bounded, std::string name) {
  if (!fn) throw DomainError("custom rate needs a callable");
  OneSpeciesRate r{Kind::custom, 0.0, lipschitz, bounded};
  r.custom_ = std::move(fn);
  r.name_ = std::move(name);
  return r;
}

double OneSpeciesRate::operator()(Count k) const {
  if (k == 0) return 0.0;
  switch (kind_) {
    case Kind::linear:
      return static_cast<double>(k);
    case Kind::constant:
      return 1.0;
    case Kind::evans:
      return 1.0 + parameter_ / static_cast<double>(k);
    case Kind::custom:
      return custom_(k);
  }
  return 0.0;
}

std::string OneSpeciesRate::describe() const {
  switch (kind_) {
    case Kind::linear:
      return "linear";
    case Kind::constant:
      return "constant";
    case Kind::evans: {
      std::ostringstream os;
      os << "evans(b=" << parameter_ << ")";
      return os.str();
    }
    case Kind::custom:
      return name_;
  }
  return "unknown";
}

JumpRateSpec::JumpRateSpec(Family family) : family_(std::move(family)) {
  if (auto* sb = std::get_if<SpeciesBlind>(&family_)) {
    lipschitz_ = sb->base.lipschitz_bound();
    bounded_ = sb->base.bounded();
    return;
  }
  const auto& tab = std::get<Tabulated>(family_);
  const Count n = tab.extent;
  auto at = [&](Count a, Count b) -> const RatePair& { return tab.values[a * (n + 1) + b]; };
  double lip = 0.0;
  for (Count a = 0; a <= n; ++a) {
    for (Count b = 0; b <= n; ++b) {
      const RatePair& g = at(a, b);
      if (!(g.g1 >= 0.0) || !(g.g2 >= 0.0) || !std::isfinite(g.g1) || !std::isfinite(g.g2)) {
        throw DomainError("tabulated rate has a negative or non-finite entry");
      }
      if ((g.g1 == 0.0) != (a == 0) || (g.g2 == 0.0) != (b == 0)) {
        throw DomainError("tabulated rate violates g_i(k) = 0 iff k_i = 0 at (" +
                          std::to_string(a) + "," + std::to_string(b) + ")");
      }
      if (a < n) lip = std::max(lip, std::abs(at(a + 1, b).g1 - g.g1));
      if (b < n) lip = std::max(lip, std::abs(at(a, b + 1).g2 - g.g2));
    }
  }
  lipschitz_ = lip;
  bounded_ = true;
}

JumpRateSpec JumpRateSpec::species_blind(OneSpeciesRate base) {
  for (Count k = 1; k <= 64; ++k) {
    if (!(base(k) > 0.0)) throw DomainError("one-species rate must be positive for k >= 1");
  }
  return JumpRateSpec(SpeciesBlind{std::move(base)});
}

JumpRateSpec JumpRateSpec::tabulated(Count extent, std::vector<RatePair> values) {
  if (extent < 1) throw DomainError("tabulated rate needs extent >= 1");
  const std::size_t expected = static_cast<std::size_t>(extent + 1) * (extent + 1);
  if (values.size() != expected) {
    throw DomainError("tabulated rate needs (extent+1)^2 entries");
  }
  return JumpRateSpec(Tabulated{extent, std::move(values)});
}

RatePair JumpRateSpec::operator()(Counts k) const {
  if (auto* sb = std::get_if<SpeciesBlind>(&family_)) {
    const Count n = k.total();
    if (n == 0) return {};
    const double h = sb->base(n) / static_cast<double>(n);
    return {k.k1 * h, k.k2 * h};
  }
  const auto& tab = std::get<Tabulated>(family_);
  if (k.k1 > tab.extent || k.k2 > tab.extent) {
    throw DomainError("occupation (" + std::to_string(k.k1) + "," + std::to_string(k.k2) +
                      ") outside the tabulated box");
  }
  return tab.values[static_cast<std::size_t>(k.k1) * (tab.extent + 1) + k.k2];
}

double JumpRateSpec::rate(int species, Counts k) const { return (*this)(k)[species]; }

std::optional<Count> JumpRateSpec::box_extent() const {
  if (auto* tab = std::get_if<Tabulated>(&family_)) return tab->extent;
  return std::nullopt;
}

const OneSpeciesRate* JumpRateSpec::species_blind_base() const {
  if (auto* sb = std::get_if<SpeciesBlind>(&family_)) return &sb->base;
  return nullptr;
}

const JumpRateSpec::Tabulated* JumpRateSpec::table() const {
  return std::get_if<Tabulated>(&family_);
}

std::function<double(Count)> JumpRateSpec::axis_rate(int species) const {
  return [self = *this, species](Count k) {
    return species == 0 ? self(Counts{k, 0}).g1 : self(Counts{0, k}).g2;
  };
}

std::string JumpRateSpec::describe() const {
  if (auto* sb = std::get_if<SpeciesBlind>(&family_)) {
    return "species_blind(" + sb->base.describe() + ")";
  }
  return "tabulated(extent=" + std::to_string(std::get<Tabulated>(family_).extent) + ")";
}

JumpRateSpec species_blind_rate(OneSpeciesRate base) {
  return JumpRateSpec::species_blind(std::move(base));
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  return cells;
}

}  // namespace

JumpRateSpec load_rate_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("rate table not found: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw IoError("rate table is empty: " + path.string());
  const auto header = split_csv_line(line);
  const std::vector<std::string> want = {"k1", "k2", "g1", "g2"};
  if (header != want) throw IoError("rate table header must be k1,k2,g1,g2");

  std::map<std::pair<Count, Count>, RatePair> entries;
  Count extent = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 4) {
      throw IoError("rate table line " + std::to_string(lineno) + ": expected 4 columns");
    }
    try {
      const auto k1 = static_cast<Count>(std::stoul(cells[0]));
      const auto k2 = static_cast<Count>(std::stoul(cells[1]));
      entries[{k1, k2}] = RatePair{std::stod(cells[2]), std::stod(cells[3])};
      extent = std::max({extent, k1, k2});
    } catch (const std::logic_error&) {
      throw IoError("rate table line " + std::to_string(lineno) + ": malformed number");
    }
  }

  std::vector<RatePair> values;
  values.reserve(static_cast<std::size_t>(extent + 1) * (extent + 1));
  for (Count a = 0; a <= extent; ++a) {
    for (Count b = 0; b <= extent; ++b) {
      auto it = entries.find({a, b});
      if (it == entries.end()) {
        throw IoError("rate table is missing entry (" + std::to_string(a) + "," +
                      std::to_string(b) + ")");
      }
      values.push_back(it->second);
    }
  }
  return JumpRateSpec::tabulated(extent, std::move(values));
}

void write_rate_table(const JumpRateSpec& rate, const std::filesystem::path& path) {
  const auto extent = rate.box_extent();
  if (!extent) throw DomainError("only tabulated rates can be written as tables");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "k1,k2,g1,g2\n";
  for (Count a = 0; a <= *extent; ++a) {
    for (Count b = 0; b <= *extent; ++b) {
      const RatePair g = rate({a, b});
      out << a << ',' << b << ',' << g.g1 << ',' << g.g2 << '\n';
    }
  }
}

CompatibilityReport check_compatibility(const JumpRateSpec& rate, Count box_extent) {
  if (box_extent < 2) throw DomainError("compatibility check needs box_extent >= 2");
  CompatibilityReport report;
  report.holds = true;
  for (Count a = 1; a <= box_extent; ++a) {
    for (Count b = 1; b <= box_extent; ++b) {
      const double lhs = rate({a, b}).g1 * rate({a - 1, b}).g2;
      const double rhs = rate({a, b - 1}).g1 * rate({a, b}).g2;
      const double residual = std::abs(lhs - rhs);
      if (residual > report.worst_violation) {
        report.worst_violation = residual;
        report.worst_at = {a, b};
      }
      if (residual > 1e-9 * std::max(std::abs(lhs), std::abs(rhs))) report.holds = false;
    }
  }
  return report;
}

double lipschitz_ratio(const JumpRateSpec& rate, Count box_extent) {
  double worst = 0.0;
  for (Count a = 0; a <= box_extent; ++a) {
    for (Count b = 0; b <= box_extent; ++b) {
      if (a + b == 0) continue;
      const RatePair g = rate({a, b});
      worst = std::max(worst, (g.g1 + g.g2) / (rate.lipschitz_bound() * (a + b)));
    }
  }
  return worst;
}

namespace {

double checked_log(double factor, Counts at) {
  if (!(factor > 0.0)) {
    throw DomainError("vanishing jump rate along an increasing path at (" +
                      std::to_string(at.k1) + "," + std::to_string(at.k2) + ")");
  }
  return std::log(factor);
}

double log_factorial_e1_first(const JumpRateSpec& rate, Counts k) {
  double acc = 0.0;
  for (Count a = 1; a <= k.k1; ++a) acc += checked_log(rate({a, 0}).g1, {a, 0});
  for (Count b = 1; b <= k.k2; ++b) acc += checked_log(rate({k.k1, b}).g2, {k.k1, b});
  return acc;
}

double log_factorial_e2_first(const JumpRateSpec& rate, Counts k) {
  double acc = 0.0;
  for (Count b = 1; b <= k.k2; ++b) acc += checked_log(rate({0, b}).g2, {0, b});
  for (Count a = 1; a <= k.k1; ++a) acc += checked_log(rate({a, k.k2}).g1, {a, k.k2});
  return acc;
}

}  // namespace

double log_g_factorial(const JumpRateSpec& rate, Counts k) {
  return log_factorial_e1_first(rate, k);
}

double path_independence_probe(const JumpRateSpec& rate, Counts k) {
  if (k.k1 == 0 || k.k2 == 0) return 0.0;
  return std::abs(std::expm1(log_factorial_e1_first(rate, k) - log_factorial_e2_first(rate, k)));
}

LogFactorialTable::LogFactorialTable(const JumpRateSpec& rate, Count shells) : shells_(shells) {
  if (auto extent = rate.box_extent(); extent && shells > *extent) {
    throw DomainError("log-factorial table beyond the tabulated box");
  }
  data_.resize(offset(shells + 1));
  data_[0] = 0.0;
  for (Count n = 1; n <= shells; ++n) {
    const double* prev = shell(n - 1);
    double* cur = data_.data() + offset(n);
    // (k1, n-k1) is reached from (k1, n-1-k1) by an e2 step when k2 >= 1.
    for (Count k1 = 0; k1 < n; ++k1) {
      cur[k1] = prev[k1] + checked_log(rate({k1, n - k1}).g2, {k1, n - k1});
    }
    cur[n] = prev[n - 1] + checked_log(rate({n, 0}).g1, {n, 0});
  }
}

}  // namespace zrp
