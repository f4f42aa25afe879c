#include "zrp/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>

#include "zrp/errors.hpp"
#include "zrp/random.hpp"

namespace zrp {

// ---------------------------------------------------------------- configuration

LatticeConfiguration::LatticeConfiguration(Torus t, std::vector<Counts> occupations)
    : torus(t), eta(std::move(occupations)) {
  if (eta.size() != torus.sites()) throw DomainError("configuration has the wrong site count");
  for (const auto& k : eta) {
    totals.k1 += k.k1;
    totals.k2 += k.k2;
  }
}

void LatticeConfiguration::check_totals() const {
  Counts sum;
  for (const auto& k : eta) {
    sum.k1 += k.k1;
    sum.k2 += k.k2;
  }
  if (!(sum == totals)) throw Error("particle totals drifted from the cached values");
}

// ---------------------------------------------------------------- Fenwick tree

FenwickTree::FenwickTree(std::span<const double> values) { assign(values); }

void FenwickTree::assign(std::span<const double> values) {
  tree_.assign(values.size() + 1, 0.0);
  total_ = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    tree_[i + 1] += values[i];
    const std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
    if (parent < tree_.size()) tree_[parent] += tree_[i + 1];
    total_ += values[i];
  }
  top_bit_ = values.empty() ? 0 : std::bit_floor(values.size());
}

void FenwickTree::add(std::size_t index, double delta) {
  total_ += delta;
  for (std::size_t i = index + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
}

std::size_t FenwickTree::find(double target) const {
  std::size_t pos = 0;
  for (std::size_t step = top_bit_; step > 0; step >>= 1) {
    const std::size_t next = pos + step;
    if (next < tree_.size() && tree_[next] <= target) {
      pos = next;
      target -= tree_[next];
    }
  }
  return std::min(pos, tree_.size() - 2);
}

// ---------------------------------------------------------------- KMC

KineticMonteCarlo::KineticMonteCarlo(const JumpRateSpec& rate, LatticeConfiguration config)
    : rate_(&rate), config_(std::move(config)) {
  refresh();
}

double KineticMonteCarlo::site_intensity(Counts k) const {
  if (k.total() == 0) return 0.0;
  const RatePair g = (*rate_)(k);
  return g.g1 + g.g2;
}

void KineticMonteCarlo::refresh() {
  site_rate_.resize(config_.eta.size());
  for (std::size_t x = 0; x < site_rate_.size(); ++x) site_rate_[x] = site_intensity(config_.eta[x]);
  tree_.assign(site_rate_);
}

double KineticMonteCarlo::recomputed_intensity() const {
  double s = 0.0;
  for (const auto& k : config_.eta) s += site_intensity(k);
  return s;
}

double KineticMonteCarlo::step(std::mt19937_64& rng) {
  const double wait = draw_waiting_time(rng);
  jump(rng);
  return wait;
}

double KineticMonteCarlo::draw_waiting_time(std::mt19937_64& rng) const {
  const double total = tree_.total();
  if (!(total > 0.0)) throw FrozenStateError("total jump intensity is zero");
  return -std::log1p(-uniform01(rng)) / total;
}

void KineticMonteCarlo::jump(std::mt19937_64& rng) {
  const double total = tree_.total();
  if (!(total > 0.0)) throw FrozenStateError("total jump intensity is zero");
  std::size_t x = tree_.find(uniform01(rng) * total);
  // Guard against round-off landing on an empty site.
  while (site_rate_[x] == 0.0) x = (x + 1) % site_rate_.size();

  Counts& here = config_.eta[x];
  const RatePair g = (*rate_)(here);
  const int species = uniform01(rng) * (g.g1 + g.g2) < g.g1 ? 0 : 1;
  const Torus& torus = config_.torus;
  const auto choice = uniform_index(rng, 2 * static_cast<std::uint64_t>(torus.dimension()));
  const std::size_t y =
      torus.neighbour(x, static_cast<int>(choice / 2), static_cast<int>(choice % 2));
  ++events_;
  if (y != x) {
    Counts& there = config_.eta[y];
    if (species == 0) {
      --here.k1;
      ++there.k1;
    } else {
      --here.k2;
      ++there.k2;
    }
    for (std::size_t s : {x, y}) {
      const double r = site_intensity(config_.eta[s]);
      tree_.add(s, r - site_rate_[s]);
      site_rate_[s] = r;
    }
  }
  if (events_ % kRefreshInterval == 0) {
    config_.check_totals();
    refresh();
  }
}

// ---------------------------------------------------------------- run

TrajectoryRecord run_replica(const JumpRateSpec& rate, const InitialSampler& sampler,
                             const RunOptions& options, std::uint64_t replica) {
  const Torus torus(options.side, options.dimension);
  const double scale = static_cast<double>(options.side) * options.side;
  TrajectoryRecord rec;
  rec.seed = options.seed;
  rec.replica = replica;
  rec.side = options.side;
  rec.dimension = options.dimension;

  KineticMonteCarlo kmc(rate, LatticeConfiguration(torus, sampler(options.seed, replica)));
  rec.totals = kmc.configuration().totals;
  auto rng = make_stream(options.seed, replica, kDynamicsStream);

  // When the next event would overshoot a target the drawn time is discarded
  // and the clock set to the target; exact by memorylessness.
  double now = 0.0;
  for (double t : options.snapshot_times) {
    const double target = t * scale;
    while (!rec.frozen && now < target) {
      if (!(kmc.total_intensity() > 0.0)) {
        rec.frozen = true;
        break;
      }
      const double wait = kmc.draw_waiting_time(rng);
      if (now + wait > target) {
        now = target;
        break;
      }
      now += wait;
      kmc.jump(rng);
    }
    rec.snapshots.push_back(Snapshot{t, target, kmc.configuration().eta});
  }
  rec.events = kmc.events();
  return rec;
}

std::vector<TrajectoryRecord> run(const JumpRateSpec& rate, const InitialSampler& sampler,
                                  const RunOptions& options) {
  for (std::size_t i = 0; i < options.snapshot_times.size(); ++i) {
    const double t = options.snapshot_times[i];
    if (!(t >= 0.0) || !std::isfinite(t) || (i > 0 && !(t > options.snapshot_times[i - 1]))) {
      throw DomainError("snapshot times must be finite, non-negative and strictly increasing");
    }
  }
  std::vector<TrajectoryRecord> out(options.replicas);
  const unsigned threads =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.replicas)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t r; (r = next++) < options.replicas;) {
      try {
        out[r] = run_replica(rate, sampler, options, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

// ---------------------------------------------------------------- block averages

Vec2 block_average(const Torus& torus, std::span<const Counts> eta, Count ell, std::size_t x) {
  if (2 * static_cast<std::uint64_t>(ell) + 1 > torus.side()) {
    throw DomainError("block window 2l+1 exceeds the lattice side");
  }
  // Walk the (2ℓ+1)^d box by repeated neighbour moves.
  std::vector<std::size_t> box{x};
  for (int axis = 0; axis < torus.dimension(); ++axis) {
    std::vector<std::size_t> grown;
    for (std::size_t s : box) {
      grown.push_back(s);
      std::size_t up = s, down = s;
      for (Count i = 0; i < ell; ++i) {
        up = torus.neighbour(up, axis, 0);
        down = torus.neighbour(down, axis, 1);
        grown.push_back(up);
        grown.push_back(down);
      }
    }
    box.swap(grown);
  }
  Vec2 sum = Vec2::Zero();
  for (std::size_t s : box) sum += Vec2(eta[s].k1, eta[s].k2);
  return sum / static_cast<double>(box.size());
}

std::vector<Vec2> empirical_density_field(const Torus& torus, std::span<const Counts> eta,
                                          Count ell) {
  if (2 * static_cast<std::uint64_t>(ell) + 1 > torus.side()) {
    throw DomainError("block window 2l+1 exceeds the lattice side");
  }
  std::vector<Vec2> field(eta.size());
  for (std::size_t x = 0; x < eta.size(); ++x) field[x] = Vec2(eta[x].k1, eta[x].k2);
  // Separable cyclic window sums, one axis at a time.
  const std::size_t n = torus.side();
  std::size_t stride = 1;
  std::vector<Vec2> line(n), summed(n);
  for (int axis = 0; axis < torus.dimension(); ++axis) {
    const std::size_t block = stride * n;
    for (std::size_t base = 0; base < field.size(); ++base) {
      if ((base / stride) % n != 0) continue;  // first site of each line along `axis`
      for (std::size_t i = 0; i < n; ++i) line[i] = field[base + i * stride];
      Vec2 acc = Vec2::Zero();
      for (std::int64_t o = -static_cast<std::int64_t>(ell); o <= static_cast<std::int64_t>(ell); ++o) {
        acc += line[static_cast<std::size_t>((o % static_cast<std::int64_t>(n) + n) % n)];
      }
      for (std::size_t i = 0; i < n; ++i) {
        summed[i] = acc;
        acc += line[(i + ell + 1) % n] - line[(i + n - ell) % n];
      }
      for (std::size_t i = 0; i < n; ++i) field[base + i * stride] = summed[i];
    }
    stride = block;
  }
  const double volume = std::pow(2.0 * ell + 1.0, torus.dimension());
  for (auto& v : field) v /= volume;
  return field;
}

DistributionTable empirical_distribution(std::shared_ptr<const StateSpace> space,
                                         std::span<const TrajectoryRecord> records,
                                         std::size_t index) {
  DistributionTable t;
  t.space = std::move(space);
  t.probabilities.assign(t.space->size(), 0.0);
  if (records.empty()) throw DomainError("no trajectory records");
  for (const auto& rec : records) {
    t.probabilities[t.space->encode(rec.snapshots.at(index).eta)] += 1.0;
  }
  for (double& p : t.probabilities) p /= static_cast<double>(records.size());
  return t;
}

// ---------------------------------------------------------------- output

void write_snapshots_csv(const TrajectoryRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  out << "t_macro,x,eta1,eta2\n";
  for (const auto& snap : record.snapshots) {
    for (std::size_t x = 0; x < snap.eta.size(); ++x) {
      out << snap.t_macro << ',' << x << ',' << snap.eta[x].k1 << ',' << snap.eta[x].k2 << '\n';
    }
  }
}

void write_field_csv(double t_macro, Count ell, std::span<const Vec2> field,
                     const std::filesystem::path& path, bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.precision(17);
  if (!append) out << "t_macro,x,ell,rho1,rho2\n";
  for (std::size_t x = 0; x < field.size(); ++x) {
    out << t_macro << ',' << x << ',' << ell << ',' << field[x][0] << ',' << field[x][1] << '\n';
  }
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw IoError("truncated binary snapshot file");
  }
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{bytes[i]} << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

void write_snapshots_binary(const TrajectoryRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  put<std::uint32_t>(out, static_cast<std::uint32_t>(record.dimension));
  put<std::uint32_t>(out, record.side);
  put<std::uint32_t>(out, record.totals.k1);
  put<std::uint32_t>(out, record.totals.k2);
  put<std::uint64_t>(out, record.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(record.snapshots.size()));
  for (const auto& snap : record.snapshots) {
    put<double>(out, snap.t_macro);
    for (const auto& k : snap.eta) {
      put<std::uint32_t>(out, k.k1);
      put<std::uint32_t>(out, k.k2);
    }
  }
}

TrajectoryRecord read_snapshots_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("snapshot file not found: " + path.string());
  TrajectoryRecord rec;
  rec.dimension = static_cast<int>(get<std::uint32_t>(in));
  rec.side = get<std::uint32_t>(in);
  rec.totals.k1 = get<std::uint32_t>(in);
  rec.totals.k2 = get<std::uint32_t>(in);
  rec.seed = get<std::uint64_t>(in);
  const auto count = get<std::uint32_t>(in);
  const Torus torus(rec.side, rec.dimension);
  const double scale = static_cast<double>(rec.side) * rec.side;
  for (std::uint32_t s = 0; s < count; ++s) {
    Snapshot snap;
    snap.t_macro = get<double>(in);
    snap.t_micro = snap.t_macro * scale;
    snap.eta.resize(torus.sites());
    for (auto& k : snap.eta) {
      k.k1 = get<std::uint32_t>(in);
      k.k2 = get<std::uint32_t>(in);
    }
    rec.snapshots.push_back(std::move(snap));
  }
  return rec;
}

}  // namespace zrp
