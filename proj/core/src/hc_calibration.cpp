#include "hdmean/rng.hpp"
#include "hdmean/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <tuple>

namespace hdmean {

namespace {

constexpr std::size_t kNullDraws = 20000;
constexpr std::uint64_t kNullSeed = 0x48433243414CULL;

struct CacheKey {
  std::size_t n;
  std::size_t p;
  std::vector<double> grid;
  bool operator<(const CacheKey& o) const { return std::tie(n, p, grid) < std::tie(o.n, o.p, o.grid); }
};

// Under independent normal coordinates sqrt(n) Xbar_j / sd_j is exactly
// Student t with n - 1 degrees of freedom, so the null draw only needs p
// t-variates rather than a full n x p sample.
std::vector<double> simulate_null(std::size_t n, std::size_t p, std::span<const double> grid) {
  std::vector<double> draws(kNullDraws);
  std::vector<double> t(p);
  for (std::size_t r = 0; r < kNullDraws; ++r) {
    RngStream stream(mix64(kNullSeed ^ mix64(n * 1000003ull + p)), r);
    std::student_t_distribution<double> student(static_cast<double>(n - 1));
    for (auto& v : t) v = student(stream);
    draws[r] = hc2_from_tvalues(t, grid);
  }
  std::sort(draws.begin(), draws.end());
  return draws;
}

}  // namespace

std::shared_ptr<const std::vector<double>> hc_null_distribution(std::size_t n, std::size_t p,
                                                                 std::span<const double> s_grid) {
  if (n < 2 || p < 1) {
    throw std::invalid_argument("hc_null_distribution: need n >= 2 and p >= 1");
  }
  // Single writer: the first caller for a key simulates under the lock and
  // later callers read the shared immutable table.
  static std::mutex mutex;
  static std::map<CacheKey, std::shared_ptr<const std::vector<double>>> cache;

  CacheKey key{n, p, std::vector<double>(s_grid.begin(), s_grid.end())};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) {
    return it->second;
  }
  auto table = std::make_shared<const std::vector<double>>(simulate_null(n, p, s_grid));
  cache.emplace(std::move(key), table);
  return table;
}

}  // namespace hdmean
