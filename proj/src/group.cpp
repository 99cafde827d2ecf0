#include "sandpile/group.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sandpile/error.hpp"
#include "sandpile/io.hpp"
#include "sandpile/relax.hpp"

namespace sandpile {

Configuration group_add(const Configuration& a, const Configuration& b) {
  require_same_domain(a.domain(), b.domain(), "group_add");
  if (!b.is_non_negative()) throw Error("group_add: second operand has negative counts");
  return relax(a + b).stable;
}

bool is_recurrent(const Configuration& c) {
  if (!c.is_stable() || !c.is_non_negative()) throw Error("is_recurrent needs a stable configuration");
  const Domain& d = c.domain();
  const std::size_t n = d.size();
  std::vector<int> unburnt(n);
  std::vector<std::uint8_t> burnt(n, 0);
  std::vector<VertexId> work;
  for (std::size_t v = 0; v < n; ++v) {
    unburnt[v] = d.degree(static_cast<VertexId>(v));
    if (c[static_cast<VertexId>(v)] >= unburnt[v]) {
      burnt[v] = 1;
      work.push_back(static_cast<VertexId>(v));
    }
  }
  std::size_t fired = work.size();
  while (!work.empty()) {
    VertexId v = work.back();
    work.pop_back();
    for (VertexId u : d.neighbors(v)) {
      if (u == kNoVertex) continue;
      auto su = static_cast<std::size_t>(u);
      --unburnt[su];
      if (!burnt[su] && c[u] >= unburnt[su]) {
        burnt[su] = 1;
        ++fired;
        work.push_back(u);
      }
    }
  }
  return fired == n;
}

const Configuration& require_recurrent(const Configuration& c, const char* what) {
  if (!c.is_stable() || !c.is_non_negative() || !is_recurrent(c))
    throw Error(std::string(what) + ": configuration is not recurrent");
  return c;
}

Configuration identity(DomainPtr domain, std::uint64_t max_rounds) {
  const std::vector<std::int64_t> drops = boundary_deficit(*domain);
  Relaxer r(domain);
  r.load(Configuration(domain));
  std::vector<std::int64_t> previous(domain->size(), 0);
  for (std::uint64_t round = 0; round < max_rounds; ++round) {
    r.add(drops);
    r.stabilize();
    auto current = r.counts();
    if (std::equal(current.begin(), current.end(), previous.begin())) return r.snapshot();
    previous.assign(current.begin(), current.end());
  }
  throw BudgetError("identity: no fixed point after " + std::to_string(max_rounds) + " rounds on " + domain->name() +
                    " (" + std::to_string(domain->size()) + " vertices)");
}

Configuration cached_identity(DomainPtr domain, const std::string& cache_dir) {
  std::string dir = cache_dir;
  if (dir.empty())
    if (const char* env = std::getenv("SANDPILE_CACHE_DIR")) dir = env;
  if (dir.empty()) return identity(domain);

  char key[32];
  std::snprintf(key, sizeof key, "%016llx", static_cast<unsigned long long>(domain->hash()));
  std::filesystem::path file = std::filesystem::path(dir) / ("identity-" + std::string(key) + ".spile");
  if (std::filesystem::exists(file)) {
    try {
      Configuration c = read_spile(file.string(), domain);
      if (c.is_stable() && c.is_non_negative() && is_recurrent(c)) return c;
    } catch (const Error&) {
      // stale or foreign file: recompute below
    }
  }
  Configuration id = identity(domain);
  std::filesystem::create_directories(dir);
  std::filesystem::path tmp = file;
  tmp += ".tmp";
  write_spile(tmp.string(), id);
  std::filesystem::rename(tmp, file);
  return id;
}

BigInt group_order(const Domain& domain, std::size_t max_vertices) {
  const std::size_t n = domain.size();
  if (n > max_vertices)
    throw Error("group_order: domain has " + std::to_string(n) + " vertices, bound is " +
                std::to_string(max_vertices));
  std::vector<std::vector<BigInt>> m(n, std::vector<BigInt>(n, 0));
  for (std::size_t v = 0; v < n; ++v) {
    m[v][v] = 4;
    for (VertexId u : domain.neighbors(static_cast<VertexId>(v)))
      if (u != kNoVertex) m[v][static_cast<std::size_t>(u)] = -1;
  }
  // Bareiss: every division is exact. The matrix is symmetric positive
  // definite, so pivots never vanish and no row swaps are needed.
  BigInt prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
      m[i][k] = 0;
    }
    prev = m[k][k];
  }
  return m[n - 1][n - 1];
}

void for_each_stable(DomainPtr domain, const std::function<void(const Configuration&)>& visit) {
  const std::size_t n = domain->size();
  if (n > 12) throw Error("for_each_stable: domain too large for enumeration");
  Configuration c(domain);
  while (true) {
    visit(c);
    std::size_t k = 0;
    while (k < n && c[static_cast<VertexId>(k)] == 3) c[static_cast<VertexId>(k++)] = 0;
    if (k == n) break;
    ++c[static_cast<VertexId>(k)];
  }
}

std::vector<Configuration> recurrent_configurations(DomainPtr domain) {
  std::vector<Configuration> out;
  for_each_stable(domain, [&](const Configuration& c) {
    if (is_recurrent(c)) out.push_back(c);
  });
  return out;
}

bool has_adjacent_zeros(const Configuration& c) {
  const Domain& d = c.domain();
  for (std::size_t v = 0; v < d.size(); ++v) {
    if (c[static_cast<VertexId>(v)] != 0) continue;
    for (VertexId u : d.neighbors(static_cast<VertexId>(v)))
      if (u != kNoVertex && c[u] == 0) return true;
  }
  return false;
}

}  // namespace sandpile
