#pragma once

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace knudsen {

// Worker count: KNUDSEN_THREADS caps it, otherwise machine parallelism.
int worker_count();

// Runs f(chunk_index, begin, end) over fixed-size chunks of [0, n). Chunk
// boundaries do not depend on the number of workers, so callers that write
// per-chunk (or per-item) results and reduce them in chunk order get
// bit-identical output for any thread count.
template <class F>
void parallel_for_chunks(std::uint64_t n, std::uint64_t chunk_size, F&& f) {
  if (n == 0) return;
  const std::uint64_t n_chunks = (n + chunk_size - 1) / chunk_size;
  const int workers = std::min<std::uint64_t>(worker_count(), n_chunks);
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < n_chunks; ++c)
      f(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    return;
  }
  std::atomic<std::uint64_t> next{0};
  auto run = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      f(c, c * chunk_size, std::min(n, (c + 1) * chunk_size));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 0; i < workers - 1; ++i) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

// Streaming moment accumulator (mean, M2, M3, M4). Merging in fixed chunk
// order reproduces the same floating-point result for any worker count.
struct MomentAccumulator {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;

  void add(double x) {
    const double n1 = static_cast<double>(n);
    ++n;
    const double nn = static_cast<double>(n);
    const double delta = x - mean;
    const double dn = delta / nn;
    const double dn2 = dn * dn;
    const double term1 = delta * dn * n1;
    mean += dn;
    m4 += term1 * dn2 * (nn * nn - 3.0 * nn + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
    m3 += term1 * dn * (nn - 2.0) - 3.0 * dn * m2;
    m2 += term1;
  }

  void merge(const MomentAccumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double nc = na + nb;
    const double delta = o.mean - mean;
    const double d2 = delta * delta;
    const double m2c = m2 + o.m2 + d2 * na * nb / nc;
    const double m3c = m3 + o.m3 + delta * d2 * na * nb * (na - nb) / (nc * nc) +
                       3.0 * delta * (na * o.m2 - nb * m2) / nc;
    const double m4c = m4 + o.m4 +
                       d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (nc * nc * nc) +
                       6.0 * d2 * (na * na * o.m2 + nb * nb * m2) / (nc * nc) +
                       4.0 * delta * (na * o.m3 - nb * m3) / nc;
    mean = (na * mean + nb * o.mean) / nc;
    m2 = m2c;
    m3 = m3c;
    m4 = m4c;
    n += o.n;
  }

  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double fourth_central() const { return n > 0 ? m4 / static_cast<double>(n) : 0.0; }
};

}  // namespace knudsen
