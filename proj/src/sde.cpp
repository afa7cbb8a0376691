#include "knudsen/sde.hpp"

#include <algorithm>
#include <cmath>

#include "knudsen/errors.hpp"
#include "knudsen/parallel.hpp"

namespace knudsen {

std::vector<std::vector<double>> sde_ensemble(const DiffusionSpec& spec,
                                              const std::vector<double>& t_grid, int n_paths,
                                              std::uint64_t master_seed, double dt) {
  if (n_paths < 100) throw InsufficientSamples("sde_ensemble: need at least 100 paths");
  if (t_grid.empty()) throw OutOfRange("sde_ensemble: empty time grid");

  // grid times snapped to step indices
  std::vector<std::uint64_t> rec;
  rec.reserve(t_grid.size());
  for (double t : t_grid) rec.push_back(static_cast<std::uint64_t>(std::llround(t / dt)));
  const std::uint64_t m = *std::max_element(rec.begin(), rec.end());

  std::vector<std::vector<double>> marginals(t_grid.size(), std::vector<double>(n_paths, 0.0));
  parallel_for_chunks(n_paths, 16, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t p = begin; p < end; ++p) {
      SplitMix64 rng = SplitMix64::stream(master_seed, p);
      const double sdt = std::sqrt(dt);
      double x = spec.x0;
      for (std::uint64_t step = 0;; ++step) {
        for (std::size_t gi = 0; gi < rec.size(); ++gi)
          if (rec[gi] == step) marginals[gi][p] = x;
        if (step == m) break;
        x += spec.h_prime(x) * dt + std::sqrt(spec.h(x)) * sdt * rng.normal();
      }
    }
  });
  return marginals;
}

}  // namespace knudsen
