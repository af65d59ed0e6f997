#include "roughflow/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "roughflow/errors.hpp"
#include "roughflow/philox.hpp"

namespace roughflow::particles {

void ParticleEnsemble::validate() const {
  const std::int64_t m = count();
  if (positions.size() != static_cast<size_t>(m * d) || frozen.size() != static_cast<size_t>(m) ||
      substream.size() != static_cast<size_t>(m)) {
    throw ParameterGateViolation("ensemble arrays disagree on particle count");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParameterGateViolation("negative particle weight");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw ParameterGateViolation("weights sum to " + std::to_string(total) + ", expected 1");
  }
  for (std::int64_t p = 0; p < m; ++p) {
    for (int k = 0; k < d; ++k) {
      if (!std::isfinite(position(p)[k])) {
        throw ParameterGateViolation("non-finite particle position");
      }
    }
  }
  std::vector<std::uint64_t> ids(substream);
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ParameterGateViolation("duplicate substream index");
  }
}

ParticleEnsemble delta_ensemble(const std::array<double, 3>& x0, int d, std::int64_t count,
                                std::uint64_t seed) {
  if (count < 1) throw ParameterGateViolation("need at least one particle");
  ParticleEnsemble e;
  e.d = d;
  e.seed = seed;
  e.positions.resize(static_cast<size_t>(count * d));
  e.weights.assign(static_cast<size_t>(count), 1.0 / static_cast<double>(count));
  e.substream.resize(static_cast<size_t>(count));
  e.frozen.assign(static_cast<size_t>(count), 0);
  for (std::int64_t p = 0; p < count; ++p) {
    e.substream[static_cast<size_t>(p)] = static_cast<std::uint64_t>(p);
    for (int k = 0; k < d; ++k) e.position(p)[k] = x0[static_cast<size_t>(k)];
  }
  return e;
}

ParticleEnsemble sample_from_density(const fpe::GridFunction& density, std::int64_t count,
                                     std::uint64_t seed) {
  if (count < 1) throw ParameterGateViolation("need at least one particle");
  const fpe::GridSpec& grid = density.grid;
  const std::int64_t cells = grid.cell_count();

  std::vector<double> cdf(static_cast<size_t>(cells));
  double total = 0.0;
  for (std::int64_t c = 0; c < cells; ++c) {
    double v = density.values[static_cast<size_t>(c)];
    if (!(v >= 0.0)) throw ParameterGateViolation("density must be nonnegative");
    total += v;
    cdf[static_cast<size_t>(c)] = total;
  }
  if (!(total > 0.0)) throw ParameterGateViolation("density has zero mass");

  ParticleEnsemble e;
  e.d = grid.d;
  e.seed = seed;
  e.positions.resize(static_cast<size_t>(count * grid.d));
  e.weights.assign(static_cast<size_t>(count), 1.0 / static_cast<double>(count));
  e.substream.resize(static_cast<size_t>(count));
  e.frozen.assign(static_cast<size_t>(count), 0);

  rng::NoiseSource noise(seed);
  for (std::int64_t p = 0; p < count; ++p) {
    e.substream[static_cast<size_t>(p)] = static_cast<std::uint64_t>(p);
    double u = noise.uniform(static_cast<std::uint64_t>(p), 0, 0, rng::StreamClass::init_sampling);
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u * total);
    std::int64_t c = it == cdf.end() ? cells - 1 : static_cast<std::int64_t>(it - cdf.begin());
    int idx[3];
    grid.unflatten(c, idx);
    for (int k = 0; k < grid.d; ++k) {
      double uk = noise.uniform(static_cast<std::uint64_t>(p), 0, static_cast<std::uint32_t>(k + 1),
                                rng::StreamClass::init_sampling);
      double lo = grid.coord(k, idx[k]) - 0.5 * grid.spacing;
      e.position(p)[k] = lo + uk * grid.spacing;
    }
  }
  e.time = density.time;
  return e;
}

void write_ensemble_csv(const ParticleEnsemble& ensemble, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigInvalid("cannot open " + path + " for writing");
  std::fprintf(f, "particle,");
  for (int k = 0; k < ensemble.d; ++k) std::fprintf(f, "x%d,", k);
  std::fprintf(f, "weight,frozen\n");
  for (std::int64_t p = 0; p < ensemble.count(); ++p) {
    std::fprintf(f, "%llu,", static_cast<unsigned long long>(ensemble.substream[static_cast<size_t>(p)]));
    for (int k = 0; k < ensemble.d; ++k) std::fprintf(f, "%.17g,", ensemble.position(p)[k]);
    std::fprintf(f, "%.17g,%d\n", ensemble.weights[static_cast<size_t>(p)],
                 static_cast<int>(ensemble.frozen[static_cast<size_t>(p)]));
  }
  std::fclose(f);
}

void write_paths_csv(const std::vector<PathRecord>& records, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigInvalid("cannot open " + path + " for writing");
  int d = records.empty() ? 0 : records.front().d;
  std::fprintf(f, "particle,t");
  for (int k = 0; k < d; ++k) std::fprintf(f, ",x%d", k);
  std::fprintf(f, "\n");
  for (const PathRecord& r : records) {
    for (size_t i = 0; i < r.times.size(); ++i) {
      std::fprintf(f, "%llu,%.17g", static_cast<unsigned long long>(r.particle), r.times[i]);
      for (int k = 0; k < r.d; ++k) {
        std::fprintf(f, ",%.17g", r.states[i * static_cast<size_t>(r.d) + static_cast<size_t>(k)]);
      }
      std::fprintf(f, "\n");
    }
  }
  std::fclose(f);
}

}  // namespace roughflow::particles
