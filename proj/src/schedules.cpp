#include "schedules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "errors.hpp"

namespace crda {
namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_epoch_range(double t, const CurriculumConfig& cfg, const char* what) {
  if (!(t >= 0.0 && t <= static_cast<double>(cfg.total_epochs)))
    throw ConfigError(std::string(what) + ": epoch index out of [0, total_epochs]");
}

}  // namespace

int Region::organ_count() const {
  int n = 0;
  for (int o = 0; o < kOrganCount; ++o) n += (organ_mask >> o) & 1;
  return n;
}

void CurriculumConfig::validate() const {
  if (total_epochs < 1) throw ConfigError("curriculum.total_epochs must be >= 1");
  if (beta_max < 0.0) throw ConfigError("curriculum.beta_max must be >= 0");
  if (!(peak_phase > 0.0 && peak_phase < 1.0))
    throw ConfigError("curriculum.peak_phase must lie in (0, 1)");
  if (!(area_min < area_full))
    throw ConfigError("curriculum.area_min must be < curriculum.area_full");
  if (!(region_sigma > 0.0)) throw ConfigError("curriculum.region_sigma must be > 0");
  double sum = 0.0;
  for (double a : organ_areas) {
    if (!(a > 0.0)) throw ConfigError("curriculum.organ areas must be positive");
    sum += a;
  }
  if (std::abs(sum - area_full) > 1e-9)
    throw ConfigError("curriculum.organ areas must sum to area_full");
}

double data_proportion(double t, const CurriculumConfig& cfg) {
  check_epoch_range(t, cfg, "data_proportion");
  const double tau = static_cast<double>(cfg.total_epochs);
  if (cfg.monotone_data_course) t = std::min(t, tau / 2.0);
  const double s = std::sin(kPi * (t - tau / 4.0) / (tau / 2.0));
  return 0.5 + 0.5 * std::max(std::min(s, 1.0), -1.0);
}

double exploration_coef(double t, const CurriculumConfig& cfg) {
  check_epoch_range(t, cfg, "exploration_coef");
  const double tau = static_cast<double>(cfg.total_epochs);
  const double k = cfg.steepness;
  const double mu = cfg.peak_phase;
  return cfg.beta_max * (logistic(k * (t / tau - mu)) - logistic(-k * mu));
}

double target_area_raw(double t, const CurriculumConfig& cfg) {
  check_epoch_range(t, cfg, "target_area");
  return cfg.area_full * std::exp(-cfg.effective_region_decay() * t) + cfg.area_min;
}

double target_area(double t, const CurriculumConfig& cfg) {
  return std::clamp(target_area_raw(t, cfg), 0.0, 1.0);
}

RegionPool build_region_pool(const std::array<double, kOrganCount>& organ_areas,
                             double area_full) {
  double sum = 0.0;
  for (double a : organ_areas) {
    if (!(a > 0.0)) throw ConfigError("region pool: organ areas must be positive");
    sum += a;
  }
  if (std::abs(sum - area_full) > 1e-9)
    throw ConfigError("region pool: organ areas must sum to area_full");

  RegionPool pool;
  for (uint8_t mask = 1; mask <= kRegionPoolSize; ++mask) {
    Region r;
    r.organ_mask = mask;
    for (int o = 0; o < kOrganCount; ++o)
      if ((mask >> o) & 1) r.area += organ_areas[o];
    pool.regions[mask - 1] = r;
  }
  return pool;
}

std::vector<double> region_weights(const RegionPool& pool, double target_area,
                                   double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("region sampling: sigma must be > 0");
  std::vector<double> w(kRegionPoolSize);
  for (int i = 0; i < kRegionPoolSize; ++i) {
    const double d = pool.regions[i].area - target_area;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
  }
  return w;
}

const Region& sample_region(const RegionPool& pool, double target_area,
                            double sigma, Rng& rng) {
  const std::vector<double> w = region_weights(pool, target_area, sigma);
  return pool.regions[rng.categorical(w)];
}

std::string schedules_csv(const CurriculumConfig& cfg) {
  cfg.validate();
  std::string out = "t,q,beta,area_raw,area_clamped\n";
  char line[160];
  for (int t = 0; t <= cfg.total_epochs; ++t) {
    std::snprintf(line, sizeof(line), "%d,%.9f,%.9f,%.9f,%.9f\n", t,
                  data_proportion(t, cfg), exploration_coef(t, cfg),
                  target_area_raw(t, cfg), target_area(t, cfg));
    out += line;
  }
  return out;
}

}  // namespace crda
