#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"

namespace crda {

enum Organ : uint8_t {
  kLeftEye = 0,
  kRightEye = 1,
  kNose = 2,
  kMouth = 3,
};

constexpr int kOrganCount = 4;
constexpr int kRegionPoolSize = 15;  // all nonempty subsets of 4 organs

inline const char* organ_name(Organ o) {
  switch (o) {
    case kLeftEye: return "left_eye";
    case kRightEye: return "right_eye";
    case kNose: return "nose";
    case kMouth: return "mouth";
  }
  return "?";
}

// Nonempty organ subset with its summed area fraction.
struct Region {
  uint8_t organ_mask = 0;  // bit o set => organ o included
  double area = 0.0;

  bool contains(Organ o) const { return (organ_mask >> o) & 1; }
  int organ_count() const;
};

struct RegionPool {
  std::array<Region, kRegionPoolSize> regions{};  // masks 1..15 in order
};

// The three curriculum courses share one config; region decay defaults to
// 2/total_epochs when region_decay <= 0.
struct CurriculumConfig {
  int total_epochs = 30;
  double beta_max = 0.02;
  double steepness = 5.0;
  double peak_phase = 0.3;
  double area_full = 1.0;
  double area_min = 0.3;
  double region_decay = 0.0;  // 0 => 2/total_epochs
  double region_sigma = 0.1;
  bool monotone_data_course = false;
  std::array<double, kOrganCount> organ_areas{0.2, 0.2, 0.25, 0.35};

  double effective_region_decay() const {
    return region_decay > 0.0 ? region_decay : 2.0 / total_epochs;
  }
  void validate() const;  // throws ConfigError on violated invariants
};

// Sine data course q(t). Fractional t is accepted for dump/plot use;
// t outside [0, total_epochs] throws.
double data_proportion(double t, const CurriculumConfig& cfg);

// Exploration coefficient beta(t); exactly 0 at t = 0.
double exploration_coef(double t, const CurriculumConfig& cfg);

// Forgery-area target A(t), exponential decay toward area_min.
double target_area_raw(double t, const CurriculumConfig& cfg);
double target_area(double t, const CurriculumConfig& cfg);  // clamped to [0, 1]

// All 15 nonempty organ subsets with summed areas. organ_areas must be
// positive and sum to area_full within 1e-9.
RegionPool build_region_pool(const std::array<double, kOrganCount>& organ_areas,
                             double area_full);

// Gaussian-kernel sampling over the pool: p_i proportional to
// exp(-(A_i - target)^2 / (2 sigma^2)).
std::vector<double> region_weights(const RegionPool& pool, double target_area,
                                   double sigma);
const Region& sample_region(const RegionPool& pool, double target_area,
                            double sigma, Rng& rng);

// CSV dump "t,q,beta,area_raw,area_clamped", one row per epoch t = 0..tau.
std::string schedules_csv(const CurriculumConfig& cfg);

}  // namespace crda
