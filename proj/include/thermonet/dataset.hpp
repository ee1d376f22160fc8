#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "thermonet/simulator.hpp"

namespace thermonet {

/// Supervised tuple for trajectory row i.
///
/// Feature vector layout (width 2k + 6), oldest entries first:
///   [T_r,i-k .. T_r,i-1 | u_phys,i-k-1 .. u_phys,i-2 | T_r,i, u_phys,i-1 | u_i |
///    sin(2 pi t_i/24), cos(2 pi t_i/24), T_a,i]
struct Sample {
  std::size_t index = 0;  ///< trajectory row i
  std::vector<double> temp_history;   ///< T_r,i-k .. T_r,i-1
  std::vector<double> power_history;  ///< u_phys,i-k-1 .. u_phys,i-2
  std::array<double, 2> observed{};   ///< (T_r,i, u_phys,i-1)
  std::array<double, 3> exogenous{};  ///< (sin tod, cos tod, T_a,i)
  double action = 0.0;                ///< demanded u_i
  double target_T_r_next = 0.0;       ///< T_r,i+1
  double target_u_phys = 0.0;         ///< u_phys,i
  std::optional<double> target_T_m;   ///< true T_m,i (simulation only, never trained on)

  double T_r() const { return observed[0]; }
  double T_a() const { return exogenous[2]; }
};

inline constexpr std::size_t kTargetCount = 2;  // T_r,i+1 and u_phys,i

std::size_t feature_width(int depth);
std::vector<std::string> feature_names(int depth);
void write_features(const Sample& s, std::span<double> out);
std::array<double, 2> time_of_day_encoding(double hours);

/// Per-feature affine statistics: features first, then the two targets.
struct Normalizer {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> scale;

  std::size_t feature_count() const { return names.size() - kTargetCount; }
  double target_mean(std::size_t t) const { return mean[feature_count() + t]; }
  double target_scale(std::size_t t) const { return scale[feature_count() + t]; }

  /// Applies to a column-major (feature x batch) block in place.
  void apply_features(Eigen::Ref<Eigen::MatrixXd> block) const;
  void invert_features(Eigen::Ref<Eigen::MatrixXd> block) const;
  double normalize_target(std::size_t t, double v) const;
  double denormalize_target(std::size_t t, double v) const;

  bool operator==(const Normalizer&) const = default;
};

/// Sidecar format: header `feature,mean,scale`, one row per entry.
std::string normalizer_to_text(const Normalizer& n);
Normalizer normalizer_from_text(const std::string& text);

struct Dataset {
  std::vector<Sample> samples;
  int depth = 0;
  double dt_action = kDefaultActionInterval;
  /// pair_links[p] = position of the sample for row index-1, if present.
  std::vector<std::optional<std::size_t>> pair_links;
  std::optional<Normalizer> normalizer;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  /// Positions of samples that have a predecessor link, in order.
  std::vector<std::size_t> linked_positions() const;

  /// Normalized (feature x batch) matrix of the given positions.
  Eigen::MatrixXd feature_matrix(std::span<const std::size_t> positions) const;
  /// Normalized (2 x batch) targets (T_r,i+1, u_phys,i).
  Eigen::MatrixXd target_matrix(std::span<const std::size_t> positions) const;
};

/// Builds one sample per valid row index in [begin, end): windows never read
/// outside that span. Throws std::invalid_argument if the span holds fewer
/// than depth + 3 rows.
Dataset build_samples(const Trajectory& traj, int depth, std::size_t begin = 0,
                      std::size_t end = static_cast<std::size_t>(-1));

/// z-score statistics from the training samples; zero-variance features get
/// scale 1. Throws std::invalid_argument on an empty dataset.
Normalizer fit_normalizer(const Dataset& train);

struct DatasetSplit {
  Dataset train;
  Dataset test;
  std::size_t train_begin = 0;  ///< first trajectory row of the training span
  std::size_t test_begin = 0;   ///< first trajectory row of the test span
};

/// The last test_days of the trajectory form the test span. The training span
/// is the train_days immediately before it. Both datasets carry the
/// normalizer fitted on the training samples.
DatasetSplit split(const Trajectory& traj, int train_days, int test_days, int depth);

}  // namespace thermonet
