#include "thermonet/dataset.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "thermonet/text_io.hpp"

namespace thermonet {

std::size_t feature_width(int depth) { return 2 * static_cast<std::size_t>(depth) + 6; }

std::vector<std::string> feature_names(int depth) {
  std::vector<std::string> names;
  for (int j = depth; j >= 1; --j) names.push_back("T_r[i-" + std::to_string(j) + "]");
  for (int j = depth + 1; j >= 2; --j) names.push_back("u_phys[i-" + std::to_string(j) + "]");
  names.insert(names.end(), {"T_r[i]", "u_phys[i-1]", "u[i]", "tod_sin", "tod_cos", "T_a[i]"});
  return names;
}

std::array<double, 2> time_of_day_encoding(double hours) {
  const double angle = 2.0 * std::numbers::pi * hours / kHoursPerDay;
  return {std::sin(angle), std::cos(angle)};
}

void write_features(const Sample& s, std::span<double> out) {
  const std::size_t k = s.temp_history.size();
  if (out.size() != 2 * k + 6 || s.power_history.size() != k) {
    throw std::invalid_argument("write_features: width mismatch");
  }
  std::size_t c = 0;
  for (double v : s.temp_history) out[c++] = v;
  for (double v : s.power_history) out[c++] = v;
  out[c++] = s.observed[0];
  out[c++] = s.observed[1];
  out[c++] = s.action;
  for (double v : s.exogenous) out[c++] = v;
}

void Normalizer::apply_features(Eigen::Ref<Eigen::MatrixXd> block) const {
  const auto F = static_cast<Eigen::Index>(feature_count());
  if (block.rows() != F) throw std::invalid_argument("Normalizer: feature width mismatch");
  for (Eigen::Index r = 0; r < F; ++r) {
    block.row(r).array() = (block.row(r).array() - mean[r]) / scale[r];
  }
}

void Normalizer::invert_features(Eigen::Ref<Eigen::MatrixXd> block) const {
  const auto F = static_cast<Eigen::Index>(feature_count());
  if (block.rows() != F) throw std::invalid_argument("Normalizer: feature width mismatch");
  for (Eigen::Index r = 0; r < F; ++r) {
    block.row(r).array() = block.row(r).array() * scale[r] + mean[r];
  }
}

double Normalizer::normalize_target(std::size_t t, double v) const {
  return (v - target_mean(t)) / target_scale(t);
}

double Normalizer::denormalize_target(std::size_t t, double v) const {
  return v * target_scale(t) + target_mean(t);
}

std::string normalizer_to_text(const Normalizer& n) {
  std::string out = "feature,mean,scale\n";
  for (std::size_t i = 0; i < n.names.size(); ++i) {
    out += n.names[i] + "," + format_double(n.mean[i]) + "," + format_double(n.scale[i]) + "\n";
  }
  return out;
}

Normalizer normalizer_from_text(const std::string& text) {
  Normalizer n;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (!header) {
      if (t != "feature,mean,scale") throw std::invalid_argument("normalizer: bad header");
      header = true;
      continue;
    }
    // Feature names contain no commas; mean and scale are the last two fields.
    const auto f = split_fields(t);
    if (f.size() != 3) throw std::invalid_argument("normalizer: expected 3 fields");
    const double scale = parse_double(f[2]);
    if (!(scale > 0.0)) throw std::invalid_argument("normalizer: scale must be > 0");
    n.names.emplace_back(f[0]);
    n.mean.push_back(parse_double(f[1]));
    n.scale.push_back(scale);
  }
  if (n.names.size() < kTargetCount) throw std::invalid_argument("normalizer: too few entries");
  return n;
}

std::vector<std::size_t> Dataset::linked_positions() const {
  std::vector<std::size_t> out;
  out.reserve(samples.size());
  for (std::size_t p = 0; p < pair_links.size(); ++p) {
    if (pair_links[p]) out.push_back(p);
  }
  return out;
}

Eigen::MatrixXd Dataset::feature_matrix(std::span<const std::size_t> positions) const {
  if (!normalizer) throw std::logic_error("Dataset: normalizer not fitted");
  const auto F = static_cast<Eigen::Index>(feature_width(depth));
  Eigen::MatrixXd X(F, static_cast<Eigen::Index>(positions.size()));
  for (std::size_t c = 0; c < positions.size(); ++c) {
    write_features(samples.at(positions[c]),
                   std::span<double>(X.col(static_cast<Eigen::Index>(c)).data(),
                                     static_cast<std::size_t>(F)));
  }
  normalizer->apply_features(X);
  return X;
}

Eigen::MatrixXd Dataset::target_matrix(std::span<const std::size_t> positions) const {
  if (!normalizer) throw std::logic_error("Dataset: normalizer not fitted");
  Eigen::MatrixXd Y(2, static_cast<Eigen::Index>(positions.size()));
  for (std::size_t c = 0; c < positions.size(); ++c) {
    const Sample& s = samples.at(positions[c]);
    const auto col = static_cast<Eigen::Index>(c);
    Y(0, col) = normalizer->normalize_target(0, s.target_T_r_next);
    Y(1, col) = normalizer->normalize_target(1, s.target_u_phys);
  }
  return Y;
}

Dataset build_samples(const Trajectory& traj, int depth, std::size_t begin, std::size_t end) {
  if (depth < 0) throw std::invalid_argument("build_samples: depth must be >= 0");
  end = std::min(end, traj.size());
  if (begin > end) throw std::invalid_argument("build_samples: empty span");
  const auto k = static_cast<std::size_t>(depth);
  const std::size_t length = end - begin;
  if (length < k + 3) {
    throw std::invalid_argument("build_samples: span of " + std::to_string(length) +
                                " rows is too short for depth " + std::to_string(depth) +
                                " (need at least " + std::to_string(k + 3) + ")");
  }

  Dataset ds;
  ds.depth = depth;
  ds.dt_action = traj.dt_action;
  const auto& rows = traj.rows;
  for (std::size_t i = begin + k + 1; i + 1 < end; ++i) {
    Sample s;
    s.index = i;
    s.temp_history.reserve(k);
    s.power_history.reserve(k);
    for (std::size_t j = i - k; j < i; ++j) s.temp_history.push_back(rows[j].T_r);
    for (std::size_t j = i - k - 1; j + 1 < i; ++j) s.power_history.push_back(rows[j].u_phys);
    s.observed = {rows[i].T_r, rows[i - 1].u_phys};
    const auto tod = time_of_day_encoding(rows[i].time_of_day);
    s.exogenous = {tod[0], tod[1], rows[i].T_a};
    s.action = rows[i].u;
    s.target_T_r_next = rows[i + 1].T_r;
    s.target_u_phys = rows[i].u_phys;
    s.target_T_m = rows[i].T_m;
    ds.samples.push_back(std::move(s));
  }
  ds.pair_links.resize(ds.samples.size());
  for (std::size_t p = 1; p < ds.samples.size(); ++p) {
    if (rows[ds.samples[p].index].step == rows[ds.samples[p - 1].index].step + 1) {
      ds.pair_links[p] = p - 1;
    }
  }
  return ds;
}

Normalizer fit_normalizer(const Dataset& train) {
  if (train.empty()) throw std::invalid_argument("fit_normalizer: empty training set");
  const std::size_t F = feature_width(train.depth);
  const std::size_t W = F + kTargetCount;
  const auto N = static_cast<double>(train.size());

  std::vector<double> row(W);
  std::vector<double> sum(W, 0.0);
  for (const auto& s : train.samples) {
    write_features(s, std::span<double>(row.data(), F));
    row[F] = s.target_T_r_next;
    row[F + 1] = s.target_u_phys;
    for (std::size_t c = 0; c < W; ++c) sum[c] += row[c];
  }
  Normalizer n;
  n.names = feature_names(train.depth);
  n.names.insert(n.names.end(), {"target_T_r[i+1]", "target_u_phys[i]"});
  n.mean.resize(W);
  for (std::size_t c = 0; c < W; ++c) n.mean[c] = sum[c] / N;

  std::vector<double> sq(W, 0.0);
  for (const auto& s : train.samples) {
    write_features(s, std::span<double>(row.data(), F));
    row[F] = s.target_T_r_next;
    row[F + 1] = s.target_u_phys;
    for (std::size_t c = 0; c < W; ++c) sq[c] += (row[c] - n.mean[c]) * (row[c] - n.mean[c]);
  }
  n.scale.resize(W);
  for (std::size_t c = 0; c < W; ++c) {
    const double sd = std::sqrt(sq[c] / N);
    n.scale[c] = sd > 1e-12 * std::max(1.0, std::abs(n.mean[c])) ? sd : 1.0;
  }
  return n;
}

DatasetSplit split(const Trajectory& traj, int train_days, int test_days, int depth) {
  if (train_days < 1) throw std::invalid_argument("split: train_days must be >= 1");
  if (test_days < 1) throw std::invalid_argument("split: test_days must be >= 1");
  const std::size_t per_day = traj.steps_per_day();
  const std::size_t need = per_day * static_cast<std::size_t>(train_days + test_days);
  if (need > traj.size()) {
    throw std::invalid_argument("split: " + std::to_string(train_days) + "+" +
                                std::to_string(test_days) + " days need " + std::to_string(need) +
                                " rows, trajectory has " + std::to_string(traj.size()));
  }
  DatasetSplit out;
  out.test_begin = traj.size() - per_day * static_cast<std::size_t>(test_days);
  out.train_begin = out.test_begin - per_day * static_cast<std::size_t>(train_days);
  out.train = build_samples(traj, depth, out.train_begin, out.test_begin);
  out.test = build_samples(traj, depth, out.test_begin, traj.size());
  const Normalizer n = fit_normalizer(out.train);
  out.train.normalizer = n;
  out.test.normalizer = n;
  return out;
}

}  // namespace thermonet
