#pragma once

// Frechet distance between Gaussian summaries of two feature sets,
//   FD = |mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}),
// with the square-root trace taken through the symmetric similarity
// S_a^{1/2} S_b S_a^{1/2}.

#include "occlumix/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace occlumix {

struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov; // unbiased (divisor count - 1)
  std::size_t count = 0;

  Eigen::Index dim() const { return mean.size(); }

  /// Symmetric to 1e-9 (relative to the largest entry), PSD up to a -1e-8
  /// eigenvalue tolerance, at least two samples.
  void validate() const {
    detail::require(count >= 2, "feature statistics need at least 2 samples");
    detail::require(cov.rows() == mean.size() && cov.cols() == mean.size(),
                    "covariance shape does not match the mean");
    if (mean.size() == 0)
      return;
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    detail::require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * scale, "covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericalError("eigen-decomposition of covariance did not converge");
    detail::require(es.eigenvalues().minCoeff() >= -1e-8 * scale, "covariance is not positive semidefinite");
  }
};

/// Streaming mean / covariance (Welford). Partial accumulators from
/// separate shards combine exactly with merge().
class StatsAccumulator {
public:
  StatsAccumulator() = default;
  explicit StatsAccumulator(Eigen::Index dim) : mean_(Eigen::VectorXd::Zero(dim)), m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

  void add(std::span<const double> v) {
    if (count_ == 0 && mean_.size() == 0) {
      mean_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(v.size()));
      m2_ = Eigen::MatrixXd::Zero(mean_.size(), mean_.size());
    }
    if (static_cast<Eigen::Index>(v.size()) != mean_.size())
      throw InputError("feature vector has dimension " + std::to_string(v.size()) + ", expected " +
                       std::to_string(mean_.size()));
    const Eigen::Map<const Eigen::VectorXd> x(v.data(), mean_.size());
    ++count_;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_.noalias() += delta * (x - mean_).transpose();
  }

  /// Pooled merge (Chan et al.).
  void merge(const StatsAccumulator &other) {
    if (other.count_ == 0)
      return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    if (other.mean_.size() != mean_.size())
      throw InputError("cannot merge statistics of different dimension");
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const Eigen::VectorXd delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    m2_ += other.m2_ + delta * delta.transpose() * (na * nb / n);
    count_ += other.count_;
  }

  std::size_t count() const noexcept { return count_; }

  FeatureStats stats() const {
    if (count_ < 2)
      throw InputError("feature statistics need at least 2 vectors, got " + std::to_string(count_));
    Eigen::MatrixXd cov = m2_ / static_cast<double>(count_ - 1);
    cov = 0.5 * (cov + cov.transpose()).eval();
    return {mean_, cov, count_};
  }

private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
  std::size_t count_ = 0;
};

inline FeatureStats accumulate_stats(std::span<const std::vector<double>> features) {
  if (features.size() < 2)
    throw InputError("feature statistics need at least 2 vectors, got " + std::to_string(features.size()));
  StatsAccumulator acc;
  for (const auto &f : features)
    acc.add(f);
  return acc.stats();
}

namespace detail {

inline Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eigen(const Eigen::MatrixXd &m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw NumericalError("symmetric eigen-solver did not converge");
  return es;
}

/// Eigenvalues below 1e-8 * max eigenvalue are treated as zero.
inline Eigen::VectorXd clamp_spectrum(Eigen::VectorXd ev) {
  const double top = ev.size() ? std::max(0.0, ev.maxCoeff()) : 0.0;
  const double tol = 1e-8 * top;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] < tol)
      ev[i] = 0.0;
  return ev;
}

} // namespace detail

inline double frechet_distance(const FeatureStats &a, const FeatureStats &b) {
  if (a.dim() != b.dim())
    throw InputError("frechet_distance: dimensions differ (" + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()) + ")");
  a.validate();
  b.validate();

  const auto es_a = detail::sym_eigen(a.cov);
  const Eigen::VectorXd sqrt_ev = detail::clamp_spectrum(es_a.eigenvalues()).cwiseSqrt();
  const Eigen::MatrixXd sqrt_a = es_a.eigenvectors() * sqrt_ev.asDiagonal() * es_a.eigenvectors().transpose();
  Eigen::MatrixXd inner = sqrt_a * b.cov * sqrt_a;
  inner = 0.5 * (inner + inner.transpose()).eval();
  const Eigen::VectorXd inner_ev = detail::clamp_spectrum(detail::sym_eigen(inner).eigenvalues());
  const double tr_sqrt = inner_ev.cwiseSqrt().sum();

  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double fd = mean_term + a.cov.trace() + b.cov.trace() - 2.0 * tr_sqrt;
  return std::max(fd, 0.0);
}

enum class RowStatus { ok, absent, insufficient, error };

inline const char *to_string(RowStatus s) {
  switch (s) {
  case RowStatus::ok:
    return "ok";
  case RowStatus::absent:
    return "absent";
  case RowStatus::insufficient:
    return "insufficient";
  case RowStatus::error:
    return "error";
  }
  return "error";
}

struct RegionRow {
  RowStatus status = RowStatus::absent;
  std::optional<double> fid;
  std::size_t generated_samples = 0;
  std::size_t real_samples = 0;
  std::string detail;
};

/// One FID per region set plus the whole-image FID. Rows that could not be
/// scored carry a status instead of a value.
struct RegionReport {
  std::map<std::string, RegionRow> rows;
  RegionRow overall;
};

/// Feature vectors collected for one row on both sides.
struct RowSamples {
  std::vector<std::vector<double>> generated;
  std::vector<std::vector<double>> real;
  std::optional<std::string> error; // e.g. a missing feature file
};

inline RegionRow score_row(const RowSamples &s) {
  RegionRow row;
  row.generated_samples = s.generated.size();
  row.real_samples = s.real.size();
  if (s.error) {
    row.status = RowStatus::error;
    row.detail = *s.error;
  } else if (s.generated.empty() && s.real.empty()) {
    row.status = RowStatus::absent;
    row.detail = "region does not occur in any image";
  } else if (s.generated.size() < 2 || s.real.size() < 2) {
    row.status = RowStatus::insufficient;
    row.detail = "fewer than 2 samples on one side";
  } else {
    try {
      row.fid = frechet_distance(accumulate_stats(s.generated), accumulate_stats(s.real));
      row.status = RowStatus::ok;
    } catch (const InputError &e) {
      row.status = RowStatus::error;
      row.detail = e.what();
    }
  }
  return row;
}

inline RegionReport score_regions(const std::map<std::string, RowSamples> &rows, const RowSamples &overall) {
  RegionReport report;
  for (const auto &[name, samples] : rows)
    report.rows[name] = score_row(samples);
  report.overall = score_row(overall);
  return report;
}

} // namespace occlumix
