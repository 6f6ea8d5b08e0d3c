#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace pep {

/// Bit-vector of inclusion indicators over the p candidate covariates.
/// The reference columns (intercept) are implicit and never appear here.
struct ModelId {
  std::uint64_t bits = 0;
  int p = 0;

  bool includes(int j) const { return (bits >> j) & 1ULL; }
  void set(int j, bool on) {
    if (on)
      bits |= (1ULL << j);
    else
      bits &= ~(1ULL << j);
  }
  int dimension() const;  // number of included covariates
  std::string to_string() const;  // "0110..." with index 0 first

  static ModelId none(int p) { return {0, p}; }
  static ModelId full(int p);
  static ModelId from_string(const std::string& s);

  bool operator==(const ModelId&) const = default;
};

struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  bool centred = false;
  std::vector<int> constant_columns;  // flagged at load, columns retained

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
};

struct ModelMatrices {
  Eigen::MatrixXd X0;      // n x k0 reference design (default: intercept)
  Eigen::MatrixXd Xe;      // n x k_e included covariates
  Eigen::MatrixXd Ve_inv;  // Xe^T (I - P0) Xe

  int k0() const { return static_cast<int>(X0.cols()); }
  int ke() const { return static_cast<int>(Xe.cols()); }
};

struct OlsStats {
  Eigen::VectorXd beta_hat;  // coefficients for [X0 | Xe]
  double rss = 0.0;
  double r2 = 0.0;
  double r10 = 1.0;  // (1 - R1^2) / (1 - R0^2)
  int n = 0, k0 = 0, k1 = 0;

  int ke() const { return k1 - k0; }
};

/// Loads a CSV with mandatory header; the named response column becomes y and
/// every other column a covariate. Non-numeric cells are reported with their
/// row and column; constant covariates are flagged but kept.
Dataset load_csv(const std::string& path, const std::string& response);

/// Writes a dataset back out in the same CSV dialect (17 significant digits).
void write_csv(const Dataset& ds, const std::string& path, const std::string& response_name = "y");

/// Subtracts each covariate column's sample mean. Response untouched.
Dataset centre(const Dataset& ds);

/// Builds [X0 | Xe] for a model. X0 defaults to the intercept column; a fixed
/// set of always-included covariate indices may be supplied instead.
ModelMatrices model_matrices(const Dataset& ds, const ModelId& m,
                             const std::vector<int>& reference_cols = {});

/// Least squares through a rank-revealing QR; throws on rank deficiency
/// (singular values below 1e-10 of the largest).
OlsStats ols_stats(const Dataset& ds, const ModelId& m,
                   const std::vector<int>& reference_cols = {});

Eigen::MatrixXd ve_inverse(const Dataset& ds, const ModelId& m,
                           const std::vector<int>& reference_cols = {});

}  // namespace pep
