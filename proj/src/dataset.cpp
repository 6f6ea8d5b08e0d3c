#include "pep/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pep {

namespace {

constexpr double kRankTol = 1e-10;

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, int row, const std::string& col) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw std::runtime_error("load_csv: non-numeric cell at row " + std::to_string(row) +
                             ", column '" + col + "'");
  }
  return v;
}

}  // namespace

int ModelId::dimension() const {
  int d = 0;
  for (int j = 0; j < p; ++j)
    if (includes(j)) ++d;
  return d;
}

std::string ModelId::to_string() const {
  std::string s(p, '0');
  for (int j = 0; j < p; ++j)
    if (includes(j)) s[j] = '1';
  return s;
}

ModelId ModelId::full(int p) {
  ModelId m{0, p};
  for (int j = 0; j < p; ++j) m.set(j, true);
  return m;
}

ModelId ModelId::from_string(const std::string& s) {
  ModelId m{0, static_cast<int>(s.size())};
  for (int j = 0; j < m.p; ++j) {
    if (s[j] == '1')
      m.set(j, true);
    else if (s[j] != '0')
      throw std::invalid_argument("ModelId: expected a string of 0s and 1s");
  }
  return m;
}

Dataset load_csv(const std::string& path, const std::string& response) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_csv: empty file '" + path + "'");
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
  const std::vector<std::string> header = split_row(line);
  int resp_col = -1;
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == response) resp_col = static_cast<int>(i);
  if (resp_col < 0)
    throw std::runtime_error("load_csv: response column '" + response + "' not found");
  if (header.size() < 2) throw std::runtime_error("load_csv: need at least one covariate column");

  std::vector<std::vector<double>> rows;
  int file_row = 1;
  while (std::getline(in, line)) {
    ++file_row;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_row(line);
    if (cells.size() != header.size())
      throw std::runtime_error("load_csv: row " + std::to_string(file_row) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    std::vector<double> vals(cells.size());
    for (size_t i = 0; i < cells.size(); ++i) vals[i] = parse_cell(cells[i], file_row, header[i]);
    rows.push_back(std::move(vals));
  }
  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(header.size()) - 1;
  if (n < 2) throw std::runtime_error("load_csv: need at least 2 observations");

  Dataset ds;
  ds.y.resize(n);
  ds.X.resize(n, p);
  for (size_t i = 0; i < header.size(); ++i)
    if (static_cast<int>(i) != resp_col) ds.names.push_back(header[i]);
  for (int r = 0; r < n; ++r) {
    ds.y(r) = rows[r][resp_col];
    int c = 0;
    for (size_t i = 0; i < header.size(); ++i)
      if (static_cast<int>(i) != resp_col) ds.X(r, c++) = rows[r][i];
  }
  for (int j = 0; j < p; ++j) {
    const double lo = ds.X.col(j).minCoeff();
    const double hi = ds.X.col(j).maxCoeff();
    if (lo == hi) ds.constant_columns.push_back(j);
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path, const std::string& response_name) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
  out << response_name;
  for (const auto& nm : ds.names) out << ',' << nm;
  out << '\n';
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (int r = 0; r < ds.n(); ++r) {
    put(ds.y(r));
    for (int j = 0; j < ds.p(); ++j) {
      out << ',';
      put(ds.X(r, j));
    }
    out << '\n';
  }
}

Dataset centre(const Dataset& ds) {
  Dataset out = ds;
  for (int j = 0; j < out.p(); ++j) out.X.col(j).array() -= out.X.col(j).mean();
  out.centred = true;
  return out;
}

ModelMatrices model_matrices(const Dataset& ds, const ModelId& m,
                             const std::vector<int>& reference_cols) {
  if (m.p != ds.p()) throw std::invalid_argument("model_matrices: ModelId length mismatch");
  const int n = ds.n();
  const int k0 = 1 + static_cast<int>(reference_cols.size());
  ModelMatrices mm;
  mm.X0.resize(n, k0);
  mm.X0.col(0).setOnes();
  for (size_t i = 0; i < reference_cols.size(); ++i)
    mm.X0.col(1 + static_cast<int>(i)) = ds.X.col(reference_cols[i]);

  std::vector<int> included;
  for (int j = 0; j < m.p; ++j) {
    if (!m.includes(j)) continue;
    if (std::find(reference_cols.begin(), reference_cols.end(), j) != reference_cols.end())
      continue;  // reference columns are implicit
    included.push_back(j);
  }
  mm.Xe.resize(n, static_cast<int>(included.size()));
  for (size_t i = 0; i < included.size(); ++i) mm.Xe.col(static_cast<int>(i)) = ds.X.col(included[i]);

  if (k0 + mm.ke() >= n)
    throw std::invalid_argument("model_matrices: k1 must be smaller than n");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr0(mm.X0);
  qr0.setThreshold(kRankTol);
  if (qr0.rank() < k0) throw std::runtime_error("model_matrices: reference design rank deficient");

  if (mm.ke() > 0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> hqr(mm.X0);
    const Eigen::MatrixXd Q0 =
        hqr.householderQ() * Eigen::MatrixXd::Identity(n, k0);
    const Eigen::MatrixXd QtXe = Q0.transpose() * mm.Xe;
    mm.Ve_inv = mm.Xe.transpose() * mm.Xe - QtXe.transpose() * QtXe;
    mm.Ve_inv = 0.5 * (mm.Ve_inv + mm.Ve_inv.transpose());
  } else {
    mm.Ve_inv.resize(0, 0);
  }
  return mm;
}

OlsStats ols_stats(const Dataset& ds, const ModelId& m, const std::vector<int>& reference_cols) {
  const ModelMatrices mm = model_matrices(ds, m, reference_cols);
  const int n = ds.n();
  const int k0 = mm.k0();
  const int k1 = k0 + mm.ke();

  Eigen::MatrixXd X1(n, k1);
  X1.leftCols(k0) = mm.X0;
  if (mm.ke() > 0) X1.rightCols(mm.ke()) = mm.Xe;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X1);
  qr.setThreshold(kRankTol);
  if (qr.rank() < k1) throw std::runtime_error("ols_stats: design matrix rank deficient");

  OlsStats st;
  st.n = n;
  st.k0 = k0;
  st.k1 = k1;
  st.beta_hat = qr.solve(ds.y);
  st.rss = (ds.y - X1 * st.beta_hat).squaredNorm();

  const double tss = (ds.y.array() - ds.y.mean()).square().sum();
  if (!(tss > 0.0)) throw std::runtime_error("ols_stats: response is constant");
  st.r2 = 1.0 - st.rss / tss;

  double rss0;
  if (k0 == 1) {
    rss0 = tss;  // intercept-only reference
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr0(mm.X0);
    qr0.setThreshold(kRankTol);
    rss0 = (ds.y - mm.X0 * qr0.solve(ds.y)).squaredNorm();
  }
  st.r10 = st.rss / rss0;
  return st;
}

Eigen::MatrixXd ve_inverse(const Dataset& ds, const ModelId& m,
                           const std::vector<int>& reference_cols) {
  const ModelMatrices mm = model_matrices(ds, m, reference_cols);
  if (mm.ke() > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mm.Ve_inv);
    qr.setThreshold(kRankTol);
    if (qr.rank() < mm.ke()) throw std::runtime_error("ve_inverse: projected design rank deficient");
  }
  return mm.Ve_inv;
}

}  // namespace pep
