#include "beamalign/linear_model.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "beamalign/errors.hpp"
#include "beamalign/report.hpp"

namespace beamalign {

Eigen::VectorXd LinearModel::predict(const Eigen::VectorXd& predictors_in) const {
  if (predictors_in.size() != predictors()) throw ValidationError("linear model: wrong predictor count");
  const auto p = predictors();
  return coefficients.leftCols(p) * predictors_in + intercept();
}

double LinearModel::mean_r_squared() const {
  double sum = 0.0;
  for (double r : r_squared) sum += r;
  return r_squared.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : sum / static_cast<double>(r_squared.size());
}

namespace {

Eigen::MatrixXd augmented(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.leftCols(x.cols()) = x;
  a.col(x.cols()).setOnes();
  return a;
}

}  // namespace

void compute_diagnostics(LinearModel& m) {
  const Eigen::MatrixXd fitted = augmented(m.x) * m.coefficients.transpose();
  const auto rows = static_cast<double>(m.x.rows());
  m.r_squared.assign(static_cast<std::size_t>(m.y.cols()), 0.0);
  m.residual_variance.assign(static_cast<std::size_t>(m.y.cols()), 0.0);
  for (Eigen::Index k = 0; k < m.y.cols(); ++k) {
    const double ss_res = (m.y.col(k) - fitted.col(k)).squaredNorm();
    const double ss_tot = (m.y.col(k).array() - m.y.col(k).mean()).matrix().squaredNorm();
    const auto idx = static_cast<std::size_t>(k);
    m.r_squared[idx] = ss_tot > 0 ? 1.0 - ss_res / ss_tot : std::numeric_limits<double>::quiet_NaN();
    m.residual_variance[idx] = ss_res / std::max(rows - m.rank, 1.0);
  }
}

LinearModel least_squares(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows()) throw ValidationError("least_squares: row count mismatch");
  if (x.rows() < x.cols() + 1) {
    throw UnderdeterminedError("least_squares: " + std::to_string(x.rows()) + " rows for " +
                               std::to_string(x.cols() + 1) + " parameters");
  }
  const Eigen::MatrixXd a = augmented(x);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(kRankTolerance);

  LinearModel m;
  m.coefficients = svd.solve(y).transpose();
  m.rank = static_cast<int>(svd.rank());
  m.x = x;
  m.y = y;
  compute_diagnostics(m);
  return m;
}

namespace {

nlohmann::ordered_json matrix_json(const Eigen::MatrixXd& mat) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (Eigen::Index r = 0; r < mat.rows(); ++r) {
    std::vector<double> row(static_cast<std::size_t>(mat.cols()));
    for (Eigen::Index c = 0; c < mat.cols(); ++c) row[static_cast<std::size_t>(c)] = mat(r, c);
    rows.push_back(row);
  }
  return rows;
}

Eigen::MatrixXd json_matrix(const nlohmann::json& j, Eigen::Index cols_hint) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : cols_hint;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ValidationError("linear model json: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string linear_model_to_json(const LinearModel& m) {
  nlohmann::ordered_json j;
  j["predictors"] = m.predictors();
  j["outcomes"] = m.outcomes();
  j["intercept_column"] = "last";
  j["coefficients"] = matrix_json(m.coefficients);
  j["r_squared"] = m.r_squared;
  j["residual_variance"] = m.residual_variance;
  j["rank"] = m.rank;
  j["fit_x"] = matrix_json(m.x);
  j["fit_y"] = matrix_json(m.y);
  return dump_json17(j);
}

LinearModel linear_model_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    LinearModel m;
    m.coefficients = json_matrix(j.at("coefficients"), 0);
    m.rank = j.at("rank").get<int>();
    m.x = json_matrix(j.at("fit_x"), m.predictors());
    m.y = json_matrix(j.at("fit_y"), m.outcomes());
    for (const auto& v : j.at("r_squared")) {
      m.r_squared.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    for (const auto& v : j.at("residual_variance")) m.residual_variance.push_back(v.get<double>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("linear model json: ") + e.what());
  }
}

}  // namespace beamalign
