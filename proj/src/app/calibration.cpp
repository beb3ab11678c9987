#include "peqrng/app/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

#include "peqrng/error.hpp"

namespace peqrng::app {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kGridPoints = 4000;

// Residuals of I(W) with parameters (a, b, c, d).
struct Fringe {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>& w;
  const std::vector<double>& y;
  int port;

  int inputs() const { return 4; }
  int values() const { return static_cast<int>(w.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double s = std::sin(p[1] * w[k] + p[3]);
      const double c = std::cos(p[1] * w[k] + p[3]);
      const double shape = port == 1 ? c * c : s * s;
      r[static_cast<Eigen::Index>(k)] = p[0] * shape + p[2] - y[k];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (std::size_t k = 0; k < w.size(); ++k) {
      const auto row = static_cast<Eigen::Index>(k);
      const double x = p[1] * w[k] + p[3];
      const double s2 = std::sin(2.0 * x);
      const double shape = port == 1 ? std::cos(x) * std::cos(x) : std::sin(x) * std::sin(x);
      const double dshape = port == 1 ? -s2 : s2;  // d shape / dx
      j(row, 0) = shape;
      j(row, 1) = p[0] * dshape * w[k];
      j(row, 2) = 1.0;
      j(row, 3) = p[0] * dshape;
    }
    return 0;
  }
};

struct LinearFit {
  double rss = INFINITY;
  double A = 0, B = 0, C = 0;
};

// Least squares of y on (1, cos 2bW, sin 2bW).
LinearFit linear_fit(const std::vector<double>& w, const std::vector<double>& y, double b) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(w.size()), 3);
  Eigen::VectorXd Y(static_cast<Eigen::Index>(w.size()));
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    X(r, 0) = 1.0;
    X(r, 1) = std::cos(2.0 * b * w[k]);
    X(r, 2) = std::sin(2.0 * b * w[k]);
    Y[r] = y[k];
  }
  const Eigen::Vector3d beta = X.colPivHouseholderQr().solve(Y);
  LinearFit f;
  f.rss = (X * beta - Y).squaredNorm();
  f.A = beta[0];
  f.B = beta[1];
  f.C = beta[2];
  return f;
}

}  // namespace

double CalibrationFit::intensity(double w) const {
  const double x = b * w + d;
  return port == 1 ? a * std::cos(x) * std::cos(x) + c : a * std::sin(x) * std::sin(x) + c;
}

CalibrationFit fit_mzi_calibration(std::span<const std::pair<double, double>> samples, int port) {
  if (port != 1 && port != 2) throw InputError("calibration: port must be 1 or 2");
  if (samples.size() < 8) throw InputError("calibration: need at least 8 samples");
  std::vector<double> w, y;
  for (const auto& [p, i] : samples) {
    if (!std::isfinite(p) || !std::isfinite(i)) throw InputError("calibration: non-finite sample");
    w.push_back(p);
    y.push_back(i);
  }
  const auto [wmin, wmax] = std::minmax_element(w.begin(), w.end());
  const double span = *wmax - *wmin;
  if (!(span > 0.0)) throw InputError("calibration: samples need distinct powers");
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  const double yscale = std::max({std::abs(*ymin), std::abs(*ymax), 1e-300});
  if (*ymax - *ymin <= 1e-12 * yscale) throw FitError("calibration: intensity is constant; no fringe to fit");

  std::vector<double> ws = w;
  std::sort(ws.begin(), ws.end());
  double min_gap = span;
  for (std::size_t k = 1; k < ws.size(); ++k)
    if (ws[k] > ws[k - 1]) min_gap = std::min(min_gap, ws[k] - ws[k - 1]);
  double mean_gap = span / static_cast<double>(ws.size() - 1);

  // Half a fringe over the span up to the sampling limit of cos(2bW).
  const double b_lo = kPi / (4.0 * span);
  const double b_hi = std::max(b_lo * 2.0, 0.95 * kPi / (2.0 * std::max(mean_gap, min_gap)));
  LinearFit best;
  double best_b = b_lo;
  for (int k = 0; k <= kGridPoints; ++k) {
    const double b = b_lo + (b_hi - b_lo) * k / kGridPoints;
    const LinearFit f = linear_fit(w, y, b);
    if (f.rss < best.rss) {
      best = f;
      best_b = b;
    }
  }

  // B cos x + C sin x = R cos(x - psi).
  const double amp = std::hypot(best.B, best.C);
  if (!(amp > 0.0)) throw FitError("calibration: no oscillating component found");
  const double psi = std::atan2(best.C, best.B);
  Eigen::VectorXd p(4);
  p << 2.0 * amp, best_b, best.A - amp, (port == 1 ? -psi : kPi - psi) / 2.0;

  Fringe model{w, y, port};
  Eigen::LevenbergMarquardt<Fringe> lm(model);
  lm.parameters.xtol = 1e-15;
  lm.parameters.ftol = 1e-15;
  lm.parameters.maxfev = 2000;
  const auto status = lm.minimize(p);
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters ||
      status == Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation || !p.allFinite())
    throw FitError("calibration: Levenberg-Marquardt did not converge (status " + std::to_string(int(status)) + ")");

  CalibrationFit fit;
  fit.port = port;
  fit.samples = static_cast<int>(w.size());
  fit.iterations = static_cast<int>(lm.iter);
  // Canonical form: a > 0, b > 0, d in [0, pi).
  double a = p[0], b = p[1], c = p[2], d = p[3];
  if (a < 0.0) {  // a cos^2 x + c = -a sin^2 x + (a + c)
    c += a;
    a = -a;
    d += kPi / 2;
  }
  if (b < 0.0) {
    b = -b;
    d = -d;
  }
  d = std::fmod(d, kPi);
  if (d < 0.0) d += kPi;
  fit.a = a;
  fit.b = b;
  fit.c = c;
  fit.d = d;

  Eigen::VectorXd r(static_cast<Eigen::Index>(w.size()));
  Eigen::VectorXd q(4);
  q << a, b, c, d;
  model(q, r);
  const double rss = r.squaredNorm();
  fit.rms = std::sqrt(rss / static_cast<double>(w.size()));
  if (!(b * span >= kPi / 2 * (1.0 - 1e-6)))
    throw FitError("calibration: samples span less than half a fringe (b * span = " + std::to_string(b * span) + ")");

  if (w.size() > 4) {
    Eigen::MatrixXd J(static_cast<Eigen::Index>(w.size()), 4);
    model.df(q, J);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(JtJ);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd cov = lu.inverse() * (rss / static_cast<double>(w.size() - 4));
      fit.a_err = std::sqrt(std::max(0.0, cov(0, 0)));
      fit.b_err = std::sqrt(std::max(0.0, cov(1, 1)));
      fit.c_err = std::sqrt(std::max(0.0, cov(2, 2)));
      fit.d_err = std::sqrt(std::max(0.0, cov(3, 3)));
    }
  }
  return fit;
}

}  // namespace peqrng::app
