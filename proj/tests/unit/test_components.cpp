#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "../support/helpers.hpp"
#include "peqrng/components.hpp"
#include "peqrng/error.hpp"

using namespace peqrng;
using namespace peqrng::components;
using qcore::kI;
using qcore::Matrix2;
using testing_util::max_diff;

TEST_CASE("mmi matrix") {
  const double h = 1 / std::sqrt(2.0);
  CHECK(max_diff(mmi_matrix(MmiParams::ideal()), Matrix2({h, kI * h, kI * h, h})) <= 1e-15);
  const Matrix2 m = mmi_matrix(MmiParams::from_power(0.4, 0.6));
  CHECK(m(0, 0).real() == doctest::Approx(0.6325).epsilon(1e-4));
  CHECK(m(0, 1).imag() == doctest::Approx(0.7746).epsilon(1e-4));
  CHECK(max_diff(mmi_matrix(MmiParams{1.0, 0.0, {}}), Matrix2::identity()) == 0.0);
  CHECK_THROWS_AS(MmiParams::from_power(0.7, 0.6).validate(), InputError);
  CHECK_THROWS_AS((MmiParams{-0.1, 0.5, {}}.validate()), InputError);
}

TEST_CASE("mmi wavelength table") {
  const auto p = MmiParams::from_power_table({{740, 0.42, 0.58}, {720, 0.38, 0.62}, {730, 0.40, 0.60}});
  CHECK(p.tabulated());
  CHECK(p.at(720.0).t == doctest::Approx(std::sqrt(0.38)).epsilon(1e-15));  // exact at nodes
  CHECK(p.at(730.0).r == doctest::Approx(std::sqrt(0.60)).epsilon(1e-15));
  const double mid = 0.5 * (std::sqrt(0.38) + std::sqrt(0.40));
  CHECK(p.at(725.0).t == doctest::Approx(mid).epsilon(1e-14));
  CHECK_THROWS_AS(p.at(745.0), RangeError);
  CHECK_THROWS_AS(p.at(std::nullopt), InputError);
  CHECK_THROWS_AS(mmi_matrix(p, 719.0), RangeError);
}

TEST_CASE("phase shifter") {
  CHECK(max_diff(phase_shifter_matrix({}), Matrix2::identity()) == 0.0);
  CHECK(max_diff(phase_shifter_matrix({std::numbers::pi / 4, 0, 0, 0}), Matrix2::diagonal({kI, 1.0})) <= 1e-15);
  const Matrix2 m = phase_shifter_matrix({0.5, 0.2, 0.011, -0.004});
  CHECK(std::abs(m(0, 0) - std::exp(kI * 1.022)) <= 1e-14);
  CHECK(std::abs(m(1, 1) - std::exp(kI * 0.392)) <= 1e-14);
  CHECK_THROWS_AS((PhaseSetting{0, 0, 0.3, 0}.validate()), InputError);
  CHECK_NOTHROW((PhaseSetting{0, 0, 0.216, 0}.validate()));
}

TEST_CASE("mzi matrix") {
  const auto ideal = MmiParams::ideal();
  CHECK(max_diff(mzi_matrix(ideal, {}), Matrix2({0, kI, kI, 0})) <= 1e-15);
  CHECK(max_diff(mzi_matrix(ideal, {std::numbers::pi / 4, -std::numbers::pi / 4, 0, 0}), Matrix2({kI, 0, 0, -kI})) <=
        1e-15);
  const Matrix2 m = mzi_matrix(MmiParams::from_power(0.4, 0.6), {});
  CHECK(max_diff(m, Matrix2({qcore::cplx{-0.2}, kI * (2 * std::sqrt(0.24)), kI * (2 * std::sqrt(0.24)), qcore::cplx{-0.2}})) <= 1e-15);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3), e(-0.25, 0.25);
  for (int n = 0; n < 100; ++n) {
    const PhaseSetting s{u(rng), u(rng), e(rng), e(rng)};
    const Matrix2 z = mzi_matrix(ideal, s);
    CHECK(z.is_unitary(1e-12));
    const double zeta = s.zeta1 - s.zeta2 + s.delta1 - s.delta2;
    const auto g = kI * std::exp(kI * (s.zeta1 + s.zeta2 + s.delta1 + s.delta2));
    CHECK(max_diff(z, Matrix2({g * std::sin(zeta), g * std::cos(zeta), g * std::cos(zeta), -g * std::sin(zeta)})) <=
          1e-12);
    const double c = u(rng);
    CHECK(max_diff(mzi_matrix(ideal, {s.zeta1 + c, s.zeta2 + c, s.delta1, s.delta2}), std::exp(2.0 * kI * c) * z) <=
          1e-10);
    // Lossy MMIs never amplify.
    const auto lossy = MmiParams::from_power(0.35, 0.55);
    const Matrix2 l = mzi_matrix(lossy, s);
    Eigen::Matrix2cd el;
    el << l(0, 0), l(0, 1), l(1, 0), l(1, 1);
    CHECK(Eigen::JacobiSVD<Eigen::Matrix2cd>(el).singularValues()[0] <= 1 + 1e-10);
  }
}

TEST_CASE("loss model") {
  CHECK(loss_operator({}) == qcore::Matrix4::identity());
  CHECK(max_diff(loss_operator({0.5, 0.98}), qcore::Matrix4::identity() * 0.5) == 0.0);
  const auto l = LossModel::aggregate(0.9, {0.95}, 2, 0.98);
  CHECK(l.gamma == doctest::Approx(0.9 * 0.95 * 0.98).epsilon(1e-14));
  CHECK_THROWS_AS((LossModel{0.0, 0.98}.validate()), InputError);
  CHECK_THROWS_AS((LossModel{1.2, 0.98}.validate()), InputError);
}

TEST_CASE("wavelength spectrum") {
  const auto g = WavelengthSpectrum::gaussian();
  CHECK(g.nodes.size() == 21);
  double s = 0.0, mean = 0.0;
  for (const auto& n : g.nodes) {
    s += n.weight;
    mean += n.weight * n.wavelength_nm;
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(730.0).epsilon(1e-9));
  CHECK(g.nodes.front().wavelength_nm == 720.0);
  CHECK(g.nodes.back().wavelength_nm == 740.0);
  CHECK_NOTHROW(WavelengthSpectrum::monochromatic().validate());
  CHECK_THROWS_AS((WavelengthSpectrum{{{730, 0.6}, {731, 0.3}}}.validate()), InputError);
  CHECK_THROWS_AS((WavelengthSpectrum{{}}.validate()), InputError);
}
