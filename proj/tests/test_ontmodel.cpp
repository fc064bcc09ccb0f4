#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "pmsim/ontmodel.hpp"
#include "pmsim/rng.hpp"

using namespace pmsim;

namespace {

double ks_residual(Eigen::Index resolution) {
  const OnticModel model = build_ks_model(resolution);
  const Operator sz = model.measurements.at("sigma_z").op;
  const double r0 = check_projective_reproduction(model, ket0(), sz, 1e-2).max_residual;
  const double rp = check_projective_reproduction(model, ket_plus(), sz, 1e-2).max_residual;
  return std::max(r0, rp);
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx) * (ys[i] - my);
    den += (xs[i] - mx) * (xs[i] - mx);
  }
  return num / den;
}

}  // namespace

TEST_CASE("sphere-lattice model: structure and normalization") {
  const OnticModel model = build_ks_model(1000);
  CHECK(model.m == 1000);
  CHECK(!model.protective_defined());
  CHECK((model.lattice.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);

  const VectorXr& mu0 = model.preparations.at("ket0").mu;
  CHECK(mu0.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mu0.minCoeff() >= 0.0);
  CHECK((mu0.array() > 0.0).count() == 500);  // exactly the upper hemisphere

  CHECK(preparation_label(model, ket0()) == "ket0");
  CHECK(preparation_label(model, ket_plus()) == "ket_plus");
  CHECK_THROWS_AS(preparation_label(model, bloch_state(0.123, 0.0)), ConfigError);
  CHECK_THROWS_AS(measurement_label(model, pauli_y()), ConfigError);
  CHECK_THROWS_AS(build_ks_model(99), ConfigError);
}

TEST_CASE("sphere-lattice model reproduces born statistics at frozen residuals") {
  const std::vector<Eigen::Index> ms = {1000, 3162, 10000, 31623, 100000};
  const std::vector<double> frozen = {1.1593535382173892e-3, 2.3888224547552461e-4,
                                      2.3675880857831899e-5, 1.2674353739305921e-5,
                                      1.1785374499195811e-5};
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double r = ks_residual(ms[i]);
    CHECK(std::abs(r - frozen[i]) < 1e-11);
    lx.push_back(std::log(static_cast<double>(ms[i])));
    ly.push_back(std::log(r));
  }
  const double slope = fit_slope(lx, ly);
  CHECK(slope < -0.7);
  CHECK(slope > -1.3);

  const OnticModel model = build_ks_model(10000);
  const Operator sz = model.measurements.at("sigma_z").op;
  const ReproductionReport rep = check_projective_reproduction(model, ket0(), sz, 1e-2);
  CHECK(rep.pass);
  CHECK(rep.psi_label == "ket0");
  CHECK(rep.measurement == "sigma_z");
  CHECK(rep.born.sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.model_probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distinct preparations share ontic support with the expected overlap") {
  const OnticModel model = build_ks_model(10000);
  const double ov =
      support_overlap(model.preparations.at("ket0").mu, model.preparations.at("ket_plus").mu);
  CHECK(std::abs(ov - 0.29289704993673649) < 1e-11);
  CHECK(std::abs(ov - (1.0 - 1.0 / std::sqrt(2.0))) < 1e-4);
}

TEST_CASE("protective consistency fails exactly when overlapping supports disagree") {
  OnticModel model = build_ks_model(500);
  Rng rng(31);
  int failures = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const double t1 = std::acos(2.0 * rng.uniform() - 1.0), p1 = 2.0 * M_PI * rng.uniform();
    const double t2 = std::acos(2.0 * rng.uniform() - 1.0), p2 = 2.0 * M_PI * rng.uniform();
    const std::string l1 = "a" + std::to_string(trial);
    const std::string l2 = "b" + std::to_string(trial);
    bind_ks_preparation(model, l1, std::sin(t1) * std::cos(p1), std::sin(t1) * std::sin(p1),
                        std::cos(t1), bloch_state(t1, p1));
    bind_ks_preparation(model, l2, std::sin(t2) * std::cos(p2), std::sin(t2) * std::sin(p2),
                        std::cos(t2), bloch_state(t2, p2));
    const ConsistencyResult res =
        check_protective_consistency(model, bloch_state(t1, p1), bloch_state(t2, p2), pauli_z());
    const bool should_fail = res.overlap > 0.0 && res.expectation_gap > 1e-6;
    CHECK(res.pass == !should_fail);
    if (!res.pass) {
      ++failures;
      REQUIRE(res.certificate.has_value());
      CHECK(res.certificate->validate(model, 1e-6));
      CHECK(res.certificate->joint_mass > 0.0);
      CHECK(res.certificate->observable == "sigma_z");
    }
  }
  CHECK(failures > 0);  // generic pairs collide

  // no gap, no contradiction: identity has equal expectations everywhere
  const ConsistencyResult same =
      check_protective_consistency(model, ket0(), ket_plus(), identity_op(ket0().space));
  CHECK(same.pass);
  CHECK(same.overlap > 0.0);
}

TEST_CASE("tampered certificates fail validation") {
  OnticModel model = build_ks_model(500);
  const ConsistencyResult res =
      check_protective_consistency(model, ket0(), ket_plus(), pauli_z());
  REQUIRE(!res.pass);
  REQUIRE(res.certificate.has_value());
  ContradictionCertificate cert = *res.certificate;
  CHECK(cert.validate(model, 1e-6));

  ContradictionCertificate off_support = cert;
  off_support.lambda = model.m - 1;  // south pole: outside ket0's support
  CHECK(!off_support.validate(model, 1e-6));

  ContradictionCertificate no_gap = cert;
  no_gap.expectation2 = no_gap.expectation1;
  CHECK(!no_gap.validate(model, 1e-6));

  ContradictionCertificate wrong_label = cert;
  wrong_label.psi1_label = "unbound";
  CHECK(!wrong_label.validate(model, 1e-6));
}

TEST_CASE("point-mass control model is exactly born-complete and consistent") {
  const std::vector<StateVector> states = {ket0(), ket_plus(), bloch_state(1.2, 0.7)};
  OnticModel model = build_psi_ontic_model(states);
  CHECK(model.protective_defined());
  CHECK(model.m == 3);
  bind_born_measurement(model, "sigma_z", pauli_z());
  bind_born_measurement(model, "p0", projector(ket0()));

  for (const auto& psi : states) {
    for (const char* label : {"sigma_z", "p0"}) {
      const Operator& op = model.measurements.at(label).op;
      const ReproductionReport rep = check_projective_reproduction(model, psi, op, 1e-10);
      CHECK(rep.pass);
      CHECK(rep.max_residual < 1e-12);
    }
  }

  const ConsistencyResult res = check_protective_consistency(model, ket0(), ket_plus(), pauli_z());
  CHECK(res.pass);
  CHECK(res.overlap == 0.0);
  CHECK(res.protective_defined);
  CHECK(res.calibration_residual < 1e-12);

  CHECK_THROWS_AS(build_psi_ontic_model({ket0(), ket0()}), ConfigError);
  CHECK_THROWS_AS(build_psi_ontic_model({}), ConfigError);
}

TEST_CASE("a model with uninformative responses fails reproduction") {
  OnticModel model(4);
  VectorXr mu = VectorXr::Constant(4, 0.25);
  model.bind_preparation("ket0", mu, ket0());
  VectorXr outcomes(2);
  outcomes << -1.0, 1.0;
  MatrixXr xi = MatrixXr::Constant(2, 4, 0.5);  // coin flip regardless of lambda
  model.bind_measurement("sigma_z", pauli_z(), outcomes, xi);
  const ReproductionReport rep = check_projective_reproduction(model, ket0(), pauli_z(), 1e-2);
  CHECK(!rep.pass);
  CHECK(rep.max_residual == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("binders reject malformed distributions") {
  OnticModel model(4);
  VectorXr good = VectorXr::Constant(4, 0.25);
  VectorXr bad_sum = VectorXr::Constant(4, 0.3);
  VectorXr negative(4);
  negative << 0.5, 0.75, -0.25, 0.0;
  CHECK_THROWS_AS(model.bind_preparation("x", bad_sum, ket0()), ConfigError);
  CHECK_THROWS_AS(model.bind_preparation("x", negative, ket0()), ConfigError);
  CHECK_NOTHROW(model.bind_preparation("x", good, ket0()));

  VectorXr outcomes(2);
  outcomes << -1.0, 1.0;
  MatrixXr xi_bad = MatrixXr::Constant(2, 4, 0.4);  // columns sum to 0.8
  CHECK_THROWS_AS(model.bind_measurement("m", pauli_z(), outcomes, xi_bad), ConfigError);
  MatrixXr xi = MatrixXr::Constant(2, 4, 0.5);
  VectorXr wrong_spectrum(2);
  wrong_spectrum << 0.0, 2.0;
  CHECK_THROWS_AS(model.bind_measurement("m", pauli_z(), wrong_spectrum, xi), ConfigError);
  CHECK_NOTHROW(model.bind_measurement("m", pauli_z(), outcomes, xi));

  CHECK_THROWS_AS(bind_born_measurement(model, "q", pauli_x()), ConfigError);  // no lambda states
}
