#include "pmsim/ontmodel.hpp"

#include <algorithm>
#include <cmath>

namespace pmsim {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

// group eigenvalues equal within 1e-9 and accumulate |<e|psi>|^2 per group;
// psi may be empty to get the spectrum only
void grouped_spectrum(const Operator& op, const StateVector* psi, std::vector<double>& values,
                      std::vector<double>& probs) {
  const EigenSystem es = eigh(op);
  const double w = op.space.weight();
  values.clear();
  probs.clear();
  for (Eigen::Index l = 0; l < es.values.size(); ++l) {
    const double pr = psi != nullptr ? std::norm(es.vectors.col(l).dot(psi->amps)) * w : 0.0;
    if (!values.empty() && std::abs(es.values(l) - values.back()) <= 1e-9) {
      probs.back() += pr;
    } else {
      values.push_back(es.values(l));
      probs.push_back(pr);
    }
  }
}

}  // namespace

void OnticModel::bind_preparation(const std::string& label, VectorXr mu, StateVector state) {
  require(m >= 1, "model has no ontic states");
  require(mu.size() == m, "mu length must equal the ontic set size");
  require(mu.minCoeff() >= 0.0, "mu entries must be nonnegative");
  require(std::abs(mu.sum() - 1.0) <= 1e-12, "mu must sum to 1");
  require(std::abs(norm(state) - 1.0) <= 1e-9, "bound state must be normalized");
  preparations[label] = Preparation{std::move(mu), std::move(state)};
}

void OnticModel::bind_measurement(const std::string& label, Operator op, VectorXr outcomes,
                                  MatrixXr xi) {
  require(m >= 1, "model has no ontic states");
  require(op.hermitian, "bound measurement must be hermitian");
  require(xi.rows() == outcomes.size() && xi.cols() == m,
          "xi must be (outcomes x ontic states)");
  require(xi.minCoeff() >= 0.0, "xi entries must be nonnegative");
  for (Eigen::Index l = 0; l < m; ++l)
    require(std::abs(xi.col(l).sum() - 1.0) <= 1e-12, "xi must sum to 1 for every ontic state");
  for (Eigen::Index k = 0; k + 1 < outcomes.size(); ++k)
    require(outcomes(k) < outcomes(k + 1), "outcomes must be ascending and distinct");

  std::vector<double> values;
  std::vector<double> probs;
  grouped_spectrum(op, nullptr, values, probs);
  require(static_cast<Eigen::Index>(values.size()) == outcomes.size(),
          "bound outcomes must match the operator's distinct eigenvalues");
  for (Eigen::Index k = 0; k < outcomes.size(); ++k)
    require(std::abs(values[static_cast<std::size_t>(k)] - outcomes(k)) <= 1e-9,
            "bound outcomes must match the operator's distinct eigenvalues");

  measurements[label] = MeasurementBinding{std::move(op), std::move(outcomes), std::move(xi)};
}

std::string preparation_label(const OnticModel& model, const StateVector& psi) {
  for (const auto& [label, prep] : model.preparations)
    if (prep.state.space == psi.space && fidelity(prep.state, psi) >= 1.0 - 1e-9) return label;
  throw ConfigError("state is not bound as a preparation of this model");
}

std::string measurement_label(const OnticModel& model, const Operator& op) {
  for (const auto& [label, binding] : model.measurements) {
    if (!(binding.op.space == op.space)) continue;
    if ((binding.op.mat - op.mat).cwiseAbs().maxCoeff() <= 1e-12) return label;
  }
  throw ConfigError("operator is not bound as a measurement of this model");
}

double support_overlap(const VectorXr& mu1, const VectorXr& mu2) {
  if (mu1.size() != mu2.size()) throw ConfigError("support overlap needs matching ontic sets");
  return mu1.cwiseMin(mu2).sum();
}

ReproductionReport check_projective_reproduction(const OnticModel& model, const StateVector& psi,
                                                 const Operator& m, double eps) {
  ReproductionReport rep;
  rep.psi_label = preparation_label(model, psi);
  rep.measurement = measurement_label(model, m);
  const auto& prep = model.preparations.at(rep.psi_label);
  const auto& binding = model.measurements.at(rep.measurement);

  std::vector<double> values;
  std::vector<double> probs;
  grouped_spectrum(m, &psi, values, probs);

  const Eigen::Index k_n = binding.outcomes.size();
  rep.outcomes = binding.outcomes;
  rep.born = Eigen::Map<const VectorXr>(probs.data(), k_n);
  rep.model_probs = binding.xi * prep.mu;
  rep.residuals = (rep.model_probs - rep.born).cwiseAbs();
  rep.max_residual = rep.residuals.maxCoeff();
  rep.pass = rep.max_residual <= eps;
  return rep;
}

bool ContradictionCertificate::validate(const OnticModel& model, double tol) const {
  const auto p1 = model.preparations.find(psi1_label);
  const auto p2 = model.preparations.find(psi2_label);
  if (p1 == model.preparations.end() || p2 == model.preparations.end()) return false;
  if (lambda < 0 || lambda >= model.m) return false;
  if (!(p1->second.mu(lambda) > 0.0 && p2->second.mu(lambda) > 0.0)) return false;
  return std::abs(expectation1 - expectation2) > tol;
}

ConsistencyResult check_protective_consistency(const OnticModel& model, const StateVector& psi1,
                                               const StateVector& psi2, const Operator& a,
                                               double tol) {
  require(a.hermitian, "protective consistency needs a hermitian observable");
  ConsistencyResult res;
  res.psi1_label = preparation_label(model, psi1);
  res.psi2_label = preparation_label(model, psi2);
  res.protective_defined = model.protective_defined();

  const VectorXr& mu1 = model.preparations.at(res.psi1_label).mu;
  const VectorXr& mu2 = model.preparations.at(res.psi2_label).mu;
  res.overlap = support_overlap(mu1, mu2);

  const double e1 = expectation(a, psi1);
  const double e2 = expectation(a, psi2);
  res.expectation_gap = std::abs(e1 - e2);

  if (res.protective_defined) {
    // calibration: on each support the model's answer should match that
    // preparation's quantum expectation
    double worst = 0.0;
    for (Eigen::Index l = 0; l < model.m; ++l) {
      const double f = expectation(a, model.lambda_states[static_cast<std::size_t>(l)]);
      if (mu1(l) > 0.0) worst = std::max(worst, std::abs(f - e1));
      if (mu2(l) > 0.0) worst = std::max(worst, std::abs(f - e2));
    }
    res.calibration_residual = worst;
  }

  // the reductio: any jointly claimed lambda must answer both e1 and e2
  if (res.overlap > 0.0 && res.expectation_gap > tol) {
    Eigen::Index best = 0;
    mu1.cwiseMin(mu2).maxCoeff(&best);
    ContradictionCertificate cert;
    cert.lambda = best;
    try {
      cert.observable = measurement_label(model, a);
    } catch (const ConfigError&) {
      cert.observable = "A";
    }
    cert.psi1_label = res.psi1_label;
    cert.psi2_label = res.psi2_label;
    cert.expectation1 = e1;
    cert.expectation2 = e2;
    cert.joint_mass = std::min(mu1(best), mu2(best));
    if (!cert.validate(model, tol))
      throw NumericsError("contradiction certificate failed its own validation");
    res.certificate = std::move(cert);
    res.pass = false;
  } else {
    res.pass = true;
  }
  return res;
}

namespace {
constexpr double kGolden = 1.618033988749894848204586834365638118;

MatrixXr fibonacci_sphere(Eigen::Index m) {
  MatrixXr pts(m, 3);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(m);
    const double phi = 2.0 * M_PI * static_cast<double>(i) / kGolden;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts(i, 0) = r * std::cos(phi);
    pts(i, 1) = r * std::sin(phi);
    pts(i, 2) = z;
  }
  return pts;
}
}  // namespace

void bind_ks_preparation(OnticModel& model, const std::string& label, double nx, double ny,
                         double nz, const StateVector& state) {
  require(model.lattice.rows() == model.m && model.lattice.cols() == 3,
          "model carries no sphere lattice");
  const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
  require(len > 0.0, "preparation axis must be nonzero");
  VectorXr mu =
      (model.lattice * (Eigen::Vector3d(nx, ny, nz) / len)).cwiseMax(0.0);
  mu /= mu.sum();
  model.bind_preparation(label, std::move(mu), state);
}

OnticModel build_ks_model(Eigen::Index resolution) {
  require(resolution >= 100, "sphere resolution must be at least 100 points");
  OnticModel model(resolution);
  model.lattice = fibonacci_sphere(resolution);

  bind_ks_preparation(model, "ket0", 0.0, 0.0, 1.0, ket0());
  bind_ks_preparation(model, "ket_plus", 1.0, 0.0, 0.0, ket_plus());

  VectorXr up(resolution);
  for (Eigen::Index i = 0; i < resolution; ++i) up(i) = model.lattice(i, 2) > 0.0 ? 1.0 : 0.0;

  MatrixXr xi(2, resolution);
  xi.row(0) = (1.0 - up.array()).matrix().transpose();  // outcome -1 (lower hemisphere)
  xi.row(1) = up.transpose();                           // outcome +1
  VectorXr sz_out(2);
  sz_out << -1.0, 1.0;
  model.bind_measurement("sigma_z", pauli_z(), sz_out, xi);

  VectorXr p0_out(2);
  p0_out << 0.0, 1.0;
  model.bind_measurement("p0", projector(ket0()), p0_out, xi);
  return model;
}

OnticModel build_psi_ontic_model(const std::vector<StateVector>& states) {
  require(!states.empty(), "psi-ontic model needs at least one state");
  for (std::size_t i = 0; i < states.size(); ++i) {
    require(std::abs(norm(states[i]) - 1.0) <= 1e-9, "states must be normalized");
    for (std::size_t k = i + 1; k < states.size(); ++k) {
      require(states[i].space == states[k].space, "states must share one space");
      require(fidelity(states[i], states[k]) < 1.0 - 1e-9,
              "duplicate states cannot label distinct ontic points");
    }
  }
  const auto m = static_cast<Eigen::Index>(states.size());
  OnticModel model(m);
  model.lambda_states = states;
  for (Eigen::Index i = 0; i < m; ++i) {
    VectorXr mu = VectorXr::Zero(m);
    mu(i) = 1.0;
    model.bind_preparation("state_" + std::to_string(i), std::move(mu),
                           states[static_cast<std::size_t>(i)]);
  }
  return model;
}

void bind_born_measurement(OnticModel& model, const std::string& label, const Operator& op) {
  require(model.protective_defined(), "born responses need per-lambda states");
  std::vector<double> values;
  std::vector<double> probs;
  grouped_spectrum(op, &model.lambda_states[0], values, probs);
  const auto k_n = static_cast<Eigen::Index>(values.size());
  MatrixXr xi(k_n, model.m);
  for (Eigen::Index l = 0; l < model.m; ++l) {
    grouped_spectrum(op, &model.lambda_states[static_cast<std::size_t>(l)], values, probs);
    for (Eigen::Index k = 0; k < k_n; ++k) xi(k, l) = probs[static_cast<std::size_t>(k)];
    // guard roundoff so the column invariant holds exactly enough
    xi.col(l) /= xi.col(l).sum();
  }
  model.bind_measurement(label, op,
                         Eigen::Map<const VectorXr>(values.data(), k_n), std::move(xi));
}

}  // namespace pmsim
