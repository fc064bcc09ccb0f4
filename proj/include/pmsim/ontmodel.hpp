#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmsim/hilbert.hpp"

namespace pmsim {

// Finite ontological model over an ontic index set Lambda of size m.
// Preparations and measurements are bound to quantum objects by label so the
// checkers can locate the binding that corresponds to a given state/operator.
struct OnticModel {
  struct Preparation {
    VectorXr mu;        // probability over Lambda
    StateVector state;  // the bound quantum state
  };
  struct MeasurementBinding {
    Operator op;
    VectorXr outcomes;  // distinct outcome values, ascending
    MatrixXr xi;        // xi(k, lambda) = p(outcome k | lambda)
  };

  Eigen::Index m = 0;
  std::map<std::string, Preparation> preparations;
  std::map<std::string, MeasurementBinding> measurements;
  std::vector<StateVector> lambda_states;  // nonempty: each lambda carries a
                                           // quantum state, which defines the
                                           // deterministic protective response
  MatrixXr lattice;  // m x 3 unit vectors for sphere-discretization models

  OnticModel() = default;
  explicit OnticModel(Eigen::Index size) : m(size) {}

  // true when the model answers protective measurements (f(lambda, A) is the
  // lambda state's expectation); false models face the derived requirement
  bool protective_defined() const { return !lambda_states.empty(); }

  // both binders validate the model invariants (mu sums to 1, entries >= 0;
  // xi columns sum to 1; bound outcomes match the operator's spectrum)
  void bind_preparation(const std::string& label, VectorXr mu, StateVector state);
  void bind_measurement(const std::string& label, Operator op, VectorXr outcomes, MatrixXr xi);
};

// label lookups; throw ConfigError when the object is not bound
std::string preparation_label(const OnticModel& model, const StateVector& psi);
std::string measurement_label(const OnticModel& model, const Operator& op);

// sum_lambda min(mu1, mu2)
double support_overlap(const VectorXr& mu1, const VectorXr& mu2);

struct ReproductionReport {
  std::string psi_label;
  std::string measurement;
  VectorXr outcomes;
  VectorXr born;         // exact quantum probabilities per outcome
  VectorXr model_probs;  // sum_lambda mu(lambda) xi(k|lambda)
  VectorXr residuals;
  double max_residual = 0.0;
  bool pass = false;
};

// Does the model reproduce Born statistics for (psi, M) within eps?
ReproductionReport check_projective_reproduction(const OnticModel& model, const StateVector& psi,
                                                 const Operator& m, double eps);

// Witness that one ontic state is claimed by both preparations while the
// protective outcomes they require differ.
struct ContradictionCertificate {
  Eigen::Index lambda = -1;
  std::string observable;
  std::string psi1_label;
  std::string psi2_label;
  double expectation1 = 0.0;
  double expectation2 = 0.0;
  double joint_mass = 0.0;  // min(mu1(lambda), mu2(lambda))

  // re-derives the claim from the model: strictly positive mass under both
  // preparations and an expectation gap above tol
  bool validate(const OnticModel& model, double tol) const;
};

struct ConsistencyResult {
  bool pass = true;
  std::optional<ContradictionCertificate> certificate;
  std::string psi1_label;
  std::string psi2_label;
  double overlap = 0.0;
  double expectation_gap = 0.0;
  bool protective_defined = false;
  // defined-response models: worst |f(lambda, A) - <A>_psi| over each
  // preparation's support (diagnostic; does not decide pass)
  double calibration_residual = 0.0;
};

// Can the model assign every shared ontic state one definite protective
// outcome for A? Fails (with a self-validated certificate) exactly when the
// supports overlap and the two expectations differ by more than tol.
ConsistencyResult check_protective_consistency(const OnticModel& model, const StateVector& psi1,
                                               const StateVector& psi2, const Operator& a,
                                               double tol = 1e-6);

// Qubit model on a Fibonacci sphere lattice: mu(lambda|psi) follows the
// clipped cosine max(0, n_psi . lambda), responses are hemisphere indicators.
// Binds preparations ket0/ket_plus and measurements sigma_z/p0; protective
// response undefined. resolution >= 100.
OnticModel build_ks_model(Eigen::Index resolution);

// adds a clipped-cosine preparation for an arbitrary Bloch axis
void bind_ks_preparation(OnticModel& model, const std::string& label, double nx, double ny,
                         double nz, const StateVector& state);

// Control model: one ontic state per quantum state, point-mass preparations,
// Born-rule responses derivable for any observable. Rejects duplicate states.
OnticModel build_psi_ontic_model(const std::vector<StateVector>& states);

// derives xi from the Born rule at each lambda state (lambda_states required)
void bind_born_measurement(OnticModel& model, const std::string& label, const Operator& op);

}  // namespace pmsim
