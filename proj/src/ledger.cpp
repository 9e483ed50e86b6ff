#include "logz/ledger.hpp"

#include <cmath>
#include <stdexcept>

#include "logz/stats.hpp"

namespace logz {

double predict_cost(Method method, double kappa, double d, double eps) {
  const double k = kappa;
  using std::pow;
  switch (method) {
    case Method::UldSampling:
    case Method::QuantumInexactUldSampling:
      return k * k * pow(d, 0.5) / eps;
    case Method::UldRmmSampling:
    case Method::QuantumInexactUldRmmSampling:
      return pow(k, 7.0 / 6.0) * pow(d, 1.0 / 6.0) * pow(eps, -1.0 / 3.0) +
             k * pow(d, 1.0 / 3.0) * pow(eps, -2.0 / 3.0);
    case Method::MalaSampling:
      return k * d;
    case Method::MalaWarmSampling:
      return k * pow(d, 0.5);
    case Method::QuantumMalaSampling:
      return pow(k, 0.5) * d;
    case Method::QuantumMalaWarmSampling:
      return pow(k, 0.5) * pow(d, 0.25);
    case Method::MultilevelUldEstimation:
      return k * k * pow(d, 1.5) / (eps * eps);
    case Method::MultilevelUldRmmEstimation:
      return (pow(k, 7.0 / 6.0) * pow(d, 7.0 / 6.0) + k * pow(d, 4.0 / 3.0)) / (eps * eps);
    case Method::MalaEstimation:
      return k * d * d / (eps * eps) * std::max(1.0, k / d);
    case Method::MultilevelQuantumInexactUldEstimation:
      return k * k * pow(d, 1.5) / eps;
    case Method::MultilevelQuantumInexactUldRmmEstimation:
      return (pow(k, 7.0 / 6.0) * pow(d, 7.0 / 6.0) + k * pow(d, 4.0 / 3.0)) / eps;
    case Method::QuantumMalaEstimation:
      return pow(k, 0.5) * pow(d, 1.5) / eps;
  }
  throw std::invalid_argument("predict_cost: unknown method");
}

const char* method_name(Method method) {
  switch (method) {
    case Method::UldSampling: return "uld_sampling";
    case Method::UldRmmSampling: return "uld_rmm_sampling";
    case Method::MalaSampling: return "mala_sampling";
    case Method::MalaWarmSampling: return "mala_warm_sampling";
    case Method::QuantumInexactUldSampling: return "quantum_inexact_uld_sampling";
    case Method::QuantumInexactUldRmmSampling: return "quantum_inexact_uld_rmm_sampling";
    case Method::QuantumMalaSampling: return "quantum_mala_sampling";
    case Method::QuantumMalaWarmSampling: return "quantum_mala_warm_sampling";
    case Method::MultilevelUldEstimation: return "multilevel_uld_estimation";
    case Method::MultilevelUldRmmEstimation: return "multilevel_uld_rmm_estimation";
    case Method::MalaEstimation: return "mala_estimation";
    case Method::MultilevelQuantumInexactUldEstimation:
      return "multilevel_quantum_inexact_uld_estimation";
    case Method::MultilevelQuantumInexactUldRmmEstimation:
      return "multilevel_quantum_inexact_uld_rmm_estimation";
    case Method::QuantumMalaEstimation: return "quantum_mala_estimation";
  }
  return "unknown";
}

std::vector<Method> all_methods() {
  return {Method::UldSampling,
          Method::UldRmmSampling,
          Method::MalaSampling,
          Method::MalaWarmSampling,
          Method::QuantumInexactUldSampling,
          Method::QuantumInexactUldRmmSampling,
          Method::QuantumMalaSampling,
          Method::QuantumMalaWarmSampling,
          Method::MultilevelUldEstimation,
          Method::MultilevelUldRmmEstimation,
          Method::MalaEstimation,
          Method::MultilevelQuantumInexactUldEstimation,
          Method::MultilevelQuantumInexactUldRmmEstimation,
          Method::QuantumMalaEstimation};
}

Method method_from_string(const std::string& name) {
  for (Method m : all_methods()) {
    if (name == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + name);
}

bool is_estimation_method(Method method) {
  switch (method) {
    case Method::MultilevelUldEstimation:
    case Method::MultilevelUldRmmEstimation:
    case Method::MalaEstimation:
    case Method::MultilevelQuantumInexactUldEstimation:
    case Method::MultilevelQuantumInexactUldRmmEstimation:
    case Method::QuantumMalaEstimation:
      return true;
    default:
      return false;
  }
}

ExponentReport compare(const std::vector<SweepPoint>& sweep, Method method,
                       const std::string& param_name, double fixed_kappa, double fixed_d,
                       double fixed_eps) {
  if (sweep.size() < 3) throw std::invalid_argument("compare: need >= 3 sweep points");
  std::vector<double> params, measured, predicted;
  for (const auto& pt : sweep) {
    if (pt.param <= 0.0) throw std::invalid_argument("compare: degenerate sweep");
    double kappa = fixed_kappa, d = fixed_d, eps = fixed_eps;
    if (param_name == "kappa") kappa = pt.param;
    else if (param_name == "d") d = pt.param;
    else if (param_name == "eps") eps = pt.param;
    else throw std::invalid_argument("compare: unknown parameter " + param_name);
    params.push_back(pt.param);
    measured.push_back(pt.measured);
    predicted.push_back(predict_cost(method, kappa, d, eps));
  }
  for (std::size_t i = 1; i < params.size(); ++i) {
    if (params[i] == params[0] && params[i - 1] == params[0])
      throw std::invalid_argument("compare: degenerate sweep");
  }
  ExponentReport rep;
  rep.method = method;
  rep.param_name = param_name;
  rep.fitted_exponent = loglog_slope(params, measured);
  rep.predicted_exponent = loglog_slope(params, predicted);
  return rep;
}

}  // namespace logz
