#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

namespace logz {

// Oracle-call accounting. Counters are atomic so parallel replicas can share
// one ledger; snapshots are monotone during a run.
class QueryLedger {
 public:
  QueryLedger() = default;
  QueryLedger(const QueryLedger& other)
      : eval_(other.eval_calls()), grad_(other.grad_calls()) {}

  void add_eval(std::uint64_t n = 1) { eval_.fetch_add(n, std::memory_order_relaxed); }
  void add_grad(std::uint64_t n = 1) { grad_.fetch_add(n, std::memory_order_relaxed); }

  std::uint64_t eval_calls() const { return eval_.load(std::memory_order_relaxed); }
  std::uint64_t grad_calls() const { return grad_.load(std::memory_order_relaxed); }
  std::uint64_t total() const { return eval_calls() + grad_calls(); }

  void reset() {
    eval_.store(0, std::memory_order_relaxed);
    grad_.store(0, std::memory_order_relaxed);
  }

 private:
  std::atomic<std::uint64_t> eval_{0};
  std::atomic<std::uint64_t> grad_{0};
};

// Rows of the sampling / normalizing-constant complexity tables. Predictions
// evaluate the leading-order expression with every hidden constant and polylog
// factor set to 1; they are trend references, never absolute counts.
enum class Method {
  UldSampling,
  UldRmmSampling,
  MalaSampling,
  MalaWarmSampling,
  QuantumInexactUldSampling,
  QuantumInexactUldRmmSampling,
  QuantumMalaSampling,
  QuantumMalaWarmSampling,
  MultilevelUldEstimation,
  MultilevelUldRmmEstimation,
  MalaEstimation,
  MultilevelQuantumInexactUldEstimation,
  MultilevelQuantumInexactUldRmmEstimation,
  QuantumMalaEstimation,
};

double predict_cost(Method method, double kappa, double d, double eps);
const char* method_name(Method method);
Method method_from_string(const std::string& name);  // throws on unknown method
std::vector<Method> all_methods();
bool is_estimation_method(Method method);

// Quantum lower bound exponent for estimating Z in dimension k: the measured
// eps-exponent of any method should sit above eps^{-1/(1+4/k)}.
inline double lower_bound_eps_exponent(int k) { return 1.0 / (1.0 + 4.0 / static_cast<double>(k)); }

struct SweepPoint {
  double param = 0.0;     // swept parameter value (kappa, d, or eps)
  double measured = 0.0;  // measured oracle calls
};

struct ExponentReport {
  Method method;
  std::string param_name;
  double fitted_exponent = 0.0;     // log-log slope of measured counts
  double predicted_exponent = 0.0;  // log-log slope of the table formula over the same sweep
};

// Fits measured-count exponents against one swept parameter (>= 3 points) and
// reports them beside the table's local exponent. `fixed_kappa`/`fixed_d`/
// `fixed_eps` hold the non-swept parameters.
ExponentReport compare(const std::vector<SweepPoint>& sweep, Method method,
                       const std::string& param_name, double fixed_kappa, double fixed_d,
                       double fixed_eps);

}  // namespace logz
