#include "tsgp/nonconjugate.hpp"

namespace tsgp {

double expected_poisson_loglik(const MarginalQfi<double>& m, double y, ExpectationMethod method,
                               int order) {
  if (method == ExpectationMethod::kClosedForm) return expected_poisson_loglik(m, y);
  check_count(y);
  if (m.variance < 0.0) throw InputError("marginal variance must be >= 0");
  return gaussian_expectation([y](double f) { return poisson_log_pmf(y, f); }, m.mean, m.variance,
                              order);
}

BoundReport nonconjugate_report(const GaussianVariational<double>& q,
                                const SparseModel<double>& model, const NystromCache<double>& c,
                                ScalarV v) {
  const BoundTerms<double> t = elbo_nonconjugate(q, model, c, v.v);
  BoundReport r;
  r.bound = t.value;
  r.dtc_term = t.fit;
  r.reg_term = t.reg;
  r.kl_term = t.kl;
  r.v_min = r.v_max = v.v;
  r.clamped_count = c.clamped_count;
  if (c.size() > 0) {
    r.resid_min = c.resid.minCoeff();
    r.resid_max = c.resid.maxCoeff();
  }
  return r;
}

double poisson_log_predictive(double y, double mean, double var, int order) {
  check_count(y);
  return log_gaussian_expectation([y](double f) { return poisson_log_pmf(y, f); }, mean, var, order);
}

}  // namespace tsgp
