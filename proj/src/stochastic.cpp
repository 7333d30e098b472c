#include "tsgp/stochastic.hpp"

namespace tsgp {

BoundReport svgp_report(const GaussianVariational<double>& q, const SparseModel<double>& model,
                        const NystromCache<double>& c, PenaltyVariant variant) {
  const BoundTerms<double> t = elbo_svgp_uncollapsed(q, model, c, variant);
  BoundReport r;
  r.bound = t.value;
  r.dtc_term = t.fit;
  r.reg_term = t.reg;
  r.kl_term = t.kl;
  r.clamped_count = c.clamped_count;
  if (c.size() > 0) {
    r.resid_min = c.resid.minCoeff();
    r.resid_max = c.resid.maxCoeff();
  }
  if (variant == PenaltyVariant::kNew) {
    const VectorXd v = optimal_v(c, model.noise_var);
    r.v.assign(v.data(), v.data() + v.size());
    if (v.size() > 0) {
      r.v_min = v.minCoeff();
      r.v_max = v.maxCoeff();
    }
  }
  return r;
}

}  // namespace tsgp
