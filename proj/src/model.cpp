#include "rdch/model.hpp"

#include <algorithm>
#include <string>

#include "rdch/error.hpp"
#include "rdch/kernels.hpp"

namespace rdch {

void Model::validate() const {
  potential.validate();
  relax.validate(potential);
  if (eps && !(*eps >= kMinEps && *eps <= kMaxEps)) {
    throw ConfigError("params.eps must lie in [1e-8, 1e-1], got " + std::to_string(*eps));
  }
}

Field Model::mobility_field(const Field& n) const {
  Field out(n.grid());
  const MobilitySpec m = mobility();
  const bool reg = regularized();
  kernels::parallel::transform(n.values(), out.values(),
                               [&](double v) { return eval_mobility(m, v, reg).value; });
  return out;
}

Field Model::psi_plus_d1_field(const Field& n) const {
  Field out(n.grid());
  kernels::parallel::transform(n.values(), out.values(),
                               [this](double v) { return psi_plus(v).d1; });
  return out;
}

Field Model::flux_argument(const Field& n, const Field& phi) const {
  Field g = psi_plus_d1_field(n);
  for (std::size_t i = 0; i < g.size(); ++i) {
    g[i] += phi[i];
  }
  return g;
}

double Model::sup_mobility_times_curvature() const {
  constexpr int kSamples = 4096;
  double best = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    // Dense near 1 where b psi_+'' has its cancellation.
    const double u = static_cast<double>(i) / kSamples;
    const double n = 1.0 - (1.0 - u) * (1.0 - u);
    if (!regularized() && n >= 1.0) {
      continue;
    }
    best = std::max(best, mobility_at(n) * psi_plus(n).d2);
  }
  return best;
}

}  // namespace rdch
