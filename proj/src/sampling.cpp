#include "imlab/sampling.h"

namespace imlab {

Vec Sampler::direction(const Vec& weights) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec d(weights.size());
  double norm = 0.0;
  while (norm < 1e-12) {
    for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = normal(gen_) / static_cast<double>(k + 1);
    norm = d.cwiseProduct(weights).norm();
  }
  return d / norm;
}

}  // namespace imlab
