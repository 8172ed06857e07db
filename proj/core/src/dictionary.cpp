#include "greedynet/dictionary.hpp"

#include "greedynet/errors.hpp"

#include <string>

namespace greedynet {

Dictionary::Dictionary(Matrix atoms, std::optional<Index> dc_index)
    : atoms_(std::move(atoms)), dc_index_(dc_index) {
  if (!atoms_.allFinite()) {
    throw ValidationError("dictionary has non-finite entries");
  }
  if (dc_index_ && (*dc_index_ < 0 || *dc_index_ >= atoms_.cols())) {
    throw ValidationError("dictionary dc_index out of range");
  }
  norms_ = atoms_.colwise().norm().transpose();
  weights_.resize(norms_.size());
  for (Index i = 0; i < norms_.size(); ++i) {
    if (!(norms_[i] > 0.0)) {
      throw ZeroAtom("dictionary atom " + std::to_string(i) + " has zero norm");
    }
    weights_[i] = 1.0 / norms_[i];
  }
  if (dc_index_) {
    weights_[*dc_index_] = 1.0;
  }
}

Vector Dictionary::weighted_correlations(const Eigen::Ref<const Vector>& r) const {
  Vector u = atoms_.transpose() * r;
  return u.cwiseProduct(weights_);
}

Vector SparseCode::to_dense() const {
  Vector dense = Vector::Zero(ambient_dim);
  for (std::size_t k = 0; k < support.size(); ++k) {
    dense[support[k]] += coeffs[k];
  }
  return dense;
}

} // namespace greedynet
