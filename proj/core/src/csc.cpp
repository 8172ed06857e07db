#include "greedynet/csc.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/selection.hpp"

#include <algorithm>
#include <cmath>

namespace greedynet {

CscDictionary::CscDictionary(Matrix local_atoms, Index signal_len)
    : local_(std::move(local_atoms)), signal_len_(signal_len) {
  if (local_.rows() < 1 || local_.cols() < 1) {
    throw ValidationError("csc: empty filter bank");
  }
  if (local_.rows() > signal_len_) {
    throw ValidationError("csc: filter length exceeds signal length");
  }
  if (!local_.allFinite()) {
    throw ValidationError("csc: non-finite filter entries");
  }
  filter_norms_ = local_.colwise().norm().transpose();
  for (Index f = 0; f < filter_norms_.size(); ++f) {
    if (!(filter_norms_[f] > 0.0)) {
      throw ZeroAtom("csc: zero filter " + std::to_string(f));
    }
  }
}

Vector CscDictionary::weights() const {
  Vector w(global_size());
  for (Index f = 0; f < filters(); ++f) {
    w.segment(f * signal_len_, signal_len_).setConstant(1.0 / filter_norms_[f]);
  }
  return w;
}

Vector CscDictionary::correlate(const Eigen::Ref<const Vector>& r) const {
  if (r.size() != signal_len_) {
    throw_shape("csc correlate length", signal_len_, r.size());
  }
  const Index n = filter_len();
  Vector u = Vector::Zero(global_size());
  for (Index f = 0; f < filters(); ++f) {
    for (Index t = 0; t < signal_len_; ++t) {
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += local_(i, f) * r[(t + i) % signal_len_];
      }
      u[f * signal_len_ + t] = acc;
    }
  }
  return u;
}

Vector CscDictionary::synthesize(const Eigen::Ref<const Vector>& alpha) const {
  if (alpha.size() != global_size()) {
    throw_shape("csc synthesize length", global_size(), alpha.size());
  }
  const Index n = filter_len();
  Vector x = Vector::Zero(signal_len_);
  for (Index f = 0; f < filters(); ++f) {
    for (Index t = 0; t < signal_len_; ++t) {
      const double a = alpha[f * signal_len_ + t];
      if (a == 0.0) {
        continue;
      }
      for (Index i = 0; i < n; ++i) {
        x[(t + i) % signal_len_] += a * local_(i, f);
      }
    }
  }
  return x;
}

Matrix CscDictionary::materialize() const {
  Matrix g = Matrix::Zero(signal_len_, global_size());
  for (Index f = 0; f < filters(); ++f) {
    for (Index t = 0; t < signal_len_; ++t) {
      for (Index i = 0; i < filter_len(); ++i) {
        g((t + i) % signal_len_, f * signal_len_ + t) = local_(i, f);
      }
    }
  }
  return g;
}

bool CscDictionary::overlaps(Index a, Index b) const {
  const Index ta = a % signal_len_;
  const Index tb = b % signal_len_;
  const Index d = std::abs(ta - tb);
  return std::min(d, signal_len_ - d) <= filter_len() - 1;
}

Vector gmpt(const Eigen::Ref<const Vector>& u, const CscDictionary& csc) {
  if (u.size() != csc.global_size()) {
    throw_shape("gmpt input length", csc.global_size(), u.size());
  }
  const Index big_n = csc.signal_len();
  const Index reach = csc.filter_len() - 1;
  Vector work = u;
  Vector y = Vector::Zero(u.size());
  for (;;) {
    const Index i0 = argmax_abs(work);
    if (work[i0] == 0.0) {
      break;
    }
    y[i0] = u[i0];
    const Index t0 = i0 % big_n;
    for (Index f = 0; f < csc.filters(); ++f) {
      for (Index d = -reach; d <= reach; ++d) {
        const Index t = ((t0 + d) % big_n + big_n) % big_n;
        work[f * big_n + t] = 0.0;
      }
    }
  }
  return y;
}

PursuitResult gcmp(const CscDictionary& csc, const Vector& x, const PursuitConfig& cfg) {
  const Index total = csc.global_size();
  cfg.validate(total);
  if (x.size() != csc.signal_len()) {
    throw_shape("gcmp signal length", csc.signal_len(), x.size());
  }
  if (!x.allFinite()) {
    throw ValidationError("gcmp: signal has non-finite entries");
  }

  const Vector w = csc.weights();
  PursuitResult result;
  result.code.ambient_dim = total;
  result.residual_norms.push_back(x.norm());

  Vector alpha = Vector::Zero(total);
  Vector r = x;
  double floor = 0.0;
  for (Index k = 1; k <= cfg.max_cardinality && result.residual_norms.front() > 0.0; ++k) {
    const Vector u = csc.correlate(r).cwiseProduct(w);
    const double top = max_abs(u);
    if (k == 1) {
      floor = kCorrelationFloor * top;
    }
    if (top <= floor) {
      break;
    }
    const Vector step = gmpt(u, csc).cwiseProduct(w);
    std::vector<Index> chosen;
    for (Index g = 0; g < total; ++g) {
      if (step[g] != 0.0) {
        chosen.push_back(g);
        if (alpha[g] == 0.0 &&
            std::find(result.code.support.begin(), result.code.support.end(), g) ==
                result.code.support.end()) {
          result.code.support.push_back(g);
        }
      }
    }
    alpha += step;
    r = x - csc.synthesize(alpha);

    const double norm = r.norm();
    result.residual_norms.push_back(norm);
    result.selections.push_back(std::move(chosen));
    result.iterations = k;
    if (cfg.should_stop(k, norm)) {
      break;
    }
  }
  for (Index g : result.code.support) {
    result.code.coeffs.push_back(alpha[g]);
  }
  result.reconstruction = csc.synthesize(alpha);
  return result;
}

} // namespace greedynet
