#include "greedynet/lista.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/units.hpp"

#include <cmath>

namespace greedynet {

double spectral_norm_squared(const Matrix& dict, Index iterations) {
  Vector v = Vector::Constant(dict.cols(), 1.0 / std::sqrt(static_cast<double>(dict.cols())));
  double lambda = 0.0;
  for (Index it = 0; it < iterations; ++it) {
    const Vector next = dict.transpose() * (dict * v);
    lambda = next.norm();
    if (lambda == 0.0) {
      return 0.0;
    }
    v = next / lambda;
  }
  return lambda;
}

ListaParams ListaParams::from_dictionary(const Matrix& dict, Index layers, double lambda) {
  if (layers < 1) {
    throw ValidationError("lista: at least one layer required");
  }
  if (lambda < 0.0) {
    throw ValidationError("lista: lambda must be non-negative");
  }
  const double c = 1.05 * spectral_norm_squared(dict);
  if (!(c > 0.0)) {
    throw ValidationError("lista: dictionary has zero spectral norm");
  }
  ListaParams p;
  p.w = dict.transpose() / c;
  p.d1 = dict;
  p.d2 = dict;
  p.theta = Vector::Constant(dict.cols(), lambda / c);
  p.layers = layers;
  return p;
}

void ListaParams::validate() const {
  if (layers < 1) {
    throw ValidationError("lista: at least one layer required");
  }
  const Index n = d1.rows();
  const Index m = d1.cols();
  if (w.rows() != m || w.cols() != n || d2.rows() != n || d2.cols() != m || theta.size() != m) {
    throw ShapeMismatch("lista parameter shapes are inconsistent");
  }
  if ((theta.array() < 0.0).any()) {
    throw ValidationError("lista: thresholds must be non-negative");
  }
}

ListaOutput lista_forward(const ListaParams& params, const Vector& x, ListaTape* tape) {
  params.validate();
  if (x.size() != params.d1.rows()) {
    throw_shape("lista input length", params.d1.rows(), x.size());
  }
  Vector alpha = Vector::Zero(params.d1.cols());
  if (tape) {
    tape->x = x;
    tape->pre.clear();
    tape->codes.assign(1, alpha);
  }
  for (Index t = 0; t < params.layers; ++t) {
    const Vector v = alpha + params.w * (x - params.d1 * alpha);
    alpha = soft_threshold(v, params.theta);
    if (tape) {
      tape->pre.push_back(v);
      tape->codes.push_back(alpha);
    }
  }
  return {alpha, params.d2 * alpha};
}

ListaGradients ListaGradients::zeros_like(const ListaParams& params) {
  return {Matrix::Zero(params.w.rows(), params.w.cols()),
          Matrix::Zero(params.d1.rows(), params.d1.cols()),
          Matrix::Zero(params.d2.rows(), params.d2.cols()), Vector::Zero(params.theta.size())};
}

void lista_backward_accumulate(const ListaParams& params, const ListaTape& tape,
                               const Vector& code_grad, const Vector& recon_grad,
                               ListaGradients& grads) {
  if (tape.codes.size() != static_cast<std::size_t>(params.layers) + 1) {
    throw TapeMissing("lista_backward: tape does not match the layer count");
  }
  const Index m = params.d1.cols();
  Vector alpha_bar = Vector::Zero(m);
  if (code_grad.size() > 0) {
    alpha_bar += code_grad;
  }
  if (recon_grad.size() > 0) {
    grads.d2.noalias() += recon_grad * tape.codes.back().transpose();
    alpha_bar.noalias() += params.d2.transpose() * recon_grad;
  }
  for (Index t = params.layers; t >= 1; --t) {
    const Vector& v = tape.pre[static_cast<std::size_t>(t - 1)];
    const Vector& prev = tape.codes[static_cast<std::size_t>(t - 1)];
    Vector v_bar = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) {
      if (std::abs(v[i]) > params.theta[i]) {
        v_bar[i] = alpha_bar[i];
        grads.theta[i] -= (v[i] > 0.0 ? 1.0 : -1.0) * alpha_bar[i];
      }
    }
    // v = α + W(x − D1·α).
    const Vector resid = tape.x - params.d1 * prev;
    grads.w.noalias() += v_bar * resid.transpose();
    const Vector wt_vbar = params.w.transpose() * v_bar;
    grads.d1.noalias() -= wt_vbar * prev.transpose();
    alpha_bar = v_bar - params.d1.transpose() * wt_vbar;
  }
}

} // namespace greedynet
