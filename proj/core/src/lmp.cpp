#include "greedynet/lmp.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/selection.hpp"

#include <cmath>

namespace greedynet {

UnrolledTrace lmp_forward(const LgmParams& params, const Vector& x, const PursuitConfig& cfg,
                          GradientTape* tape) {
  const Index m = params.size();
  cfg.validate(m, true);
  if (x.size() != params.signal_dim()) {
    throw_shape("l-mp input length", params.signal_dim(), x.size());
  }
  if (!x.allFinite()) {
    throw ValidationError("l-mp input has non-finite entries");
  }

  UnrolledTrace trace;
  trace.code = Vector::Zero(m);
  trace.output = Vector::Zero(x.size());
  std::vector<Vector> codes{trace.code};

  const Vector& w = params.analysis.weights();
  double floor = 0.0;
  const bool nonzero = x.norm() > 0.0;
  for (Index k = 1; k <= cfg.max_cardinality && nonzero; ++k) {
    const Vector r = x - trace.output;
    const Vector u = params.analysis.weighted_correlations(r);
    const Index chosen = argmax_abs(u);
    const double top = std::abs(u[chosen]);
    if (k == 1) {
      floor = kCorrelationFloor * top;
    }
    if (top <= floor) {
      break;
    }
    double runner_up = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (i != chosen) {
        runner_up = std::max(runner_up, std::abs(u[i]));
      }
    }
    trace.code[chosen] += w[chosen] * u[chosen];
    trace.output = params.synthesis.atoms() * trace.code;
    codes.push_back(trace.code);
    trace.selected.push_back(chosen);
    trace.margins.push_back(top - runner_up);
    trace.reconstructions.push_back(trace.output);
    trace.residuals.push_back(x - trace.output);
    if (cfg.should_stop(k, trace.residuals.back().norm())) {
      break;
    }
  }

  if (tape) {
    *tape = GradientTape{};
    tape->kind = GradientTape::Kind::Lmp;
    tape->params = &params;
    tape->x = x;
    tape->path = trace.selected;
    tape->dense_codes = std::move(codes);
    tape->unrolled = trace.layers();
    tape->output = trace.output;
  }
  return trace;
}

void lmp_backward_accumulate(const GradientTape& tape, const Vector& output_grad,
                             LgmGradients& grads) {
  if (tape.kind != GradientTape::Kind::Lmp || !tape.params) {
    throw TapeMissing("lmp_backward: tape holds no L-MP pass");
  }
  const LgmParams& params = *tape.params;
  const Index n = params.signal_dim();
  if (output_grad.size() != n) {
    throw_shape("lmp_backward output gradient", n, output_grad.size());
  }
  if (grads.analysis.rows() != n || grads.analysis.cols() != params.size()) {
    grads = LgmGradients::zeros_like(params, nullptr);
  }
  const auto k_real = static_cast<Index>(tape.path.size());
  if (k_real == 0) {
    return;
  }
  const Matrix& d2 = params.synthesis.atoms();
  const auto dc = params.dc_index();

  // x̂ = D₂α_K.
  grads.synthesis.noalias() += output_grad * tape.dense_codes.back().transpose();
  Vector alpha_bar = d2.transpose() * output_grad;

  for (Index k = k_real; k >= 1; --k) {
    const Index i = tape.path[static_cast<std::size_t>(k - 1)];
    const Vector& prev = tape.dense_codes[static_cast<std::size_t>(k - 1)];
    const Vector r = tape.x - d2 * prev;
    const auto d = params.analysis.atom(i);
    const double a_bar = alpha_bar[i];
    if (a_bar == 0.0) {
      continue;
    }
    // a = w²·dᵀr with w = 1/‖d‖ (w = 1 for the DC atom).
    const double proj = d.dot(r);
    Vector r_bar;
    if (dc && *dc == i) {
      grads.analysis.col(i) += a_bar * r;
      r_bar = a_bar * d;
    } else {
      const double w2 = 1.0 / d.squaredNorm();
      grads.analysis.col(i) += a_bar * (w2 * r - 2.0 * proj * w2 * w2 * d);
      r_bar = a_bar * w2 * d;
    }
    // r = x − D₂α_{k−1}.
    grads.synthesis.noalias() -= r_bar * prev.transpose();
    alpha_bar.noalias() -= d2.transpose() * r_bar;
  }

  if (dc) {
    grads.dc_scale_analysis += grads.analysis.col(*dc).sum();
    grads.dc_scale_synthesis += grads.synthesis.col(*dc).sum();
    grads.analysis.col(*dc).setZero();
    grads.synthesis.col(*dc).setZero();
  }
}

LgmGradients lmp_backward(const GradientTape& tape, const Vector& output_grad) {
  if (tape.kind != GradientTape::Kind::Lmp || !tape.params) {
    throw TapeMissing("lmp_backward: tape holds no L-MP pass");
  }
  LgmGradients grads = LgmGradients::zeros_like(*tape.params, nullptr);
  lmp_backward_accumulate(tape, output_grad, grads);
  return grads;
}

} // namespace greedynet
