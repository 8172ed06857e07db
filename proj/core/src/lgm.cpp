#include "greedynet/lgm.hpp"

#include "greedynet/errors.hpp"
#include "greedynet/random.hpp"
#include "greedynet/selection.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace greedynet {

LgmParams::LgmParams(Dictionary analysis_dict, Dictionary synthesis_dict)
    : analysis(std::move(analysis_dict)), synthesis(std::move(synthesis_dict)) {
  if (analysis.signal_dim() != synthesis.signal_dim() || analysis.size() != synthesis.size()) {
    throw ShapeMismatch("analysis and synthesis dictionaries differ in shape");
  }
  if (analysis.dc_index() != synthesis.dc_index()) {
    throw ShapeMismatch("analysis and synthesis dictionaries disagree on the DC atom");
  }
  if (auto dc = analysis.dc_index()) {
    dc_scale_analysis = analysis.atoms()(0, *dc);
    dc_scale_synthesis = synthesis.atoms()(0, *dc);
  }
}

LgmParams LgmParams::tied(const Matrix& atoms) {
  return LgmParams(Dictionary(atoms), Dictionary(atoms));
}

LgmParams LgmParams::with_dc(const Matrix& base, double dc_scale) {
  Matrix full(base.rows(), base.cols() + 1);
  full.leftCols(base.cols()) = base;
  full.col(base.cols()).setConstant(dc_scale);
  return LgmParams(Dictionary(full, base.cols()), Dictionary(full, base.cols()));
}

void LgmParams::assign(Matrix analysis_atoms, Matrix synthesis_atoms) {
  const auto dc = dc_index();
  if (dc) {
    analysis_atoms.col(*dc).setConstant(dc_scale_analysis);
    synthesis_atoms.col(*dc).setConstant(dc_scale_synthesis);
  }
  *this = LgmParams(Dictionary(std::move(analysis_atoms), dc),
                    Dictionary(std::move(synthesis_atoms), dc));
}

Index UnrolledTrace::cardinality() const {
  Index count = 0;
  for (Index i = 0; i < code.size(); ++i) {
    count += code[i] != 0.0 ? 1 : 0;
  }
  return count;
}

LgmGradients LgmGradients::zeros_like(const LgmParams& params, const AttentionParams* attention) {
  LgmGradients g;
  g.analysis = Matrix::Zero(params.signal_dim(), params.size());
  g.synthesis = Matrix::Zero(params.signal_dim(), params.size());
  if (attention) {
    g.attention = AttentionParams::zeros(attention->signal_dim(), attention->layers());
  }
  return g;
}

LgmGradients& LgmGradients::operator+=(const LgmGradients& other) {
  analysis += other.analysis;
  synthesis += other.synthesis;
  dc_scale_analysis += other.dc_scale_analysis;
  dc_scale_synthesis += other.dc_scale_synthesis;
  if (attention && other.attention) {
    *attention += *other.attention;
  }
  return *this;
}

LgmGradients& LgmGradients::operator*=(double scale) {
  analysis *= scale;
  synthesis *= scale;
  dc_scale_analysis *= scale;
  dc_scale_synthesis *= scale;
  if (attention) {
    *attention *= scale;
  }
  return *this;
}

namespace {

// Grows the analysis/synthesis sub-dictionaries and the Cholesky factor of the
// analysis Gram matrix one atom at a time. Forward and replay both go through
// add(), which keeps their arithmetic identical.
class LayerStack {
public:
  LayerStack(const LgmParams& params, const Vector& x, Index capacity)
      : params_(params), x_(x), sub_a_(x.size(), capacity), sub_b_(x.size(), capacity),
        rhs_(capacity), chol_(capacity) {}

  // Throws NotPositiveDefinite (state unchanged) if the atom is dependent.
  void add(Index i) {
    const Index k = chol_.order();
    const auto d = params_.analysis.atom(i);
    const Vector col = sub_a_.leftCols(k).transpose() * d;
    const double norm = params_.analysis.atom_norms()[i];
    chol_.append(col, norm * norm);
    sub_a_.col(k) = d;
    sub_b_.col(k) = params_.synthesis.atom(i);
    rhs_[k] = d.dot(x_);
    coeffs_.push_back(chol_.solve(rhs_.head(k + 1)));
    recons_.push_back(sub_b_.leftCols(k + 1) * coeffs_.back());
    residuals_.push_back(x_ - sub_a_.leftCols(k + 1) * coeffs_.back());
    path_.push_back(i);
  }

  Index order() const { return chol_.order(); }
  const std::vector<Vector>& coeffs() const { return coeffs_; }
  const std::vector<Vector>& reconstructions() const { return recons_; }
  const std::vector<Vector>& residuals() const { return residuals_; }
  const std::vector<Index>& path() const { return path_; }

  void record(GradientTape& tape) const {
    const Index k = order();
    tape.sub_analysis = sub_a_.leftCols(k);
    tape.sub_synthesis = sub_b_.leftCols(k);
    tape.chol_lower = chol_.lower();
    tape.coeffs = coeffs_;
    tape.reconstructions = recons_;
    tape.path = path_;
  }

private:
  const LgmParams& params_;
  const Vector& x_;
  Matrix sub_a_;
  Matrix sub_b_;
  Vector rhs_;
  CholFactor chol_;
  std::vector<Vector> coeffs_;
  std::vector<Vector> recons_;
  std::vector<Vector> residuals_;
  std::vector<Index> path_;
};

void check_input(const LgmParams& params, const Vector& x) {
  if (x.size() != params.signal_dim()) {
    throw_shape("unrolled input length", params.signal_dim(), x.size());
  }
  if (!x.allFinite()) {
    throw ValidationError("unrolled input has non-finite entries");
  }
}

void check_attention(const AttentionParams& att, Index n, Index s) {
  if (att.signal_dim() != n || att.layers() != s) {
    throw ShapeMismatch("attention network built for " + std::to_string(att.layers()) +
                        " layers of dim " + std::to_string(att.signal_dim()) + ", model has " +
                        std::to_string(s) + " of dim " + std::to_string(n));
  }
}

Vector embed(const std::vector<Index>& path, const Vector& coeffs, Index m) {
  Vector dense = Vector::Zero(m);
  for (Index j = 0; j < coeffs.size(); ++j) {
    dense[path[static_cast<std::size_t>(j)]] += coeffs[j];
  }
  return dense;
}

// Fills output, code and (with attention) weights from the executed layers.
void finish(const LayerStack& stack, const Vector& x, Index m, const AttentionParams* att,
            Index unrolled, UnrolledTrace& trace, AttentionCache* cache) {
  const Index k_real = stack.order();
  if (k_real == 0) {
    return;
  }
  if (!att) {
    trace.output = stack.reconstructions().back();
    trace.code = embed(stack.path(), stack.coeffs().back(), m);
    return;
  }
  Matrix residuals(unrolled, x.size());
  for (Index j = 0; j < unrolled; ++j) {
    const auto src = static_cast<std::size_t>(std::min(j, k_real - 1));
    residuals.row(j) = stack.residuals()[src].transpose();
  }
  trace.weights = attention_forward(residuals, *att, cache);
  trace.output = Vector::Zero(x.size());
  trace.code = Vector::Zero(m);
  for (Index j = 0; j < unrolled; ++j) {
    const auto src = static_cast<std::size_t>(std::min(j, k_real - 1));
    trace.output += trace.weights[j] * stack.reconstructions()[src];
    trace.code += trace.weights[j] * embed(stack.path(), stack.coeffs()[src], m);
  }
}

} // namespace

UnrolledTrace lgm_forward(const LgmParams& params, const Vector& x, const PursuitConfig& cfg,
                          const LgmOptions& opts, GradientTape* tape) {
  const Index m = params.size();
  cfg.validate(m, true);
  check_input(params, x);
  if (opts.policy.random) {
    RandConfig{opts.policy.tau_factor, 1, opts.policy.seed}.validate();
  }
  const Index s = cfg.max_cardinality;
  const AttentionParams* att = opts.attention;
  if (att) {
    check_attention(*att, params.signal_dim(), s);
  }

  UnrolledTrace trace;
  trace.code = Vector::Zero(m);
  trace.output = Vector::Zero(x.size());

  LayerStack stack(params, x, std::max<Index>(s, 1));
  Rng rng(opts.policy.seed);
  auto select = [&](const Vector& u, std::span<const std::uint8_t> mask) {
    return opts.policy.random ? sample_thresholded(u, mask, opts.policy.tau_factor, rng)
                              : argmax_abs(u, mask);
  };

  std::vector<std::uint8_t> mask(static_cast<std::size_t>(m), 0);
  double floor = 0.0;
  const bool nonzero = x.norm() > 0.0;
  for (Index k = 1; k <= s && nonzero; ++k) {
    const Vector u =
        params.analysis.weighted_correlations(k == 1 ? x : stack.residuals().back());
    const double top = max_abs(u, mask);
    if (k == 1) {
      floor = kCorrelationFloor * top;
    }
    if (top <= floor) {
      break;
    }
    Index chosen = select(u, mask);
    try {
      stack.add(chosen);
    } catch (const NotPositiveDefinite&) {
      mask[static_cast<std::size_t>(chosen)] = 1;
      chosen = select(u, mask);
      if (chosen < 0) {
        throw RankDeficientSupport("lgm: no independent atom left to add");
      }
      try {
        stack.add(chosen);
      } catch (const NotPositiveDefinite& e) {
        throw RankDeficientSupport(std::string("lgm: ") + e.what());
      }
    }
    mask[static_cast<std::size_t>(chosen)] = 1;
    double runner_up = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (mask[static_cast<std::size_t>(i)] == 0) {
        runner_up = std::max(runner_up, std::abs(u[i]));
      }
    }
    trace.selected.push_back(chosen);
    trace.margins.push_back(std::abs(u[chosen]) - runner_up);
    trace.reconstructions.push_back(stack.reconstructions().back());
    trace.residuals.push_back(stack.residuals().back());
    if (!att && cfg.should_stop(k, trace.residuals.back().norm())) {
      break;
    }
  }

  const Index k_real = stack.order();
  if (att && k_real > 0) {
    for (Index j = k_real; j < s; ++j) {
      trace.reconstructions.push_back(trace.reconstructions.back());
      trace.residuals.push_back(trace.residuals.back());
    }
  }
  finish(stack, x, m, att, s, trace, tape ? &tape->attention_cache : nullptr);

  if (tape) {
    tape->kind = GradientTape::Kind::Lgm;
    tape->params = &params;
    tape->attention = att;
    tape->x = x;
    stack.record(*tape);
    tape->unrolled = att ? s : k_real;
    tape->dense_codes.clear();
    tape->output = trace.output;
  }
  return trace;
}

Vector lgm_replay(const GradientTape& tape) {
  if (tape.kind != GradientTape::Kind::Lgm || !tape.params) {
    throw TapeMissing("lgm_replay: tape holds no LGM pass");
  }
  const LgmParams& params = *tape.params;
  LayerStack stack(params, tape.x, std::max<Index>(static_cast<Index>(tape.path.size()), 1));
  for (Index i : tape.path) {
    stack.add(i);
  }
  UnrolledTrace trace;
  trace.output = Vector::Zero(tape.x.size());
  finish(stack, tape.x, params.size(), tape.attention, tape.unrolled, trace, nullptr);
  return trace.output;
}

void lgm_backward_accumulate(const GradientTape& tape, const Vector& output_grad,
                             LgmGradients& grads) {
  if (tape.kind != GradientTape::Kind::Lgm || !tape.params) {
    throw TapeMissing("lgm_backward: tape holds no LGM pass");
  }
  const LgmParams& params = *tape.params;
  const Index n = params.signal_dim();
  if (output_grad.size() != n) {
    throw_shape("lgm_backward output gradient", n, output_grad.size());
  }
  if (grads.analysis.rows() != n || grads.analysis.cols() != params.size()) {
    grads = LgmGradients::zeros_like(params, tape.attention);
  }
  const auto k_real = static_cast<Index>(tape.path.size());
  if (k_real == 0) {
    return;
  }

  // Per layer: gradient on the synthesis output B_S·α and on the residual
  // x − A_S·α.
  std::vector<Vector> layer_grad(static_cast<std::size_t>(k_real), Vector::Zero(n));
  std::vector<Vector> residual_grad(static_cast<std::size_t>(k_real), Vector::Zero(n));
  if (tape.attention) {
    if (!grads.attention) {
      grads.attention = AttentionParams::zeros(tape.attention->signal_dim(),
                                               tape.attention->layers());
    }
    const Vector& p = tape.attention_cache.weights;
    Vector grad_p(tape.unrolled);
    for (Index j = 0; j < tape.unrolled; ++j) {
      const auto src = static_cast<std::size_t>(std::min(j, k_real - 1));
      grad_p[j] = tape.reconstructions[src].dot(output_grad);
    }
    const Matrix grad_r =
        attention_backward(*tape.attention, tape.attention_cache, grad_p, *grads.attention);
    for (Index j = 0; j < tape.unrolled; ++j) {
      const auto src = static_cast<std::size_t>(std::min(j, k_real - 1));
      layer_grad[src] += p[j] * output_grad;
      residual_grad[src] += grad_r.row(j).transpose();
    }
  } else {
    layer_grad.back() = output_grad;
  }

  const Vector& x = tape.x;
  for (Index k = 1; k <= k_real; ++k) {
    const Vector& g = layer_grad[static_cast<std::size_t>(k - 1)];
    const Vector& g_res = residual_grad[static_cast<std::size_t>(k - 1)];
    if (g.isZero(0.0) && g_res.isZero(0.0)) {
      continue;
    }
    const Vector& alpha = tape.coeffs[static_cast<std::size_t>(k - 1)];
    const auto sub_a = tape.sub_analysis.leftCols(k);
    const auto sub_b = tape.sub_synthesis.leftCols(k);
    const Matrix l_inv = tape.chol_lower.topLeftCorner(k, k)
                             .triangularView<Eigen::Lower>()
                             .solve(Matrix::Identity(k, k));
    const Matrix gram_inv = l_inv.transpose() * l_inv;
    const Vector c = sub_a.transpose() * x;

    // x̂ = B α, r = x − A α, α = G⁻¹ c, G = AᵀA, c = Aᵀx.
    const Vector alpha_bar = sub_b.transpose() * g - sub_a.transpose() * g_res;
    const Vector z = gram_inv * alpha_bar;
    const Matrix gram_bar = inverse_gradient(gram_inv, alpha_bar * c.transpose());
    const Matrix a_bar = sub_a * (gram_bar + gram_bar.transpose()) + x * z.transpose();
    for (Index j = 0; j < k; ++j) {
      const Index col = tape.path[static_cast<std::size_t>(j)];
      grads.synthesis.col(col) += alpha[j] * g;
      grads.analysis.col(col) += a_bar.col(j) - alpha[j] * g_res;
    }
  }

  if (auto dc = params.dc_index()) {
    grads.dc_scale_analysis += grads.analysis.col(*dc).sum();
    grads.dc_scale_synthesis += grads.synthesis.col(*dc).sum();
    grads.analysis.col(*dc).setZero();
    grads.synthesis.col(*dc).setZero();
  }
}

LgmGradients lgm_backward(const GradientTape& tape, const Vector& output_grad) {
  if (tape.kind != GradientTape::Kind::Lgm || !tape.params) {
    throw TapeMissing("lgm_backward: tape holds no LGM pass");
  }
  LgmGradients grads = LgmGradients::zeros_like(*tape.params, tape.attention);
  lgm_backward_accumulate(tape, output_grad, grads);
  return grads;
}

LgmMmseResult lgm_mmse(const LgmParams& params, const Vector& x, const PursuitConfig& cfg,
                       const LgmMmseOptions& opts, std::vector<GradientTape>* tapes) {
  if (opts.draws < 1) {
    throw ValidationError("lgm_mmse: draws must be at least 1");
  }
  LgmMmseResult res;
  res.terms = opts.draws + (opts.include_map ? 1 : 0);
  res.output = Vector::Zero(params.signal_dim());
  res.code = Vector::Zero(params.size());
  if (tapes) {
    tapes->assign(static_cast<std::size_t>(res.terms), GradientTape{});
  }
  for (Index i = 0; i < res.terms; ++i) {
    LgmOptions run;
    if (i < opts.draws) {
      run.policy = {true, opts.tau_factor, derive_seed(opts.seed, static_cast<std::uint64_t>(i))};
    }
    GradientTape* tape = tapes ? &(*tapes)[static_cast<std::size_t>(i)] : nullptr;
    const UnrolledTrace t = lgm_forward(params, x, cfg, run, tape);
    res.output += t.output;
    res.code += t.code;
  }
  res.output /= static_cast<double>(res.terms);
  res.code /= static_cast<double>(res.terms);
  return res;
}

} // namespace greedynet
