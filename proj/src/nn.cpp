#include "nn.hpp"

#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace ganlink::nn {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kRelu: return "relu";
    case Activation::kSoftmax: return "softmax";
    case Activation::kBoundedUnit: return "bounded_unit";
  }
  return "?";
}

namespace {

void validate_specs(std::span<const LayerSpec> specs) {
  if (specs.empty()) throw ShapeError("DenseNet: at least one layer required");
  for (size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (s.input_width <= 0 || s.output_width <= 0)
      throw ShapeError("DenseNet: layer widths must be positive");
    if (i > 0 && specs[i - 1].output_width != s.input_width) {
      std::ostringstream os;
      os << "DenseNet: layer " << i << " input width " << s.input_width
         << " does not match previous output width " << specs[i - 1].output_width;
      throw ShapeError(os.str());
    }
    if (s.activation == Activation::kSoftmax && i + 1 != specs.size())
      throw ShapeError("DenseNet: softmax is only allowed as the final layer");
  }
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void apply_activation(Activation act, Matrix& z) {
  switch (act) {
    case Activation::kLinear:
      return;
    case Activation::kRelu:
      z = z.cwiseMax(0.0);
      return;
    case Activation::kBoundedUnit:
      z = z.unaryExpr([](double v) { return sigmoid(v); });
      return;
    case Activation::kSoftmax:
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        const double m = z.row(r).maxCoeff();
        z.row(r) = (z.row(r).array() - m).exp();
        z.row(r) /= z.row(r).sum();
      }
      return;
  }
}

// delta := dL/d(post-activation) -> dL/d(pre-activation), using cached post.
void apply_activation_jacobian(Activation act, const Matrix& post, Matrix& delta) {
  switch (act) {
    case Activation::kLinear:
      return;
    case Activation::kRelu:
      // post > 0 iff pre > 0; subgradient at 0 is 0.
      delta.array() *= (post.array() > 0.0).cast<double>();
      return;
    case Activation::kBoundedUnit:
      delta.array() *= post.array() * (1.0 - post.array());
      return;
    case Activation::kSoftmax:
      for (Eigen::Index r = 0; r < delta.rows(); ++r) {
        const double dot = delta.row(r).dot(post.row(r));
        delta.row(r) = post.row(r).array() * (delta.row(r).array() - dot);
      }
      return;
  }
}

}  // namespace

void DenseNet::init_layout(std::span<const LayerSpec> specs) {
  validate_specs(specs);
  specs_.assign(specs.begin(), specs.end());
  std::ptrdiff_t off = 0;
  for (const auto& s : specs_) {
    w_off_.push_back(off);
    off += static_cast<std::ptrdiff_t>(s.output_width) * s.input_width;
    b_off_.push_back(off);
    off += s.output_width;
  }
  params_.assign(static_cast<size_t>(off), 0.0);
}

DenseNet DenseNet::create(std::span<const LayerSpec> specs, Rng& rng) {
  DenseNet net = create_zero(specs);
  for (int l = 0; l < net.layer_count(); ++l) {
    const auto& s = net.specs_[static_cast<size_t>(l)];
    const double a = std::sqrt(6.0 / (s.input_width + s.output_width));
    auto w = net.weights(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-a, a);
  }
  return net;
}

DenseNet DenseNet::create_zero(std::span<const LayerSpec> specs) {
  DenseNet net;
  net.init_layout(specs);
  return net;
}

bool DenseNet::all_finite() const {
  for (double p : params_)
    if (!std::isfinite(p)) return false;
  return true;
}

RowMajorMap DenseNet::weights(int layer) {
  const auto& s = specs_[static_cast<size_t>(layer)];
  return RowMajorMap(params_.data() + w_off_[static_cast<size_t>(layer)], s.output_width,
                     s.input_width);
}

ConstRowMajorMap DenseNet::weights(int layer) const {
  const auto& s = specs_[static_cast<size_t>(layer)];
  return ConstRowMajorMap(params_.data() + w_off_[static_cast<size_t>(layer)], s.output_width,
                          s.input_width);
}

Eigen::Map<Vector> DenseNet::biases(int layer) {
  return {params_.data() + b_off_[static_cast<size_t>(layer)],
          specs_[static_cast<size_t>(layer)].output_width};
}

Eigen::Map<const Vector> DenseNet::biases(int layer) const {
  return {params_.data() + b_off_[static_cast<size_t>(layer)],
          specs_[static_cast<size_t>(layer)].output_width};
}

Matrix DenseNet::forward(const Matrix& X, ForwardCache* cache) const {
  if (X.cols() != input_width()) {
    std::ostringstream os;
    os << "DenseNet::forward: input width " << X.cols() << ", expected " << input_width();
    throw ShapeError(os.str());
  }
  if (cache) {
    cache->inputs.clear();
    cache->outputs.clear();
  }
  Matrix h = X;
  for (int l = 0; l < layer_count(); ++l) {
    if (cache) cache->inputs.push_back(h);
    Matrix z = h * weights(l).transpose();
    z.rowwise() += biases(l).transpose();
    apply_activation(specs_[static_cast<size_t>(l)].activation, z);
    h = std::move(z);
    if (cache) cache->outputs.push_back(h);
  }
  return h;
}

std::vector<double> DenseNet::forward1(std::span<const double> x, ForwardCache* cache) const {
  Matrix X(1, static_cast<Eigen::Index>(x.size()));
  for (size_t i = 0; i < x.size(); ++i) X(0, static_cast<Eigen::Index>(i)) = x[i];
  Matrix Y = forward(X, cache);
  return {Y.data(), Y.data() + Y.size()};
}

void DenseNet::backward(const ForwardCache& cache, const Matrix& dY, std::span<double> grads,
                        Matrix* dX) const {
  if (!cache.valid() || cache.outputs.size() != static_cast<size_t>(layer_count()))
    throw UsageError("DenseNet::backward: cache does not match this network");
  Matrix delta = dY;
  apply_activation_jacobian(specs_.back().activation, cache.outputs.back(), delta);
  backward_impl(cache, std::move(delta), grads, dX);
}

void DenseNet::backward_pre(const ForwardCache& cache, const Matrix& dZ, std::span<double> grads,
                            Matrix* dX) const {
  if (!cache.valid() || cache.outputs.size() != static_cast<size_t>(layer_count()))
    throw UsageError("DenseNet::backward_pre: cache does not match this network");
  backward_impl(cache, dZ, grads, dX);
}

void DenseNet::backward_impl(const ForwardCache& cache, Matrix delta, std::span<double> grads,
                             Matrix* dX) const {
  if (grads.size() != params_.size())
    throw ShapeError("DenseNet::backward: gradient buffer size mismatch");
  if (delta.rows() != cache.inputs.front().rows() || delta.cols() != output_width())
    throw ShapeError("DenseNet::backward: loss gradient shape mismatch");
  for (int l = layer_count() - 1; l >= 0; --l) {
    const auto& s = specs_[static_cast<size_t>(l)];
    const Matrix& in = cache.inputs[static_cast<size_t>(l)];
    RowMajorMap gw(grads.data() + w_off_[static_cast<size_t>(l)], s.output_width, s.input_width);
    Eigen::Map<Vector> gb(grads.data() + b_off_[static_cast<size_t>(l)], s.output_width);
    gw.noalias() += delta.transpose() * in;
    gb.noalias() += delta.colwise().sum().transpose();
    if (l == 0) {
      if (dX) dX->noalias() = delta * weights(0);
      break;
    }
    Matrix next = delta * weights(l);
    apply_activation_jacobian(specs_[static_cast<size_t>(l - 1)].activation,
                              cache.outputs[static_cast<size_t>(l - 1)], next);
    delta = std::move(next);
  }
}

// --- losses ---------------------------------------------------------------

double cross_entropy(std::span<const double> label, std::span<const double> prediction) {
  if (label.size() != prediction.size())
    throw ShapeError("cross_entropy: label/prediction length mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < label.size(); ++i)
    acc -= label[i] * std::log(std::max(prediction[i], kLogClamp));
  return acc;
}

void cross_entropy_grad(std::span<const double> label, std::span<const double> prediction,
                        std::span<double> d_prediction) {
  if (label.size() != prediction.size() || d_prediction.size() != label.size())
    throw ShapeError("cross_entropy_grad: length mismatch");
  for (size_t i = 0; i < label.size(); ++i)
    d_prediction[i] = -label[i] / std::max(prediction[i], kLogClamp);
}

double batch_cross_entropy(const Matrix& labels, const Matrix& probs) {
  if (labels.rows() != probs.rows() || labels.cols() != probs.cols())
    throw ShapeError("batch_cross_entropy: shape mismatch");
  if (labels.rows() == 0) throw UsageError("batch_cross_entropy: empty batch");
  const auto clamped = probs.array().max(kLogClamp);
  return -(labels.array() * clamped.log()).sum() / static_cast<double>(labels.rows());
}

Matrix softmax_xent_grad_pre(const Matrix& labels, const Matrix& probs) {
  if (labels.rows() != probs.rows() || labels.cols() != probs.cols())
    throw ShapeError("softmax_xent_grad_pre: shape mismatch");
  return (probs - labels) / static_cast<double>(labels.rows());
}

// --- Adam ------------------------------------------------------------------

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               double learning_rate) {
  const auto n = static_cast<Eigen::Index>(params.size());
  if (static_cast<Eigen::Index>(grads.size()) != n)
    throw ShapeError("adam_step: params/grads size mismatch");
  if (state.first_moment.size() != n || state.second_moment.size() != n)
    throw ShapeError("adam_step: state size mismatch");
  if (!(learning_rate > 0.0)) throw ConfigError("adam_step: learning rate must be positive");
  for (double g : grads)
    if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient, update aborted");

  state.step_count += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  Eigen::Map<Vector> p(params.data(), n);
  Eigen::Map<const Vector> g(grads.data(), n);
  state.first_moment = b1 * state.first_moment + (1.0 - b1) * g;
  state.second_moment = b2 * state.second_moment + (1.0 - b2) * g.cwiseProduct(g);
  const auto m_hat = state.first_moment.array() / c1;
  const auto v_hat = state.second_moment.array() / c2;
  p.array() -= learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
}

}  // namespace ganlink::nn
