// Minimal dense feed-forward network engine: batched forward evaluation,
// exact reverse-mode gradients (to parameters and to inputs), cross-entropy
// loss and the Adam optimizer. Everything runs in 64-bit floats and is
// strictly sequential, so results are bit-reproducible for a fixed seed.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rng.hpp"

namespace ganlink::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Parameter/gradient storage must keep a fixed (32-byte) alignment: Eigen's
// vectorized reductions round differently per alignment, and bit-level
// reproducibility across runs in one process depends on it staying constant.
using AlignedVector = std::vector<double, Eigen::aligned_allocator<double>>;
using RowMajorMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

enum class Activation { kLinear, kRelu, kSoftmax, kBoundedUnit };

const char* activation_name(Activation a);

struct LayerSpec {
  int input_width = 0;
  int output_width = 0;
  Activation activation = Activation::kLinear;
};

// Per-layer activations kept from a forward pass; backward replays the chain
// from here. Batches are row-per-sample.
struct ForwardCache {
  std::vector<Matrix> inputs;   // layer inputs, batch x input_width
  std::vector<Matrix> outputs;  // post-activation, batch x output_width
  bool valid() const { return !inputs.empty(); }
};

class DenseNet {
 public:
  DenseNet() = default;

  // Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
  static DenseNet create(std::span<const LayerSpec> specs, Rng& rng);
  // All parameters zero; hand-assembled nets in tests start from this.
  static DenseNet create_zero(std::span<const LayerSpec> specs);

  int input_width() const { return specs_.empty() ? 0 : specs_.front().input_width; }
  int output_width() const { return specs_.empty() ? 0 : specs_.back().output_width; }
  int layer_count() const { return static_cast<int>(specs_.size()); }
  const LayerSpec& layer_spec(int layer) const { return specs_[static_cast<size_t>(layer)]; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  Eigen::Index param_count() const { return static_cast<Eigen::Index>(params_.size()); }
  bool all_finite() const;

  // weights(layer) is output_width x input_width, row-major over the flat block
  RowMajorMap weights(int layer);
  ConstRowMajorMap weights(int layer) const;
  Eigen::Map<Vector> biases(int layer);
  Eigen::Map<const Vector> biases(int layer) const;

  // X is batch x input_width; returns batch x output_width.
  Matrix forward(const Matrix& X, ForwardCache* cache = nullptr) const;
  std::vector<double> forward1(std::span<const double> x, ForwardCache* cache = nullptr) const;

  // dY: gradient of a scalar loss w.r.t. the network output. Parameter
  // gradients are accumulated (+=) into grads; if dX is non-null it receives
  // the gradient w.r.t. the input batch.
  void backward(const ForwardCache& cache, const Matrix& dY, std::span<double> grads,
                Matrix* dX = nullptr) const;
  // Same, but dZ is the gradient w.r.t. the top-layer pre-activation. Used
  // with the fused softmax/cross-entropy gradient (probs - labels), which
  // stays bounded even for saturated probabilities.
  void backward_pre(const ForwardCache& cache, const Matrix& dZ, std::span<double> grads,
                    Matrix* dX = nullptr) const;

 private:
  void init_layout(std::span<const LayerSpec> specs);
  void backward_impl(const ForwardCache& cache, Matrix delta, std::span<double> grads,
                     Matrix* dX) const;

  std::vector<LayerSpec> specs_;
  std::vector<std::ptrdiff_t> w_off_, b_off_;
  AlignedVector params_;
};

// --- losses ---------------------------------------------------------------

// Arguments of log() are clamped at 1e-12.
inline constexpr double kLogClamp = 1e-12;

double cross_entropy(std::span<const double> label, std::span<const double> prediction);
void cross_entropy_grad(std::span<const double> label, std::span<const double> prediction,
                        std::span<double> d_prediction);

// Mean cross-entropy over batch rows (labels and probs are batch x width).
double batch_cross_entropy(const Matrix& labels, const Matrix& probs);
// Gradient of batch_cross_entropy w.r.t. the softmax pre-activation:
// (probs - labels) / batch.
Matrix softmax_xent_grad_pre(const Matrix& labels, const Matrix& probs);

// --- Adam ------------------------------------------------------------------

struct AdamState {
  Vector first_moment, second_moment;
  int64_t step_count = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;

  AdamState() = default;
  explicit AdamState(Eigen::Index n)
      : first_moment(Vector::Zero(n)), second_moment(Vector::Zero(n)) {}
};

// One bias-corrected Adam update. Throws NumericError (leaving params and
// state untouched) if any gradient entry is non-finite.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               double learning_rate);

}  // namespace ganlink::nn
