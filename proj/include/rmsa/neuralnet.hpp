#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace rmsa {

/// Fully-connected network with ELU hidden layers and a linear output layer.
/// Parameters live in one flat buffer: for each layer, the row-major weight
/// matrix (out x in) followed by the bias vector.
class Mlp {
 public:
  Mlp() = default;
  /// dims = {input, hidden..., output}; at least two entries.
  explicit Mlp(std::vector<int> dims);

  const std::vector<int>& dims() const noexcept { return dims_; }
  std::size_t layer_count() const noexcept { return dims_.empty() ? 0 : dims_.size() - 1; }
  std::size_t input_size() const { return static_cast<std::size_t>(dims_.front()); }
  std::size_t output_size() const { return static_cast<std::size_t>(dims_.back()); }
  std::size_t param_count() const noexcept { return params_.size(); }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }

  double* weight(std::size_t layer) { return params_.data() + offsets_[layer]; }
  const double* weight(std::size_t layer) const { return params_.data() + offsets_[layer]; }
  double* bias(std::size_t layer) { return weight(layer) + fan_in(layer) * fan_out(layer); }
  const double* bias(std::size_t layer) const { return weight(layer) + fan_in(layer) * fan_out(layer); }
  std::size_t fan_in(std::size_t layer) const { return static_cast<std::size_t>(dims_[layer]); }
  std::size_t fan_out(std::size_t layer) const { return static_cast<std::size_t>(dims_[layer + 1]); }

  /// Per-layer values kept for the backward pass. act[0] is the input,
  /// pre[l] the pre-activation of layer l, act[l + 1] its ELU output.
  struct Activations {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
    std::span<const double> output() const { return pre.back(); }
  };

  /// Throws ContractError when x has the wrong length.
  void forward(std::span<const double> x, Activations& cache) const;

  /// Accumulates dLoss/dParams into `grad` given dLoss/dOutput.
  void backward(const Activations& cache, std::span<const double> d_output,
                std::span<double> grad) const;

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<int> dims_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

double elu(double x);
double elu_derivative(double x);

struct NetworkShape {
  int input = 0;
  int hidden_layers = 5;
  int hidden_width = 128;
  int actions = 5;

  std::vector<int> policy_dims() const;
  std::vector<int> value_dims() const;
};

struct AdamState {
  std::vector<double> policy_m, policy_v;
  std::vector<double> value_m, value_v;
  std::int64_t step = 0;
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Policy and value networks (same hidden architecture, separate weights) plus
/// optimizer state.
struct ParamSet {
  Mlp policy;
  Mlp value;
  AdamState adam;

  /// Copies the network weights of `other` without touching optimizer state.
  void copy_weights_from(const ParamSet& other);
  bool all_finite() const;
  friend bool operator==(const ParamSet&, const ParamSet&) = default;
};

struct GradientSet {
  std::vector<double> policy;
  std::vector<double> value;

  static GradientSet zeros_like(const ParamSet& p);
  double norm() const;
};

/// He-style fan-in initialization for the ELU layers, biases zero. The two output
/// layers are scaled down by 10 so the untrained policy starts close to uniform.
ParamSet init_params(const NetworkShape& shape, std::uint64_t seed);

std::vector<double> softmax(std::span<const double> logits);
double entropy(std::span<const double> probs);

/// Action distribution for state s.
std::vector<double> forward_policy(const ParamSet& p, std::span<const double> s);
double forward_value(const ParamSet& p, std::span<const double> s);

/// How the entropy term enters the policy loss. Bonus subtracts alpha * H
/// (exploration-encouraging); Literal adds alpha * H.
enum class EntropySign { Bonus, Literal };

struct LossConfig {
  double alpha = 0.01;
  EntropySign entropy_sign = EntropySign::Bonus;
};

/// One training sample: state, chosen action, advantage and return target.
struct TrainingSample {
  std::vector<double> state;
  int action = 0;
  double advantage = 0.0;
  double target = 0.0;
};

/// log pi is floored at this value before use.
inline constexpr double kLogProbFloor = -27.631021115928547;  // ln(1e-12)

/// -(1/N) sum adv * log pi(a|s) -/+ (alpha/N) sum H(pi(.|s))
double policy_loss(const ParamSet& p, std::span<const TrainingSample> batch, const LossConfig& cfg);
/// (1/N) sum (v(s) - target)^2
double value_loss(const ParamSet& p, std::span<const TrainingSample> batch);

struct BackwardResult {
  GradientSet grads;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double mean_entropy = 0.0;
};

/// Exact gradients of both losses. Throws Error with a diagnostic when a gradient is not finite.
BackwardResult backward(const ParamSet& p, std::span<const TrainingSample> batch, const LossConfig& cfg);

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_norm_cap = 0.0;  // <= 0 disables clipping
};

/// Bias-corrected Adam step on both networks; increments adam.step.
/// Throws ContractError on shape mismatch and Error if a parameter becomes non-finite.
void adam_apply(ParamSet& global, const GradientSet& g, const AdamConfig& cfg);

/// Versioned little-endian binary dump of shapes, weights and optimizer state.
void save_checkpoint(const ParamSet& p, std::ostream& out);
void save_checkpoint(const ParamSet& p, const std::filesystem::path& path);
ParamSet load_checkpoint(std::istream& in);
ParamSet load_checkpoint(const std::filesystem::path& path);

}  // namespace rmsa
