#include "rmsa/neuralnet.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "rmsa/error.hpp"
#include "rmsa/kernels.hpp"

namespace rmsa {

double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }
double elu_derivative(double x) { return x >= 0.0 ? 1.0 : std::exp(x); }

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ContractError("Mlp needs at least an input and an output size");
  if (std::any_of(dims_.begin(), dims_.end(), [](int d) { return d < 1; }))
    throw ContractError("Mlp layer sizes must be positive");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(total);
    total += fan_in(l) * fan_out(l) + fan_out(l);
  }
  params_.assign(total, 0.0);
}

void Mlp::forward(std::span<const double> x, Activations& cache) const {
  if (x.size() != input_size())
    throw ContractError("Mlp::forward: input has " + std::to_string(x.size()) + " entries, expected " +
                        std::to_string(input_size()));
  const auto& k = kernels::active();
  const std::size_t layers = layer_count();
  cache.pre.resize(layers);
  cache.act.resize(layers);
  cache.act[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < layers; ++l) {
    auto& z = cache.pre[l];
    z.resize(fan_out(l));
    k.gemv(weight(l), cache.act[l].data(), bias(l), z.data(), fan_out(l), fan_in(l));
    if (l + 1 < layers) {
      auto& a = cache.act[l + 1];
      a.resize(z.size());
      std::transform(z.begin(), z.end(), a.begin(), elu);
    }
  }
}

void Mlp::backward(const Activations& cache, std::span<const double> d_output,
                   std::span<double> grad) const {
  if (grad.size() != params_.size()) throw ContractError("Mlp::backward: gradient buffer size mismatch");
  if (d_output.size() != output_size()) throw ContractError("Mlp::backward: output gradient size mismatch");
  const auto& k = kernels::active();
  std::vector<double> delta(d_output.begin(), d_output.end());
  std::vector<double> below;
  for (std::size_t l = layer_count(); l-- > 0;) {
    double* gw = grad.data() + offsets_[l];
    double* gb = gw + fan_in(l) * fan_out(l);
    k.outer_acc(delta.data(), cache.act[l].data(), gw, fan_out(l), fan_in(l));
    k.axpy(1.0, delta.data(), gb, fan_out(l));
    if (l == 0) break;
    below.assign(fan_in(l), 0.0);
    k.gemv_t_acc(weight(l), delta.data(), below.data(), fan_out(l), fan_in(l));
    const auto& pre = cache.pre[l - 1];
    for (std::size_t i = 0; i < below.size(); ++i) below[i] *= elu_derivative(pre[i]);
    delta.swap(below);
  }
}

std::vector<int> NetworkShape::policy_dims() const {
  std::vector<int> d{input};
  d.insert(d.end(), static_cast<std::size_t>(hidden_layers), hidden_width);
  d.push_back(actions);
  return d;
}

std::vector<int> NetworkShape::value_dims() const {
  std::vector<int> d = policy_dims();
  d.back() = 1;
  return d;
}

void ParamSet::copy_weights_from(const ParamSet& other) {
  if (policy.dims() != other.policy.dims() || value.dims() != other.value.dims())
    throw ContractError("copy_weights_from: shape mismatch");
  std::copy(other.policy.params().begin(), other.policy.params().end(), policy.params().begin());
  std::copy(other.value.params().begin(), other.value.params().end(), value.params().begin());
}

bool ParamSet::all_finite() const {
  auto finite = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(policy.params()) && finite(value.params());
}

GradientSet GradientSet::zeros_like(const ParamSet& p) {
  return {std::vector<double>(p.policy.param_count(), 0.0), std::vector<double>(p.value.param_count(), 0.0)};
}

double GradientSet::norm() const {
  const double s = std::inner_product(policy.begin(), policy.end(), policy.begin(), 0.0) +
                   std::inner_product(value.begin(), value.end(), value.begin(), 0.0);
  return std::sqrt(s);
}

namespace {

void init_mlp(Mlp& net, std::mt19937_64& rng) {
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    const bool output_layer = l + 1 == net.layer_count();
    const double stddev = std::sqrt(2.0 / static_cast<double>(net.fan_in(l))) * (output_layer ? 0.1 : 1.0);
    std::normal_distribution<double> dist(0.0, stddev);
    double* w = net.weight(l);
    for (std::size_t i = 0; i < net.fan_in(l) * net.fan_out(l); ++i) w[i] = dist(rng);
    std::fill(net.bias(l), net.bias(l) + net.fan_out(l), 0.0);
  }
}

}  // namespace

ParamSet init_params(const NetworkShape& shape, std::uint64_t seed) {
  if (shape.input < 1 || shape.hidden_layers < 0 || shape.hidden_width < 1 || shape.actions < 1)
    throw ContractError("init_params: invalid network shape");
  ParamSet p{Mlp(shape.policy_dims()), Mlp(shape.value_dims()), {}};
  std::mt19937_64 rng(seed);
  init_mlp(p.policy, rng);
  init_mlp(p.value, rng);
  p.adam.policy_m.assign(p.policy.param_count(), 0.0);
  p.adam.policy_v.assign(p.policy.param_count(), 0.0);
  p.adam.value_m.assign(p.value.param_count(), 0.0);
  p.adam.value_v.assign(p.value.param_count(), 0.0);
  return p;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) sum += out[i] = std::exp(logits[i] - top);
  for (double& x : out) x /= sum;
  return out;
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double q : probs)
    if (q > 0.0) h -= q * std::max(std::log(q), kLogProbFloor);
  return h;
}

std::vector<double> forward_policy(const ParamSet& p, std::span<const double> s) {
  Mlp::Activations cache;
  p.policy.forward(s, cache);
  return softmax(cache.output());
}

double forward_value(const ParamSet& p, std::span<const double> s) {
  Mlp::Activations cache;
  p.value.forward(s, cache);
  return cache.output()[0];
}

namespace {

// log-softmax with the floor applied.
std::vector<double> log_probs(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - top);
  const double lse = top + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = std::max(logits[i] - lse, kLogProbFloor);
  return out;
}

double entropy_sign(EntropySign s) { return s == EntropySign::Bonus ? -1.0 : 1.0; }

void check_batch(const ParamSet& p, std::span<const TrainingSample> batch) {
  if (batch.empty()) throw ContractError("empty training batch");
  for (const auto& smp : batch)
    if (smp.action < 0 || static_cast<std::size_t>(smp.action) >= p.policy.output_size())
      throw ContractError("training sample action out of range");
}

}  // namespace

double policy_loss(const ParamSet& p, std::span<const TrainingSample> batch, const LossConfig& cfg) {
  check_batch(p, batch);
  Mlp::Activations cache;
  double total = 0.0;
  for (const auto& smp : batch) {
    p.policy.forward(smp.state, cache);
    const auto lp = log_probs(cache.output());
    double h = 0.0;
    for (double l : lp) h -= std::exp(l) * l;
    total += -smp.advantage * lp[static_cast<std::size_t>(smp.action)] + entropy_sign(cfg.entropy_sign) * cfg.alpha * h;
  }
  return total / static_cast<double>(batch.size());
}

double value_loss(const ParamSet& p, std::span<const TrainingSample> batch) {
  if (batch.empty()) throw ContractError("empty training batch");
  Mlp::Activations cache;
  double total = 0.0;
  for (const auto& smp : batch) {
    p.value.forward(smp.state, cache);
    const double e = cache.output()[0] - smp.target;
    total += e * e;
  }
  return total / static_cast<double>(batch.size());
}

namespace {

[[noreturn]] void report_non_finite(const char* net, std::span<const double> g, const TrainingSample& first) {
  std::ostringstream msg;
  msg << "non-finite " << net << " gradient";
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!std::isfinite(g[i])) {
      msg << " at parameter " << i << " (" << g[i] << ")";
      break;
    }
  msg << "; first sample action=" << first.action << " advantage=" << first.advantage
      << " target=" << first.target << " state=[";
  for (std::size_t i = 0; i < first.state.size(); ++i) msg << (i ? "," : "") << first.state[i];
  msg << "]";
  throw Error(msg.str());
}

}  // namespace

BackwardResult backward(const ParamSet& p, std::span<const TrainingSample> batch, const LossConfig& cfg) {
  check_batch(p, batch);
  BackwardResult out{GradientSet::zeros_like(p), 0.0, 0.0, 0.0};
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const double sign = entropy_sign(cfg.entropy_sign);
  Mlp::Activations cache;
  std::vector<double> d_logits(p.policy.output_size());
  std::array<double, 1> d_value{};

  for (const auto& smp : batch) {
    p.policy.forward(smp.state, cache);
    const auto lp = log_probs(cache.output());
    const auto a = static_cast<std::size_t>(smp.action);
    double h = 0.0;
    for (double l : lp) h -= std::exp(l) * l;
    out.policy_loss += inv_n * (-smp.advantage * lp[a] + sign * cfg.alpha * h);
    out.mean_entropy += inv_n * h;

    // d/dz_k of -adv*log pi_a is -adv*(1[k=a] - pi_k); a floored log-prob is constant.
    const bool floored = lp[a] <= kLogProbFloor;
    for (std::size_t k = 0; k < d_logits.size(); ++k) {
      const double pk = std::exp(lp[k]);
      const double pg = floored ? 0.0 : -smp.advantage * ((k == a ? 1.0 : 0.0) - pk);
      const double dh = -pk * (lp[k] + h);
      d_logits[k] = inv_n * (pg + sign * cfg.alpha * dh);
    }
    p.policy.backward(cache, d_logits, out.grads.policy);

    p.value.forward(smp.state, cache);
    const double err = cache.output()[0] - smp.target;
    out.value_loss += inv_n * err * err;
    d_value[0] = 2.0 * inv_n * err;
    p.value.backward(cache, d_value, out.grads.value);
  }

  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  if (!finite(out.grads.policy)) report_non_finite("policy", out.grads.policy, batch.front());
  if (!finite(out.grads.value)) report_non_finite("value", out.grads.value, batch.front());
  return out;
}

void adam_apply(ParamSet& global, const GradientSet& g, const AdamConfig& cfg) {
  if (g.policy.size() != global.policy.param_count() || g.value.size() != global.value.param_count())
    throw ContractError("adam_apply: gradient shape mismatch");
  auto& st = global.adam;
  if (st.policy_m.size() != g.policy.size()) {
    st.policy_m.assign(g.policy.size(), 0.0);
    st.policy_v.assign(g.policy.size(), 0.0);
  }
  if (st.value_m.size() != g.value.size()) {
    st.value_m.assign(g.value.size(), 0.0);
    st.value_v.assign(g.value.size(), 0.0);
  }

  const GradientSet* grads = &g;
  GradientSet clipped;
  if (cfg.grad_norm_cap > 0.0) {
    const double norm = g.norm();
    if (norm > cfg.grad_norm_cap) {
      clipped = g;
      const double scale = cfg.grad_norm_cap / norm;
      for (double& x : clipped.policy) x *= scale;
      for (double& x : clipped.value) x *= scale;
      grads = &clipped;
    }
  }

  ++st.step;
  const double corr1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
  const double corr2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
  const auto& k = kernels::active();
  k.adam(global.policy.params().data(), grads->policy.data(), st.policy_m.data(), st.policy_v.data(),
         grads->policy.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon, corr1, corr2);
  k.adam(global.value.params().data(), grads->value.data(), st.value_m.data(), st.value_v.data(),
         grads->value.size(), cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon, corr1, corr2);
  if (!global.all_finite())
    throw Error("adam_apply: parameters became non-finite at step " + std::to_string(st.step));
}

namespace {

constexpr std::array<char, 8> kMagic{'R', 'M', 'S', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error("checkpoint truncated");
  return v;
}

void put_doubles(std::ostream& out, std::span<const double> v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_doubles(std::istream& in, std::span<double> v) {
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!in) throw Error("checkpoint truncated");
}

void put_dims(std::ostream& out, const std::vector<int>& dims) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (int d : dims) put<std::int32_t>(out, d);
}

std::vector<int> get_dims(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  if (n < 2 || n > 1024) throw Error("checkpoint has an invalid layer count");
  std::vector<int> dims(n);
  for (auto& d : dims) {
    d = get<std::int32_t>(in);
    if (d < 1) throw Error("checkpoint has an invalid layer size");
  }
  return dims;
}

}  // namespace

void save_checkpoint(const ParamSet& p, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put(out, kCheckpointVersion);
  put_dims(out, p.policy.dims());
  put_dims(out, p.value.dims());
  put<std::int64_t>(out, p.adam.step);
  put_doubles(out, p.policy.params());
  put_doubles(out, p.value.params());
  const bool has_moments = p.adam.policy_m.size() == p.policy.param_count() &&
                           p.adam.value_m.size() == p.value.param_count();
  put<std::uint8_t>(out, has_moments ? 1 : 0);
  if (has_moments) {
    put_doubles(out, p.adam.policy_m);
    put_doubles(out, p.adam.policy_v);
    put_doubles(out, p.adam.value_m);
    put_doubles(out, p.adam.value_v);
  }
  if (!out) throw Error("failed writing checkpoint");
}

void save_checkpoint(const ParamSet& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot create checkpoint " + path.string());
  save_checkpoint(p, out);
}

ParamSet load_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error("not a checkpoint file");
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw Error("unsupported checkpoint version " + std::to_string(version));
  ParamSet p;
  p.policy = Mlp(get_dims(in));
  p.value = Mlp(get_dims(in));
  p.adam.step = get<std::int64_t>(in);
  get_doubles(in, p.policy.params());
  get_doubles(in, p.value.params());
  p.adam.policy_m.assign(p.policy.param_count(), 0.0);
  p.adam.policy_v.assign(p.policy.param_count(), 0.0);
  p.adam.value_m.assign(p.value.param_count(), 0.0);
  p.adam.value_v.assign(p.value.param_count(), 0.0);
  if (get<std::uint8_t>(in)) {
    get_doubles(in, p.adam.policy_m);
    get_doubles(in, p.adam.policy_v);
    get_doubles(in, p.adam.value_m);
    get_doubles(in, p.adam.value_v);
  }
  return p;
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace rmsa
