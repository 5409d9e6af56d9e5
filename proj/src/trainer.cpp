#include "rmsa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <thread>

#include "rmsa/error.hpp"

namespace rmsa {

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw ContractError("discounted_returns: empty reward list");
  std::vector<double> out(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

std::vector<double> window_returns(std::span<const double> rewards, std::size_t window, double gamma) {
  if (window == 0 || rewards.size() < 2 * window - 1)
    throw ContractError("window_returns: need at least 2N-1 rewards");
  std::vector<double> out(window);
  for (std::size_t i = 0; i < window; ++i) {
    double acc = 0.0;
    for (std::size_t j = window; j-- > 0;) acc = rewards[i + j] + gamma * acc;
    out[i] = acc;
  }
  return out;
}

std::vector<double> advantages(std::span<const double> returns, std::span<const double> values) {
  if (returns.size() != values.size()) throw ContractError("advantages: length mismatch");
  std::vector<double> out(returns.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = returns[i] - values[i];
  return out;
}

int roulette_select(std::span<const double> probs, double draw) {
  if (probs.empty()) throw ContractError("roulette_select: empty distribution");
  double cumulative = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    cumulative += probs[a];
    if (cumulative >= draw) return static_cast<int>(a);
  }
  return static_cast<int>(probs.size()) - 1;
}

int roulette_select(std::span<const double> probs, std::mt19937_64& rng) {
  return roulette_select(probs, std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

int greedy_select(std::span<const double> probs) {
  if (probs.empty()) throw ContractError("greedy_select: empty distribution");
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

void write_metrics_row(std::ostream& out, const MetricsRow& r) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%lld,%d,%lld,%lld,%.0f,%.6f,%.9g,%.9g,%.9g\n",
                static_cast<long long>(r.epoch), r.worker, static_cast<long long>(r.requests_total),
                static_cast<long long>(r.requests_blocked), r.cum_reward, r.blocking_prob, r.policy_loss,
                r.value_loss, r.entropy);
  out << buf;
}

MetricsLog::MetricsLog(std::ostream* csv) : csv_(csv) {
  if (csv_) *csv_ << kMetricsHeader << '\n' << std::flush;
}

void MetricsLog::append(const MetricsRow& row) {
  std::lock_guard lock(mu_);
  rows_.push_back(row);
  if (csv_) {
    write_metrics_row(*csv_, row);
    csv_->flush();
  }
}

std::vector<MetricsRow> MetricsLog::rows() const {
  std::lock_guard lock(mu_);
  return rows_;
}

GlobalParams::GlobalParams(ParamSet init, const AdamConfig& adam, std::int64_t epoch_budget)
    : params_(std::move(init)), adam_(adam), budget_(epoch_budget) {}

void GlobalParams::snapshot(ParamSet& local) const {
  std::lock_guard lock(mu_);
  local.copy_weights_from(params_);
}

ParamSet GlobalParams::copy() const {
  std::lock_guard lock(mu_);
  return params_;
}

std::optional<std::int64_t> GlobalParams::apply(const GradientSet& g) {
  std::int64_t epoch = 0;
  std::optional<ParamSet> snap;
  {
    std::lock_guard lock(mu_);
    if (aborted_ || epoch_.load() >= budget_) return std::nullopt;
    adam_apply(params_, g, adam_);
    epoch = epoch_.fetch_add(1) + 1;
    if (on_epoch && snapshot_every > 0 && epoch % snapshot_every == 0) snap = params_;
  }
  if (snap) on_epoch(epoch, *snap);
  return epoch;
}

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t worker, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                    static_cast<std::uint32_t>(worker), static_cast<std::uint32_t>(stream)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

class ActorLearner {
 public:
  ActorLearner(int worker_id, GlobalParams& global, const WorkerContext& ctx)
      : id_(worker_id),
        global_(global),
        ctx_(ctx),
        env_(*ctx.topology, *ctx.paths, worker_env(ctx, worker_id)),
        encoder_(ctx.features),
        rng_(mix_seed(ctx.cfg.seed, static_cast<std::uint64_t>(worker_id), 0xac7)),
        local_(global.copy()),
        n_(static_cast<std::size_t>(ctx.cfg.batch)) {
    if (ctx.cfg.batch < 1) throw ContractError("batch size N must be positive");
    if (ctx.features.mode != ctx.cfg.mode) throw ContractError("feature mode does not match training mode");
    loss_.alpha = ctx.cfg.alpha;
    loss_.entropy_sign = ctx.cfg.entropy_sign;
    report_.worker = worker_id;
  }

  WorkerReport run_episode_mode() {
    while (!stop()) {
      if (buffer_.empty()) global_.snapshot(local_);
      const EpisodePosition pos{static_cast<int>(buffer_.size()) + 1, static_cast<int>(n_)};
      act(pos);
      if (buffer_.size() == n_) {
        std::vector<double> rewards(n_);
        for (std::size_t i = 0; i < n_; ++i) rewards[i] = buffer_[i].reward;
        if (!train(discounted_returns(rewards, ctx_.cfg.gamma), n_)) break;
        buffer_.clear();
      }
    }
    return finish();
  }

  WorkerReport run_window_mode() {
    global_.snapshot(local_);
    while (!stop()) {
      act(std::nullopt);
      if (buffer_.size() == 2 * n_ - 1) {
        std::vector<double> rewards(buffer_.size());
        for (std::size_t i = 0; i < buffer_.size(); ++i) rewards[i] = buffer_[i].reward;
        report_.buffer_sizes_at_update.push_back(buffer_.size());
        if (!train(window_returns(rewards, n_, ctx_.cfg.gamma), n_)) break;
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(n_));
        global_.snapshot(local_);  // N-1 left
      }
    }
    return finish();
  }

 private:
  static EnvConfig worker_env(const WorkerContext& ctx, int worker) {
    EnvConfig e = ctx.env;
    e.traffic.seed = ctx.env.traffic.seed + static_cast<std::uint64_t>(worker);
    e.history = std::max(e.history, ctx.cfg.blocking_window);
    return e;
  }

  bool stop() const { return global_.exhausted() || global_.aborted(); }

  void act(std::optional<EpisodePosition> pos) {
    const Request& req = env_.next_request();
    ExperienceSample smp;
    smp.state = encoder_.encode(req, env_.spectrum(), env_.candidates(req), pos);
    local_.policy.forward(smp.state, cache_);
    const auto probs = softmax(cache_.output());
    local_.value.forward(smp.state, cache_);
    smp.value = cache_.output()[0];
    smp.action = roulette_select(probs, rng_);
    const ProvisionOutcome out = env_.step(req, smp.action);
    smp.reward = out.reward;
    buffer_.push_back(std::move(smp));
    record(out.accepted);
  }

  // Trains on the first `count` buffered samples. False once the epoch budget is spent.
  bool train(const std::vector<double>& returns, std::size_t count) {
    std::vector<TrainingSample> batch(count);
    for (std::size_t i = 0; i < count; ++i) {
      batch[i].state = buffer_[i].state;
      batch[i].action = buffer_[i].action;
      batch[i].target = returns[i];
      batch[i].advantage = returns[i] - buffer_[i].value;
    }
    const BackwardResult br = backward(local_, batch, loss_);
    if (!global_.apply(br.grads)) return false;
    ++report_.updates;
    interval_policy_loss_ += br.policy_loss;
    interval_value_loss_ += br.value_loss;
    interval_entropy_ += br.mean_entropy;
    ++interval_batches_;
    return true;
  }

  void record(bool accepted) {
    ++interval_requests_;
    interval_reward_ += accepted ? 1.0 : -1.0;
    if (!accepted) ++interval_blocked_;
    if (interval_requests_ < ctx_.cfg.metrics_interval) return;

    if (interval_batches_ > 0) {
      last_policy_loss_ = interval_policy_loss_ / interval_batches_;
      last_value_loss_ = interval_value_loss_ / interval_batches_;
      last_entropy_ = interval_entropy_ / interval_batches_;
    }
    if (ctx_.metrics) {
      MetricsRow row;
      row.epoch = global_.epoch();
      row.worker = id_;
      row.requests_total = env_.stats().total();
      row.requests_blocked = env_.stats().blocked();
      row.cum_reward = interval_reward_;
      row.blocking_prob = static_cast<double>(interval_blocked_) / interval_requests_;
      row.policy_loss = last_policy_loss_;
      row.value_loss = last_value_loss_;
      row.entropy = last_entropy_;
      ctx_.metrics->append(row);
    }
    interval_requests_ = 0;
    interval_blocked_ = 0;
    interval_reward_ = 0.0;
    interval_batches_ = 0;
    interval_policy_loss_ = interval_value_loss_ = interval_entropy_ = 0.0;
  }

  WorkerReport finish() {
    const BlockingStats& st = env_.stats();
    report_.requests = st.total();
    report_.blocked = st.blocked();
    if (st.total() > 0) {
      report_.trailing_requests = std::min<std::size_t>(ctx_.cfg.blocking_window, static_cast<std::size_t>(st.total()));
      report_.trailing_blocking = st.blocking_probability(ctx_.cfg.blocking_window);
      report_.trailing_blocked =
          static_cast<std::size_t>(std::llround(report_.trailing_blocking * static_cast<double>(report_.trailing_requests)));
    }
    return report_;
  }

  int id_;
  GlobalParams& global_;
  const WorkerContext& ctx_;
  RmsaEnv env_;
  FeatureEncoder encoder_;
  std::mt19937_64 rng_;
  ParamSet local_;
  Mlp::Activations cache_;
  LossConfig loss_;
  std::size_t n_;
  std::vector<ExperienceSample> buffer_;
  WorkerReport report_;

  int interval_requests_ = 0;
  int interval_blocked_ = 0;
  double interval_reward_ = 0.0;
  int interval_batches_ = 0;
  double interval_policy_loss_ = 0.0;
  double interval_value_loss_ = 0.0;
  double interval_entropy_ = 0.0;
  double last_policy_loss_ = std::nan("");
  double last_value_loss_ = std::nan("");
  double last_entropy_ = std::nan("");
};

}  // namespace

WorkerReport run_actor_learner_ep(int worker_id, GlobalParams& global, const WorkerContext& ctx) {
  return ActorLearner(worker_id, global, ctx).run_episode_mode();
}

WorkerReport run_actor_learner_flx(int worker_id, GlobalParams& global, const WorkerContext& ctx) {
  return ActorLearner(worker_id, global, ctx).run_window_mode();
}

double TrainingResult::trailing_blocking() const {
  std::size_t n = 0, b = 0;
  for (const auto& w : workers) {
    n += w.trailing_requests;
    b += w.trailing_blocked;
  }
  return n ? static_cast<double>(b) / static_cast<double>(n) : 0.0;
}

FeatureConfig make_feature_config(const Topology& topo, const PathTable& paths, const EnvConfig& env,
                                  TrainingMode mode) {
  FeatureConfig f;
  f.nodes = topo.node_count();
  f.k_paths = paths.k();
  f.j_blocks = env.j_blocks;
  f.slot_count = topo.slot_count();
  f.mean_duration = env.traffic.mean_duration;
  f.c_grid_bpsk = env.c_grid_bpsk;
  f.bandwidth_max = env.traffic.bandwidth_max;
  f.mode = mode;
  return f;
}

TrainingResult run_training(const WorkerContext& ctx, std::function<void(std::int64_t, const ParamSet&)> on_checkpoint) {
  if (!ctx.topology || !ctx.paths) throw ContractError("run_training: missing topology or paths");
  if (ctx.cfg.workers < 1) throw ContractError("run_training: need at least one worker");

  NetworkShape shape;
  shape.input = static_cast<int>(state_size(ctx.features));
  shape.hidden_layers = ctx.cfg.hidden_layers;
  shape.hidden_width = ctx.cfg.hidden_width;
  shape.actions = ctx.features.k_paths * ctx.features.j_blocks;

  GlobalParams global(init_params(shape, ctx.cfg.seed), ctx.cfg.adam, ctx.cfg.epochs);
  if (on_checkpoint && ctx.cfg.checkpoint_interval > 0) {
    global.on_epoch = on_checkpoint;
    global.snapshot_every = ctx.cfg.checkpoint_interval;
  }

  auto body = ctx.cfg.mode == TrainingMode::Episode ? run_actor_learner_ep : run_actor_learner_flx;
  TrainingResult result;
  result.workers.resize(static_cast<std::size_t>(ctx.cfg.workers));

  if (ctx.cfg.epochs > 0) {
    if (ctx.cfg.workers == 1) {
      result.workers[0] = body(0, global, ctx);
    } else {
      std::vector<std::exception_ptr> errors(result.workers.size());
      {
        std::vector<std::jthread> threads;
        for (int w = 0; w < ctx.cfg.workers; ++w) {
          threads.emplace_back([&, w] {
            try {
              result.workers[static_cast<std::size_t>(w)] = body(w, global, ctx);
            } catch (...) {
              errors[static_cast<std::size_t>(w)] = std::current_exception();
              global.abort();
            }
          });
        }
      }
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
  }

  result.epochs = global.epoch();
  result.params = global.copy();
  if (ctx.metrics) result.metrics = ctx.metrics->rows();
  return result;
}

PolicyRunResult run_policy(const ParamSet& params, RmsaEnv& env, const FeatureEncoder& encoder,
                           std::int64_t requests, bool greedy, int episode_length, std::uint64_t seed,
                           MetricsLog* metrics, int metrics_interval) {
  std::mt19937_64 rng(seed);
  PolicyRunResult res;
  Mlp::Activations cache;
  std::int64_t interval_blocked = 0;
  double interval_reward = 0.0;
  for (std::int64_t i = 0; i < requests; ++i) {
    const Request& req = env.next_request();
    std::optional<EpisodePosition> pos;
    if (encoder.config().mode == TrainingMode::Episode)
      pos = EpisodePosition{static_cast<int>(i % episode_length) + 1, episode_length};
    const StateVector s = encoder.encode(req, env.spectrum(), env.candidates(req), pos);
    params.policy.forward(s, cache);
    const auto probs = softmax(cache.output());
    const int action = greedy ? greedy_select(probs) : roulette_select(probs, rng);
    const ProvisionOutcome out = env.step(req, action);
    ++res.requests;
    interval_reward += out.reward;
    if (!out.accepted) {
      ++res.blocked;
      ++interval_blocked;
    }
    if (metrics && res.requests % metrics_interval == 0) {
      MetricsRow row;
      row.requests_total = res.requests;
      row.requests_blocked = res.blocked;
      row.cum_reward = interval_reward;
      row.blocking_prob = static_cast<double>(interval_blocked) / metrics_interval;
      metrics->append(row);
      interval_blocked = 0;
      interval_reward = 0.0;
    }
  }
  return res;
}

}  // namespace rmsa
