#include "ua/alg1.hpp"

#include <cmath>
#include <stdexcept>

#include "ua/errors.hpp"

namespace ua {

void Alg1Params::validate(int num_users) const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1)");
  }
  if (!(z > static_cast<double>(num_users))) {
    throw std::invalid_argument("z must exceed the number of users");
  }
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (rate_tolerance < 0.0) throw std::invalid_argument("rate tolerance must be >= 0");
}

Alg1Agent::Alg1Agent(int num_actions, UtilityFn utility, const Alg1Params& params, RngStream rng)
    : num_actions_(num_actions),
      utility_(std::move(utility)),
      epsilon_(params.epsilon),
      explore_prob_(params.epsilon > 0.0 ? std::pow(params.epsilon, params.z) : 0.0),
      log_epsilon_(params.epsilon > 0.0 ? std::log(params.epsilon) : 0.0),
      k_max_(params.k_max),
      rate_tolerance_(params.rate_tolerance),
      rng_(std::move(rng)),
      past_actions_(params.k_max, 0),
      past_rates_(params.k_max, 0.0) {
  // Everyone starts discontent with a uniformly drawn window size; the
  // history is pre-filled with the default action and rate 0.
  k_ = 1 + static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(k_max_)));
  q_ = 0;
}

int Alg1Agent::action_ago(int j) const {
  return past_actions_[(head_ - j + 2 * k_max_) % k_max_];
}

double Alg1Agent::rate_ago(int j) const {
  return past_rates_[(head_ - j + 2 * k_max_) % k_max_];
}

int Alg1Agent::choose_action() {
  if (q_ == 1) {
    if (rng_.uniform01() < 1.0 - explore_prob_) return action_ago(k_);
    return static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(num_actions_)));
  }
  return static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(num_actions_)));
}

void Alg1Agent::observe(int action, double rate) {
  const bool repeated = q_ == 1 && action == action_ago(k_) &&
                        std::abs(rate - rate_ago(k_)) <= rate_tolerance_;
  if (!repeated) {
    k_ = 1 + static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(k_max_)));
    double mean = rate;
    for (int j = 1; j < k_; ++j) mean += rate_ago(j);
    mean /= k_;
    const double exponent = 1.0 - utility_(mean);
    const double accept = epsilon_ > 0.0 ? std::exp(log_epsilon_ * exponent) : 0.0;
    q_ = rng_.uniform01() < accept ? 1 : 0;
  }
  past_actions_[head_] = action;
  past_rates_[head_] = rate;
  head_ = (head_ + 1) % k_max_;
}

void Alg1Agent::reset_history(std::span<const int> actions, std::span<const double> rates,
                              int k, int q) {
  if (static_cast<int>(actions.size()) != k_max_ || static_cast<int>(rates.size()) != k_max_) {
    throw std::invalid_argument("history must contain exactly k_max entries");
  }
  if (k < 1 || k > k_max_) throw std::invalid_argument("window size out of range");
  for (int j = 0; j < k_max_; ++j) {
    past_actions_[j] = actions[j];
    past_rates_[j] = rates[j];
  }
  head_ = 0;  // entry k_max - 1 is the most recent
  k_ = k;
  q_ = q;
}

Alg1Runner::Alg1Runner(const NetworkModel& model, const UtilityProfile& utility,
                       const Alg1Params& params, int initial_state)
    : model_(&model), utility_(&utility), params_(params) {
  params_.validate(model.num_users());
  if (!model.is_deterministic()) {
    throw ContractError("the window-replay dynamics require deterministic state evolution");
  }
  const int n = model.num_users();
  strides_.assign(n, 1);
  std::int64_t acc = 1;
  for (int i = n - 1; i >= 0; --i) {
    strides_[i] = acc;
    acc *= model.user_action_count(i);
  }
  agents_.reserve(n);
  for (int i = 0; i < n; ++i) {
    agents_.emplace_back(model.user_action_count(i), utility.user(i), params_,
                         derive_stream(params_.seed, kStreamUser, static_cast<std::uint64_t>(i)));
  }
  // Bootstrap window: default (lowest-index) actions from the initial state.
  std::int64_t default_action = 0;
  window_states_.assign(params_.k_max, initial_state);
  window_actions_.assign(params_.k_max, default_action);
  next_state_ = initial_state;
  last_assoc_positions_.assign(n, 0);
  reset_statistics();
}

void Alg1Runner::reset_statistics() {
  slot_ = 0;
  cumulative_rates_.assign(model_->num_users(), 0.0);
}

void Alg1Runner::step() {
  const int n = model_->num_users();
  const int s = next_state_;
  std::int64_t action = 0;
  for (int i = 0; i < n; ++i) {
    const int pos = agents_[i].choose_action();
    last_assoc_positions_[i] = pos;
    action += strides_[i] * pos;
  }
  const auto rates = model_->rates_at(s, action);
  for (int i = 0; i < n; ++i) {
    agents_[i].observe(last_assoc_positions_[i], rates[i]);
    cumulative_rates_[i] += rates[i];
  }
  // shift the configuration window
  for (int j = 0; j + 1 < params_.k_max; ++j) {
    window_states_[j] = window_states_[j + 1];
    window_actions_[j] = window_actions_[j + 1];
  }
  window_states_[params_.k_max - 1] = s;
  window_actions_[params_.k_max - 1] = action;
  next_state_ = model_->g(s, action);
  ++slot_;
}

RunResult Alg1Runner::run(std::int64_t horizon, const TraceOptions& opts,
                          const SnapshotLabeler& labeler) {
  const int n = model_->num_users();
  const std::int64_t stride = opts.effective_stride(horizon);
  RunResult result;
  std::map<int, std::int64_t> occupancy;
  const std::int64_t start = slot_;
  for (std::int64_t t = 1; t <= horizon; ++t) {
    step();
    if (labeler) ++occupancy[labeler(snapshot())];
    const std::int64_t elapsed = slot_;
    if (t % stride == 0 || t == horizon) {
      std::vector<double> avg(n);
      for (int i = 0; i < n; ++i) avg[i] = cumulative_rates_[i] / static_cast<double>(elapsed);
      result.slots.push_back(elapsed);
      result.sum_utility.push_back(utility_->sum_value(avg));
    }
    if (opts.full_trace) {
      RunResult::TraceRow row;
      row.slot = elapsed;
      row.state = window_states_.back();
      row.assoc = model_->assoc_from_index(window_actions_.back());
      const auto r = model_->rates_at(window_states_.back(), window_actions_.back());
      row.rates.assign(r.begin(), r.end());
      for (int i = 0; i < n; ++i) {
        row.q.push_back(agents_[i].q());
        row.k.push_back(agents_[i].window());
      }
      result.trace.push_back(std::move(row));
    }
  }
  result.final_average_rates.resize(n);
  for (int i = 0; i < n; ++i) {
    result.final_average_rates[i] = cumulative_rates_[i] / static_cast<double>(slot_ - start);
  }
  if (labeler) {
    for (const auto& [label, count] : occupancy) {
      result.class_occupancy[label] = static_cast<double>(count) / static_cast<double>(horizon);
    }
  }
  return result;
}

void Alg1Runner::inject(const Alg1Snapshot& snapshot) {
  const int n = model_->num_users();
  const int k_max = params_.k_max;
  if (static_cast<int>(snapshot.states.size()) != k_max ||
      static_cast<int>(snapshot.actions.size()) != k_max ||
      static_cast<int>(snapshot.k.size()) != n || static_cast<int>(snapshot.q.size()) != n) {
    throw std::invalid_argument("snapshot shape does not match the runner");
  }
  window_states_ = snapshot.states;
  window_actions_ = snapshot.actions;
  std::vector<int> actions(k_max);
  std::vector<double> rates(k_max);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k_max; ++j) {
      const auto pos = (snapshot.actions[j] / strides_[i]) %
                       static_cast<std::int64_t>(model_->user_action_count(i));
      actions[j] = static_cast<int>(pos);
      rates[j] = model_->rates_at(snapshot.states[j], snapshot.actions[j])[i];
    }
    agents_[i].reset_history(actions, rates, snapshot.k[i], snapshot.q[i]);
  }
  next_state_ = model_->g(window_states_.back(), window_actions_.back());
  reset_statistics();
}

Alg1Snapshot Alg1Runner::snapshot() const {
  Alg1Snapshot snap;
  snap.states = window_states_;
  snap.actions = window_actions_;
  for (const auto& agent : agents_) {
    snap.k.push_back(agent.window());
    snap.q.push_back(agent.q());
  }
  return snap;
}

RunResult run_alg1(const NetworkModel& model, const UtilityProfile& utility,
                   const Alg1Params& params, std::int64_t horizon, const TraceOptions& opts,
                   int initial_state) {
  Alg1Runner runner(model, utility, params, initial_state);
  return runner.run(horizon, opts);
}

}  // namespace ua
