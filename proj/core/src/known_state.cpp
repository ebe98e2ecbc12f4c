#include "ua/known_state.hpp"

#include <cmath>
#include <stdexcept>

#include "ua/errors.hpp"

namespace ua {

void KnownStateParams::validate(int num_users) const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1)");
  }
  if (!(z > static_cast<double>(num_users))) {
    throw std::invalid_argument("z must exceed the number of users");
  }
  if (history < 1) throw std::invalid_argument("history depth K must be >= 1");
  if (rate_tolerance < 0.0) throw std::invalid_argument("rate tolerance must be >= 0");
}

Alg3Agent::Alg3Agent(int num_actions, int num_states, UtilityFn utility,
                     const KnownStateParams& params, RngStream rng)
    : num_actions_(num_actions),
      history_(params.history),
      utility_(std::move(utility)),
      epsilon_(params.epsilon),
      explore_prob_(params.epsilon > 0.0 ? std::pow(params.epsilon, params.z) : 0.0),
      log_epsilon_(params.epsilon > 0.0 ? std::log(params.epsilon) : 0.0),
      rate_tolerance_(params.rate_tolerance),
      rng_(std::move(rng)),
      actions_(num_states, std::vector<int>(params.history, 0)),  // default action a0
      rates_(num_states, std::vector<double>(params.history, 0.0)),
      rate_sums_(num_states, 0.0),
      counts_(num_states, 0) {}

void Alg3Agent::note_state(int state) {
  ++counts_[state];
  ++total_;
}

int Alg3Agent::choose(int state) {
  if (q_ == 1) {
    if (rng_.uniform01() < 1.0 - explore_prob_) return actions_[state][0];
    return static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(num_actions_)));
  }
  // Discontent exploration is independent of the state.
  return static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(num_actions_)));
}

double Alg3Agent::weighted_average_payoff(int state, double rate) const {
  if (total_ <= 0) throw std::invalid_argument("weighted average undefined before any slot");
  const double inv_t = 1.0 / static_cast<double>(total_);
  const double inv_k = 1.0 / static_cast<double>(history_);
  double avg = 0.0;
  for (std::size_t s = 0; s < counts_.size(); ++s) {
    if (counts_[s] == 0) continue;
    const double weight = static_cast<double>(counts_[s]) * inv_t;
    if (static_cast<int>(s) == state) {
      avg += weight * (rate_sums_[s] - rates_[s][0] + rate) * inv_k;
    } else {
      avg += weight * rate_sums_[s] * inv_k;
    }
  }
  return avg;
}

void Alg3Agent::observe(int state, int action, double rate) {
  const bool persists = q_ == 1 && action == actions_[state][0] &&
                        std::abs(rate - rates_[state][0]) <= rate_tolerance_;
  if (!persists) {
    const double exponent = 1.0 - utility_(weighted_average_payoff(state, rate));
    const double accept = epsilon_ > 0.0 ? std::exp(log_epsilon_ * exponent) : 0.0;
    q_ = rng_.uniform01() < accept ? 1 : 0;
  }
  // FIFO shift of this state's buffer; the oldest entry drops out.
  auto& acts = actions_[state];
  auto& rs = rates_[state];
  rate_sums_[state] += rate - rs[0];
  for (int j = 0; j + 1 < history_; ++j) {
    acts[j] = acts[j + 1];
    rs[j] = rs[j + 1];
  }
  acts[history_ - 1] = action;
  rs[history_ - 1] = rate;
}

void Alg3Agent::reset_state_history(int state, std::span<const int> actions,
                                    std::span<const double> rates) {
  if (static_cast<int>(actions.size()) != history_ ||
      static_cast<int>(rates.size()) != history_) {
    throw std::invalid_argument("state history must contain exactly K entries");
  }
  double sum = 0.0;
  for (int j = 0; j < history_; ++j) {
    actions_[state][j] = actions[j];
    rates_[state][j] = rates[j];
    sum += rates[j];
  }
  rate_sums_[state] = sum;
}

void Alg3Agent::set_counts(std::span<const std::int64_t> counts) {
  if (counts.size() != counts_.size()) {
    throw std::invalid_argument("need one counter per state");
  }
  total_ = 0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    counts_[s] = counts[s];
    total_ += counts[s];
  }
}

RunResult run_alg3(const NetworkModel& model, const UtilityProfile& utility,
                   const KnownStateParams& params, std::int64_t horizon,
                   const TraceOptions& opts, int initial_state,
                   std::vector<std::vector<std::int64_t>>* action_histogram) {
  params.validate(model.num_users());
  const int n = model.num_users();

  // Exogenous chain row lookup; an action-independent iid pmf is accepted
  // as the special case with identical rows.
  const ExogenousEvolution* ex = std::get_if<ExogenousEvolution>(&model.evolution());
  const IidEvolution* iid = std::get_if<IidEvolution>(&model.evolution());
  if (ex == nullptr && iid == nullptr) {
    throw ContractError("the known-state dynamics require exogenous (or action-independent iid) evolution");
  }
  if (iid != nullptr) {
    for (const auto& row : iid->pmf) {
      if (row != iid->pmf.front()) {
        throw ContractError("iid evolution must be action-independent for the known-state dynamics");
      }
    }
  }
  const auto next_state = [&](int s, RngStream& env) {
    return iid != nullptr ? env.categorical(iid->pmf.front())
                          : env.categorical(ex->transition[s]);
  };

  std::vector<Alg3Agent> agents;
  agents.reserve(n);
  for (int i = 0; i < n; ++i) {
    agents.emplace_back(model.user_action_count(i), model.num_states(), utility.user(i), params,
                        derive_stream(params.seed, kStreamUser, static_cast<std::uint64_t>(i)));
  }
  RngStream env = derive_stream(params.seed, kStreamEnv);

  std::vector<std::int64_t> strides(n, 1);
  {
    std::int64_t acc = 1;
    for (int i = n - 1; i >= 0; --i) {
      strides[i] = acc;
      acc *= model.user_action_count(i);
    }
  }
  if (action_histogram != nullptr) {
    action_histogram->assign(model.num_states(),
                             std::vector<std::int64_t>(model.num_actions(), 0));
  }

  const std::int64_t stride = opts.effective_stride(horizon);
  RunResult result;
  std::vector<double> cumulative(n, 0.0);
  std::vector<int> positions(n);
  int state = initial_state;

  for (std::int64_t t = 1; t <= horizon; ++t) {
    state = next_state(state, env);
    for (int i = 0; i < n; ++i) agents[i].note_state(state);
    std::int64_t action = 0;
    for (int i = 0; i < n; ++i) {
      positions[i] = agents[i].choose(state);
      action += strides[i] * positions[i];
    }
    const auto rates = model.rates_at(state, action);
    for (int i = 0; i < n; ++i) {
      agents[i].observe(state, positions[i], rates[i]);
      cumulative[i] += rates[i];
    }
    if (action_histogram != nullptr) ++(*action_histogram)[state][action];

    if (t % stride == 0 || t == horizon) {
      std::vector<double> avg(n);
      for (int i = 0; i < n; ++i) avg[i] = cumulative[i] / static_cast<double>(t);
      result.slots.push_back(t);
      result.sum_utility.push_back(utility.sum_value(avg));
    }
    if (opts.full_trace) {
      RunResult::TraceRow row;
      row.slot = t;
      row.state = state;
      row.assoc = model.assoc_from_index(action);
      row.rates.assign(rates.begin(), rates.end());
      for (int i = 0; i < n; ++i) {
        row.q.push_back(agents[i].q());
        row.k.push_back(params.history);
      }
      result.trace.push_back(std::move(row));
    }
  }

  result.final_average_rates.resize(n);
  for (int i = 0; i < n; ++i) {
    result.final_average_rates[i] = cumulative[i] / static_cast<double>(horizon);
  }
  return result;
}

}  // namespace ua
