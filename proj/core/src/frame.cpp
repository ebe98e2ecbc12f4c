#include "ua/frame.hpp"

#include <cmath>
#include <stdexcept>

#include "ua/errors.hpp"

namespace ua {

void FrameParams::validate(int num_users) const {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in [0, 1)");
  }
  if (!(z > static_cast<double>(num_users))) {
    throw std::invalid_argument("z must exceed the number of users");
  }
  if (history < 1) throw std::invalid_argument("history depth K must be >= 1");
  if (frame_len < 1) throw std::invalid_argument("frame length L must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
}

FrameParamChoice choose_frame_params_iid(double epsilon, double z, double c2) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  }
  if (c2 <= 0.0) c2 = 2.0 * z;
  FrameParamChoice out;
  out.frame_len = static_cast<int>(std::ceil(1.0 / epsilon));
  out.delta = std::sqrt(c2 * std::log(1.0 / epsilon) / out.frame_len);
  out.vacuous = out.delta >= 1.0;
  return out;
}

FrameParamChoice choose_frame_params_markov(double epsilon, double z, double lambda_min) {
  if (!(lambda_min >= 0.0 && lambda_min < 1.0)) {
    throw std::invalid_argument("lambda_min must lie in [0, 1)");
  }
  return choose_frame_params_iid(epsilon, z,
                                 z * (1.0 - lambda_min) / (1.0 + lambda_min));
}

FrameAgent::FrameAgent(int num_choices, UtilityFn utility, const FrameParams& params,
                       RngStream rng)
    : num_choices_(num_choices),
      utility_(std::move(utility)),
      epsilon_(params.epsilon),
      explore_prob_(params.epsilon > 0.0 ? std::pow(params.epsilon, params.z) : 0.0),
      log_epsilon_(params.epsilon > 0.0 ? std::log(params.epsilon) : 0.0),
      history_(params.history),
      delta_(params.delta),
      rng_(std::move(rng)),
      past_choices_(params.history, 0),
      past_averages_(params.history, 0.0) {}

int FrameAgent::choice_ago(int j) const {
  return past_choices_[(head_ - j + 2 * history_) % history_];
}

double FrameAgent::average_ago(int j) const {
  return past_averages_[(head_ - j + 2 * history_) % history_];
}

int FrameAgent::choose() {
  if (q_ == 1) {
    if (rng_.uniform01() < 1.0 - explore_prob_) return choice_ago(history_);
    return static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(num_choices_)));
  }
  return static_cast<int>(rng_.uniform_int(static_cast<std::uint32_t>(num_choices_)));
}

void FrameAgent::observe(int choice, double frame_average) {
  const bool repeated = q_ == 1 && choice == choice_ago(history_) &&
                        std::abs(frame_average - average_ago(history_)) < delta_;
  if (!repeated) {
    double mean = frame_average;
    for (int j = 1; j < history_; ++j) mean += average_ago(j);
    mean /= history_;
    const double exponent = 1.0 - utility_(mean);
    const double accept = epsilon_ > 0.0 ? std::exp(log_epsilon_ * exponent) : 0.0;
    q_ = rng_.uniform01() < accept ? 1 : 0;
  }
  past_choices_[head_] = choice;
  past_averages_[head_] = frame_average;
  head_ = (head_ + 1) % history_;
}

void FrameAgent::reset_history(std::span<const int> choices, std::span<const double> averages,
                               int q) {
  if (static_cast<int>(choices.size()) != history_ ||
      static_cast<int>(averages.size()) != history_) {
    throw std::invalid_argument("history must contain exactly K entries");
  }
  for (int j = 0; j < history_; ++j) {
    past_choices_[j] = choices[j];
    past_averages_[j] = averages[j];
  }
  head_ = 0;
  q_ = q;
}

RunResult run_frame(const NetworkModel& model, const UtilityProfile& utility,
                    const FrameParams& params, FrameVariant variant,
                    std::int64_t horizon_frames, const TraceOptions& opts, int initial_state) {
  params.validate(model.num_users());
  const int n = model.num_users();
  const int num_states = model.num_states();
  const IidEvolution* iid = std::get_if<IidEvolution>(&model.evolution());
  const ControlledMarkovEvolution* cm = std::get_if<ControlledMarkovEvolution>(&model.evolution());
  if (variant == FrameVariant::kIidAction && iid == nullptr) {
    throw ContractError("iid-action frames require the IidPerAction evolution variant");
  }
  if (variant == FrameVariant::kMarkovControl && cm == nullptr) {
    throw ContractError("control frames require the ControlledMarkov evolution variant");
  }

  // Choice space per user: APs in the iid variant, stationary per-user
  // controls (maps state -> AP position, encoded base |A_i|) otherwise.
  std::vector<int> num_choices(n);
  for (int i = 0; i < n; ++i) {
    if (variant == FrameVariant::kIidAction) {
      num_choices[i] = model.user_action_count(i);
    } else {
      std::int64_t count = 1;
      for (int s = 0; s < num_states; ++s) {
        count *= model.user_action_count(i);
        if (count > 1'000'000'000) {
          throw GuardError("per-user control space too large for frame simulation");
        }
      }
      num_choices[i] = static_cast<int>(count);
    }
  }

  std::vector<FrameAgent> agents;
  agents.reserve(n);
  for (int i = 0; i < n; ++i) {
    agents.emplace_back(num_choices[i], utility.user(i), params,
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
  // Maps a control index and a state to that user's action position.
  const auto control_position = [&](int user, int control, int state) {
    int c = control;
    for (int s = 0; s < state; ++s) c /= model.user_action_count(user);
    return c % model.user_action_count(user);
  };

  const std::int64_t l = params.frame_len;
  const std::int64_t stride = opts.effective_stride(horizon_frames);
  RunResult result;
  std::vector<double> cumulative(n, 0.0);
  std::vector<double> frame_sum(n);
  std::vector<int> choices(n);
  int state = initial_state;

  for (std::int64_t frame = 1; frame <= horizon_frames; ++frame) {
    for (int i = 0; i < n; ++i) choices[i] = agents[i].choose();

    std::fill(frame_sum.begin(), frame_sum.end(), 0.0);
    std::int64_t fixed_action = 0;
    if (variant == FrameVariant::kIidAction) {
      for (int i = 0; i < n; ++i) fixed_action += strides[i] * choices[i];
    }
    for (std::int64_t t = 0; t < l; ++t) {
      std::int64_t action = fixed_action;
      if (variant == FrameVariant::kIidAction) {
        state = env.categorical(iid->pmf[static_cast<std::size_t>(action)]);
      } else {
        // a(t) = h(s(t)): every user applies its control to the known state.
        action = 0;
        for (int i = 0; i < n; ++i) {
          action += strides[i] * control_position(i, choices[i], state);
        }
      }
      const auto rates = model.rates_at(state, action);
      for (int i = 0; i < n; ++i) frame_sum[i] += rates[i];
      if (variant == FrameVariant::kMarkovControl) {
        state = env.categorical(cm->kernel[state][static_cast<std::size_t>(action)]);
      }
    }

    for (int i = 0; i < n; ++i) {
      const double avg = frame_sum[i] / static_cast<double>(l);
      agents[i].observe(choices[i], avg);
      cumulative[i] += frame_sum[i];
    }

    if (frame % stride == 0 || frame == horizon_frames) {
      std::vector<double> avg(n);
      for (int i = 0; i < n; ++i) {
        avg[i] = cumulative[i] / static_cast<double>(frame * l);
      }
      result.slots.push_back(frame * l);
      result.sum_utility.push_back(utility.sum_value(avg));
    }
    if (opts.full_trace) {
      RunResult::TraceRow row;
      row.slot = frame * l;
      row.state = state;
      row.assoc.assign(choices.begin(), choices.end());
      for (int i = 0; i < n; ++i) {
        row.rates.push_back(frame_sum[i] / static_cast<double>(l));
        row.q.push_back(agents[i].q());
        row.k.push_back(params.history);
      }
      result.trace.push_back(std::move(row));
    }
  }

  result.final_average_rates.resize(n);
  for (int i = 0; i < n; ++i) {
    result.final_average_rates[i] =
        cumulative[i] / static_cast<double>(horizon_frames * l);
  }
  return result;
}

}  // namespace ua
