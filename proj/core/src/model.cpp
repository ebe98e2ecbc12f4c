#include "ua/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ua/errors.hpp"

namespace ua {

namespace {

constexpr double kPmfTolerance = 1e-12;

void check_pmf_row(const std::vector<double>& row, int num_states, const char* what) {
  if (static_cast<int>(row.size()) != num_states) {
    throw std::invalid_argument(std::string(what) + ": pmf row has wrong length");
  }
  double sum = 0.0;
  for (double p : row) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument(std::string(what) + ": pmf entry outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kPmfTolerance) {
    throw std::invalid_argument(std::string(what) + ": pmf row does not sum to 1");
  }
}

}  // namespace

NetworkModel::NetworkModel(int num_users, int num_aps,
                           std::vector<std::vector<int>> assoc_sets, int num_states,
                           std::vector<double> rate_table, Evolution evolution)
    : num_users_(num_users),
      num_aps_(num_aps),
      num_states_(num_states),
      assoc_sets_(std::move(assoc_sets)),
      rate_table_(std::move(rate_table)),
      evolution_(std::move(evolution)) {
  if (num_users_ < 1) throw std::invalid_argument("model needs at least one user");
  if (num_aps_ < 1) throw std::invalid_argument("model needs at least one AP");
  if (num_states_ < 1) throw std::invalid_argument("model needs at least one state");
  if (static_cast<int>(assoc_sets_.size()) != num_users_) {
    throw std::invalid_argument("assoc_sets size must equal num_users");
  }
  for (int i = 0; i < num_users_; ++i) {
    auto& set = assoc_sets_[i];
    if (set.empty()) {
      throw std::invalid_argument("user " + std::to_string(i) + " has an empty association set");
    }
    std::sort(set.begin(), set.end());
    if (std::adjacent_find(set.begin(), set.end()) != set.end()) {
      throw std::invalid_argument("user " + std::to_string(i) + " has duplicate APs");
    }
    if (set.front() < 0 || set.back() >= num_aps_) {
      throw std::invalid_argument("user " + std::to_string(i) + " references an unknown AP");
    }
  }

  strides_.assign(num_users_, 1);
  num_actions_ = 1;
  for (int i = num_users_ - 1; i >= 0; --i) {
    strides_[i] = num_actions_;
    num_actions_ *= static_cast<std::int64_t>(assoc_sets_[i].size());
  }

  const std::int64_t expected = static_cast<std::int64_t>(num_states_) * num_actions_ * num_users_;
  if (static_cast<std::int64_t>(rate_table_.size()) != expected) {
    throw std::invalid_argument("rate table has wrong size");
  }
  for (double r : rate_table_) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("rate outside [0, 1]");
  }

  if (const auto* det = std::get_if<DeterministicEvolution>(&evolution_)) {
    if (static_cast<int>(det->next.size()) != num_states_) {
      throw std::invalid_argument("deterministic map must be total on S x A");
    }
    for (const auto& row : det->next) {
      if (static_cast<std::int64_t>(row.size()) != num_actions_) {
        throw std::invalid_argument("deterministic map must be total on S x A");
      }
      for (int s : row) {
        if (s < 0 || s >= num_states_) throw std::invalid_argument("transition to unknown state");
      }
    }
  } else if (const auto* iid = std::get_if<IidEvolution>(&evolution_)) {
    if (static_cast<std::int64_t>(iid->pmf.size()) != num_actions_) {
      throw std::invalid_argument("iid pmf must have one row per joint action");
    }
    for (const auto& row : iid->pmf) check_pmf_row(row, num_states_, "iid evolution");
  } else if (const auto* cm = std::get_if<ControlledMarkovEvolution>(&evolution_)) {
    if (static_cast<int>(cm->kernel.size()) != num_states_) {
      throw std::invalid_argument("kernel must have one block per state");
    }
    for (const auto& block : cm->kernel) {
      if (static_cast<std::int64_t>(block.size()) != num_actions_) {
        throw std::invalid_argument("kernel must have one row per joint action");
      }
      for (const auto& row : block) check_pmf_row(row, num_states_, "controlled kernel");
    }
  } else if (const auto* ex = std::get_if<ExogenousEvolution>(&evolution_)) {
    if (static_cast<int>(ex->transition.size()) != num_states_) {
      throw std::invalid_argument("exogenous chain must have one row per state");
    }
    for (const auto& row : ex->transition) check_pmf_row(row, num_states_, "exogenous chain");
  }
}

std::int64_t NetworkModel::action_index(std::span<const int> assoc) const {
  if (static_cast<int>(assoc.size()) != num_users_) {
    throw std::invalid_argument("association vector has wrong length");
  }
  std::int64_t idx = 0;
  for (int i = 0; i < num_users_; ++i) {
    const int pos = action_position(i, assoc[i]);
    if (pos < 0) {
      throw std::invalid_argument("user " + std::to_string(i) + " cannot associate with AP " +
                                  std::to_string(assoc[i]));
    }
    idx += strides_[i] * pos;
  }
  return idx;
}

std::vector<int> NetworkModel::assoc_from_index(std::int64_t action) const {
  std::vector<int> assoc(num_users_);
  for (int i = 0; i < num_users_; ++i) {
    const auto pos = action / strides_[i];
    assoc[i] = assoc_sets_[i][static_cast<int>(pos)];
    action %= strides_[i];
  }
  return assoc;
}

int NetworkModel::action_position(int user, int ap) const {
  const auto& set = assoc_sets_[user];
  const auto it = std::lower_bound(set.begin(), set.end(), ap);
  if (it == set.end() || *it != ap) return -1;
  return static_cast<int>(it - set.begin());
}

std::vector<double> NetworkModel::rate(const Configuration& c) const {
  if (c.state < 0 || c.state >= num_states_) {
    throw std::invalid_argument("configuration references an unknown state");
  }
  const auto span = rates_at(c.state, action_index(c.assoc));
  return {span.begin(), span.end()};
}

int NetworkModel::g(int state, std::int64_t action) const {
  const auto* det = std::get_if<DeterministicEvolution>(&evolution_);
  if (det == nullptr) throw ContractError("g() requires the deterministic evolution variant");
  return det->next[state][static_cast<std::size_t>(action)];
}

int NetworkModel::step(int state, std::int64_t action, RngStream& rng) const {
  if (const auto* det = std::get_if<DeterministicEvolution>(&evolution_)) {
    return det->next[state][static_cast<std::size_t>(action)];
  }
  if (const auto* iid = std::get_if<IidEvolution>(&evolution_)) {
    return rng.categorical(iid->pmf[static_cast<std::size_t>(action)]);
  }
  if (const auto* cm = std::get_if<ControlledMarkovEvolution>(&evolution_)) {
    return rng.categorical(cm->kernel[state][static_cast<std::size_t>(action)]);
  }
  throw ContractError("step() is undefined for the exogenous variant; use step_exogenous()");
}

int NetworkModel::step_exogenous(int state, RngStream& rng) const {
  const auto* ex = std::get_if<ExogenousEvolution>(&evolution_);
  if (ex == nullptr) throw ContractError("step_exogenous() requires the exogenous variant");
  return rng.categorical(ex->transition[state]);
}

std::vector<double> NetworkModel::average_rate_indexed(
    int s0, std::span<const std::int64_t> actions) const {
  if (!is_deterministic()) {
    throw ContractError("average_rate() requires the deterministic evolution variant");
  }
  if (actions.empty()) throw std::invalid_argument("average_rate: empty action sequence");
  std::vector<double> mean(num_users_, 0.0);
  int s = s0;
  for (const std::int64_t a : actions) {
    const auto r = rates_at(s, a);
    for (int i = 0; i < num_users_; ++i) mean[i] += r[i];
    s = g(s, a);
  }
  const double inv = 1.0 / static_cast<double>(actions.size());
  for (double& m : mean) m *= inv;
  return mean;
}

std::vector<double> NetworkModel::average_rate(
    int s0, std::span<const std::vector<int>> actions) const {
  std::vector<std::int64_t> indexed;
  indexed.reserve(actions.size());
  for (const auto& a : actions) indexed.push_back(action_index(a));
  return average_rate_indexed(s0, indexed);
}

}  // namespace ua
