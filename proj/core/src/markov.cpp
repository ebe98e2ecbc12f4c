#include "ua/markov.hpp"

#include <cmath>
#include <numeric>
#include <queue>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "ua/errors.hpp"

namespace ua {

namespace {

constexpr double kEdgeTol = 0.0;  // strict positivity defines an edge

std::vector<std::vector<int>> positive_graph(const TransitionMatrix& p) {
  const int n = static_cast<int>(p.size());
  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p[i][j] > kEdgeTol) adj[i].push_back(j);
    }
  }
  return adj;
}

bool reaches_all(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<char> seen(adj.size(), 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == adj.size();
}

}  // namespace

bool chain_is_irreducible(const TransitionMatrix& p) {
  const auto adj = positive_graph(p);
  if (!reaches_all(adj, 0)) return false;
  std::vector<std::vector<int>> rev(adj.size());
  for (std::size_t u = 0; u < adj.size(); ++u) {
    for (const int v : adj[u]) rev[v].push_back(static_cast<int>(u));
  }
  return reaches_all(rev, 0);
}

int chain_period(const TransitionMatrix& p) {
  // BFS levels from state 0; the period is the gcd of d(u) + 1 - d(v) over
  // all edges (u, v) of an irreducible chain.
  const auto adj = positive_graph(p);
  const int n = static_cast<int>(adj.size());
  std::vector<int> depth(n, -1);
  std::queue<int> queue;
  depth[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (const int v : adj[u]) {
      if (depth[v] < 0) {
        depth[v] = depth[u] + 1;
        queue.push(v);
      }
    }
  }
  int g = 0;
  for (int u = 0; u < n; ++u) {
    for (const int v : adj[u]) g = std::gcd(g, std::abs(depth[u] + 1 - depth[v]));
  }
  return g == 0 ? 1 : g;
}

std::vector<double> stationary_distribution(const TransitionMatrix& p) {
  const int n = static_cast<int>(p.size());
  if (n == 0) throw std::invalid_argument("empty transition matrix");
  if (!chain_is_irreducible(p)) {
    throw ContractError("stationary_distribution: chain is reducible under this control");
  }
  if (chain_period(p) != 1) {
    throw ContractError("stationary_distribution: chain is periodic under this control");
  }
  // Solve pi (P - I) = 0 with the last balance equation replaced by the
  // normalization sum(pi) = 1.
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = p[j][i] - (i == j ? 1.0 : 0.0);
  }
  for (int j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd pi = a.partialPivLu().solve(b);

  double residual = 0.0;
  for (int j = 0; j < n; ++j) {
    double balance = -pi(j);
    for (int i = 0; i < n; ++i) balance += pi(i) * p[i][j];
    residual = std::max(residual, std::abs(balance));
  }
  if (residual > 1e-10) throw InternalError("stationary_distribution: residual above 1e-10");
  return {pi.data(), pi.data() + n};
}

double slem(const TransitionMatrix& p) {
  const int n = static_cast<int>(p.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = p[i][j];
  }
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  std::vector<double> moduli(n);
  for (int i = 0; i < n; ++i) moduli[i] = std::abs(solver.eigenvalues()(i));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  return n >= 2 ? moduli[1] : 0.0;
}

std::int64_t control_space_size(const NetworkModel& model) {
  std::int64_t total = 1;
  for (int i = 0; i < model.num_users(); ++i) {
    for (int s = 0; s < model.num_states(); ++s) {
      total *= model.user_action_count(i);
      if (total > (std::int64_t{1} << 40)) return total;  // saturate, caller guards
    }
  }
  return total;
}

std::vector<StationaryControl> enumerate_controls(const NetworkModel& model,
                                                  std::int64_t max_controls) {
  const std::int64_t total = control_space_size(model);
  if (total > max_controls) {
    throw GuardError("stationary-control enumeration guard exceeded: |H| = " +
                     std::to_string(total));
  }
  const int n = model.num_users();
  const int ns = model.num_states();
  std::vector<StationaryControl> out;
  out.reserve(static_cast<std::size_t>(total));
  StationaryControl current;
  current.h.assign(n, std::vector<int>(ns, 0));
  // Odometer over all (user, state) slots.
  std::vector<int> digit(static_cast<std::size_t>(n) * ns, 0);
  for (;;) {
    for (int i = 0; i < n; ++i) {
      for (int s = 0; s < ns; ++s) {
        current.h[i][s] = model.assoc_set(i)[digit[static_cast<std::size_t>(i) * ns + s]];
      }
    }
    out.push_back(current);
    int k = static_cast<int>(digit.size()) - 1;
    while (k >= 0) {
      const int user = k / ns;
      if (++digit[k] < model.user_action_count(user)) break;
      digit[k] = 0;
      --k;
    }
    if (k < 0) break;
  }
  return out;
}

TransitionMatrix induced_kernel(const NetworkModel& model, const StationaryControl& control) {
  const auto* cm = std::get_if<ControlledMarkovEvolution>(&model.evolution());
  if (cm == nullptr) {
    throw ContractError("induced_kernel requires the controlled Markov evolution variant");
  }
  TransitionMatrix rows(model.num_states());
  std::vector<int> assoc(model.num_users());
  for (int s = 0; s < model.num_states(); ++s) {
    for (int i = 0; i < model.num_users(); ++i) assoc[i] = control.h[i][s];
    rows[s] = cm->kernel[s][static_cast<std::size_t>(model.action_index(assoc))];
  }
  return rows;
}

std::vector<double> expected_payoff_iid(const NetworkModel& model, std::int64_t action) {
  const auto* iid = std::get_if<IidEvolution>(&model.evolution());
  if (iid == nullptr) throw ContractError("expected_payoff_iid requires the iid evolution variant");
  std::vector<double> mean(model.num_users(), 0.0);
  const auto& pmf = iid->pmf[static_cast<std::size_t>(action)];
  for (int s = 0; s < model.num_states(); ++s) {
    if (pmf[s] == 0.0) continue;
    const auto r = model.rates_at(s, action);
    for (int i = 0; i < model.num_users(); ++i) mean[i] += pmf[s] * r[i];
  }
  return mean;
}

std::vector<double> expected_payoff_control(const NetworkModel& model,
                                            const StationaryControl& control) {
  const auto mu = stationary_distribution(induced_kernel(model, control));
  std::vector<double> mean(model.num_users(), 0.0);
  std::vector<int> assoc(model.num_users());
  for (int s = 0; s < model.num_states(); ++s) {
    for (int i = 0; i < model.num_users(); ++i) assoc[i] = control.h[i][s];
    const auto r = model.rates_at(s, model.action_index(assoc));
    for (int i = 0; i < model.num_users(); ++i) mean[i] += mu[s] * r[i];
  }
  return mean;
}

std::vector<double> exogenous_time_average(const NetworkModel& model) {
  const auto* ex = std::get_if<ExogenousEvolution>(&model.evolution());
  if (ex != nullptr) return stationary_distribution(ex->transition);
  if (const auto* iid = std::get_if<IidEvolution>(&model.evolution())) {
    // Action-independent iid evolution is the degenerate exogenous case.
    for (const auto& row : iid->pmf) {
      if (row != iid->pmf.front()) {
        throw ContractError("iid evolution is action-dependent; no exogenous time average");
      }
    }
    return iid->pmf.front();
  }
  throw ContractError("exogenous_time_average requires exogenous (or action-independent iid) evolution");
}

}  // namespace ua
