#include "ua/chain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <unordered_map>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "ua/errors.hpp"

namespace ua {

namespace {

constexpr double kZeroEdgeTol = 1e-14;
constexpr double kRowSumTol = 1e-9;

}  // namespace

std::int64_t PerturbedChain::encode(const Alg1Snapshot& snapshot) const {
  const int n = model_.num_users();
  std::int64_t window = 0;
  for (int j = 0; j < k_max_; ++j) {
    const std::int64_t config =
        static_cast<std::int64_t>(snapshot.states[j]) * model_.num_actions() +
        snapshot.actions[j];
    window = window * config_count_ + config;
  }
  std::int64_t k_idx = 0;
  for (int i = 0; i < n; ++i) k_idx = k_idx * k_max_ + (snapshot.k[i] - 1);
  std::int64_t q_idx = 0;
  for (int i = 0; i < n; ++i) q_idx = q_idx * 2 + snapshot.q[i];
  return (window * k_space_ + k_idx) * q_space_ + q_idx;
}

Alg1Snapshot PerturbedChain::decode(std::int64_t index) const {
  const int n = model_.num_users();
  Alg1Snapshot snap;
  const std::int64_t q_idx = index % q_space_;
  index /= q_space_;
  const std::int64_t k_idx = index % k_space_;
  std::int64_t window = index / k_space_;

  snap.states.resize(k_max_);
  snap.actions.resize(k_max_);
  for (int j = k_max_ - 1; j >= 0; --j) {
    const std::int64_t config = window % config_count_;
    window /= config_count_;
    snap.states[j] = static_cast<int>(config / model_.num_actions());
    snap.actions[j] = config % model_.num_actions();
  }
  snap.k.resize(n);
  std::int64_t k_rem = k_idx;
  for (int i = n - 1; i >= 0; --i) {
    snap.k[i] = static_cast<int>(k_rem % k_max_) + 1;
    k_rem /= k_max_;
  }
  snap.q.resize(n);
  std::int64_t q_rem = q_idx;
  for (int i = n - 1; i >= 0; --i) {
    snap.q[i] = static_cast<int>(q_rem % 2);
    q_rem /= 2;
  }
  return snap;
}

const EpsPoly& PerturbedChain::prob(std::int64_t from, std::int64_t to) const {
  static const EpsPoly kZero;
  for (const auto& e : rows_[from]) {
    if (e.to == to) return pool_[e.poly];
  }
  return kZero;
}

double PerturbedChain::resistance(std::int64_t from, std::int64_t to) const {
  return prob(from, to).resistance();
}

bool PerturbedChain::window_consistent(std::int64_t state) const {
  const auto snap = decode(state);
  for (int j = 0; j + 1 < k_max_; ++j) {
    if (model_.g(snap.states[j], snap.actions[j]) != snap.states[j + 1]) return false;
  }
  return true;
}

PerturbedChain build_chain(const NetworkModel& model, const UtilityProfile& utility, double z,
                           int k_max, const ChainBuildOptions& options) {
  if (!model.is_deterministic()) {
    throw ContractError("the perturbed chain is defined for deterministic evolution");
  }
  if (!(z > model.num_users())) throw std::invalid_argument("z must exceed the number of users");
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");

  PerturbedChain chain(model, utility);
  chain.z_ = z;
  chain.k_max_ = k_max;
  const int n = model.num_users();
  chain.config_count_ = static_cast<std::int64_t>(model.num_states()) * model.num_actions();

  chain.window_space_ = 1;
  for (int j = 0; j < k_max; ++j) {
    chain.window_space_ *= chain.config_count_;
    if (chain.window_space_ > options.max_states) break;
  }
  chain.k_space_ = 1;
  for (int i = 0; i < n; ++i) chain.k_space_ *= k_max;
  chain.q_space_ = std::int64_t{1} << n;
  chain.num_states_ = chain.window_space_ * chain.k_space_ * chain.q_space_;
  if (chain.num_states_ > options.max_states || chain.window_space_ > options.max_states) {
    throw GuardError("chain state space exceeds the build guard (" +
                     std::to_string(options.max_states) + " states)");
  }

  std::vector<std::int64_t> strides(n, 1);
  {
    std::int64_t acc = 1;
    for (int i = n - 1; i >= 0; --i) {
      strides[i] = acc;
      acc *= model.user_action_count(i);
    }
  }

  std::map<EpsPoly, std::int32_t> pool_index;
  const auto intern = [&](const EpsPoly& p) {
    const auto [it, inserted] =
        pool_index.emplace(p, static_cast<std::int32_t>(chain.pool_.size()));
    if (inserted) chain.pool_.push_back(p);
    return it->second;
  };

  chain.rows_.resize(static_cast<std::size_t>(chain.num_states_));

  // Scratch buffers reused across rows.
  std::vector<std::vector<double>> window_rates(k_max);  // [slot][user]
  std::vector<std::vector<int>> window_pos(k_max, std::vector<int>(n));
  std::vector<int> repeat_pos(n);
  std::vector<std::vector<std::pair<int, EpsPoly>>> action_menu(n);
  struct Outcome {
    int k;
    int q;
    EpsPoly poly;
  };
  std::vector<std::vector<Outcome>> outcome_menu(n);
  std::vector<std::vector<double>> suffix_sums(n, std::vector<double>(k_max, 0.0));
  std::unordered_map<std::int64_t, EpsPoly> acc;

  for (std::int64_t omega = 0; omega < chain.num_states_; ++omega) {
    const Alg1Snapshot snap = chain.decode(omega);

    for (int j = 0; j < k_max; ++j) {
      const auto r = model.rates_at(snap.states[j], snap.actions[j]);
      window_rates[j].assign(r.begin(), r.end());
      for (int i = 0; i < n; ++i) {
        window_pos[j][i] = static_cast<int>(
            (snap.actions[j] / strides[i]) % model.user_action_count(i));
      }
    }
    // suffix_sums[i][m] = sum of user i's rates over the m newest window slots
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int m = 0; m < k_max; ++m) {
        s += window_rates[k_max - 1 - m][i];
        suffix_sums[i][m] = s;
      }
    }
    const int s_next = model.g(snap.states[k_max - 1], snap.actions[k_max - 1]);

    // Action menus: a content user repeats the position it took K_i slots
    // back with probability 1 - eps^z and explores uniformly with eps^z.
    for (int i = 0; i < n; ++i) {
      const int count = model.user_action_count(i);
      repeat_pos[i] = window_pos[k_max - snap.k[i]][i];
      action_menu[i].clear();
      if (snap.q[i] == 1) {
        for (int p = 0; p < count; ++p) {
          EpsPoly poly = EpsPoly::monomial(1.0 / count, chain.z_);
          if (p == repeat_pos[i]) poly += EpsPoly::monomial(1.0, 0.0) +
                                          EpsPoly::monomial(-1.0, chain.z_);
          action_menu[i].push_back({p, std::move(poly)});
        }
      } else {
        for (int p = 0; p < count; ++p) {
          action_menu[i].push_back({p, EpsPoly::constant(1.0 / count)});
        }
      }
    }

    acc.clear();
    const std::int64_t window_shift =
        (omega / (chain.k_space_ * chain.q_space_)) % chain.window_space_;
    const std::int64_t shifted_window =
        (window_shift % (chain.window_space_ / chain.config_count_)) * chain.config_count_;

    // All joint next actions.
    std::vector<int> pos(n, 0);
    std::function<void(int, std::int64_t, const EpsPoly&)> action_rec =
        [&](int user, std::int64_t action, const EpsPoly& p_action) {
          if (user < n) {
            for (const auto& [p, poly] : action_menu[user]) {
              pos[user] = p;
              action_rec(user + 1, action + strides[user] * p, p_action * poly);
            }
            return;
          }
          const auto new_rates = model.rates_at(s_next, action);
          // Mood and window-size outcomes per user.
          for (int i = 0; i < n; ++i) {
            outcome_menu[i].clear();
            const bool repeated = snap.q[i] == 1 && pos[i] == repeat_pos[i] &&
                                  new_rates[i] == window_rates[k_max - snap.k[i]][i];
            if (repeated) {
              outcome_menu[i].push_back({snap.k[i], 1, EpsPoly::constant(1.0)});
              continue;
            }
            for (int k = 1; k <= k_max; ++k) {
              const double mean =
                  (new_rates[i] + (k > 1 ? suffix_sums[i][k - 2] : 0.0)) / k;
              const double exponent = 1.0 - utility.user(i)(mean);
              EpsPoly accept = EpsPoly::monomial(1.0 / k_max, exponent);
              EpsPoly reject = EpsPoly::constant(1.0 / k_max) +
                               EpsPoly::monomial(-1.0 / k_max, exponent);
              outcome_menu[i].push_back({k, 1, std::move(accept)});
              outcome_menu[i].push_back({k, 0, std::move(reject)});
            }
          }
          const std::int64_t config_next =
              static_cast<std::int64_t>(s_next) * model.num_actions() + action;
          const std::int64_t new_window = shifted_window + config_next;
          std::function<void(int, std::int64_t, std::int64_t, const EpsPoly&)> outcome_rec =
              [&](int user, std::int64_t k_idx, std::int64_t q_idx, const EpsPoly& p_all) {
                if (user == n) {
                  const std::int64_t target =
                      (new_window * chain.k_space_ + k_idx) * chain.q_space_ + q_idx;
                  acc[target] += p_all;
                  return;
                }
                for (const auto& outcome : outcome_menu[user]) {
                  outcome_rec(user + 1, k_idx * k_max + (outcome.k - 1), q_idx * 2 + outcome.q,
                              p_all * outcome.poly);
                }
              };
          outcome_rec(0, 0, 0, p_action);
        };
    action_rec(0, 0, EpsPoly::constant(1.0));

    auto& row = chain.rows_[omega];
    row.reserve(acc.size());
    for (const auto& [to, poly] : acc) {
      if (poly.is_zero()) continue;
      if (poly.leading_coefficient() < 0.0) {
        throw InternalError("transition polynomial has a negative leading coefficient");
      }
      row.push_back({to, intern(poly)});
    }
    std::sort(row.begin(), row.end(),
              [](const PerturbedChain::Entry& a, const PerturbedChain::Entry& b) {
                return a.to < b.to;
              });
    for (const double eps : options.row_check_eps) {
      double sum = 0.0;
      for (const auto& e : row) sum += chain.pool_[e.poly].eval(eps);
      if (std::abs(sum - 1.0) > kRowSumTol) {
        throw InternalError("transition row does not sum to 1 at eps = " + std::to_string(eps));
      }
    }
  }
  return chain;
}

// ---------------------------------------------------------------------------
// Recurrent classes of the eps = 0 chain

namespace {

// Iterative Tarjan SCC over the positive-at-zero transition graph.
std::vector<std::int32_t> strongly_connected_components(
    const PerturbedChain& chain, std::int32_t* num_components) {
  const std::int64_t n = chain.num_states();
  std::vector<std::int32_t> comp(n, -1);
  std::vector<std::int32_t> low(n, 0), num(n, -1);
  std::vector<std::int64_t> call_stack, tarjan_stack;
  std::vector<std::size_t> edge_pos(n, 0);
  std::vector<char> on_stack(n, 0);
  std::int32_t counter = 0, components = 0;

  const auto zero_edges = [&](std::int64_t u) {
    return chain.row(u);
  };

  for (std::int64_t root = 0; root < n; ++root) {
    if (num[root] >= 0) continue;
    call_stack.push_back(root);
    while (!call_stack.empty()) {
      const std::int64_t u = call_stack.back();
      if (num[u] < 0) {
        num[u] = low[u] = counter++;
        tarjan_stack.push_back(u);
        on_stack[u] = 1;
        edge_pos[u] = 0;
      }
      bool descended = false;
      const auto row = zero_edges(u);
      while (edge_pos[u] < row.size()) {
        const auto& e = row[edge_pos[u]++];
        if (chain.poly(e.poly).constant_term() <= kZeroEdgeTol) continue;
        const std::int64_t v = e.to;
        if (num[v] < 0) {
          call_stack.push_back(v);
          descended = true;
          break;
        }
        if (on_stack[v]) low[u] = std::min(low[u], num[v]);
      }
      if (descended) continue;
      if (low[u] == num[u]) {
        for (;;) {
          const std::int64_t w = tarjan_stack.back();
          tarjan_stack.pop_back();
          on_stack[w] = 0;
          comp[w] = components;
          if (w == u) break;
        }
        ++components;
      }
      call_stack.pop_back();
      if (!call_stack.empty()) {
        const std::int64_t parent = call_stack.back();
        low[parent] = std::min(low[parent], low[u]);
      }
    }
  }
  *num_components = components;
  return comp;
}

}  // namespace

std::vector<int> RecurrentClasses::content_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i].kind == RecurrentClass::Kind::kContent) out.push_back(static_cast<int>(i));
  }
  return out;
}

RecurrentClasses recurrent_classes_zero(const PerturbedChain& chain) {
  const std::int64_t n = chain.num_states();
  std::int32_t num_components = 0;
  const auto comp = strongly_connected_components(chain, &num_components);

  // A component is recurrent iff no eps = 0 edge leaves it.
  std::vector<char> has_exit(num_components, 0);
  for (std::int64_t u = 0; u < n; ++u) {
    for (const auto& e : chain.row(u)) {
      if (chain.poly(e.poly).constant_term() <= kZeroEdgeTol) continue;
      if (comp[e.to] != comp[u]) has_exit[comp[u]] = 1;
    }
  }

  std::vector<std::vector<std::int64_t>> members(num_components);
  for (std::int64_t u = 0; u < n; ++u) members[comp[u]].push_back(u);

  const NetworkModel& model = chain.model();
  const UtilityProfile& utility = chain.utility();
  const int num_users = model.num_users();
  const int k_max = chain.k_max();

  RecurrentClasses out;
  out.class_of.assign(n, -1);
  for (std::int32_t c = 0; c < num_components; ++c) {
    if (has_exit[c]) continue;
    const auto& states = members[c];
    int content_votes = 0, discontent_votes = 0;
    for (const std::int64_t u : states) {
      const auto snap = chain.decode(u);
      const bool all_content =
          std::all_of(snap.q.begin(), snap.q.end(), [](int q) { return q == 1; });
      const bool all_discontent =
          std::all_of(snap.q.begin(), snap.q.end(), [](int q) { return q == 0; });
      if (all_content) ++content_votes;
      else if (all_discontent) ++discontent_votes;
    }
    if (content_votes != static_cast<int>(states.size()) &&
        discontent_votes != static_cast<int>(states.size())) {
      throw ContractError(
          "recurrent class with mixed moods found: the instance violates interdependence "
          "(a subset of users can move without disturbing anyone outside)");
    }

    RecurrentClass rc;
    rc.states = states;
    if (discontent_votes == static_cast<int>(states.size())) {
      rc.kind = RecurrentClass::Kind::kDiscontent;
      if (out.discontent_index >= 0) {
        throw InternalError("more than one all-discontent recurrent class");
      }
      out.discontent_index = static_cast<int>(out.classes.size());
    } else {
      rc.kind = RecurrentClass::Kind::kContent;
      // Verify the window structure on every member and pull the class
      // invariants (K vector, per-user window averages) from the first.
      for (std::size_t m = 0; m < states.size(); ++m) {
        const auto snap = chain.decode(states[m]);
        if (!chain.window_consistent(states[m])) {
          throw InternalError("content recurrent class contains an inconsistent window");
        }
        for (int i = 0; i < num_users; ++i) {
          const int k = snap.k[i];
          for (int j = k; j < k_max; ++j) {
            const auto pos_now = model.rates_at(snap.states[j], snap.actions[j])[i];
            const auto pos_then = model.rates_at(snap.states[j - k], snap.actions[j - k])[i];
            const auto a_now = snap.actions[j], a_then = snap.actions[j - k];
            // user i's action positions must repeat with interval K_i
            std::int64_t stride = 1;
            for (int u2 = num_users - 1; u2 > i; --u2) stride *= model.user_action_count(u2);
            if ((a_now / stride) % model.user_action_count(i) !=
                (a_then / stride) % model.user_action_count(i) ||
                pos_now != pos_then) {
              throw InternalError(
                  "content recurrent class does not repeat with the stored window sizes");
            }
          }
        }
        if (m == 0) {
          rc.window_sizes = snap.k;
          rc.window_averages.assign(num_users, 0.0);
          for (int i = 0; i < num_users; ++i) {
            double sum = 0.0;
            for (int j = 0; j < snap.k[i]; ++j) {
              sum += model.rates_at(snap.states[j], snap.actions[j])[i];
            }
            rc.window_averages[i] = sum / snap.k[i];
          }
          for (int i = 0; i < num_users; ++i) {
            const double u_val = utility.user(i)(rc.window_averages[i]);
            rc.utility_sum += u_val;
            rc.deficit += 1.0 - u_val;
          }
        }
      }
    }
    for (const std::int64_t u : states) {
      out.class_of[u] = static_cast<std::int32_t>(out.classes.size());
    }
    out.classes.push_back(std::move(rc));
  }
  if (out.discontent_index < 0) {
    throw InternalError("no all-discontent recurrent class found");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Resistances and potentials

namespace {

// Multi-source Dijkstra over one-step resistances from one class; returns
// the minimum accumulated resistance into every state.
std::vector<double> resistance_distances(const PerturbedChain& chain,
                                         std::span<const std::int64_t> sources) {
  std::vector<double> dist(chain.num_states(), kInfiniteResistance);
  using Item = std::pair<double, std::int64_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (const std::int64_t u : sources) {
    dist[u] = 0.0;
    heap.push({0.0, u});
  }
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d > dist[u]) continue;
    for (const auto& e : chain.row(u)) {
      const double w = chain.poly(e.poly).resistance();
      if (d + w < dist[e.to]) {
        dist[e.to] = d + w;
        heap.push({dist[e.to], e.to});
      }
    }
  }
  return dist;
}

double min_over_states(const std::vector<double>& dist,
                       std::span<const std::int64_t> states) {
  double best = kInfiniteResistance;
  for (const std::int64_t u : states) best = std::min(best, dist[u]);
  return best;
}

}  // namespace

double class_resistance(const PerturbedChain& chain, const RecurrentClasses& classes,
                        int from_class, int to_class) {
  const auto dist = resistance_distances(chain, classes.classes[from_class].states);
  const double rho = min_over_states(dist, classes.classes[to_class].states);
  if (std::isinf(rho)) {
    throw InternalError("recurrent class unreachable; irreducibility or interdependence broken");
  }
  return rho;
}

std::vector<std::vector<double>> class_resistance_matrix(const PerturbedChain& chain,
                                                         const RecurrentClasses& classes) {
  const int l = static_cast<int>(classes.classes.size());
  std::vector<std::vector<double>> rho(l, std::vector<double>(l, 0.0));
  for (int a = 0; a < l; ++a) {
    const auto dist = resistance_distances(chain, classes.classes[a].states);
    for (int b = 0; b < l; ++b) {
      if (a == b) continue;
      rho[a][b] = min_over_states(dist, classes.classes[b].states);
      if (std::isinf(rho[a][b])) {
        throw InternalError("recurrent class unreachable; irreducibility or interdependence broken");
      }
    }
  }
  return rho;
}

namespace {

// Minimum spanning in-tree (every non-root vertex keeps one outgoing edge,
// all paths lead to the root) via Chu-Liu/Edmonds on the reversed graph.
double min_in_tree_branching(const std::vector<std::vector<double>>& weights, int root) {
  const int n = static_cast<int>(weights.size());
  struct Edge {
    int from, to;
    double w;
  };
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      // reversed: original edge j -> i
      edges.push_back({i, j, weights[j][i]});
    }
  }
  int num_nodes = n;
  int cur_root = root;
  double total = 0.0;
  for (;;) {
    std::vector<double> in_w(num_nodes, kInfiniteResistance);
    std::vector<int> pre(num_nodes, -1);
    for (const auto& e : edges) {
      if (e.to != cur_root && e.w < in_w[e.to]) {
        in_w[e.to] = e.w;
        pre[e.to] = e.from;
      }
    }
    for (int v = 0; v < num_nodes; ++v) {
      if (v != cur_root && pre[v] < 0) {
        throw InternalError("branching: some vertex cannot reach the root");
      }
    }
    std::vector<int> id(num_nodes, -1), visited(num_nodes, -1);
    int contracted = 0;
    for (int v = 0; v < num_nodes; ++v) {
      if (v != cur_root) total += in_w[v];
    }
    for (int v = 0; v < num_nodes; ++v) {
      int u = v;
      while (u != cur_root && visited[u] != v && id[u] < 0) {
        visited[u] = v;
        u = pre[u];
      }
      if (u != cur_root && id[u] < 0) {  // found a new cycle through u
        for (int w = pre[u]; w != u; w = pre[w]) id[w] = contracted;
        id[u] = contracted++;
      }
    }
    if (contracted == 0) return total;
    for (int v = 0; v < num_nodes; ++v) {
      if (id[v] < 0) id[v] = contracted++;
    }
    std::vector<Edge> next;
    for (const auto& e : edges) {
      if (id[e.from] != id[e.to]) {
        next.push_back({id[e.from], id[e.to], e.w - in_w[e.to]});
      }
    }
    edges = std::move(next);
    cur_root = id[cur_root];
    num_nodes = contracted;
  }
}

double min_in_tree_exhaustive(const std::vector<std::vector<double>>& weights, int root) {
  const int n = static_cast<int>(weights.size());
  std::vector<int> vertices;
  for (int v = 0; v < n; ++v) {
    if (v != root) vertices.push_back(v);
  }
  std::vector<int> parent(n, -1);
  double best = kInfiniteResistance;
  std::function<void(std::size_t, double)> rec = [&](std::size_t idx, double acc) {
    if (acc >= best) return;
    if (idx == vertices.size()) {
      // every vertex must reach the root by following parents
      for (const int v0 : vertices) {
        int v = v0, hops = 0;
        while (v != root && ++hops <= n) v = parent[v];
        if (v != root) return;
      }
      best = acc;
      return;
    }
    const int v = vertices[idx];
    for (int p = 0; p < n; ++p) {
      if (p == v) continue;
      parent[v] = p;
      rec(idx + 1, acc + weights[v][p]);
    }
    parent[v] = -1;
  };
  rec(0, 0.0);
  return best;
}

}  // namespace

std::vector<double> stochastic_potentials(const std::vector<std::vector<double>>& weights) {
  const int n = static_cast<int>(weights.size());
  std::vector<double> gamma(n, 0.0);
  if (n == 1) return gamma;
  for (int root = 0; root < n; ++root) {
    gamma[root] = min_in_tree_branching(weights, root);
    if (n <= 8) {
      const double exhaustive = min_in_tree_exhaustive(weights, root);
      if (std::abs(exhaustive - gamma[root]) > 1e-12 * std::max(1.0, std::abs(exhaustive))) {
        throw InternalError("optimal branching disagrees with exhaustive tree enumeration");
      }
    }
  }
  return gamma;
}

std::vector<int> minimum_potential_set(const std::vector<double>& potentials, double tol) {
  const double min_val = *std::min_element(potentials.begin(), potentials.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < potentials.size(); ++i) {
    if (potentials[i] <= min_val + tol) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> stochastically_stable(const PerturbedChain& chain,
                                       const RecurrentClasses& classes) {
  const auto rho = class_resistance_matrix(chain, classes);
  const auto gamma = stochastic_potentials(rho);
  return minimum_potential_set(gamma);
}

// ---------------------------------------------------------------------------
// Exact stationary distribution and first-passage probabilities

std::vector<double> stationary_at(const PerturbedChain& chain, double eps,
                                  std::int64_t solve_guard) {
  const std::int64_t n = chain.num_states();
  if (n > solve_guard) {
    throw GuardError("stationary solve guard exceeded (" + std::to_string(n) + " states)");
  }
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> triplets;
  // Balance equations pi (P - I) = 0 for all but the last row, which is
  // replaced by the normalization sum(pi) = 1.
  for (std::int64_t u = 0; u < n; ++u) {
    for (const auto& e : chain.row(u)) {
      const double p = chain.poly(e.poly).eval(eps);
      if (p == 0.0 || e.to == n - 1) continue;
      triplets.emplace_back(static_cast<int>(e.to), static_cast<int>(u), p);
    }
  }
  for (std::int64_t u = 0; u < n - 1; ++u) {
    triplets.emplace_back(static_cast<int>(u), static_cast<int>(u), -1.0);
  }
  for (std::int64_t u = 0; u < n; ++u) {
    triplets.emplace_back(static_cast<int>(n - 1), static_cast<int>(u), 1.0);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end(),
                    [](const double& existing, const double& incoming) {
                      return existing + incoming;
                    });
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) {
    throw InternalError("stationary solve: singular system");
  }
  Eigen::VectorXd pi = lu.solve(b);

  // residual check against the full balance equations
  std::vector<double> out(pi.data(), pi.data() + n);
  std::vector<double> flow(n, 0.0);
  for (std::int64_t u = 0; u < n; ++u) {
    for (const auto& e : chain.row(u)) {
      flow[e.to] += out[u] * chain.poly(e.poly).eval(eps);
    }
  }
  double residual = 0.0, total = 0.0;
  for (std::int64_t u = 0; u < n; ++u) {
    residual = std::max(residual, std::abs(flow[u] - out[u]));
    total += out[u];
  }
  if (residual > 1e-10 || std::abs(total - 1.0) > 1e-10) {
    throw InternalError("stationary solve: residual above tolerance");
  }
  return out;
}

double first_passage_probability(const PerturbedChain& chain, double eps,
                                 std::span<const std::int64_t> from_states,
                                 std::span<const std::int64_t> to_states, int horizon) {
  const std::int64_t n = chain.num_states();
  std::vector<char> absorbing(n, 0);
  for (const std::int64_t u : to_states) absorbing[u] = 1;

  // Evaluate the matrix once.
  std::vector<std::vector<std::pair<std::int64_t, double>>> evaluated(n);
  for (std::int64_t u = 0; u < n; ++u) {
    if (absorbing[u]) continue;
    auto& row = evaluated[u];
    for (const auto& e : chain.row(u)) {
      const double p = chain.poly(e.poly).eval(eps);
      if (p > 0.0) row.emplace_back(e.to, p);
    }
  }

  std::vector<double> v(n, 0.0), next(n, 0.0);
  for (const std::int64_t u : to_states) v[u] = 1.0;
  for (int step = 0; step < horizon; ++step) {
    for (std::int64_t u = 0; u < n; ++u) {
      if (absorbing[u]) {
        next[u] = 1.0;
        continue;
      }
      double sum = 0.0;
      for (const auto& [to, p] : evaluated[u]) sum += p * v[to];
      next[u] = sum;
    }
    std::swap(v, next);
  }
  double total = 0.0;
  for (const std::int64_t u : from_states) total += v[u];
  return total / static_cast<double>(from_states.size());
}

namespace {

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ResistanceEstimate matrix_resistance_estimate(const PerturbedChain& chain,
                                              const RecurrentClasses& classes, int from_class,
                                              int to_class, std::span<const double> eps_grid,
                                              int horizon) {
  ResistanceEstimate est;
  for (const double eps : eps_grid) {
    const double p = first_passage_probability(chain, eps, classes.classes[from_class].states,
                                               classes.classes[to_class].states, horizon);
    est.log_eps.push_back(std::log(eps));
    est.log_prob.push_back(std::log(p));
  }
  est.slope = least_squares_slope(est.log_eps, est.log_prob);
  return est;
}

ResistanceEstimate empirical_resistance(const PerturbedChain& chain,
                                        const RecurrentClasses& classes, int from_class,
                                        int to_class, std::span<const double> eps_grid,
                                        int horizon, int samples, std::uint64_t seed) {
  if (eps_grid.size() < 3) {
    throw std::invalid_argument("resistance estimation needs at least 3 grid points");
  }
  if (from_class == to_class) return {0.0, {}, {}};
  const auto& from = classes.classes[from_class].states;
  std::vector<char> target(chain.num_states(), 0);
  for (const std::int64_t u : classes.classes[to_class].states) target[u] = 1;

  ResistanceEstimate est;
  RngStream rng = derive_stream(seed, kStreamInit);
  for (const double eps : eps_grid) {
    std::unordered_map<std::int64_t, std::pair<std::vector<std::int64_t>, std::vector<double>>>
        row_cache;
    const auto sample_next = [&](std::int64_t u) {
      auto it = row_cache.find(u);
      if (it == row_cache.end()) {
        std::pair<std::vector<std::int64_t>, std::vector<double>> row;
        for (const auto& e : chain.row(u)) {
          const double p = chain.poly(e.poly).eval(eps);
          if (p > 0.0) {
            row.first.push_back(e.to);
            row.second.push_back(p);
          }
        }
        it = row_cache.emplace(u, std::move(row)).first;
      }
      const int pick = rng.categorical(it->second.second);
      return it->second.first[pick];
    };

    int h = horizon;
    double p_hat = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      std::int64_t hits = 0;
      for (int trial = 0; trial < samples; ++trial) {
        std::int64_t u = from[static_cast<std::size_t>(trial) % from.size()];
        for (int step = 0; step < h; ++step) {
          u = sample_next(u);
          if (target[u]) {
            ++hits;
            break;
          }
        }
      }
      if (hits > 0) {
        p_hat = static_cast<double>(hits) / samples;
        break;
      }
      h *= 4;  // widen and retry
    }
    if (p_hat == 0.0) {
      throw std::runtime_error("no transitions observed even after widening the horizon");
    }
    est.log_eps.push_back(std::log(eps));
    est.log_prob.push_back(std::log(p_hat));
  }
  est.slope = least_squares_slope(est.log_eps, est.log_prob);
  return est;
}

}  // namespace ua
