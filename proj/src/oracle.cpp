#include "qstab/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "qstab/errors.hpp"
#include "qstab/shaping.hpp"

namespace qstab {

ProbPolicy deterministic_policy(std::function<Action(const State&)> fn,
                                int num_actions) {
  return [fn = std::move(fn), num_actions](const State& s) {
    std::vector<double> p(num_actions, 0.0);
    p[fn(s).index] = 1.0;
    return p;
  };
}

ProbPolicy uniform_policy(int num_actions) {
  return [num_actions](const State&) {
    return std::vector<double>(num_actions, 1.0 / num_actions);
  };
}

namespace {

// Mixed-radix enumeration: queue coordinates in {0..cap}, one binary digit
// per queue whose connectivity is genuinely random.
struct SpaceIndex {
  int cap;
  int num_queues;
  std::vector<int> flag_queues;          // indices with 0 < c < 1
  std::vector<double> fixed_flag;        // deterministic flag value per queue, -1 if random
  std::size_t count;

  std::size_t index_of(const State& s) const {
    std::size_t idx = 0;
    for (int i = 0; i < num_queues; ++i) idx = idx * (cap + 1) + s.queues[i];
    for (int fq : flag_queues) idx = idx * 2 + s.flags[fq];
    return idx;
  }
};

SpaceIndex make_space(const ServerAllocConfig& cfg, int cap,
                      std::size_t max_states) {
  SpaceIndex sp;
  sp.cap = cap;
  sp.num_queues = cfg.num_queues();
  sp.fixed_flag.assign(sp.num_queues, -1.0);
  for (int i = 0; i < sp.num_queues; ++i) {
    const double c = cfg.connect_probs[i];
    if (c == 0.0 || c == 1.0)
      sp.fixed_flag[i] = c;
    else
      sp.flag_queues.push_back(i);
  }
  double cnt = 1.0;
  for (int i = 0; i < sp.num_queues; ++i) cnt *= cap + 1;
  cnt *= std::pow(2.0, static_cast<double>(sp.flag_queues.size()));
  if (cnt > static_cast<double>(max_states))
    throw SizeError("truncated chain would need " + std::to_string(cnt) +
                    " states (limit " + std::to_string(max_states) + ")");
  sp.count = static_cast<std::size_t>(cnt + 0.5);
  return sp;
}

void finish_chain(TruncatedChain& chain) {
  const std::size_t n = chain.states.size();
  chain.rows_in.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (const auto& [j, p] : chain.rows_out[i]) {
      chain.rows_in[j].emplace_back(static_cast<int>(i), p);
      row_sum += p;
    }
    if (std::abs(row_sum - 1.0) > 1e-12)
      throw ContractError("truncated chain row " + std::to_string(i) +
                          " sums to " + std::to_string(row_sum));
  }
}

// Accumulates probability mass into a dense map per source row, then
// compacts. Outcome enumeration is exact, so masses add up to 1 by
// construction.
class RowBuilder {
 public:
  void add(std::size_t j, double p) { mass_[j] += p; }

  std::vector<std::pair<int, double>> take() {
    std::vector<std::pair<int, double>> row;
    row.reserve(mass_.size());
    for (const auto& [j, p] : mass_) row.emplace_back(static_cast<int>(j), p);
    mass_.clear();
    return row;
  }

 private:
  std::map<std::size_t, double> mass_;
};

}  // namespace

TruncatedChain build_truncated_chain(const ServerAllocConfig& cfg,
                                     const ProbPolicy& policy, int cap,
                                     std::size_t max_states) {
  cfg.validate();
  if (cap < 1) throw ContractError("build_truncated_chain: cap must be >= 1");
  const SpaceIndex sp = make_space(cfg, cap, max_states);
  const int n_queues = sp.num_queues;

  TruncatedChain chain;
  chain.cap = cap;
  chain.states.resize(sp.count);

  // enumerate states in index order
  for (std::size_t idx = 0; idx < sp.count; ++idx) {
    State s;
    s.queues.assign(n_queues, 0);
    s.flags.assign(n_queues, 0);
    std::size_t rem = idx;
    for (int k = static_cast<int>(sp.flag_queues.size()) - 1; k >= 0; --k) {
      s.flags[sp.flag_queues[k]] = static_cast<int>(rem % 2);
      rem /= 2;
    }
    for (int i = n_queues - 1; i >= 0; --i) {
      s.queues[i] = static_cast<int>(rem % (cap + 1));
      rem /= cap + 1;
    }
    for (int i = 0; i < n_queues; ++i)
      if (sp.fixed_flag[i] >= 0.0)
        s.flags[i] = static_cast<int>(sp.fixed_flag[i]);
    chain.states[idx] = std::move(s);
  }

  chain.rows_out.resize(sp.count);
  chain.expected_true_cost.assign(sp.count, 0.0);

  const int arrival_combos = 1 << n_queues;
  const int flag_combos = 1 << sp.flag_queues.size();
  RowBuilder row;

  for (std::size_t idx = 0; idx < sp.count; ++idx) {
    const State& s = chain.states[idx];
    const std::vector<double> action_probs = policy(s);
    double exp_cost = 0.0;

    for (int a = 0; a < n_queues; ++a) {
      const double pa = action_probs[a];
      if (pa == 0.0) continue;
      // departure branch: success probability given connectivity + occupancy
      const double p_depart =
          (s.flags[a] == 1 && s.queues[a] > 0) ? cfg.service_probs[a] : 0.0;
      for (int dep = 0; dep <= 1; ++dep) {
        const double pd = dep ? p_depart : 1.0 - p_depart;
        if (pd == 0.0) continue;
        for (int arr = 0; arr < arrival_combos; ++arr) {
          double parr = 1.0;
          for (int i = 0; i < n_queues; ++i)
            parr *= (arr >> i) & 1 ? cfg.arrival_rates[i]
                                   : 1.0 - cfg.arrival_rates[i];
          if (parr == 0.0) continue;

          State next;
          next.queues = s.queues;
          next.flags.assign(n_queues, 0);
          if (dep) next.queues[a] -= 1;
          for (int i = 0; i < n_queues; ++i) {
            if ((arr >> i) & 1) next.queues[i] += 1;
            if (next.queues[i] > cap) next.queues[i] = cap;  // reflect at cap
          }
          for (int i = 0; i < n_queues; ++i)
            if (sp.fixed_flag[i] >= 0.0)
              next.flags[i] = static_cast<int>(sp.fixed_flag[i]);
          const double cost = next.total_queue();

          for (int fc = 0; fc < flag_combos; ++fc) {
            double pf = 1.0;
            for (std::size_t k = 0; k < sp.flag_queues.size(); ++k) {
              const int bit = (fc >> k) & 1;
              const double c = cfg.connect_probs[sp.flag_queues[k]];
              pf *= bit ? c : 1.0 - c;
              next.flags[sp.flag_queues[k]] = bit;
            }
            const double p = pa * pd * parr * pf;
            if (p == 0.0) continue;
            row.add(sp.index_of(next), p);
            exp_cost += p * cost;
          }
        }
      }
    }
    chain.rows_out[idx] = row.take();
    chain.expected_true_cost[idx] = exp_cost;
  }

  finish_chain(chain);
  return chain;
}

TruncatedChain build_truncated_chain(const NModelConfig& cfg,
                                     const ProbPolicy& policy, int cap,
                                     std::size_t max_states) {
  cfg.validate();
  if (cap < 1) throw ContractError("build_truncated_chain: cap must be >= 1");
  const std::size_t count = static_cast<std::size_t>(cap + 1) * (cap + 1);
  if (count > max_states)
    throw SizeError("truncated chain would need " + std::to_string(count) +
                    " states (limit " + std::to_string(max_states) + ")");

  TruncatedChain chain;
  chain.cap = cap;
  chain.states.resize(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    State s;
    s.queues = {static_cast<int>(idx / (cap + 1)),
                static_cast<int>(idx % (cap + 1))};
    chain.states[idx] = std::move(s);
  }

  const double lam = cfg.uniformization_rate();
  const std::pair<NModelEvent, double> events[] = {
      {NModelEvent::arrival1, cfg.lambda1 / lam},
      {NModelEvent::arrival2, cfg.lambda2 / lam},
      {NModelEvent::service1, cfg.mu1 / lam},
      {NModelEvent::service2_b0, cfg.mu2 / lam},
      {NModelEvent::service3_b1, cfg.mu3 / lam},
  };

  chain.rows_out.resize(count);
  chain.expected_true_cost.assign(count, 0.0);
  RowBuilder row;
  for (std::size_t idx = 0; idx < count; ++idx) {
    const State& s = chain.states[idx];
    const std::vector<double> action_probs = policy(s);
    double exp_cost = 0.0;
    for (int a = 0; a < 2; ++a) {
      const double pa = action_probs[a];
      if (pa == 0.0) continue;
      for (const auto& [ev, pe] : events) {
        State next = nmodel_apply_event(s, {a}, ev);
        for (int i = 0; i < 2; ++i)
          if (next.queues[i] > cap) next.queues[i] = cap;
        const double cost = cfg.holding_costs[0] * next.queues[0] +
                            cfg.holding_costs[1] * next.queues[1];
        const std::size_t j =
            static_cast<std::size_t>(next.queues[0]) * (cap + 1) +
            next.queues[1];
        row.add(j, pa * pe);
        exp_cost += pa * pe * cost;
      }
    }
    chain.rows_out[idx] = row.take();
    chain.expected_true_cost[idx] = exp_cost;
  }

  finish_chain(chain);
  return chain;
}

namespace {

// Closed communicating classes via Kosaraju SCC condensation (iterative).
int closed_class_count(const TruncatedChain& chain, std::string& report) {
  const int n = static_cast<int>(chain.states.size());
  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  std::vector<std::pair<int, std::size_t>> stack;

  for (int start = 0; start < n; ++start) {
    if (seen[start]) continue;
    stack.emplace_back(start, 0);
    seen[start] = 1;
    while (!stack.empty()) {
      auto& [u, k] = stack.back();
      if (k < chain.rows_out[u].size()) {
        const int v = chain.rows_out[u][k++].first;
        if (!seen[v]) {
          seen[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        order.push_back(u);
        stack.pop_back();
      }
    }
  }

  std::vector<int> comp(n, -1);
  int n_comp = 0;
  std::vector<int> dfs;
  for (int i = n - 1; i >= 0; --i) {
    const int root = order[i];
    if (comp[root] >= 0) continue;
    dfs.push_back(root);
    comp[root] = n_comp;
    while (!dfs.empty()) {
      const int u = dfs.back();
      dfs.pop_back();
      for (const auto& [v, p] : chain.rows_in[u]) {
        if (comp[v] < 0) {
          comp[v] = n_comp;
          dfs.push_back(v);
        }
      }
    }
    ++n_comp;
  }

  std::vector<char> has_exit(n_comp, 0);
  std::vector<int> size(n_comp, 0);
  for (int u = 0; u < n; ++u) {
    ++size[comp[u]];
    for (const auto& [v, p] : chain.rows_out[u])
      if (comp[v] != comp[u]) has_exit[comp[u]] = 1;
  }

  int closed = 0;
  report.clear();
  for (int c = 0; c < n_comp; ++c) {
    if (!has_exit[c]) {
      ++closed;
      if (!report.empty()) report += ", ";
      report += "class of " + std::to_string(size[c]) + " states";
    }
  }
  report = std::to_string(closed) + " closed classes (" + report + ") among " +
           std::to_string(n_comp) + " components";
  return closed;
}

std::vector<double> stationary_dense(const TruncatedChain& chain) {
  const int n = static_cast<int>(chain.states.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (const auto& [j, p] : chain.rows_out[i]) a(j, i) += p;  // P^T
  a -= Eigen::MatrixXd::Identity(n, n);
  // (P^T - I) rows are linearly dependent, so replacing one with the
  // normalization keeps the system square and nonsingular for a unichain.
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  Eigen::VectorXd pi = Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(b);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(0.0, pi(i));
  double sum = 0.0;
  for (double x : out) sum += x;
  for (double& x : out) x /= sum;
  return out;
}

std::vector<double> stationary_power(const TruncatedChain& chain) {
  const std::size_t n = chain.states.size();
  std::vector<double> x(n, 1.0 / n), y(n);
  const double tol = 1e-12;
  for (long it = 0; it < 1000000; ++it) {
    par::matvec_in_omp(chain.rows_in, x, y);
    double sum = 0.0;
    for (double v : y) sum += v;
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= sum;
      delta += std::abs(y[i] - x[i]);
    }
    x.swap(y);
    if (delta < tol) return x;
  }
  throw TrainingError("stationary_power: no convergence within 1e6 iterations");
}

}  // namespace

std::vector<double> stationary_distribution(const TruncatedChain& chain,
                                            int dense_state_limit) {
  std::string report;
  const int closed = closed_class_count(chain, report);
  if (closed != 1)
    throw MultiClassError("stationary_distribution: " + report);
  if (static_cast<int>(chain.states.size()) <= dense_state_limit)
    return stationary_dense(chain);
  return stationary_power(chain);
}

double expected_shaped_cost(const TruncatedChain& chain, int state_index,
                            double p) {
  const double l_here = lyapunov_value(chain.states[state_index], p);
  double drift = 0.0;
  for (const auto& [j, prob] : chain.rows_out[state_index])
    drift += prob * lyapunov_value(chain.states[j], p);
  return drift - l_here + chain.expected_true_cost[state_index];
}

double stationary_average_cost(const TruncatedChain& chain,
                               std::optional<double> shaped_p,
                               int dense_state_limit) {
  const std::vector<double> pi =
      stationary_distribution(chain, dense_state_limit);
  double j = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double c = shaped_p
                         ? expected_shaped_cost(chain, static_cast<int>(i),
                                                *shaped_p)
                         : chain.expected_true_cost[i];
    j += pi[i] * c;
  }
  return j;
}

}  // namespace qstab
