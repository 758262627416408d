#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ppw {

/// Primal network simplex for the uncapacitated transportation problem
/// between `n` sources and `m` sinks. Spanning-tree bases are stored with
/// parent / thread / successor-count arrays; entering arcs come from a block
/// search. Arcs can be appended between solves, which keeps the current basis
/// feasible (column generation).
template <typename Flow>
class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<Flow>& supply, const std::vector<Flow>& demand, double cost_bound)
      : n_(static_cast<int>(supply.size())), m_(static_cast<int>(demand.size())) {
    node_num_ = n_ + m_;
    root_ = node_num_;
    const int all = node_num_ + 1;
    parent_.assign(all, -1);
    pred_.assign(all, -1);
    thread_.assign(all, 0);
    rev_thread_.assign(all, 0);
    succ_num_.assign(all, 1);
    last_succ_.assign(all, 0);
    dir_.assign(all, 0);
    pi_.assign(all, 0.0);
    art_cost_ = (std::max(cost_bound, 0.0) + 1.0) * node_num_;

    thread_[root_] = 0;
    rev_thread_[0] = root_;
    succ_num_[root_] = all;
    last_succ_[root_] = root_ - 1;
    for (int u = 0; u < node_num_; ++u) {
      parent_[u] = root_;
      pred_[u] = u;
      thread_[u] = u + 1;
      rev_thread_[u + 1] = u;
      succ_num_[u] = 1;
      last_succ_[u] = u;
      if (u < n_) {
        push_arc(u, root_, art_cost_, supply[static_cast<std::size_t>(u)], kTree);
        dir_[u] = kUp;
        pi_[u] = -art_cost_;
      } else {
        push_arc(root_, u, art_cost_, demand[static_cast<std::size_t>(u - n_)], kTree);
        dir_[u] = kDown;
        pi_[u] = art_cost_;
      }
    }
    thread_[root_ - 1] = root_;
    rev_thread_[root_] = root_ - 1;
  }

  int sources() const { return n_; }
  int sinks() const { return m_; }

  /// Appends arc source i → sink j; returns its index among real arcs.
  std::size_t add_arc(int i, int j, double cost) {
    push_arc(i, n_ + j, cost, Flow(0), kLower);
    return cost_.size() - static_cast<std::size_t>(node_num_) - 1;
  }
  std::size_t arc_count() const { return cost_.size() - static_cast<std::size_t>(node_num_); }

  /// Runs pivots until no real arc has negative reduced cost (below −tol).
  void solve(double tol = 1e-12) {
    const int first = node_num_;
    const int total = static_cast<int>(cost_.size());
    const int count = total - first;
    if (count <= 0) return;
    const int block = std::max(10, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))));
    const double thresh = -tol * std::max(1.0, max_real_cost_);
    if (next_arc_ < first || next_arc_ >= total) next_arc_ = first;
    for (;;) {
      // Block search for the entering arc.
      double best = thresh;
      int in = -1;
      int cnt = block;
      int e = next_arc_;
      for (int visited = 0; visited < count; ++visited) {
        if (state_[e] == kLower) {
          const double c = cost_[e] + pi_[source_[e]] - pi_[target_[e]];
          if (c < best) {
            best = c;
            in = e;
          }
        }
        if (++e == total) e = first;
        if (--cnt == 0) {
          if (in >= 0) break;
          cnt = block;
        }
      }
      if (in < 0) break;
      next_arc_ = e;
      in_arc_ = in;
      ++pivots_;
      find_join_node();
      if (!find_leaving_arc()) throw std::runtime_error("network simplex: unbounded cycle");
      change_flow();
      update_tree_structure();
      update_potential();
    }
  }

  Flow flow(std::size_t real_arc) const { return flow_[real_arc + static_cast<std::size_t>(node_num_)]; }
  double cost(std::size_t real_arc) const { return cost_[real_arc + static_cast<std::size_t>(node_num_)]; }
  int arc_source(std::size_t real_arc) const { return source_[real_arc + static_cast<std::size_t>(node_num_)]; }
  int arc_sink(std::size_t real_arc) const { return target_[real_arc + static_cast<std::size_t>(node_num_)] - n_; }
  double source_potential(int i) const { return pi_[i]; }
  double sink_potential(int j) const { return pi_[n_ + j]; }
  /// Reduced cost c + π_i − π_j of a (possibly absent) arc i → j.
  double reduced_cost(int i, int j, double c) const { return c + pi_[i] - pi_[n_ + j]; }
  /// Total flow still routed through the artificial root.
  Flow artificial_flow() const {
    Flow s = 0;
    for (int e = 0; e < node_num_; ++e) s += flow_[e];
    return s;
  }
  /// Σ flow·cost over real arcs, in flow units.
  long double total_cost() const {
    long double s = 0;
    for (std::size_t e = static_cast<std::size_t>(node_num_); e < cost_.size(); ++e) {
      if (flow_[e] != Flow(0)) s += static_cast<long double>(flow_[e]) * static_cast<long double>(cost_[e]);
    }
    return s;
  }
  std::uint64_t pivots() const { return pivots_; }

 private:
  static constexpr signed char kTree = 0;
  static constexpr signed char kLower = 1;
  static constexpr int kUp = 1;
  static constexpr int kDown = -1;

  void push_arc(int s, int t, double c, Flow f, signed char st) {
    source_.push_back(s);
    target_.push_back(t);
    cost_.push_back(c);
    flow_.push_back(f);
    state_.push_back(st);
    if (s != root_ && t != root_) max_real_cost_ = std::max(max_real_cost_, std::abs(c));
  }

  void find_join_node() {
    int u = source_[in_arc_];
    int v = target_[in_arc_];
    while (u != v) {
      if (succ_num_[u] < succ_num_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    join_ = u;
  }

  bool find_leaving_arc() {
    const int first = source_[in_arc_];
    const int second = target_[in_arc_];
    bool found = false;
    int result = 0;
    // Flow moves down from join to `first` and up from `second` to join;
    // only arcs whose flow decreases can block.
    for (int u = first; u != join_; u = parent_[u]) {
      if (dir_[u] == kUp) {
        const Flow d = flow_[pred_[u]];
        if (!found || d < delta_) {
          delta_ = d;
          u_out_ = u;
          result = 1;
          found = true;
        }
      }
    }
    for (int u = second; u != join_; u = parent_[u]) {
      if (dir_[u] == kDown) {
        const Flow d = flow_[pred_[u]];
        if (!found || d <= delta_) {
          delta_ = d;
          u_out_ = u;
          result = 2;
          found = true;
        }
      }
    }
    if (result == 1) {
      u_in_ = first;
      v_in_ = second;
    } else {
      u_in_ = second;
      v_in_ = first;
    }
    return found;
  }

  void change_flow() {
    if (delta_ > Flow(0)) {
      const Flow val = delta_;
      flow_[in_arc_] += val;
      for (int u = source_[in_arc_]; u != join_; u = parent_[u]) {
        if (dir_[u] == kUp) {
          flow_[pred_[u]] -= val;
        } else {
          flow_[pred_[u]] += val;
        }
      }
      for (int u = target_[in_arc_]; u != join_; u = parent_[u]) {
        if (dir_[u] == kUp) {
          flow_[pred_[u]] += val;
        } else {
          flow_[pred_[u]] -= val;
        }
      }
    }
    state_[in_arc_] = kTree;
    flow_[pred_[u_out_]] = Flow(0);
    state_[pred_[u_out_]] = kLower;
  }

  void update_tree_structure() {
    const int old_rev_thread = rev_thread_[u_out_];
    const int old_succ_num = succ_num_[u_out_];
    const int old_last_succ = last_succ_[u_out_];
    v_out_ = parent_[u_out_];

    if (u_in_ == u_out_) {
      parent_[u_in_] = v_in_;
      pred_[u_in_] = in_arc_;
      dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
      if (thread_[v_in_] != u_out_) {
        int after = thread_[old_last_succ];
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
        after = thread_[v_in_];
        thread_[v_in_] = u_out_;
        rev_thread_[u_out_] = v_in_;
        thread_[old_last_succ] = after;
        rev_thread_[after] = old_last_succ;
      }
    } else {
      const int thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];
      int stem = u_in_;
      int par_stem = v_in_;
      int last = last_succ_[u_in_];
      int after = thread_[last];
      thread_[v_in_] = u_in_;
      dirty_revs_.clear();
      dirty_revs_.push_back(v_in_);
      while (stem != u_out_) {
        const int next_stem = parent_[stem];
        thread_[last] = next_stem;
        dirty_revs_.push_back(last);
        const int before = rev_thread_[stem];
        thread_[before] = after;
        rev_thread_[after] = before;
        parent_[stem] = par_stem;
        par_stem = stem;
        stem = next_stem;
        last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
        after = thread_[last];
      }
      parent_[u_out_] = par_stem;
      thread_[last] = thread_continue;
      rev_thread_[thread_continue] = last;
      last_succ_[u_out_] = last;
      if (old_rev_thread != v_in_) {
        thread_[old_rev_thread] = after;
        rev_thread_[after] = old_rev_thread;
      }
      for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

      int tmp_sc = 0;
      const int tmp_ls = last_succ_[u_out_];
      for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
        pred_[u] = pred_[p];
        dir_[u] = -dir_[p];
        tmp_sc += succ_num_[u] - succ_num_[p];
        succ_num_[u] = tmp_sc;
        last_succ_[p] = tmp_ls;
      }
      pred_[u_in_] = in_arc_;
      dir_[u_in_] = u_in_ == source_[in_arc_] ? kUp : kDown;
      succ_num_[u_in_] = old_succ_num;
    }

    const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
    const int last_succ_out = last_succ_[u_out_];
    for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

    if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
        last_succ_[u] = old_rev_thread;
      }
    } else if (last_succ_out != old_last_succ) {
      for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
        last_succ_[u] = last_succ_out;
      }
    }

    for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
    for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
  }

  void update_potential() {
    const double sigma = pi_[v_in_] - pi_[u_in_] - dir_[u_in_] * cost_[in_arc_];
    const int end = thread_[last_succ_[u_in_]];
    for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
  }

  int n_;
  int m_;
  int node_num_;
  int root_;
  double art_cost_;
  double max_real_cost_ = 0.0;

  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<double> cost_;
  std::vector<Flow> flow_;
  std::vector<signed char> state_;

  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<int> dir_;
  std::vector<double> pi_;
  std::vector<int> dirty_revs_;

  int next_arc_ = 0;
  int in_arc_ = -1;
  int join_ = -1;
  int u_in_ = -1;
  int v_in_ = -1;
  int u_out_ = -1;
  int v_out_ = -1;
  Flow delta_{};
  std::uint64_t pivots_ = 0;
};

}  // namespace ppw
