#ifndef DIPM_NETWORK_HPP_
#define DIPM_NETWORK_HPP_

#include <algorithm>
#include <deque>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "dipm/coupling.hpp"
#include "dipm/error.hpp"
#include "dipm/types.hpp"

namespace dipm {

// Payload of one shared-component message: the sender's current value for
// every variable it shares with the receiver, in ascending global index.
struct SharedComponentMsg {
  Index sender = -1;
  std::vector<std::pair<Index, double>> entries;
};

struct ConsensusFlagMsg {
  Index sender = -1;
  bool flag = true;
};

struct ConsensusMinMsg {
  Index sender = -1;
  double value = 0.0;
};

// Flooded (agent, value) pairs for an exact network-wide sum.
struct ConsensusSumMsg {
  Index sender = -1;
  std::vector<std::pair<Index, double>> known;
};

template <class T>
struct ConsensusResult {
  std::vector<T> values;  // what each agent learned
  Index rounds = 0;

  // Common value; meaningful when the graph is connected.
  T value() const { return values.front(); }
  T at(Index agent) const { return values[agent]; }
};

struct MessageStats {
  long data_messages = 0;
  long consensus_messages = 0;
  long rounds = 0;
  std::vector<long> data_sent;
  std::vector<long> data_received;
  std::vector<long> consensus_sent;
  std::vector<long> consensus_received;

  long total() const { return data_messages + consensus_messages; }
};

// Lossless lockstep simulation of the agent network. A message sent in a
// round is read by its receiver only after the round barrier; only coupled
// agents (neighbors) can talk to each other. Consensus is done by flooding,
// which is exact after diameter-many rounds within a connected component.
class SimNetwork {
 public:
  explicit SimNetwork(const CouplingStructure& cs, bool allow_disconnected = false) : cs_(&cs) {
    const Index N = cs.num_agents();
    stats_.data_sent.assign(N, 0);
    stats_.data_received.assign(N, 0);
    stats_.consensus_sent.assign(N, 0);
    stats_.consensus_received.assign(N, 0);
    label_components();
    if (!allow_disconnected && num_components_ > 1) {
      throw Error(ErrorKind::kNetwork, "coupling graph is disconnected; solve the components separately");
    }
    build_plans();
  }

  Index num_agents() const { return cs_->num_agents(); }
  const CouplingStructure& coupling() const { return *cs_; }
  Index num_components() const { return num_components_; }
  Index component(Index agent) const { return component_[agent]; }
  Index diameter(Index comp) const { return diameter_[comp]; }
  Index diameter() const { return *std::max_element(diameter_.begin(), diameter_.end()); }

  const MessageStats& stats() const { return stats_; }
  // Sender/receiver pairs of the most recent round.
  const std::vector<std::pair<Index, Index>>& last_round_edges() const { return last_round_edges_; }

  // One round: each agent sends its contributions for shared variables to
  // every neighbor, then every agent averages over the owners of each of its
  // variables in ascending agent order, exactly as gather_average. `active`
  // (optional) masks agents that take no part; it must be constant on
  // components.
  Slices exchange_shared_components(const Slices& contributions, const std::vector<char>* active = nullptr) {
    const Index N = num_agents();
    if (static_cast<Index>(contributions.size()) != N) {
      throw Error(ErrorKind::kDimension, "exchange: wrong number of contributions");
    }
    begin_round();
    std::vector<std::vector<SharedComponentMsg>> inbox(N);
    for (Index i = 0; i < N; ++i) inbox[i].resize(cs_->neighbors[i].size());

    for (Index i = 0; i < N; ++i) {
      if (!is_active(active, i)) continue;
      if (contributions[i].size() != cs_->block_size(i)) {
        throw Error(ErrorKind::kDimension, "exchange: contribution length mismatch", i);
      }
      const auto& ne = cs_->neighbors[i];
      for (std::size_t r = 0; r < ne.size(); ++r) {
        const SendPlan& plan = send_plan_[i][r];
        SharedComponentMsg msg;
        msg.sender = i;
        msg.entries.reserve(plan.sender_positions.size());
        for (std::size_t e = 0; e < plan.sender_positions.size(); ++e) {
          msg.entries.emplace_back(plan.globals[e], contributions[i][plan.sender_positions[e]]);
        }
        deliver_data(i, ne[r]);
        inbox[ne[r]][plan.receiver_slot] = std::move(msg);
      }
    }

    Slices out(N);
    for (Index i = 0; i < N; ++i) {
      if (!is_active(active, i)) {
        out[i] = contributions[i];
        continue;
      }
      const Index k = cs_->block_size(i);
      out[i].resize(k);
      for (Index a = 0; a < k; ++a) {
        const auto& plan = gather_plan_[i][a];
        auto copy = [&](std::size_t r) {
          const auto [slot, entry] = plan[r];
          return slot < 0 ? contributions[i][a] : inbox[i][slot].entries[entry].second;
        };
        const double base = copy(0);
        double acc = 0.0;
        for (std::size_t r = 1; r < plan.size(); ++r) acc += copy(r) - base;
        out[i][a] = base + acc / static_cast<double>(cs_->degree[cs_->index_sets[i][a]]);
      }
    }
    return out;
  }

  ConsensusResult<bool> all_agree(const std::vector<char>& flags, const std::vector<char>* active = nullptr) {
    std::vector<ConsensusFlagMsg> state(flags.size());
    for (std::size_t i = 0; i < flags.size(); ++i) state[i] = {static_cast<Index>(i), flags[i] != 0};
    auto merged = flood<ConsensusFlagMsg>(std::move(state), active, [](ConsensusFlagMsg& own, const ConsensusFlagMsg& in) {
      own.flag = own.flag && in.flag;
    });
    ConsensusResult<bool> result{std::vector<bool>(flags.size()), merged.second};
    for (std::size_t i = 0; i < flags.size(); ++i) result.values[i] = merged.first[i].flag;
    return result;
  }

  ConsensusResult<double> min_consensus(const std::vector<double>& values, const std::vector<char>* active = nullptr) {
    std::vector<ConsensusMinMsg> state(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) state[i] = {static_cast<Index>(i), values[i]};
    auto merged = flood<ConsensusMinMsg>(std::move(state), active, [](ConsensusMinMsg& own, const ConsensusMinMsg& in) {
      own.value = std::min(own.value, in.value);
    });
    ConsensusResult<double> result{std::vector<double>(values.size()), merged.second};
    for (std::size_t i = 0; i < values.size(); ++i) result.values[i] = merged.first[i].value;
    return result;
  }

  // Every agent learns all values of its component and sums them in
  // ascending agent order, so all agents hold bit-identical totals.
  ConsensusResult<double> sum_consensus(const std::vector<double>& values, const std::vector<char>* active = nullptr) {
    std::vector<ConsensusSumMsg> state(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) state[i] = {static_cast<Index>(i), {{static_cast<Index>(i), values[i]}}};
    auto merged = flood<ConsensusSumMsg>(std::move(state), active, [](ConsensusSumMsg& own, const ConsensusSumMsg& in) {
      std::vector<std::pair<Index, double>> out;
      std::set_union(own.known.begin(), own.known.end(), in.known.begin(), in.known.end(), std::back_inserter(out),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
      own.known = std::move(out);
    });
    ConsensusResult<double> result{std::vector<double>(values.size()), merged.second};
    for (std::size_t i = 0; i < values.size(); ++i) {
      double acc = 0.0;
      for (const auto& kv : merged.first[i].known) acc += kv.second;
      result.values[i] = acc;
    }
    return result;
  }

 private:
  struct SendPlan {
    std::vector<Index> globals;
    std::vector<Index> sender_positions;
    Index receiver_slot = -1;  // position of the sender in the receiver's neighbor list
  };

  static bool is_active(const std::vector<char>* active, Index i) { return active == nullptr || (*active)[i] != 0; }

  void begin_round() {
    ++stats_.rounds;
    last_round_edges_.clear();
  }

  void deliver_data(Index from, Index to) {
    ++stats_.data_messages;
    ++stats_.data_sent[from];
    ++stats_.data_received[to];
    last_round_edges_.emplace_back(from, to);
  }

  void deliver_consensus(Index from, Index to) {
    ++stats_.consensus_messages;
    ++stats_.consensus_sent[from];
    ++stats_.consensus_received[to];
    last_round_edges_.emplace_back(from, to);
  }

  // Runs exactly diameter-many rounds of the largest participating component.
  // Each round every participating agent forwards its current state to all
  // neighbors, then merges what it received in ascending sender order.
  template <class Msg, class Merge>
  std::pair<std::vector<Msg>, Index> flood(std::vector<Msg> state, const std::vector<char>* active, Merge merge) {
    const Index N = num_agents();
    if (static_cast<Index>(state.size()) != N) throw Error(ErrorKind::kDimension, "consensus: wrong number of values");
    Index rounds = 0;
    for (Index i = 0; i < N; ++i) {
      if (is_active(active, i)) rounds = std::max(rounds, diameter_[component_[i]]);
    }
    for (Index round = 0; round < rounds; ++round) {
      begin_round();
      std::vector<std::vector<Msg>> inbox(N);
      for (Index i = 0; i < N; ++i) {
        if (!is_active(active, i) || round >= diameter_[component_[i]]) continue;
        for (Index j : cs_->neighbors[i]) {
          deliver_consensus(i, j);
          inbox[j].push_back(state[i]);
        }
      }
      for (Index i = 0; i < N; ++i) {
        for (const Msg& m : inbox[i]) merge(state[i], m);
      }
    }
    return {std::move(state), rounds};
  }

  void label_components() {
    const Index N = num_agents();
    component_.assign(N, -1);
    num_components_ = 0;
    for (Index s = 0; s < N; ++s) {
      if (component_[s] >= 0) continue;
      std::deque<Index> queue{s};
      component_[s] = num_components_;
      while (!queue.empty()) {
        Index a = queue.front();
        queue.pop_front();
        for (Index b : cs_->neighbors[a]) {
          if (component_[b] < 0) {
            component_[b] = num_components_;
            queue.push_back(b);
          }
        }
      }
      ++num_components_;
    }
    diameter_.assign(num_components_, 0);
    for (Index s = 0; s < N; ++s) {
      std::vector<Index> dist(N, -1);
      std::deque<Index> queue{s};
      dist[s] = 0;
      while (!queue.empty()) {
        Index a = queue.front();
        queue.pop_front();
        diameter_[component_[s]] = std::max(diameter_[component_[s]], dist[a]);
        for (Index b : cs_->neighbors[a]) {
          if (dist[b] < 0) {
            dist[b] = dist[a] + 1;
            queue.push_back(b);
          }
        }
      }
    }
  }

  void build_plans() {
    const Index N = num_agents();
    send_plan_.assign(N, {});
    gather_plan_.assign(N, {});
    for (Index i = 0; i < N; ++i) {
      const auto& ne = cs_->neighbors[i];
      send_plan_[i].resize(ne.size());
      for (std::size_t r = 0; r < ne.size(); ++r) {
        const Index j = ne[r];
        SendPlan& plan = send_plan_[i][r];
        const auto& ni = cs_->neighbors[j];
        plan.receiver_slot = static_cast<Index>(std::lower_bound(ni.begin(), ni.end(), i) - ni.begin());
        for (Index a = 0; a < cs_->block_size(i); ++a) {
          const Index g = cs_->index_sets[i][a];
          if (cs_->local_position(j, g) >= 0) {
            plan.globals.push_back(g);
            plan.sender_positions.push_back(a);
          }
        }
      }
    }
    for (Index i = 0; i < N; ++i) {
      const Index k = cs_->block_size(i);
      gather_plan_[i].resize(k);
      const auto& ne = cs_->neighbors[i];
      for (Index a = 0; a < k; ++a) {
        const Index g = cs_->index_sets[i][a];
        for (Index q : cs_->owners[g]) {
          if (q == i) {
            gather_plan_[i][a].emplace_back(-1, -1);
            continue;
          }
          const Index slot = static_cast<Index>(std::lower_bound(ne.begin(), ne.end(), q) - ne.begin());
          const auto& plan = send_plan_[q][static_cast<std::size_t>(
              std::lower_bound(cs_->neighbors[q].begin(), cs_->neighbors[q].end(), i) - cs_->neighbors[q].begin())];
          const Index entry =
              static_cast<Index>(std::lower_bound(plan.globals.begin(), plan.globals.end(), g) - plan.globals.begin());
          gather_plan_[i][a].emplace_back(slot, entry);
        }
      }
    }
  }

  const CouplingStructure* cs_;
  std::vector<Index> component_;
  Index num_components_ = 0;
  std::vector<Index> diameter_;
  std::vector<std::vector<SendPlan>> send_plan_;
  // For agent i, local coordinate a: one (inbox slot, entry) per owner of the
  // variable in ascending agent order; slot -1 is the agent's own value.
  std::vector<std::vector<std::vector<std::pair<Index, Index>>>> gather_plan_;
  MessageStats stats_;
  std::vector<std::pair<Index, Index>> last_round_edges_;
};

}  // namespace dipm

#endif  // DIPM_NETWORK_HPP_
