#pragma once

#include <vector>

namespace qstab {

// Queue-length vector plus 0/1 connectivity flags. Flags are empty for
// networks without connectivity state. Queue lengths are unbounded above and
// never negative.
struct State {
  std::vector<int> queues;
  std::vector<int> flags;

  bool operator==(const State&) const = default;

  int total_queue() const {
    int s = 0;
    for (int q : queues) s += q;
    return s;
  }

  int max_queue() const {
    int m = 0;
    for (int q : queues) m = q > m ? q : m;
    return m;
  }

  int dim() const { return static_cast<int>(queues.size() + flags.size()); }
};

// Index of the queue/buffer selected for service, 0-based.
struct Action {
  int index = 0;
};

}  // namespace qstab
