#ifndef SINKGAN_PARALLEL_HPP
#define SINKGAN_PARALLEL_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace sinkgan {

/// Worker count from SINKGAN_THREADS. Unset, 0 and 1 all mean serial.
inline int thread_count() {
  const char *env = std::getenv("SINKGAN_THREADS");
  if (env == nullptr) {
    return 1;
  }
  try {
    return std::max(1, std::stoi(env));
  } catch (...) {
    return 1;
  }
}

/// Calls fn(begin, end) over [0, n) split into chunks of `grain`. Chunks are
/// independent, so results do not depend on the worker count.
template <typename Fn>
void parallel_for(Eigen::Index n, Eigen::Index grain, Fn &&fn) {
  grain = std::max<Eigen::Index>(grain, 1);
  const Eigen::Index chunks = (n + grain - 1) / grain;
  const int workers =
      static_cast<int>(std::min<Eigen::Index>(thread_count(), chunks));
  if (workers <= 1) {
    for (Eigen::Index c = 0; c < chunks; ++c) {
      fn(c * grain, std::min(n, (c + 1) * grain));
    }
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (Eigen::Index c = w; c < chunks; c += workers) {
        fn(c * grain, std::min(n, (c + 1) * grain));
      }
    });
  }
  for (auto &t : pool) {
    t.join();
  }
}

}  // namespace sinkgan

#endif  // SINKGAN_PARALLEL_HPP
