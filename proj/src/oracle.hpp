// Forward-only channel surface. Training code observes the channel purely
// through transmitted/received sample streams: no gradients, no internals.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ganlink {

class ForwardOracle {
 public:
  virtual ~ForwardOracle() = default;

  virtual int samples_per_symbol() const = 0;

  // Maps a transmit sample stream to a received stream of equal length.
  // Deterministic for a fixed (oracle seed, stream_index) pair; distinct
  // stream indices draw independent noise.
  virtual std::vector<double> transmit(std::span<const double> tx_samples,
                                       uint64_t stream_index) const = 0;
};

}  // namespace ganlink
