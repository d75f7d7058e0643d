#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zsmat/wire.hpp"

namespace zsmat {

struct ConformanceOptions {
  std::string sequence_id = "conformance";
  int width = 64;
  int height = 48;
  int frames = 16;
  std::uint64_t seed = 7;
  int fuzz_steps = 24;
};

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;

  std::size_t violations() const;
  bool ok() const { return violations() == 0; }
};

/// Drives a scripted plus seeded-fuzz transcript against a segmenter server:
/// handshake, schema validity of every response, one entry per prompt, one
/// entry per active track on propagate, idempotent DropMemory, unknown-track
/// drops, strict frame monotonicity, and survival after malformed lines.
/// Needs at least 6 frames.
ConformanceReport run_conformance(LineTransport& transport, const ConformanceOptions& options);

}  // namespace zsmat
