#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zsmat/geometry.hpp"
#include "zsmat/mask.hpp"

namespace zsmat {

inline constexpr int kProtocolVersion = 1;

enum class RequestKind { OpenSequence, Prompt, Propagate, DropMemory, CloseSequence };

const char* to_string(RequestKind kind);
/// Throws ProtocolError for unknown names.
RequestKind request_kind_from_string(const std::string& name);

struct SequenceInfo {
  std::string sequence_id;
  int width = 0;
  int height = 0;
  int frames = 0;

  friend bool operator==(const SequenceInfo&, const SequenceInfo&) = default;
};

struct SegmenterRequest {
  RequestKind kind = RequestKind::Propagate;
  int frame = 0;
  int track_id = 0;
  std::optional<BBox> bbox;
  // OpenSequence handshake fields.
  std::string sequence_id;
  int protocol = kProtocolVersion;
  int width = 0;
  int height = 0;
  int frames = 0;

  friend bool operator==(const SegmenterRequest&, const SegmenterRequest&) = default;
};

struct MaskEntry {
  int track_id = 0;
  BitMask mask;
  OcclusionScore occ;

  friend bool operator==(const MaskEntry&, const MaskEntry&) = default;
};

struct SegmenterResponse {
  int frame = 0;
  std::vector<MaskEntry> entries;
  std::optional<std::string> error;
  std::optional<std::string> warning;

  friend bool operator==(const SegmenterResponse&, const SegmenterResponse&) = default;
};

struct DropAck {
  bool known_track = true;
  bool changed = false;  // false for repeated drops and drops with nothing to remove
};

/// Engine-side view of a video segmenter: box prompts, per-frame
/// propagation of every active track, and memory-entry removal.
///
/// Contract shared by every binding:
///  - open() first; propagate(f) requires f == previous propagated frame + 1
///    (the first propagate is frame 0);
///  - prompt() and drop_memory() address the most recently propagated frame;
///  - tracks are independent, one track never changes another's output.
/// Violations throw ProtocolError.
class SegmenterSession {
 public:
  virtual ~SegmenterSession() = default;

  virtual void open(const SequenceInfo& info) = 0;
  virtual MaskEntry prompt(int frame, int track_id, const BBox& box) = 0;
  virtual std::vector<MaskEntry> propagate(int frame) = 0;
  virtual DropAck drop_memory(int track_id, int frame) = 0;
  virtual void close() = 0;
};

/// Tracks the open/frame state every binding must enforce.
class FrameClock {
 public:
  void open(const SequenceInfo& info);
  void close();
  bool is_open() const { return open_; }
  const SequenceInfo& info() const { return info_; }
  /// Last propagated frame, -1 before the first propagate.
  int current() const { return current_; }

  void check_open() const;
  /// Validates and advances; throws ProtocolError unless frame == current + 1.
  void advance(int frame);
  /// Prompt/drop must address the current frame.
  void check_current(int frame, const char* what) const;

 private:
  bool open_ = false;
  SequenceInfo info_;
  int current_ = -1;
};

/// Runs one request against a session; protocol and runtime failures become
/// error responses so that a server never dies on a bad request.
SegmenterResponse dispatch(SegmenterSession& session, const SegmenterRequest& request);

}  // namespace zsmat
