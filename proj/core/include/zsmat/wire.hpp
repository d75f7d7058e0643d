#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include "zsmat/segmenter.hpp"

namespace zsmat {

// Newline-delimited JSON, one message per line. Requests:
//   {"kind":"OpenSequence","sequence_id":S,"protocol":1,"width":W,"height":H,"frames":N}
//   {"kind":"Prompt","frame":F,"track_id":T,"bbox":[x,y,w,h]}
//   {"kind":"Propagate","frame":F}
//   {"kind":"DropMemory","frame":F,"track_id":T}
//   {"kind":"CloseSequence"}
// Responses:
//   {"frame":F,"entries":[{"track_id":T,"mask":{"width":W,"height":H,"runs":[...]},"occ":x}],
//    "error":"...", "warning":"..."}   (error/warning only when present)

std::string encode_request(const SegmenterRequest& request);
/// Throws ProtocolError on malformed JSON, unknown kinds, or missing/mistyped fields.
SegmenterRequest decode_request(std::string_view line);

std::string encode_response(const SegmenterResponse& response);
SegmenterResponse decode_response(std::string_view line);

/// Synchronous line exchange with a segmenter endpoint: one request line in,
/// one response line out. Implementations add/strip the trailing newline.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual std::string exchange(const std::string& line) = 0;
};

/// SegmenterSession speaking the wire format over a transport. Error
/// responses and malformed replies throw ProtocolError.
class WireSession final : public SegmenterSession {
 public:
  explicit WireSession(std::unique_ptr<LineTransport> transport);

  void open(const SequenceInfo& info) override;
  MaskEntry prompt(int frame, int track_id, const BBox& box) override;
  std::vector<MaskEntry> propagate(int frame) override;
  DropAck drop_memory(int track_id, int frame) override;
  void close() override;

 private:
  SegmenterResponse call(const SegmenterRequest& request);
  void check_mask(const MaskEntry& entry) const;

  std::unique_ptr<LineTransport> transport_;
  SequenceInfo info_;
};

/// Server side of the protocol around one in-process session.
class SegmenterServer {
 public:
  using SessionFactory = std::function<std::unique_ptr<SegmenterSession>()>;

  explicit SegmenterServer(SessionFactory factory);

  /// Handles one request line and returns the response line (no newline).
  /// Malformed lines produce a single error response; the session survives.
  std::string handle_line(std::string_view line);

  /// True after a successful CloseSequence.
  bool finished() const { return finished_; }

 private:
  SessionFactory factory_;
  std::unique_ptr<SegmenterSession> session_;
  bool finished_ = false;
};

/// Serves requests read from `in` until EOF or CloseSequence.
void serve_stream(SegmenterServer& server, std::istream& in, std::ostream& out);

}  // namespace zsmat
