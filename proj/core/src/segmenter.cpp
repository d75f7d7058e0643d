#include "zsmat/segmenter.hpp"

#include <fmt/format.h>

#include "zsmat/errors.hpp"

namespace zsmat {

const char* to_string(RequestKind kind) {
  switch (kind) {
    case RequestKind::OpenSequence:
      return "OpenSequence";
    case RequestKind::Prompt:
      return "Prompt";
    case RequestKind::Propagate:
      return "Propagate";
    case RequestKind::DropMemory:
      return "DropMemory";
    case RequestKind::CloseSequence:
      return "CloseSequence";
  }
  return "?";
}

RequestKind request_kind_from_string(const std::string& name) {
  for (auto k : {RequestKind::OpenSequence, RequestKind::Prompt, RequestKind::Propagate, RequestKind::DropMemory,
                 RequestKind::CloseSequence}) {
    if (name == to_string(k)) {
      return k;
    }
  }
  throw ProtocolError(fmt::format("unknown request kind '{}'", name));
}

void FrameClock::open(const SequenceInfo& info) {
  if (open_) {
    throw ProtocolError(fmt::format("sequence '{}' is already open", info_.sequence_id));
  }
  if (info.width <= 0 || info.height <= 0) {
    throw ProtocolError(fmt::format("invalid frame size {}x{}", info.width, info.height));
  }
  if (info.frames < 0) {
    throw ProtocolError(fmt::format("invalid frame count {}", info.frames));
  }
  info_ = info;
  open_ = true;
  current_ = -1;
}

void FrameClock::close() {
  check_open();
  open_ = false;
}

void FrameClock::check_open() const {
  if (!open_) {
    throw ProtocolError("no open sequence");
  }
}

void FrameClock::advance(int frame) {
  check_open();
  if (frame != current_ + 1) {
    throw ProtocolError(fmt::format("Propagate frame {} out of order, expected {}", frame, current_ + 1));
  }
  if (info_.frames > 0 && frame >= info_.frames) {
    throw ProtocolError(fmt::format("Propagate frame {} beyond sequence length {}", frame, info_.frames));
  }
  current_ = frame;
}

void FrameClock::check_current(int frame, const char* what) const {
  check_open();
  if (frame != current_) {
    throw ProtocolError(fmt::format("{} addresses frame {} but the current frame is {}", what, frame, current_));
  }
}

SegmenterResponse dispatch(SegmenterSession& session, const SegmenterRequest& request) {
  SegmenterResponse response;
  response.frame = request.frame;
  try {
    switch (request.kind) {
      case RequestKind::OpenSequence:
        if (request.protocol != kProtocolVersion) {
          throw ProtocolError(
              fmt::format("unsupported protocol version {}, expected {}", request.protocol, kProtocolVersion));
        }
        session.open(SequenceInfo{request.sequence_id, request.width, request.height, request.frames});
        break;
      case RequestKind::Prompt:
        if (!request.bbox) {
          throw ProtocolError("Prompt without bbox");
        }
        response.entries.push_back(session.prompt(request.frame, request.track_id, *request.bbox));
        break;
      case RequestKind::Propagate:
        response.entries = session.propagate(request.frame);
        break;
      case RequestKind::DropMemory: {
        const DropAck ack = session.drop_memory(request.track_id, request.frame);
        if (!ack.known_track) {
          response.warning = fmt::format("DropMemory for unknown track {} ignored", request.track_id);
        }
        break;
      }
      case RequestKind::CloseSequence:
        session.close();
        break;
    }
  } catch (const std::exception& e) {
    response.entries.clear();
    response.error = e.what();
  }
  return response;
}

}  // namespace zsmat
