#include "zsmat/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "zsmat/association.hpp"
#include "zsmat/errors.hpp"

namespace zsmat {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keeps the pixels of `m` outside its `fraction` with the smallest keyed
// hash (keep_selected = false), or only those (keep_selected = true). The
// orderings are fixed per key, so growing fractions give nested sets.
BitMask hash_select(const BitMask& m, double fraction, std::uint64_t key, bool keep_selected) {
  auto pixels = m.foreground_indices();
  const auto n = pixels.size();
  const auto k = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
  if (k == 0) {
    return keep_selected ? BitMask(m.width(), m.height()) : m;
  }
  std::vector<std::pair<std::uint64_t, std::uint32_t>> ranked;
  ranked.reserve(n);
  for (auto p : pixels) {
    ranked.emplace_back(splitmix64(key ^ (static_cast<std::uint64_t>(p) * 0x100000001b3ULL)), p);
  }
  std::nth_element(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k - 1), ranked.end());
  std::vector<std::uint32_t> kept;
  if (keep_selected) {
    for (std::size_t i = 0; i < k; ++i) {
      kept.push_back(ranked[i].second);
    }
  } else {
    for (std::size_t i = k; i < n; ++i) {
      kept.push_back(ranked[i].second);
    }
  }
  std::sort(kept.begin(), kept.end());
  return BitMask::from_indices(m.width(), m.height(), kept);
}

std::uint64_t object_key(std::uint64_t seed, int object, std::uint64_t salt) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(object) + salt));
}

}  // namespace

OracleSegmenter::OracleSegmenter(std::shared_ptr<const World> world) : world_(std::move(world)) {
  if (!world_) {
    throw std::invalid_argument("oracle needs a world");
  }
}

void OracleSegmenter::open(const SequenceInfo& info) {
  const auto& cfg = world_->config;
  if (info.width != cfg.width || info.height != cfg.height) {
    throw ProtocolError(fmt::format("sequence is {}x{} but the synthetic world is {}x{}", info.width, info.height,
                                    cfg.width, cfg.height));
  }
  if (info.frames > cfg.frames) {
    throw ProtocolError(fmt::format("sequence has {} frames but the synthetic world only {}", info.frames, cfg.frames));
  }
  clock_.open(info);
  tracks_.clear();
}

void OracleSegmenter::close() {
  clock_.close();
  tracks_.clear();
}

int OracleSegmenter::bind(const BBox& box, int frame) const {
  int best = -1;
  double best_iou = 0.0;
  int best_depth = 0;
  for (const auto& o : world_->frames[static_cast<std::size_t>(frame)]) {
    const auto vb = mask_to_bbox(o.visible);
    if (!vb) {
      continue;
    }
    const double v = iou(box, *vb);
    if (v <= 0.0) {
      continue;
    }
    // Frame lists are sorted by object index, so strict comparisons keep the lower index on full ties.
    if (best < 0 || v > best_iou || (v == best_iou && o.depth < best_depth)) {
      best = o.object;
      best_iou = v;
      best_depth = o.depth;
    }
  }
  return best;
}

int OracleSegmenter::occluder_of(int object, int frame) const {
  const auto* self = world_->find(frame, object);
  if (self == nullptr) {
    return -1;
  }
  int best = -1;
  std::int64_t best_overlap = 0;
  for (const auto& o : world_->frames[static_cast<std::size_t>(frame)]) {
    const bool nearer = o.depth < self->depth || (o.depth == self->depth && o.object < object);
    if (!nearer) {
      continue;
    }
    const auto overlap = mask_intersection(o.full, self->full);
    if (overlap > best_overlap) {
      best = o.object;
      best_overlap = overlap;
    }
  }
  return best;
}

MaskEntry OracleSegmenter::output(int track_id, const TrackState& track, int frame) const {
  const auto& cfg = world_->config;
  const auto& oc = cfg.oracle;
  MaskEntry entry{track_id, BitMask(cfg.width, cfg.height), OcclusionScore{oc.occ_min()}};
  const Memory& mem = track.memory;
  const auto* self = mem.object >= 0 ? world_->find(frame, mem.object) : nullptr;
  if (self == nullptr) {
    return entry;
  }
  const int age = frame - mem.prompt_frame;
  const double decay = std::min(oc.max_decay, oc.decay_per_frame * age);
  entry.occ.value = oc.occ_of_visibility(self->visibility) - oc.occ_decay_per_frame * age;

  const int occluder = self->visibility < oc.snap_visibility ? occluder_of(mem.object, frame) : -1;
  if (occluder >= 0) {
    const auto* other = world_->find(frame, occluder);
    entry.mask = hash_select(other->visible, decay, object_key(cfg.seed, occluder, 1), false);
    return entry;
  }
  BitMask mask = hash_select(self->visible, decay, object_key(cfg.seed, mem.object, 1), false);
  if (mem.contamination > 0.0 && mem.contaminant >= 0) {
    if (const auto* other = world_->find(frame, mem.contaminant)) {
      mask = mask_or(mask, hash_select(other->visible, mem.contamination, object_key(cfg.seed, mem.contaminant, 2), true));
    }
  }
  entry.mask = std::move(mask);
  return entry;
}

MaskEntry OracleSegmenter::prompt(int frame, int track_id, const BBox& box) {
  clock_.check_current(frame, "Prompt");
  if (!box.is_valid()) {
    throw ProtocolError(fmt::format("Prompt for track {} has an invalid box", track_id));
  }
  auto [it, created] = tracks_.try_emplace(track_id);
  TrackState& track = it->second;
  std::optional<Memory> prior;
  if (!created) {
    prior = track.memory;
  }
  track.prompts.emplace_back(frame, prior);
  track.dropped.clear();
  track.memory = Memory{bind(box, frame), frame, 0.0, -1, {}};
  return output(track_id, track, frame);
}

std::vector<MaskEntry> OracleSegmenter::propagate(int frame) {
  clock_.advance(frame);
  if (frame >= world_->config.frames) {
    throw ProtocolError(fmt::format("frame {} is past the synthetic world", frame));
  }
  const auto& oc = world_->config.oracle;
  std::vector<MaskEntry> entries;
  entries.reserve(tracks_.size());
  for (auto& [id, track] : tracks_) {
    Memory& mem = track.memory;
    if (mem.contamination >= 1.0 - 1e-9 && mem.contaminant >= 0) {
      // Memory now describes the occluder: identity switch.
      mem.object = mem.contaminant;
      mem.contaminant = -1;
      mem.contamination = 0.0;
      mem.deltas.clear();
    }
    const auto* self = mem.object >= 0 ? world_->find(frame, mem.object) : nullptr;
    if (self != nullptr && self->visibility < oc.snap_visibility) {
      const int occluder = occluder_of(mem.object, frame);
      if (occluder >= 0) {
        if (mem.contaminant != occluder) {
          mem.contamination = 0.0;
          mem.deltas.clear();
        }
        mem.contaminant = occluder;
        mem.contamination += oc.contamination_rate;
        mem.deltas[frame] = oc.contamination_rate;
        track.contaminating_frames.push_back(frame);
      }
    }
    entries.push_back(output(id, track, frame));
  }
  return entries;
}

DropAck OracleSegmenter::drop_memory(int track_id, int frame) {
  clock_.check_open();
  if (frame < 0 || frame > clock_.current()) {
    throw ProtocolError(fmt::format("DropMemory addresses frame {} but the current frame is {}", frame, clock_.current()));
  }
  auto it = tracks_.find(track_id);
  if (it == tracks_.end()) {
    return DropAck{false, false};
  }
  TrackState& track = it->second;
  if (!track.dropped.insert(frame).second) {
    return DropAck{true, false};
  }
  if (!track.prompts.empty() && track.prompts.back().first == frame) {
    auto prior = track.prompts.back().second;
    track.prompts.pop_back();
    if (!prior) {
      tracks_.erase(it);
    } else {
      track.memory = *prior;
    }
    return DropAck{true, true};
  }
  Memory& mem = track.memory;
  auto d = mem.deltas.find(frame);
  if (d == mem.deltas.end()) {
    return DropAck{true, false};
  }
  mem.contamination = std::max(0.0, mem.contamination - d->second);
  mem.deltas.erase(d);
  if (mem.deltas.empty()) {
    mem.contamination = 0.0;
    mem.contaminant = -1;
  }
  return DropAck{true, true};
}

std::optional<OracleTrackInfo> OracleSegmenter::track_info(int track_id) const {
  auto it = tracks_.find(track_id);
  if (it == tracks_.end()) {
    return std::nullopt;
  }
  const auto& t = it->second;
  return OracleTrackInfo{t.memory.object, t.memory.prompt_frame, t.memory.contamination, t.memory.contaminant,
                         t.contaminating_frames};
}

std::vector<int> OracleSegmenter::track_ids() const {
  std::vector<int> ids;
  for (const auto& [id, t] : tracks_) {
    ids.push_back(id);
  }
  return ids;
}

std::unique_ptr<SegmenterSession> make_oracle_session(std::shared_ptr<const World> world) {
  return std::make_unique<OracleSegmenter>(std::move(world));
}

}  // namespace zsmat
