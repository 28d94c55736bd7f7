#pragma once

// Shared state between actors and the learner: an episode-granular replay
// buffer and a single-writer snapshot store.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rbi/harness/learning.hpp"
#include "rbi/random.hpp"

namespace rbi::harness {

/// A finished actor episode. `final_state` follows the last entry; it is a
/// goal when `terminated`, otherwise the episode hit its step cap.
struct Episode {
  std::vector<ReplayEntry> entries;
  std::size_t final_state = 0;
  bool terminated = false;
};

/// One sampled transition with its n-step reward window. `bootstrap` is false
/// when the window reaches a true terminal.
struct SampledTransition {
  ReplayEntry entry;
  std::vector<double> rewards;
  std::size_t bootstrap_state = 0;
  bool bootstrap = true;
};

/// Whole episodes go in atomically; sampling holds the lock for the whole
/// batch, so a batch never mixes buffer states.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

  void insert(Episode episode) {
    if (episode.entries.empty()) return;
    auto ptr = std::make_shared<const Episode>(std::move(episode));
    std::lock_guard lock(mutex_);
    inserted_ += ptr->entries.size();
    size_ += ptr->entries.size();
    const auto ep = static_cast<std::uint32_t>(episodes_.size() + evicted_);
    for (std::size_t i = 0; i < ptr->entries.size(); ++i) index_.push_back({ep, static_cast<std::uint32_t>(i)});
    episodes_.push_back(std::move(ptr));
    while (size_ > capacity_ && episodes_.size() > 1) {
      const std::size_t drop = episodes_.front()->entries.size();
      episodes_.pop_front();
      ++evicted_;
      size_ -= drop;
      index_.erase(index_.begin(), index_.begin() + static_cast<std::ptrdiff_t>(drop));
    }
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return size_;
  }

  std::size_t total_inserted() const {
    std::lock_guard lock(mutex_);
    return inserted_;
  }

  /// Uniform (or priority^alpha proportional) sample with replacement. Returns
  /// an empty batch while the buffer is empty.
  std::vector<SampledTransition> sample(std::size_t count, std::size_t n_step, Engine& rng,
                                        SamplingMode mode = SamplingMode::uniform, double alpha = 0.5) const {
    std::lock_guard lock(mutex_);
    std::vector<SampledTransition> out;
    if (size_ == 0) return out;
    out.reserve(count);
    double max_weight = 0.0;
    if (mode == SamplingMode::priority) {
      for (const auto& ep : episodes_) {
        for (const auto& e : ep->entries) max_weight = std::max(max_weight, priority_mass(e, alpha));
      }
    }
    while (out.size() < count) {
      const Ref ref = index_[uniform_index(rng, index_.size())];
      const Episode& ep = *episodes_[ref.episode - evicted_];
      if (mode == SamplingMode::priority && uniform01(rng) * max_weight > priority_mass(ep.entries[ref.step], alpha)) {
        continue;
      }
      out.push_back(window(ep, ref.step, n_step));
    }
    return out;
  }

  /// Copy of every stored episode, oldest first.
  std::vector<Episode> episodes() const {
    std::lock_guard lock(mutex_);
    std::vector<Episode> out;
    for (const auto& ep : episodes_) out.push_back(*ep);
    return out;
  }

 private:
  struct Ref {
    std::uint32_t episode;
    std::uint32_t step;
  };

  static double priority_mass(const ReplayEntry& e, double alpha) { return std::pow(e.priority + 1e-6, alpha); }

  static SampledTransition window(const Episode& ep, std::size_t i, std::size_t n_step) {
    SampledTransition t;
    t.entry = ep.entries[i];
    const std::size_t end = std::min(ep.entries.size(), i + n_step);
    for (std::size_t k = i; k < end; ++k) t.rewards.push_back(ep.entries[k].reward);
    if (end < ep.entries.size()) {
      t.bootstrap_state = ep.entries[end].state;
      t.bootstrap = true;
    } else {
      t.bootstrap_state = ep.final_state;
      t.bootstrap = !ep.terminated;
    }
    return t;
  }

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::deque<std::shared_ptr<const Episode>> episodes_;
  std::deque<Ref> index_;
  std::size_t evicted_ = 0;
  std::size_t size_ = 0;
  std::size_t inserted_ = 0;
};

/// Published copy of the learner's tables.
struct Snapshot {
  std::uint64_t seq = 0;
  StateActionValues logits;
  StateActionValues q;
};

/// Single writer (learner), many readers (actors). Readers get a complete
/// immutable snapshot; sequence numbers only grow.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::filesystem::path dir = {}) : dir_(std::move(dir)) {}

  std::uint64_t publish(const StateActionValues& logits, const StateActionValues& q) {
    auto snap = std::make_shared<Snapshot>();
    snap->logits = logits;
    snap->q = q;
    {
      std::lock_guard lock(mutex_);
      snap->seq = ++last_seq_;
      latest_ = snap;
    }
    if (!dir_.empty()) write_snapshot_file(dir_, *snap);
    return snap->seq;
  }

  std::shared_ptr<const Snapshot> latest() const {
    std::lock_guard lock(mutex_);
    return latest_;
  }

 private:
  static void write_snapshot_file(const std::filesystem::path& dir, const Snapshot& snap);

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Snapshot> latest_;
  std::uint64_t last_seq_ = 0;
};

/// Text dump: a "rbi-snapshot 1" header, seq, dimensions, then the logits and
/// q tables one state per line with round-trip precision.
inline std::string format_snapshot(const Snapshot& snap) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "rbi-snapshot 1\n";
  out << "seq " << snap.seq << '\n';
  out << "states " << snap.logits.n_states() << " actions " << snap.logits.n_actions() << '\n';
  auto dump = [&](const char* name, const StateActionValues& t) {
    out << name << '\n';
    for (std::size_t s = 0; s < t.n_states(); ++s) {
      for (std::size_t a = 0; a < t.n_actions(); ++a) out << (a ? " " : "") << t(s, a);
      out << '\n';
    }
  };
  dump("logits", snap.logits);
  dump("q", snap.q);
  return out.str();
}

inline Snapshot parse_snapshot(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int version = 0;
  Snapshot snap;
  std::size_t n_states = 0, n_actions = 0;
  auto expect = [&](const char* w) {
    if (!(in >> word) || word != w) throw std::runtime_error(std::string("snapshot: expected '") + w + "'");
  };
  expect("rbi-snapshot");
  if (!(in >> version) || version != 1) throw std::runtime_error("snapshot: unsupported version");
  expect("seq");
  in >> snap.seq;
  expect("states");
  in >> n_states;
  expect("actions");
  in >> n_actions;
  if (!in) throw std::runtime_error("snapshot: bad header");
  auto read = [&](const char* name) {
    expect(name);
    StateActionValues t(n_states, n_actions);
    for (std::size_t s = 0; s < n_states; ++s) {
      for (std::size_t a = 0; a < n_actions; ++a) {
        if (!(in >> t(s, a))) throw std::runtime_error("snapshot: truncated table");
      }
    }
    return t;
  };
  snap.logits = read("logits");
  snap.q = read("q");
  return snap;
}

/// Writes snapshot_<seq>.txt via a temporary file and rename.
inline void SnapshotStore::write_snapshot_file(const std::filesystem::path& dir, const Snapshot& snap) {
  std::filesystem::create_directories(dir);
  const auto final_path = dir / ("snapshot_" + std::to_string(snap.seq) + ".txt");
  const auto tmp_path = dir / ("snapshot_" + std::to_string(snap.seq) + ".txt.tmp");
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    out << format_snapshot(snap);
    if (!out) throw std::runtime_error("snapshot: write failed: " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path);
}

}  // namespace rbi::harness
