#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace tutorlab {

// One state change of one session. Sequence numbers are assigned by the
// store and are contiguous from 1.
struct Event {
  std::uint64_t seq = 0;
  std::string session_id;
  std::string type;
  std::int64_t t_ms = 0;
  nlohmann::json data = nlohmann::json::object();

  friend bool operator==(const Event&, const Event&) = default;
};

// Single JSON line with a trailing CRC-32 over the rest of the record.
std::string encode_event(const Event& event);
// Throws IntegrityError on parse failure or checksum mismatch.
Event decode_event(std::string_view line);

// Append-only log shared by every session of a study. Implementations are
// safe for concurrent appends.
class EventStore {
 public:
  virtual ~EventStore() = default;
  // Assigns event.seq and persists the event.
  virtual void append(Event& event) = 0;
  virtual std::vector<Event> read_all() const = 0;
};

class MemoryEventStore final : public EventStore {
 public:
  void append(Event& event) override;
  std::vector<Event> read_all() const override;

 private:
  mutable std::mutex mutex_;
  std::vector<Event> events_;
};

// Newline-delimited file. Opening validates every existing record (checksum,
// contiguous sequence numbers, no torn trailing line) and throws
// IntegrityError on the first problem.
class FileEventStore final : public EventStore {
 public:
  explicit FileEventStore(std::filesystem::path path);

  void append(Event& event) override;
  std::vector<Event> read_all() const override;
  const std::filesystem::path& path() const { return path_; }

  // Reads and validates a log without opening it for writing.
  static std::vector<Event> read_file(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::ofstream out_;
  std::uint64_t next_seq_ = 1;
};

}  // namespace tutorlab
