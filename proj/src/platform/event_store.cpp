#include "tutorlab/platform/event_store.hpp"

#include <boost/crc.hpp>

#include <cstdio>
#include <sstream>

#include "tutorlab/errors.hpp"

namespace tutorlab {
namespace {

using nlohmann::json;

std::uint32_t crc32_of(std::string_view text) {
  boost::crc_32_type crc;
  crc.process_bytes(text.data(), text.size());
  return crc.checksum();
}

std::string hex8(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

json body_of(const Event& e) {
  return json{{"seq", e.seq}, {"session", e.session_id}, {"type", e.type}, {"t", e.t_ms}, {"data", e.data}};
}

std::vector<Event> validate_lines(const std::vector<std::string>& lines, const std::string& where) {
  std::vector<Event> events;
  std::uint64_t expected = 1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Event e;
    try {
      e = decode_event(lines[i]);
    } catch (const IntegrityError& err) {
      throw IntegrityError(where + " record " + std::to_string(i + 1) + ": " + err.what());
    }
    if (e.seq != expected) {
      throw IntegrityError(where + " record " + std::to_string(i + 1) + ": sequence " + std::to_string(e.seq) +
                           ", expected " + std::to_string(expected));
    }
    ++expected;
    events.push_back(std::move(e));
  }
  return events;
}

}  // namespace

std::string encode_event(const Event& event) {
  const std::string body = body_of(event).dump();
  // The checksum field is appended textually so the covered bytes are exactly
  // the serialized body.
  return body.substr(0, body.size() - 1) + ",\"crc\":\"" + hex8(crc32_of(body)) + "\"}";
}

Event decode_event(std::string_view line) {
  static constexpr std::string_view kTail = ",\"crc\":\"00000000\"}";
  if (line.size() < kTail.size() + 2 || line.substr(line.size() - kTail.size(), 8) != ",\"crc\":\"") {
    throw IntegrityError("missing checksum");
  }
  const std::string body = std::string(line.substr(0, line.size() - kTail.size())) + "}";
  const std::string stored(line.substr(line.size() - 10, 8));
  if (hex8(crc32_of(body)) != stored) throw IntegrityError("checksum mismatch");
  try {
    const auto j = json::parse(body);
    Event e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.session_id = j.at("session").get<std::string>();
    e.type = j.at("type").get<std::string>();
    e.t_ms = j.at("t").get<std::int64_t>();
    e.data = j.at("data");
    return e;
  } catch (const json::exception& err) {
    throw IntegrityError(std::string("malformed record: ") + err.what());
  }
}

void MemoryEventStore::append(Event& event) {
  std::lock_guard lock(mutex_);
  event.seq = events_.size() + 1;
  events_.push_back(event);
}

std::vector<Event> MemoryEventStore::read_all() const {
  std::lock_guard lock(mutex_);
  return events_;
}

FileEventStore::FileEventStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    next_seq_ = read_file(path_).size() + 1;
  } else if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw IngestionError("cannot open event log " + path_.string() + " for appending");
}

void FileEventStore::append(Event& event) {
  std::lock_guard lock(mutex_);
  event.seq = next_seq_;
  out_ << encode_event(event) << '\n';
  out_.flush();
  if (!out_) throw IngestionError("write to event log " + path_.string() + " failed");
  ++next_seq_;
}

std::vector<Event> FileEventStore::read_all() const {
  std::lock_guard lock(mutex_);
  return read_file(path_);
}

std::vector<Event> FileEventStore::read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open event log " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();
  if (!content.empty() && content.back() != '\n') {
    throw IntegrityError(path.string() + ": torn trailing record");
  }
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    const auto nl = content.find('\n', start);
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  return validate_lines(lines, path.string());
}

}  // namespace tutorlab
