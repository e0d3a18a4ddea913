#pragma once

#include "qlink/sim/topology.h"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qlink {

using PayloadValue = std::variant<std::int64_t, double, bool, std::string>;

struct Event {
  TimePs time_ps = 0;
  std::string entity;
  std::string event_type;
  std::vector<std::pair<std::string, PayloadValue>> payload;

  const PayloadValue* find(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;  // accepts integers too
  bool get_bool(const std::string& key) const;
  std::string get_string(const std::string& key) const;
};

bool operator==(const Event& a, const Event& b);

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void on_event(const Event& e) = 0;
};

class EventLog : public EventSink {
 public:
  void on_event(const Event& e) override { events_.push_back(e); }
  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }

 private:
  std::vector<Event> events_;
};

std::string to_ndjson_line(const Event& e);
Event event_from_ndjson_line(const std::string& line);

class NdjsonWriter : public EventSink {
 public:
  explicit NdjsonWriter(std::ostream& out) : out_(out) {}
  void on_event(const Event& e) override;

 private:
  std::ostream& out_;
};

std::vector<Event> read_ndjson(std::istream& in);

}  // namespace qlink
