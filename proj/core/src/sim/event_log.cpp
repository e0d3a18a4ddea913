#include "qlink/sim/event_log.h"

#include "qlink/util/errors.h"

#include <json.hpp>

#include <istream>
#include <ostream>

namespace qlink {

using ordered_json = nlohmann::ordered_json;

const PayloadValue* Event::find(const std::string& key) const {
  for (const auto& [k, v] : payload) {
    if (k == key) return &v;
  }
  return nullptr;
}

namespace {

const PayloadValue& must_find(const Event& e, const std::string& key) {
  const PayloadValue* v = e.find(key);
  if (v == nullptr) throw InvariantError("event '" + e.event_type + "' has no payload field '" + key + "'");
  return *v;
}

}  // namespace

std::int64_t Event::get_int(const std::string& key) const {
  const PayloadValue& v = must_find(*this, key);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw InvariantError("payload field '" + key + "' is not an integer");
}

double Event::get_double(const std::string& key) const {
  const PayloadValue& v = must_find(*this, key);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw InvariantError("payload field '" + key + "' is not numeric");
}

bool Event::get_bool(const std::string& key) const {
  const PayloadValue& v = must_find(*this, key);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  throw InvariantError("payload field '" + key + "' is not a bool");
}

std::string Event::get_string(const std::string& key) const {
  const PayloadValue& v = must_find(*this, key);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw InvariantError("payload field '" + key + "' is not a string");
}

bool operator==(const Event& a, const Event& b) {
  return a.time_ps == b.time_ps && a.entity == b.entity && a.event_type == b.event_type && a.payload == b.payload;
}

std::string to_ndjson_line(const Event& e) {
  ordered_json j;
  j["time_ps"] = e.time_ps;
  j["entity"] = e.entity;
  j["event_type"] = e.event_type;
  ordered_json payload = ordered_json::object();
  for (const auto& [k, v] : e.payload) {
    std::visit([&](const auto& x) { payload[k] = x; }, v);
  }
  j["payload"] = std::move(payload);
  return j.dump();
}

Event event_from_ndjson_line(const std::string& line) {
  ordered_json j;
  try {
    j = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& ex) {
    throw ConfigError(std::string("event log: ") + ex.what());
  }
  Event e;
  try {
    e.time_ps = j.at("time_ps").get<std::int64_t>();
    e.entity = j.at("entity").get<std::string>();
    e.event_type = j.at("event_type").get<std::string>();
    for (const auto& [k, v] : j.at("payload").items()) {
      if (v.is_boolean()) {
        e.payload.emplace_back(k, v.get<bool>());
      } else if (v.is_number_integer()) {
        e.payload.emplace_back(k, v.get<std::int64_t>());
      } else if (v.is_number()) {
        e.payload.emplace_back(k, v.get<double>());
      } else if (v.is_string()) {
        e.payload.emplace_back(k, v.get<std::string>());
      } else {
        throw ConfigError("event log: unsupported payload value for '" + k + "'");
      }
    }
  } catch (const ordered_json::exception& ex) {
    throw ConfigError(std::string("event log: ") + ex.what());
  }
  return e;
}

void NdjsonWriter::on_event(const Event& e) { out_ << to_ndjson_line(e) << '\n'; }

std::vector<Event> read_ndjson(std::istream& in) {
  std::vector<Event> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(event_from_ndjson_line(line));
    } catch (const ConfigError& ex) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace qlink
