#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "constabl/engine.hpp"

namespace constabl {

namespace {

using json = nlohmann::ordered_json;

json value_json(const Value& v) { return v.is_bool() ? json(v.as_bool()) : json(v.as_int()); }

Value json_value(const json& j) {
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  return Value::integer(j.get<std::int64_t>());
}

json to_json(const TraceRecord& r) {
  json j;
  j["kind"] = r.kind;
  j["step"] = r.step;
  if (r.seed) j["seed"] = *r.seed;
  if (!r.event.empty()) j["event"] = r.event;
  if (!r.transitions.empty()) j["transitions"] = r.transitions;
  if (!r.block.empty()) j["block"] = r.block;
  if (r.node) j["node"] = *r.node;
  if (r.branch) j["branch"] = *r.branch;
  if (!r.var.empty()) j["var"] = r.var;
  if (r.old_value) j["old"] = value_json(*r.old_value);
  if (r.new_value) j["new"] = value_json(*r.new_value);
  if (r.outcome) j["outcome"] = *r.outcome;
  if (!r.reads.empty()) j["reads"] = r.reads;
  if (r.kind == "config") {
    j["old"] = r.config_old;
    j["new"] = r.config_new;
  }
  if (!r.status.empty()) j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.detail.empty()) j["detail"] = r.detail;
  if (!r.blocks.empty()) j["blocks"] = r.blocks;
  return j;
}

TraceRecord from_json(const json& j) {
  TraceRecord r;
  r.kind = j.at("kind").get<std::string>();
  r.step = j.at("step").get<std::uint32_t>();
  if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
  r.event = j.value("event", "");
  if (j.contains("transitions")) r.transitions = j["transitions"].get<std::vector<std::string>>();
  r.block = j.value("block", "");
  if (j.contains("node")) r.node = j["node"].get<NodeId>();
  if (j.contains("branch")) r.branch = j["branch"].get<std::uint32_t>();
  r.var = j.value("var", "");
  if (r.kind == "config") {
    r.config_old = j.at("old").get<std::vector<std::string>>();
    r.config_new = j.at("new").get<std::vector<std::string>>();
  } else {
    if (j.contains("old")) r.old_value = json_value(j["old"]);
    if (j.contains("new")) r.new_value = json_value(j["new"]);
  }
  if (j.contains("outcome")) r.outcome = j["outcome"].get<bool>();
  if (j.contains("reads")) r.reads = j["reads"].get<std::vector<std::string>>();
  r.status = j.value("status", "");
  r.error = j.value("error", "");
  r.detail = j.value("detail", "");
  if (j.contains("blocks")) r.blocks = j["blocks"].get<std::vector<std::string>>();
  return r;
}

}  // namespace

std::string to_json_line(const TraceRecord& r) { return to_json(r).dump(); }

void write_ndjson(std::ostream& os, const Trace& trace) {
  for (const auto& r : trace) os << to_json_line(r) << '\n';
}

std::string to_ndjson(const Trace& trace) {
  std::ostringstream os;
  write_ndjson(os, trace);
  return os.str();
}

Trace read_ndjson(std::istream& is) {
  Trace out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> schedule_of(const Trace& trace) {
  std::vector<std::string> out;
  for (const auto& r : trace) {
    if ((r.kind == "instr" || r.kind == "decision") && r.node) out.push_back(r.block + "#" + std::to_string(*r.node));
  }
  return out;
}

std::vector<std::string> events_of(const Trace& trace) {
  std::vector<std::string> out;
  for (const auto& r : trace) {
    if (r.kind == "step-begin") out.push_back(r.event);
  }
  return out;
}

}  // namespace constabl
