#include "constabl/server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "constabl/session.hpp"

namespace constabl {

int default_port() {
  if (const char* p = std::getenv("CONSTABL_PORT")) {
    char* end = nullptr;
    long v = std::strtol(p, &end, 10);
    if (end && *end == '\0' && v > 0 && v < 65536) return static_cast<int>(v);
  }
  return 8080;
}

namespace {

using ojson = nlohmann::ordered_json;

struct Entry {
  explicit Entry(std::unique_ptr<Session> s) : session(std::move(s)) {}
  std::mutex call_mutex;  // serializes protocol calls
  std::unique_ptr<Session> session;

  mutable std::mutex push_mutex;
  std::condition_variable push_cv;
  std::vector<std::string> pushes;
  bool closed = false;

  void push(const std::string& event, const ojson& data) {
    {
      std::lock_guard<std::mutex> lk(push_mutex);
      pushes.push_back("event: " + event + "\ndata: " + data.dump() + "\n\n");
    }
    push_cv.notify_all();
  }
  void close() {
    {
      std::lock_guard<std::mutex> lk(push_mutex);
      closed = true;
    }
    push_cv.notify_all();
  }
};

Server::Response reply(int status, const ojson& j) { return {status, j.dump()}; }

Server::Response error(int status, const std::string& code, const std::string& message) {
  ojson j;
  j["error"] = code;
  j["message"] = message;
  return reply(status, j);
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else if (c == '?') {
      break;
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

ojson model_json(const Model& m) {
  ojson j;
  j["name"] = m.name();
  j["events"] = m.events();
  ojson states = ojson::array();
  for (std::uint32_t i = 0; i < m.state_count(); ++i) {
    const State& s = m.state(StateId{i});
    ojson sj;
    sj["name"] = s.name;
    sj["type"] = std::string(to_string(s.type));
    auto parent = parent_of(m, StateId{i});
    sj["parent"] = parent ? ojson(m.state(*parent).name) : ojson(nullptr);
    states.push_back(sj);
  }
  j["states"] = states;
  ojson ts = ojson::array();
  for (const auto& t : m.transitions()) {
    ojson tj;
    tj["name"] = t.name;
    tj["source"] = m.state(t.source).name;
    tj["dest"] = m.state(t.dest).name;
    tj["event"] = m.event_name(t.event);
    ts.push_back(tj);
  }
  j["transitions"] = ts;
  return j;
}

int session_error_status(const std::string& code) {
  if (code == "mid-step" || code == "not-mid-step" || code == "not-initialized") return 409;
  return 400;
}

}  // namespace

struct Server::Impl {
  std::shared_ptr<const Program> program;
  mutable std::mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Entry>> sessions;
  std::uint64_t next_id = 1;
  httplib::Server http;
  std::thread thread;
  std::atomic<bool> stopping{false};

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::lock_guard<std::mutex> lk(sessions_mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }
};

Server::Server(std::shared_ptr<const Program> program) : impl_(std::make_unique<Impl>()) {
  impl_->program = std::move(program);
  Impl* impl = impl_.get();

  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    Response r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  impl->http.Get("/model", dispatch);
  impl->http.Get("/sessions", dispatch);
  impl->http.Post("/sessions", dispatch);
  impl->http.Post(R"(/sessions/([^/]+)/step)", dispatch);
  impl->http.Post(R"(/sessions/([^/]+)/choose)", dispatch);
  impl->http.Get(R"(/sessions/([^/]+)/state)", dispatch);
  impl->http.Get(R"(/sessions/([^/]+)/log)", dispatch);
  impl->http.Delete(R"(/sessions/([^/]+))", dispatch);
  impl->http.Get(R"(/sessions/([^/]+)/events)", [impl](const httplib::Request& req, httplib::Response& res) {
    auto entry = impl->find(req.matches[1]);
    if (!entry) {
      res.status = 404;
      res.set_content(R"({"error":"unknown-session"})", "application/json");
      return;
    }
    auto next = std::make_shared<std::size_t>(0);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [impl, entry, next](std::size_t, httplib::DataSink& sink) {
      std::vector<std::string> out;
      bool closed = false;
      {
        std::unique_lock<std::mutex> lk(entry->push_mutex);
        entry->push_cv.wait_for(lk, std::chrono::milliseconds(100),
                                [&] { return *next < entry->pushes.size() || entry->closed || impl->stopping; });
        while (*next < entry->pushes.size()) out.push_back(entry->pushes[(*next)++]);
        closed = entry->closed || impl->stopping;
      }
      for (const auto& frame : out) {
        if (!sink.write(frame.data(), frame.size())) return false;
      }
      if (closed) sink.done();
      return true;
    });
  });
}

Server::~Server() { stop(); }

Server::Response Server::handle(const std::string& method, const std::string& path, const std::string& body) {
  auto parts = split_path(path);
  const Program& program = *impl_->program;
  ojson req = ojson::object();
  if (!body.empty()) {
    try {
      req = ojson::parse(body);
    } catch (const ojson::exception& e) {
      return error(400, "bad-request", std::string("malformed JSON: ") + e.what());
    }
    if (!req.is_object()) return error(400, "bad-request", "request body must be a JSON object");
  }

  if (parts.size() == 1 && parts[0] == "model" && method == "GET") return reply(200, model_json(program.model()));

  if (parts.size() == 1 && parts[0] == "sessions") {
    if (method == "GET") {
      std::lock_guard<std::mutex> lk(impl_->sessions_mutex);
      ojson ids = ojson::array();
      for (const auto& [id, e] : impl_->sessions) ids.push_back(id);
      return reply(200, ojson{{"sessions", ids}});
    }
    if (method == "POST") {
      std::string mode_text = "event";
      std::uint64_t seed = 0;
      try {
        mode_text = req.value("mode", mode_text);
        seed = req.value("seed", seed);
      } catch (const ojson::exception& e) {
        return error(400, "bad-request", e.what());
      }
      auto mode = parse_session_mode(mode_text);
      if (!mode) return error(400, "bad-request", "mode must be 'event' or 'instruction'");
      std::string id;
      {
        std::lock_guard<std::mutex> lk(impl_->sessions_mutex);
        id = "s" + std::to_string(impl_->next_id++);
      }
      auto entry = std::make_shared<Entry>(std::make_unique<Session>(id, impl_->program, *mode, seed));
      ojson j;
      j["id"] = id;
      j["init"] = entry->session->init_result().ok() ? "ok" : entry->session->init_result().error_kind;
      j["state"] = to_json(program, entry->session->state());
      {
        std::lock_guard<std::mutex> lk(impl_->sessions_mutex);
        impl_->sessions.emplace(id, entry);
      }
      return reply(201, j);
    }
    return error(405, "method-not-allowed", method + " " + path);
  }

  if (parts.size() < 2 || parts[0] != "sessions") return error(404, "not-found", path);
  auto entry = impl_->find(parts[1]);
  if (!entry) return error(404, "unknown-session", "no session '" + parts[1] + "'");

  if (parts.size() == 2) {
    if (method != "DELETE") return error(405, "method-not-allowed", method + " " + path);
    {
      std::lock_guard<std::mutex> lk(impl_->sessions_mutex);
      impl_->sessions.erase(parts[1]);
    }
    entry->close();
    return reply(200, ojson{{"deleted", parts[1]}});
  }
  if (parts.size() != 3) return error(404, "not-found", path);
  const std::string& op = parts[2];

  std::lock_guard<std::mutex> call(entry->call_mutex);
  Session& s = *entry->session;
  try {
    if (op == "state" && method == "GET") return reply(200, to_json(program, s.state()));
    if (op == "log" && method == "GET") {
      ojson calls = ojson::array();
      for (const auto& c : s.log()) {
        calls.push_back(ojson{{"op", c.op == SessionCall::Op::step ? "step" : "choose"}, {"arg", c.arg}});
      }
      ojson j;
      j["mode"] = to_string(s.mode());
      j["seed"] = s.seed();
      j["calls"] = calls;
      return reply(200, j);
    }
    if ((op == "step" || op == "choose") && method == "POST") {
      const char* field = op == "step" ? "event" : "cp";
      if (!req.contains(field) || !req[field].is_string()) {
        return error(400, "bad-request", std::string("missing string field '") + field + "'");
      }
      StepOutcome o = op == "step" ? s.step_event(req[field].get<std::string>()) : s.choose(req[field].get<std::string>());
      ojson j = to_json(program, o);
      if (!o.result.ok()) {
        entry->push("error", j);
      } else if (o.complete) {
        entry->push("step", j);
      } else {
        entry->push("progress", j);
      }
      return reply(200, j);
    }
  } catch (const SessionError& e) {
    return error(session_error_status(e.code), e.code, e.what());
  }
  return error(404, "not-found", method + " " + path);
}

std::vector<std::string> Server::pushed(const std::string& id, std::size_t from) const {
  auto entry = impl_->find(id);
  if (!entry) return {};
  std::lock_guard<std::mutex> lk(entry->push_mutex);
  if (from >= entry->pushes.size()) return {};
  return {entry->pushes.begin() + static_cast<std::ptrdiff_t>(from), entry->pushes.end()};
}

int Server::start(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
  } else if (impl_->http.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) return -1;
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound;
}

bool Server::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

void Server::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  {
    std::lock_guard<std::mutex> lk(impl_->sessions_mutex);
    for (auto& [id, e] : impl_->sessions) e->close();
  }
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace constabl
