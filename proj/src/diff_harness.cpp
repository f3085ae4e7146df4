#include "protosynth/diff_harness.hpp"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "protosynth/dns.hpp"
#include "protosynth/process.hpp"
#include "protosynth/util.hpp"

namespace protosynth {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Timeout : AdapterError {
  using AdapterError::AdapterError;
};

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  int get() const { return fd_; }

 private:
  int fd_;
};

std::vector<std::string> argv_field(const Json& cfg, const char* key) {
  if (!cfg.contains(key)) return {};
  const Json& v = cfg.at(key);
  if (v.is_string()) return {"sh", "-c", v.get<std::string>()};
  return v.get<std::vector<std::string>>();
}

std::chrono::milliseconds timeout_of(const Json& cfg) {
  return util::parse_duration(cfg.value("timeout", std::string("10s")));
}

void run_hook(const std::vector<std::string>& argv, const std::string& what, const Json& stimulus,
              const std::optional<fs::path>& cwd) {
  if (argv.empty()) return;
  ProcessOptions o;
  o.stdin_data = stimulus.dump();
  o.timeout = std::chrono::minutes(2);
  o.cwd = cwd;
  auto r = run_process(argv, o);
  if (r.timed_out) throw AdapterError(what + " hook timed out");
  if (r.exit_code != 0) throw AdapterError(what + " hook failed (exit " + std::to_string(r.exit_code) + "): " + util::trim(r.err));
}

addrinfo* resolve(const std::string& host, int port, int socktype) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = socktype;
  addrinfo* res = nullptr;
  int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res);
  if (rc != 0) throw AdapterError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  return res;
}

// Waits for `events` on fd until `deadline`; throws Timeout.
void wait_for(int fd, short events, Clock::time_point deadline) {
  while (true) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) throw Timeout("no reply before the deadline");
    pollfd p{fd, events, 0};
    int n = ::poll(&p, 1, static_cast<int>(left));
    if (n > 0) return;
    if (n < 0 && errno != EINTR) throw AdapterError(std::string("poll: ") + std::strerror(errno));
  }
}

class CommandAdapter : public Adapter {
 public:
  CommandAdapter(std::string id, const Json& cfg, const fs::path& base)
      : id_(std::move(id)),
        command_(argv_field(cfg, "command")),
        setup_(argv_field(cfg, "setup")),
        teardown_(argv_field(cfg, "teardown")),
        timeout_(timeout_of(cfg)) {
    if (!base.empty()) cwd_ = base;
    for (auto* argv : {&command_, &setup_, &teardown_}) {
      if (!argv->empty() && argv->front().find('/') != std::string::npos && fs::path(argv->front()).is_relative() &&
          cwd_) {
        argv->front() = (*cwd_ / argv->front()).string();
      }
    }
  }

  const std::string& id() const override { return id_; }
  void setup(const Json& stimulus) override { run_hook(setup_, "setup", stimulus, cwd_); }
  void teardown() override { run_hook(teardown_, "teardown", Json::object(), cwd_); }

  Response execute(const Json& stimulus) override {
    ProcessOptions o;
    o.stdin_data = stimulus.dump();
    o.timeout = timeout_;
    o.cwd = cwd_;
    auto r = run_process(command_, o);
    if (r.timed_out) return Response::timeout("command timed out");
    if (r.not_found) throw EnvironmentError("adapter " + id_ + ": '" + command_.front() + "' not found");
    if (r.exit_code != 0) return Response::crash("exit " + std::to_string(r.exit_code) + ": " + util::trim(r.err));
    Json out;
    try {
      out = Json::parse(r.out);
    } catch (const std::exception& e) {
      return Response::crash(std::string("unparsable reply: ") + e.what());
    }
    if (!out.is_object()) return Response::crash("reply is not a JSON object");
    if (out.contains("status") && out.at("status") == "CRASH") return Response::crash(out.value("detail", ""));
    return Response::ok(out.contains("fields") ? out.at("fields") : out);
  }

 private:
  std::string id_;
  std::vector<std::string> command_, setup_, teardown_;
  std::chrono::milliseconds timeout_;
  std::optional<fs::path> cwd_;
};

class DnsUdpAdapter : public Adapter {
 public:
  DnsUdpAdapter(std::string id, const Json& cfg, const fs::path& base)
      : id_(std::move(id)),
        server_(cfg.value("server", std::string("127.0.0.1"))),
        port_(cfg.value("port", 53)),
        reload_(argv_field(cfg, "reload")),
        reset_(argv_field(cfg, "reset")),
        timeout_(timeout_of(cfg)) {
    if (cfg.contains("zone_file")) {
      zone_file_ = fs::path(cfg.at("zone_file").get<std::string>());
      if (zone_file_->is_relative() && !base.empty()) zone_file_ = base / *zone_file_;
    }
  }

  const std::string& id() const override { return id_; }

  void setup(const Json& stimulus) override {
    if (zone_file_) util::write_file(*zone_file_, stimulus.at("zone").get<std::string>());
    run_hook(reload_, "reload", stimulus, std::nullopt);
  }

  void teardown() override { run_hook(reset_, "reset", Json::object(), std::nullopt); }

  Response execute(const Json& stimulus) override {
    dns::Message q;
    q.id = ++next_id_;
    q.qname = dns::parse_name(stimulus.at("query").at("name").get<std::string>());
    q.qtype = dns::type_code(stimulus.at("query").at("type").get<std::string>());
    auto wire = dns::encode_message(q);

    addrinfo* ai = resolve(server_, port_, SOCK_DGRAM);
    Fd sock(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    int rc = sock.get() < 0 ? -1 : ::connect(sock.get(), ai->ai_addr, ai->ai_addrlen);
    ::freeaddrinfo(ai);
    if (rc != 0) throw AdapterError(std::string("udp connect: ") + std::strerror(errno));
    if (::send(sock.get(), wire.data(), wire.size(), 0) < 0) throw AdapterError(std::string("send: ") + std::strerror(errno));
    auto deadline = Clock::now() + timeout_;
    std::vector<std::uint8_t> buf(65535);
    try {
      while (true) {
        wait_for(sock.get(), POLLIN, deadline);
        ssize_t n = ::recv(sock.get(), buf.data(), buf.size(), 0);
        if (n < 0) throw AdapterError(std::string("recv: ") + std::strerror(errno));
        auto m = dns::decode_message(std::span(buf.data(), static_cast<std::size_t>(n)));
        if (m.id != q.id || !m.qr) continue;
        return Response::ok(dns::normalize(m));
      }
    } catch (const Timeout&) {
      return Response::timeout("no DNS reply within " + std::to_string(timeout_.count()) + " ms");
    } catch (const ParseError& e) {
      return Response::crash(std::string("malformed DNS reply: ") + e.what());
    }
  }

 private:
  std::string id_;
  std::string server_;
  int port_;
  std::optional<fs::path> zone_file_;
  std::vector<std::string> reload_, reset_;
  std::chrono::milliseconds timeout_;
  std::uint16_t next_id_ = 0x1200;
};

struct SmtpReply {
  std::string code;
  std::string text;
};

class SmtpSession {
 public:
  SmtpSession(const std::string& host, int port, std::chrono::milliseconds timeout) : timeout_(timeout) {
    addrinfo* ai = resolve(host, port, SOCK_STREAM);
    int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    int rc = fd < 0 ? -1 : ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    int err = errno;
    ::freeaddrinfo(ai);
    fd_ = std::make_unique<Fd>(fd);
    if (rc != 0) throw AdapterError("connect to " + host + ":" + std::to_string(port) + ": " + std::strerror(err));
  }

  SmtpReply read_reply() {
    auto deadline = Clock::now() + timeout_;
    SmtpReply r;
    while (true) {
      std::string line = read_line(deadline);
      if (line.size() < 3) throw AdapterError("short SMTP reply line '" + line + "'");
      r.code = line.substr(0, 3);
      std::string rest = line.size() > 4 ? line.substr(4) : "";
      r.text += (r.text.empty() ? "" : "\n") + rest;
      if (line.size() == 3 || line[3] == ' ') return r;
    }
  }

  void send_line(const std::string& line) {
    std::string data = line + "\r\n";
    std::size_t sent = 0;
    while (sent < data.size()) {
      ssize_t n = ::send(fd_->get(), data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n < 0) throw AdapterError(std::string("send: ") + std::strerror(errno));
      sent += static_cast<std::size_t>(n);
    }
  }

 private:
  std::string read_line(Clock::time_point deadline) {
    while (true) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      wait_for(fd_->get(), POLLIN, deadline);
      char buf[4096];
      ssize_t n = ::recv(fd_->get(), buf, sizeof buf, 0);
      if (n == 0) throw AdapterError("connection closed by server");
      if (n < 0) throw AdapterError(std::string("recv: ") + std::strerror(errno));
      buffer_.append(buf, static_cast<std::size_t>(n));
    }
  }

  std::unique_ptr<Fd> fd_;
  std::string buffer_;
  std::chrono::milliseconds timeout_;
};

class SmtpTcpAdapter : public Adapter {
 public:
  SmtpTcpAdapter(std::string id, const Json& cfg)
      : id_(std::move(id)),
        host_(cfg.value("host", std::string("127.0.0.1"))),
        port_(cfg.value("port", 8025)),
        reset_(argv_field(cfg, "reset")),
        timeout_(timeout_of(cfg)) {}

  const std::string& id() const override { return id_; }
  void setup(const Json&) override {}
  void teardown() override { run_hook(reset_, "reset", Json::object(), std::nullopt); }

  Response execute(const Json& stimulus) override {
    try {
      SmtpSession s(host_, port_, timeout_);
      auto greeting = s.read_reply();
      if (greeting.code[0] != '2') return Response::crash("greeting rejected: " + greeting.code + " " + greeting.text);
      const auto prefix = stimulus.value("prefix", std::vector<std::string>{});
      for (std::size_t i = 0; i < prefix.size(); ++i) {
        std::string line = smtp_translate(prefix[i]);
        s.send_line(line);
        auto r = s.read_reply();
        if (r.code[0] == '4' || r.code[0] == '5') {
          return Response::crash("prefix step " + std::to_string(i) + " ('" + line + "') rejected: " + r.code + " " +
                                 r.text);
        }
      }
      s.send_line(stimulus.at("input").get<std::string>());
      auto r = s.read_reply();
      return Response::ok(Json{{"code", r.code}, {"text", util::trim(r.text)}});
    } catch (const Timeout& e) {
      return Response::timeout(e.what());
    }
  }

 private:
  std::string id_;
  std::string host_;
  int port_;
  std::vector<std::string> reset_;
  std::chrono::milliseconds timeout_;
};

}  // namespace

std::string smtp_translate(const std::string& input) {
  std::string t = util::trim(input);
  if (t == "HELO" || t == "EHLO") return t + " client.test";
  if (t == "MAIL FROM:") return "MAIL FROM:<sender@client.test>";
  if (t == "RCPT TO:") return "RCPT TO:<rcpt@server.test>";
  return input;
}

std::unique_ptr<Adapter> make_adapter(const Json& cfg, const fs::path& base_dir) {
  std::vector<std::string> v;
  if (!cfg.is_object()) throw ValidationError({"adapter entry must be an object"});
  std::string id = cfg.value("id", "");
  std::string kind = cfg.value("kind", "");
  if (id.empty()) v.push_back("adapter without an id");
  try {
    timeout_of(cfg);
  } catch (const Error& e) {
    v.push_back("adapter " + id + ": " + e.what());
  }
  if (kind == "command") {
    if (argv_field(cfg, "command").empty()) v.push_back("adapter " + id + ": command is required");
  } else if (kind != "dns-udp" && kind != "smtp-tcp") {
    v.push_back("adapter " + id + ": unknown kind '" + kind + "'");
  }
  if (!v.empty()) throw ValidationError(v);
  if (kind == "command") return std::make_unique<CommandAdapter>(id, cfg, base_dir);
  if (kind == "dns-udp") return std::make_unique<DnsUdpAdapter>(id, cfg, base_dir);
  return std::make_unique<SmtpTcpAdapter>(id, cfg);
}

Response drive_and_execute(Adapter& adapter, const StateGraph& graph, const std::string& state,
                           const std::string& input) {
  Json stimulus{{"prefix", input_prefix(graph, state)}, {"input", input}};
  Response r;
  try {
    adapter.setup(stimulus);
    r = adapter.execute(stimulus);
  } catch (const AdapterError& e) {
    r = Response::crash(e.what());
  }
  adapter.teardown();
  return r;
}

ProtocolConfig ProtocolConfig::from_json(const Json& j) {
  ProtocolConfig p;
  if (j.is_null()) return p;
  p.kind = j.value("kind", std::string("generic"));
  if (p.kind != "dns" && p.kind != "smtp" && p.kind != "generic") {
    throw ValidationError({"protocol.kind must be dns, smtp or generic, got '" + p.kind + "'"});
  }
  p.options = j;
  p.options.erase("kind");
  return p;
}

Json ProtocolConfig::to_json() const {
  Json j{{"kind", kind}};
  for (auto it = options.begin(); it != options.end(); ++it) j[it.key()] = it.value();
  return j;
}

namespace {

const TypedValue* find_input(const TestCase& t, const std::string& name, bool (*pred)(const Type&)) {
  for (const auto& in : t.inputs) {
    if (name.empty() ? pred(in.type.resolved()) : in.name == name) return &in;
  }
  return nullptr;
}

bool is_enum(const Type& t) { return t.is<Type::Enumeration>(); }
bool is_text(const Type& t) { return t.is<Type::Text>(); }

}  // namespace

Translation translate_suite(const std::vector<TestCase>& tests, const ProtocolConfig& protocol,
                            const std::optional<StateGraph>& graph) {
  Translation out;
  const Json& o = protocol.options;
  if (protocol.kind == "smtp" && !graph) throw Error("the smtp protocol needs a state graph");
  for (const auto& t : tests) {
    try {
      if (protocol.kind == "dns") {
        dns::PostprocessOptions p;
        p.suffix = o.value("suffix", p.suffix);
        p.query_type = o.value("query_type", p.query_type);
        p.nameserver = o.value("nameserver", p.nameserver);
        p.query_arg = o.value("query_arg", p.query_arg);
        out.stimuli.push_back({t.id, dns::postprocess_dns(t, p).to_json()});
      } else if (protocol.kind == "smtp") {
        const auto* state = find_input(t, o.value("state_arg", ""), is_enum);
        const auto* input = find_input(t, o.value("input_arg", ""), is_text);
        if (state == nullptr || input == nullptr) throw Error("needs a state and an input argument");
        auto s = state->value.get<std::string>();
        out.stimuli.push_back({t.id, Json{{"state", s}, {"prefix", input_prefix(*graph, s)}, {"input", text_bytes(input->value)}}});
      } else {
        Json inputs = Json::object();
        for (const auto& in : t.inputs) inputs[in.name] = in.value;
        out.stimuli.push_back({t.id, Json{{"inputs", inputs}}});
      }
    } catch (const Error& e) {
      out.skipped.push_back(t.id + ": " + e.what());
    }
  }
  return out;
}

Response normalize_response(const Response& r, const ProtocolConfig& protocol, const std::vector<std::string>& ignore) {
  Response out = r;
  for (const auto& f : ignore) {
    if (f != "status") out.fields.erase(f);
  }
  if (out.status() != "OK") return out;
  if (protocol.kind == "dns") {
    Json rest = out.fields;
    rest.erase("status");
    out.fields = Response::ok(dns::normalize_fields(rest)).fields;
  } else if (protocol.kind == "smtp") {
    for (const char* k : {"code", "text"}) {
      if (out.fields.contains(k) && out.fields.at(k).is_string()) out.fields[k] = util::trim(out.fields.at(k).get<std::string>());
    }
  }
  return out;
}

std::vector<TestResponses> run_suite(std::vector<std::unique_ptr<Adapter>>& adapters,
                                     const std::vector<Stimulus>& stimuli) {
  if (adapters.empty()) throw Error("no adapters configured");
  std::vector<std::vector<Response>> cells(adapters.size(), std::vector<Response>(stimuli.size()));
  std::vector<std::exception_ptr> fatal(adapters.size());
  std::vector<std::thread> threads;
  for (std::size_t a = 0; a < adapters.size(); ++a) {
    threads.emplace_back([&, a] {
      try {
        for (std::size_t i = 0; i < stimuli.size(); ++i) {
          Response r;
          try {
            adapters[a]->setup(stimuli[i].data);
            r = adapters[a]->execute(stimuli[i].data);
          } catch (const Timeout& e) {
            r = Response::timeout(e.what());
          } catch (const AdapterError& e) {
            r = Response::crash(e.what());
          } catch (const ParseError& e) {
            r = Response::crash(e.what());
          }
          try {
            adapters[a]->teardown();
          } catch (const AdapterError& e) {
            r.detail += (r.detail.empty() ? "" : "; ") + std::string(e.what());
          }
          cells[a][i] = std::move(r);
        }
      } catch (...) {
        fatal[a] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& f : fatal) {
    if (f) std::rethrow_exception(f);
  }
  std::vector<TestResponses> out;
  for (std::size_t i = 0; i < stimuli.size(); ++i) {
    TestResponses tr{stimuli[i].test_id, {}};
    for (std::size_t a = 0; a < adapters.size(); ++a) tr.responses.emplace_back(adapters[a]->id(), cells[a][i]);
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace protosynth
