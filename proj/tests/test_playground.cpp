#include <doctest.h>

#include <chrono>
#include <cstring>
#include <random>
#include <sstream>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "lumiswarm/config.hpp"
#include "lumiswarm/playground.hpp"
#include "lumiswarm/server.hpp"
#include "support.hpp"

using namespace lumiswarm;
using nlohmann::json;

namespace {

const json kShrink = {{"protocol", "shrink"}, {"scheduler", "ssynch"}, {"n", 8}, {"seed", 4}};

json hello(const json& config, const std::string& session = "") {
  json m = {{"type", "hello"}, {"config", config}};
  if (!session.empty()) m["session"] = session;
  return m;
}

std::vector<json> send(PlaygroundConnection& c, const json& m) { return c.receive(m.dump()); }

const json* find(const std::vector<json>& msgs, const std::string& type) {
  for (const auto& m : msgs)
    if (m["type"] == type) return &m;
  return nullptr;
}

// FNV-1a over (x, y, light, status) records, written from the wire format
// alone as a client would.
std::string clientHash(const json& stateUpdate) {
  static const std::vector<std::string> lights{"None", "Off", "Vertex", "External", "Adjusting", "Done", "Moved"};
  static const std::vector<std::string> statuses{"idle", "computing", "moving", "terminated"};
  std::uint64_t h = 1469598103934665603ULL;
  auto eat = [&](const unsigned char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& r : stateUpdate["robots"]) {
    double x = r["pos"][0].get<double>(), y = r["pos"][1].get<double>();
    unsigned char rec[18];
    std::memcpy(rec, &x, 8);
    std::memcpy(rec + 8, &y, 8);
    rec[16] = static_cast<unsigned char>(std::find(lights.begin(), lights.end(), r["light"]) - lights.begin());
    rec[17] = static_cast<unsigned char>(std::find(statuses.begin(), statuses.end(), r["status"]) - statuses.begin());
    eat(rec, sizeof rec);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

TEST_CASE("hello opens a session") {
  SessionRegistry reg;
  PlaygroundConnection c(reg);
  auto out = send(c, hello(kShrink));
  REQUIRE(out.size() == 3);
  CHECK(out[0]["type"] == "hello");
  CHECK(out[1]["type"] == "stateUpdate");
  CHECK(out[2]["type"] == "decisionRequest");
  CHECK(out[1]["robots"].size() == 8);
  CHECK(out[1].contains("hull"));
  CHECK(out[1].contains("visibility"));
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out[i]["seq"] == static_cast<long>(i));
    CHECK(out[i]["session"] == out[0]["session"]);
  }
  CHECK(out[2]["robots"].size() == 8);
}

TEST_CASE("bad openings are reported") {
  SessionRegistry reg;
  PlaygroundConnection c(reg);
  auto bad = send(c, hello({{"protocol", "teleport"}, {"n", 4}}));
  REQUIRE(bad.size() == 1);
  CHECK(bad[0]["code"] == "ConfigInvalid");
  auto early = send(c, {{"type", "decision"}, {"seq", 0}, {"activate", {0}}});
  CHECK(early[0]["type"] == "error");
  CHECK(c.receive("{nope")[0]["type"] == "error");
}

TEST_CASE("a session id already in use is not shared") {
  SessionRegistry reg;
  PlaygroundConnection a(reg), b(reg);
  auto first = send(a, hello(kShrink, "mine"));
  auto second = send(b, hello(kShrink, "mine"));
  CHECK(first[0]["session"] == "mine");
  CHECK(second[0]["session"] != "mine");
}

TEST_CASE("decisions must answer the pending request") {
  SessionRegistry reg;
  PlaygroundConnection c(reg);
  auto open = send(c, hello(kShrink));
  long pending = open[2]["seq"];
  auto stale = send(c, {{"type", "decision"}, {"seq", pending + 7}, {"activate", {0}}});
  REQUIRE(stale.size() == 1);
  CHECK(stale[0]["code"] == "StaleDecision");

  auto ok = send(c, {{"type", "decision"}, {"seq", pending}, {"activate", {2, 5}}});
  const json* result = find(ok, "stepResult");
  REQUIRE(result);
  CHECK((*result)["answers"] == pending);
  // The same answer a second time is stale.
  auto again = send(c, {{"type", "decision"}, {"seq", pending}, {"activate", {2, 5}}});
  CHECK(again[0]["code"] == "StaleDecision");
  CHECK(c.session()->decisions().size() == 1);
}

TEST_CASE("a terminated robot cannot be activated") {
  SessionRegistry reg;
  PlaygroundConnection c(reg);
  auto msgs = send(c, hello(kShrink));
  std::optional<int> gone;
  for (int step = 0; step < 200 && !gone && !c.session()->finished(); ++step) {
    const json* req = find(msgs, "decisionRequest");
    REQUIRE(req);
    const json& pending = (*req)["robots"];
    msgs = send(c, {{"type", "decision"}, {"seq", (*req)["seq"]}, {"activate", {pending[step % pending.size()]}}});
    if (const json* st = find(msgs, "stateUpdate"))
      for (const auto& r : (*st)["robots"])
        if (r["status"] == "terminated") gone = r["id"].get<int>();
  }
  REQUIRE(gone);
  REQUIRE_FALSE(c.session()->finished());
  const json* req = find(msgs, "decisionRequest");
  REQUIRE(req);
  auto bad = send(c, {{"type", "decision"}, {"seq", (*req)["seq"]}, {"activate", {*gone}}});
  REQUIRE(bad.size() == 2);
  CHECK(bad[0]["code"] == "IllegalDecision");
  CHECK(bad[1]["type"] == "decisionRequest");
}

TEST_CASE("truncation is clamped to delta and reported") {
  SessionRegistry reg;
  PlaygroundConnection c(reg);
  json cfg = {{"protocol", "shrink"}, {"scheduler", "ssynch"}, {"n", 6}, {"seed", 2},
              {"rigidity", {{"kind", "nonRigid"}, {"deltaFraction", 0.2}}}};
  auto open = send(c, hello(cfg));
  CHECK(open[2].contains("delta"));
  auto out = send(c, {{"type", "decision"}, {"seq", open[2]["seq"]}, {"activate", {0, 1, 2, 3, 4, 5}},
                      {"fractions", {{"0", 0.0}, {"1", 0.0}, {"2", 0.0}, {"3", 0.0}, {"4", 0.0}, {"5", 0.0}}}});
  const json* result = find(out, "stepResult");
  REQUIRE(result);
  const double delta = open[2]["delta"];
  int movers = 0;
  for (const auto& e : (*result)["events"]) {
    if (e["kind"] != "moveStart") continue;
    const double done = std::hypot(e["dest"][0].get<double>() - e["pos"][0].get<double>(),
                                   e["dest"][1].get<double>() - e["pos"][1].get<double>());
    const double fraction = e["realizedFraction"];
    if (done == 0.0) continue;
    ++movers;
    CHECK(fraction > 0.0);
    CHECK(fraction <= 1.0);
    // Asked to stop at once, each robot still covers min(delta, intended length).
    CHECK(done >= std::min(delta, done / fraction) * (1 - 1e-9));
  }
  CHECK(movers > 0);
  auto bad = send(c, {{"type", "decision"}, {"seq", find(out, "decisionRequest")->at("seq")}, {"activate", {0}},
                      {"fractions", {{"0", 1.5}}}});
  CHECK(bad[0]["code"] == "IllegalDecision");
}

TEST_CASE("a driven session replays bit-identically and its hashes can be recomputed") {
  for (json cfg : {json{{"protocol", "shrink"}, {"scheduler", "ssynch"}, {"n", 9}, {"seed", 21},
                        {"rigidity", {{"kind", "nonRigid"}, {"deltaFraction", 0.05}}}},
                   json{{"protocol", "contain"}, {"scheduler", "asynch"}, {"n", 7}, {"seed", 22}}}) {
    SessionRegistry reg;
    PlaygroundConnection c(reg);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto msgs = send(c, hello(cfg));
    const bool asynch = cfg["scheduler"] == "asynch";
    for (int step = 0; step < 50 && !c.session()->finished(); ++step) {
      const json* st = find(msgs, "stateUpdate");
      REQUIRE(st);
      CHECK(clientHash(*st) == (*st)["hash"]);
      const json* req = find(msgs, "decisionRequest");
      REQUIRE(req);
      json d = {{"type", "decision"}, {"seq", (*req)["seq"]}};
      if (asynch) {
        json plans = json::object();
        for (const auto& id : (*req)["robots"])
          plans[std::to_string(id.get<int>())] = {{"idle", 0.1 + u(rng)}, {"compute", 0.1 + u(rng)}, {"move", 0.1 + u(rng)}};
        d["plans"] = plans;
      } else {
        json act = json::array(), fr = json::object();
        for (const auto& id : (*req)["robots"])
          if (u(rng) < 0.5 || act.empty()) {
            act.push_back(id);
            fr[std::to_string(id.get<int>())] = u(rng);
          }
        d["activate"] = act;
        d["fractions"] = fr;
      }
      msgs = send(c, d);
      CHECK(find(msgs, "error") == nullptr);
    }
    const PlaygroundSession& s = *c.session();
    RunResult replay = runExperiment(parseRunConfig(s.replayConfig()));
    CHECK(replay.trace.text() == s.experiment().traceText());

    auto exported = send(c, {{"type", "traceExport"}});
    REQUIRE(exported.size() == 1);
    std::string joined;
    for (const auto& line : exported[0]["trace"]) joined += line.get<std::string>() + "\n";
    CHECK(joined == s.experiment().traceText());
    CHECK(exported[0]["decisions"].size() == s.decisions().size());
  }
}

TEST_CASE("violations are pushed as they happen") {
  SessionRegistry reg;
  PlaygroundConnection c(reg);
  auto open = send(c, hello({{"protocol", "broken-collide"}, {"scheduler", "ssynch"}, {"n", 5}}));
  auto out = send(c, {{"type", "decision"}, {"seq", open[2]["seq"]}, {"activate", {0, 1, 2, 3, 4}}});
  const json* v = find(out, "violation");
  REQUIRE(v);
  CHECK((*v)["kind"] == "collision");
  CHECK_FALSE((*v)["robots"].empty());
  CHECK(find(out, "decisionRequest") == nullptr);
}

TEST_CASE("the WebSocket endpoint speaks the session protocol") {
  namespace beast = boost::beast;
  using tcp = boost::asio::ip::tcp;
  boost::asio::io_context ioc;
  unsigned short port;
  {
    tcp::acceptor probe(ioc, tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), 0));
    port = probe.local_endpoint().port();
  }
  static std::ostringstream serverLog;
  std::thread([port] { serveSessions(port, serverLog); }).detach();

  beast::websocket::stream<tcp::socket> ws(ioc);
  bool connected = false;
  for (int attempt = 0; attempt < 100 && !connected; ++attempt) {
    beast::error_code ec;
    ws.next_layer().connect(tcp::endpoint(boost::asio::ip::make_address("127.0.0.1"), port), ec);
    connected = !ec;
    if (!connected) {
      ws.next_layer().close(ec);
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  REQUIRE(connected);
  ws.handshake("127.0.0.1", "/session");
  ws.text(true);
  ws.write(boost::asio::buffer(hello(kShrink).dump()));
  std::vector<json> got;
  for (int i = 0; i < 3; ++i) {
    beast::flat_buffer buf;
    ws.read(buf);
    got.push_back(json::parse(beast::buffers_to_string(buf.data())));
  }
  CHECK(got[0]["type"] == "hello");
  CHECK(got[1]["type"] == "stateUpdate");
  CHECK(got[2]["type"] == "decisionRequest");
  ws.write(boost::asio::buffer(json({{"type", "decision"}, {"seq", got[2]["seq"]}, {"activate", {1}}}).dump()));
  beast::flat_buffer buf;
  ws.read(buf);
  CHECK(json::parse(beast::buffers_to_string(buf.data()))["type"] == "stateUpdate");
  ws.close(beast::websocket::close_code::normal);
}
