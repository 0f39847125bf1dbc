#pragma once

#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lumiswarm/verify.hpp"

namespace lumiswarm {

// Hash of what a client renders: positions, lights and statuses in robot id
// order. The UI recomputes it from a stateUpdate to prove it mirrors the server.
std::string configurationHash(const Configuration& config);

// One human-driven run. Every outgoing message carries the session id and a
// sequence number that increases by one per message.
class PlaygroundSession {
 public:
  // Throws ConfigInvalid.
  PlaygroundSession(std::string id, const nlohmann::json& config);

  // hello, stateUpdate and the first decisionRequest.
  std::vector<nlohmann::json> open();
  // Handles a client message (decision or traceExport request).
  std::vector<nlohmann::json> handle(const nlohmann::json& message);

  const std::string& id() const { return id_; }
  bool finished() const { return experiment_->finished(); }
  long pendingSeq() const { return pendingSeq_; }
  const Experiment& experiment() const { return *experiment_; }
  // Accepted decisions in order, each as a script entry.
  const std::vector<nlohmann::json>& decisions() const { return decisions_; }
  // The config that replays this session through `run` with a Scripted adversary.
  nlohmann::json replayConfig() const;

 private:
  nlohmann::json message(const std::string& type);
  nlohmann::json error(const std::string& code, const std::string& text);
  nlohmann::json stateUpdate();
  nlohmann::json decisionRequest();
  nlohmann::json traceExport();
  std::vector<nlohmann::json> submit(const nlohmann::json& decision);

  std::string id_;
  RunConfig config_;
  nlohmann::json rawConfig_;
  InteractiveAdversary adversary_;
  std::unique_ptr<Experiment> experiment_;
  long seq_ = 0;
  long pendingSeq_ = -1;
  std::vector<nlohmann::json> decisions_;
};

// Hands out session ids; a requested id already in use gets a fresh one.
class SessionRegistry {
 public:
  std::string claim(const std::string& requested);
  void release(const std::string& id);

 private:
  std::mutex mutex_;
  std::set<std::string> live_;
  long counter_ = 0;
};

// Protocol driver for one connection: the first message must be a hello
// carrying a run config; later messages go to the session it opened.
class PlaygroundConnection {
 public:
  explicit PlaygroundConnection(SessionRegistry& registry) : registry_(registry) {}
  ~PlaygroundConnection();
  std::vector<nlohmann::json> receive(const std::string& text);
  const PlaygroundSession* session() const { return session_.get(); }

 private:
  SessionRegistry& registry_;
  std::unique_ptr<PlaygroundSession> session_;
};

}  // namespace lumiswarm
