#pragma once

#include <ostream>

namespace lumiswarm {

// Serves playground sessions over WebSocket at ws://127.0.0.1:<port>/session.
// Blocks until the process is stopped; returns nonzero if the port cannot be bound.
int serveSessions(unsigned short port, std::ostream& log);

}  // namespace lumiswarm
