#include "lumiswarm/server.hpp"

#include <mutex>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "lumiswarm/playground.hpp"

namespace lumiswarm {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = boost::asio::ip::tcp;

namespace {

std::mutex logMutex;

void logLine(std::ostream& log, const std::string& line) {
  std::lock_guard lock(logMutex);
  log << line << std::endl;
}

void rejectHttp(tcp::socket& socket, const http::request<http::string_body>& req) {
  http::response<http::string_body> res{http::status::not_found, req.version()};
  res.set(http::field::content_type, "text/plain");
  res.body() = "playground sessions live at /session\n";
  res.prepare_payload();
  beast::error_code ec;
  http::write(socket, res, ec);
}

void serveConnection(tcp::socket socket, SessionRegistry& registry, std::ostream& log) {
  try {
    beast::flat_buffer buffer;
    http::request<http::string_body> req;
    http::read(socket, buffer, req);
    if (!websocket::is_upgrade(req) || req.target() != "/session") {
      rejectHttp(socket, req);
      return;
    }
    websocket::stream<tcp::socket> ws(std::move(socket));
    ws.accept(req);
    ws.text(true);
    PlaygroundConnection conn(registry);
    for (;;) {
      beast::flat_buffer in;
      ws.read(in);
      for (const auto& reply : conn.receive(beast::buffers_to_string(in.data()))) ws.write(boost::asio::buffer(reply.dump()));
    }
  } catch (const beast::system_error& e) {
    if (e.code() != websocket::error::closed && e.code() != boost::asio::error::eof)
      logLine(log, std::string("connection ended: ") + e.what());
  } catch (const std::exception& e) {
    logLine(log, std::string("connection failed: ") + e.what());
  }
}

}  // namespace

int serveSessions(unsigned short port, std::ostream& log) {
  boost::asio::io_context ioc;
  tcp::acceptor acceptor(ioc);
  beast::error_code ec;
  tcp::endpoint endpoint(boost::asio::ip::make_address("127.0.0.1"), port);
  acceptor.open(endpoint.protocol(), ec);
  if (!ec) acceptor.set_option(boost::asio::socket_base::reuse_address(true), ec);
  if (!ec) acceptor.bind(endpoint, ec);
  if (!ec) acceptor.listen(boost::asio::socket_base::max_listen_connections, ec);
  if (ec) {
    logLine(log, "cannot listen on port " + std::to_string(port) + ": " + ec.message());
    return 1;
  }
  logLine(log, "playground listening on ws://127.0.0.1:" + std::to_string(acceptor.local_endpoint().port()) + "/session");
  SessionRegistry registry;
  for (;;) {
    tcp::socket socket(ioc);
    acceptor.accept(socket, ec);
    if (ec) continue;
    std::thread(serveConnection, std::move(socket), std::ref(registry), std::ref(log)).detach();
  }
}

}  // namespace lumiswarm
