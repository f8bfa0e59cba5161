#include <httplib.h>

#include "termharm/ratesvc.hpp"

namespace termharm {

struct HttpServer::Impl {
  RatingService& service;
  httplib::Server server;

  explicit Impl(RatingService& s) : service(s) {
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
      const auto out = service.handle(req.method, req.target, req.body,
                                      req.get_header_value("X-Admin-Token"));
      res.status = out.status;
      res.set_content(out.body, "application/json; charset=utf-8");
    };
    // Every path goes through the service router so unknown endpoints and
    // methods get the same JSON error shape.
    server.Get(".*", dispatch);
    server.Post(".*", dispatch);
    server.Put(".*", dispatch);
    server.Delete(".*", dispatch);
    server.Patch(".*", dispatch);
  }
};

HttpServer::HttpServer(RatingService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) fail(ErrorKind::Io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port))
    fail(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace termharm
