#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "termharm/error.hpp"
#include "termharm/termbase.hpp"

namespace termharm {

// An everyday-language pair with a known intended rating, shown to raters
// between dataset pairs. Presented from its own glosses, not from the corpus.
struct ControlItem {
  std::string pair_id;
  std::vector<std::string> left_terms;
  std::string left_definition;
  std::vector<std::string> right_terms;
  std::string right_definition;
  int intended_rating = 0;
};

// Tab-separated, optional header "pair_id\t...":
//   pair_id  left_terms  left_definition  right_terms  right_definition  intended_rating
// with terms separated by '|'.
std::vector<ControlItem> load_control_items(const std::string& path);
std::vector<ControlItem> parse_control_items(std::istream& in);

// Failure reported to a client: a stable machine code plus an HTTP status.
class ServiceError : public Error {
 public:
  ServiceError(ErrorKind kind, std::string code, int status, const std::string& message)
      : Error(kind, message), code_(std::move(code)), status_(status) {}
  const std::string& code() const { return code_; }
  int status() const { return status_; }

 private:
  std::string code_;
  int status_;
};

struct ServiceConfig {
  std::vector<std::string> codes;   // accepted recruitment codes; empty disables registration
  std::vector<RatingPair> pairs;    // dataset pairs, in export order
  const EntryCorpus* corpus = nullptr;  // read during construction only
  std::vector<ControlItem> controls;
  std::uint64_t seed = 0;           // base seed for per-rater item orders
  std::string log_path;             // append-only event log; empty keeps state in memory
  std::string admin_token;          // required for /export over HTTP when non-empty
  std::string instructions_en;      // defaults are used when empty
  std::string instructions_de;
};

// Uniform integer in [0, bound) by rejection sampling; portable across
// standard libraries, unlike std::uniform_int_distribution.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

// Item order for one rater: dataset pairs shuffled (Fisher-Yates), controls
// shuffled likewise, then the final sequence of n + c positions is split into c
// blocks [ceil(k(n+c)/c), ceil((k+1)(n+c)/c)) and control k takes a uniform
// position inside block k. Returns indices into dataset pairs (0..n-1) and
// controls (n..n+c-1).
std::vector<std::size_t> item_order(std::size_t n_pairs, std::size_t n_controls,
                                    std::uint64_t seed);

// Per-rater seed derived from the base seed and registration ordinal.
std::uint64_t rater_seed(std::uint64_t base_seed, std::uint64_t ordinal);

struct ConceptView {
  std::vector<std::string> terms;
  std::string definition;
};

struct ItemView {
  std::size_t position = 0;  // 1-based position in the rater's order
  std::size_t total = 0;
  std::string pair_id;
  ConceptView left;
  ConceptView right;
};

struct Progress {
  std::size_t rated = 0;
  std::size_t total = 0;
  std::size_t postponed = 0;
  bool done = false;
};

struct ServiceExport {
  std::string dataset;   // termbase dataset format, dataset pairs only
  std::string controls;  // rater_id  pair_id  intended_rating  rating  deviation
};

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

class RatingService {
 public:
  // Validates the configuration and replays the event log when present.
  explicit RatingService(ServiceConfig config);
  ~RatingService();
  RatingService(const RatingService&) = delete;
  RatingService& operator=(const RatingService&) = delete;

  std::string register_rater(std::string_view code);
  void confirm_instructions(std::string_view rater_id);
  std::optional<ItemView> next_item(std::string_view rater_id) const;
  void submit_rating(std::string_view rater_id, std::string_view pair_id, int category);
  void postpone(std::string_view rater_id, std::string_view pair_id);
  Progress progress(std::string_view rater_id) const;
  ServiceExport export_data() const;

  // Item order (pair ids) fixed at registration.
  std::vector<std::string> order_of(std::string_view rater_id) const;
  std::size_t rater_count() const;
  std::size_t total_items() const;

  // Transport-independent JSON endpoint dispatch. `target` may carry a query string.
  HttpResponse handle(std::string_view method, std::string_view target, std::string_view body,
                      std::string_view admin_token = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  mutable std::mutex mutex_;
};

// Blocking HTTP server for a service. port 0 binds an ephemeral port.
class HttpServer {
 public:
  explicit HttpServer(RatingService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and returns the bound port; throws Io when binding fails.
  int bind(const std::string& host, int port);
  // Serves until stop() is called.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace termharm
