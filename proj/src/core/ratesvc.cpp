#include "termharm/ratesvc.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "text_util.hpp"

namespace termharm {

using json = nlohmann::json;

namespace {

constexpr std::string_view kInstructionsEn =
    "You will see pairs of concepts. Each concept is described by one or more terms and a "
    "definition. Rate how close the two concepts are in meaning on the scale from 0 "
    "(unrelated) to 4 (same meaning). You may postpone a pair and come back to it later. "
    "A submitted rating cannot be changed.";

constexpr std::string_view kInstructionsDe =
    "Sie sehen Paare von Begriffen. Jeder Begriff wird durch eine oder mehrere Benennungen "
    "und eine Definition beschrieben. Bewerten Sie die Bedeutungsnähe der beiden Begriffe "
    "auf der Skala von 0 (nicht verwandt) bis 4 (gleiche Bedeutung). Sie können ein Paar "
    "zurückstellen und später bewerten. Eine abgegebene Bewertung kann nicht mehr "
    "geändert werden.";

std::uint64_t splitmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::vector<std::string> split_terms(std::string_view field) {
  std::vector<std::string> out;
  for (auto t : detail::split(field, '|')) {
    t = detail::trim(t);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::int64_t now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

[[noreturn]] void service_fail(ErrorKind kind, const char* code, int status,
                               const std::string& message) {
  throw ServiceError(kind, code, status, message);
}

std::string percent_decode(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '+') {
      out += ' ';
    } else if (s[i] == '%' && i + 2 < s.size()) {
      unsigned v = 0;
      auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
      if (ec != std::errc() || p != s.data() + i + 3) {
        out += s[i];
        continue;
      }
      out += static_cast<char>(v);
      i += 2;
    } else {
      out += s[i];
    }
  }
  return out;
}

std::map<std::string, std::string> parse_query(std::string_view q) {
  std::map<std::string, std::string> out;
  for (auto part : detail::split(q, '&')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos)
      out[percent_decode(part)] = "";
    else
      out[percent_decode(part.substr(0, eq))] = percent_decode(part.substr(eq + 1));
  }
  return out;
}

}  // namespace

std::vector<ControlItem> parse_control_items(std::istream& in) {
  std::vector<ControlItem> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    detail::strip_cr(line);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (line_no == 1 && line.starts_with("pair_id\t")) continue;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split(line, '\t');
    if (f.size() != 6) fail(ErrorKind::Parse, where + "expected 6 tab-separated fields");
    ControlItem item;
    item.pair_id = std::string(detail::trim(f[0]));
    item.left_terms = split_terms(f[1]);
    item.left_definition = std::string(detail::trim(f[2]));
    item.right_terms = split_terms(f[3]);
    item.right_definition = std::string(detail::trim(f[4]));
    const auto intended = detail::parse_int(detail::trim(f[5]));
    if (item.pair_id.empty()) fail(ErrorKind::Parse, where + "empty pair id");
    if (item.left_terms.empty() || item.right_terms.empty())
      fail(ErrorKind::Parse, where + "control pair needs terms on both sides");
    if (!intended || !in_scale(static_cast<int>(*intended)))
      fail(ErrorKind::Parse, where + "intended rating outside 0-4");
    item.intended_rating = static_cast<int>(*intended);
    if (!seen.insert(item.pair_id).second)
      fail(ErrorKind::Duplicate, where + "duplicate control pair " + item.pair_id);
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<ControlItem> load_control_items(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  return parse_control_items(in);
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) fail(ErrorKind::InvalidArgument, "empty range");
  // Reject the low 2^64 mod bound values so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

std::vector<std::size_t> item_order(std::size_t n_pairs, std::size_t n_controls,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto shuffle = [&](std::vector<std::size_t>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_below(rng, i)]);
  };
  std::vector<std::size_t> pairs(n_pairs), controls(n_controls);
  for (std::size_t i = 0; i < n_pairs; ++i) pairs[i] = i;
  for (std::size_t i = 0; i < n_controls; ++i) controls[i] = n_pairs + i;
  shuffle(pairs);
  shuffle(controls);
  if (n_controls == 0) return pairs;

  const std::size_t total = n_pairs + n_controls;
  auto block_start = [&](std::size_t k) { return (k * total + n_controls - 1) / n_controls; };
  std::vector<std::size_t> control_pos(n_controls);
  for (std::size_t k = 0; k < n_controls; ++k) {
    const std::size_t lo = block_start(k), hi = block_start(k + 1);
    control_pos[k] = lo + uniform_below(rng, hi - lo);
  }
  std::vector<std::size_t> order;
  order.reserve(total);
  std::size_t next_pair = 0, next_control = 0;
  for (std::size_t pos = 0; pos < total; ++pos) {
    if (next_control < n_controls && control_pos[next_control] == pos)
      order.push_back(controls[next_control++]);
    else
      order.push_back(pairs[next_pair++]);
  }
  return order;
}

std::uint64_t rater_seed(std::uint64_t base_seed, std::uint64_t ordinal) {
  return splitmix64(base_seed + (ordinal + 1) * 0x9E3779B97F4A7C15ull);
}

// ---------------------------------------------------------------------------

struct RatingService::Impl {
  struct Item {
    std::string pair_id;
    ConceptView left;
    ConceptView right;
    std::optional<int> intended;  // controls only
  };

  struct Session {
    std::string id;
    std::string code;
    std::uint64_t seed = 0;
    bool confirmed = false;
    std::vector<std::size_t> order;  // item indices
    std::vector<int> rating;         // per item index, -1 when unrated
    std::vector<bool> postponed;     // per position in the main pass
    std::deque<std::size_t> queue;   // postponed positions awaiting replay
    std::size_t cursor = 0;          // first main-pass position not yet settled
    std::size_t rated = 0;
    std::size_t postpone_count = 0;
  };

  ServiceConfig config;
  std::vector<Item> items;
  std::size_t n_pairs = 0;
  std::unordered_map<std::string, std::size_t> item_index;
  std::set<std::string> codes;
  std::map<std::string, Session, std::less<>> sessions;
  std::uint64_t registrations = 0;
  int fd = -1;

  ~Impl() {
    if (fd >= 0) ::close(fd);
  }

  Session& session(std::string_view id) {
    auto it = sessions.find(id);
    if (it == sessions.end())
      service_fail(ErrorKind::NotFound, "unknown_rater", 404, "unknown rater " + std::string(id));
    return it->second;
  }
  const Session& session(std::string_view id) const {
    return const_cast<Impl*>(this)->session(id);
  }

  static void settle(Session& s) {
    while (s.cursor < s.order.size() &&
           (s.rating[s.order[s.cursor]] >= 0 || s.postponed[s.cursor]))
      ++s.cursor;
  }

  // Position of the item currently presented, if any.
  static std::optional<std::size_t> current(const Session& s) {
    if (s.cursor < s.order.size()) return s.cursor;
    if (!s.queue.empty()) return s.queue.front();
    return std::nullopt;
  }

  static void require_confirmed(const Session& s) {
    if (!s.confirmed)
      service_fail(ErrorKind::State, "instructions_not_confirmed", 409,
                   "instructions have not been confirmed");
  }

  std::size_t require_item(std::string_view pair_id) const {
    auto it = item_index.find(std::string(pair_id));
    if (it == item_index.end())
      service_fail(ErrorKind::NotFound, "unknown_pair", 404,
                   "unknown pair " + std::string(pair_id));
    return it->second;
  }

  // Durable append; returns only after the event reached stable storage.
  void append(const json& event) {
    if (fd < 0) return;
    const std::string line = event.dump() + '\n';
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
      if (n < 0) {
        if (errno == EINTR) continue;
        fail(ErrorKind::Io, std::string("event log write failed: ") + std::strerror(errno));
      }
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0)
      fail(ErrorKind::Io, std::string("event log sync failed: ") + std::strerror(errno));
  }

  // Validation, persistence and state change for each event type. `replay`
  // skips persistence while rebuilding state from the log.
  std::string do_register(std::string_view code, const std::vector<std::size_t>* stored_order,
                          std::optional<std::uint64_t> stored_seed, bool replay) {
    // Codes are checked when a rater registers, not when the log is replayed,
    // so retiring a code keeps earlier sessions intact.
    if (!replay && !codes.contains(std::string(code)))
      service_fail(ErrorKind::InvalidArgument, "unknown_code", 403, "unknown recruitment code");
    Session s;
    s.code = std::string(code);
    s.seed = stored_seed ? *stored_seed : rater_seed(config.seed, registrations);
    s.order = stored_order ? *stored_order : item_order(n_pairs, items.size() - n_pairs, s.seed);
    char buf[32];
    std::snprintf(buf, sizeof buf, "r%012llx",
                  static_cast<unsigned long long>(splitmix64(s.seed) >> 16));
    s.id = buf;
    if (sessions.contains(s.id)) fail(ErrorKind::Duplicate, "rater id collision " + s.id);
    s.rating.assign(items.size(), -1);
    s.postponed.assign(items.size(), false);
    if (!replay) {
      json order = json::array();
      for (auto i : s.order) order.push_back(items[i].pair_id);
      append({{"event", "register"}, {"rater_id", s.id}, {"code", s.code}, {"seed", s.seed},
              {"order", order}, {"time_ms", now_ms()}});
    }
    ++registrations;
    const auto id = s.id;
    sessions.emplace(id, std::move(s));
    return id;
  }

  void do_confirm(std::string_view rater_id, bool replay) {
    auto& s = session(rater_id);
    if (s.confirmed) return;
    if (!replay) append({{"event", "confirm"}, {"rater_id", s.id}, {"time_ms", now_ms()}});
    s.confirmed = true;
  }

  void do_rate(std::string_view rater_id, std::string_view pair_id, int category, bool replay) {
    auto& s = session(rater_id);
    require_confirmed(s);
    const std::size_t item = require_item(pair_id);
    if (s.rating[item] >= 0)
      service_fail(ErrorKind::State, "edit_rejected", 409,
                   "pair " + std::string(pair_id) + " was already rated; ratings cannot be changed");
    if (!in_scale(category))
      service_fail(ErrorKind::InvalidArgument, "out_of_scale", 400,
                   "category outside the 0-4 scale");
    const auto pos = current(s);
    if (!pos || s.order[*pos] != item)
      service_fail(ErrorKind::State, "not_current_item", 409,
                   "pair " + std::string(pair_id) + " is not the current item");
    if (!replay)
      append({{"event", "rating"}, {"rater_id", s.id}, {"pair_id", items[item].pair_id},
              {"category", category}, {"ordinal", s.rated + 1}, {"time_ms", now_ms()}});
    s.rating[item] = category;
    ++s.rated;
    if (*pos == s.cursor)
      settle(s);
    else
      s.queue.pop_front();
  }

  void do_postpone(std::string_view rater_id, std::string_view pair_id, bool replay) {
    auto& s = session(rater_id);
    require_confirmed(s);
    const std::size_t item = require_item(pair_id);
    if (s.rating[item] >= 0)
      service_fail(ErrorKind::State, "edit_rejected", 409,
                   "pair " + std::string(pair_id) + " was already rated");
    const auto pos = current(s);
    if (!pos || s.order[*pos] != item)
      service_fail(ErrorKind::State, "not_current_item", 409,
                   "pair " + std::string(pair_id) + " is not the current item");
    if (s.postpone_count >= s.order.size())
      service_fail(ErrorKind::State, "postpone_limit", 409,
                   "postponement limit reached; the current item must be rated");
    if (!replay)
      append({{"event", "postpone"}, {"rater_id", s.id}, {"pair_id", items[item].pair_id},
              {"time_ms", now_ms()}});
    ++s.postpone_count;
    if (*pos == s.cursor) {
      s.postponed[*pos] = true;
      s.queue.push_back(*pos);
      settle(s);
    } else {
      s.queue.pop_front();
      s.queue.push_back(*pos);
    }
  }

  void apply_logged(const json& ev) {
    const auto type = ev.at("event").get<std::string>();
    if (type == "register") {
      std::vector<std::size_t> order;
      for (const auto& id : ev.at("order")) order.push_back(require_item(id.get<std::string>()));
      auto sorted = order;
      std::sort(sorted.begin(), sorted.end());
      if (sorted.size() != items.size() ||
          std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        fail(ErrorKind::Parse, "stored item order does not match the configured items");
      const auto id =
          do_register(ev.at("code").get<std::string>(), &order, ev.at("seed").get<std::uint64_t>(), true);
      if (id != ev.at("rater_id").get<std::string>())
        fail(ErrorKind::Parse, "stored rater id does not match its seed");
    } else if (type == "confirm") {
      do_confirm(ev.at("rater_id").get<std::string>(), true);
    } else if (type == "rating") {
      do_rate(ev.at("rater_id").get<std::string>(), ev.at("pair_id").get<std::string>(),
              ev.at("category").get<int>(), true);
    } else if (type == "postpone") {
      do_postpone(ev.at("rater_id").get<std::string>(), ev.at("pair_id").get<std::string>(), true);
    } else {
      fail(ErrorKind::Parse, "unknown event type " + type);
    }
  }

  void open_log() {
    std::ifstream in(config.log_path, std::ios::binary);
    std::string content;
    if (in) {
      std::ostringstream ss;
      ss << in.rdbuf();
      content = ss.str();
    }
    std::size_t start = 0, line_no = 0, valid_end = 0;
    while (start < content.size()) {
      ++line_no;
      const auto nl = content.find('\n', start);
      const bool complete = nl != std::string::npos;
      const std::string_view line(content.data() + start,
                                  (complete ? nl : content.size()) - start);
      if (!complete) {
        // A torn final write never reached acknowledgment; drop it.
        if (!json::accept(line)) break;
      }
      if (!detail::trim(line).empty()) {
        try {
          apply_logged(json::parse(line));
        } catch (const Error& e) {
          fail(ErrorKind::Parse, "event log line " + std::to_string(line_no) + ": " + e.what());
        } catch (const json::exception& e) {
          fail(ErrorKind::Parse, "event log line " + std::to_string(line_no) + ": " + e.what());
        }
      }
      start = complete ? nl + 1 : content.size();
      valid_end = start;
    }

    fd = ::open(config.log_path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0)
      fail(ErrorKind::Io, "cannot open event log " + config.log_path + ": " + std::strerror(errno));
    if (valid_end < content.size()) {
      if (::ftruncate(fd, static_cast<off_t>(valid_end)) != 0)
        fail(ErrorKind::Io, "cannot truncate torn event log tail");
    } else if (valid_end > 0 && content.back() != '\n') {
      // The last event is whole but lost its newline; terminate it.
      if (::write(fd, "\n", 1) != 1 || ::fsync(fd) != 0)
        fail(ErrorKind::Io, "cannot repair event log tail");
    }
  }
};

RatingService::RatingService(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
  auto& im = *impl_;
  for (const auto& c : config.codes) {
    if (c.empty()) fail(ErrorKind::InvalidArgument, "empty recruitment code");
    im.codes.insert(c);
  }
  for (const auto& p : config.pairs) {
    if (p.kind != PairKind::Dataset)
      fail(ErrorKind::InvalidArgument, "pair " + p.pair_id + " is not a dataset pair");
    if (!config.corpus) fail(ErrorKind::InvalidArgument, "dataset pairs need an entry corpus");
    const auto* l = config.corpus->find(p.left_id);
    const auto* r = config.corpus->find(p.right_id);
    if (!l || !r) fail(ErrorKind::NotFound, "pair " + p.pair_id + " names an unknown entry");
    im.items.push_back({p.pair_id, {l->terms, l->definition}, {r->terms, r->definition}, {}});
  }
  im.n_pairs = im.items.size();
  for (const auto& c : config.controls)
    im.items.push_back({c.pair_id,
                        {c.left_terms, c.left_definition},
                        {c.right_terms, c.right_definition},
                        c.intended_rating});
  if (im.items.empty()) fail(ErrorKind::InvalidArgument, "no items to rate");
  if (config.controls.size() > im.n_pairs && im.n_pairs > 0)
    fail(ErrorKind::InvalidArgument, "more control pairs than dataset pairs");
  for (std::size_t i = 0; i < im.items.size(); ++i)
    if (!im.item_index.emplace(im.items[i].pair_id, i).second)
      fail(ErrorKind::Duplicate, "duplicate pair id " + im.items[i].pair_id);
  config.corpus = nullptr;
  im.config = std::move(config);
  if (!im.config.log_path.empty()) im.open_log();
}

RatingService::~RatingService() = default;

std::string RatingService::register_rater(std::string_view code) {
  std::lock_guard lock(mutex_);
  return impl_->do_register(code, nullptr, std::nullopt, false);
}

void RatingService::confirm_instructions(std::string_view rater_id) {
  std::lock_guard lock(mutex_);
  impl_->do_confirm(rater_id, false);
}

std::optional<ItemView> RatingService::next_item(std::string_view rater_id) const {
  std::lock_guard lock(mutex_);
  const auto& s = impl_->session(rater_id);
  Impl::require_confirmed(s);
  const auto pos = Impl::current(s);
  if (!pos) return std::nullopt;
  const auto& item = impl_->items[s.order[*pos]];
  return ItemView{*pos + 1, s.order.size(), item.pair_id, item.left, item.right};
}

void RatingService::submit_rating(std::string_view rater_id, std::string_view pair_id,
                                  int category) {
  std::lock_guard lock(mutex_);
  impl_->do_rate(rater_id, pair_id, category, false);
}

void RatingService::postpone(std::string_view rater_id, std::string_view pair_id) {
  std::lock_guard lock(mutex_);
  impl_->do_postpone(rater_id, pair_id, false);
}

Progress RatingService::progress(std::string_view rater_id) const {
  std::lock_guard lock(mutex_);
  const auto& s = impl_->session(rater_id);
  Progress p;
  p.rated = s.rated;
  p.total = s.order.size();
  p.postponed = s.queue.size();
  p.done = s.rated == s.order.size();
  return p;
}

ServiceExport RatingService::export_data() const {
  std::lock_guard lock(mutex_);
  const auto& im = *impl_;
  RatingDataset dataset;
  for (std::size_t i = 0; i < im.n_pairs; ++i) {
    bool added = false;
    for (const auto& [id, s] : im.sessions) {
      if (s.rating[i] < 0) continue;
      if (!added) {
        dataset.add_pair(im.config.pairs[i]);
        added = true;
      }
      dataset.add_rating(im.config.pairs[i].pair_id, id, s.rating[i]);
    }
  }
  std::ostringstream ds;
  write_rating_dataset(dataset, ds);

  std::ostringstream cs;
  cs << "rater_id\tpair_id\tintended_rating\trating\tdeviation\n";
  for (const auto& [id, s] : im.sessions) {
    for (std::size_t i = im.n_pairs; i < im.items.size(); ++i) {
      if (s.rating[i] < 0) continue;
      const int intended = *im.items[i].intended;
      cs << id << '\t' << im.items[i].pair_id << '\t' << intended << '\t' << s.rating[i] << '\t'
         << std::abs(s.rating[i] - intended) << '\n';
    }
  }
  return {ds.str(), cs.str()};
}

std::vector<std::string> RatingService::order_of(std::string_view rater_id) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (auto i : impl_->session(rater_id).order) out.push_back(impl_->items[i].pair_id);
  return out;
}

std::size_t RatingService::rater_count() const {
  std::lock_guard lock(mutex_);
  return impl_->sessions.size();
}

std::size_t RatingService::total_items() const { return impl_->items.size(); }

// ---------------------------------------------------------------------------

namespace {

json concept_json(const ConceptView& c) {
  return {{"terms", c.terms}, {"definition", c.definition}};
}

HttpResponse error_response(int status, std::string_view code, std::string_view message) {
  return {status, json{{"code", code}, {"message", message}}.dump()};
}

std::string required_string(const json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string())
    service_fail(ErrorKind::InvalidArgument, "bad_request", 400,
                 std::string("missing string field '") + key + "'");
  return it->get<std::string>();
}

}  // namespace

HttpResponse RatingService::handle(std::string_view method, std::string_view target,
                                   std::string_view body, std::string_view admin_token) {
  const auto qpos = target.find('?');
  const std::string path(target.substr(0, qpos));
  const auto query =
      parse_query(qpos == std::string_view::npos ? std::string_view{} : target.substr(qpos + 1));

  struct Route {
    const char* method;
    const char* path;
  };
  static constexpr Route routes[] = {
      {"POST", "/register"}, {"GET", "/instructions"}, {"POST", "/confirm"},
      {"GET", "/next"},      {"POST", "/rating"},      {"POST", "/postpone"},
      {"GET", "/progress"},  {"GET", "/export"},
  };
  bool path_known = false, route_known = false;
  for (const auto& r : routes) {
    if (path != r.path) continue;
    path_known = true;
    route_known = route_known || method == r.method;
  }
  if (!path_known) return error_response(404, "not_found", "no such endpoint " + path);
  if (!route_known) return error_response(405, "method_not_allowed", "method not allowed");

  try {
    json in = json::object();
    if (method == "POST" && !detail::trim(body).empty()) {
      in = json::parse(body, nullptr, false);
      if (in.is_discarded() || !in.is_object())
        return error_response(400, "bad_request", "body must be a JSON object");
    }
    auto rater_from_query = [&] {
      auto it = query.find("rater_id");
      if (it == query.end() || it->second.empty())
        service_fail(ErrorKind::InvalidArgument, "bad_request", 400,
                     "missing query parameter rater_id");
      return it->second;
    };

    if (path == "/register") {
      const auto id = register_rater(required_string(in, "code"));
      return {201, json{{"rater_id", id}, {"total_items", total_items()}}.dump()};
    }
    if (path == "/instructions") {
      json scale = json::array();
      for (const auto& c : rating_scale())
        scale.push_back({{"value", c.value},
                         {"label_en", c.label_en},
                         {"label_de", c.label_de},
                         {"examples", c.examples}});
      const auto& cfg = impl_->config;
      return {200, json{{"instructions",
                         {{"en", cfg.instructions_en.empty() ? std::string(kInstructionsEn)
                                                             : cfg.instructions_en},
                          {"de", cfg.instructions_de.empty() ? std::string(kInstructionsDe)
                                                             : cfg.instructions_de}}},
                        {"scale", scale},
                        {"total_items", total_items()}}
                       .dump()};
    }
    if (path == "/confirm") {
      confirm_instructions(required_string(in, "rater_id"));
      return {200, json{{"confirmed", true}}.dump()};
    }
    if (path == "/next") {
      const auto item = next_item(rater_from_query());
      if (!item) return {200, json{{"done", true}}.dump()};
      return {200, json{{"done", false},
                        {"position", item->position},
                        {"total", item->total},
                        {"pair_id", item->pair_id},
                        {"left", concept_json(item->left)},
                        {"right", concept_json(item->right)}}
                       .dump()};
    }
    if (path == "/rating") {
      const auto rater = required_string(in, "rater_id");
      const auto pair = required_string(in, "pair_id");
      auto it = in.find("category");
      if (it == in.end() || !it->is_number_integer())
        return error_response(400, "bad_request", "missing integer field 'category'");
      // Clamp to just outside the scale so the service reports edits before range errors.
      const auto category =
          std::clamp<std::int64_t>(it->get<std::int64_t>(), kScaleMin - 1, kScaleMax + 1);
      submit_rating(rater, pair, static_cast<int>(category));
      return {200, json{{"accepted", true}}.dump()};
    }
    if (path == "/postpone") {
      postpone(required_string(in, "rater_id"), required_string(in, "pair_id"));
      return {200, json{{"postponed", true}}.dump()};
    }
    if (path == "/progress") {
      const auto p = progress(rater_from_query());
      return {200, json{{"rated", p.rated},
                        {"total", p.total},
                        {"postponed", p.postponed},
                        {"done", p.done}}
                       .dump()};
    }
    // /export
    if (!impl_->config.admin_token.empty() && admin_token != impl_->config.admin_token)
      return error_response(403, "forbidden", "export requires the admin token");
    const auto ex = export_data();
    return {200, json{{"dataset", ex.dataset}, {"controls", ex.controls}}.dump()};
  } catch (const ServiceError& e) {
    return error_response(e.status(), e.code(), e.what());
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::InvalidArgument:
      case ErrorKind::Parse:
        return error_response(400, "bad_request", e.what());
      case ErrorKind::NotFound:
        return error_response(404, "not_found", e.what());
      case ErrorKind::Duplicate:
      case ErrorKind::State:
        return error_response(409, "conflict", e.what());
      default:
        return error_response(500, "internal_error", e.what());
    }
  }
}

}  // namespace termharm
