#include <doctest.h>
#include <httplib.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "termharm/ratesvc.hpp"

using namespace termharm;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  EntryCorpus corpus;
  std::vector<RatingPair> pairs;
  std::vector<ControlItem> controls;

  Fixture(std::size_t n_pairs, std::size_t n_controls) {
    std::ostringstream c;
    for (std::size_t i = 1; i <= 2 * n_pairs; ++i)
      c << "e" << i << "\tterm " << i << "|alt " << i << "\tdefinition " << i << "\tsrc\n";
    std::istringstream in(c.str());
    corpus = parse_entry_corpus(in);
    for (std::size_t i = 1; i <= n_pairs; ++i) {
      char id[16];
      std::snprintf(id, sizeof id, "p%03zu", i);
      pairs.push_back({id, "e" + std::to_string(2 * i - 1), "e" + std::to_string(2 * i),
                       PairKind::Dataset, {}});
    }
    for (std::size_t k = 1; k <= n_controls; ++k)
      controls.push_back({"c" + std::to_string(k), {"cat"}, "small animal", {"dog"},
                          "other animal", static_cast<int>(k % 5)});
  }

  ServiceConfig config(std::string log = {}) const {
    ServiceConfig cfg;
    cfg.codes = {"alpha", "beta"};
    cfg.pairs = pairs;
    cfg.corpus = &corpus;
    cfg.controls = controls;
    cfg.seed = 2024;
    cfg.log_path = std::move(log);
    return cfg;
  }
};

struct TempLog {
  fs::path path;
  explicit TempLog(const std::string& name)
      : path(fs::temp_directory_path() / ("termharm_events_" + name + ".jsonl")) {
    fs::remove(path);
  }
  ~TempLog() { fs::remove(path); }
  std::string str() const { return path.string(); }
  std::string read() const {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
};

std::string code_of(auto&& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.code();
  }
  return "none";
}

// Reference construction of the per-rater order, written independently of the
// library from its documented recipe.
std::vector<std::size_t> reference_order(std::size_t n, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto below = [&](std::uint64_t bound) {
    const std::uint64_t limit = -bound % bound;
    for (;;) {
      const std::uint64_t r = rng();
      if (r >= limit) return r % bound;
    }
  };
  std::vector<std::size_t> p(n), q(c);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = 0; i < c; ++i) q[i] = n + i;
  for (std::size_t i = n; i >= 2; --i) std::swap(p[i - 1], p[below(i)]);
  for (std::size_t i = c; i >= 2; --i) std::swap(q[i - 1], q[below(i)]);
  if (c == 0) return p;
  const std::size_t t = n + c;
  std::vector<std::size_t> out(t, SIZE_MAX);
  for (std::size_t k = 0; k < c; ++k) {
    const auto lo = static_cast<std::size_t>(std::ceil(static_cast<double>(k * t) / c));
    const auto hi = static_cast<std::size_t>(std::ceil(static_cast<double>((k + 1) * t) / c));
    out[lo + below(hi - lo)] = q[k];
  }
  std::size_t next = 0;
  for (auto& x : out)
    if (x == SIZE_MAX) x = p[next++];
  return out;
}

// Rates every remaining item of a rater with `value(pair_id)`.
void finish(RatingService& svc, const std::string& rater, auto&& value) {
  while (auto item = svc.next_item(rater)) svc.submit_rating(rater, item->pair_id, value(item->pair_id));
}

}  // namespace

TEST_SUITE("ratesvc") {

TEST_CASE("uniform_below stays in range and covers it") {
  std::mt19937_64 rng(1);
  std::vector<int> hits(7);
  for (int i = 0; i < 7000; ++i) ++hits[uniform_below(rng, 7)];
  for (int h : hits) CHECK(h > 850);
  CHECK(uniform_below(rng, 1) == 0);
  CHECK_THROWS_AS(uniform_below(rng, 0), Error);
}

TEST_CASE("item orders follow the seeded recipe") {
  for (std::uint64_t seed : {0ull, 1ull, 2024ull, 0xFFFFFFFFFFFFFFFFull})
    for (auto [n, c] : {std::pair<std::size_t, std::size_t>{152, 10}, {5, 0}, {7, 3}, {3, 3}})
      CHECK(item_order(n, c, seed) == reference_order(n, c, seed));
  CHECK(item_order(152, 10, 1) != item_order(152, 10, 2));
  CHECK(rater_seed(7, 0) != rater_seed(7, 1));
}

TEST_CASE("controls spread one per block across the sequence") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto order = item_order(152, 10, seed);
    REQUIRE(order.size() == 162);
    CHECK(std::set<std::size_t>(order.begin(), order.end()).size() == 162);
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i] >= 152) positions.push_back(i);
    REQUIRE(positions.size() == 10);
    for (std::size_t k = 0; k < 10; ++k) {
      const std::size_t lo = (k * 162 + 9) / 10, hi = ((k + 1) * 162 + 9) / 10;
      CHECK(positions[k] >= lo);
      CHECK(positions[k] < hi);
    }
    const double mean_gap = static_cast<double>(positions.back() - positions.front()) / 9.0;
    CHECK(mean_gap >= 14.0);
    CHECK(mean_gap <= 18.0);
  }
}

TEST_CASE("a rater walks the full permutation; postponed items come back at the end") {
  Fixture f(152, 10);
  RatingService svc(f.config());
  const auto id = svc.register_rater("alpha");
  CHECK(id.size() == 13);
  CHECK(id[0] == 'r');
  CHECK(code_of([&] { svc.next_item(id); }) == "instructions_not_confirmed");
  svc.confirm_instructions(id);
  svc.confirm_instructions(id);

  const auto order = svc.order_of(id);
  REQUIRE(order.size() == 162);
  CHECK(std::set<std::string>(order.begin(), order.end()).size() == 162);

  for (std::size_t pos = 1; pos <= 2; ++pos) {
    const auto item = svc.next_item(id);
    CHECK(item->position == pos);
    svc.submit_rating(id, item->pair_id, 2);
  }
  const auto third = svc.next_item(id);
  CHECK(third->position == 3);
  CHECK(third->total == 162);
  svc.postpone(id, third->pair_id);
  CHECK(svc.progress(id).postponed == 1);
  for (std::size_t pos = 4; pos <= 162; ++pos) {
    const auto item = svc.next_item(id);
    REQUIRE(item);
    CHECK(item->position == pos);
    CHECK(item->pair_id == order[pos - 1]);
    svc.submit_rating(id, item->pair_id, 1);
  }
  const auto back = svc.next_item(id);
  REQUIRE(back);
  CHECK(back->position == 3);
  CHECK(back->pair_id == third->pair_id);
  svc.submit_rating(id, back->pair_id, 4);
  CHECK_FALSE(svc.next_item(id));
  const auto p = svc.progress(id);
  CHECK(p.done);
  CHECK(p.rated == 162);
  CHECK(p.postponed == 0);
}

TEST_CASE("dataset items show corpus content, controls their own glosses") {
  Fixture f(4, 1);
  RatingService svc(f.config());
  const auto id = svc.register_rater("beta");
  svc.confirm_instructions(id);
  bool saw_control = false;
  while (auto item = svc.next_item(id)) {
    if (item->pair_id == "c1") {
      saw_control = true;
      CHECK(item->left.terms == std::vector<std::string>{"cat"});
      CHECK(item->right.definition == "other animal");
    } else {
      const auto& pair = f.pairs[static_cast<std::size_t>(std::stoi(item->pair_id.substr(1))) - 1];
      CHECK(item->left.definition == f.corpus.at(pair.left_id).definition);
      CHECK(item->right.terms == f.corpus.at(pair.right_id).terms);
    }
    svc.submit_rating(id, item->pair_id, 0);
  }
  CHECK(saw_control);
}

TEST_CASE("rejections") {
  Fixture f(6, 2);
  RatingService svc(f.config());
  CHECK(code_of([&] { svc.register_rater("gamma"); }) == "unknown_code");
  CHECK(code_of([&] { svc.confirm_instructions("r000000000000"); }) == "unknown_rater");
  const auto id = svc.register_rater("alpha");
  CHECK(code_of([&] { svc.submit_rating(id, "p001", 1); }) == "instructions_not_confirmed");
  svc.confirm_instructions(id);
  const auto order = svc.order_of(id);

  CHECK(code_of([&] { svc.submit_rating(id, order[1], 1); }) == "not_current_item");
  CHECK(code_of([&] { svc.postpone(id, order[1]); }) == "not_current_item");
  CHECK(code_of([&] { svc.submit_rating(id, "nope", 1); }) == "unknown_pair");
  CHECK(code_of([&] { svc.submit_rating(id, order[0], 5); }) == "out_of_scale");
  CHECK(code_of([&] { svc.submit_rating(id, order[0], -1); }) == "out_of_scale");
  svc.submit_rating(id, order[0], 3);
  CHECK(code_of([&] { svc.submit_rating(id, order[0], 1); }) == "edit_rejected");
  CHECK(code_of([&] { svc.submit_rating(id, order[0], 9); }) == "edit_rejected");
  CHECK(code_of([&] { svc.postpone(id, order[0]); }) == "edit_rejected");

  const auto ex = svc.export_data();
  if (order[0][0] == 'p')
    CHECK(ex.dataset.find("\t" + id + "\t3\n") != std::string::npos);
  else
    CHECK(ex.controls.find(id + "\t" + order[0] + "\t") != std::string::npos);
}

TEST_CASE("postponing is capped at the number of items") {
  Fixture f(2, 1);
  RatingService svc(f.config());
  const auto id = svc.register_rater("alpha");
  svc.confirm_instructions(id);
  for (int i = 0; i < 3; ++i) svc.postpone(id, svc.next_item(id)->pair_id);
  CHECK(svc.progress(id).postponed == 3);
  const auto stuck = svc.next_item(id)->pair_id;
  CHECK(code_of([&] { svc.postpone(id, stuck); }) == "postpone_limit");
  svc.submit_rating(id, stuck, 2);
  finish(svc, id, [](const std::string&) { return 1; });
  CHECK(svc.progress(id).done);
}

TEST_CASE("configuration checks") {
  Fixture f(3, 1);
  auto bad_kind = f.config();
  bad_kind.pairs[0].kind = PairKind::Control;
  bad_kind.pairs[0].intended_rating = 1;
  CHECK_THROWS_AS(RatingService{bad_kind}, Error);
  auto no_corpus = f.config();
  no_corpus.corpus = nullptr;
  CHECK_THROWS_AS(RatingService{no_corpus}, Error);
  auto unknown = f.config();
  unknown.pairs[0].right_id = "e999";
  CHECK_THROWS_AS(RatingService{unknown}, Error);
  auto dup = f.config();
  dup.controls[0].pair_id = "p001";
  CHECK_THROWS_AS(RatingService{dup}, Error);
  auto too_many = f.config();
  too_many.controls.resize(4, too_many.controls[0]);
  CHECK_THROWS_AS(RatingService{too_many}, Error);
  auto empty = f.config();
  empty.pairs.clear();
  empty.controls.clear();
  CHECK_THROWS_AS(RatingService{empty}, Error);
}

TEST_CASE("control item files") {
  std::istringstream ok(
      "pair_id\tleft_terms\tleft_definition\tright_terms\tright_definition\tintended_rating\n"
      "c1\tcat|kitty\tpet\tdog\tpet\t2\n");
  const auto items = parse_control_items(ok);
  REQUIRE(items.size() == 1);
  CHECK(items[0].left_terms == std::vector<std::string>{"cat", "kitty"});
  CHECK(items[0].intended_rating == 2);
  for (const char* bad : {"c1\tcat\tpet\tdog\tpet\n", "c1\tcat\tpet\tdog\tpet\t7\n",
                          "c1\t\tpet\tdog\tpet\t1\n", "c1\ta\tb\tc\td\t1\nc1\ta\tb\tc\td\t1\n"}) {
    std::istringstream in(bad);
    CHECK_THROWS_AS(parse_control_items(in), Error);
  }
  CHECK_THROWS_AS(load_control_items("/nonexistent/controls.tsv"), Error);
}

TEST_CASE("the event log restores sessions after a restart") {
  Fixture f(20, 2);
  TempLog log("restart");
  std::string id;
  std::optional<ItemView> before;
  ServiceExport export_before;
  {
    RatingService svc(f.config(log.str()));
    id = svc.register_rater("alpha");
    svc.register_rater("beta");
    svc.confirm_instructions(id);
    for (int i = 0; i < 5; ++i) svc.submit_rating(id, svc.next_item(id)->pair_id, i % 5);
    svc.postpone(id, svc.next_item(id)->pair_id);
    svc.submit_rating(id, svc.next_item(id)->pair_id, 4);
    before = svc.next_item(id);
    export_before = svc.export_data();
  }
  const auto lines = log.read();
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 10);
  const auto first = json::parse(lines.substr(0, lines.find('\n')));
  CHECK(first["event"] == "register");
  CHECK(first["order"].size() == 22);

  RatingService again(f.config(log.str()));
  CHECK(again.rater_count() == 2);
  const auto after = again.next_item(id);
  REQUIRE(after);
  CHECK(after->pair_id == before->pair_id);
  CHECK(after->position == before->position);
  CHECK(again.progress(id).rated == 6);
  CHECK(again.progress(id).postponed == 1);
  CHECK(again.export_data().dataset == export_before.dataset);
  CHECK(again.export_data().controls == export_before.controls);

  // Registrations continue the ordinal sequence after a restart.
  RatingService fresh(f.config());
  fresh.register_rater("alpha");
  fresh.register_rater("alpha");
  const auto third_fresh = fresh.register_rater("alpha");
  CHECK(again.register_rater("alpha") == third_fresh);
}

TEST_CASE("torn or unterminated log tails are repaired; corrupt lines are fatal") {
  Fixture f(5, 1);
  TempLog log("torn");
  std::string id;
  {
    RatingService svc(f.config(log.str()));
    id = svc.register_rater("alpha");
    svc.confirm_instructions(id);
    svc.submit_rating(id, svc.next_item(id)->pair_id, 2);
  }
  const auto good = log.read();
  {
    std::ofstream out(log.path, std::ios::app | std::ios::binary);
    out << R"({"event":"rating","rater_id":")" << id << R"(","pai)";
  }
  {
    RatingService svc(f.config(log.str()));
    CHECK(svc.progress(id).rated == 1);
  }
  CHECK(log.read() == good);

  {
    std::ofstream out(log.path, std::ios::trunc | std::ios::binary);
    out << good.substr(0, good.size() - 1);
  }
  {
    RatingService svc(f.config(log.str()));
    CHECK(svc.progress(id).rated == 1);
    svc.submit_rating(id, svc.next_item(id)->pair_id, 3);
  }
  {
    RatingService svc(f.config(log.str()));
    CHECK(svc.progress(id).rated == 2);
  }

  {
    std::ofstream out(log.path, std::ios::trunc | std::ios::binary);
    out << "not json\n" << good;
  }
  CHECK_THROWS_AS(RatingService(f.config(log.str())), Error);

  {
    std::ofstream out(log.path, std::ios::trunc | std::ios::binary);
    out << good << R"({"event":"rating","rater_id":")" << id
        << R"(","pair_id":"p001","category":9})" << '\n';
  }
  CHECK_THROWS_AS(RatingService(f.config(log.str())), Error);
}

TEST_CASE("replay keeps sessions whose code was retired") {
  Fixture f(3, 0);
  TempLog log("retired");
  std::string id;
  {
    RatingService svc(f.config(log.str()));
    id = svc.register_rater("beta");
  }
  auto cfg = f.config(log.str());
  cfg.codes = {"alpha"};
  RatingService svc(cfg);
  CHECK(svc.rater_count() == 1);
  CHECK(svc.order_of(id).size() == 3);
  CHECK(code_of([&] { svc.register_rater("beta"); }) == "unknown_code");
}

TEST_CASE("export shape and independence from event interleaving") {
  Fixture f(152, 10);
  RatingService a(f.config()), b(f.config());
  const auto value = [](const std::string& pair) { return static_cast<int>(pair.back() - '0') % 5; };

  const auto a1 = a.register_rater("alpha"), a2 = a.register_rater("beta");
  a.confirm_instructions(a1);
  a.confirm_instructions(a2);
  finish(a, a1, value);
  finish(a, a2, value);

  const auto b1 = b.register_rater("alpha"), b2 = b.register_rater("beta");
  CHECK(b1 == a1);
  CHECK(b2 == a2);
  b.confirm_instructions(b2);
  b.confirm_instructions(b1);
  for (bool more = true; more;) {
    more = false;
    for (const auto& r : {b2, b1})
      if (auto item = b.next_item(r)) {
        if (item->position % 7 == 0 && b.progress(r).postponed == 0)
          b.postpone(r, item->pair_id);
        else
          b.submit_rating(r, item->pair_id, value(item->pair_id));
        more = true;
      }
  }

  const auto ea = a.export_data(), eb = b.export_data();
  CHECK(ea.dataset == eb.dataset);
  CHECK(ea.controls == eb.controls);
  CHECK(std::count(ea.dataset.begin(), ea.dataset.end(), '\n') == 1 + 2 * 152);
  CHECK(std::count(ea.controls.begin(), ea.controls.end(), '\n') == 1 + 2 * 10);
  CHECK(ea.controls.starts_with("rater_id\tpair_id\tintended_rating\trating\tdeviation\n"));

  std::istringstream in(ea.dataset);
  const auto parsed = parse_rating_dataset(in, &f.corpus);
  CHECK(parsed.pairs().size() == 152);
  CHECK(parsed.pairs()[0].pair_id == "p001");
  CHECK(parsed.rating_count() == 304);

  RatingService empty(f.config());
  const auto ee = empty.export_data();
  CHECK(ee.dataset == "pair_id\tleft_id\tright_id\tkind\tintended_rating\trater_id\trating\n");
  CHECK(ee.controls == "rater_id\tpair_id\tintended_rating\trating\tdeviation\n");
}

TEST_CASE("JSON endpoints") {
  Fixture f(3, 1);
  auto cfg = f.config();
  cfg.admin_token = "s3cret";
  RatingService svc(cfg);

  auto call = [&](std::string_view method, std::string_view target, std::string_view body = {},
                  std::string_view token = {}) {
    const auto r = svc.handle(method, target, body, token);
    return std::pair{r.status, json::parse(r.body)};
  };

  auto [st, reg] = call("POST", "/register", R"({"code":"alpha"})");
  CHECK(st == 201);
  CHECK(reg["total_items"] == 4);
  const std::string id = reg["rater_id"];

  CHECK(call("POST", "/register", R"({"code":"zzz"})").second["code"] == "unknown_code");
  CHECK(call("POST", "/register", R"({"code":"zzz"})").first == 403);
  CHECK(call("POST", "/register", "[1]").second["code"] == "bad_request");
  CHECK(call("POST", "/register", "{").first == 400);
  CHECK(call("POST", "/register", "{}").first == 400);
  CHECK(call("GET", "/nowhere").first == 404);
  CHECK(call("DELETE", "/register").first == 405);

  const auto ins = call("GET", "/instructions").second;
  CHECK(ins["scale"].size() == 5);
  CHECK(ins["scale"][0]["value"] == 4);
  CHECK_FALSE(ins["instructions"]["en"].get<std::string>().empty());
  CHECK_FALSE(ins["instructions"]["de"].get<std::string>().empty());

  CHECK(call("GET", "/next?rater_id=" + id).first == 409);
  CHECK(call("GET", "/next").first == 400);
  CHECK(call("GET", "/next?rater_id=rnobody").first == 404);
  CHECK(call("POST", "/confirm", json{{"rater_id", id}}.dump()).first == 200);

  auto [s1, next] = call("GET", "/next?rater_id=" + id);
  CHECK(s1 == 200);
  CHECK(next["position"] == 1);
  CHECK(next["done"] == false);
  CHECK(next["left"]["terms"].is_array());
  const std::string first = next["pair_id"];

  auto rate = [&](const std::string& pair, json category) {
    return call("POST", "/rating", json{{"rater_id", id}, {"pair_id", pair}, {"category", category}}.dump());
  };
  CHECK(rate(first, 7).second["code"] == "out_of_scale");
  CHECK(rate(first, 7).first == 400);
  CHECK(rate(first, "two").second["code"] == "bad_request");
  CHECK(rate(first, 2).first == 200);
  CHECK(rate(first, 3).second["code"] == "edit_rejected");
  CHECK(rate(first, 3).first == 409);
  CHECK(rate(first, 99).second["code"] == "edit_rejected");

  const std::string second = call("GET", "/next?rater_id=" + id).second["pair_id"];
  CHECK(call("POST", "/postpone", json{{"rater_id", id}, {"pair_id", second}}.dump()).first == 200);
  const auto prog = call("GET", "/progress?rater_id=" + id).second;
  CHECK(prog["rated"] == 1);
  CHECK(prog["postponed"] == 1);
  CHECK(prog["total"] == 4);
  CHECK(prog["done"] == false);
  CHECK(rate(second, 1).second["code"] == "not_current_item");

  for (int guard = 0; guard < 10; ++guard) {
    const auto n = call("GET", "/next?rater_id=" + id).second;
    if (n["done"] == true) break;
    CHECK(rate(n["pair_id"], 0).first == 200);
  }
  CHECK(call("GET", "/progress?rater_id=" + id).second["done"] == true);
  CHECK(call("GET", "/next?rater_id=" + id).second == json{{"done", true}});

  CHECK(call("GET", "/export").first == 403);
  CHECK(call("GET", "/export", {}, "wrong").second["code"] == "forbidden");
  const auto ex = call("GET", "/export", {}, "s3cret");
  CHECK(ex.first == 200);
  CHECK(ex.second["controls"].get<std::string>().find(id + "\tc1\t1\t") != std::string::npos);
}

TEST_CASE("HTTP round trip on localhost") {
  Fixture f(3, 1);
  RatingService svc(f.config());
  HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread serving([&] { server.listen(); });

  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);
  auto reg = client.Post("/register", R"({"code":"beta"})", "application/json");
  REQUIRE(reg);
  CHECK(reg->status == 201);
  const std::string id = json::parse(reg->body)["rater_id"];
  CHECK(client.Post("/confirm", json{{"rater_id", id}}.dump(), "application/json")->status == 200);
  auto next = client.Get("/next?rater_id=" + id);
  REQUIRE(next);
  const auto item = json::parse(next->body);
  CHECK(item["position"] == 1);
  auto rated = client.Post(
      "/rating", json{{"rater_id", id}, {"pair_id", item["pair_id"]}, {"category", 3}}.dump(),
      "application/json");
  CHECK(rated->status == 200);
  auto again = client.Post(
      "/rating", json{{"rater_id", id}, {"pair_id", item["pair_id"]}, {"category", 1}}.dump(),
      "application/json");
  CHECK(again->status == 409);
  CHECK(json::parse(again->body)["code"] == "edit_rejected");
  CHECK(client.Get("/missing")->status == 404);
  CHECK(json::parse(client.Get("/progress?rater_id=" + id)->body)["rated"] == 1);

  server.stop();
  serving.join();
}

}
