#include <fstream>
#include <set>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "hwocr/error.hpp"
#include "hwocr/service.hpp"
#include "test_support.hpp"

using namespace hwocr;
using hwocr::testing::TempDir;
using hwocr::testing::synthetic_dir;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

PipelineConfig replay_config(const std::string& id, StrategyKind correction) {
  PipelineConfig c;
  c.config_id = id;
  c.ocr = ProviderConfig{};
  c.ocr->provider_id = "replay";
  c.ocr->fixture_dir = synthetic_dir() / "fixtures" / "replay";
  c.indent = IndentKind::Relative;
  c.correction.kind = correction;
  c.correction.model_id = "mock";
  return c;
}

std::shared_ptr<const Pipeline> pipeline_with(const std::string& id, std::shared_ptr<ChatClient> chat,
                                              StrategyKind correction = StrategyKind::Simple) {
  auto config = replay_config(id, correction);
  auto provider = make_provider(*config.ocr);
  return std::make_shared<Pipeline>(config, provider, std::move(chat));
}

ImageInput synthetic_image(const std::string& id) { return load_image(synthetic_dir() / "images" / (id + ".png")); }

int rejection_status(auto&& fn, std::string* reason = nullptr) {
  try {
    fn();
  } catch (const RequestRejected& e) {
    if (reason) *reason = e.reason();
    return e.status();
  }
  FAIL("request was not rejected");
  return 0;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("job lifecycle") {
  TempDir dir;
  auto echo = MockChatClient::echo();
  Service service({dir.path(), 10u << 20, 2}, {pipeline_with("echo", echo)});

  const auto id = service.submit(synthetic_image("p01"), "echo");
  CHECK_FALSE(id.empty());
  auto job = service.wait(id, 10s);
  REQUIRE(job.state == JobState::Done);
  REQUIRE(job.raw_ocr.has_value());
  REQUIRE(job.indented.has_value());
  REQUIRE(job.corrected_code.has_value());
  CHECK(job.raw_ocr->lines.size() == job.indented->lines.size());
  CHECK(*job.corrected_code == render_program(*job.indented));
  CHECK(job.stage_timings.size() == 3);
  CHECK(job.image_name == "p01");

  SUBCASE("edit and export") {
    CHECK(service.export_code(id) == *job.corrected_code);
    auto edited = service.save_edit(id, "print('fixed by hand')\n");
    CHECK(edited.edited_code == std::optional<std::string>("print('fixed by hand')\n"));
    CHECK(edited.corrected_code == job.corrected_code);
    CHECK(service.export_code(id) == "print('fixed by hand')\n");
    service.save_edit(id, "");
    CHECK(service.export_code(id).empty());
  }
  SUBCASE("recorrect keeps an audit trail") {
    auto again = service.recorrect(id, "simple");
    CHECK(again.corrected_code == job.corrected_code);
    REQUIRE(again.audit.size() == 1);
    CHECK(again.audit[0].strategy == "simple");
    CHECK(again.audit[0].previous_code == *job.corrected_code);
    CHECK_FALSE(again.audit[0].error.has_value());
    service.recorrect(id, "cot");
    CHECK(service.get(id).audit.size() == 2);
    service.recorrect(id, "none");
    CHECK(service.get(id).audit.size() == 2);

    std::string reason;
    CHECK(rejection_status([&] { service.recorrect(id, "telepathy"); }, &reason) == 400);
    CHECK(reason == "InvalidStrategy");
    CHECK(service.get(id).audit.size() == 2);
  }
  SUBCASE("jobs survive a restart") {
    service.save_edit(id, "x = 1");
    Service reopened({dir.path(), 10u << 20, 1}, {pipeline_with("echo", echo)});
    auto back = reopened.get(id);
    CHECK(back.state == JobState::Done);
    CHECK(back.edited_code == std::optional<std::string>("x = 1"));
    CHECK(back.raw_ocr == job.raw_ocr);
  }
}

TEST_CASE("recorrect with a scripted client stores its output") {
  TempDir dir;
  auto scripted = MockChatClient::scripted({{"```python\nfirst\n```", std::nullopt},
                                            {"```python\nsecond\n```", std::nullopt},
                                            {"", std::string("quota exceeded")}});
  Service service({dir.path(), 10u << 20, 1}, {pipeline_with("s", scripted)});
  const auto id = service.submit(synthetic_image("p02"), "s");
  REQUIRE(service.wait(id, 10s).state == JobState::Done);
  // Script replies are indexed by assistant turns, so the single-turn simple
  // strategy always gets reply 0.
  CHECK(service.get(id).corrected_code == std::optional<std::string>("first"));

  auto failed = service.recorrect(id, "cot");
  CHECK(failed.state == JobState::Done);
  CHECK(failed.corrected_code == std::optional<std::string>("first"));
  REQUIRE(failed.audit.size() == 1);
  REQUIRE(failed.audit[0].error.has_value());
  CHECK(failed.audit[0].error->find("step 3") != std::string::npos);
}

TEST_CASE("submission rejections") {
  TempDir dir;
  Service service({dir.path(), 10u << 20, 1}, {pipeline_with("echo", MockChatClient::echo())});
  std::string reason;

  ImageInput huge{std::string(20u << 20, '\0'), "image/png", "big"};
  huge.bytes.replace(0, 8, "\x89PNG\r\n\x1a\n");
  CHECK(rejection_status([&] { service.submit(huge, "echo"); }, &reason) == 413);
  CHECK(reason == "PayloadTooLarge");

  CHECK(rejection_status([&] { service.submit(synthetic_image("p01"), "nope"); }, &reason) == 400);
  CHECK(reason == "UnknownConfig");

  CHECK(rejection_status([&] { service.submit({"GIF89a....", "image/gif", "g"}, "echo"); }, &reason) == 415);
  CHECK(reason == "UnsupportedMediaType");
  CHECK(rejection_status([&] { service.submit({"plain text", "", "t"}, "echo"); }) == 415);

  auto sniffed = service.submit({"\xff\xd8\xff\xe0 jpeg body", "application/octet-stream", "p01"}, "echo");
  CHECK(service.wait(sniffed, 10s).image_media_type == "image/jpeg");

  CHECK(rejection_status([&] { service.get("ffffffff"); }) == 404);
}

TEST_CASE("failed provider") {
  TempDir dir;
  Service service({dir.path(), 10u << 20, 1}, {pipeline_with("echo", MockChatClient::echo())});
  auto image = synthetic_image("p01");
  image.name = "not-recorded";
  const auto id = service.submit(image, "echo");
  auto job = service.wait(id, 10s);
  CHECK(job.state == JobState::Failed);
  REQUIRE(job.error.has_value());
  CHECK(job.error->find("ProviderUnavailable") != std::string::npos);

  std::string reason;
  CHECK(rejection_status([&] { service.save_edit(id, "x"); }, &reason) == 409);
  CHECK(reason == "Conflict");
  CHECK(rejection_status([&] { service.recorrect(id, "simple"); }) == 409);
  CHECK(rejection_status([&] { service.export_code(id); }) == 409);
}

TEST_CASE("concurrent jobs stay isolated") {
  TempDir dir;
  Service service({dir.path(), 10u << 20, 3}, {pipeline_with("echo", MockChatClient::echo())});
  std::vector<std::pair<std::string, std::string>> submitted;
  for (const char* p : {"p01", "p02", "p03", "p10", "p20", "p30", "p40", "p50"}) {
    submitted.emplace_back(p, service.submit(synthetic_image(p), "echo"));
  }
  for (const auto& [program, id] : submitted) {
    auto job = service.wait(id, 20s);
    REQUIRE(job.state == JobState::Done);
    auto expected = load_fixture(synthetic_dir() / "fixtures" / "replay" / (program + ".json"));
    REQUIRE(job.raw_ocr->lines.size() == expected.lines.size());
    for (std::size_t i = 0; i < expected.lines.size(); ++i) CHECK(job.raw_ocr->lines[i].text == expected.lines[i].text);
  }
}

TEST_CASE("HTTP API") {
  TempDir dir;
  Service service({dir.path(), 10u << 20, 2}, {pipeline_with("echo", MockChatClient::echo())});
  httplib::Server server;
  service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);

  const auto png = synthetic_image("p03");
  httplib::MultipartFormDataItems form{{"image", png.bytes, "p03.png", "image/png"}, {"config_id", "echo", "", ""}};
  auto created = client.Post("/api/v1/jobs", form);
  REQUIRE(created);
  CHECK(created->status == 202);
  const auto id = json::parse(created->body).at("job_id").get<std::string>();

  json job;
  for (int i = 0; i < 2000; ++i) {
    auto polled = client.Get("/api/v1/jobs/" + id);
    REQUIRE(polled);
    CHECK(polled->status == 200);
    job = json::parse(polled->body);
    if (job["state"] == "done" || job["state"] == "failed") break;
    std::this_thread::sleep_for(5ms);
  }
  REQUIRE(job["state"] == "done");
  CHECK(job["result"]["raw_ocr"]["lines"].size() == job["result"]["indented"]["lines"].size());
  CHECK(job["result"]["corrected_code"].is_string());

  auto image = client.Get("/api/v1/jobs/" + id + "/image");
  REQUIRE(image);
  CHECK(image->body == png.bytes);
  CHECK(image->get_header_value("Content-Type") == "image/png");

  const std::string edit = "def main():\n    print(\"héllo\")\n";
  auto put = client.Put("/api/v1/jobs/" + id + "/edit", json{{"code", edit}}.dump(), "application/json");
  REQUIRE(put);
  CHECK(put->status == 200);
  auto exported = client.Get("/api/v1/jobs/" + id + "/export");
  REQUIRE(exported);
  CHECK(exported->body == edit);
  CHECK(exported->get_header_value("Content-Type").find("text/plain") == 0);

  auto recorrect = client.Post("/api/v1/jobs/" + id + "/recorrect", json{{"strategy", "simple"}}.dump(), "application/json");
  REQUIRE(recorrect);
  CHECK(recorrect->status == 200);
  CHECK(json::parse(recorrect->body)["audit"].size() == 1);

  auto bad_strategy = client.Post("/api/v1/jobs/" + id + "/recorrect", R"({"strategy": 7})", "application/json");
  REQUIRE(bad_strategy);
  CHECK(bad_strategy->status == 400);
  CHECK(json::parse(bad_strategy->body)["error"] == "InvalidStrategy");

  auto configs = client.Get("/api/v1/configs");
  REQUIRE(configs);
  CHECK(json::parse(configs->body)["configs"][0]["config_id"] == "echo");

  auto missing = client.Get("/api/v1/jobs/deadbeef");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  CHECK(json::parse(missing->body)["error"] == "NotFound");

  httplib::MultipartFormDataItems unknown{{"image", png.bytes, "p03.png", "image/png"}, {"config_id", "zzz", "", ""}};
  auto rejected = client.Post("/api/v1/jobs", unknown);
  REQUIRE(rejected);
  CHECK(rejected->status == 400);
  CHECK(json::parse(rejected->body)["error"] == "UnknownConfig");

  std::string big(20u << 20, 'x');
  big.replace(0, 8, "\x89PNG\r\n\x1a\n");
  httplib::MultipartFormDataItems oversize{{"image", big, "big.png", "image/png"}, {"config_id", "echo", "", ""}};
  auto too_big = client.Post("/api/v1/jobs", oversize);
  REQUIRE(too_big);
  CHECK(too_big->status == 413);
  CHECK(json::parse(too_big->body)["error"] == "PayloadTooLarge");

  httplib::MultipartFormDataItems gif{{"image", "GIF89a", "a.gif", "image/gif"}, {"config_id", "echo", "", ""}};
  auto unsupported = client.Post("/api/v1/jobs", gif);
  REQUIRE(unsupported);
  CHECK(unsupported->status == 415);

  // Every job lives in its own directory with the upload beside it.
  CHECK(std::filesystem::exists(dir.path() / "jobs" / id / "image.bin"));
  CHECK(json::parse(read_text(dir.path() / "jobs" / id / "job.json"))["edited_code"] == edit);

  server.stop();
  thread.join();
}

TEST_CASE("job JSON round trip") {
  Job job;
  job.job_id = "abc123";
  job.state = JobState::Done;
  job.config_id = "c";
  job.raw_ocr = OcrDocument{};
  job.indented = IndentedProgram{{{"x", 0}}};
  job.corrected_code = "x";
  job.edited_code = "y";
  job.audit.push_back({"simple", "x", "2024-01-01T00:00:00Z", std::string("boom")});
  auto back = Job::from_json(job.to_json());
  CHECK(back.to_json() == job.to_json());
  CHECK(parse_job_state("indent") == JobState::Indent);
  CHECK_FALSE(parse_job_state("sleeping").has_value());
}
