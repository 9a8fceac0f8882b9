#include <atomic>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "hwocr/error.hpp"
#include "hwocr/ocr_adapters.hpp"
#include "test_support.hpp"

using namespace hwocr;
using hwocr::testing::TempDir;
using nlohmann::json;

namespace {

/// httplib server on an ephemeral loopback port, stopped on destruction.
class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/ocr", [this, handler](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/ocr"; }
  int hits() const { return hits_.load(); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
};

ProviderConfig remote_config(const std::string& endpoint) {
  ProviderConfig c;
  c.provider_id = "stub";
  c.kind = ProviderKind::Remote;
  c.endpoint = endpoint;
  c.retry_limit = 2;
  c.backoff_base_s = 0.01;
  c.timeout_s = 5;
  return c;
}

ImageInput png(std::string name = "photo") { return {"\x89PNG\r\n\x1a\nfake", "image/png", std::move(name)}; }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

const std::string kOddText = "  pnint(\"héllo\")\t ";

}  // namespace

TEST_CASE("replay provider serves the stored document") {
  TempDir dir;
  OcrDocument doc;
  doc.image_width = 800;
  doc.image_height = 600;
  doc.lines = {{"def f():", {10, 10, 200, 40}}, {kOddText, {90, 50, 300, 80}}};
  record_fixture(doc, dir.path() / "p01.json");

  ReplayProvider provider("replay", dir.path());
  auto first = provider.recognize(png("p01"));
  auto second = provider.recognize(png("p01"));
  CHECK(first == second);
  CHECK(first.lines == doc.lines);
  CHECK(first.provider_id == "replay");
  CHECK(first.lines[1].text == kOddText);

  CHECK(code_of([&] { provider.recognize(png("missing")); }) == ErrorCode::ProviderUnavailable);
}

TEST_CASE("fixture files") {
  TempDir dir;
  OcrDocument empty;
  empty.image_width = 10;
  empty.image_height = 10;
  record_fixture(empty, dir.path() / "nested" / "empty.json");
  CHECK(load_fixture(dir.path() / "nested" / "empty.json").lines.empty());

  CHECK(code_of([&] { load_fixture(dir.path() / "absent.json"); }) == ErrorCode::IoError);
  {
    std::ofstream(dir.path() / "bad.json") << R"({"image_width": -1, "image_height": 5, "lines": []})";
  }
  CHECK(code_of([&] { load_fixture(dir.path() / "bad.json"); }) == ErrorCode::InvalidFixture);
  {
    std::ofstream(dir.path() / "garbage.json") << "{not json";
  }
  CHECK(code_of([&] { load_fixture(dir.path() / "garbage.json"); }) == ErrorCode::InvalidFixture);
}

TEST_CASE("remote provider maps a generic response and keeps text verbatim") {
  std::string seen_auth, seen_type, seen_body;
  StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_type = req.get_header_value("Content-Type");
    seen_body = req.body;
    json body{{"image_width", 1000},
              {"image_height", 800},
              {"lines",
               {{{"text", kOddText}, {"box", {{"x_min", 95}, {"y_min", 60}, {"x_max", 400}, {"y_max", 90}}}},
                {{"text", "def main():"}, {"polygon", {{10, 12}, {300, 10}, {301, 40}, {11, 42}}}}}}};
    res.set_content(body.dump(), "application/json");
  });
  ::setenv("HWOCR_TEST_OCR_KEY", "sekrit", 1);
  auto config = remote_config(stub.endpoint());
  config.credentials_env = "HWOCR_TEST_OCR_KEY";
  RemoteProvider provider(config);
  auto doc = provider.recognize(png());

  REQUIRE(doc.lines.size() == 2);
  CHECK(doc.lines[0].text == "def main():");
  CHECK(doc.lines[0].box == BoundingBox{10, 10, 301, 42});
  CHECK(doc.lines[1].text == kOddText);
  CHECK(std::hash<std::string>{}(doc.lines[1].text) == std::hash<std::string>{}(kOddText));
  CHECK(doc.provider_id == "stub");
  CHECK(seen_auth == "Bearer sekrit");
  CHECK(seen_type == "image/png");
  CHECK(seen_body == png().bytes);
  ::unsetenv("HWOCR_TEST_OCR_KEY");
}

TEST_CASE("remote provider reads the azure layout") {
  StubServer stub([](const httplib::Request&, httplib::Response& res) {
    json body{{"status", "succeeded"},
              {"analyzeResult",
               {{"readResults",
                 {{{"page", 1},
                   {"width", 1200},
                   {"height", 900},
                   {"lines",
                    {{{"text", "    return x"}, {"boundingBox", {88, 60, 400, 62, 399, 95, 87, 93}}},
                     {{"text", "def f(x):"}, {"boundingBox", {-2, 10, 300, 10, 300, 40, -2, 40}}}}}}}}}}};
    res.set_content(body.dump(), "application/json");
  });
  auto config = remote_config(stub.endpoint());
  config.format = ResponseFormat::AzureRead;
  auto doc = RemoteProvider(config).recognize(png());
  REQUIRE(doc.lines.size() == 2);
  CHECK(doc.image_width == 1200);
  CHECK(doc.lines[0].text == "def f(x):");
  CHECK(doc.lines[0].box == BoundingBox{0, 10, 300, 40});
  CHECK(doc.lines[1].text == "    return x");
  CHECK(doc.lines[1].box == BoundingBox{87, 60, 400, 95});
}

TEST_CASE("remote provider retries transient failures") {
  std::atomic<int> calls{0};
  StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"image_width": 10, "image_height": 10, "lines": []})", "application/json");
  });
  auto doc = RemoteProvider(remote_config(stub.endpoint())).recognize(png());
  CHECK(doc.lines.empty());
  CHECK(stub.hits() == 3);
}

TEST_CASE("remote provider failures") {
  SUBCASE("persistent 5xx exhausts the retry budget") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    try {
      RemoteProvider(remote_config(stub.endpoint())).recognize(png());
      FAIL("expected failure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ProviderUnavailable);
      CHECK(std::string(e.what()).find("retries: 2") != std::string::npos);
    }
    CHECK(stub.hits() == 3);
  }
  SUBCASE("auth errors are not retried") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    CHECK(code_of([&] { RemoteProvider(remote_config(stub.endpoint())).recognize(png()); }) ==
          ErrorCode::ProviderUnavailable);
    CHECK(stub.hits() == 1);
  }
  SUBCASE("unparseable body") {
    StubServer stub([](const httplib::Request&, httplib::Response& res) { res.set_content("<html>", "text/html"); });
    CHECK(code_of([&] { RemoteProvider(remote_config(stub.endpoint())).recognize(png()); }) ==
          ErrorCode::ProviderProtocolError);
  }
  SUBCASE("nobody listening") {
    auto config = remote_config("http://127.0.0.1:1/ocr");
    config.retry_limit = 1;
    CHECK(code_of([&] { RemoteProvider(config).recognize(png()); }) == ErrorCode::ProviderUnavailable);
  }
}

TEST_CASE("provider configs") {
  auto c = provider_config_from_json({{"provider_id", "replay"}, {"fixture_dir", "fx"}}, "/data");
  CHECK(c.kind == ProviderKind::Replay);
  CHECK(c.fixture_dir == std::filesystem::path("/data/fx"));
  CHECK(c.max_concurrency == 4);
  CHECK(c.retry_limit == 3);

  auto r = provider_config_from_json(
      {{"provider_id", "azure"}, {"kind", "remote"}, {"endpoint", "https://x/read"},
       {"credentials_env", "AZURE_KEY"}, {"format", "azure_read"}, {"auth_header", "Ocp-Apim-Subscription-Key"},
       {"auth_scheme", ""}});
  CHECK(r.format == ResponseFormat::AzureRead);
  CHECK(r.credentials_env == "AZURE_KEY");
  CHECK(r.auth_scheme.empty());
  CHECK_FALSE(to_json(r).contains("api_key"));
  CHECK_FALSE(to_json(r).contains("credentials"));

  CHECK(code_of([] { provider_config_from_json({{"provider_id", "x"}, {"kind", "remote"}, {"endpoint", "http://h/"},
                                                {"api_key", "plain"}}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { provider_config_from_json({{"provider_id", "x"}, {"kind", "remote"}}); }) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of([] { provider_config_from_json({{"provider_id", "x"}, {"fixture_dir", "d"},
                                                {"max_concurrency", 0}}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("load_image derives name and media type") {
  TempDir dir;
  { std::ofstream(dir.path() / "p07.PNG", std::ios::binary) << "\x89PNG"; }
  auto image = load_image(dir.path() / "p07.PNG");
  CHECK(image.name == "p07");
  CHECK(image.media_type == "image/png");
  CHECK(image.bytes == "\x89PNG");
  CHECK(code_of([&] { load_image(dir.path() / "none.jpg"); }) == ErrorCode::IoError);
}
